#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdm/spectral.hpp"

namespace hdm {

/// Real symmetric operator with a lazily computed, immutable eigensystem.
class DenseOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd matrix);
  explicit DenseOperator(const ModelParams& params, std::int64_t dense_cap = kDefaultDenseCap);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Eigen::Index size() const { return matrix_.rows(); }

  /// Ascending eigenvalues; the decomposition runs once, on first use.
  const Eigen::VectorXd& eigenvalues() const;
  const Eigen::MatrixXd& eigenvectors() const;

  /// exp(-i H t) v through the eigendecomposition.
  Eigen::VectorXcd evolve(double t, const Eigen::VectorXcd& v) const;

 private:
  struct Cache {
    std::once_flag once;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
  };
  const Cache& cache() const;

  Eigen::MatrixXd matrix_;
  std::unique_ptr<Cache> cache_;
};

/// Dense-eigensolver evolution of a normalized single-particle state.
Eigen::VectorXcd dense_evolve(const ModelParams& params, double t, const Eigen::VectorXcd& initial,
                              std::int64_t dense_cap = kDefaultDenseCap);

namespace detail {

inline int check_tree_length(Eigen::Index size) {
  if (size < 2 || !std::has_single_bit(static_cast<std::uint64_t>(size))) {
    throw InputError("vector length " + std::to_string(size) + " is not a power of two >= 2");
  }
  return std::countr_zero(static_cast<std::uint64_t>(size));
}

}  // namespace detail

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Hopping-matrix product in O(L).
///
/// Upward pass: block sums S(p, q). Downward pass: the field felt by a block
/// is its parent's field plus J_p times the sum over its sibling. The output
/// at a leaf is minus the accumulated field. out is resized if needed and
/// must not alias v.
template <typename Derived>
void fast_apply(const ModelParams& params, const Eigen::MatrixBase<Derived>& v,
                VectorX<typename Derived::Scalar>& out) {
  using Scalar = typename Derived::Scalar;
  const int n = detail::check_tree_length(v.size());
  if (n != params.levels()) {
    throw InputError("vector length " + std::to_string(v.size()) + " does not match L = " +
                     std::to_string(params.length()));
  }
  const Eigen::Index L = v.size();
  const Eigen::Ref<const VectorX<Scalar>> x(v);

  // Block sums of levels 1..N-1 are stacked inside the output, level p at
  // start(p). Walking down, each level is overwritten with minus the field
  // it feels; level 0 finally lands on top of level 1, filled from the right
  // so no unread value is clobbered.
  if (out.data() == x.data()) throw InputError("fast_apply output must not alias its input");
  out.resize(L);
  Scalar* buf = out.data();
  auto start = [L](int p) { return L - (L >> (p - 1)); };
  for (int p = 1; p < n; ++p) {
    const Scalar* src = p == 1 ? x.data() : buf + start(p - 1);
    Scalar* dst = buf + start(p);
    for (Eigen::Index q = 0; q < (L >> p); ++q) dst[q] = src[2 * q] + src[2 * q + 1];
  }
  for (int p = n - 1; p >= 0; --p) {
    const Scalar* parent = p == n - 1 ? nullptr : buf + start(p + 1);
    const Scalar* sums = p == 0 ? x.data() : buf + start(p);
    Scalar* dst = p == 0 ? buf : buf + start(p);
    const double coupling = params.level_coupling(p);
    for (Eigen::Index j = (L >> (p + 1)) - 1; j >= 0; --j) {
      const Scalar g = parent ? parent[j] : Scalar(0);
      const Scalar a = sums[2 * j], b = sums[2 * j + 1];
      dst[2 * j] = g - coupling * b;
      dst[2 * j + 1] = g - coupling * a;
    }
  }
}

template <typename Derived>
VectorX<typename Derived::Scalar> fast_apply(const ModelParams& params,
                                             const Eigen::MatrixBase<Derived>& v) {
  VectorX<typename Derived::Scalar> out;
  fast_apply(params, v, out);
  return out;
}

/// Coefficients in the multiplet eigenbasis. Slot 0 holds the uniform mode;
/// member m of multiplet k >= 1 sits at 2^(k-1) + m - 1.
template <typename Scalar>
struct TreeCoefficients {
  VectorX<Scalar> data;

  static std::int64_t slot(int k, std::int64_t m) {
    return k == 0 ? 0 : (std::int64_t{1} << (k - 1)) + m - 1;
  }
  int levels() const { return detail::check_tree_length(data.size()); }
  Scalar& operator()(int k, std::int64_t m) { return data(slot(k, m)); }
  const Scalar& operator()(int k, std::int64_t m) const { return data(slot(k, m)); }
};

/// Orthogonal sum/difference cascade into the multiplet basis, O(L).
template <typename Derived>
TreeCoefficients<typename Derived::Scalar> tree_transform(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  detail::check_tree_length(v.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  TreeCoefficients<Scalar> c{v};
  VectorX<Scalar> tmp(v.size());
  for (Eigen::Index width = v.size(); width > 1; width /= 2) {
    const Eigen::Index half = width / 2;
    for (Eigen::Index q = 0; q < half; ++q) {
      const Scalar a = c.data(2 * q), b = c.data(2 * q + 1);
      tmp(q) = (a + b) * inv_sqrt2;
      tmp(half + q) = (a - b) * inv_sqrt2;
    }
    c.data.head(width) = tmp.head(width);
  }
  return c;
}

/// Adjoint (and inverse) of tree_transform.
template <typename Scalar>
VectorX<Scalar> inverse_tree_transform(const TreeCoefficients<Scalar>& c) {
  detail::check_tree_length(c.data.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  VectorX<Scalar> v = c.data;
  VectorX<Scalar> tmp(v.size());
  for (Eigen::Index width = 2; width <= v.size(); width *= 2) {
    const Eigen::Index half = width / 2;
    for (Eigen::Index q = 0; q < half; ++q) {
      const Scalar s = v(q), d = v(half + q);
      tmp(2 * q) = (s + d) * inv_sqrt2;
      tmp(2 * q + 1) = (s - d) * inv_sqrt2;
    }
    v.head(width) = tmp.head(width);
  }
  return v;
}

/// Exact single-particle propagator through the tree transform, O(L) per time.
class FastPropagator {
 public:
  explicit FastPropagator(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  const SpectrumData& spectrum() const { return spectrum_; }

  Eigen::VectorXcd evolve(double t, const Eigen::VectorXcd& initial) const;

  /// Writes into out (resized if needed); out may alias initial.
  void evolve(double t, const Eigen::VectorXcd& initial, Eigen::VectorXcd& out) const;

 private:
  ModelParams params_;
  SpectrumData spectrum_;
};

Eigen::VectorXcd fast_evolve(const ModelParams& params, double t, const Eigen::VectorXcd& initial);

/// delta on site 1 as a complex vector of length L.
Eigen::VectorXcd delta_state(const TreeGeometry& geom);

}  // namespace hdm
