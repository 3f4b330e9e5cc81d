#include "hdm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace hdm {

namespace {

void check_normalized(const Eigen::VectorXcd& v) {
  const double norm = v.norm();
  if (std::abs(norm - 1.0) > 1e-10) {
    throw InputError("initial state has norm " + std::to_string(norm) + ", expected 1");
  }
}

}  // namespace

DenseOperator::DenseOperator(Eigen::MatrixXd matrix)
    : matrix_(std::move(matrix)), cache_(std::make_unique<Cache>()) {
  if (matrix_.rows() != matrix_.cols()) throw InputError("dense operator must be square");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw InputError("dense operator is not symmetric");
  }
}

DenseOperator::DenseOperator(const ModelParams& params, std::int64_t dense_cap)
    : DenseOperator(build_hopping_matrix(params, dense_cap)) {}

const DenseOperator::Cache& DenseOperator::cache() const {
  std::call_once(cache_->once, [this] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_);
    if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
    cache_->values = solver.eigenvalues();
    cache_->vectors = solver.eigenvectors();
  });
  return *cache_;
}

const Eigen::VectorXd& DenseOperator::eigenvalues() const { return cache().values; }
const Eigen::MatrixXd& DenseOperator::eigenvectors() const { return cache().vectors; }

Eigen::VectorXcd DenseOperator::evolve(double t, const Eigen::VectorXcd& v) const {
  if (v.size() != size()) throw InputError("state size does not match the operator");
  const Cache& c = cache();
  Eigen::VectorXcd coeff = c.vectors.transpose().cast<std::complex<double>>() * v;
  for (Eigen::Index n = 0; n < coeff.size(); ++n) coeff(n) *= std::polar(1.0, -c.values(n) * t);
  return c.vectors.cast<std::complex<double>>() * coeff;
}

Eigen::VectorXcd dense_evolve(const ModelParams& params, double t, const Eigen::VectorXcd& initial,
                              std::int64_t dense_cap) {
  if (initial.size() != params.length()) throw InputError("state size does not match L");
  check_normalized(initial);
  return DenseOperator(params, dense_cap).evolve(t, initial);
}

FastPropagator::FastPropagator(const ModelParams& params)
    : params_(params), spectrum_(eigenvalues(params)) {}

Eigen::VectorXcd FastPropagator::evolve(double t, const Eigen::VectorXcd& initial) const {
  Eigen::VectorXcd out;
  evolve(t, initial, out);
  return out;
}

void FastPropagator::evolve(double t, const Eigen::VectorXcd& initial, Eigen::VectorXcd& out) const {
  if (initial.size() != params_.length()) {
    throw InputError("state size " + std::to_string(initial.size()) + " does not match L = " +
                     std::to_string(params_.length()));
  }
  // Same cascade as tree_transform but in place: after the pass with stride
  // s, index i + s (i a multiple of 2s) holds a member of multiplet
  // k = N - log2(s). Strides below kBlock run block by block so the bulk of
  // the work stays in cache; the phases are applied on the way back up.
  constexpr Eigen::Index kBlock = 4096;
  const Eigen::Index L = initial.size();
  const int n = params_.levels();
  const double r = 1.0 / std::sqrt(2.0);
  if (out.data() != initial.data()) out = initial;
  std::complex<double>* d = out.data();
  auto up = [r](std::complex<double>* p, Eigen::Index len, Eigen::Index s) {
    for (Eigen::Index i = 0; i < len; i += 2 * s) {
      const std::complex<double> a = p[i], b = p[i + s];
      p[i] = (a + b) * r;
      p[i + s] = (a - b) * r;
    }
  };
  auto down = [r](std::complex<double>* p, Eigen::Index len, Eigen::Index s, std::complex<double> phase) {
    for (Eigen::Index i = 0; i < len; i += 2 * s) {
      const std::complex<double> a = p[i], b = p[i + s] * phase;
      p[i] = (a + b) * r;
      p[i + s] = (a - b) * r;
    }
  };
  auto phase = [&](Eigen::Index s) {
    return std::polar(1.0, -spectrum_.eps(n - std::countr_zero(static_cast<std::uint64_t>(s))) * t);
  };

  const Eigen::Index block = std::min(L, kBlock);
  for (Eigen::Index b = 0; b < L; b += block) {
    for (Eigen::Index s = 1; s < block; s *= 2) up(d + b, block, s);
  }
  for (Eigen::Index s = block; s < L; s *= 2) up(d, L, s);
  d[0] *= std::polar(1.0, -spectrum_.eps(0) * t);
  for (Eigen::Index s = L / 2; s >= block; s /= 2) down(d, L, s, phase(s));
  std::vector<std::complex<double>> phases;
  for (Eigen::Index s = block / 2; s >= 1; s /= 2) phases.push_back(phase(s));
  for (Eigen::Index b = 0; b < L; b += block) {
    std::size_t level = 0;
    for (Eigen::Index s = block / 2; s >= 1; s /= 2) down(d + b, block, s, phases[level++]);
  }
}

Eigen::VectorXcd fast_evolve(const ModelParams& params, double t, const Eigen::VectorXcd& initial) {
  return FastPropagator(params).evolve(t, initial);
}

Eigen::VectorXcd delta_state(const TreeGeometry& geom) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(geom.length());
  v(0) = 1.0;
  return v;
}

}  // namespace hdm
