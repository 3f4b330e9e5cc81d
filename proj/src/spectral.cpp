#include "hdm/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace hdm {

namespace {

void check_sigma_positive(double sigma, const char* what) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InputError(std::string(what) + ": sigma must be finite and >= 0");
  }
  if (sigma == 0.0) throw SingularLimitError(std::string(what) + " diverges at sigma = 0");
}

}  // namespace

ModelParams::ModelParams(double J_, double sigma_, double h_, TreeGeometry geom_)
    : J(J_), sigma(sigma_), h(h_), geom(geom_) {
  if (!(J > 0.0) || !std::isfinite(J)) throw InputError("coupling J must be finite and > 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be finite and >= 0");
  if (!(h >= 0.0) || !std::isfinite(h)) throw InputError("field h must be finite and >= 0");
}

ModelParams ModelParams::with_level_couplings(std::vector<double> levels, double h,
                                              TreeGeometry geom) {
  if (static_cast<int>(levels.size()) != geom.levels()) {
    throw InputError("expected " + std::to_string(geom.levels()) + " level couplings, got " +
                     std::to_string(levels.size()));
  }
  for (double c : levels) {
    if (!std::isfinite(c)) throw InputError("level couplings must be finite");
  }
  ModelParams p(1.0, 0.0, h, geom);
  p.J = levels.front();
  p.custom_levels = std::move(levels);
  return p;
}

double ModelParams::level_coupling(int p) const {
  if (p < 0 || p >= geom.levels()) {
    throw InputError("level " + std::to_string(p) + " outside 0.." +
                     std::to_string(geom.levels() - 1));
  }
  if (custom_levels) return (*custom_levels)[static_cast<std::size_t>(p)];
  return J * std::exp2(-(1.0 + sigma) * p);
}

std::int64_t multiplet_degeneracy(int k, const TreeGeometry& geom) {
  if (k < 0 || k > geom.levels()) {
    throw InputError("multiplet index " + std::to_string(k) + " outside 0.." +
                     std::to_string(geom.levels()));
  }
  return k == 0 ? 1 : std::int64_t{1} << (k - 1);
}

SpectrumData eigenvalues(const ModelParams& params) {
  const int n = params.levels();
  SpectrumData out;
  out.eps.resize(n + 1);
  out.degeneracy.resize(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) out.degeneracy[static_cast<std::size_t>(k)] = multiplet_degeneracy(k, params.geom);

  if (params.geometric()) {
    check_sigma_positive(params.sigma, "finite-size eigenvalue formula");
    const double a = params.sigma * std::numbers::ln2;
    const double denom = std::expm1(-a);  // -(1 - 2^-sigma)
    for (int k = 0; k <= n; ++k) {
      const double tail = std::exp(-a * (n - k));  // 2^(k sigma) / L^sigma
      double e = params.J * std::expm1(-a * (n - k)) / denom;
      e = -e;
      if (k != 0) e += params.J * tail;
      out.eps(k) = e;
    }
    return out;
  }

  // Generic profile: sum over shells inside the positive half, plus the
  // opposite half with reversed sign.
  for (int k = 0; k <= n; ++k) {
    const int inner = n - k;
    double e = 0.0;
    for (int r = 1; r <= inner; ++r) e -= std::exp2(r - 1) * params.level_coupling(r - 1);
    if (k != 0) e += std::exp2(inner) * params.level_coupling(inner);
    out.eps(k) = e;
  }
  return out;
}

double EigvecDescriptor::amplitude(std::int64_t site) const {
  if (site >= plus_first && site <= plus_last) return normalization;
  if (site >= minus_first && site <= minus_last) return -normalization;
  return 0.0;
}

Eigen::VectorXd EigvecDescriptor::expand(const TreeGeometry& geom) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(geom.length());
  v.segment(plus_first - 1, plus_last - plus_first + 1).setConstant(normalization);
  if (minus_last >= minus_first) {
    v.segment(minus_first - 1, minus_last - minus_first + 1).setConstant(-normalization);
  }
  return v;
}

EigvecDescriptor eigvec_descriptor(int k, std::int64_t m, const TreeGeometry& geom) {
  const std::int64_t deg = multiplet_degeneracy(k, geom);
  if (m < 1 || m > deg) {
    throw InputError("member " + std::to_string(m) + " outside 1.." + std::to_string(deg) +
                     " for multiplet " + std::to_string(k));
  }
  EigvecDescriptor d;
  d.k = k;
  d.m = m;
  if (k == 0) {
    d.plus_first = 1;
    d.plus_last = geom.length();
    d.normalization = 1.0 / std::sqrt(static_cast<double>(geom.length()));
    return d;
  }
  const int support_level = geom.levels() - k + 1;
  const std::int64_t half = std::int64_t{1} << (support_level - 1);
  d.plus_first = (m - 1) * 2 * half + 1;
  d.plus_last = d.plus_first + half - 1;
  d.minus_first = d.plus_last + 1;
  d.minus_last = d.minus_first + half - 1;
  d.normalization = std::exp2(-0.5 * support_level);
  return d;
}

Eigen::VectorXd eigenvector(int k, std::int64_t m, const TreeGeometry& geom) {
  return eigvec_descriptor(k, m, geom).expand(geom);
}

Eigen::MatrixXd build_hopping_matrix(const ModelParams& params, std::int64_t dense_cap) {
  const std::int64_t L = params.length();
  if (L > dense_cap) {
    throw ResourceError("dense hopping matrix of size " + std::to_string(L) +
                        " exceeds cap " + std::to_string(dense_cap));
  }
  std::vector<double> level(static_cast<std::size_t>(params.levels()));
  for (int p = 0; p < params.levels(); ++p) level[static_cast<std::size_t>(p)] = params.level_coupling(p);

  Eigen::MatrixXd m(L, L);
  for (std::int64_t j = 0; j < L; ++j) {
    for (std::int64_t i = 0; i < L; ++i) {
      if (i == j) {
        m(i, j) = 0.0;
      } else {
        const int r = hierarchical_distance(i + 1, j + 1, params.geom);
        m(i, j) = -level[static_cast<std::size_t>(r - 1)];
      }
    }
  }
  return m;
}

std::vector<DeltaTerm> delta_decomposition(const TreeGeometry& geom) {
  std::vector<DeltaTerm> terms;
  terms.reserve(static_cast<std::size_t>(geom.levels()) + 1);
  const double L = static_cast<double>(geom.length());
  terms.push_back({0, 1, 1.0 / std::sqrt(L)});
  for (int k = 1; k <= geom.levels(); ++k) {
    terms.push_back({k, 1, std::sqrt(std::exp2(k - 1) / L)});
  }
  return terms;
}

double renormalized_coupling(double sigma, double J) {
  check_sigma_positive(sigma, "renormalized coupling");
  const double two_s = std::exp2(sigma);
  return J * (2.0 * two_s - 1.0) / std::expm1(sigma * std::numbers::ln2);
}

double shifted_spectrum(int k, double sigma, double J) {
  if (k < 0) throw InputError("mode index must be >= 0");
  return renormalized_coupling(sigma, J) * std::exp2(-sigma * k);
}

}  // namespace hdm
