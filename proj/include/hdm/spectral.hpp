#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hdm/geometry.hpp"

namespace hdm {

/// Couplings of the hierarchical chain.
///
/// The default profile is J_p = J / 2^((1+sigma) p). An explicit list of level
/// couplings J_0..J_{N-1} may replace it; the eigenvectors do not depend on
/// the profile, only the eigenvalues do.
struct ModelParams {
  double J = 1.0;
  double sigma = 1.0;
  double h = 0.0;
  TreeGeometry geom{1};
  std::optional<std::vector<double>> custom_levels;

  ModelParams(double J, double sigma, double h, TreeGeometry geom);

  static ModelParams with_level_couplings(std::vector<double> levels, double h,
                                          TreeGeometry geom);

  bool geometric() const { return !custom_levels.has_value(); }
  int levels() const { return geom.levels(); }
  std::int64_t length() const { return geom.length(); }

  /// J_p for p = 0..N-1.
  double level_coupling(int p) const;
};

/// Distinct hopping-matrix eigenvalues, ascending in k for sigma > 0.
struct SpectrumData {
  Eigen::VectorXd eps;                  // eps(k), k = 0..N
  std::vector<std::int64_t> degeneracy;  // 1, 1, 2, 4, ..., 2^(N-1)
};

/// Multiplet member (k, m): +norm on [plus_first, plus_last], -norm on
/// [minus_first, minus_last]. For k = 0 the minus range is empty.
struct EigvecDescriptor {
  int k = 0;
  std::int64_t m = 1;
  std::int64_t plus_first = 1, plus_last = 1;
  std::int64_t minus_first = 1, minus_last = 0;
  double normalization = 1.0;

  double amplitude(std::int64_t site) const;
  Eigen::VectorXd expand(const TreeGeometry& geom) const;
};

struct DeltaTerm {
  int k;
  std::int64_t m;
  double coefficient;
};

std::int64_t multiplet_degeneracy(int k, const TreeGeometry& geom);

SpectrumData eigenvalues(const ModelParams& params);

EigvecDescriptor eigvec_descriptor(int k, std::int64_t m, const TreeGeometry& geom);

/// Unit-norm characteristic-function eigenvector (k, m), site x stored at x-1.
Eigen::VectorXd eigenvector(int k, std::int64_t m, const TreeGeometry& geom);

inline constexpr std::int64_t kDefaultDenseCap = 4096;

/// Dense L x L single-particle hopping matrix (zero diagonal).
Eigen::MatrixXd build_hopping_matrix(const ModelParams& params,
                                     std::int64_t dense_cap = kDefaultDenseCap);

/// Expansion of the delta on site 1: one member (m = 1) per multiplet.
std::vector<DeltaTerm> delta_decomposition(const TreeGeometry& geom);

/// J (2^(sigma+1) - 1) / (2^sigma - 1).
double renormalized_coupling(double sigma, double J);

/// Large-N spectrum measured from the top mode: Jr * 2^(-sigma k). The
/// dropped additive constant only contributes a global phase.
double shifted_spectrum(int k, double sigma, double J);

}  // namespace hdm
