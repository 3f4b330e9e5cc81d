#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hdm/spectral.hpp"

namespace hdm {

/// Many-body amplitudes over 2^L basis states. Site x (1-based) is bit x-1
/// of the basis index; a 0 bit is spin up, a 1 bit is spin down (a defect).
using SpinState = Eigen::VectorXcd;

inline constexpr int kMaxSpinSites = 16;

/// Basis state with defects on the listed sites.
SpinState product_state(std::span<const int> down_sites, int sites);

/// |down up up ... up>.
SpinState initial_defect_state(int sites);

/// Embeds a single-particle wave function (site x at index x-1) into the
/// one-defect sector.
SpinState embed_single_particle(const Eigen::VectorXcd& wave);

/// H = -sum_{i<j} J_{r(i,j)-1} sx_i sx_j - h sum_i sz_i.
struct SparseHamiltonian {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  ModelParams params;

  int sites() const { return static_cast<int>(params.length()); }
};

SparseHamiltonian build_spin_hamiltonian(const ModelParams& params,
                                         int max_sites = kMaxSpinSites);

enum class EvolutionScheme { Krylov, ExactDiagonalization };

struct EvolutionOptions {
  EvolutionScheme scheme = EvolutionScheme::Krylov;
  int krylov_dim = 30;
  double tolerance = 1e-9;  // local error target per Krylov step
  bool entropy = false;     // record S(x, t) for every cut
};

/// Observables sampled on the requested time grid. Matrices are indexed
/// (time, site-1), (time, r) and (time, cut-1).
struct ObservableSeries {
  std::vector<double> times;
  Eigen::MatrixXd n;
  Eigen::VectorXd total;
  Eigen::MatrixXd shell_P;
  std::optional<Eigen::MatrixXd> entropy;
  Eigen::VectorXd energy;
  Eigen::VectorXd norm;
  Eigen::VectorXd parity;
};

/// Advances a state under exp(-i H t). One evolver owns its state.
class SpinEvolver {
 public:
  SpinEvolver(const SparseHamiltonian& H, SpinState psi0, EvolutionOptions options = {});

  double time() const { return time_; }
  const SpinState& state() const { return psi_; }
  std::int64_t matvecs() const { return matvecs_; }

  void advance_to(double t);

 private:
  void krylov_advance(double dt);

  const SparseHamiltonian* H_;
  SpinState psi_;
  EvolutionOptions options_;
  double time_ = 0.0;
  double shift_ = 0.0;
  double step_guess_ = 0.0;
  std::int64_t matvecs_ = 0;
  std::optional<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> exact_;
  Eigen::VectorXcd exact_coeff_;
};

ObservableSeries evolve_spin(const SparseHamiltonian& H, const SpinState& psi0,
                             std::span<const double> times, const EvolutionOptions& options = {});

/// n(x) = (1 - <sz_x>) / 2 for x = 1..L.
Eigen::VectorXd magnetization_profile(const SpinState& psi, int sites);

double spin_energy(const SparseHamiltonian& H, const SpinState& psi);

/// <prod_x sz_x>.
double spin_parity(const SpinState& psi);

Eigen::VectorXd total_excitations(const ObservableSeries& series);

struct QuasiConservationReport {
  double max_deviation = 0.0;
  double at_time = 0.0;
};

/// max_t |N(t) - 1|.
QuasiConservationReport quasi_conservation_report(const ObservableSeries& series);

/// P(r, t) from the shell-averaged n.
Eigen::MatrixXd shell_probability(const ObservableSeries& series, const TreeGeometry& geom);

/// von Neumann entropy (natural log) of sites 1..cut.
double entanglement_entropy(const SpinState& psi, int sites, int cut);

}  // namespace hdm
