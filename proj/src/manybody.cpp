#include "hdm/manybody.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <string>

#include "hdm/parallel.hpp"

namespace hdm {

namespace {

using cd = std::complex<double>;

void check_sites(int sites) {
  if (sites < 1 || sites > kMaxSpinSites) {
    throw InputError("number of spins must lie in 1.." + std::to_string(kMaxSpinSites));
  }
}

}  // namespace

SpinState product_state(std::span<const int> down_sites, int sites) {
  check_sites(sites);
  std::uint64_t index = 0;
  for (int x : down_sites) {
    if (x < 1 || x > sites) throw InputError("site " + std::to_string(x) + " out of range");
    index |= std::uint64_t{1} << (x - 1);
  }
  SpinState psi = SpinState::Zero(Eigen::Index{1} << sites);
  psi(static_cast<Eigen::Index>(index)) = 1.0;
  return psi;
}

SpinState initial_defect_state(int sites) {
  const int first[] = {1};
  return product_state(first, sites);
}

SpinState embed_single_particle(const Eigen::VectorXcd& wave) {
  const auto sites = static_cast<int>(wave.size());
  check_sites(sites);
  SpinState psi = SpinState::Zero(Eigen::Index{1} << sites);
  for (int x = 0; x < sites; ++x) psi(Eigen::Index{1} << x) = wave(x);
  return psi;
}

SparseHamiltonian build_spin_hamiltonian(const ModelParams& params, int max_sites) {
  const std::int64_t L = params.length();
  if (L > max_sites) {
    throw ResourceError("exact many-body evolution is capped at " + std::to_string(max_sites) +
                        " spins, requested " + std::to_string(L));
  }
  const int sites = static_cast<int>(L);
  const Eigen::Index dim = Eigen::Index{1} << sites;

  struct Pair {
    std::uint64_t mask;
    double value;
  };
  std::vector<Pair> pairs;
  for (int i = 1; i <= sites; ++i) {
    for (int j = i + 1; j <= sites; ++j) {
      const int r = hierarchical_distance(i, j, params.geom);
      pairs.push_back({(std::uint64_t{1} << (i - 1)) | (std::uint64_t{1} << (j - 1)),
                       -params.level_coupling(r - 1)});
    }
  }

  SparseHamiltonian H{Eigen::SparseMatrix<double, Eigen::RowMajor>(dim, dim), params};
  H.matrix.reserve(Eigen::VectorXi::Constant(dim, static_cast<int>(pairs.size()) + 1));
  for (Eigen::Index s = 0; s < dim; ++s) {
    const int down = std::popcount(static_cast<std::uint64_t>(s));
    const double diag = -params.h * (sites - 2 * down);
    if (diag != 0.0) H.matrix.insert(s, s) = diag;
    for (const Pair& p : pairs) {
      H.matrix.insert(s, static_cast<Eigen::Index>(static_cast<std::uint64_t>(s) ^ p.mask)) = p.value;
    }
  }
  H.matrix.makeCompressed();
  return H;
}

SpinEvolver::SpinEvolver(const SparseHamiltonian& H, SpinState psi0, EvolutionOptions options)
    : H_(&H), psi_(std::move(psi0)), options_(options) {
  if (psi_.size() != H.matrix.rows()) throw InputError("state dimension does not match H");
  if (std::abs(psi_.norm() - 1.0) > 1e-10) throw InputError("initial spin state is not normalized");
  if (options_.krylov_dim < 2) throw InputError("Krylov dimension must be >= 2");
  if (!(options_.tolerance > 0.0)) throw InputError("Krylov tolerance must be > 0");

  if (options_.scheme == EvolutionScheme::ExactDiagonalization) {
    if (H.sites() > 10) {
      throw ResourceError("full diagonalization is limited to 10 spins");
    }
    exact_.emplace(Eigen::MatrixXd(H.matrix));
    if (exact_->info() != Eigen::Success) throw ConvergenceError("many-body eigensolver failed");
    exact_coeff_ = exact_->eigenvectors().transpose().cast<cd>() * psi_;
    return;
  }
  // The mean energy is removed inside the Krylov space and restored as a
  // phase on each step.
  shift_ = spin_energy(H, psi_);
  step_guess_ = 0.0;
}

double spin_energy(const SparseHamiltonian& H, const SpinState& psi) {
  const Eigen::VectorXcd hpsi = H.matrix * psi;
  return psi.dot(hpsi).real();
}

void SpinEvolver::advance_to(double t) {
  if (!std::isfinite(t)) throw InputError("target time must be finite");
  if (t < time_) throw InputError("time grid must be ascending");
  if (exact_) {
    Eigen::VectorXcd c = exact_coeff_;
    for (Eigen::Index n = 0; n < c.size(); ++n) c(n) *= std::polar(1.0, -exact_->eigenvalues()(n) * t);
    psi_ = exact_->eigenvectors().cast<cd>() * c;
    time_ = t;
    return;
  }
  while (time_ < t) {
    krylov_advance(t - time_);
  }
}

void SpinEvolver::krylov_advance(double remaining) {
  const Eigen::Index dim = psi_.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(options_.krylov_dim, dim));
  const double beta0 = psi_.norm();

  Eigen::MatrixXcd V(dim, m_max + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m_max + 1, m_max + 1);
  V.col(0) = psi_ / beta0;
  int m = m_max;
  double beta_next = 0.0;
  for (int j = 0; j < m_max; ++j) {
    Eigen::VectorXcd w = H_->matrix * V.col(j) - shift_ * V.col(j);
    ++matvecs_;
    const double alpha = V.col(j).dot(w).real();
    T(j, j) = alpha;
    w -= alpha * V.col(j);
    if (j > 0) w -= T(j, j - 1) * V.col(j - 1);
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
    }
    beta_next = w.norm();
    if (beta_next < 1e-13) {  // invariant subspace, the projection is exact
      m = j + 1;
      beta_next = 0.0;
      break;
    }
    T(j + 1, j) = T(j, j + 1) = beta_next;
    V.col(j + 1) = w / beta_next;
  }

  const Eigen::MatrixXd Tm = T.topLeftCorner(m, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
  const Eigen::MatrixXd& Q = es.eigenvectors();
  const Eigen::VectorXd q0 = Q.row(0).transpose();

  auto propagate = [&](double tau) {
    Eigen::VectorXcd c(m);
    for (int i = 0; i < m; ++i) c(i) = q0(i) * std::polar(1.0, -es.eigenvalues()(i) * tau);
    return Eigen::VectorXcd(Q.cast<cd>() * c);
  };

  double tau = step_guess_ > 0.0 ? std::min(step_guess_, remaining) : remaining;
  Eigen::VectorXcd u;
  for (;;) {
    u = propagate(tau);
    const double err = beta0 * beta_next * std::abs(u(m - 1));
    if (err <= options_.tolerance) {
      step_guess_ = std::max(tau, std::min(2.0 * tau, 0.9 * tau * std::pow(options_.tolerance / std::max(err, 1e-300), 1.0 / m)));
      break;
    }
    const double shrink = std::clamp(0.9 * std::pow(options_.tolerance / err, 1.0 / m), 0.1, 0.9);
    tau *= shrink;
    if (tau < 1e-14 * std::max(1.0, time_)) {
      throw ConvergenceError("Krylov step underflow at t = " + std::to_string(time_) +
                             " (error estimate " + std::to_string(err) + ", subspace " +
                             std::to_string(m) + ")");
    }
  }
  const double taken = std::min(tau, remaining);
  psi_ = beta0 * std::polar(1.0, -shift_ * taken) * (V.leftCols(m) * u);
  time_ += taken;
}

Eigen::VectorXd magnetization_profile(const SpinState& psi, int sites) {
  if (psi.size() != (Eigen::Index{1} << sites)) throw InputError("state dimension does not match L");
  Eigen::VectorXd n = Eigen::VectorXd::Zero(sites);
  for (Eigen::Index s = 0; s < psi.size(); ++s) {
    const double p = std::norm(psi(s));
    if (p == 0.0) continue;
    auto bits = static_cast<std::uint64_t>(s);
    while (bits != 0) {
      n(std::countr_zero(bits)) += p;
      bits &= bits - 1;
    }
  }
  return n;
}

double spin_parity(const SpinState& psi) {
  double acc = 0.0;
  for (Eigen::Index s = 0; s < psi.size(); ++s) {
    const double p = std::norm(psi(s));
    acc += (std::popcount(static_cast<std::uint64_t>(s)) % 2 == 0) ? p : -p;
  }
  return acc;
}

double entanglement_entropy(const SpinState& psi, int sites, int cut) {
  if (psi.size() != (Eigen::Index{1} << sites)) throw InputError("state dimension does not match L");
  if (cut < 1 || cut >= sites) {
    throw InputError("cut " + std::to_string(cut) + " outside 1.." + std::to_string(sites - 1));
  }
  // Column-major reshape: rows index sites 1..cut, columns the rest.
  const Eigen::Index rows = Eigen::Index{1} << cut;
  const Eigen::Index cols = psi.size() / rows;
  Eigen::Map<const Eigen::MatrixXcd> M(psi.data(), rows, cols);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  double S = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double lambda = svd.singularValues()(i) * svd.singularValues()(i);
    if (lambda > 1e-300) S -= lambda * std::log(lambda);
  }
  return S;
}

Eigen::VectorXd total_excitations(const ObservableSeries& series) { return series.n.rowwise().sum(); }

QuasiConservationReport quasi_conservation_report(const ObservableSeries& series) {
  const Eigen::VectorXd total = total_excitations(series);
  QuasiConservationReport rep;
  for (Eigen::Index i = 0; i < total.size(); ++i) {
    const double dev = std::abs(total(i) - 1.0);
    if (dev > rep.max_deviation) rep = {dev, series.times[static_cast<std::size_t>(i)]};
  }
  return rep;
}

Eigen::MatrixXd shell_probability(const ObservableSeries& series, const TreeGeometry& geom) {
  if (series.n.cols() != geom.length()) throw InputError("series width does not match L");
  const int N = geom.levels();
  Eigen::MatrixXd P(series.n.rows(), N + 1);
  P.col(0) = series.n.col(0);
  for (int r = 1; r <= N; ++r) {
    const std::int64_t size = shell_size(r, geom);
    const Eigen::VectorXd mean = series.n.middleCols(shell_first_site(r) - 1, size).rowwise().mean();
    P.col(r) = std::exp2(r - 1) * mean;
  }
  return P;
}

ObservableSeries evolve_spin(const SparseHamiltonian& H, const SpinState& psi0,
                             std::span<const double> times, const EvolutionOptions& options) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1]) throw InputError("time grid must be ascending");
  }
  if (!times.empty() && times.front() < 0.0) throw InputError("time grid must start at t >= 0");
  const int L = H.sites();
  const auto nt = static_cast<Eigen::Index>(times.size());

  ObservableSeries out;
  out.times.assign(times.begin(), times.end());
  out.n.resize(nt, L);
  out.energy.resize(nt);
  out.norm.resize(nt);
  out.parity.resize(nt);
  if (options.entropy && L > 1) out.entropy = Eigen::MatrixXd(nt, L - 1);

  SpinEvolver evolver(H, psi0, options);
  for (Eigen::Index i = 0; i < nt; ++i) {
    evolver.advance_to(times[static_cast<std::size_t>(i)]);
    const SpinState& psi = evolver.state();
    out.n.row(i) = magnetization_profile(psi, L).transpose();
    out.energy(i) = spin_energy(H, psi);
    out.norm(i) = psi.norm();
    out.parity(i) = spin_parity(psi);
    if (out.entropy) {
      const auto cuts = parallel_map(static_cast<std::size_t>(L - 1), [&](std::size_t c) {
        return entanglement_entropy(psi, L, static_cast<int>(c) + 1);
      });
      for (int c = 0; c < L - 1; ++c) (*out.entropy)(i, c) = cuts[static_cast<std::size_t>(c)];
    }
  }
  out.total = total_excitations(out);
  out.shell_P = shell_probability(out, H.params.geom);
  return out;
}

}  // namespace hdm
