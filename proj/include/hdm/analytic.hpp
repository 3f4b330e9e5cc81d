#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "hdm/spectral.hpp"

namespace hdm {

using cplx = std::complex<double>;

/// Cutoff of the thermodynamic-limit mode series. The neglected remainder of
/// the return amplitude is bounded by 2^-K.
struct TruncationPolicy {
  int K = 64;
  int r_max = 24;  // shells kept when a whole profile is assembled

  double tail_bound() const;
  void validate() const;
};

enum class ProfileMode { Site, Shell };

/// Single-particle amplitudes at one time. Site mode stores x = 1..L at
/// index x-1; shell mode stores r = 0..r_max at index r.
struct WaveProfile {
  Eigen::VectorXcd amplitudes;
  double time = 0.0;
  ProfileMode mode = ProfileMode::Shell;
};

/// P(r, t) for r = 0..r_max.
struct ProbabilityProfile {
  Eigen::VectorXd values;
  double time = 0.0;
};

/// Below this sigma the thermodynamic series is replaced by the sigma = 0
/// closed form (with a warning).
inline constexpr double kSigmaZeroThreshold = 1e-6;

/// Receives diagnostics such as the small-sigma rerouting notice. Defaults to
/// std::clog; pass an empty function to silence.
void set_warning_handler(std::function<void(std::string_view)> handler);

// --- finite chain --------------------------------------------------------

/// psi(r, t) on a chain of 2^N sites, initial delta on site 1.
cplx psi_finite(int r, double t, const ModelParams& params);

WaveProfile psi_finite_shells(double t, const ModelParams& params);
WaveProfile psi_finite_sites(double t, const ModelParams& params);

// --- thermodynamic limit -------------------------------------------------

/// Truncated mode series for r = 0, scaling recursion for r >= 1.
cplx psi_thermo(int r, double t, double sigma, double J, const TruncationPolicy& policy = {});

/// All shells r = 0..policy.r_max at once; agrees with psi_thermo term by term.
WaveProfile psi_thermo_shells(double t, double sigma, double J,
                              const TruncationPolicy& policy = {});

/// F(s) = psi(0, s) - exp(-i Jr 2^sigma s), so that psi(r, t) = 2^-r F(2^(-sigma r) t).
cplx scaling_function(double s, double sigma, double J, const TruncationPolicy& policy = {});

// --- probabilities -------------------------------------------------------

/// P(r) from the (uniform) amplitude of shell r.
double probability(int r, cplx psi_r);

/// Shell probabilities from either profile mode. Site mode sums |psi|^2 over
/// each shell; shell mode multiplies by the shell size.
ProbabilityProfile shell_probabilities(const WaveProfile& profile);

/// Sum of P(r) for r > R over the shells present in the profile.
double tail_probability(int R, const ProbabilityProfile& probs);

// --- time averages and bounds -------------------------------------------

/// Trapezoid average (1/T) int_0^T P(r,t) dt on a uniform grid of step <= dt.
/// dt defaults to 0.01 / J.
double time_average(int r, double T, const ModelParams& params, double dt = 0.0);
double time_average_thermo(int r, double T, double sigma, double J,
                           const TruncationPolicy& policy = {}, double dt = 0.0);

double closed_form_average(int r);
double tail_average(int R);
double tail_bound(int R);

// --- sigma -> 0 ----------------------------------------------------------

cplx sigma_zero(int r, double t, double J);
double sigma_zero_probability(int r, double t, double J);

// --- entanglement of a single defect ------------------------------------

/// -p ln p - (1-p) ln(1-p), with 0 ln 0 = 0.
double binary_entropy(double p);

/// Entropy of the cut [1, x] | [x+1, ...] for a state with one defect.
/// Site-mode profiles require 1 <= x < L; shell-mode profiles accept any x
/// inside the shells they carry.
double single_particle_entropy(std::int64_t x, const WaveProfile& profile);

// --- scaling collapse ----------------------------------------------------

struct ExponentFit {
  double z = 0.0;
  double spread = 0.0;  // mean squared deviation from the mean curve at z
};

/// Finds the exponent z that best collapses the curves 2^r g(r, 2^(z r) s)
/// onto each other over s_grid. The fit only queries g and never sees sigma.
ExponentFit fit_dynamical_exponent(const std::function<cplx(int, double)>& curve,
                                   std::span<const int> shells,
                                   std::span<const double> s_grid, double z_min = 0.05,
                                   double z_max = 4.0, double z_step = 0.005);

}  // namespace hdm
