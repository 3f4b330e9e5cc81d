#include "hdm/analytic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace hdm {

namespace {

std::mutex g_warn_mutex;
std::function<void(std::string_view)> g_warn = [](std::string_view msg) {
  std::clog << "warning: " << msg << '\n';
};

void warn(std::string_view msg) {
  std::lock_guard lock(g_warn_mutex);
  if (g_warn) g_warn(msg);
}

cplx phase(double angle) { return std::polar(1.0, -angle); }

// Route tiny sigma to the closed form, reject sigma <= 0.
bool use_sigma_zero(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be finite and >= 0");
  if (sigma == 0.0) throw SingularLimitError("thermodynamic mode series diverges at sigma = 0");
  if (sigma < kSigmaZeroThreshold) {
    warn("sigma = " + std::to_string(sigma) +
         " is below the series threshold; using the sigma = 0 closed form");
    return true;
  }
  return false;
}

void check_time(double t) {
  if (!std::isfinite(t)) throw InputError("time must be finite");
}

// psi(t) = sum_k weight_k exp(-i freq_k t)
struct ModeSum {
  std::vector<double> weight;
  std::vector<double> freq;
  double multiplicity = 1.0;  // P = multiplicity * |psi|^2

  cplx operator()(double t) const {
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k < weight.size(); ++k) acc += weight[k] * phase(freq[k] * t);
    return acc;
  }
};

ModeSum finite_modes(int r, const ModelParams& params) {
  const int n = params.levels();
  if (r < 0 || r > n) {
    throw InputError("shell " + std::to_string(r) + " outside 0.." + std::to_string(n));
  }
  const SpectrumData spec = eigenvalues(params);
  const double L = static_cast<double>(params.length());
  ModeSum m;
  const int top = r == 0 ? n : n - r;
  m.weight.push_back(1.0 / L);
  m.freq.push_back(spec.eps(0));
  for (int k = 1; k <= top; ++k) {
    m.weight.push_back(std::exp2(k - 1) / L);
    m.freq.push_back(spec.eps(k));
  }
  if (r >= 1) {
    m.weight.push_back(-std::exp2(-r));
    m.freq.push_back(spec.eps(n - r + 1));
  }
  m.multiplicity = r == 0 ? 1.0 : std::exp2(r - 1);
  return m;
}

ModeSum thermo_modes(int r, double sigma, double J, const TruncationPolicy& policy) {
  const double jr = renormalized_coupling(sigma, J);
  ModeSum m;
  for (int k = r; k < r + policy.K; ++k) {
    m.weight.push_back(std::exp2(-k - 1));
    m.freq.push_back(jr * std::exp2(-sigma * k));
  }
  if (r >= 1) {
    m.weight.push_back(-std::exp2(-r));
    m.freq.push_back(jr * std::exp2(-sigma * (r - 1)));
  }
  m.multiplicity = r == 0 ? 1.0 : std::exp2(r - 1);
  return m;
}

// Trapezoid rule on a uniform grid; phases advanced by rotation and reseeded
// exactly every few hundred steps.
double trapezoid_average(const ModeSum& modes, double T, double dt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InputError("averaging horizon T must be > 0");
  if (!(dt > 0.0)) throw InputError("quadrature step must be > 0");
  const auto steps = static_cast<std::int64_t>(std::ceil(T / dt));
  const double h = T / static_cast<double>(steps);
  const std::size_t nm = modes.weight.size();
  std::vector<cplx> z(nm), rot(nm);
  for (std::size_t k = 0; k < nm; ++k) rot[k] = phase(modes.freq[k] * h);

  constexpr std::int64_t kReseed = 256;
  double sum = 0.0;
  for (std::int64_t n = 0; n <= steps; ++n) {
    if (n % kReseed == 0) {
      const double t = static_cast<double>(n) * h;
      for (std::size_t k = 0; k < nm; ++k) z[k] = phase(modes.freq[k] * t);
    }
    cplx psi{0.0, 0.0};
    for (std::size_t k = 0; k < nm; ++k) {
      psi += modes.weight[k] * z[k];
      z[k] *= rot[k];
    }
    const double p = std::norm(psi);
    sum += (n == 0 || n == steps) ? 0.5 * p : p;
  }
  return modes.multiplicity * sum * h / T;
}

}  // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
  std::lock_guard lock(g_warn_mutex);
  g_warn = std::move(handler);
}

double TruncationPolicy::tail_bound() const { return std::exp2(-K); }

void TruncationPolicy::validate() const {
  if (K < 1) throw InputError("series cutoff K must be >= 1");
  if (r_max < 0) throw InputError("shell cutoff must be >= 0");
}

cplx psi_finite(int r, double t, const ModelParams& params) {
  check_time(t);
  return finite_modes(r, params)(t);
}

WaveProfile psi_finite_shells(double t, const ModelParams& params) {
  check_time(t);
  const int n = params.levels();
  const SpectrumData spec = eigenvalues(params);
  const double L = static_cast<double>(params.length());

  // prefix(j) = (1/L)(e0 + sum_{k=1..j} 2^(k-1) e_k)
  std::vector<cplx> prefix(static_cast<std::size_t>(n) + 1);
  prefix[0] = phase(spec.eps(0) * t) / L;
  for (int k = 1; k <= n; ++k) {
    prefix[static_cast<std::size_t>(k)] =
        prefix[static_cast<std::size_t>(k - 1)] + std::exp2(k - 1) / L * phase(spec.eps(k) * t);
  }
  WaveProfile out;
  out.time = t;
  out.mode = ProfileMode::Shell;
  out.amplitudes.resize(n + 1);
  out.amplitudes(0) = prefix[static_cast<std::size_t>(n)];
  for (int r = 1; r <= n; ++r) {
    out.amplitudes(r) = prefix[static_cast<std::size_t>(n - r)] -
                        std::exp2(-r) * phase(spec.eps(n - r + 1) * t);
  }
  return out;
}

WaveProfile psi_finite_sites(double t, const ModelParams& params) {
  const WaveProfile shells = psi_finite_shells(t, params);
  WaveProfile out;
  out.time = t;
  out.mode = ProfileMode::Site;
  out.amplitudes.resize(params.length());
  out.amplitudes(0) = shells.amplitudes(0);
  for (int r = 1; r <= params.levels(); ++r) {
    const std::int64_t first = shell_first_site(r);
    out.amplitudes.segment(first - 1, std::int64_t{1} << (r - 1)).setConstant(shells.amplitudes(r));
  }
  return out;
}

cplx psi_thermo(int r, double t, double sigma, double J, const TruncationPolicy& policy) {
  check_time(t);
  if (r < 0) throw InputError("shell index must be >= 0");
  policy.validate();
  if (use_sigma_zero(sigma)) return sigma_zero(r, t, J);
  const double jr = renormalized_coupling(sigma, J);
  auto return_amplitude = [&](double tau) {
    cplx acc{0.0, 0.0};
    for (int k = 0; k < policy.K; ++k) acc += std::exp2(-k - 1) * phase(jr * tau * std::exp2(-sigma * k));
    return acc;
  };
  if (r == 0) return return_amplitude(t);
  return std::exp2(-r) * (return_amplitude(std::exp2(-sigma * r) * t) -
                          phase(jr * t * std::exp2(-sigma * (r - 1))));
}

WaveProfile psi_thermo_shells(double t, double sigma, double J, const TruncationPolicy& policy) {
  check_time(t);
  policy.validate();
  WaveProfile out;
  out.time = t;
  out.mode = ProfileMode::Shell;
  out.amplitudes.resize(policy.r_max + 1);
  if (use_sigma_zero(sigma)) {
    for (int r = 0; r <= policy.r_max; ++r) out.amplitudes(r) = sigma_zero(r, t, J);
    return out;
  }
  const double jr = renormalized_coupling(sigma, J);
  const int modes = policy.K + policy.r_max;
  std::vector<cplx> weighted(static_cast<std::size_t>(modes));
  std::vector<cplx> z(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    z[static_cast<std::size_t>(k)] = phase(jr * t * std::exp2(-sigma * k));
    weighted[static_cast<std::size_t>(k)] = std::exp2(-k - 1) * z[static_cast<std::size_t>(k)];
  }
  for (int r = 0; r <= policy.r_max; ++r) {
    cplx window{0.0, 0.0};
    for (int k = r; k < r + policy.K; ++k) window += weighted[static_cast<std::size_t>(k)];
    if (r >= 1) window -= std::exp2(-r) * z[static_cast<std::size_t>(r - 1)];
    out.amplitudes(r) = window;
  }
  return out;
}

cplx scaling_function(double s, double sigma, double J, const TruncationPolicy& policy) {
  check_time(s);
  policy.validate();
  if (use_sigma_zero(sigma)) return 2.0 * sigma_zero(1, s, J);  // F(s) = 2 psi(1, s) at sigma = 0
  const double jr = renormalized_coupling(sigma, J);
  return psi_thermo(0, s, sigma, J, policy) - phase(jr * std::exp2(sigma) * s);
}

double probability(int r, cplx psi_r) {
  if (r < 0) throw InputError("shell index must be >= 0");
  return r == 0 ? std::norm(psi_r) : std::exp2(r - 1) * std::norm(psi_r);
}

ProbabilityProfile shell_probabilities(const WaveProfile& profile) {
  ProbabilityProfile out;
  out.time = profile.time;
  const auto size = profile.amplitudes.size();
  if (profile.mode == ProfileMode::Shell) {
    out.values.resize(size);
    for (Eigen::Index r = 0; r < size; ++r) out.values(r) = probability(static_cast<int>(r), profile.amplitudes(r));
    return out;
  }
  if (size < 1 || !std::has_single_bit(static_cast<std::uint64_t>(size))) {
    throw InputError("site profile length must be a power of two");
  }
  const int n = std::countr_zero(static_cast<std::uint64_t>(size));
  out.values.resize(n + 1);
  out.values(0) = std::norm(profile.amplitudes(0));
  for (int r = 1; r <= n; ++r) {
    out.values(r) = profile.amplitudes.segment(shell_first_site(r) - 1, std::int64_t{1} << (r - 1))
                        .squaredNorm();
  }
  return out;
}

double tail_probability(int R, const ProbabilityProfile& probs) {
  if (R < 0) throw InputError("tail start must be >= 0");
  double acc = 0.0;
  for (Eigen::Index r = R + 1; r < probs.values.size(); ++r) acc += probs.values(r);
  return acc;
}

double time_average(int r, double T, const ModelParams& params, double dt) {
  const ModeSum modes = finite_modes(r, params);
  return trapezoid_average(modes, T, dt > 0.0 ? dt : 0.01 / params.J);
}

double time_average_thermo(int r, double T, double sigma, double J,
                           const TruncationPolicy& policy, double dt) {
  if (r < 0) throw InputError("shell index must be >= 0");
  policy.validate();
  if (!(J > 0.0)) throw InputError("coupling J must be > 0");
  if (use_sigma_zero(sigma)) {
    // Closed-form probability sampled on the same grid.
    const double step = dt > 0.0 ? dt : 0.01 / J;
    if (!(T > 0.0)) throw InputError("averaging horizon T must be > 0");
    const auto steps = static_cast<std::int64_t>(std::ceil(T / step));
    const double h = T / static_cast<double>(steps);
    double sum = 0.0;
    for (std::int64_t n = 0; n <= steps; ++n) {
      const double p = sigma_zero_probability(r, static_cast<double>(n) * h, J);
      sum += (n == 0 || n == steps) ? 0.5 * p : p;
    }
    return sum * h / T;
  }
  return trapezoid_average(thermo_modes(r, sigma, J, policy), T, dt > 0.0 ? dt : 0.01 / J);
}

double closed_form_average(int r) {
  if (r < 0) throw InputError("shell index must be >= 0");
  return r == 0 ? 1.0 / 3.0 : std::exp2(1 - r) / 3.0;
}

double tail_average(int R) {
  if (R < 0) throw InputError("tail start must be >= 0");
  return std::exp2(1 - R) / 3.0;
}

double tail_bound(int R) {
  if (R < 0) throw InputError("tail start must be >= 0");
  return std::exp2(1 - R);
}

cplx sigma_zero(int r, double t, double J) {
  if (r < 0) throw InputError("shell index must be >= 0");
  check_time(t);
  const cplx u = std::polar(1.0, J * t);
  if (r == 0) return 1.0 / (2.0 - u);
  return std::exp2(1 - r) * std::polar(1.0, J * r * t) * (1.0 - std::conj(u)) / (2.0 - u);
}

double sigma_zero_probability(int r, double t, double J) {
  if (r < 0) throw InputError("shell index must be >= 0");
  check_time(t);
  const double c = std::cos(J * t);
  if (r == 0) return 1.0 / (5.0 - 4.0 * c);
  return std::exp2(-r) * (4.0 - 4.0 * c) / (5.0 - 4.0 * c);
}

double binary_entropy(double p) {
  p = std::clamp(p, 0.0, 1.0);
  auto term = [](double q) { return q > 0.0 ? -q * std::log(q) : 0.0; };
  return term(p) + term(1.0 - p);
}

double single_particle_entropy(std::int64_t x, const WaveProfile& profile) {
  const auto size = static_cast<std::int64_t>(profile.amplitudes.size());
  if (profile.mode == ProfileMode::Site) {
    if (x < 1 || x >= size) {
      throw InputError("cut position " + std::to_string(x) + " outside 1.." + std::to_string(size - 1));
    }
    return binary_entropy(profile.amplitudes.head(x).squaredNorm());
  }
  const int r_max = static_cast<int>(size) - 1;
  if (x < 1 || r_max < 0 || x > (std::int64_t{1} << r_max)) {
    throw InputError("cut position " + std::to_string(x) + " outside the shells carried by the profile");
  }
  const int rx = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(x - 1)));
  double inside = std::norm(profile.amplitudes(0));
  for (int r = 1; r < rx; ++r) inside += probability(r, profile.amplitudes(r));
  if (rx >= 1) {
    const std::int64_t partial = x - (std::int64_t{1} << (rx - 1));
    inside += static_cast<double>(partial) * std::norm(profile.amplitudes(rx));
  }
  return binary_entropy(inside);
}

ExponentFit fit_dynamical_exponent(const std::function<cplx(int, double)>& curve,
                                   std::span<const int> shells, std::span<const double> s_grid,
                                   double z_min, double z_max, double z_step) {
  if (shells.size() < 2) throw InputError("collapse fit needs at least two shells");
  if (s_grid.empty()) throw InputError("collapse fit needs a non-empty s grid");
  if (!(z_max > z_min) || !(z_step > 0.0)) throw InputError("invalid exponent search range");

  std::vector<cplx> g(shells.size());
  auto spread = [&](double z) {
    double acc = 0.0;
    for (double s : s_grid) {
      cplx mean{0.0, 0.0};
      for (std::size_t i = 0; i < shells.size(); ++i) {
        const int r = shells[i];
        g[i] = std::exp2(r) * curve(r, std::exp2(z * r) * s);
        mean += g[i];
      }
      mean /= static_cast<double>(shells.size());
      for (const cplx& v : g) acc += std::norm(v - mean);
    }
    return acc / static_cast<double>(s_grid.size() * shells.size());
  };

  ExponentFit best{z_min, spread(z_min)};
  for (double z = z_min + z_step; z <= z_max + 0.5 * z_step; z += z_step) {
    const double c = spread(z);
    if (c < best.spread) best = {z, c};
  }

  // Golden-section refinement inside the winning grid cell.
  double a = std::max(z_min, best.z - z_step);
  double b = std::min(z_max, best.z + z_step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = spread(c), fd = spread(d);
  for (int it = 0; it < 60 && (b - a) > 1e-10; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a); fc = spread(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a); fd = spread(d);
    }
  }
  const double zr = 0.5 * (a + b);
  const double fr = spread(zr);
  if (fr < best.spread) best = {zr, fr};
  return best;
}

}  // namespace hdm
