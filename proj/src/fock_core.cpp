#include "fock_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace ionjc {

namespace {

// ln((n+k)!/n!)
double log_rising(long n, int k) {
  if (k <= 64) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += std::log(static_cast<double>(n + j));
    return s;
  }
  return log_factorial(n + k) - log_factorial(n);
}

// Re(e^{i dphi} i^k), exact zeros for the quarter-turn cases.
double sideband_phase_factor(int k, double delta_phi) {
  switch (k % 4) {
    case 0: return std::cos(delta_phi);
    case 1: return -std::sin(delta_phi);
    case 2: return -std::cos(delta_phi);
    default: return std::sin(delta_phi);
  }
}

double log_poisson(double mean, long j) {
  if (mean == 0.0) return j == 0 ? 0.0 : -INFINITY;
  if (j < 20) return -mean + static_cast<double>(j) * std::log(mean) - log_factorial(j);
  // Stirling form avoids cancelling three large terms when j ~ mean.
  const double x = static_cast<double>(j);
  const double inv = 1.0 / x;
  const double series = inv * (1.0 / 12 - inv * inv * (1.0 / 360 - inv * inv * (1.0 / 1260 - inv * inv / 1680)));
  return (x - mean) + x * std::log1p((mean - x) / x) - 0.5 * std::log(2.0 * std::numbers::pi * x) - series;
}

}  // namespace

void ModelParams::validate() const {
  if (k < 0) throw ValidationError("k", "sideband order must be non-negative");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta", "must be positive and finite");
  if (!std::isfinite(delta_phi)) throw ValidationError("delta_phi", "must be finite");
  if (!std::isfinite(delta_omega_tilde)) throw ValidationError("delta_omega_tilde", "must be finite");
  if (!std::isfinite(nu_tilde)) throw ValidationError("nu_tilde", "must be finite");
  if (!std::isfinite(omega21_tilde)) throw ValidationError("omega21_tilde", "must be finite");
  if (arg_kappa != 0.0) throw ValidationError("arg_kappa", "the coupling phase is fixed to 0");
}

double ComplexAmplitudeVector::norm_squared() const {
  CompensatedSum s;
  for (const cd& a : entries) s.add(std::norm(a));
  return s.value();
}

double log_factorial(long n) {
  static constexpr int kTable = 32;
  static const auto table = [] {
    std::array<double, kTable> t{};
    double f = 1.0;
    for (int i = 0; i < kTable; ++i) {
      if (i > 0) f *= i;
      t[i] = std::log(f);
    }
    return t;
  }();
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "log_factorial of negative argument");
  if (n < kTable) return table[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

std::vector<double> laguerre_sequence(int n_max, int k, double x) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n_max, 0)) + 1);
  out[0] = 1.0;
  if (n_max >= 1) out[1] = 1.0 + k - x;
  for (int j = 1; j < n_max; ++j) {
    out[j + 1] = ((2.0 * j + 1.0 + k - x) * out[j] - (j + k) * out[j - 1]) / (j + 1.0);
  }
  return out;
}

double laguerre(int n, int k, double x) {
  if (n < 0 || k < 0) throw Error(ErrorKind::InvalidArgument, "laguerre: n and k must be non-negative");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + k - x;
  for (int j = 1; j < n; ++j) {
    const double next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

void bessel_j_sequence(double x, std::span<double> out) {
  if (out.empty()) return;
  std::fill(out.begin(), out.end(), 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return;
  }
  const bool negative = x < 0.0;
  const double ax = std::abs(x);
  const int max_order = static_cast<int>(out.size()) - 1;
  const int base = std::max(max_order, static_cast<int>(std::ceil(ax))) + 16;
  const int start = 2 * ((base + static_cast<int>(std::sqrt(160.0 * base))) / 2);

  thread_local std::vector<double> t;
  t.assign(static_cast<std::size_t>(start) + 2, 0.0);
  t[start] = 1e-30;
  for (int j = start; j >= 1; --j) {
    t[j - 1] = (2.0 * j / ax) * t[j] - t[j + 1];
    if (std::abs(t[j - 1]) > 1e250) {
      for (int i = j - 1; i <= start; ++i) t[i] *= 1e-250;
    }
  }
  double norm = t[0];
  for (int p = 2; p <= start; p += 2) norm += 2.0 * t[p];
  for (int p = 0; p <= max_order; ++p) {
    double v = t[p] / norm;
    if (negative && (p % 2 == 1)) v = -v;
    out[p] = v;
  }
}

double bessel_j(int order, double x) {
  const int n = std::abs(order);
  std::vector<double> seq(static_cast<std::size_t>(n) + 1);
  bessel_j_sequence(x, seq);
  double v = seq[n];
  if (order < 0 && (n % 2 == 1)) v = -v;
  return v;
}

cd coupling_f(int n, const ModelParams& params) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "coupling_f: n must be non-negative");
  const int k = params.k;
  const double phase = sideband_phase_factor(k, params.delta_phi);
  if (phase == 0.0) return {0.0, 0.0};
  const double eta2 = params.eta * params.eta;
  const double log_mag = -0.5 * eta2 + k * std::log(params.eta) - log_rising(n, k);
  return {phase * std::exp(log_mag) * laguerre(n, k, eta2), 0.0};
}

cd rabi_frequency(int m, int n, const ModelParams& params) {
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "rabi_frequency: m must be non-negative");
  const double scale = 2.0 * std::sqrt(m + 1.0) * std::exp(0.5 * log_rising(n, params.k));
  return scale * coupling_f(n, params);
}

double poisson_tail_above(double mean, int cutoff) {
  if (mean == 0.0) return 0.0;
  CompensatedSum tail;
  long j = static_cast<long>(cutoff) + 1;
  double p = std::exp(log_poisson(mean, j));
  // Terms decrease monotonically once j exceeds the mean.
  while (true) {
    tail.add(p);
    ++j;
    p *= mean / static_cast<double>(j);
    if (j > mean && (p == 0.0 || p < 1e-20 * tail.value())) break;
  }
  return tail.value();
}

int suggest_truncation(double alpha0_abs, double tail_epsilon) {
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "suggest_truncation: tail_epsilon must lie in (0,1)");
  }
  const double mean = alpha0_abs * alpha0_abs;
  if (mean == 0.0) return 0;
  const double sd = std::sqrt(mean);
  const long upper = static_cast<long>(std::ceil(mean + 20.0 * sd + 60.0));
  // suffix[j] = sum_{i >= j} P(i), built from the far tail downwards.
  std::vector<double> pmf(static_cast<std::size_t>(upper) + 2);
  for (long j = 0; j <= upper + 1; ++j) pmf[j] = std::exp(log_poisson(mean, j));
  double suffix = poisson_tail_above(mean, static_cast<int>(upper));
  long best = upper;
  for (long n = upper; n >= 0; --n) {
    // suffix == mass above n
    if (suffix < tail_epsilon) best = n;
    else break;
    suffix += pmf[n];
  }
  return static_cast<int>(best);
}

ComplexAmplitudeVector coherent_vector(cd alpha0, const TruncationPolicy& policy) {
  if (policy.n_max_motion < 0) throw Error(ErrorKind::InvalidArgument, "coherent_vector: negative cutoff");
  ComplexAmplitudeVector out;
  const int n_max = policy.n_max_motion;
  out.entries.assign(static_cast<std::size_t>(n_max) + 1, cd{});
  const double mod = std::abs(alpha0);
  if (mod == 0.0) {
    out.entries[0] = 1.0;
    out.tail_mass = 0.0;
    return out;
  }
  const double arg = std::arg(alpha0);
  const double log_mod = std::log(mod);
  for (int n = 0; n <= n_max; ++n) {
    const double log_amp = -0.5 * mod * mod + n * log_mod - 0.5 * log_factorial(n);
    out.entries[n] = std::polar(std::exp(log_amp), n * arg);
  }
  out.tail_mass = poisson_tail_above(mod * mod, n_max);
  if (out.tail_mass > policy.tail_epsilon) {
    throw Error(ErrorKind::TruncationTooSmall,
                "coherent_vector: discarded mass " + std::to_string(out.tail_mass) +
                    " exceeds tail_epsilon at n_max=" + std::to_string(n_max));
  }
  return out;
}

PoissonWindow poisson_window(double mean, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "poisson_window: epsilon must lie in (0,1)");
  }
  PoissonWindow w;
  if (mean == 0.0) {
    w.lo = w.hi = 0;
    w.weights = {1.0};
    return w;
  }
  const long mode = static_cast<long>(std::floor(mean));
  const double p_mode = std::exp(log_poisson(mean, mode));

  // Grow downwards while the remaining lower tail could exceed epsilon/2.
  std::vector<double> below;
  long lo = mode;
  double p = p_mode;
  CompensatedSum lower_tail;
  while (lo > 0) {
    const double next = p * static_cast<double>(lo) / mean;  // P(lo-1)
    // Lower tail below lo is bounded by P(lo-1) / (1 - (lo-1)/mean).
    const double bound = next / (1.0 - static_cast<double>(lo - 1) / mean);
    if (bound < 0.5 * epsilon) break;
    below.push_back(next);
    p = next;
    --lo;
  }
  // Direct summation of the discarded lower tail.
  {
    double q = p;
    for (long j = lo; j > 0; --j) {
      q *= static_cast<double>(j) / mean;
      lower_tail.add(q);
      if (q < 1e-30 * (lower_tail.value() + 1e-300)) break;
    }
  }

  std::vector<double> above;
  long hi = mode;
  p = p_mode;
  while (true) {
    const double next = p * mean / static_cast<double>(hi + 1);  // P(hi+1)
    const double ratio = mean / static_cast<double>(hi + 2);
    const double bound = ratio < 1.0 ? next / (1.0 - ratio) : INFINITY;
    if (bound < 0.5 * epsilon) break;
    above.push_back(next);
    p = next;
    ++hi;
  }
  const double upper_tail = poisson_tail_above(mean, static_cast<int>(hi));

  w.lo = lo;
  w.hi = hi;
  w.weights.reserve(below.size() + 1 + above.size());
  for (auto it = below.rbegin(); it != below.rend(); ++it) w.weights.push_back(*it);
  w.weights.push_back(p_mode);
  for (double v : above) w.weights.push_back(v);
  w.excluded_mass = lower_tail.value() + upper_tail;
  return w;
}

}  // namespace ionjc
