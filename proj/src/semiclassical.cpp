#include "semiclassical.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "errors.hpp"

namespace ionjc::semiclassical {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<cd>;
constexpr cd kI{0.0, 1.0};

// f_k(n) sqrt((n+k)!/n!) == Omega_{0n} / 2
std::vector<cd> sideband_couplings(const ModelParams& params, int cutoff) {
  std::vector<cd> g;
  for (int n = 0; n + params.k <= cutoff; ++n) g.push_back(0.5 * rabi_frequency(0, n, params));
  return g;
}

void check_grid(std::span<const double> taus) {
  if (taus.empty()) throw Error(ErrorKind::InvalidArgument, "time grid is empty");
  for (std::size_t i = 1; i < taus.size(); ++i) {
    if (!(taus[i] > taus[i - 1])) throw Error(ErrorKind::InvalidArgument, "time grid must be strictly increasing");
  }
}

}  // namespace

double VibronicState::norm() const {
  CompensatedSum s;
  for (const cd& a : ground) s.add(std::norm(a));
  for (const cd& a : excited) s.add(std::norm(a));
  return std::sqrt(s.value());
}

double VibronicState::excited_population() const {
  CompensatedSum s;
  for (const cd& a : excited) s.add(std::norm(a));
  return s.value();
}

VibronicState VibronicState::basis(int level, int n, int cutoff) {
  if (n < 0 || n > cutoff || (level != 1 && level != 2)) {
    throw Error(ErrorKind::InvalidArgument, "VibronicState::basis: index out of range");
  }
  VibronicState s(cutoff);
  (level == 1 ? s.ground : s.excited)[n] = 1.0;
  return s;
}

VibronicState VibronicState::ground_coherent(cd alpha0, int cutoff, double tail_epsilon) {
  TruncationPolicy policy;
  policy.n_max_motion = cutoff;
  policy.tail_epsilon = tail_epsilon;
  VibronicState s(cutoff);
  s.ground = coherent_vector(alpha0, policy).entries;
  return s;
}

cd h_function(const ScaledTime& st) {
  return kI * (std::polar(1.0, -st.r * st.tau) - std::polar(1.0, -st.r * st.tau0));
}

cd h_over_r(const ScaledTime& st) {
  const double span = st.tau - st.tau0;
  if (st.r == 0.0) return {span, 0.0};
  // i(e^{-ir tau} - e^{-ir tau0}) = 2 sin(r span / 2) e^{-i r (tau + tau0) / 2}
  const double mean = 0.5 * (st.tau + st.tau0);
  return std::polar(2.0 * std::sin(0.5 * st.r * span) / st.r, -st.r * mean);
}

Eigen::MatrixXcd interaction_generator(double tau, double r, const ModelParams& params, int cutoff) {
  params.validate();
  if (cutoff < params.k) throw Error(ErrorKind::InvalidArgument, "interaction_generator: cutoff < k");
  const int dim = 2 * (cutoff + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const cd phase = std::polar(1.0, -r * tau);
  const auto g = sideband_couplings(params, cutoff);
  for (int n = 0; n < static_cast<int>(g.size()); ++n) {
    const int excited = cutoff + 1 + n;
    const int ground = n + params.k;
    h(excited, ground) = phase * g[n];
    h(ground, excited) = std::conj(phase * g[n]);
  }
  return h;
}

TimeOrderedPropagator::TimeOrderedPropagator(const ModelParams& params, double r, int cutoff, double tol)
    : params_(params), r_(r), cutoff_(cutoff), tol_(tol) {
  params_.validate();
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (cutoff < params.k) throw Error(ErrorKind::InvalidArgument, "cutoff must be at least k");
  couplings_ = sideband_couplings(params_, cutoff_);
}

std::vector<VibronicState> TimeOrderedPropagator::run(const VibronicState& psi0, std::span<const double> taus) {
  check_grid(taus);
  if (psi0.cutoff() != cutoff_) throw Error(ErrorKind::InvalidArgument, "state cutoff does not match propagator");

  const std::size_t half = static_cast<std::size_t>(cutoff_) + 1;
  const int k = params_.k;
  auto rhs = [this, half, k](const State& x, State& dxdt, double tau) {
    const cd phase = std::polar(1.0, -r_ * tau);
    std::fill(dxdt.begin(), dxdt.end(), cd{});
    for (std::size_t n = 0; n < couplings_.size(); ++n) {
      const cd c = phase * couplings_[n];
      dxdt[half + n] += -kI * c * x[n + k];
      dxdt[n + k] += -kI * std::conj(c) * x[half + n];
    }
  };

  State x(2 * half);
  std::copy(psi0.ground.begin(), psi0.ground.end(), x.begin());
  std::copy(psi0.excited.begin(), psi0.excited.end(), x.begin() + static_cast<std::ptrdiff_t>(half));

  std::vector<VibronicState> out;
  out.reserve(taus.size());
  auto observer = [&](const State& s, double) {
    VibronicState v(cutoff_);
    std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(half), v.ground.begin());
    std::copy(s.begin() + static_cast<std::ptrdiff_t>(half), s.end(), v.excited.begin());
    out.push_back(std::move(v));
  };

  if (taus.size() == 1) {
    observer(x, taus[0]);
    return out;
  }

  auto stepper = odeint::make_dense_output(tol_, 0.0, odeint::runge_kutta_dopri5<State>());
  const double dt0 = std::min(0.01, taus[1] - taus[0]);
  try {
    steps_ = odeint::integrate_times(stepper, rhs, x, taus.begin(), taus.end(), dt0, observer,
                                     odeint::max_step_checker(10'000'000));
  } catch (const odeint::odeint_error& e) {
    throw Error(ErrorKind::StepFailure, std::string("time-ordered propagation failed: ") + e.what());
  }
  return out;
}

std::vector<VibronicState> propagate_time_ordered(const VibronicState& psi0, std::span<const double> taus,
                                                  double r, const ModelParams& params, double tol) {
  TimeOrderedPropagator prop(params, r, psi0.cutoff(), tol);
  return prop.run(psi0, taus);
}

std::vector<double> sigma22_time_ordered(cd alpha0, std::span<const double> taus, double r,
                                         const ModelParams& params, double tol, double tail_epsilon) {
  const int cutoff = std::max(params.k, suggest_truncation(std::abs(alpha0), tail_epsilon));
  const auto psi0 = VibronicState::ground_coherent(alpha0, cutoff, tail_epsilon);
  const auto states = propagate_time_ordered(psi0, taus, r, params, tol);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.excited_population());
  return out;
}

double sigma22_no_ordering(const ScaledTime& st, cd alpha0, const ModelParams& params, double tail_epsilon) {
  params.validate();
  const cd hr = h_over_r(st);
  const double hr_abs = std::abs(hr);
  const auto window = poisson_window(std::norm(alpha0), tail_epsilon);
  CompensatedSum total;
  for (long j = std::max<long>(window.lo, params.k); j <= window.hi; ++j) {
    const int n = static_cast<int>(j) - params.k;
    const cd f = coupling_f(n, params);
    // arg(f h) == arg(f h / r) for r > 0; the r = 0 branch uses the limit.
    const double theta = std::arg(f * hr);
    // |f h / r| sqrt((n+k)!/n!) == |Omega_0n| |h / r| / 2
    const double omega = 0.5 * std::abs(rabi_frequency(0, n, params)) * hr_abs;
    const double omegas[2] = {omega, -omega};
    const cd alphas[2] = {std::polar(1.0, -theta), -std::polar(1.0, -theta)};
    cd term{};
    for (int s = 0; s < 2; ++s) {
      for (int sp = 0; sp < 2; ++sp) {
        term += std::polar(1.0, omegas[s] - omegas[sp]) * std::conj(alphas[sp]) * alphas[s];
      }
    }
    total.add(0.25 * term.real() * window.weight(j));
  }
  return total.value();
}

double sigma22_no_ordering_reduced(const ScaledTime& st, cd alpha0, const ModelParams& params,
                                   double tail_epsilon) {
  params.validate();
  const double hr_abs = std::abs(h_over_r(st));
  const auto window = poisson_window(std::norm(alpha0), tail_epsilon);
  CompensatedSum total;
  for (long j = std::max<long>(window.lo, params.k); j <= window.hi; ++j) {
    const int n = static_cast<int>(j) - params.k;
    const double omega = 0.5 * std::abs(rabi_frequency(0, n, params)) * hr_abs;
    total.add(0.5 * (1.0 - std::cos(2.0 * omega)) * window.weight(j));
  }
  return total.value();
}

OrderingReport compare_series(std::span<const double> taus, std::span<const double> a,
                              std::span<const double> b, double threshold) {
  if (a.size() != taus.size() || b.size() != taus.size()) {
    throw Error(ErrorKind::InvalidArgument, "compare_series: length mismatch");
  }
  OrderingReport rep;
  rep.taus.assign(taus.begin(), taus.end());
  rep.ordered.assign(a.begin(), a.end());
  rep.unordered.assign(b.begin(), b.end());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double gap = std::abs(a[i] - b[i]);
    rep.sup_distance = std::max(rep.sup_distance, gap);
    if (!rep.first_crossing && gap > threshold) rep.first_crossing = taus[i];
  }
  return rep;
}

OrderingReport compare_ordering(const ModelParams& params, cd alpha0, double r, std::span<const double> taus,
                                double threshold, double tol, double tail_epsilon) {
  check_grid(taus);
  const int cutoff = std::max(params.k, suggest_truncation(std::abs(alpha0), tail_epsilon));
  const auto psi0 = VibronicState::ground_coherent(alpha0, cutoff, tail_epsilon);
  const auto states = propagate_time_ordered(psi0, taus, r, params, tol);
  std::vector<double> ordered, unordered;
  ordered.reserve(taus.size());
  unordered.reserve(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    ordered.push_back(states[i].excited_population());
    unordered.push_back(sigma22_no_ordering({taus[i], taus[0], r}, alpha0, params, tail_epsilon));
  }
  auto rep = compare_series(taus, ordered, unordered, threshold);
  rep.cutoff = cutoff;
  rep.tail_mass = poisson_tail_above(std::norm(alpha0), cutoff);
  return rep;
}

}  // namespace ionjc::semiclassical
