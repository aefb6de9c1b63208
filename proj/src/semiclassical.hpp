#pragma once

// Classical-pump model: explicitly time-dependent sideband Hamiltonian in the
// interaction picture, its numerically time-ordered propagation, and the
// closed-form evolution obtained when time ordering is dropped.
//
// Units: tau = |kappa beta_cl| t, r = delta_omega / |kappa beta_cl|.

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fock_core.hpp"

namespace ionjc::semiclassical {

struct ScaledTime {
  double tau = 0.0;
  double tau0 = 0.0;
  double r = 0.0;
};

/// Amplitudes over |1,n> (ground) and |2,n> (excited) for n = 0..cutoff.
struct VibronicState {
  std::vector<cd> ground;
  std::vector<cd> excited;

  VibronicState() = default;
  explicit VibronicState(int cutoff)
      : ground(static_cast<std::size_t>(cutoff) + 1), excited(static_cast<std::size_t>(cutoff) + 1) {}

  int cutoff() const { return static_cast<int>(ground.size()) - 1; }
  double norm() const;
  double excited_population() const;

  /// |level, n> with level in {1, 2}.
  static VibronicState basis(int level, int n, int cutoff);
  /// |1, alpha0>, truncated at `cutoff`.
  static VibronicState ground_coherent(cd alpha0, int cutoff, double tail_epsilon);
};

/// h(tau) = i (e^{-i r tau} - e^{-i r tau0}).
cd h_function(const ScaledTime& st);

/// h(tau)/r, continuous through r = 0 where it equals tau - tau0.
cd h_over_r(const ScaledTime& st);

/// Dense interaction Hamiltonian at scaled time tau in units of
/// hbar |kappa beta_cl|. Index i <= cutoff is |1,i>, index cutoff+1+i is |2,i>.
Eigen::MatrixXcd interaction_generator(double tau, double r, const ModelParams& params, int cutoff);

/// Adaptive Dormand-Prince integration of i d|psi>/dtau = H(tau)|psi>.
/// Not shareable between threads while running.
class TimeOrderedPropagator {
 public:
  TimeOrderedPropagator(const ModelParams& params, double r, int cutoff, double tol);

  /// States at every entry of `taus` (strictly increasing); taus[0] is the
  /// initial time at which psi0 is given. Throws StepFailure.
  std::vector<VibronicState> run(const VibronicState& psi0, std::span<const double> taus);

  std::size_t steps_taken() const { return steps_; }

 private:
  ModelParams params_;
  double r_;
  int cutoff_;
  double tol_;
  std::vector<cd> couplings_;  // <2,n|H|1,n+k> without the e^{-i r tau} factor
  std::size_t steps_ = 0;
};

std::vector<VibronicState> propagate_time_ordered(const VibronicState& psi0, std::span<const double> taus,
                                                  double r, const ModelParams& params, double tol);

/// Excited-state population of the time-ordered solution from |1, alpha0>.
std::vector<double> sigma22_time_ordered(cd alpha0, std::span<const double> taus, double r,
                                         const ModelParams& params, double tol, double tail_epsilon);

/// Excited-state population without time ordering, from |1, alpha0> at tau0,
/// as the full four-term dressed-state sum.
double sigma22_no_ordering(const ScaledTime& st, cd alpha0, const ModelParams& params,
                           double tail_epsilon = 1e-12);

/// Same quantity via the two-term reduction 1/2 sum_n P(n+k) [1 - cos 2 omega_n].
double sigma22_no_ordering_reduced(const ScaledTime& st, cd alpha0, const ModelParams& params,
                                   double tail_epsilon = 1e-12);

struct OrderingReport {
  std::vector<double> taus;
  std::vector<double> ordered;    // sigma22, time-ordered numerics
  std::vector<double> unordered;  // sigma22', no time ordering
  double sup_distance = 0.0;
  std::optional<double> first_crossing;  // smallest tau with gap > threshold
  int cutoff = 0;
  double tail_mass = 0.0;
};

OrderingReport compare_ordering(const ModelParams& params, cd alpha0, double r, std::span<const double> taus,
                                double threshold, double tol = 1e-10, double tail_epsilon = 1e-12);

/// Sup-norm distance and first threshold crossing of two sampled curves.
OrderingReport compare_series(std::span<const double> taus, std::span<const double> a,
                              std::span<const double> b, double threshold);

}  // namespace ionjc::semiclassical
