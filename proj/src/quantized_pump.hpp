#pragma once

// Exact dynamics with a quantized pump mode. The Hamiltonian is block
// diagonal in the pairs {|2,m,n>, |1,m+1,n+k>}; everything here is built from
// the 2x2 dressed-state data of those blocks, never from the full Hilbert
// space. Units: t~ = |kappa| t, all frequencies divided by |kappa|.

#include <Eigen/Dense>
#include <compare>
#include <map>
#include <span>
#include <vector>

#include "fock_core.hpp"

namespace ionjc::quantized {

/// Eigendata of the (m, n) block. omega_* are absolute eigenfrequencies;
/// splitting = omega_plus - omega_minus = sqrt(delta^2 + |rabi|^2).
struct DressedTriple {
  cd alpha_plus;
  cd alpha_minus;
  double c_plus = 0.0;
  double c_minus = 0.0;
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double splitting = 0.0;
  cd rabi;
};

/// Throws DegenerateBlock when the Rabi frequency of the block vanishes.
DressedTriple dressed(long m, int n, const ModelParams& params);

/// Bare energy of |level, pump, motion> under the free Hamiltonian.
double bare_energy(int level, long pump, int motion, const ModelParams& params);

struct BasisIndex {
  int level = 1;   // electronic level, 1 or 2
  long pump = 0;   // pump photon number
  int motion = 0;  // motional quantum number

  auto operator<=>(const BasisIndex&) const = default;
};

/// Sparse amplitudes over |level, pump, motion>.
struct CompositeState {
  std::map<BasisIndex, cd> amplitudes;
  double truncated_mass = 0.0;  // probability discarded when the state was built

  double norm() const;
  double population(const BasisIndex& idx) const;
  double excited_population() const;

  static CompositeState basis(int level, long pump, int motion);
  /// |level, beta0, alpha0> with both coherent states truncated to tail_epsilon.
  static CompositeState product(int level, cd beta0, cd alpha0, double tail_epsilon = 1e-12);
};

/// Applies the exact propagator for a duration t_tilde >= 0.
CompositeState evolve(const CompositeState& initial, double t_tilde, const ModelParams& params);

/// <psi|H|psi> in units of hbar |kappa|.
double energy(const CompositeState& state, const ModelParams& params);

/// Propagator of the (m, n) block in the frame rotating with the bare
/// energies, acting on (upper = |2,m,n>, lower = |1,m+1,n+k>). Only the
/// detuning and the splitting enter; degenerate blocks give the identity.
struct BlockPropagator {
  cd upper_upper, upper_lower, lower_upper, lower_lower;
};
BlockPropagator rotating_block_propagator(long m, int n, double t_tilde, const ModelParams& params);

/// Excited-state population from |1, beta0, alpha0> at t~ = 0 via the
/// Poisson-weighted dressed-state double sum.
double sigma22_quantized(double t_tilde, cd alpha0, cd beta0, const ModelParams& params,
                         double tail_epsilon = 1e-12);

std::vector<double> sigma22_quantized_series(std::span<const double> t_tilde, cd alpha0, cd beta0,
                                             const ModelParams& params, double tail_epsilon = 1e-12);

/// Reduced motional density matrix over Fock indices 0..dim-1.
struct DensityMatrixVib {
  Eigen::MatrixXcd rho;
  double trace_defect = 0.0;  // mass discarded by the Poisson windows

  int dim() const { return static_cast<int>(rho.rows()); }
  double trace() const { return rho.trace().real(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
};

/// rho_vib(t~) from |initial_level, beta0, alpha0>. The trap frequency only
/// rotates the result in phase space.
DensityMatrixVib rho_vib(double t_tilde, cd alpha0, cd beta0, const ModelParams& params, int initial_level = 2,
                         double tail_epsilon = 1e-12);

struct ConvergenceReport {
  std::vector<double> beta0;
  std::vector<double> distances;  // sup_tau |sigma22_quantized - sigma22_classical|
  std::vector<double> taus;
  std::vector<double> classical;
  std::vector<std::vector<double>> quantized;  // one curve per beta0
};

/// Compares the quantized-pump population with the time-ordered classical
/// one under delta_omega~ = |beta0| r and t~ = tau / |beta0|. The detuning in
/// `params` is ignored.
ConvergenceReport convergence_metric(std::span<const double> beta0_list, double r, std::span<const double> taus,
                                     const ModelParams& params, cd alpha0, double tol = 1e-10,
                                     double tail_epsilon = 1e-12);

}  // namespace ionjc::quantized
