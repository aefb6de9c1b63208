#pragma once

// Special functions, sideband coupling coefficients and coherent-state
// machinery shared by the semiclassical and quantized-pump solvers.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace ionjc {

using cd = std::complex<double>;

/// Physical constants of the vibronic model in units of |kappa|.
struct ModelParams {
  int k = 0;                        // sideband order
  double eta = 0.2;                 // Lamb-Dicke parameter
  double delta_phi = 0.0;           // standing-wave phase
  double delta_omega_tilde = 0.0;   // detuning from the k-th sideband
  double nu_tilde = 0.0;            // trap frequency
  double omega21_tilde = 0.0;       // electronic transition frequency
  double arg_kappa = 0.0;           // coupling phase, always 0

  /// Throws ValidationError naming the offending field.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct TruncationPolicy {
  int n_max_motion = 0;
  int m_max_pump = 0;
  double tail_epsilon = 1e-12;
};

struct ComplexAmplitudeVector {
  std::vector<cd> entries;
  double tail_mass = 0.0;

  double norm_squared() const;
};

/// ln(n!) via lgamma; exact table for small n.
double log_factorial(long n);

/// Generalized Laguerre polynomial L_n^{(k)}(x) by forward recurrence in n.
double laguerre(int n, int k, double x);

/// L_0^{(k)}(x) .. L_{n_max}^{(k)}(x) in one recurrence sweep.
std::vector<double> laguerre_sequence(int n_max, int k, double x);

/// Bessel function of the first kind J_order(x) for integer order.
double bessel_j(int order, double x);

/// Fills out[p] = J_p(x) for p = 0 .. out.size()-1 using Miller's backward
/// recurrence normalised by J_0 + 2 sum J_{2p} = 1.
void bessel_j_sequence(double x, std::span<double> out);

/// Diagonal element f_k(n; eta) of the sideband coupling operator. The value
/// is real (term plus its complex conjugate) but returned as complex.
cd coupling_f(int n, const ModelParams& params);

/// Nonlinear k-quantum Rabi frequency 2 sqrt(m+1) f_k(n) sqrt((n+k)!/n!) in
/// units of |kappa|.
cd rabi_frequency(int m, int n, const ModelParams& params);

/// Truncated coherent state; throws TruncationTooSmall when the discarded
/// Poisson mass exceeds policy.tail_epsilon.
ComplexAmplitudeVector coherent_vector(cd alpha0, const TruncationPolicy& policy);

/// Smallest cutoff N such that the Poisson(|alpha|^2) mass above N is below
/// tail_epsilon, found by direct summation of the tail.
int suggest_truncation(double alpha0_abs, double tail_epsilon);

/// Poisson mass strictly above `cutoff`, summed directly.
double poisson_tail_above(double mean, int cutoff);

/// Symmetric window [lo, hi] of a Poisson distribution holding all but
/// `epsilon` of the probability mass.
struct PoissonWindow {
  long lo = 0;
  long hi = 0;
  std::vector<double> weights;  // weights[j - lo] = P(j)
  double excluded_mass = 0.0;

  double weight(long j) const {
    return (j < lo || j > hi) ? 0.0 : weights[static_cast<std::size_t>(j - lo)];
  }
};

PoissonWindow poisson_window(double mean, double epsilon);

/// Neumaier-compensated running sum; deterministic for a fixed order of adds.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace ionjc
