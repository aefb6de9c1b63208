#include "quantized_pump.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "semiclassical.hpp"

namespace ionjc::quantized {

namespace {

constexpr cd kI{0.0, 1.0};

double laser_frequency(const ModelParams& p) {
  return p.omega21_tilde - p.k * p.nu_tilde + p.delta_omega_tilde;
}

// sqrt of Poisson weights with the coherent phase e^{i j arg(z)}.
struct CoherentWindow {
  PoissonWindow window;
  double phase = 0.0;

  cd amplitude(long j) const { return std::polar(std::sqrt(window.weight(j)), static_cast<double>(j) * phase); }
};

CoherentWindow coherent_window(cd z, double tail_epsilon) {
  return {poisson_window(std::norm(z), tail_epsilon), std::norm(z) > 0.0 ? std::arg(z) : 0.0};
}

bool block_is_degenerate(long m, int n, const ModelParams& p) {
  return rabi_frequency(static_cast<int>(m), n, p) == cd{};
}

}  // namespace

DressedTriple dressed(long m, int n, const ModelParams& params) {
  if (m < 0 || n < 0) throw Error(ErrorKind::InvalidArgument, "dressed: m and n must be non-negative");
  const cd rabi = rabi_frequency(static_cast<int>(m), n, params);
  if (rabi == cd{}) {
    throw Error(ErrorKind::DegenerateBlock, "dressed: vanishing Rabi frequency for block (m=" +
                                                std::to_string(m) + ", n=" + std::to_string(n) + ")");
  }
  const double delta = params.delta_omega_tilde;
  const double s = std::hypot(delta, std::abs(rabi));
  DressedTriple d;
  d.rabi = rabi;
  d.splitting = s;
  // (delta +- s) / rabi, rewritten as -conj(rabi) / (delta -+ s) where the
  // direct form would cancel.
  if (delta >= 0.0) {
    d.alpha_plus = (delta + s) / rabi;
    d.alpha_minus = -std::conj(rabi) / (delta + s);
  } else {
    d.alpha_plus = -std::conj(rabi) / (delta - s);
    d.alpha_minus = (delta - s) / rabi;
  }
  d.c_plus = 1.0 / std::sqrt(1.0 + std::norm(d.alpha_plus));
  d.c_minus = 1.0 / std::sqrt(1.0 + std::norm(d.alpha_minus));
  const double centre = 0.5 * (delta * (2.0 * m + 1.0) + params.nu_tilde * (2.0 * n - 2.0 * params.k * m) +
                               params.omega21_tilde * (2.0 * m + 2.0));
  d.omega_plus = centre + 0.5 * s;
  d.omega_minus = centre - 0.5 * s;
  return d;
}

double bare_energy(int level, long pump, int motion, const ModelParams& params) {
  return params.nu_tilde * motion + laser_frequency(params) * static_cast<double>(pump) +
         (level == 2 ? params.omega21_tilde : 0.0);
}

double CompositeState::norm() const {
  CompensatedSum s;
  for (const auto& [idx, a] : amplitudes) s.add(std::norm(a));
  return std::sqrt(s.value());
}

double CompositeState::population(const BasisIndex& idx) const {
  const auto it = amplitudes.find(idx);
  return it == amplitudes.end() ? 0.0 : std::norm(it->second);
}

double CompositeState::excited_population() const {
  CompensatedSum s;
  for (const auto& [idx, a] : amplitudes) {
    if (idx.level == 2) s.add(std::norm(a));
  }
  return s.value();
}

CompositeState CompositeState::basis(int level, long pump, int motion) {
  if ((level != 1 && level != 2) || pump < 0 || motion < 0) {
    throw Error(ErrorKind::InvalidArgument, "CompositeState::basis: invalid index");
  }
  CompositeState s;
  s.amplitudes[{level, pump, motion}] = 1.0;
  return s;
}

CompositeState CompositeState::product(int level, cd beta0, cd alpha0, double tail_epsilon) {
  if (level != 1 && level != 2) throw Error(ErrorKind::InvalidArgument, "electronic level must be 1 or 2");
  const auto pump = coherent_window(beta0, tail_epsilon);
  const auto motion = coherent_window(alpha0, tail_epsilon);
  CompositeState s;
  for (long j = pump.window.lo; j <= pump.window.hi; ++j) {
    const cd b = pump.amplitude(j);
    for (long q = motion.window.lo; q <= motion.window.hi; ++q) {
      s.amplitudes[{level, j, static_cast<int>(q)}] = b * motion.amplitude(q);
    }
  }
  s.truncated_mass = pump.window.excluded_mass + motion.window.excluded_mass;
  return s;
}

CompositeState evolve(const CompositeState& initial, double t_tilde, const ModelParams& params) {
  params.validate();
  if (!(t_tilde >= 0.0)) throw Error(ErrorKind::InvalidArgument, "evolve: t_tilde must be non-negative");
  const int k = params.k;

  // Gather the amplitudes of each coupled block: (upper, lower).
  std::map<std::pair<long, int>, std::pair<cd, cd>> blocks;
  CompositeState out;
  out.truncated_mass = initial.truncated_mass;
  for (const auto& [idx, a] : initial.amplitudes) {
    if (idx.level == 2) {
      blocks[{idx.pump, idx.motion}].first += a;
    } else if (idx.pump == 0 || idx.motion < k) {
      // |1,0,n> and |1,m+1,q<k> are eigenstates of the full Hamiltonian.
      const double e = bare_energy(1, idx.pump, idx.motion, params);
      out.amplitudes[idx] += a * std::polar(1.0, -e * t_tilde);
    } else {
      blocks[{idx.pump - 1, idx.motion - k}].second += a;
    }
  }

  for (const auto& [mn, amps] : blocks) {
    const auto [m, n] = mn;
    const BasisIndex upper{2, m, n};
    const BasisIndex lower{1, m + 1, n + k};
    // Only the splitting enters the rotating-frame propagator; the large bare
    // energies are applied afterwards as pure phases.
    const auto u = rotating_block_propagator(m, n, t_tilde, params);
    const cd up = u.upper_upper * amps.first + u.upper_lower * amps.second;
    const cd lo = u.lower_upper * amps.first + u.lower_lower * amps.second;
    out.amplitudes[upper] += up * std::polar(1.0, -bare_energy(2, m, n, params) * t_tilde);
    out.amplitudes[lower] += lo * std::polar(1.0, -bare_energy(1, m + 1, n + k, params) * t_tilde);
  }
  return out;
}

double energy(const CompositeState& state, const ModelParams& params) {
  params.validate();
  const int k = params.k;
  CompensatedSum e;
  for (const auto& [idx, a] : state.amplitudes) {
    e.add(bare_energy(idx.level, idx.pump, idx.motion, params) * std::norm(a));
    if (idx.level == 2) {
      const auto it = state.amplitudes.find({1, idx.pump + 1, idx.motion + k});
      if (it == state.amplitudes.end()) continue;
      const cd half_rabi = 0.5 * rabi_frequency(static_cast<int>(idx.pump), idx.motion, params);
      e.add(2.0 * std::real(std::conj(a) * half_rabi * it->second));
    }
  }
  return e.value();
}

BlockPropagator rotating_block_propagator(long m, int n, double t_tilde, const ModelParams& params) {
  if (block_is_degenerate(m, n, params)) return {1.0, 0.0, 0.0, 1.0};
  const auto d = dressed(m, n, params);
  BlockPropagator u{};
  const std::pair<cd, double> branches[2] = {{d.alpha_plus, d.c_plus}, {d.alpha_minus, d.c_minus}};
  const double half_split[2] = {0.5 * d.splitting, -0.5 * d.splitting};
  for (int b = 0; b < 2; ++b) {
    const auto [alpha, c] = branches[b];
    const cd ph = std::polar(c * c, -half_split[b] * t_tilde);
    u.upper_upper += ph;
    u.upper_lower += ph * std::conj(alpha);
    u.lower_upper += ph * alpha;
    u.lower_lower += ph * std::norm(alpha);
  }
  const cd up = std::polar(1.0, -0.5 * params.delta_omega_tilde * t_tilde);
  const cd lo = std::conj(up);
  u.upper_upper *= up;
  u.upper_lower *= up;
  u.lower_upper *= lo;
  u.lower_lower *= lo;
  return u;
}

std::vector<double> sigma22_quantized_series(std::span<const double> t_tilde, cd alpha0, cd beta0,
                                             const ModelParams& params, double tail_epsilon) {
  params.validate();
  const auto pump = poisson_window(std::norm(beta0), tail_epsilon);
  const auto motion = poisson_window(std::norm(alpha0), tail_epsilon);
  std::vector<CompensatedSum> acc(t_tilde.size());

  for (long j = std::max<long>(pump.lo, 1); j <= pump.hi; ++j) {
    const long m = j - 1;
    for (long q = std::max<long>(motion.lo, params.k); q <= motion.hi; ++q) {
      const int n = static_cast<int>(q) - params.k;
      if (block_is_degenerate(m, n, params)) continue;
      const auto d = dressed(m, n, params);
      const double weight = pump.weight(j) * motion.weight(q);
      const cd alphas[2] = {d.alpha_plus, d.alpha_minus};
      const double cs[2] = {d.c_plus, d.c_minus};
      // omega^{sigma'} - omega^{sigma} from the splitting alone, so the trap
      // and transition frequencies cancel exactly.
      const double half_split[2] = {0.5 * d.splitting, -0.5 * d.splitting};
      cd coeff[2][2];
      for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
          coeff[s][sp] = std::pow(cs[s] * cs[sp], 2) * std::conj(alphas[s]) * alphas[sp];
        }
      }
      for (std::size_t i = 0; i < t_tilde.size(); ++i) {
        cd term{};
        for (int s = 0; s < 2; ++s) {
          for (int sp = 0; sp < 2; ++sp) {
            term += std::polar(1.0, (half_split[sp] - half_split[s]) * t_tilde[i]) * coeff[s][sp];
          }
        }
        acc[i].add(weight * term.real());
      }
    }
  }
  std::vector<double> out(t_tilde.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value();
  return out;
}

double sigma22_quantized(double t_tilde, cd alpha0, cd beta0, const ModelParams& params, double tail_epsilon) {
  const double ts[1] = {t_tilde};
  return sigma22_quantized_series(ts, alpha0, beta0, params, tail_epsilon)[0];
}

double DensityMatrixVib::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrixVib::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityMatrixVib rho_vib(double t_tilde, cd alpha0, cd beta0, const ModelParams& params, int initial_level,
                         double tail_epsilon) {
  params.validate();
  if (initial_level != 1 && initial_level != 2) {
    throw Error(ErrorKind::InvalidArgument, "rho_vib: initial level must be 1 or 2");
  }
  if (!(t_tilde >= 0.0)) throw Error(ErrorKind::InvalidArgument, "rho_vib: t_tilde must be non-negative");
  const int k = params.k;
  const auto pump = coherent_window(beta0, tail_epsilon);
  const auto motion = coherent_window(alpha0, tail_epsilon);
  const int dim = static_cast<int>(motion.window.hi) + (initial_level == 2 ? k : 0) + 1;

  DensityMatrixVib out;
  out.rho = Eigen::MatrixXcd::Zero(dim, dim);
  out.trace_defect = pump.window.excluded_mass + motion.window.excluded_mass;

  // The reduced matrix is a sum over (level, pump) sectors; amplitudes in
  // distinct sectors never interfere. Work in the frame rotating with the
  // bare energies; within one sector that frame differs from the lab frame by
  // e^{-i nu n t} plus a sector-wide phase.
  Eigen::VectorXcd upper(dim), lower(dim);
  for (long j = pump.window.lo; j <= pump.window.hi; ++j) {
    const cd b = pump.amplitude(j);
    upper.setZero();
    lower.setZero();
    for (long q = motion.window.lo; q <= motion.window.hi; ++q) {
      const cd a0 = b * motion.amplitude(q);
      const int nq = static_cast<int>(q);
      if (initial_level == 2) {
        // |2,j,q> -> block (j, q): upper stays in sector (2,j), lower goes to (1,j+1).
        const auto u = rotating_block_propagator(j, nq, t_tilde, params);
        upper[nq] += u.upper_upper * a0;
        lower[nq + k] += u.lower_upper * a0;
      } else if (j == 0 || nq < k) {
        lower[nq] += a0;  // bare branch, constant in the rotating frame
      } else {
        // |1,j,q> is the lower member of block (j-1, q-k); its upper partner
        // lives in sector (2, j-1).
        const auto u = rotating_block_propagator(j - 1, nq - k, t_tilde, params);
        lower[nq] += u.lower_lower * a0;
        upper[nq - k] += u.upper_lower * a0;
      }
    }
    out.rho.noalias() += upper * upper.adjoint();
    out.rho.noalias() += lower * lower.adjoint();
  }

  // Phase-space rotation by the trap frequency: rho_nn' e^{-i nu (n-n') t}.
  if (params.nu_tilde != 0.0 && t_tilde != 0.0) {
    const double theta = std::fmod(params.nu_tilde * t_tilde, 2.0 * std::numbers::pi);
    for (int n = 0; n < dim; ++n) {
      for (int np = 0; np < dim; ++np) {
        if (n != np) out.rho(n, np) *= std::polar(1.0, -theta * (n - np));
      }
    }
  }
  return out;
}

ConvergenceReport convergence_metric(std::span<const double> beta0_list, double r, std::span<const double> taus,
                                     const ModelParams& params, cd alpha0, double tol, double tail_epsilon) {
  ConvergenceReport rep;
  rep.taus.assign(taus.begin(), taus.end());
  rep.classical = semiclassical::sigma22_time_ordered(alpha0, taus, r, params, tol, tail_epsilon);
  for (double beta : beta0_list) {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "convergence_metric: beta0 must be positive");
    ModelParams p = params;
    p.delta_omega_tilde = beta * r;
    std::vector<double> ts(taus.size());
    std::transform(taus.begin(), taus.end(), ts.begin(), [beta](double tau) { return tau / beta; });
    auto curve = sigma22_quantized_series(ts, alpha0, cd{beta, 0.0}, p, tail_epsilon);
    double dist = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) dist = std::max(dist, std::abs(curve[i] - rep.classical[i]));
    rep.beta0.push_back(beta);
    rep.distances.push_back(dist);
    rep.quantized.push_back(std::move(curve));
  }
  return rep;
}

}  // namespace ionjc::quantized
