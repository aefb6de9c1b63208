#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "errors.hpp"
#include "oracles.hpp"
#include "quantized_pump.hpp"
#include "semiclassical.hpp"

using namespace ionjc;
using namespace ionjc::quantized;
using doctest::Approx;

namespace {

ModelParams params(int k, double eta, double dphi, double detuning, double nu = 0.0, double w21 = 0.0) {
  ModelParams p;
  p.k = k;
  p.eta = eta;
  p.delta_phi = dphi;
  p.delta_omega_tilde = detuning;
  p.nu_tilde = nu;
  p.omega21_tilde = w21;
  return p;
}

// Dense Hamiltonian on an explicit list of basis states, from the bare
// energies and the single allowed coupling <2,m,n|H|1,m+1,n+k> = Omega_mn / 2.
struct DenseModel {
  std::vector<BasisIndex> basis;
  Eigen::MatrixXcd h;
};

DenseModel dense_model(long m_max, int n_max, const ModelParams& p) {
  DenseModel d;
  for (int level = 1; level <= 2; ++level)
    for (long m = 0; m <= m_max; ++m)
      for (int n = 0; n <= n_max; ++n) d.basis.push_back({level, m, n});
  const auto dim = static_cast<Eigen::Index>(d.basis.size());
  d.h = Eigen::MatrixXcd::Zero(dim, dim);
  const double w_l = p.omega21_tilde - p.k * p.nu_tilde + p.delta_omega_tilde;
  auto index = [&](const BasisIndex& b) {
    for (Eigen::Index i = 0; i < dim; ++i)
      if (d.basis[i] == b) return i;
    return Eigen::Index{-1};
  };
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& b = d.basis[i];
    d.h(i, i) = p.nu_tilde * b.motion + w_l * b.pump + (b.level == 2 ? p.omega21_tilde : 0.0);
    if (b.level == 2) {
      const auto j = index({1, b.pump + 1, b.motion + p.k});
      if (j < 0) continue;
      // Omega_mn from its definition, not through the library's dressed data.
      const double ratio = std::exp(0.5 * (std::lgamma(b.motion + p.k + 1.0) - std::lgamma(b.motion + 1.0)));
      const cd om = 2.0 * std::sqrt(b.pump + 1.0) * coupling_f(b.motion, p) * ratio;
      d.h(i, j) = 0.5 * om;
      d.h(j, i) = std::conj(0.5 * om);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("dressed data satisfies the 2x2 eigenproblem") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    const auto p = params(static_cast<int>(4 * u(rng)), 0.05 + 0.3 * u(rng), 6.0 * u(rng), 40.0 * (u(rng) - 0.5),
                          100.0 * u(rng), 50.0 * u(rng));
    const long m = static_cast<long>(200 * u(rng));
    const int n = static_cast<int>(30 * u(rng));
    if (rabi_frequency(static_cast<int>(m), n, p) == cd{}) continue;
    ++checked;
    const auto d = dressed(m, n, p);
    // Block in the basis (|2,m,n>, |1,m+1,n+k>).
    Eigen::Matrix2cd h;
    h << bare_energy(2, m, n, p), 0.5 * d.rabi, std::conj(0.5 * d.rabi), bare_energy(1, m + 1, n + p.k, p);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    CHECK(d.omega_minus == Approx(es.eigenvalues()[0]).epsilon(1e-12 * scale));
    CHECK(d.omega_plus == Approx(es.eigenvalues()[1]).epsilon(1e-12 * scale));
    for (int s = 0; s < 2; ++s) {
      const cd a = s == 0 ? d.alpha_plus : d.alpha_minus;
      const double c = s == 0 ? d.c_plus : d.c_minus;
      const double w = s == 0 ? d.omega_plus : d.omega_minus;
      Eigen::Vector2cd v(c, c * a);
      worst = std::max(worst, (h * v - w * v).norm() / scale);
      CHECK(c == Approx(1.0 / std::sqrt(1.0 + std::norm(a))).epsilon(1e-14));
    }
    const cd overlap = d.c_plus * d.c_minus * (1.0 + std::conj(d.alpha_plus) * d.alpha_minus);
    CHECK(std::abs(overlap) < 1e-12);
    CHECK(std::abs(d.alpha_plus) * std::abs(d.alpha_minus) == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(d.omega_plus - d.omega_minus - d.splitting) < 1e-12 * scale);
    CHECK(d.splitting == Approx(std::hypot(p.delta_omega_tilde, std::abs(d.rabi))).epsilon(1e-14));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("dressed data at resonance mixes symmetrically") {
  const auto p = params(2, 0.2, 0.0, 0.0);
  for (int n = 0; n < 10; ++n) {
    const auto d = dressed(3, n, p);
    CHECK(std::abs(d.alpha_plus) == Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(d.alpha_minus) == Approx(1.0).epsilon(1e-15));
    CHECK(d.c_plus == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("dressed data in the far-detuned limit keeps full precision") {
  const auto p = params(2, 0.2, 0.0, 1e6);
  const auto d = dressed(0, 0, p);
  const cd om = d.rabi;
  CHECK(std::abs(d.alpha_plus - 2.0e6 / om) < 1e-6 * std::abs(2.0e6 / om));
  CHECK(std::abs(d.alpha_minus + std::conj(om) / 2.0e6) < 1e-9 * std::abs(om / 2.0e6));
  CHECK(std::abs(d.alpha_plus) * std::abs(d.alpha_minus) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("degenerate blocks are reported") {
  const auto p = params(1, 0.2, 0.0, 1.0);
  try {
    dressed(0, 0, p);
    FAIL("expected DegenerateBlock");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateBlock);
  }
  // evolution still works and is a pure phase
  auto s = CompositeState::basis(2, 2, 3);
  const auto out = evolve(s, 1.7, p);
  CHECK(out.population({2, 2, 3}) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("evolve at t = 0 is the identity") {
  const auto p = params(2, 0.2, 0.4, 3.0, 7.0, 11.0);
  const auto s = CompositeState::product(1, cd{2.0, 1.0}, cd{1.0, -0.5});
  const auto out = evolve(s, 0.0, p);
  for (const auto& [idx, a] : s.amplitudes) CHECK(std::abs(out.amplitudes.at(idx) - a) < 1e-15);
}

TEST_CASE("bare ground branch only acquires phases") {
  const auto p = params(2, 0.2, 0.0, 1.5, 3.0, 2.0);
  for (int n : {0, 4, 9}) {
    const auto out = evolve(CompositeState::basis(1, 0, n), 12.3, p);
    REQUIRE(out.amplitudes.size() == 1);
    CHECK(std::abs(out.amplitudes.at({1, 0, n})) == Approx(1.0).epsilon(1e-15));
    CHECK(std::arg(out.amplitudes.at({1, 0, n})) ==
          Approx(std::remainder(-3.0 * n * 12.3, 2 * std::numbers::pi)).epsilon(1e-9));
  }
  // below-sideband branch |1, m+1, q<k>
  const auto out = evolve(CompositeState::basis(1, 4, 1), 2.0, p);
  CHECK(out.population({1, 4, 1}) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("resonant two-level transfer") {
  const auto p = params(2, 0.2, 0.3, 0.0, 17.0, 5.0);
  for (auto [m, n] : {std::pair{0L, 0}, std::pair{5L, 3}, std::pair{40L, 12}}) {
    const double om = std::abs(rabi_frequency(static_cast<int>(m), n, p));
    for (double t : {0.3, 2.0, 11.0, 50.0}) {
      const auto out = evolve(CompositeState::basis(2, m, n), t, p);
      CHECK(std::abs(out.population({1, m + 1, n + p.k}) - std::pow(std::sin(om * t / 2), 2)) < 1e-12);
    }
  }
}

TEST_CASE("evolve matches the matrix exponential on a closed subspace") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int k : {0, 1, 2, 3}) {
    const auto p = params(k, 0.25, 0.9, 1.3, 2.0, 3.5);
    const long m_max = 3;
    const int n_max = 6;
    const auto model = dense_model(m_max, n_max, p);
    const auto dim = static_cast<Eigen::Index>(model.basis.size());

    // Random state supported on basis vectors whose block partner is inside
    // the truncated space, so the subspace is invariant.
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    CompositeState s;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto& b = model.basis[i];
      // lower states always find their partner inside the truncation
      const bool closed = b.level == 1 || (b.pump + 1 <= m_max && b.motion + k <= n_max);
      if (!closed) continue;
      const cd a{g(rng), g(rng)};
      x[i] = a;
      s.amplitudes[b] = a;
    }
    for (double t : {0.5, 3.0}) {
      const Eigen::VectorXcd y = (cd{0.0, -t} * model.h).exp() * x;
      const auto out = evolve(s, t, p);
      double diff = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        const auto it = out.amplitudes.find(model.basis[i]);
        const cd got = it == out.amplitudes.end() ? cd{} : it->second;
        diff = std::max(diff, std::abs(got - y[i]));
      }
      CHECK(diff < 1e-11);
    }
  }
}

TEST_CASE("evolve conserves norm and energy") {
  const auto p = params(2, 0.2, 0.0, 2.5, 9.0, 4.0);
  const auto s = CompositeState::product(1, cd{4.0, 0.0}, std::sqrt(6.0), 1e-13);
  const double e0 = energy(s, p);
  for (double t : {0.7, 5.0, 40.0}) {
    const auto out = evolve(s, t, p);
    CHECK(out.norm() == Approx(s.norm()).epsilon(1e-12));
    CHECK(std::abs(energy(out, p) - e0) < 1e-9 * std::max(1.0, std::abs(e0)));
  }
  CHECK(s.norm() * s.norm() + s.truncated_mass == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sigma22_quantized agrees with explicit evolution") {
  const auto p = params(2, 0.2, 0.0, 1.0, 30.0, 20.0);
  const cd a0 = std::sqrt(3.0), b0 = 3.0;
  const auto s = CompositeState::product(1, b0, a0, 1e-14);
  for (double t : {0.0, 0.8, 4.0, 25.0}) {
    const double direct = evolve(s, t, p).excited_population();
    CHECK(sigma22_quantized(t, a0, b0, p, 1e-14) == Approx(direct).epsilon(1e-11).scale(1.0));
  }
  CHECK(sigma22_quantized(0.0, a0, b0, p) < 1e-15);
}

TEST_CASE("sigma22_quantized is independent of trap and transition frequencies") {
  const auto base = params(2, 0.2, 0.0, 4.0);
  std::vector<double> ts;
  for (int i = 0; i <= 50; ++i) ts.push_back(0.06 * i);
  const auto ref = sigma22_quantized_series(ts, std::sqrt(12.0), 20.0, base);
  for (auto [nu, w21] : {std::pair{5000.0, 0.0}, std::pair{0.0, 3e4}, std::pair{123.4, 987.6}}) {
    auto p = base;
    p.nu_tilde = nu;
    p.omega21_tilde = w21;
    const auto v = sigma22_quantized_series(ts, std::sqrt(12.0), 20.0, p);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(v[i] == ref[i]);
  }
  for (double v : ref) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("rho_vib at t = 0 is the truncated coherent state") {
  const auto p = params(3, 0.2, std::numbers::pi / 2, 8.0, 5000.0);
  const cd a0{1.5, 1.4};
  const auto rho = rho_vib(0.0, a0, 40.0, p);
  TruncationPolicy pol;
  pol.n_max_motion = rho.dim() - 1;
  const auto v = coherent_vector(a0, pol);
  double diff = 0.0;
  for (int i = 0; i < rho.dim(); ++i)
    for (int j = 0; j < rho.dim(); ++j) diff = std::max(diff, std::abs(rho.rho(i, j) - v.entries[i] * std::conj(v.entries[j])));
  CHECK(diff < 1e-6);  // amplitude-level truncation of both windows
  CHECK(rho.trace() == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rho_vib matches the literal triple sum") {
  // sum over sigma, sigma', n, n', m written exactly as the closed form.
  const auto p = params(2, 0.2, 0.5, 3.0, 0.0, 0.0);
  const double a0 = 1.3, b0 = 2.0, t = 1.9;
  const int k = p.k;
  const auto rho = rho_vib(t, a0, b0, p, 2, 1e-14);
  // same motional window as the library, so only the pump tail differs
  const int n_max = rho.dim() - 1 - k, m_max = 40;
  const int dim = n_max + k + 1;
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m = 0; m <= m_max; ++m) {
    const double pm = std::exp(-b0 * b0 + 2 * m * std::log(b0) - std::lgamma(m + 1.0));
    for (int n = 0; n <= n_max; ++n) {
      const auto dn = dressed(m, n, p);
      for (int np = 0; np <= n_max; ++np) {
        const auto dnp = dressed(m, np, p);
        const double an = std::exp(-0.5 * a0 * a0 + n * std::log(a0) - 0.5 * std::lgamma(n + 1.0));
        const double anp = std::exp(-0.5 * a0 * a0 + np * std::log(a0) - 0.5 * std::lgamma(np + 1.0));
        for (int s = 0; s < 2; ++s) {
          for (int sp = 0; sp < 2; ++sp) {
            const double w_s = s == 0 ? dn.omega_plus : dn.omega_minus;
            const double w_sp = sp == 0 ? dnp.omega_plus : dnp.omega_minus;
            const double c_s = s == 0 ? dn.c_plus : dn.c_minus;
            const double c_sp = sp == 0 ? dnp.c_plus : dnp.c_minus;
            const cd al_s = s == 0 ? dn.alpha_plus : dn.alpha_minus;
            const cd al_sp = sp == 0 ? dnp.alpha_plus : dnp.alpha_minus;
            const cd coeff = std::polar(std::pow(c_s * c_sp, 2) * pm * an * anp, (w_sp - w_s) * t);
            ref(n, np) += coeff;
            ref(n + k, np + k) += coeff * al_s * std::conj(al_sp);
          }
        }
      }
    }
  }
  // The library works in a frame where the sector-wide phase of each (level,
  // pump) block is removed; that phase cancels in the reduced matrix.
  double diff = 0.0;
  REQUIRE(rho.dim() == dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) diff = std::max(diff, std::abs(rho.rho(i, j) - ref(i, j)));
  CHECK(diff < 1e-9);
}

TEST_CASE("rho_vib physical bounds") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const auto p = params(1 + trial % 3, 0.1 + 0.2 * u(rng), 3.0 * u(rng), 10.0 * u(rng), 100.0 * u(rng));
    const double t = 60.0 * u(rng);
    const auto rho = rho_vib(t, std::polar(2.5 * u(rng), 3.0 * u(rng)), 5.0 + 30.0 * u(rng), p, 1 + trial % 2);
    CHECK(rho.hermiticity_error() < 1e-12);
    CHECK(rho.trace() == Approx(1.0).epsilon(1e-10));
    CHECK(rho.min_eigenvalue() >= -1e-10);
    CHECK(rho.trace_defect < 2e-12);
  }
}

TEST_CASE("trap frequency only rotates rho_vib") {
  const auto p0 = params(3, 0.2, std::numbers::pi / 2, 8.0, 0.0);
  auto p1 = p0;
  p1.nu_tilde = 5000.0;
  auto p2 = p0;
  p2.omega21_tilde = 777.0;
  const double t = 13.0;
  const auto a = rho_vib(t, std::sqrt(5.0), 40.0, p0);
  const auto b = rho_vib(t, std::sqrt(5.0), 40.0, p1);
  const auto c = rho_vib(t, std::sqrt(5.0), 40.0, p2);
  const double theta = std::fmod(5000.0 * t, 2 * std::numbers::pi);
  double pop = 0.0, rot = 0.0, w21 = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    pop = std::max(pop, std::abs(a.rho(i, i) - b.rho(i, i)));
    for (int j = 0; j < a.dim(); ++j) {
      rot = std::max(rot, std::abs(b.rho(i, j) - a.rho(i, j) * std::polar(1.0, -theta * (i - j))));
      w21 = std::max(w21, std::abs(c.rho(i, j) - a.rho(i, j)));
    }
  }
  CHECK(pop < 1e-15);
  CHECK(rot < 1e-13);
  CHECK(w21 < 1e-15);
}

TEST_CASE("pump convergence at zero mismatch on a short window") {
  ModelParams p = params(2, 0.2, 0.0, 0.0);
  std::vector<double> taus;
  for (int i = 0; i <= 40; ++i) taus.push_back(0.005 * i);
  const std::vector<double> betas = {20.0, 100.0};
  const auto rep = convergence_metric(betas, 0.0, taus, p, std::sqrt(12.0));
  for (double d : rep.distances) CHECK(d < 1e-6);
  const std::vector<double> twice = {20.0, 20.0};
  const auto same = convergence_metric(twice, 0.2, taus, p, std::sqrt(12.0));
  CHECK(same.distances[0] == same.distances[1]);
}
