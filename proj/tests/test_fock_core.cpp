#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "errors.hpp"
#include "fock_core.hpp"
#include "oracles.hpp"

using namespace ionjc;
using doctest::Approx;

namespace {

ModelParams make(int k, double eta, double dphi) {
  ModelParams p;
  p.k = k;
  p.eta = eta;
  p.delta_phi = dphi;
  return p;
}

double direct_poisson_tail(double mean, int cutoff) {
  long double tail = 0.0L;
  for (int j = cutoff + 1; j < cutoff + 2000; ++j) {
    tail += std::exp(-mean + j * std::log(mean) - std::lgamma(j + 1.0L));
  }
  return static_cast<double>(tail);
}

}  // namespace

TEST_CASE("log_factorial matches summed logarithms") {
  long double s = 0.0L;
  for (int n = 0; n <= 300; ++n) {
    if (n > 0) s += std::log(static_cast<long double>(n));
    CHECK(log_factorial(n) == Approx(static_cast<double>(s)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(log_factorial(-1), Error);
}

TEST_CASE("laguerre reference values") {
  CHECK(laguerre(0, 5, 3.7) == 1.0);
  CHECK(laguerre(1, 2, 1.0) == Approx(2.0).epsilon(1e-15));
  CHECK(laguerre(2, 0, 2.0) == Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("laguerre recurrence agrees with the explicit series") {
  for (int k = 0; k <= 5; ++k) {
    for (int n = 0; n <= 60; ++n) {
      for (double x : {0.0, 0.01, 0.04, 0.09, 0.3, 0.7, 1.0}) {
        const double ref = oracle::laguerre_series(n, k, x);
        CHECK(laguerre(n, k, x) == Approx(ref).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("laguerre matches the standard library at larger arguments") {
  for (int k : {0, 1, 3, 7}) {
    for (int n : {0, 1, 5, 20, 40}) {
      for (double x : {0.5, 2.0, 6.0, 11.6}) {
        const double ref = std::assoc_laguerre(n, k, x);
        CHECK(laguerre(n, k, x) == Approx(ref).epsilon(1e-11).scale(1.0));
      }
    }
  }
}

TEST_CASE("laguerre_sequence equals pointwise evaluation") {
  const auto seq = laguerre_sequence(30, 3, 0.8);
  for (int n = 0; n <= 30; ++n) CHECK(seq[n] == laguerre(n, 3, 0.8));
}

TEST_CASE("bessel_j reference values and symmetry") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(3, 0.0) == 0.0);
  CHECK(bessel_j(-2, 1.5) == Approx(bessel_j(2, 1.5)).epsilon(1e-15));
  CHECK(bessel_j(-3, 1.5) == Approx(-bessel_j(3, 1.5)).epsilon(1e-15));
  CHECK(bessel_j(3, -2.0) == Approx(-bessel_j(3, 2.0)).epsilon(1e-15));
}

TEST_CASE("bessel_j agrees with the power series for small arguments") {
  for (int n = 0; n <= 20; ++n) {
    for (double x : {0.1, 0.5, 1.0, 2.5, 5.0, 8.0}) {
      const double ref = oracle::bessel_series(n, x);
      CHECK(bessel_j(n, x) == Approx(ref).epsilon(1e-12).scale(1e-3));
    }
  }
}

TEST_CASE("bessel_j agrees with std::cyl_bessel_j over the quadrature range") {
  std::vector<double> seq(64);
  for (double x = 0.05; x <= 60.0; x += 0.37) {
    bessel_j_sequence(x, seq);
    for (int n = 0; n < 64; ++n) {
      const double ref = std::cyl_bessel_j(static_cast<double>(n), x);
      CHECK(std::abs(seq[n] - ref) <= 1e-12 * std::max(1e-3, std::abs(ref)) + 1e-14);
      CHECK(std::abs(seq[n]) <= 1.0);
    }
  }
}

TEST_CASE("coupling_f reference values") {
  for (int n = 0; n < 20; ++n) CHECK(coupling_f(n, make(1, 0.2, 0.0)) == cd{});
  CHECK(coupling_f(0, make(0, 0.3, 0.0)).real() == Approx(std::exp(-0.045)).epsilon(1e-15));
  const cd f3 = coupling_f(0, make(3, 0.2, std::numbers::pi / 2));
  CHECK(f3.imag() == 0.0);
  CHECK(f3.real() == Approx(std::exp(-0.02) * 0.008 / 6.0).epsilon(1e-14));
}

TEST_CASE("coupling_f equals the RWA matrix element of the standing wave") {
  // <n| cos(eta(a + a^dag) + dphi) |n+k> = f_k(n) sqrt((n+k)!/n!)
  const int dim = 140;
  for (double eta : {0.1, 0.2, 0.3}) {
    for (double dphi : {0.0, 0.4, std::numbers::pi / 2, 2.1}) {
      const Eigen::MatrixXd g = oracle::standing_wave(dim, eta, dphi);
      for (int k = 0; k <= 4; ++k) {
        const auto p = make(k, eta, dphi);
        for (int n = 0; n <= 25; ++n) {
          const double ratio = std::exp(0.5 * (std::lgamma(n + k + 1.0) - std::lgamma(n + 1.0)));
          const cd f = coupling_f(n, p);
          CHECK(f.imag() == 0.0);
          CHECK(f.real() * ratio == Approx(g(n, n + k)).epsilon(1e-10).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("coupling_f parity under dphi -> -dphi") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = trial % 6;
    const double dphi = u(rng);
    const auto a = coupling_f(trial % 17, make(k, 0.25, dphi));
    const auto b = coupling_f(trial % 17, make(k, 0.25, -dphi));
    CHECK(b.real() == Approx((k % 2 ? -1.0 : 1.0) * a.real()).epsilon(1e-13).scale(1e-300));
  }
}

TEST_CASE("rabi_frequency scaling") {
  const auto p = make(2, 0.2, 0.3);
  for (int n = 0; n < 30; ++n) {
    const cd base = rabi_frequency(0, n, p);
    CHECK(std::abs(rabi_frequency(3, n, p) - 2.0 * base) <= 1e-15 * std::abs(base));
    for (int m : {1, 7, 99, 9999}) {
      CHECK(std::abs(rabi_frequency(m, n, p) / base) == Approx(std::sqrt(m + 1.0)).epsilon(1e-14));
    }
  }
  CHECK(rabi_frequency(0, 0, make(0, 0.3, 0.0)).real() == Approx(2.0 * std::exp(-0.045)).epsilon(1e-15));
  CHECK(rabi_frequency(5, 4, make(1, 0.2, 0.0)) == cd{});
}

TEST_CASE("rabi_frequency stays finite for pump numbers near 1e4") {
  const auto p = make(2, 0.2, 0.0);
  for (int n : {0, 30, 200}) {
    const cd v = rabi_frequency(10722, n, p);
    CHECK(std::isfinite(v.real()));
  }
}

TEST_CASE("coherent_vector") {
  TruncationPolicy pol;
  pol.n_max_motion = 10;
  const auto vac = coherent_vector(0.0, pol);
  CHECK(vac.entries[0] == cd{1.0});
  for (int n = 1; n <= 10; ++n) CHECK(vac.entries[n] == cd{});
  CHECK(vac.tail_mass == 0.0);

  pol.n_max_motion = suggest_truncation(std::sqrt(12.0), 1e-12);
  const auto c = coherent_vector(std::sqrt(12.0), pol);
  CHECK(c.norm_squared() >= 1.0 - 1e-12);
  CHECK(c.norm_squared() + c.tail_mass == Approx(1.0).epsilon(1e-12));

  pol.n_max_motion = 40;
  const auto two = coherent_vector(2.0, pol);
  const auto two_i = coherent_vector(cd{0.0, 2.0}, pol);
  for (int n = 0; n <= 40; ++n) CHECK(std::abs(two.entries[n]) == Approx(std::abs(two_i.entries[n])).epsilon(1e-14));
  // alpha^n phase
  CHECK(std::arg(two_i.entries[1]) == Approx(std::numbers::pi / 2).epsilon(1e-14));

  pol.n_max_motion = 5;
  CHECK_THROWS_AS(coherent_vector(3.0, pol), Error);
  try {
    coherent_vector(3.0, pol);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationTooSmall);
  }
}

TEST_CASE("coherent_vector norm accounting property") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 6.0), ph(-3.1, 3.1);
  for (int trial = 0; trial < 40; ++trial) {
    const cd a = std::polar(u(rng), ph(rng));
    TruncationPolicy pol;
    pol.n_max_motion = suggest_truncation(std::abs(a), 1e-12);
    const auto v = coherent_vector(a, pol);
    CHECK(v.norm_squared() + v.tail_mass == Approx(1.0).epsilon(1e-12));
    CHECK(v.tail_mass < 1e-12);
  }
}

TEST_CASE("suggest_truncation is the smallest cutoff meeting the tail bound") {
  CHECK(suggest_truncation(0.0, 1e-12) == 0);
  for (double a : {std::sqrt(12.0), std::sqrt(5.0), 1.0, 4.0, 10.0}) {
    const double mean = a * a;
    const int n = suggest_truncation(a, 1e-12);
    CHECK(direct_poisson_tail(mean, n) < 1e-12);
    CHECK(direct_poisson_tail(mean, n - 1) >= 1e-12);
  }
}

TEST_CASE("poisson_tail_above matches direct summation") {
  for (double mean : {0.5, 5.0, 12.0, 400.0}) {
    for (int c : {0, 3, static_cast<int>(mean), static_cast<int>(mean + 5 * std::sqrt(mean))}) {
      CHECK(poisson_tail_above(mean, c) == Approx(direct_poisson_tail(mean, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("poisson_window keeps all but epsilon of the mass") {
  for (double mean : {0.0, 0.3, 5.0, 12.0, 400.0, 1600.0, 10000.0}) {
    const auto w = poisson_window(mean, 1e-12);
    CompensatedSum s;
    for (double v : w.weights) s.add(v);
    CHECK(w.excluded_mass < 1e-12);
    CHECK(s.value() + w.excluded_mass == Approx(1.0).epsilon(1e-13));
    CHECK(w.weight(w.lo - 1) == 0.0);
    CHECK(w.weight(w.hi + 1) == 0.0);
    if (mean > 0.0) {
      const double p_lo = std::exp(-mean + w.lo * std::log(mean) - std::lgamma(w.lo + 1.0));
      CHECK(w.weight(w.lo) == Approx(p_lo).epsilon(1e-9));
    }
  }
}

TEST_CASE("ModelParams validation names the field") {
  ModelParams p;
  p.k = -1;
  try {
    p.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "k");
  }
  p = ModelParams{};
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = ModelParams{};
  p.arg_kappa = 0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("CompensatedSum recovers cancelled low-order bits") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  CHECK(s.value() == Approx(1e-13).epsilon(1e-10));
}
