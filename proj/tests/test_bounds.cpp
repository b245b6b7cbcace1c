#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "ucert/bounds.hpp"
#include "ucert/ensembles.hpp"
#include "ucert/error.hpp"

using namespace ucert;
using std::numbers::pi;

namespace {

ComplexMatrix random_pure(std::size_t dim, Rng& rng) {
  const auto v = haar_state(dim, rng).amplitudes();
  return v * v.adjoint();
}

ComplexMatrix swap_operator(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d * d);
  ComplexMatrix f = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) f(static_cast<Eigen::Index>(j * d + i), static_cast<Eigen::Index>(i * d + j)) = 1.0;
  return f;
}

ComplexMatrix tensor_power(const ComplexMatrix& m, std::size_t n) {
  ComplexMatrix out = m;
  for (std::size_t k = 1; k < n; ++k) out = tensor(out, m);
  return out;
}

}  // namespace

TEST_CASE("s of epsilon") {
  CHECK(s_of_eps(0.0) == 0.0);
  CHECK(s_of_eps(1.0) == doctest::Approx(pi / 3).epsilon(1e-15));
  CHECK(s_of_eps(0.5) == doctest::Approx(0.50536).epsilon(1e-5));
  CHECK(s_of_eps(0.5) < 1.02 * 0.5);
  CHECK_THROWS_AS(s_of_eps(-0.1), ValidationError);
  CHECK_THROWS_AS(s_of_eps(2.1), ValidationError);
}

TEST_CASE("g bound") {
  CHECK(g_bound(0.3, 10, 0.0).value == 0.0);
  const double s = s_of_eps(0.01);
  const std::size_t d = 1000;
  const double n = 1e-8 * d / (s * s);
  CHECK(g_bound(s, d, n).value == doctest::Approx(606e-8 + 720072e-16).epsilon(1e-12));
  CHECK(g_bound(s, d, n).value == doctest::Approx(6.06e-6).epsilon(1e-3));
  CHECK(kGLinear == 606.0);
  CHECK(kGQuadratic == 720072.0);
  CHECK(g_bound(0.5, d, 1).valid);
  CHECK_FALSE(g_bound(1.2, d, 1).valid);
}

TEST_CASE("tvd upper bound") {
  const BoundParams defaults;
  auto r0 = tvd_upper(0.1, 100, 0.0, defaults);
  CHECK(r0.f1 == doctest::Approx(0.01));
  CHECK(r0.f2 == doctest::Approx(0.01));
  CHECK(r0.f3 == doctest::Approx(0.26166).epsilon(1e-4));
  CHECK(r0.f4 == doctest::Approx(0.01433).epsilon(1e-3));
  // Independent evaluation of F3 and F4.
  CHECK(r0.f3 == doctest::Approx(1.0 - std::exp(-(1.0 + 1.0 / 0.1) * 0.0003 - 0.3)).epsilon(1e-14));
  CHECK(r0.f4 == doctest::Approx(std::exp(-0.09 / (4 * 0.0003 + 2 * 0.1 * 0.3 / 3))).epsilon(1e-14));

  const double s = s_of_eps(0.01);
  const std::size_t d = 4096;
  auto r = tvd_upper(s, d, 1e-8 * d / (s * s), defaults);
  CHECK(std::abs(r.tvd_upper - (r.f1 + r.f2 + r.f3 + r.f4)) <= 1e-12);
  CHECK(r.tvd_upper == doctest::Approx(0.328).epsilon(3e-3));
  CHECK(r.tvd_upper < 1.0 / 3.0);
  CHECK(r.feasible);
  CHECK(r.d == d);

  // F3, F4 do not depend on (s, d, N).
  for (auto [ss, dd, nn] : std::vector<std::tuple<double, std::size_t, double>>{{0.01, 50, 3}, {0.2, 900, 1e4}, {0.9, 64, 7}}) {
    auto q = tvd_upper(ss, dd, nn, defaults);
    CHECK(q.f3 == r0.f3);
    CHECK(q.f4 == r0.f4);
  }

  double prev = -1.0;
  for (double n = 0; n <= 1e6; n = n * 3 + 1) {
    const double t = tvd_upper(0.05, 256, n, defaults).tvd_upper;
    CHECK(t >= prev);
    prev = t;
  }

  BoundParams tight;
  tight.beta = 1e-4;
  CHECK_THROWS_AS(tvd_upper(0.5, 4, 1, tight), ValidationError);
  CHECK(defaults.alpha_for(7) == 700.0);
}

TEST_CASE("incoherent threshold") {
  auto t = incoherent_threshold(1u << 20, 0.01);
  CHECK(t.n == 104);
  CHECK(t.hypotheses_hold);
  const double s = s_of_eps(0.01);
  CHECK(t.n == static_cast<std::uint64_t>(std::floor(1e-8 * (1u << 20) / (s * s))));

  // Linear in d, decreasing in epsilon.
  const auto a = incoherent_threshold(1u << 24, 0.01).n;
  const auto b = incoherent_threshold(1u << 26, 0.01).n;
  CHECK(std::abs(static_cast<double>(b) - 4.0 * static_cast<double>(a)) <= 4.0);
  std::uint64_t prev = ~0ull;
  for (double e = 0.001; e < 0.5; e += 0.01) {
    const auto n = incoherent_threshold(1u << 30, e).n;
    CHECK(n <= prev);
    prev = n;
  }
  CHECK_FALSE(incoherent_threshold(100, 0.7).hypotheses_hold);
  CHECK_FALSE(incoherent_threshold(1, 0.2).hypotheses_hold);
  CHECK_FALSE(incoherent_threshold(1, 0.2).note.empty());
}

TEST_CASE("coherent bounds") {
  CHECK(coherent_bounds(0.3, 64, 0).trace_bound == 0.0);
  const double s = s_of_eps(0.1);
  auto c = coherent_bounds(s, 64, 0);
  CHECK(c.threshold == 13);
  CHECK(coherent_bounds(s, 64, static_cast<double>(c.threshold)).trace_bound <= 0.5);
  CHECK(coherent_bounds(s, 64, 1e9).trace_bound == 2.0);
}

TEST_CASE("average case constants") {
  auto a = average_case_constants(4, 0.1);
  CHECK(a.fraction_bound == doctest::Approx(std::exp(-1.0 / 9.0) + 2.0 * std::exp(-0.16)).epsilon(1e-14));
  CHECK(a.fraction_bound == doctest::Approx(2.599).epsilon(1e-3));
  CHECK(a.vacuous);

  auto b = average_case_constants(200, 0.1);
  CHECK(b.first_term == doctest::Approx(std::exp(-11.0)).epsilon(1e-14));
  CHECK(b.first_term == doctest::Approx(1.67e-5).epsilon(1e-2));
  CHECK(b.second_term == doctest::Approx(2.0 * std::exp(-40000.0 / 9900.0)).epsilon(1e-14));
  CHECK(b.fraction_bound == doctest::Approx(b.first_term + b.second_term));
  CHECK_FALSE(b.vacuous);

  auto c = average_case_constants(8, 0.5 - 1e-12);
  const double s = s_of_eps(0.5);
  CHECK(c.n_sufficient == doctest::Approx(217.0 * std::exp(24.0) * std::log(3.0) / (s * s)).epsilon(1e-9));
  CHECK(c.n_sufficient == doctest::Approx(2.47e13).epsilon(1e-2));
  CHECK_FALSE(c.note.empty());
  CHECK_FALSE(average_case_constants(3, 0.1).hypotheses_hold);
  CHECK_FALSE(average_case_constants(8, 0.7).hypotheses_hold);
}

TEST_CASE("tail bound") {
  CHECK(sdelta_tail_bound(4, 0.5, 0.0) == 0.0);
  CHECK(sdelta_tail_bound(4, 0.5, 0.25 / 192.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(sdelta_tail_bound(4, 0.5, 1.0) == 1.0);

  // Haar Monte Carlo for a single-basis rotation.
  Rng rng(61);
  const double delta = 1e-3;
  auto u = single_basis_rotation(4, PerturbationParams::from_epsilon(0.5), haar_state(4, rng));
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto v = haar_state(4, rng).amplitudes();
    hits += std::abs(v.dot(u.matrix().adjoint() * v)) > 1.0 - delta;
  }
  CHECK(static_cast<double>(hits) / n <= sdelta_tail_bound(4, 0.5, delta));
}

TEST_CASE("haar moment operators") {
  for (std::size_t d : {2u, 3u, 5u}) {
    auto m1 = haar_moment_operator(d, 1);
    CHECK(max_abs(m1 - ComplexMatrix::Identity(d, d) / static_cast<double>(d)) < 1e-15);
    auto m2 = haar_moment_operator(d, 2);
    ComplexMatrix want = (ComplexMatrix::Identity(d * d, d * d) + swap_operator(d)) / static_cast<double>(d * (d + 1));
    CHECK(max_abs(m2 - want) < 1e-15);
  }
  Rng rng(62);
  for (auto [d, n] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 3}, {3, 3}, {2, 4}, {4, 4}}) {
    auto m = haar_moment_operator(d, n);
    CHECK(max_abs(m - m.adjoint()) < 1e-14);
    CHECK(std::abs(m.trace() - 1.0) < 1e-12);
    auto w = tensor_power(haar_unitary(d, rng).matrix(), n);
    CHECK((w * m - m * w).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(haar_moment_operator(2, 5), ValidationError);
  CHECK_THROWS_AS(haar_moment_operator(9, 4), ValidationError);

  // Projector property and a modest Monte Carlo check of the third moment.
  auto m3 = haar_moment_operator(2, 3);
  ComplexMatrix acc = ComplexMatrix::Zero(8, 8);
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) acc += tensor_power(random_pure(2, rng), 3);
  acc /= samples;
  CHECK((acc - m3).norm() < 1e-2);
}

TEST_CASE("permutation operators") {
  std::vector<std::size_t> id = {0, 1}, sw = {1, 0};
  CHECK(max_abs(permutation_operator(3, id) - ComplexMatrix::Identity(9, 9)) == 0.0);
  CHECK(max_abs(permutation_operator(3, sw) - swap_operator(3)) == 0.0);
  std::vector<std::size_t> bad = {0, 0};
  CHECK_THROWS_AS(permutation_operator(3, bad), ValidationError);
}

TEST_CASE("f ratio") {
  Rng rng(63);
  auto e = random_pure(3, rng);
  CHECK(f_ratio(e, e, 3, 1) == doctest::Approx(1.0).epsilon(1e-12));

  const auto a = haar_state(4, rng).amplitudes(), b = haar_state(2, rng).amplitudes();
  ComplexVector ab = tensor(a, b);
  ComplexMatrix prod = ab * ab.adjoint();
  CHECK(f_ratio(prod, prod, 4, 2) == doctest::Approx(1.0).epsilon(1e-12));

  for (int trial = 0; trial < 20; ++trial) {
    auto ee = random_pure(8, rng), rho = random_pure(8, rng);
    const ComplexMatrix te = oracle::partial_trace_system_loops(ee, 4, 2);
    const ComplexMatrix tr = oracle::partial_trace_system_loops(rho, 4, 2);
    Complex num = 0, den = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) num += te(i, j) * tr(j, i);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) den += ee(i, j) * rho(j, i);
    CHECK(std::abs(f_ratio(ee, rho, 4, 2) - (num / den).real()) < 1e-10);
  }
  ComplexMatrix p0 = ComplexMatrix::Zero(4, 4), p1 = ComplexMatrix::Zero(4, 4);
  p0(0, 0) = 1;
  p1(3, 3) = 1;
  CHECK_THROWS_AS(f_ratio(p0, p1, 2, 2), DomainError);
}

TEST_CASE("x statistic") {
  Rng rng(64);
  auto e = random_pure(8, rng), rho = random_pure(8, rng);
  auto psi = haar_state(4, rng);
  CHECK(std::abs(x_statistic(e, rho, psi, 0.0, 4, 2)) < 1e-12);

  // psi outside the system support of E and rho.
  ComplexVector sys(4);
  sys << 0.6, 0.8, 0, 0;
  ComplexVector full = tensor(sys, haar_state(2, rng).amplitudes());
  ComplexMatrix proj = full * full.adjoint();
  CHECK(std::abs(x_statistic(proj, proj, StateVector::basis(4, 3), 0.7, 4, 2)) < 1e-12);

  for (int trial = 0; trial < 10000; ++trial) {
    auto ee = random_pure(8, rng), rr = random_pure(8, rng);
    CHECK(x_statistic(ee, rr, haar_state(4, rng), 0.3 + 2.0 * (trial % 5) / 5.0, 4, 2) >= -1.0 - 1e-12);
  }

  CHECK(x_first_moment_bound(0.3, 4) == doctest::Approx(-0.09 / 4));
  CHECK(x_second_moment_bound(0.3, 2.0, 4) ==
        doctest::Approx(6 * 0.09 * 3 / 16 + 72 * std::pow(0.3, 4) * 5 / 256));
  CHECK(x_second_moment_bound(0.3, 2.0, 4, 3) > x_second_moment_bound(0.3, 2.0, 4, 4));
}
