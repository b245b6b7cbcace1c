#include "ucert/certify.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <sstream>

#include "ucert/error.hpp"

namespace ucert {

const char* to_string(Verdict v) {
  return v == Verdict::H0_identity ? "H0_identity" : "H1_far";
}

double diamond_distance_to_identity(const UnitaryMatrix& u) {
  const double arc = shortest_covering_arc(eigenangles(u));
  if (arc >= std::numbers::pi) return 2.0;
  return 2.0 * std::sin(0.5 * arc);
}

double per_query_pass_probability(const UnitaryMatrix& u) {
  const double d = static_cast<double>(u.dim());
  const double t2 = std::norm(u.trace());
  return std::min(1.0, (d + t2) / (d * (d + 1.0)));
}

ErrorCurve error_curve(const UnitaryMatrix& u, std::span<const std::uint64_t> ns, double epsilon) {
  ErrorCurve curve;
  curve.d = u.dim();
  curve.epsilon = epsilon;
  curve.trace_abs = std::abs(u.trace());
  curve.pass_prob = per_query_pass_probability(u);
  curve.points.reserve(ns.size());
  for (std::uint64_t n : ns) {
    curve.points.push_back({n, std::pow(curve.pass_prob, static_cast<double>(n))});
  }
  return curve;
}

std::uint64_t queries_to_target(double pass_prob, double target) {
  if (!(target > 0.0 && target < 1.0)) throw ValidationError("target probability must lie in (0, 1)");
  if (!(pass_prob >= 0.0 && pass_prob <= 1.0)) throw ValidationError("pass probability must lie in [0, 1]");
  if (pass_prob >= 1.0) throw UnreachableError("pass probability is 1; no query count reaches the target");
  if (pass_prob == 0.0) return 1;
  auto n = static_cast<std::uint64_t>(std::ceil(std::log(target) / std::log(pass_prob)));
  // Guard the ceiling against rounding in the logarithm ratio.
  while (n > 1 && std::pow(pass_prob, static_cast<double>(n - 1)) <= target) --n;
  while (std::pow(pass_prob, static_cast<double>(n)) > target) ++n;
  return std::max<std::uint64_t>(n, 1);
}

std::uint64_t queries_to_target(const UnitaryMatrix& u, double target) {
  return queries_to_target(per_query_pass_probability(u), target);
}

Decision simulate_incoherent(const UnitaryMatrix& u, std::size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("simulate_incoherent needs N >= 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const ComplexMatrix& m = u.matrix();
  for (std::size_t k = 1; k <= n; ++k) {
    const StateVector psi = haar_state(u.dim(), rng);
    const ComplexVector& v = psi.amplitudes();
    const double accept = std::norm(v.dot(m * v));
    if (unif(rng) >= accept) return {Verdict::H1_far, k, static_cast<double>(k)};
  }
  return {Verdict::H0_identity, n, 0.0};
}

Decision hadamard_test_certify(const UnitaryMatrix& u, const StateVector& psi, std::size_t n,
                               double epsilon, Rng& rng) {
  if (n == 0) throw ValidationError("hadamard_test_certify needs N >= 1");
  if (psi.dim() != u.dim()) throw ValidationError("state and unitary dimensions differ");
  const double s = PerturbationParams::from_epsilon(epsilon).s;
  const ComplexVector& v = psi.amplitudes();
  const double re = std::clamp(v.dot(u.matrix() * v).real(), -1.0, 1.0);
  std::binomial_distribution<std::size_t> shots(n, 0.5 * (1.0 + re));
  const double zeros = static_cast<double>(shots(rng));
  const double estimate = 2.0 * zeros / static_cast<double>(n) - 1.0;
  const double threshold = std::cos(s) + 0.5 * (1.0 - std::cos(s));
  const Verdict verdict = estimate > threshold ? Verdict::H0_identity : Verdict::H1_far;
  return {verdict, n, estimate};
}

}  // namespace ucert
