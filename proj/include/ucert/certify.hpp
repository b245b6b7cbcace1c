#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ucert/ensembles.hpp"
#include "ucert/linalg.hpp"

namespace ucert {

enum class Verdict { H0_identity, H1_far };

const char* to_string(Verdict v);

struct Decision {
  Verdict verdict = Verdict::H0_identity;
  std::size_t queries_used = 0;
  /// First rejecting round (1-based) for the incoherent test, 0 if none;
  /// the estimated Re<psi|U|psi> for the Hadamard test; Pr[accept] for the coherent test.
  double detail = 0.0;
};

/// Diamond distance between the channels of U and I. Uses the shortest arc
/// covering the eigenangles: 2 sin(arc/2), saturating at 2 once arc >= pi.
double diamond_distance_to_identity(const UnitaryMatrix& u);

/// (d + |tr U|^2) / (d (d + 1)): probability that one incoherent round accepts.
double per_query_pass_probability(const UnitaryMatrix& u);

struct ErrorPoint {
  std::uint64_t n = 0;
  double p_error = 1.0;
};

struct ErrorCurve {
  std::size_t d = 0;
  double epsilon = 0.0;
  double trace_abs = 0.0;
  double pass_prob = 1.0;
  std::vector<ErrorPoint> points;
};

ErrorCurve error_curve(const UnitaryMatrix& u, std::span<const std::uint64_t> ns, double epsilon);

/// Smallest N with p^N <= target. Throws UnreachableError when p == 1.
std::uint64_t queries_to_target(double pass_prob, double target);
std::uint64_t queries_to_target(const UnitaryMatrix& u, double target);

/// Runs up to `n` rounds of the random-state test, stopping at the first rejection.
Decision simulate_incoherent(const UnitaryMatrix& u, std::size_t n, Rng& rng);

/// Known-basis Hadamard test: n ancilla shots estimate Re<psi|U|psi>; accepts
/// when the estimate exceeds the midpoint between 1 and cos s.
Decision hadamard_test_certify(const UnitaryMatrix& u, const StateVector& psi, std::size_t n,
                               double epsilon, Rng& rng);

}  // namespace ucert
