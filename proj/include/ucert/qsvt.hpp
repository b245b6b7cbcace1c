#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ucert/certify.hpp"
#include "ucert/ensembles.hpp"
#include "ucert/linalg.hpp"

namespace ucert {

/// Parameters of the coherent (amplitude deamplification) test.
struct QsvtPlan {
  std::size_t d = 0;
  double epsilon = 0.0;
  double delta = 0.0;      // eps^2 / (48 d): overlap gap below 1
  double cap_delta = 0.0;  // 1/sqrt(6): bound on |P| away from 1
  std::size_t degree = 0;  // even
  std::vector<double> phases;  // degree + 1 QSP phases, empty until solved
};

/// delta = eps^2/(48 d), cap_delta = 1/sqrt(6), degree = 2 ceil(ln(2/cap_delta)/sqrt(delta)).
QsvtPlan qsvt_params(std::size_t d, double epsilon);

/// Degree n = 2 ceil(ln(2/cap_delta) / sqrt(delta)).
std::size_t rescaled_chebyshev_degree(double delta, double cap_delta);

/// T_n(x) via cos/cosh closed forms.
double chebyshev_t(std::size_t n, double x);

/// P(x) = T_n(x/(1-delta)) / T_n(1/(1-delta)) for even n.
double rescaled_chebyshev_eval(double x, double delta, std::size_t degree);

/// Top-left entry of e^{i phi_0 Z} prod_k W(x) e^{i phi_k Z} with
/// W(x) = [[x, i sqrt(1-x^2)], [i sqrt(1-x^2), x]]. Any number of phases >= 1.
Complex qsp_response(std::span<const double> phases, double x);

struct PhaseSolverOptions {
  std::size_t max_iterations = 400;
  double node_tolerance = 1e-13;
  double grid_tolerance = 1e-8;
  std::size_t grid_points = 1000;
  std::size_t max_degree = 120;
};

struct PhaseSolution {
  std::vector<double> phases;
  double residual = 0.0;  // max |Re response - target| on the check grid
  std::size_t iterations = 0;
};

/// Symmetric phases whose response has real part equal to `target`, a real
/// polynomial of the given degree and parity with |target| <= 1 on [-1, 1].
/// Newton iteration on Chebyshev nodes; throws ConvergenceError with the
/// achieved grid residual on failure.
PhaseSolution solve_qsp_phases(const std::function<double(double)>& target, std::size_t degree,
                               const PhaseSolverOptions& options = {});

/// max over a Chebyshev-node grid of |Re qsp_response - target|.
double phase_residual(std::span<const double> phases, const std::function<double(double)>& target,
                      std::size_t grid_points = 1000);

/// Solves the phases of the plan's rescaled Chebyshev polynomial.
std::vector<double> qsp_phases(const QsvtPlan& plan, const PhaseSolverOptions& options = {});
QsvtPlan with_phases(QsvtPlan plan, const PhaseSolverOptions& options = {});

/// Converts degree+1 QSP phases (even degree) to the `degree` rotation angles
/// c_1..c_n of Pi_{c_1} Pit_{c_2} Pi_{c_3} ... Pit_{c_n}, where
/// Pi_c = e^{ic(2|psi><psi|-I)} and Pit_c = U Pi_c U^dagger. The psi-block of
/// that product equals (-1)^{n/2} times the QSP response at x = |<psi|U|psi>|.
std::vector<double> circuit_phases(std::span<const double> qsp_phases);

/// Applies the ancilla-free alternating rotation product to `input` (dimension d).
/// Each Pit rotation spends one query to U and one to U^dagger.
StateVector apply_projector_rotations(const UnitaryMatrix& u, const StateVector& psi,
                                      std::span<const double> rotation_angles,
                                      const StateVector& input);

/// Real-QSVT circuit on system (x) one ancilla qubit: every rotation angle is
/// applied with sign set by the ancilla's Z value, U and U^dagger act on the
/// system only. With the ancilla in |+>, <psi,+|V|psi,+> = Re of the
/// ancilla-free psi-block. `input` has dimension 2d.
StateVector apply_qsvt_circuit(const UnitaryMatrix& u, const StateVector& psi,
                               std::span<const double> rotation_angles, const StateVector& input);

/// <psi,+| V |psi,+> for the real-QSVT circuit.
Complex qsvt_accept_amplitude(const UnitaryMatrix& u, const StateVector& psi,
                              std::span<const double> rotation_angles);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Haar average of P(|<psi|U^dagger|psi>|)^2, the H1 error of the coherent test.
Estimate alg2_error_prob(const UnitaryMatrix& u, const QsvtPlan& plan, std::size_t trials, Rng& rng);

enum class CoherentPath { fast, explicit_circuit };

/// Pr[outcome psi] for one input state.
double coherent_accept_probability(const UnitaryMatrix& u, const StateVector& psi,
                                   const QsvtPlan& plan, CoherentPath path);

/// One run of the coherent test; queries_used is the degree (n/2 to U, n/2 to U^dagger).
Decision simulate_coherent(const UnitaryMatrix& u, const QsvtPlan& plan, Rng& rng,
                           CoherentPath path = CoherentPath::fast);

}  // namespace ucert
