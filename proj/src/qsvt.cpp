#include "ucert/qsvt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "ucert/error.hpp"

namespace ucert {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

std::vector<double> expand_symmetric(std::span<const double> reduced, std::size_t degree) {
  std::vector<double> full(degree + 1);
  for (std::size_t j = 0; j <= degree; ++j) full[j] = reduced[std::min(j, degree - j)];
  return full;
}

// Positive Chebyshev nodes cos((2k-1) pi / (4m)), k = 1..m.
std::vector<double> positive_nodes(std::size_t m) {
  std::vector<double> x(m);
  for (std::size_t k = 1; k <= m; ++k) {
    x[k - 1] = std::cos(static_cast<double>(2 * k - 1) * std::numbers::pi / (4.0 * static_cast<double>(m)));
  }
  return x;
}

// v <- e^{i phi (2|w><w| - I)} v
void rotate_about(ComplexVector& v, const ComplexVector& w, double phi) {
  const Complex overlap = w.dot(v);
  const Complex lift = std::polar(1.0, 2.0 * phi) - 1.0;
  v += (lift * overlap) * w;
  v *= std::polar(1.0, -phi);
}

void check_circuit_dims(const UnitaryMatrix& u, const StateVector& psi) {
  if (psi.dim() != u.dim()) {
    std::ostringstream os;
    os << "state dimension " << psi.dim() << " does not match unitary dimension " << u.dim();
    throw ValidationError(os.str());
  }
}

}  // namespace

std::size_t rescaled_chebyshev_degree(double delta, double cap_delta) {
  if (!(delta > 0.0 && delta < 0.5) || !(cap_delta > 0.0 && cap_delta < 0.5)) {
    throw ValidationError("delta and cap_delta must lie in (0, 1/2)");
  }
  const double half = std::log(2.0 / cap_delta) / std::sqrt(delta);
  return 2 * static_cast<std::size_t>(std::ceil(half));
}

QsvtPlan qsvt_params(std::size_t d, double epsilon) {
  if (d < 2) throw ValidationError("qsvt_params needs d >= 2");
  if (!(epsilon > 0.0 && epsilon < 2.0)) {
    std::ostringstream os;
    os << "epsilon must lie in (0, 2), got " << epsilon;
    throw ValidationError(os.str());
  }
  QsvtPlan plan;
  plan.d = d;
  plan.epsilon = epsilon;
  plan.delta = epsilon * epsilon / (48.0 * static_cast<double>(d));
  plan.cap_delta = 1.0 / std::sqrt(6.0);
  plan.degree = rescaled_chebyshev_degree(plan.delta, plan.cap_delta);
  return plan;
}

double chebyshev_t(std::size_t n, double x) {
  const double nn = static_cast<double>(n);
  if (std::abs(x) <= 1.0) return std::cos(nn * std::acos(x));
  const double mag = std::cosh(nn * std::acosh(std::abs(x)));
  return (x < 0.0 && n % 2 == 1) ? -mag : mag;
}

double rescaled_chebyshev_eval(double x, double delta, std::size_t degree) {
  if (degree % 2 != 0) throw ValidationError("rescaled Chebyshev polynomial needs an even degree");
  if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("delta must lie in (0, 1/2)");
  const double nn = static_cast<double>(degree);
  const double y = x / (1.0 - delta);
  const double b = nn * std::acosh(1.0 / (1.0 - delta));
  if (std::abs(y) <= 1.0) {
    // cos(n acos y) / cosh(b)
    return std::cos(nn * std::acos(y)) * (2.0 * std::exp(-b) / (1.0 + std::exp(-2.0 * b)));
  }
  const double a = nn * std::acosh(std::abs(y));
  return std::exp(a - b) * (1.0 + std::exp(-2.0 * a)) / (1.0 + std::exp(-2.0 * b));
}

Complex qsp_response(std::span<const double> phases, double x) {
  if (phases.empty()) throw ValidationError("qsp_response needs at least one phase");
  const double c = std::clamp(x, -1.0, 1.0);
  const Complex is(0.0, std::sqrt(std::max(0.0, 1.0 - c * c)));
  // Row 0 of the running product.
  Complex r0 = std::polar(1.0, phases[0]);
  Complex r1 = 0.0;
  for (std::size_t k = 1; k < phases.size(); ++k) {
    const Complex a = r0 * c + r1 * is;
    const Complex b = r0 * is + r1 * c;
    r0 = a * std::polar(1.0, phases[k]);
    r1 = b * std::polar(1.0, -phases[k]);
  }
  return r0;
}

double phase_residual(std::span<const double> phases, const std::function<double(double)>& target,
                      std::size_t grid_points) {
  double worst = 0.0;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double x = std::cos((static_cast<double>(k) + 0.5) * std::numbers::pi / static_cast<double>(grid_points));
    worst = std::max(worst, std::abs(qsp_response(phases, x).real() - target(x)));
  }
  return worst;
}

PhaseSolution solve_qsp_phases(const std::function<double(double)>& target, std::size_t degree,
                               const PhaseSolverOptions& options) {
  if (degree > options.max_degree) {
    std::ostringstream os;
    os << "degree " << degree << " exceeds the phase solver limit " << options.max_degree;
    throw ValidationError(os.str());
  }
  if (degree == 0) {
    const double value = target(0.5);
    PhaseSolution sol;
    sol.phases = {value >= 0.0 ? 0.0 : std::numbers::pi};
    sol.residual = phase_residual(sol.phases, target, options.grid_points);
    if (sol.residual > options.grid_tolerance) {
      throw ConvergenceError("degree-0 response has modulus 1; target is not constant +-1", sol.residual);
    }
    return sol;
  }

  const std::size_t m = degree / 2 + 1;
  const std::vector<double> nodes = positive_nodes(m);
  Eigen::VectorXd goal(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) goal(static_cast<Eigen::Index>(k)) = target(nodes[k]);

  auto residual = [&](const Eigen::VectorXd& reduced) {
    const std::vector<double> full =
        expand_symmetric(std::span<const double>(reduced.data(), reduced.size()), degree);
    Eigen::VectorXd f(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      f(static_cast<Eigen::Index>(k)) = qsp_response(full, nodes[k]).real();
    }
    return Eigen::VectorXd(f - goal);
  };

  Eigen::VectorXd reduced = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  reduced(0) = 0.25 * std::numbers::pi;
  Eigen::VectorXd f = residual(reduced);
  double err = f.cwiseAbs().maxCoeff();
  std::size_t it = 0;
  constexpr double h = 1e-7;
  for (; it < options.max_iterations && err > options.node_tolerance; ++it) {
    Eigen::MatrixXd jac(f.size(), reduced.size());
    for (Eigen::Index j = 0; j < reduced.size(); ++j) {
      Eigen::VectorXd plus = reduced, minus = reduced;
      plus(j) += h;
      minus(j) -= h;
      jac.col(j) = (residual(plus) - residual(minus)) / (2.0 * h);
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(f);
    double scale = 1.0;
    bool improved = false;
    for (int back = 0; back < 30; ++back) {
      const Eigen::VectorXd trial = reduced - scale * step;
      const Eigen::VectorXd ft = residual(trial);
      const double et = ft.cwiseAbs().maxCoeff();
      if (std::isfinite(et) && et < err) {
        reduced = trial;
        f = ft;
        err = et;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }

  PhaseSolution sol;
  sol.phases = expand_symmetric(std::span<const double>(reduced.data(), reduced.size()), degree);
  sol.iterations = it;
  sol.residual = phase_residual(sol.phases, target, options.grid_points);
  if (!(sol.residual <= options.grid_tolerance)) {
    std::ostringstream os;
    os << "phase solver stalled after " << it << " iterations, grid residual " << sol.residual;
    throw ConvergenceError(os.str(), sol.residual);
  }
  return sol;
}

std::vector<double> qsp_phases(const QsvtPlan& plan, const PhaseSolverOptions& options) {
  const double delta = plan.delta;
  const std::size_t n = plan.degree;
  return solve_qsp_phases([delta, n](double x) { return rescaled_chebyshev_eval(x, delta, n); }, n, options)
      .phases;
}

QsvtPlan with_phases(QsvtPlan plan, const PhaseSolverOptions& options) {
  plan.phases = qsp_phases(plan, options);
  return plan;
}

std::vector<double> circuit_phases(std::span<const double> qsp) {
  if (qsp.size() < 3 || qsp.size() % 2 == 0) {
    throw ValidationError("circuit phases need an even degree >= 2 (odd number of QSP phases)");
  }
  const std::size_t n = qsp.size() - 1;
  std::vector<double> c(n);
  c[0] = qsp[0] + qsp[n] - kHalfPi;
  for (std::size_t k = 1; k < n; ++k) c[k] = qsp[k] - kHalfPi;
  return c;
}

StateVector apply_projector_rotations(const UnitaryMatrix& u, const StateVector& psi,
                                      std::span<const double> angles, const StateVector& input) {
  check_circuit_dims(u, psi);
  if (input.dim() != u.dim()) throw ValidationError("input dimension does not match unitary dimension");
  if (angles.size() % 2 != 0) throw ValidationError("rotation angles must come in (Pi, Pit) pairs");
  const ComplexMatrix& um = u.matrix();
  const ComplexVector& axis = psi.amplitudes();
  ComplexVector v = input.amplitudes();
  for (std::size_t k = angles.size(); k-- > 0;) {
    if (k % 2 == 0) {
      rotate_about(v, axis, angles[k]);
    } else {
      v = um.adjoint() * v;
      rotate_about(v, axis, angles[k]);
      v = um * v;
    }
  }
  v /= v.norm();
  return StateVector(std::move(v));
}

StateVector apply_qsvt_circuit(const UnitaryMatrix& u, const StateVector& psi,
                               std::span<const double> angles, const StateVector& input) {
  check_circuit_dims(u, psi);
  const auto d = static_cast<Eigen::Index>(u.dim());
  if (input.dim() != 2 * u.dim()) throw ValidationError("input must live on system (x) one ancilla qubit");
  if (angles.size() % 2 != 0) throw ValidationError("rotation angles must come in (Pi, Pit) pairs");
  const ComplexMatrix& um = u.matrix();
  const ComplexVector& axis = psi.amplitudes();
  const ComplexVector& in = input.amplitudes();
  // Ancilla branches: index s*2 + a.
  ComplexVector b0(d), b1(d);
  for (Eigen::Index s = 0; s < d; ++s) {
    b0(s) = in(2 * s);
    b1(s) = in(2 * s + 1);
  }
  for (std::size_t k = angles.size(); k-- > 0;) {
    if (k % 2 == 0) {
      rotate_about(b0, axis, angles[k]);
      rotate_about(b1, axis, -angles[k]);
    } else {
      b0 = um.adjoint() * b0;
      b1 = um.adjoint() * b1;
      rotate_about(b0, axis, angles[k]);
      rotate_about(b1, axis, -angles[k]);
      b0 = um * b0;
      b1 = um * b1;
    }
  }
  ComplexVector out(2 * d);
  for (Eigen::Index s = 0; s < d; ++s) {
    out(2 * s) = b0(s);
    out(2 * s + 1) = b1(s);
  }
  out /= out.norm();
  return StateVector(std::move(out));
}

Complex qsvt_accept_amplitude(const UnitaryMatrix& u, const StateVector& psi,
                              std::span<const double> angles) {
  check_circuit_dims(u, psi);
  const auto d = static_cast<Eigen::Index>(u.dim());
  const double r = std::numbers::sqrt2 / 2.0;
  ComplexVector in(2 * d);
  for (Eigen::Index s = 0; s < d; ++s) {
    in(2 * s) = r * psi.amplitudes()(s);
    in(2 * s + 1) = r * psi.amplitudes()(s);
  }
  const StateVector out = apply_qsvt_circuit(u, psi, angles, StateVector(in));
  Complex amp = 0.0;
  for (Eigen::Index s = 0; s < d; ++s) {
    amp += std::conj(psi.amplitudes()(s)) * r * (out.amplitudes()(2 * s) + out.amplitudes()(2 * s + 1));
  }
  return amp;
}

Estimate alg2_error_prob(const UnitaryMatrix& u, const QsvtPlan& plan, std::size_t trials, Rng& rng) {
  if (trials == 0) throw ValidationError("alg2_error_prob needs trials >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const StateVector psi = haar_state(u.dim(), rng);
    const double value = coherent_accept_probability(u, psi, plan, CoherentPath::fast);
    sum += value;
    sum_sq += value * value;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

double coherent_accept_probability(const UnitaryMatrix& u, const StateVector& psi,
                                   const QsvtPlan& plan, CoherentPath path) {
  check_circuit_dims(u, psi);
  if (path == CoherentPath::fast) {
    const ComplexVector& v = psi.amplitudes();
    const double x = std::min(1.0, std::abs(v.dot(u.matrix().adjoint() * v)));
    const double p = rescaled_chebyshev_eval(x, plan.delta, plan.degree);
    return p * p;
  }
  if (plan.phases.empty()) throw ValidationError("explicit circuit path needs solved phases");
  const std::vector<double> angles = circuit_phases(plan.phases);
  return std::min(1.0, std::norm(qsvt_accept_amplitude(u, psi, angles)));
}

Decision simulate_coherent(const UnitaryMatrix& u, const QsvtPlan& plan, Rng& rng, CoherentPath path) {
  if (path == CoherentPath::explicit_circuit && plan.phases.empty()) {
    throw ValidationError("explicit circuit path needs solved phases");
  }
  const StateVector psi = haar_state(u.dim(), rng);
  const double accept = coherent_accept_probability(u, psi, plan, path);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const bool outcome_psi = unif(rng) < accept;
  return {outcome_psi ? Verdict::H0_identity : Verdict::H1_far, plan.degree, accept};
}

}  // namespace ucert
