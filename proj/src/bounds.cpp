#include "ucert/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "ucert/error.hpp"

namespace ucert {

double s_of_eps(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 2.0)) {
    std::ostringstream os;
    os << "epsilon must lie in [0, 2], got " << epsilon;
    throw ValidationError(os.str());
  }
  return 2.0 * std::asin(0.5 * epsilon);
}

GBound g_bound(double s, std::size_t d, double n) {
  if (d == 0) throw ValidationError("g_bound needs d >= 1");
  const double dd = static_cast<double>(d);
  const double x = s * s * n / dd;
  return {kGLinear * x + kGQuadratic * x * x, s < 1.0};
}

BoundReport tvd_upper(double s, std::size_t d, double n, const BoundParams& params) {
  if (!(params.beta > 0.0 && params.gamma > 0.0 && params.eta > 0.0)) {
    throw ValidationError("beta, gamma and eta must be positive");
  }
  const double beta_floor = 4.0 * s * s / static_cast<double>(d);
  if (params.beta <= beta_floor) {
    std::ostringstream os;
    os << "infeasible parameters: beta = " << params.beta << " <= 4 s^2 / d = " << beta_floor;
    throw ValidationError(os.str());
  }
  BoundReport r;
  r.s = s;
  r.d = d;
  r.n = n;
  r.g = g_bound(s, d, n).value;
  const double b = params.beta, gm = params.gamma, eta = params.eta;
  r.f1 = 0.01 + 20.0 * r.g / (b * b);
  r.f2 = 0.01 + r.g / gm;
  r.f3 = 1.0 - std::exp(-(1.0 + 1.0 / b) * gm - eta);
  r.f4 = std::exp(-eta * eta / (4.0 * gm + 2.0 * b * eta / 3.0));
  r.tvd_upper = r.f1 + r.f2 + r.f3 + r.f4;
  r.feasible = r.tvd_upper < 1.0 / 3.0;
  return r;
}

Threshold incoherent_threshold(std::size_t d, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("incoherent_threshold needs epsilon > 0");
  const double s = s_of_eps(epsilon);
  const double dd = static_cast<double>(d);
  Threshold t;
  t.n = static_cast<std::uint64_t>(std::floor(1e-8 * dd / (s * s)));
  std::ostringstream note;
  if (!(epsilon < 0.5)) {
    t.hypotheses_hold = false;
    note << "epsilon >= 1/2; ";
  }
  if (!(dd > 50.0 * epsilon * epsilon)) {
    t.hypotheses_hold = false;
    note << "d <= 50 eps^2; ";
  }
  t.note = note.str();
  return t;
}

CoherentBounds coherent_bounds(double s, std::size_t d, double n) {
  if (!(s > 0.0)) throw ValidationError("coherent_bounds needs s > 0");
  const double root_d = std::sqrt(static_cast<double>(d));
  return {std::min(2.0, 3.0 * s * n / root_d),
          static_cast<std::uint64_t>(std::floor(root_d / (6.0 * s)))};
}

AverageCaseConstants average_case_constants(std::size_t d, double epsilon) {
  if (d <= 2) throw ValidationError("average_case_constants needs d > 2");
  if (!(epsilon > 0.0)) throw ValidationError("average_case_constants needs epsilon > 0");
  const double dd = static_cast<double>(d);
  const double s = s_of_eps(epsilon);
  AverageCaseConstants c;
  c.first_term = std::exp(-(dd - 2.0) / 18.0);
  c.second_term = 2.0 * std::exp(-dd * dd / (50.0 * (dd - 2.0)));
  c.fraction_bound = c.first_term + c.second_term;
  c.vacuous = c.fraction_bound >= 1.0;
  c.n_sufficient = 217.0 * std::exp(24.0) * std::log(3.0) / (s * s);
  std::ostringstream note;
  if (d < 4) {
    c.hypotheses_hold = false;
    note << "d < 4; ";
  }
  if (!(epsilon < 0.5)) {
    c.hypotheses_hold = false;
    note << "epsilon >= 1/2; ";
  }
  if (c.vacuous) note << "fraction bound >= 1 (vacuous); ";
  note << "sampled channels need far fewer queries than n_sufficient in practice";
  c.note = note.str();
  return c;
}

double sdelta_tail_bound(std::size_t d, double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw ValidationError("sdelta_tail_bound needs epsilon > 0");
  return std::clamp(8.0 * static_cast<double>(d) * delta / (epsilon * epsilon), 0.0, 1.0);
}

ComplexMatrix permutation_operator(std::size_t d, std::span<const std::size_t> sigma) {
  const std::size_t n = sigma.size();
  std::vector<bool> seen(n, false);
  for (std::size_t k : sigma) {
    if (k >= n || seen[k]) throw ValidationError("sigma is not a permutation of 0..n-1");
    seen[k] = true;
  }
  std::size_t dim = 1;
  for (std::size_t k = 0; k < n; ++k) dim *= d;
  ComplexMatrix f = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> in(n), out(n);
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t rest = col;
    for (std::size_t k = n; k-- > 0;) {
      in[k] = rest % d;
      rest /= d;
    }
    for (std::size_t k = 0; k < n; ++k) out[sigma[k]] = in[k];
    std::size_t row = 0;
    for (std::size_t k = 0; k < n; ++k) row = row * d + out[k];
    f(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = 1.0;
  }
  return f;
}

ComplexMatrix haar_moment_operator(std::size_t d, std::size_t n) {
  if (d == 0 || n == 0 || n > 4) throw ValidationError("haar_moment_operator needs d >= 1 and 1 <= n <= 4");
  double dim = std::pow(static_cast<double>(d), static_cast<double>(n));
  if (dim > 4096.0) {
    std::ostringstream os;
    os << "d^n = " << dim << " exceeds the 4096 size cap";
    throw ValidationError(os.str());
  }
  std::vector<std::size_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  const auto size = static_cast<Eigen::Index>(dim);
  ComplexMatrix sum = ComplexMatrix::Zero(size, size);
  do {
    sum += permutation_operator(d, sigma);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  double norm = 1.0;
  for (std::size_t k = 0; k < n; ++k) norm *= static_cast<double>(d + k);
  return sum / norm;
}

namespace {

double checked_overlap(const ComplexMatrix& e, const ComplexMatrix& rho, std::size_t d, std::size_t d_anc) {
  const auto n = static_cast<Eigen::Index>(d * d_anc);
  if (e.rows() != n || e.cols() != n || rho.rows() != n || rho.cols() != n) {
    throw ValidationError("E and rho must both be (d*d_anc) square");
  }
  const double overlap = (e * rho).trace().real();
  if (!(std::abs(overlap) > 1e-14)) throw DomainError("tr(E rho) = 0: ratio undefined");
  return overlap;
}

}  // namespace

double f_ratio(const ComplexMatrix& e, const ComplexMatrix& rho, std::size_t d, std::size_t d_anc) {
  const double overlap = checked_overlap(e, rho, d, d_anc);
  const ComplexMatrix es = partial_trace_system(e, d, d_anc);
  const ComplexMatrix rs = partial_trace_system(rho, d, d_anc);
  return (es * rs).trace().real() / overlap;
}

double x_statistic(const ComplexMatrix& e, const ComplexMatrix& rho, const StateVector& psi, double s,
                   std::size_t d, std::size_t d_anc) {
  if (psi.dim() != d) throw ValidationError("psi must live on the system factor");
  const double overlap = checked_overlap(e, rho, d, d_anc);
  const auto ds = static_cast<Eigen::Index>(d);
  const auto da = static_cast<Eigen::Index>(d_anc);
  const ComplexVector& v = psi.amplitudes();
  const ComplexMatrix u_psi = ComplexMatrix::Identity(ds, ds) + (std::polar(1.0, s) - 1.0) * (v * v.adjoint());
  const ComplexMatrix w = tensor(u_psi, ComplexMatrix::Identity(da, da));
  const double rotated = (e * w * rho * w.adjoint()).trace().real();
  return rotated / overlap - 1.0;
}

double x_first_moment_bound(double s, std::size_t d) {
  return -s * s / static_cast<double>(d);
}

double x_second_moment_bound(double s, double f, std::size_t d, int s_power) {
  const double dd = static_cast<double>(d);
  return 6.0 * s * s * (f + 1.0) / (dd * dd) +
         72.0 * std::pow(s, s_power) * (f * f + 1.0) / (dd * dd * dd * dd);
}

}  // namespace ucert
