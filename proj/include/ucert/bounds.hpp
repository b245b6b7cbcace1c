#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "ucert/linalg.hpp"

namespace ucert {

/// Constants of the incoherent lower-bound argument. alpha only enters the
/// hypotheses, never the F formulas.
struct BoundParams {
  double alpha = 0.0;  // 0 means "100 d"
  double beta = 0.1;
  double gamma = 0.0003;
  double eta = 0.3;

  double alpha_for(std::size_t d) const { return alpha > 0.0 ? alpha : 100.0 * static_cast<double>(d); }
};

struct BoundReport {
  double s = 0.0;
  std::size_t d = 0;
  double n = 0.0;
  double g = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double f4 = 0.0;
  double tvd_upper = 0.0;
  bool feasible = false;  // tvd_upper < 1/3
};

inline constexpr double kGLinear = 606.0;
inline constexpr double kGQuadratic = 720072.0;

/// 2 asin(eps / 2).
double s_of_eps(double epsilon);

struct GBound {
  double value = 0.0;
  bool valid = true;  // derived under s < 1
};

/// 606 s^2 N / d + 720072 s^4 N^2 / d^2.
GBound g_bound(double s, std::size_t d, double n);

/// F1..F4 and their sum. Throws ValidationError when beta <= 4 s^2 / d.
BoundReport tvd_upper(double s, std::size_t d, double n, const BoundParams& params = {});

struct Threshold {
  std::uint64_t n = 0;
  bool hypotheses_hold = true;
  std::string note;
};

/// floor(1e-8 d / s^2); flags eps outside (0, 1/2) or d <= 50 eps^2.
Threshold incoherent_threshold(std::size_t d, double epsilon);

struct CoherentBounds {
  double trace_bound = 0.0;  // min(2, 3 s N / sqrt(d))
  std::uint64_t threshold = 0;  // floor(sqrt(d) / (6 s))
};

CoherentBounds coherent_bounds(double s, std::size_t d, double n);

struct AverageCaseConstants {
  double first_term = 0.0;   // exp(-(d-2)/18)
  double second_term = 0.0;  // 2 exp(-d^2 / (50 (d-2)))
  double fraction_bound = 0.0;
  bool vacuous = false;      // fraction_bound >= 1
  double n_sufficient = 0.0;      // 217 e^24 ln 3 / s^2
  bool hypotheses_hold = true;
  std::string note;
};

AverageCaseConstants average_case_constants(std::size_t d, double epsilon);

/// 8 d delta / eps^2, clamped to [0, 1].
double sdelta_tail_bound(std::size_t d, double epsilon, double delta);

/// (1 / (d (d+1) ... (d+n-1))) * sum over permutations of the n tensor factors.
ComplexMatrix haar_moment_operator(std::size_t d, std::size_t n);

/// Permutation operator F_sigma on (C^d)^{(x) n}: maps |i_1..i_n> to the
/// basis state whose factor sigma[k] holds i_k.
ComplexMatrix permutation_operator(std::size_t d, std::span<const std::size_t> sigma);

/// tr(tr_S(E) tr_S(rho)) / tr(E rho).
double f_ratio(const ComplexMatrix& e, const ComplexMatrix& rho, std::size_t d, std::size_t d_anc);

/// tr(E (U_psi (x) I) rho (U_psi (x) I)^dagger) / tr(E rho) - 1 with
/// U_psi = I + (e^{is} - 1)|psi><psi| acting on the system factor.
double x_statistic(const ComplexMatrix& e, const ComplexMatrix& rho, const StateVector& psi, double s,
                   std::size_t d, std::size_t d_anc);

/// Right-hand sides of the first- and second-moment inequalities for X.
double x_first_moment_bound(double s, std::size_t d);
double x_second_moment_bound(double s, double f, std::size_t d, int s_power = 4);

}  // namespace ucert
