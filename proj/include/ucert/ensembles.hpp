#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ucert/linalg.hpp"

namespace ucert {

/// Every sampler takes an explicit stream; no hidden global state.
using Rng = std::mt19937_64;

/// splitmix64 mix of (master, index); used to derive one stream per channel or trial.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Diamond distance epsilon and the eigenangle arc s = 2 asin(eps/2) it implies.
struct PerturbationParams {
  double epsilon = 0.0;
  double s = 0.0;

  static PerturbationParams from_epsilon(double epsilon);
};

enum class SamplerMethod { exact_d3, rejection, mcmc };

const char* to_string(SamplerMethod m);
SamplerMethod sampler_method_from_string(const std::string& name);

/// Sampler settings. Unset MCMC fields resolve to d- and s-dependent defaults:
/// burn_in = 5000 d, thinning = 50 d, step_scale = s / 8.
struct SamplerConfig {
  SamplerMethod method = SamplerMethod::mcmc;
  std::optional<std::size_t> mcmc_burn_in;
  std::optional<std::size_t> mcmc_thinning;
  std::optional<double> mcmc_step_scale;
  std::size_t chains = 4;
  std::uint64_t seed = 0;
  std::size_t rejection_max_d = 5;
  double r_hat_threshold = 1.05;

  /// exact_d3 at d = 3, rejection at d = 4, mcmc otherwise.
  static SamplerConfig defaults_for(std::size_t d);
  void validate() const;
};

StateVector haar_state(std::size_t d, Rng& rng);

/// Ginibre matrix, Householder QR, then Q * diag(R_kk / |R_kk|).
UnitaryMatrix haar_unitary(std::size_t d, Rng& rng);

/// U_psi = I + (e^{is} - 1)|psi><psi|.
UnitaryMatrix single_basis_rotation(std::size_t d, const PerturbationParams& eps,
                                    const StateVector& psi);

/// Sum over pairs of 2 ln|e^{i a_k} - e^{i a_l}|; -inf when two angles coincide.
/// Throws DomainError if any angle lies outside [-s/2, s/2].
double log_weight(std::span<const double> angles, double s);

/// Sum of squared deviations from the mean angle.
double centered_sum_squares(std::span<const double> angles);

/// Gelman-Rubin potential scale reduction over equal-length chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

/// Draws eigenangles from the epsilon-CUE: min = -s/2 and max = s/2 exactly,
/// interior angles with density proportional to prod |e^{i a_k} - e^{i a_l}|^2.
class EpsCueSampler {
 public:
  EpsCueSampler(std::size_t d, PerturbationParams eps, SamplerConfig cfg);

  std::size_t dim() const noexcept { return d_; }
  const PerturbationParams& perturbation() const noexcept { return eps_; }
  std::size_t burn_in() const noexcept { return burn_in_; }
  std::size_t thinning() const noexcept { return thinning_; }
  double step_scale() const noexcept { return step_scale_; }

  /// One independent draw. For mcmc this runs fresh chains and checks R-hat.
  EigenangleSet sample(Rng& rng) const;

  /// `count` draws. For mcmc the chains are run once and thinned; draws are
  /// taken round-robin across chains. Other methods draw independently.
  std::vector<EigenangleSet> sample_batch(std::size_t count, Rng& rng) const;

  /// Last R-hat computed by an mcmc call on this thread (NaN before any).
  static double last_r_hat();

  /// Fraction of accepted proposals in the last mcmc call on this thread.
  static double last_acceptance();

 private:
  std::vector<double> interior_exact_d3(Rng& rng) const;
  std::vector<double> interior_rejection(Rng& rng) const;
  std::vector<std::vector<double>> interior_mcmc(std::size_t count, Rng& rng) const;
  EigenangleSet assemble(std::vector<double> interior, Rng& rng) const;

  std::size_t d_;
  PerturbationParams eps_;
  SamplerConfig cfg_;
  std::size_t burn_in_ = 0;
  std::size_t thinning_ = 1;
  double step_scale_ = 0.0;
  std::vector<double> cdf_grid_;  // exact_d3 only
  std::vector<double> cdf_values_;
};

EigenangleSet eps_cue_eigenangles(std::size_t d, const PerturbationParams& eps,
                                  const SamplerConfig& cfg, Rng& rng);

/// V diag(e^{i theta}) V^dagger with theta ~ epsilon-CUE and V ~ Haar.
UnitaryMatrix eps_cue_unitary(std::size_t d, const PerturbationParams& eps,
                              const SamplerConfig& cfg, Rng& rng);

/// Two random positions hold -s/2 and s/2; the rest are iid uniform on [-s/2, s/2].
EigenangleSet eps_uniform_eigenangles(std::size_t d, const PerturbationParams& eps, Rng& rng);

}  // namespace ucert
