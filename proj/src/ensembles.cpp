#include "ucert/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ucert/error.hpp"

namespace ucert {

namespace {

thread_local double t_last_r_hat = std::numeric_limits<double>::quiet_NaN();
thread_local double t_last_acceptance = std::numeric_limits<double>::quiet_NaN();

constexpr std::size_t kCdfGridPoints = 100000;
constexpr std::size_t kMaxRejectionProposals = 200'000'000;

// Folds y into [lo, hi] by repeated reflection at the boundaries.
double reflect_into(double y, double lo, double hi) {
  const double width = hi - lo;
  if (width <= 0.0) return lo;
  double t = std::fmod(y - lo, 2.0 * width);
  if (t < 0.0) t += 2.0 * width;
  if (t > width) t = 2.0 * width - t;
  return lo + t;
}

// |e^{ia} - e^{ib}|^2 without cancellation for nearby angles.
double chord_sq(double a, double b) {
  const double h = std::sin(0.5 * (a - b));
  return 4.0 * h * h;
}

double d3_density(double theta, double s) {
  return chord_sq(theta, 0.5 * s) * chord_sq(theta, -0.5 * s);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

PerturbationParams PerturbationParams::from_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 2.0)) {
    std::ostringstream os;
    os << "epsilon must lie in [0, 2), got " << epsilon;
    throw ValidationError(os.str());
  }
  return {epsilon, 2.0 * std::asin(0.5 * epsilon)};
}

const char* to_string(SamplerMethod m) {
  switch (m) {
    case SamplerMethod::exact_d3: return "exact_d3";
    case SamplerMethod::rejection: return "rejection";
    case SamplerMethod::mcmc: return "mcmc";
  }
  return "unknown";
}

SamplerMethod sampler_method_from_string(const std::string& name) {
  if (name == "exact_d3") return SamplerMethod::exact_d3;
  if (name == "rejection") return SamplerMethod::rejection;
  if (name == "mcmc") return SamplerMethod::mcmc;
  throw ValidationError("unknown sampler method '" + name + "'");
}

SamplerConfig SamplerConfig::defaults_for(std::size_t d) {
  SamplerConfig cfg;
  if (d == 3) cfg.method = SamplerMethod::exact_d3;
  else if (d == 4) cfg.method = SamplerMethod::rejection;
  else cfg.method = SamplerMethod::mcmc;
  return cfg;
}

void SamplerConfig::validate() const {
  if (mcmc_thinning && *mcmc_thinning < 1) throw ValidationError("mcmc_thinning must be >= 1");
  if (chains < 1) throw ValidationError("chains must be >= 1");
  if (mcmc_step_scale && !(*mcmc_step_scale > 0.0)) throw ValidationError("mcmc_step_scale must be > 0");
}

StateVector haar_state(std::size_t d, Rng& rng) {
  if (d == 0) throw ValidationError("haar_state needs d >= 1");
  std::normal_distribution<double> normal;
  ComplexVector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = Complex(normal(rng), normal(rng));
  v /= v.norm();
  return StateVector(std::move(v));
}

UnitaryMatrix haar_unitary(std::size_t d, Rng& rng) {
  if (d == 0) throw ValidationError("haar_unitary needs d >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  std::normal_distribution<double> normal;
  ComplexMatrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex rkk = r(k, k);
    const double mag = std::abs(rkk);
    q.col(k) *= mag > 0.0 ? rkk / mag : Complex(1.0);
  }
  return UnitaryMatrix(std::move(q));
}

UnitaryMatrix single_basis_rotation(std::size_t d, const PerturbationParams& eps,
                                    const StateVector& psi) {
  if (psi.dim() != d) {
    std::ostringstream os;
    os << "state dimension " << psi.dim() << " does not match d = " << d;
    throw ValidationError(os.str());
  }
  const auto n = static_cast<Eigen::Index>(d);
  const Complex phase = std::polar(1.0, eps.s) - 1.0;
  const ComplexVector& v = psi.amplitudes();
  ComplexMatrix u = ComplexMatrix::Identity(n, n) + phase * (v * v.adjoint());
  return UnitaryMatrix(std::move(u));
}

double log_weight(std::span<const double> angles, double s) {
  const double half = 0.5 * s;
  for (double a : angles) {
    if (!(a >= -half && a <= half)) {
      std::ostringstream os;
      os << "angle " << a << " outside [-s/2, s/2] with s = " << s;
      throw DomainError(os.str());
    }
  }
  // Fixed summation order makes the result exactly permutation invariant.
  std::vector<double> a(angles.begin(), angles.end());
  std::sort(a.begin(), a.end());
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t l = k + 1; l < a.size(); ++l) {
      const double c = chord_sq(a[k], a[l]);
      if (c == 0.0) return -std::numeric_limits<double>::infinity();
      total += std::log(c);
    }
  }
  return total;
}

double centered_sum_squares(std::span<const double> angles) {
  if (angles.empty()) return 0.0;
  const double mean = std::accumulate(angles.begin(), angles.end(), 0.0) /
                      static_cast<double>(angles.size());
  double acc = 0.0;
  for (double a : angles) acc += (a - mean) * (a - mean);
  return acc;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) return 1.0;
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& c = chains[j];
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += c[i];
    mu /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (c[i] - mu) * (c[i] - mu);
    means[j] = mu;
    vars[j] = v / static_cast<double>(n - 1);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / static_cast<double>(m - 1);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  if (w <= 0.0) return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  const double var_hat = (nn - 1.0) / nn * w + b / nn;
  return std::sqrt(var_hat / w);
}

EpsCueSampler::EpsCueSampler(std::size_t d, PerturbationParams eps, SamplerConfig cfg)
    : d_(d), eps_(eps), cfg_(cfg) {
  if (d < 2) throw ValidationError("epsilon-CUE sampling needs d >= 2");
  if (!(eps.epsilon > 0.0)) throw ValidationError("epsilon-CUE sampling needs epsilon > 0");
  cfg_.validate();
  burn_in_ = cfg_.mcmc_burn_in.value_or(5000 * d);
  thinning_ = cfg_.mcmc_thinning.value_or(50 * d);
  step_scale_ = cfg_.mcmc_step_scale.value_or(eps.s / 8.0);

  if (cfg_.method == SamplerMethod::exact_d3) {
    if (d != 3) {
      std::ostringstream os;
      os << "exact_d3 sampler requires d = 3, got d = " << d;
      throw ValidationError(os.str());
    }
    const double half = 0.5 * eps.s;
    cdf_grid_.resize(kCdfGridPoints + 1);
    cdf_values_.resize(kCdfGridPoints + 1);
    const double h = eps.s / static_cast<double>(kCdfGridPoints);
    double prev = d3_density(-half, eps.s);
    cdf_grid_[0] = -half;
    cdf_values_[0] = 0.0;
    for (std::size_t i = 1; i <= kCdfGridPoints; ++i) {
      const double x = -half + h * static_cast<double>(i);
      const double f = d3_density(x, eps.s);
      cdf_grid_[i] = x;
      cdf_values_[i] = cdf_values_[i - 1] + 0.5 * h * (prev + f);
      prev = f;
    }
    const double total = cdf_values_.back();
    for (double& c : cdf_values_) c /= total;
    cdf_grid_.back() = half;
  } else if (cfg_.method == SamplerMethod::rejection && d > cfg_.rejection_max_d) {
    std::ostringstream os;
    os << "rejection sampler limited to d <= " << cfg_.rejection_max_d << ", got d = " << d;
    throw ValidationError(os.str());
  }
}

double EpsCueSampler::last_r_hat() { return t_last_r_hat; }
double EpsCueSampler::last_acceptance() { return t_last_acceptance; }

std::vector<double> EpsCueSampler::interior_exact_d3(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const auto it = std::upper_bound(cdf_values_.begin(), cdf_values_.end(), u);
  const std::size_t hi = std::min<std::size_t>(
      static_cast<std::size_t>(std::distance(cdf_values_.begin(), it)), cdf_values_.size() - 1);
  const std::size_t lo = hi == 0 ? 0 : hi - 1;
  const double span = cdf_values_[hi] - cdf_values_[lo];
  const double t = span > 0.0 ? (u - cdf_values_[lo]) / span : 0.0;
  return {cdf_grid_[lo] + t * (cdf_grid_[hi] - cdf_grid_[lo])};
}

std::vector<double> EpsCueSampler::interior_rejection(Rng& rng) const {
  const double half = 0.5 * eps_.s;
  const std::size_t m = d_ - 2;
  std::uniform_real_distribution<double> angle(-half, half);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Chords within the arc are at most 2 sin(s/2); an interior angle's squared
  // chords to the two endpoints multiply to at most (2 sin(s/4))^4, reached at 0.
  const double mm = static_cast<double>(m);
  const double log_bound = (2.0 + mm * (mm - 1.0)) * std::log(2.0 * std::sin(half)) +
                           4.0 * mm * std::log(2.0 * std::sin(0.5 * half));
  std::vector<double> all(d_);
  all[0] = -half;
  all[1] = half;
  for (std::size_t tries = 0; tries < kMaxRejectionProposals; ++tries) {
    for (std::size_t k = 0; k < m; ++k) all[2 + k] = angle(rng);
    const double lw = log_weight(all, eps_.s);
    if (std::log(unif(rng)) < lw - log_bound) return {all.begin() + 2, all.end()};
  }
  throw ConvergenceError("rejection sampler exhausted its proposal budget", 0.0);
}

std::vector<std::vector<double>> EpsCueSampler::interior_mcmc(std::size_t count, Rng& rng) const {
  const std::size_t m = d_ - 2;
  const double half = 0.5 * eps_.s;
  const std::size_t n_chains = cfg_.chains;
  std::uniform_real_distribution<double> angle(-half, half);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::normal_distribution<double> normal;

  struct Chain {
    std::vector<double> theta;
    std::vector<Complex> z;
    std::vector<double> trace;  // centered sum of squares, for R-hat
  };
  const Complex z_lo = std::polar(1.0, -half);
  const Complex z_hi = std::polar(1.0, half);

  std::size_t accepted = 0;
  std::size_t proposed = 0;

  // Sum over partners of ln(|z_new - z_l|^2 / |z_old - z_l|^2), chunked to stay in range.
  auto log_ratio = [&](const Chain& c, std::size_t j, Complex z_new) {
    const Complex z_old = c.z[j];
    double total = 0.0;
    double prod = std::norm(z_new - z_lo) / std::norm(z_old - z_lo) *
                  (std::norm(z_new - z_hi) / std::norm(z_old - z_hi));
    int in_chunk = 2;
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      prod *= std::norm(z_new - c.z[l]) / std::norm(z_old - c.z[l]);
      if (++in_chunk == 16) {
        total += std::log(prod);
        prod = 1.0;
        in_chunk = 0;
      }
    }
    return total + std::log(prod);
  };

  auto step = [&](Chain& c) {
    const std::size_t j = pick(rng);
    const double proposal = reflect_into(c.theta[j] + step_scale_ * normal(rng), -half, half);
    const Complex z_new = std::polar(1.0, proposal);
    const double lr = log_ratio(c, j, z_new);
    ++proposed;
    if (lr >= 0.0 || std::log(unif(rng)) < lr) {
      c.theta[j] = proposal;
      c.z[j] = z_new;
      ++accepted;
    }
  };

  auto statistic = [&](const Chain& c) {
    std::vector<double> all(c.theta);
    all.push_back(-half);
    all.push_back(half);
    return centered_sum_squares(all);
  };

  std::vector<Chain> chains(n_chains);
  for (auto& c : chains) {
    c.theta.resize(m);
    c.z.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      c.theta[k] = angle(rng);
      c.z[k] = std::polar(1.0, c.theta[k]);
    }
  }

  const std::size_t record_every =
      std::max<std::size_t>(1, std::min(thinning_, burn_in_ / 40 == 0 ? 1 : burn_in_ / 40));
  for (auto& c : chains) {
    for (std::size_t t = 1; t <= burn_in_; ++t) {
      step(c);
      if (2 * t > burn_in_ && t % record_every == 0) c.trace.push_back(statistic(c));
    }
  }

  std::vector<std::vector<double>> out;
  out.reserve(count);
  if (count == 1) {
    std::uniform_int_distribution<std::size_t> which(0, n_chains - 1);
    out.push_back(chains[which(rng)].theta);
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      Chain& c = chains[k % n_chains];
      for (std::size_t t = 0; t < thinning_; ++t) step(c);
      c.trace.push_back(statistic(c));
      out.push_back(c.theta);
    }
  }

  std::vector<std::vector<double>> traces;
  for (auto& c : chains) traces.push_back(std::move(c.trace));
  const double r_hat = gelman_rubin(traces);
  t_last_r_hat = r_hat;
  t_last_acceptance = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 1.0;
  if (n_chains > 1 && !(r_hat < cfg_.r_hat_threshold)) {
    std::ostringstream os;
    os << "MCMC convergence gate failed: R-hat = " << r_hat << " >= " << cfg_.r_hat_threshold
       << " (d = " << d_ << ", s = " << eps_.s << ")";
    throw DiagnosticError(os.str(), r_hat);
  }
  return out;
}

EigenangleSet EpsCueSampler::assemble(std::vector<double> interior, Rng& rng) const {
  std::shuffle(interior.begin(), interior.end(), rng);
  std::uniform_int_distribution<std::size_t> first(0, d_ - 1);
  std::uniform_int_distribution<std::size_t> second(0, d_ - 2);
  const std::size_t lo_pos = first(rng);
  std::size_t hi_pos = second(rng);
  if (hi_pos >= lo_pos) ++hi_pos;
  std::vector<double> angles(d_);
  std::size_t next = 0;
  for (std::size_t k = 0; k < d_; ++k) {
    if (k == lo_pos) angles[k] = -0.5 * eps_.s;
    else if (k == hi_pos) angles[k] = 0.5 * eps_.s;
    else angles[k] = interior[next++];
  }
  return EigenangleSet(std::move(angles));
}

EigenangleSet EpsCueSampler::sample(Rng& rng) const {
  if (d_ == 2) return assemble({}, rng);
  switch (cfg_.method) {
    case SamplerMethod::exact_d3: return assemble(interior_exact_d3(rng), rng);
    case SamplerMethod::rejection: return assemble(interior_rejection(rng), rng);
    case SamplerMethod::mcmc: return assemble(std::move(interior_mcmc(1, rng).front()), rng);
  }
  throw ValidationError("unknown sampler method");
}

std::vector<EigenangleSet> EpsCueSampler::sample_batch(std::size_t count, Rng& rng) const {
  std::vector<EigenangleSet> out;
  out.reserve(count);
  if (count == 0) return out;
  if (d_ > 2 && cfg_.method == SamplerMethod::mcmc) {
    for (auto& interior : interior_mcmc(count, rng)) out.push_back(assemble(std::move(interior), rng));
    return out;
  }
  for (std::size_t k = 0; k < count; ++k) out.push_back(sample(rng));
  return out;
}

EigenangleSet eps_cue_eigenangles(std::size_t d, const PerturbationParams& eps,
                                  const SamplerConfig& cfg, Rng& rng) {
  return EpsCueSampler(d, eps, cfg).sample(rng);
}

UnitaryMatrix eps_cue_unitary(std::size_t d, const PerturbationParams& eps,
                              const SamplerConfig& cfg, Rng& rng) {
  const EigenangleSet angles = eps_cue_eigenangles(d, eps, cfg, rng);
  const UnitaryMatrix basis = haar_unitary(d, rng);
  return unitary_from_spectrum(angles, basis);
}

EigenangleSet eps_uniform_eigenangles(std::size_t d, const PerturbationParams& eps, Rng& rng) {
  if (d < 2) throw ValidationError("epsilon-uniform sampling needs d >= 2");
  const double half = 0.5 * eps.s;
  std::uniform_real_distribution<double> angle(-half, half);
  std::uniform_int_distribution<std::size_t> first(0, d - 1);
  std::uniform_int_distribution<std::size_t> second(0, d - 2);
  const std::size_t lo_pos = first(rng);
  std::size_t hi_pos = second(rng);
  if (hi_pos >= lo_pos) ++hi_pos;
  std::vector<double> angles(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (k == lo_pos) angles[k] = -half;
    else if (k == hi_pos) angles[k] = half;
    else angles[k] = angle(rng);
  }
  return EigenangleSet(std::move(angles));
}

}  // namespace ucert
