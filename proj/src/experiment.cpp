#include "ucert/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ucert/error.hpp"

namespace ucert {

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fig5_curves: return "fig5_curves";
    case ExperimentKind::certify: return "certify";
    case ExperimentKind::sample: return "sample";
    case ExperimentKind::bounds: return "bounds";
    case ExperimentKind::qsvt_demo: return "qsvt_demo";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "fig5_curves" || name == "fig5") return ExperimentKind::fig5_curves;
  if (name == "certify") return ExperimentKind::certify;
  if (name == "sample") return ExperimentKind::sample;
  if (name == "bounds") return ExperimentKind::bounds;
  if (name == "qsvt_demo" || name == "qsvt") return ExperimentKind::qsvt_demo;
  throw ValidationError("unknown experiment '" + name + "'");
}

void NGrid::validate() const {
  if (!(start >= 1.0)) throw ValidationError("N grid start must be >= 1");
  if (!(stop >= start)) throw ValidationError("N grid stop must be >= start");
  if (points < 2) throw ValidationError("N grid needs at least 2 points");
}

std::vector<std::uint64_t> NGrid::values() const {
  validate();
  std::vector<std::uint64_t> out;
  out.reserve(points);
  const double ratio = std::log(stop / start) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    const auto n = static_cast<std::uint64_t>(std::llround(start * std::exp(ratio * static_cast<double>(k))));
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

SamplerConfig ExperimentConfig::resolved_sampler() const {
  SamplerConfig s = sampler.value_or(SamplerConfig::defaults_for(d));
  s.seed = seed;
  return s;
}

void ExperimentConfig::validate() const {
  if (d < 1) throw ValidationError("d must be >= 1");
  if (channels < 1) throw ValidationError("channels must be >= 1");
  n_grid.validate();
  if (sampler) sampler->validate();
}

namespace {

void apply_json_fields(ExperimentConfig& cfg, const nlohmann::json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") cfg.experiment = experiment_kind_from_string(value.get<std::string>());
    else if (key == "d") cfg.d = value.get<std::size_t>();
    else if (key == "epsilon") cfg.epsilon = value.get<double>();
    else if (key == "channels") cfg.channels = value.get<std::size_t>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "output_dir") cfg.output_dir = value.get<std::string>();
    else if (key == "workers") cfg.workers = value.get<std::size_t>();
    else if (key == "channel_kind") cfg.channel_kind = value.get<std::string>();
    else if (key == "algorithm") cfg.algorithm = value.get<std::string>();
    else if (key == "queries") cfg.queries = value.get<std::uint64_t>();
    else if (key == "N") cfg.bound_n = value.get<double>();
    else if (key == "target") cfg.target = value.get<double>();
    else if (key == "N_grid") {
      cfg.n_grid.start = value.value("start", cfg.n_grid.start);
      cfg.n_grid.stop = value.value("stop", cfg.n_grid.stop);
      cfg.n_grid.points = value.value("points", cfg.n_grid.points);
    } else if (key == "bound_params") {
      cfg.bound_params.alpha = value.value("alpha", cfg.bound_params.alpha);
      cfg.bound_params.beta = value.value("beta", cfg.bound_params.beta);
      cfg.bound_params.gamma = value.value("gamma", cfg.bound_params.gamma);
      cfg.bound_params.eta = value.value("eta", cfg.bound_params.eta);
    } else if (key == "sampler") {
      SamplerConfig s = cfg.sampler.value_or(SamplerConfig::defaults_for(cfg.d));
      if (value.contains("method")) s.method = sampler_method_from_string(value["method"].get<std::string>());
      if (value.contains("mcmc_burn_in")) s.mcmc_burn_in = value["mcmc_burn_in"].get<std::size_t>();
      if (value.contains("mcmc_thinning")) s.mcmc_thinning = value["mcmc_thinning"].get<std::size_t>();
      if (value.contains("mcmc_step_scale")) s.mcmc_step_scale = value["mcmc_step_scale"].get<double>();
      if (value.contains("chains")) s.chains = value["chains"].get<std::size_t>();
      if (value.contains("r_hat_threshold")) s.r_hat_threshold = value["r_hat_threshold"].get<double>();
      cfg.sampler = s;
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
}

}  // namespace

void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  try {
    apply_json_fields(cfg, j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config", path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
  apply_json(base, j);
  return base;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

UnitaryMatrix sample_channel(const ExperimentConfig& cfg, std::size_t channel_index) {
  Rng rng(derive_seed(cfg.seed, channel_index));
  const PerturbationParams eps = PerturbationParams::from_epsilon(cfg.epsilon);
  if (cfg.channel_kind == "eps_cue") {
    try {
      return eps_cue_unitary(cfg.d, eps, cfg.resolved_sampler(), rng);
    } catch (const DiagnosticError& e) {
      std::ostringstream os;
      os << "channel " << channel_index << ": " << e.what();
      throw DiagnosticError(os.str(), e.r_hat());
    }
  }
  if (cfg.channel_kind == "single_basis") {
    const StateVector psi = haar_state(cfg.d, rng);
    return single_basis_rotation(cfg.d, eps, psi);
  }
  if (cfg.channel_kind == "eps_uniform") {
    const EigenangleSet angles = eps_uniform_eigenangles(cfg.d, eps, rng);
    return unitary_from_spectrum(angles, haar_unitary(cfg.d, rng));
  }
  throw ValidationError("unknown channel kind '" + cfg.channel_kind + "'");
}

std::vector<ChannelSummary> compute_fig5(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<std::uint64_t> grid = cfg.n_grid.values();
  std::vector<ChannelSummary> out(cfg.channels);
  parallel_for(cfg.channels, cfg.workers, [&](std::size_t i) {
    const UnitaryMatrix u = sample_channel(cfg, i);
    ChannelSummary& c = out[i];
    c.channel_index = i;
    c.curve = error_curve(u, grid, cfg.epsilon);
    c.n_star = c.curve.pass_prob < 1.0 ? queries_to_target(c.curve.pass_prob, cfg.target) : 0;
  });
  return out;
}

CsvTable curves_table(const std::vector<ChannelSummary>& channels, double epsilon) {
  CsvTable t;
  t.header = kCurvesHeader;
  for (const auto& c : channels) {
    for (const auto& p : c.curve.points) {
      t.rows.push_back({std::to_string(c.curve.d), format_double(epsilon), std::to_string(c.channel_index),
                        format_double(c.curve.trace_abs), format_double(c.curve.pass_prob),
                        std::to_string(p.n), format_double(p.p_error)});
    }
  }
  return t;
}

CsvTable summary_table(const std::vector<ChannelSummary>& channels, double epsilon) {
  CsvTable t;
  t.header = kSummaryHeader;
  for (const auto& c : channels) {
    t.rows.push_back({std::to_string(c.curve.d), format_double(epsilon), std::to_string(c.channel_index),
                      format_double(c.curve.trace_abs), std::to_string(c.n_star)});
  }
  return t;
}

CsvTable phases_table(std::span<const double> phases) {
  CsvTable t;
  t.header = kPhaseHeader;
  for (std::size_t i = 0; i < phases.size(); ++i) t.rows.push_back({std::to_string(i), format_double(phases[i])});
  return t;
}

CsvTable samples_table(const std::string& kind, std::size_t d, double epsilon, std::uint64_t seed,
                       const std::vector<EigenangleSet>& samples) {
  CsvTable t;
  t.header = kSampleHeader;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (double a : samples[i].angles()) {
      t.rows.push_back({kind, std::to_string(d), format_double(epsilon), std::to_string(seed), std::to_string(i),
                        format_double(a)});
    }
  }
  return t;
}

Fig5Result run_fig5(const ExperimentConfig& cfg) {
  Fig5Result r;
  r.channels = compute_fig5(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  r.curves_path = cfg.output_dir / ("curves_d" + std::to_string(cfg.d) + ".csv");
  r.summary_path = cfg.output_dir / ("summary_d" + std::to_string(cfg.d) + ".csv");
  write_csv(r.curves_path, curves_table(r.channels, cfg.epsilon));
  write_csv(r.summary_path, summary_table(r.channels, cfg.epsilon));
  return r;
}

std::vector<EigenangleSet> draw_samples(const ExperimentConfig& cfg) {
  cfg.validate();
  const PerturbationParams eps = PerturbationParams::from_epsilon(cfg.epsilon);
  Rng rng(derive_seed(cfg.seed, 0));
  if (cfg.channel_kind == "eps_cue") {
    return EpsCueSampler(cfg.d, eps, cfg.resolved_sampler()).sample_batch(cfg.channels, rng);
  }
  if (cfg.channel_kind == "eps_uniform") {
    std::vector<EigenangleSet> out;
    for (std::size_t i = 0; i < cfg.channels; ++i) out.push_back(eps_uniform_eigenangles(cfg.d, eps, rng));
    return out;
  }
  throw ValidationError("sample supports channel kinds eps_cue and eps_uniform, got '" + cfg.channel_kind + "'");
}

std::filesystem::path run_sample(const ExperimentConfig& cfg) {
  const auto samples = draw_samples(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / ("samples_" + cfg.channel_kind + "_d" + std::to_string(cfg.d) + ".csv");
  write_csv(path, samples_table(cfg.channel_kind, cfg.d, cfg.epsilon, cfg.seed, samples));
  return path;
}

std::vector<CertifyRecord> compute_certify(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.algorithm != "incoherent" && cfg.algorithm != "coherent" && cfg.algorithm != "hadamard") {
    throw ValidationError("unknown algorithm '" + cfg.algorithm + "'");
  }
  if (cfg.algorithm == "hadamard" && cfg.channel_kind != "single_basis") {
    throw ValidationError("the hadamard certifier needs the known basis of a single_basis channel");
  }
  QsvtPlan plan;
  if (cfg.algorithm == "coherent") plan = qsvt_params(cfg.d, cfg.epsilon);
  const PerturbationParams eps = PerturbationParams::from_epsilon(cfg.epsilon);

  std::vector<CertifyRecord> out(cfg.channels);
  parallel_for(cfg.channels, cfg.workers, [&](std::size_t i) {
    const UnitaryMatrix u = sample_channel(cfg, i);
    // Decisions draw from a stream disjoint from the channel's own.
    Rng rng(derive_seed(cfg.seed ^ 0x9e3779b97f4a7c15ull, i));
    CertifyRecord& r = out[i];
    r.channel_index = i;
    r.distance = diamond_distance_to_identity(u);
    if (cfg.algorithm == "incoherent") {
      const double p = per_query_pass_probability(u);
      std::uint64_t n = 1;
      if (cfg.queries) n = *cfg.queries;
      else if (p < 1.0) n = queries_to_target(p, cfg.target);
      r.decision = simulate_incoherent(u, n, rng);
    } else if (cfg.algorithm == "coherent") {
      r.decision = simulate_coherent(u, plan, rng);
    } else {
      // Regenerate the rotated basis state from the channel stream.
      Rng channel_rng(derive_seed(cfg.seed, i));
      const StateVector psi = haar_state(cfg.d, channel_rng);
      const std::uint64_t n =
          cfg.queries.value_or(static_cast<std::uint64_t>(std::ceil(200.0 / (eps.epsilon * eps.epsilon))));
      r.decision = hadamard_test_certify(u, psi, n, cfg.epsilon, rng);
    }
  });
  return out;
}

CsvTable certify_table(const ExperimentConfig& cfg, const std::vector<CertifyRecord>& records) {
  CsvTable t;
  t.header = kCertifyHeader;
  for (const auto& r : records) {
    t.rows.push_back({std::to_string(r.channel_index), cfg.channel_kind, cfg.algorithm, std::to_string(cfg.d),
                      format_double(cfg.epsilon), format_double(r.distance), to_string(r.decision.verdict),
                      std::to_string(r.decision.queries_used), format_double(r.decision.detail)});
  }
  return t;
}

std::filesystem::path run_certify(const ExperimentConfig& cfg) {
  const auto records = compute_certify(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / ("certify_" + cfg.algorithm + "_d" + std::to_string(cfg.d) + ".csv");
  write_csv(path, certify_table(cfg, records));
  return path;
}

BoundReport compute_bounds(const ExperimentConfig& cfg) {
  const double s = s_of_eps(cfg.epsilon);
  if (!(s > 0.0)) throw ValidationError("bounds need epsilon > 0");
  const double n = cfg.bound_n.value_or(std::floor(1e-8 * static_cast<double>(cfg.d) / (s * s)));
  return tvd_upper(s, cfg.d, n, cfg.bound_params);
}

QsvtPlan compute_qsvt_demo(const ExperimentConfig& cfg) { return with_phases(qsvt_params(cfg.d, cfg.epsilon)); }

std::filesystem::path run_qsvt_demo(const ExperimentConfig& cfg) {
  const QsvtPlan plan = compute_qsvt_demo(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = cfg.output_dir / ("phases_d" + std::to_string(cfg.d) + ".csv");
  write_csv(path, phases_table(plan.phases));
  return path;
}

nlohmann::ordered_json bound_report_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["s"] = r.s;
  j["d"] = r.d;
  j["N"] = r.n;
  j["g"] = r.g;
  j["F1"] = r.f1;
  j["F2"] = r.f2;
  j["F3"] = r.f3;
  j["F4"] = r.f4;
  j["tvd_upper"] = r.tvd_upper;
  j["feasible"] = r.feasible;
  return j;
}

}  // namespace ucert
