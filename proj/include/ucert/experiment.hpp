#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ucert/bounds.hpp"
#include "ucert/certify.hpp"
#include "ucert/csv.hpp"
#include "ucert/ensembles.hpp"
#include "ucert/qsvt.hpp"

namespace ucert {

enum class ExperimentKind { fig5_curves, certify, sample, bounds, qsvt_demo };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Geometric grid of query counts, rounded to integers with duplicates dropped.
struct NGrid {
  double start = 1e2;
  double stop = 1e7;
  std::size_t points = 60;

  std::vector<std::uint64_t> values() const;
  void validate() const;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::fig5_curves;
  std::size_t d = 4;
  double epsilon = 0.01;
  std::size_t channels = 200;
  NGrid n_grid;
  std::uint64_t seed = 20240601;
  std::optional<SamplerConfig> sampler;  // unset: SamplerConfig::defaults_for(d)
  std::filesystem::path output_dir = ".";
  std::size_t workers = 0;  // 0: hardware concurrency

  // certify / sample / bounds extras
  std::string channel_kind = "eps_cue";   // eps_cue | single_basis | eps_uniform
  std::string algorithm = "incoherent";   // incoherent | coherent | hadamard
  std::optional<std::uint64_t> queries;
  std::optional<double> bound_n;
  BoundParams bound_params;
  double target = 1.0 / 3.0;

  SamplerConfig resolved_sampler() const;
  void validate() const;
};

/// Overlays keys of a JSON object onto `cfg`. Unknown keys are rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

inline const std::vector<std::string> kCurvesHeader = {"d", "epsilon", "channel_index", "trace_abs",
                                                       "pass_prob", "N", "p_error"};
inline const std::vector<std::string> kSummaryHeader = {"d", "epsilon", "channel_index", "trace_abs",
                                                        "N_star"};
inline const std::vector<std::string> kSampleHeader = {"kind", "d", "epsilon", "seed", "index", "angle"};
inline const std::vector<std::string> kPhaseHeader = {"index", "phase_radians"};

struct ChannelSummary {
  std::size_t channel_index = 0;
  ErrorCurve curve;
  std::uint64_t n_star = 0;
};

struct Fig5Result {
  std::vector<ChannelSummary> channels;
  std::filesystem::path curves_path;
  std::filesystem::path summary_path;
};

/// Per-channel stream: derive_seed(master, channel_index).
UnitaryMatrix sample_channel(const ExperimentConfig& cfg, std::size_t channel_index);

/// Computes error curves for every channel (worker pool, deterministic
/// output order) without touching the filesystem.
std::vector<ChannelSummary> compute_fig5(const ExperimentConfig& cfg);

/// compute_fig5 plus curves_d{d}.csv and summary_d{d}.csv in output_dir.
Fig5Result run_fig5(const ExperimentConfig& cfg);

CsvTable curves_table(const std::vector<ChannelSummary>& channels, double epsilon);
CsvTable summary_table(const std::vector<ChannelSummary>& channels, double epsilon);
CsvTable phases_table(std::span<const double> phases);
CsvTable samples_table(const std::string& kind, std::size_t d, double epsilon, std::uint64_t seed,
                       const std::vector<EigenangleSet>& samples);

/// `channels` eigenangle draws from the configured ensemble (eps_cue or eps_uniform).
std::vector<EigenangleSet> draw_samples(const ExperimentConfig& cfg);
/// draw_samples written to samples_{kind}_d{d}.csv.
std::filesystem::path run_sample(const ExperimentConfig& cfg);

inline const std::vector<std::string> kCertifyHeader = {"channel_index", "kind", "algorithm", "d", "epsilon",
                                                        "distance", "verdict", "queries_used", "detail"};
struct CertifyRecord {
  std::size_t channel_index = 0;
  double distance = 0.0;
  Decision decision;
};
/// One certification run per channel. Incoherent runs use `queries` or, when
/// unset, the channel's own N*; Hadamard runs use `queries` or ceil(200/eps^2).
std::vector<CertifyRecord> compute_certify(const ExperimentConfig& cfg);
CsvTable certify_table(const ExperimentConfig& cfg, const std::vector<CertifyRecord>& records);
/// compute_certify written to certify_{algorithm}_d{d}.csv.
std::filesystem::path run_certify(const ExperimentConfig& cfg);

/// tvd_upper at N = bound_n, or floor(1e-8 d / s^2) when unset.
BoundReport compute_bounds(const ExperimentConfig& cfg);

/// Plan with solved phases for (d, epsilon).
QsvtPlan compute_qsvt_demo(const ExperimentConfig& cfg);
/// compute_qsvt_demo phases written to phases_d{d}.csv.
std::filesystem::path run_qsvt_demo(const ExperimentConfig& cfg);

/// JSON with keys s, d, N, g, F1, F2, F3, F4, tvd_upper, feasible.
nlohmann::ordered_json bound_report_json(const BoundReport& r);

/// Runs `fn(i)` for i in [0, count) on a pool of `workers` threads.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace ucert
