// ucert: command-line driver for the certification experiments.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ucert/error.hpp"
#include "ucert/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::size_t> d;
  std::optional<double> epsilon;
  std::optional<std::size_t> channels;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  std::optional<std::string> kind;
  std::optional<std::string> algorithm;
  std::optional<std::string> method;
  std::optional<std::uint64_t> queries;
  std::optional<double> n;
  std::optional<double> target;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--d", f.d, "dimension");
  sub->add_option("--epsilon", f.epsilon, "diamond distance epsilon");
  sub->add_option("--channels", f.channels, "number of channels or samples");
  sub->add_option("--seed", f.seed, "master seed (default: $UCERT_SEED, else built-in)");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--workers", f.workers, "worker threads (0 = all cores)");
}

// Precedence: flags > config file > UCERT_SEED > defaults.
ucert::ExperimentConfig resolve(ucert::ExperimentKind kind, const Flags& f) {
  ucert::ExperimentConfig cfg;
  if (const char* env = std::getenv("UCERT_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ucert::ValidationError(std::string("UCERT_SEED is not an unsigned integer: ") + env);
    }
  }
  if (!f.config.empty()) cfg = ucert::load_config_file(f.config, cfg);
  cfg.experiment = kind;
  if (f.d) cfg.d = *f.d;
  if (f.epsilon) cfg.epsilon = *f.epsilon;
  if (f.channels) cfg.channels = *f.channels;
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output_dir = *f.out;
  if (f.workers) cfg.workers = *f.workers;
  if (f.kind) cfg.channel_kind = *f.kind;
  if (f.algorithm) cfg.algorithm = *f.algorithm;
  if (f.queries) cfg.queries = *f.queries;
  if (f.n) cfg.bound_n = *f.n;
  if (f.target) cfg.target = *f.target;
  if (f.method) {
    ucert::SamplerConfig s = cfg.sampler.value_or(ucert::SamplerConfig::defaults_for(cfg.d));
    s.method = ucert::sampler_method_from_string(*f.method);
    cfg.sampler = s;
  }
  cfg.validate();
  return cfg;
}

int fig5_command(const ucert::ExperimentConfig& cfg) {
  const auto r = ucert::run_fig5(cfg);
  std::vector<double> n_star;
  for (const auto& c : r.channels) n_star.push_back(static_cast<double>(c.n_star));
  std::sort(n_star.begin(), n_star.end());
  const std::size_t m = n_star.size();
  const double median = m % 2 == 1 ? n_star[m / 2] : 0.5 * (n_star[m / 2 - 1] + n_star[m / 2]);
  std::cout << "curves  " << r.curves_path.string() << "\n"
            << "summary " << r.summary_path.string() << "\n"
            << "median N* " << median << " over " << m << " channels\n";
  return 0;
}

int bounds_command(const ucert::ExperimentConfig& cfg, bool write_file) {
  const auto j = ucert::bound_report_json(ucert::compute_bounds(cfg));
  std::cout << j.dump(2) << "\n";
  if (write_file) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto path = cfg.output_dir / "bounds.json";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ucert::IoError("cannot open for writing", path);
    os << j.dump(2) << "\n";
    if (!os) throw ucert::IoError("write failed", path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo and closed-form tools for unitary channel certification", "ucert"};
  app.require_subcommand(1);
  Flags f;

  auto* fig5 = app.add_subcommand("fig5", "error curves of epsilon-CUE channels under the incoherent test");
  fig5->alias("fig5_curves");
  add_common(fig5, f);
  fig5->add_option("--method", f.method, "eigenangle sampler: exact_d3 | rejection | mcmc");
  fig5->add_option("--target", f.target, "error target defining N*");

  auto* certify = app.add_subcommand("certify", "simulate certification runs on sampled channels");
  add_common(certify, f);
  certify->add_option("--kind", f.kind, "channel kind: eps_cue | single_basis | eps_uniform");
  certify->add_option("--algorithm", f.algorithm, "incoherent | coherent | hadamard");
  certify->add_option("--queries", f.queries, "query budget (default depends on the algorithm)");
  certify->add_option("--method", f.method, "eigenangle sampler: exact_d3 | rejection | mcmc");

  auto* sample = app.add_subcommand("sample", "dump eigenangle samples as CSV");
  add_common(sample, f);
  sample->add_option("--kind", f.kind, "ensemble: eps_cue | eps_uniform");
  sample->add_option("--method", f.method, "eigenangle sampler: exact_d3 | rejection | mcmc");

  auto* bounds = app.add_subcommand("bounds", "evaluate the incoherent TVD bound as JSON");
  add_common(bounds, f);
  bounds->add_option("--N", f.n, "query count (default floor(1e-8 d / s^2))");

  auto* qsvt = app.add_subcommand("qsvt", "solve and export the coherent test's phase factors");
  qsvt->alias("qsvt_demo");
  add_common(qsvt, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fig5->parsed()) return fig5_command(resolve(ucert::ExperimentKind::fig5_curves, f));
    if (bounds->parsed()) return bounds_command(resolve(ucert::ExperimentKind::bounds, f), f.out.has_value());
    if (certify->parsed()) {
      std::cout << ucert::run_certify(resolve(ucert::ExperimentKind::certify, f)).string() << "\n";
      return 0;
    }
    if (sample->parsed()) {
      std::cout << ucert::run_sample(resolve(ucert::ExperimentKind::sample, f)).string() << "\n";
      return 0;
    }
    if (qsvt->parsed()) {
      std::cout << ucert::run_qsvt_demo(resolve(ucert::ExperimentKind::qsvt_demo, f)).string() << "\n";
      return 0;
    }
  } catch (const ucert::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ucert::DiagnosticError& e) {
    std::cerr << "sampler diagnostic failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
