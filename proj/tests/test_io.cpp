#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ucert/error.hpp"
#include "ucert/experiment.hpp"

using namespace ucert;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ucert_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("double formatting roundtrips bit for bit") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double x = i % 3 == 0 ? std::ldexp(u(rng), -600) : u(rng);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(std::numeric_limits<double>::min())) == std::numeric_limits<double>::min());
}

TEST_CASE("csv write and read") {
  auto dir = scratch("csv");
  CsvTable empty;
  empty.header = kCurvesHeader;
  write_csv(dir / "empty.csv", empty);
  CHECK(slurp(dir / "empty.csv") == "d,epsilon,channel_index,trace_abs,pass_prob,N,p_error\n");
  auto back = read_csv(dir / "empty.csv");
  CHECK(back.header == kCurvesHeader);
  CHECK(back.rows.empty());

  CsvTable t;
  t.header = {"a", "b"};
  t.rows = {{"plain", "has,comma"}, {"has \"quote\"", "line\nbreak"}, {"", "x"}};
  write_csv(dir / "t.csv", t);
  const std::string text = slurp(dir / "t.csv");
  CHECK(text.find('\r') == std::string::npos);
  auto r = read_csv(dir / "t.csv");
  CHECK(r.header == t.header);
  CHECK(r.rows == t.rows);
  CHECK(r.column("b") == 1);
  CHECK_THROWS_AS(r.column("zzz"), ValidationError);

  CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), ValidationError);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), IoError);
  CHECK_THROWS_AS(write_csv(dir / "no" / "such" / "dir.csv", t), IoError);
  try {
    read_csv(dir / "missing.csv");
  } catch (const IoError& e) {
    CHECK(e.path() == dir / "missing.csv");
  }
}

TEST_CASE("N grid") {
  NGrid g;
  auto v = g.values();
  CHECK(v.front() == 100);
  CHECK(v.back() == 10000000);
  CHECK(v.size() == 60);
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);
  NGrid small{1, 3, 10};
  auto w = small.values();
  CHECK(w == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS((NGrid{0.5, 10, 5}.validate()), ValidationError);
  CHECK_THROWS_AS((NGrid{1, 10, 1}.validate()), ValidationError);
}

TEST_CASE("config parsing") {
  ExperimentConfig cfg;
  apply_json(cfg, nlohmann::json::parse(R"({"experiment":"fig5","d":32,"epsilon":0.02,"channels":7,
      "N_grid":{"start":10,"stop":1000,"points":5},"sampler":{"method":"mcmc","chains":3},
      "bound_params":{"beta":0.2}})"));
  CHECK(cfg.experiment == ExperimentKind::fig5_curves);
  CHECK(cfg.d == 32);
  CHECK(cfg.epsilon == 0.02);
  CHECK(cfg.channels == 7);
  CHECK(cfg.n_grid.points == 5);
  CHECK(cfg.sampler->chains == 3);
  CHECK(cfg.bound_params.beta == 0.2);
  CHECK(cfg.bound_params.gamma == 0.0003);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"dd":3})")), ValidationError);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"d":"three"})")), ValidationError);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse("[1,2]")), ValidationError);
  CHECK_THROWS_AS(experiment_kind_from_string("fig6"), ValidationError);
  CHECK(experiment_kind_from_string("qsvt") == ExperimentKind::qsvt_demo);

  auto dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"d": 6, "seed": 5})";
  ExperimentConfig base;
  base.channels = 3;
  auto loaded = load_config_file(dir / "c.json", base);
  CHECK(loaded.d == 6);
  CHECK(loaded.seed == 5);
  CHECK(loaded.channels == 3);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config_file(dir / "bad.json"), ValidationError);
  CHECK_THROWS_AS(load_config_file(dir / "none.json"), IoError);

  ExperimentConfig zero;
  zero.channels = 0;
  CHECK_THROWS_AS(zero.validate(), ValidationError);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 5) throw DomainError("boom");
                  }),
                  DomainError);
  parallel_for(0, 2, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("fig5 output files") {
  auto dir = scratch("fig5");
  ExperimentConfig cfg;
  cfg.d = 4;
  cfg.epsilon = 0.3;
  cfg.channels = 2;
  cfg.n_grid = {1, 100, 3};
  cfg.output_dir = dir;
  auto r = run_fig5(cfg);
  auto curves = read_csv(r.curves_path);
  CHECK(curves.header == kCurvesHeader);
  CHECK(curves.rows.size() == 6);
  const auto pp = curves.column("pass_prob"), nn = curves.column("N"), pe = curves.column("p_error");
  for (const auto& row : curves.rows) {
    const double p = std::stod(row[pp]);
    const double n = std::stod(row[nn]);
    CHECK(std::abs(std::stod(row[pe]) - std::pow(p, n)) <= 1e-12);
  }
  auto summary = read_csv(r.summary_path);
  CHECK(summary.header == kSummaryHeader);
  CHECK(summary.rows.size() == 2);

  // Byte-identical across runs, independent of the worker count.
  const std::string first = slurp(r.curves_path), first_summary = slurp(r.summary_path);
  cfg.workers = 1;
  run_fig5(cfg);
  CHECK(slurp(r.curves_path) == first);
  CHECK(slurp(r.summary_path) == first_summary);
}

TEST_CASE("fig5 N* recomputed from the dumped trace") {
  auto dir = scratch("fig5_d2");
  ExperimentConfig cfg;
  cfg.d = 2;
  cfg.epsilon = 0.4;
  cfg.channels = 1;
  cfg.output_dir = dir;
  auto r = run_fig5(cfg);
  auto summary = read_csv(r.summary_path);
  REQUIRE(summary.rows.size() == 1);
  const double tr = std::stod(summary.rows[0][summary.column("trace_abs")]);
  const double p = (2.0 + tr * tr) / 6.0;
  const double want = std::ceil(std::log(1.0 / 3.0) / std::log(p));
  CHECK(std::stod(summary.rows[0][summary.column("N_star")]) == want);
}

TEST_CASE("sample dumps") {
  auto dir = scratch("sample");
  ExperimentConfig cfg;
  cfg.d = 5;
  cfg.epsilon = 0.5;
  cfg.channels = 4;
  cfg.output_dir = dir;
  auto path = run_sample(cfg);
  auto t = read_csv(path);
  CHECK(t.header == kSampleHeader);
  CHECK(t.rows.size() == 20);
  const double half = std::asin(0.25);
  for (const auto& row : t.rows) {
    CHECK(row[0] == "eps_cue");
    CHECK(std::abs(std::stod(row[t.column("angle")])) <= half + 1e-15);
  }
  const std::string first = slurp(path);
  run_sample(cfg);
  CHECK(slurp(path) == first);
  cfg.channel_kind = "single_basis";
  CHECK_THROWS_AS(run_sample(cfg), ValidationError);
}

TEST_CASE("certify runs") {
  ExperimentConfig cfg;
  cfg.d = 4;
  cfg.epsilon = 0.5;
  cfg.channels = 6;
  cfg.channel_kind = "single_basis";
  for (const char* alg : {"incoherent", "coherent", "hadamard"}) {
    cfg.algorithm = alg;
    auto recs = compute_certify(cfg);
    REQUIRE(recs.size() == 6);
    for (const auto& r : recs) CHECK(std::abs(r.distance - 0.5) < 1e-10);
  }
  cfg.channel_kind = "eps_cue";
  cfg.algorithm = "hadamard";
  CHECK_THROWS_AS(compute_certify(cfg), ValidationError);
  cfg.algorithm = "psychic";
  CHECK_THROWS_AS(compute_certify(cfg), ValidationError);

  auto dir = scratch("certify");
  cfg.algorithm = "incoherent";
  cfg.output_dir = dir;
  auto t = read_csv(run_certify(cfg));
  CHECK(t.header == kCertifyHeader);
  CHECK(t.rows.size() == 6);
}

TEST_CASE("bounds and qsvt outputs") {
  ExperimentConfig cfg;
  cfg.d = 4096;
  cfg.epsilon = 0.01;
  auto j = bound_report_json(compute_bounds(cfg));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"s", "d", "N", "g", "F1", "F2", "F3", "F4", "tvd_upper", "feasible"});
  CHECK(j["feasible"].get<bool>());

  auto dir = scratch("qsvt");
  cfg.d = 2;
  cfg.epsilon = 1.0;
  cfg.output_dir = dir;
  auto t = read_csv(run_qsvt_demo(cfg));
  CHECK(t.header == kPhaseHeader);
  CHECK(t.rows.size() == qsvt_params(2, 1.0).degree + 1);
}
