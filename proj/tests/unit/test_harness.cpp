#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bintopo/core/errors.hpp"
#include "bintopo/env/gol.hpp"
#include "bintopo/harness/experiment.hpp"
#include "bintopo/harness/svg.hpp"

using namespace bintopo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bintopo_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig parse(const std::string& text) {
  std::stringstream ss(text);
  return parse_experiment(ss);
}

const char* kSynthetic = R"(# pinned config for the golden trace
[environment]
name = synthetic
nx = 10
target_seed = 4

[algorithm]
name = ea
population = 12
parents_mating = 4

[run]
budget = 40
seeds = 0, 1, 2, 3, 4
curves = false
)";

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing") {
  auto cfg = parse(kSynthetic);
  CHECK(cfg.env_name == "synthetic");
  CHECK(cfg.algo_name == "ea");
  CHECK(cfg.budget == 40);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
  CHECK(cfg.variance_window == 50);
  CHECK(cfg.robustness_samples == 20);

  const std::string base = "[environment]\nname = gol\n[algorithm]\nname = random\n";
  CHECK_NOTHROW(parse(base));
  CHECK_THROWS_AS(parse(base + "[run]\nbugdet = 10\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "[analysis]\nwindow = 10\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "[plots]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[environment]\nname = gol\nwidht = 8\n[algorithm]\nname = random\n"), ConfigError);
  CHECK_THROWS_AS(parse("[environment]\nname = gol\n[algorithm]\nname = duct\nexploartion = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse("[environment]\nname = gol\n[algorithm]\nname = tabu\n"), ConfigError);
  CHECK_THROWS_AS(parse("[environment]\nname = maze\n[algorithm]\nname = random\n"), ConfigError);
  CHECK_THROWS_AS(parse("[algorithm]\nname = random\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "[analysis]\nrobustness_probs = 0, 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("[environment]\nname = bend\nvoxel = 8\n[algorithm]\nname = random\n"), ConfigError);
}

TEST_CASE("run writes traces, designs and a summary") {
  auto cfg = parse(kSynthetic);
  const auto dir = scratch("run");
  cfg.out_dir = dir.string();
  cfg.curves = true;
  const auto result = run_experiment(cfg);
  REQUIRE(result.seeds.size() == 5);
  for (std::uint64_t s = 0; s < 5; ++s) {
    CHECK(fs::exists(dir / ("trace_" + std::to_string(s) + ".csv")));
    const Design best = load_pbd((dir / ("best_" + std::to_string(s) + ".pbd")).string());
    CHECK(best == result.seeds[s].best);
  }
  CHECK(fs::exists(dir / "curves.svg"));
  CHECK_FALSE(fs::exists(dir / "summary.csv.tmp"));

  std::ifstream summary(dir / "summary.csv");
  std::string line;
  std::getline(summary, line);
  CHECK(line == "seed,best,std");
  std::vector<double> bests;
  double mean = 0, sd = 0;
  int rows = 0;
  while (std::getline(summary, line)) {
    ++rows;
    std::stringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    if (a == "mean") {
      mean = std::stod(b);
      sd = std::stod(c);
    } else {
      bests.push_back(std::stod(b));
    }
  }
  CHECK(rows == 6);
  REQUIRE(bests.size() == 5);
  double m = 0;
  for (double b : bests) m += b;
  m /= 5;
  double v = 0;
  for (double b : bests) v += (b - m) * (b - m);
  CHECK(std::abs(mean - m) < 1e-12);
  CHECK(std::abs(sd - std::sqrt(v / 5)) < 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("reruns are bit identical, whatever the job count") {
  auto cfg = parse(kSynthetic);
  const auto a = scratch("det_a"), b = scratch("det_b");
  cfg.out_dir = a.string();
  cfg.jobs = 1;
  run_experiment(cfg);
  cfg.out_dir = b.string();
  cfg.jobs = 3;
  run_experiment(cfg);
  for (const auto* f : {"trace_0.csv", "trace_3.csv", "summary.csv", "best_2.pbd"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("trace csv matches the golden file") {
  auto cfg = parse(kSynthetic);
  cfg.seeds = {0};
  const auto result = run_seeds(cfg);
  std::ostringstream out;
  write_trace_csv(out, result.seeds[0].trace);
  const fs::path golden = fs::path(BINTOPO_GOLDEN_DIR) / "trace_synthetic_ea_0.csv";
  if (std::getenv("BINTOPO_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << out.str();
  }
  REQUIRE(fs::exists(golden));
  CHECK(out.str() == slurp(golden));
}

TEST_CASE("csv formats") {
  std::vector<RunRecord> trace{{1, 0.1, 0.1, 0.0}, {2, -0.25, 0.1, 1.5}};
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str() == "step,payoff,best,wall_ms\n1,0.10000000000000001,0.10000000000000001,0.000\n"
                     "2,-0.25,0.10000000000000001,1.500\n");
}

TEST_CASE("design variance") {
  const GridShape s(3, 2);
  std::vector<Design> same(50, Design::filled(s, 1));
  const auto flat = design_variance(same, 50);
  REQUIRE(flat.size() == 1);
  CHECK(flat[0] == 0.0);

  std::vector<Design> alt;
  for (int t = 0; t < 80; ++t) alt.push_back(Design::filled(s, static_cast<std::uint8_t>(t % 2)));
  const auto v = design_variance(alt, 50);
  CHECK(v.size() == 31);
  for (double x : v) CHECK(x == 0.25);

  CHECK_THROWS_AS(design_variance(std::vector<Design>(49, Design(s)), 50), InsufficientHistory);

  // Sliding window against a direct recomputation.
  Rng rng(3);
  std::vector<Design> rnd;
  for (int t = 0; t < 30; ++t) rnd.push_back(Design::random(s, rng));
  const auto w = design_variance(rnd, 7);
  for (std::size_t t = 0; t < w.size(); ++t) {
    double acc = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      double p = 0;
      for (std::size_t u = t; u < t + 7; ++u) p += rnd[u][k];
      p /= 7;
      acc += p * (1 - p);
    }
    CHECK(w[t] == doctest::Approx(acc / 6).epsilon(1e-14));
  }
}

TEST_CASE("robustness curve") {
  const GolEnv env(12, 12);
  Rng rng(1);
  const Design best = Design::random(env.shape(), rng);
  const auto curve = robustness_curve(best, env, {0.0, 0.1, 1.0}, 4000, 7);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].first == 0.0);
  CHECK(curve[0].second == env.evaluate(best));
  double sum = 0;
  Rng r2(99);
  for (int t = 0; t < 4000; ++t) sum += env.evaluate(Design::random(env.shape(), r2));
  CHECK(curve[2].second == doctest::Approx(sum / 4000).epsilon(0.1));
  CHECK(robustness_curve(best, env, {0.1}, 20, 5) == robustness_curve(best, env, {0.1}, 20, 5));
  CHECK_THROWS_AS(robustness_curve(Design(GridShape(3, 3)), env, {0.1}, 2, 0), ShapeMismatch);
}

TEST_CASE("experiment analyses are written when enabled") {
  auto cfg = parse(std::string(kSynthetic) + "[analysis]\nvariance = true\nvariance_window = 10\n"
                                             "robustness_probs = 0, 0.05, 0.1\nrobustness_samples = 5\n");
  const auto dir = scratch("analysis");
  cfg.seeds = {2};
  cfg.out_dir = dir.string();
  const auto r = run_experiment(cfg);
  CHECK(r.seeds[0].variance.size() == 31);
  CHECK(r.seeds[0].robustness.size() == 3);
  CHECK(fs::exists(dir / "variance_2.csv"));
  CHECK(fs::exists(dir / "robustness_2.csv"));
  fs::remove_all(dir);
}

TEST_CASE("atomic writes replace the target") {
  const auto dir = scratch("atomic");
  fs::create_directories(dir);
  const auto path = (dir / "x.csv").string();
  write_file_atomic(path, "one\n");
  write_file_atomic(path, "two\n");
  CHECK(slurp(path) == "two\n");
  CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x.csv").string(), "x"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("svg output is well formed") {
  svg::Series a{"a", {{1, 0.1}, {2, 0.3}}};
  const auto plot = svg::line_plot({a}, "t<1>", "x", "y");
  CHECK(plot.rfind("<svg", 0) == 0);
  CHECK(plot.find("t&lt;1&gt;") != std::string::npos);
  CHECK(plot.find("</svg>") != std::string::npos);
  const auto img = svg::design_image(Design::from_string(GridShape(2, 2), "1001"), 10);
  CHECK(img.find("fill=\"#222\"") != std::string::npos);
  fdtd::FieldSnapshot f{2, 1, {1.0, -1.0}};
  const auto field = svg::field_image(f, 2);
  CHECK(field.find("#ff0000") != std::string::npos);
  CHECK(field.find("#0000ff") != std::string::npos);
}

TEST_CASE("environment factory") {
  Params p(std::map<std::string, std::string>{{"width", "7"}, {"height", "5"}});
  const auto gol = make_environment("gol", p);
  CHECK(gol->shape() == GridShape(7, 5));
  Params q(std::map<std::string, std::string>{{"nx", "4"}, {"ny", "3"}});
  const auto syn = make_environment("synthetic", q);
  CHECK(syn->shape() == GridShape(4, 3));
  CHECK(syn->differentiable());
  Params r;
  CHECK_THROWS_AS(make_environment("coupler", r), ConfigError);
}

}  // TEST_SUITE
