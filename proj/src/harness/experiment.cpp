#include "bintopo/harness/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bintopo/core/errors.hpp"
#include "bintopo/core/rng.hpp"
#include "bintopo/env/gol.hpp"
#include "bintopo/env/photonics.hpp"
#include "bintopo/harness/svg.hpp"
#include "bintopo/optim/registry.hpp"

namespace bintopo {

namespace fs = std::filesystem;

std::unique_ptr<PayoffEnvironment> make_environment(const std::string& name, Params& p) {
  if (name == "gol") {
    const auto w = static_cast<int>(p.get_int("width", 32));
    const auto h = static_cast<int>(p.get_int("height", 32));
    return std::make_unique<GolEnv>(w, h);
  }
  if (name == "synthetic") {
    const GridShape shape(static_cast<int>(p.get_int("nx", 12)), static_cast<int>(p.get_int("ny", 1)),
                          static_cast<int>(p.get_int("nz", 1)));
    const auto seed = static_cast<std::uint64_t>(p.get_size("target_seed", 0));
    return std::make_unique<SyntheticSeparableEnv>(SyntheticSeparableEnv::with_random_target(shape, seed));
  }
  if (name == "bend" || name == "splitter") {
    fdtd::SceneOptions so;
    so.voxels = static_cast<int>(p.get_int("voxels", so.voxels));
    so.resolution = static_cast<int>(p.get_int("resolution", so.resolution));
    so.eps_core = p.get_double("eps_core", so.eps_core);
    const auto fab = FabricationConstraint::parse(p.get_string("fabrication", "none"),
                                                  p.get_string("anchor", "bottom"));
    const std::string scene_path = p.get_string("scene", "");
    if (name == "bend") {
      auto scene = scene_path.empty() ? fdtd::bend_scene(so) : fdtd::load_scene(scene_path);
      return std::make_unique<BendEnv>(std::move(scene), fab);
    }
    const auto t = p.get_double_list("targets", {0.65, 0.35});
    if (t.size() != 2) throw ConfigError("splitter targets must list two values");
    auto scene = scene_path.empty() ? fdtd::splitter_scene(so) : fdtd::load_scene(scene_path);
    return std::make_unique<SplitterEnv>(std::move(scene), fab, std::array<double, 2>{t[0], t[1]});
  }
  throw ConfigError("unknown environment '" + name + "' (known: gol, synthetic, bend, splitter)");
}

// ---------------------------------------------------------------------------
// Config

namespace {

namespace pt = boost::property_tree;

std::map<std::string, std::string> section_values(const pt::ptree& tree, const std::string& name) {
  std::map<std::string, std::string> out;
  const auto sec = tree.get_child_optional(name);
  if (!sec) return out;
  for (const auto& [key, child] : *sec) out[key] = child.get_value<std::string>();
  return out;
}

std::string take_name(std::map<std::string, std::string>& values, const std::string& section) {
  const auto it = values.find("name");
  if (it == values.end() || it->second.empty()) throw ConfigError("[" + section + "] needs a name");
  std::string name = it->second;
  values.erase(it);
  return name;
}

// Boost's INI reader only knows ';' comments.
pt::ptree read_tree(std::istream& in) {
  std::stringstream cleaned;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') continue;
    cleaned << line << '\n';
  }
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(cleaned, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return tree;
}

}  // namespace

ExperimentConfig parse_experiment(std::istream& in) {
  const pt::ptree tree = read_tree(in);
  for (const auto& [name, child] : tree) {
    if (name != "environment" && name != "algorithm" && name != "run" && name != "analysis") {
      throw ConfigError("config: unknown section [" + name + "]");
    }
    if (child.empty()) throw ConfigError("config: key '" + name + "' outside a section");
  }

  ExperimentConfig cfg;
  auto env = section_values(tree, "environment");
  cfg.env_name = take_name(env, "environment");
  cfg.env_params = Params(env, "environment");
  auto algo = section_values(tree, "algorithm");
  cfg.algo_name = take_name(algo, "algorithm");
  cfg.algo_params = Params(algo, "algorithm");

  Params run(section_values(tree, "run"), "run");
  cfg.budget = run.get_size("budget", cfg.budget);
  const auto seeds = run.get_int_list("seeds", {0});
  cfg.seeds.clear();
  for (int s : seeds) {
    if (s < 0) throw ConfigError("[run] seeds must be non-negative");
    cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (cfg.seeds.empty()) throw ConfigError("[run] seeds is empty");
  cfg.out_dir = run.get_string("out_dir", cfg.out_dir);
  cfg.jobs = run.get_size("jobs", cfg.jobs);
  cfg.curves = run.get_bool("curves", cfg.curves);
  cfg.wall_clock = run.get_bool("wall_clock", cfg.wall_clock);
  run.finish();

  Params an(section_values(tree, "analysis"), "analysis");
  cfg.variance = an.get_bool("variance", cfg.variance);
  cfg.variance_window = an.get_size("variance_window", cfg.variance_window);
  cfg.robustness_probs = an.get_double_list("robustness_probs", {});
  cfg.robustness_samples = an.get_size("robustness_samples", cfg.robustness_samples);
  an.finish();
  for (double q : cfg.robustness_probs) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("[analysis] robustness_probs must lie in [0, 1]");
  }
  if (cfg.variance_window < 1) throw ConfigError("[analysis] variance_window must be >= 1");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_experiment(in);
}

EnvironmentSpec load_environment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  auto env = section_values(read_tree(in), "environment");
  EnvironmentSpec spec;
  spec.name = take_name(env, "environment");
  spec.params = Params(env, "environment");
  return spec;
}

void ExperimentConfig::validate() const {
  if (budget < 1) throw ConfigError("[run] budget must be >= 1");
  Params a = algo_params;
  make_optimizer(algo_name, a);
  a.finish();
  // Constructing photonic environments runs a reference simulation, so
  // only check their keys here.
  Params e = env_params;
  if (env_name == "bend" || env_name == "splitter") {
    for (const char* k : {"voxels", "resolution"}) e.get_int(k, 1);
    e.get_double("eps_core", 1.0);
    FabricationConstraint::parse(e.get_string("fabrication", "none"), e.get_string("anchor", "bottom"));
    e.get_string("scene", "");
    if (env_name == "splitter") e.get_double_list("targets", {});
  } else {
    make_environment(env_name, e);
  }
  e.finish();
}

// ---------------------------------------------------------------------------
// Analyses

std::vector<double> design_variance(const std::vector<Design>& designs, std::size_t window) {
  if (window < 1) throw ConfigError("variance window must be >= 1");
  if (designs.size() < window) {
    throw InsufficientHistory("design variance needs " + std::to_string(window) + " designs, got " +
                              std::to_string(designs.size()));
  }
  const std::size_t n = designs.front().size();
  for (const auto& d : designs) {
    if (d.size() != n) throw ShapeMismatch("design variance over designs of different sizes");
  }
  std::vector<std::size_t> ones(n, 0);
  std::vector<double> out;
  out.reserve(designs.size() - window + 1);
  const double w = static_cast<double>(window);
  for (std::size_t t = 0; t < designs.size(); ++t) {
    for (std::size_t k = 0; k < n; ++k) ones[k] += designs[t][k];
    if (t >= window) {
      for (std::size_t k = 0; k < n; ++k) ones[k] -= designs[t - window][k];
    }
    if (t + 1 >= window) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double p = static_cast<double>(ones[k]) / w;
        s += p * (1.0 - p);
      }
      out.push_back(s / static_cast<double>(n));
    }
  }
  return out;
}

std::vector<std::pair<double, double>> robustness_curve(const Design& best, const PayoffEnvironment& env,
                                                        const std::vector<double>& probs,
                                                        std::size_t samples, std::uint64_t seed) {
  if (best.shape() != env.shape()) throw ShapeMismatch("robustness design does not match the environment");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (p == 0.0 || samples == 0) {
      out.emplace_back(p, env.evaluate(best));
      continue;
    }
    Rng rng(derive_seed(seed, Stream::analysis, i));
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      Design d = best;
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (rng.bernoulli(p)) d.set(k, rng.bit());
      }
      sum += env.evaluate(d);
    }
    out.emplace_back(p, sum / static_cast<double>(samples));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<RunRecord>& trace) {
  out << "step,payoff,best,wall_ms\n";
  for (const auto& r : trace) {
    out << r.step << ',' << fmt(r.payoff) << ',' << fmt(r.best_so_far) << ',' << fmt(r.wall_ms, "%.3f")
        << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "seed,best,std\n";
  for (const auto& s : result.seeds) out << s.seed << ',' << fmt(s.best_payoff) << ",\n";
  out << "mean," << fmt(result.mean) << ',' << fmt(result.std) << '\n';
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f << contents;
    f.flush();
    if (!f) throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

ExperimentResult run_seeds(const ExperimentConfig& cfg) {
  Params env_params = cfg.env_params;
  const auto env = make_environment(cfg.env_name, env_params);
  env_params.finish();

  ExperimentResult result;
  result.seeds.resize(cfg.seeds.size());
  std::size_t jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  jobs = std::min(jobs, cfg.seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cfg.seeds.size();) {
      try {
        Params ap = cfg.algo_params;
        auto algo = make_optimizer(cfg.algo_name, ap);
        ap.finish();
        RunOptions ro;
        ro.record_designs = cfg.variance;
        ro.wall_clock = cfg.wall_clock;
        const std::uint64_t seed = cfg.seeds[i];
        RunResult r = run_optimization(*env, *algo, Budget{cfg.budget}, seed, ro);
        SeedOutcome& o = result.seeds[i];
        o.seed = seed;
        o.best_payoff = r.best_payoff;
        o.evaluations = r.evaluations;
        o.best = std::move(r.best);
        o.trace = std::move(r.trace);
        if (cfg.variance && r.designs.size() >= cfg.variance_window) {
          o.variance = design_variance(r.designs, cfg.variance_window);
        }
        if (!cfg.robustness_probs.empty()) {
          o.robustness = robustness_curve(o.best, *env, cfg.robustness_probs, cfg.robustness_samples, seed);
        }
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  double sum = 0.0;
  for (const auto& s : result.seeds) sum += s.best_payoff;
  const double n = static_cast<double>(result.seeds.size());
  result.mean = sum / n;
  double ss = 0.0;
  for (const auto& s : result.seeds) ss += (s.best_payoff - result.mean) * (s.best_payoff - result.mean);
  result.std = std::sqrt(ss / n);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());

  ExperimentResult result = run_seeds(cfg);
  for (const auto& s : result.seeds) {
    const std::string tag = std::to_string(s.seed);
    std::ostringstream trace;
    write_trace_csv(trace, s.trace);
    write_text(dir / ("trace_" + tag + ".csv"), trace.str());
    save_pbd((dir / ("best_" + tag + ".pbd")).string(), s.best);
    if (!s.variance.empty()) {
      std::ostringstream v;
      v << "step,variance\n";
      for (std::size_t i = 0; i < s.variance.size(); ++i) {
        v << (i + cfg.variance_window) << ',' << fmt(s.variance[i]) << '\n';
      }
      write_text(dir / ("variance_" + tag + ".csv"), v.str());
    }
    if (!s.robustness.empty()) {
      std::ostringstream v;
      v << "error_prob,mean_payoff\n";
      for (const auto& [p, m] : s.robustness) v << fmt(p) << ',' << fmt(m) << '\n';
      write_text(dir / ("robustness_" + tag + ".csv"), v.str());
    }
  }
  std::ostringstream summary;
  write_summary_csv(summary, result);
  write_file_atomic((dir / "summary.csv").string(), summary.str());

  if (cfg.curves) {
    std::vector<svg::Series> series;
    for (const auto& s : result.seeds) {
      svg::Series line;
      line.label = "seed " + std::to_string(s.seed);
      for (const auto& r : s.trace) line.points.emplace_back(static_cast<double>(r.step), r.best_so_far);
      series.push_back(std::move(line));
    }
    write_text(dir / "curves.svg",
               svg::line_plot(series, cfg.algo_name + " on " + cfg.env_name, "evaluations", "best payoff"));
  }
  return result;
}

}  // namespace bintopo
