// bintopo: run experiments, evaluate designs, render SVGs.

#include <malloc.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bintopo/core/errors.hpp"
#include "bintopo/env/photonics.hpp"
#include "bintopo/harness/experiment.hpp"
#include "bintopo/harness/svg.hpp"

namespace {

using namespace bintopo;

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

// An environment name with default parameters, or a config file's
// [environment] section.
std::unique_ptr<PayoffEnvironment> environment_from(const std::string& arg) {
  EnvironmentSpec spec;
  if (std::filesystem::is_regular_file(arg)) {
    spec = load_environment_spec(arg);
  } else {
    spec.name = arg;
  }
  auto env = make_environment(spec.name, spec.params);
  spec.params.finish();
  return env;
}

void write_out(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
}

bool is_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  char magic[4] = {};
  f.read(magic, 4);
  return f.gcount() == 4 && std::string(magic, 4) == "BTFS";
}

}  // namespace

int main(int argc, char** argv) {
  // Network caches and FDTD grids are reallocated per step; keep them off
  // the mmap path.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);

  CLI::App app{"Binary topology optimization with bandit learners"};
  app.require_subcommand(1);

  std::string config, design_path, out_path, env_arg;
  long long seed_override = -1;
  std::size_t budget = 0, jobs = 0, samples = 0;
  std::string out_dir;
  std::vector<double> probs;

  auto* run = app.add_subcommand("run", "Run every seed of an experiment config");
  run->add_option("config", config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed-override", seed_override, "Run this single seed instead of [run] seeds");
  run->add_option("--budget", budget, "Override [run] budget");
  run->add_option("--out-dir", out_dir, "Override [run] out_dir");
  run->add_option("--jobs", jobs, "Parallel seeds (0 = all cores)");

  auto* eval = app.add_subcommand("eval", "Evaluate one design");
  eval->add_option("env", env_arg, "Environment name or config file")->required();
  eval->add_option("design", design_path, "Design (.pbd)")->required()->check(CLI::ExistingFile);

  auto* robust = app.add_subcommand("robustness", "Payoff of randomly perturbed copies of a design");
  robust->add_option("config", config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
  robust->add_option("design", design_path, "Design (.pbd)")->required()->check(CLI::ExistingFile);
  robust->add_option("--probs", probs, "Error probabilities (default: [analysis] list or 0,0.05,0.1,0.2,0.5,1)");
  robust->add_option("--samples", samples, "Samples per probability (default: [analysis] value)");
  robust->add_option("--seed-override", seed_override, "Perturbation seed (default: first [run] seed)");
  robust->add_option("-o,--output", out_path, "CSV output (default stdout)");

  auto* render = app.add_subcommand("render", "Render a design or field snapshot as SVG");
  render->add_option("input", design_path, "Design (.pbd) or snapshot (.btfs)")->required()->check(CLI::ExistingFile);
  render->add_option("-o,--output", out_path, "SVG output")->required();

  auto* snap = app.add_subcommand("snapshot", "Export the steady-state Ez field of a photonic design");
  snap->add_option("env", env_arg, "bend, splitter or a config file")->required();
  snap->add_option("design", design_path, "Design (.pbd)")->required()->check(CLI::ExistingFile);
  snap->add_option("-o,--output", out_path, "Snapshot output (.btfs)")->required();

  auto* scene = app.add_subcommand("scene", "Write the scene file of a photonic environment");
  scene->add_option("env", env_arg, "bend, splitter or a config file")->required();
  scene->add_option("-o,--output", out_path, "Scene output (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig cfg = load_experiment(config);
      if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
      if (budget > 0) cfg.budget = budget;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (run->count("--jobs")) cfg.jobs = jobs;
      const auto result = run_experiment(cfg);
      std::cout << cfg.algo_name << " on " << cfg.env_name << ", T=" << cfg.budget << "\n";
      for (const auto& s : result.seeds) {
        std::cout << "  seed " << s.seed << ": best " << percent(s.best_payoff) << "%\n";
      }
      std::cout << "  mean " << percent(result.mean) << " +- " << percent(result.std) << "%\n";
      std::cout << "  wrote " << cfg.out_dir << "\n";
    } else if (*eval) {
      const auto env = environment_from(env_arg);
      const Design d = load_pbd(design_path);
      const double v = env->evaluate(d);
      std::cout << env->name() << ": " << percent(v) << "% (" << v << ")\n";
      if (const auto* ph = dynamic_cast<const PhotonicEnvBase*>(env.get())) {
        for (const auto& [name, f] : ph->fractions(d)) std::cout << "  " << name << " " << percent(f) << "%\n";
      }
    } else if (*robust) {
      const ExperimentConfig cfg = load_experiment(config);
      Params ep = cfg.env_params;
      const auto env = make_environment(cfg.env_name, ep);
      if (probs.empty()) probs = cfg.robustness_probs;
      if (probs.empty()) probs = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
      if (samples == 0) samples = cfg.robustness_samples;
      const std::uint64_t seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : cfg.seeds.front();
      const auto curve = robustness_curve(load_pbd(design_path), *env, probs, samples, seed);
      std::string csv = "error_prob,mean_payoff\n";
      char buf[96];
      for (const auto& [p, m] : curve) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p, m);
        csv += buf;
      }
      write_out(out_path.empty() ? "-" : out_path, csv);
    } else if (*render) {
      if (is_snapshot(design_path)) {
        write_out(out_path, svg::field_image(fdtd::load_snapshot(design_path)));
      } else {
        write_out(out_path, svg::design_image(load_pbd(design_path)));
      }
    } else if (*snap) {
      const auto env = environment_from(env_arg);
      const auto* ph = dynamic_cast<const PhotonicEnvBase*>(env.get());
      if (!ph) throw ConfigError("snapshot needs a photonic environment (bend or splitter)");
      const Design d = ph->project(load_pbd(design_path));
      fdtd::save_snapshot(out_path, fdtd::snapshot_ez(ph->scene(), &d));
    } else if (*scene) {
      const auto env = environment_from(env_arg);
      const auto* ph = dynamic_cast<const PhotonicEnvBase*>(env.get());
      if (!ph) throw ConfigError("scene needs a photonic environment (bend or splitter)");
      std::ostringstream text;
      fdtd::write_scene(text, ph->scene());
      write_out(out_path.empty() ? "-" : out_path, text.str());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
