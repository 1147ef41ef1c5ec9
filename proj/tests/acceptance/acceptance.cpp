// Acceptance runner: one PASS/FAIL line per criterion, followed by the
// measured values; failed sub-checks are marked [x].
//
//   bintopo_acceptance [--criterion N]... [--configs DIR]

#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bintopo/core/environment.hpp"
#include "bintopo/core/rng.hpp"
#include "bintopo/core/run.hpp"
#include "bintopo/env/gol.hpp"
#include "bintopo/env/photonics.hpp"
#include "bintopo/harness/experiment.hpp"
#include "bintopo/nn/optim.hpp"
#include "bintopo/optim/baselines.hpp"
#include "bintopo/optim/neural.hpp"
#include "bintopo/optim/registry.hpp"
#include "checks.hpp"

using namespace bintopo;

namespace {

std::string g_configs = BINTOPO_CONFIG_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  // Records one sub-check; the criterion passes only if all do.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "" : "[x] ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// A shipped config, run single-threaded without touching the filesystem.
ExperimentConfig config(const std::string& name) {
  ExperimentConfig cfg = load_experiment(g_configs + "/" + name);
  cfg.jobs = 1;
  cfg.curves = false;
  cfg.wall_clock = false;
  return cfg;
}

std::size_t count_at_least(const ExperimentResult& r, double v) {
  return static_cast<std::size_t>(std::count_if(r.seeds.begin(), r.seeds.end(),
                                                [&](const SeedOutcome& s) { return s.best_payoff >= v; }));
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::map<std::string, double> m;
  for (const char* a : {"random", "duct", "bac", "bppo"}) {
    const auto cfg = config(std::string("gol_") + a + ".ini");
    std::string shape = cfg.env_params.values().count("width") ? cfg.env_params.values().at("width") : "?";
    o.check(cfg.budget == 2000 && cfg.seeds.size() == 5 && shape == "32",
            std::string(a) + " config is 32x32, T=2000, 5 seeds");
    m[a] = run_seeds(cfg).mean;
  }
  o.check(m["random"] >= 0.02 && m["random"] <= 0.12, "random mean " + fmt("%.4f", m["random"]) + " in [0.02, 0.12]");
  o.note("noisy duct mean " + fmt("%.4f", m["duct"]));
  for (const char* a : {"bac", "bppo"}) {
    const double v = m[a];
    o.check(v >= 0.30, std::string(a) + " mean " + fmt("%.4f", v) + " >= 0.30");
    o.check(v >= m["random"] + 0.10 && v >= m["duct"] + 0.10,
            std::string(a) + " exceeds random and duct by >= 0.10");
  }
  const double secs = seconds_since(t0);
  o.check(secs < 600.0, "runtime " + fmt("%.0f", secs) + " s < 600 s");
  return o;
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  {
    // Brute force over all 2^12 designs.
    const auto cfg = config("synthetic_ea.ini");
    Params ep = cfg.env_params;
    const auto env = make_environment(cfg.env_name, ep);
    const std::size_t n = env->agent_count();
    o.check(n == 12, "N = " + std::to_string(n));
    double best = -1.0;
    std::size_t argmax = 0, ties = 0;
    for (std::size_t code = 0; code < (std::size_t{1} << n); ++code) {
      Design d(env->shape());
      for (std::size_t i = 0; i < n; ++i) d.set(i, static_cast<std::uint8_t>((code >> i) & 1U));
      const double v = env->evaluate(d);
      if (v > best) {
        best = v;
        argmax = code;
        ties = 1;
      } else if (v == best) {
        ++ties;
      }
    }
    const auto* syn = dynamic_cast<const SyntheticSeparableEnv*>(env.get());
    std::size_t target = 0;
    for (std::size_t i = 0; i < n; ++i) target |= std::size_t{syn->target()[i]} << i;
    o.check(best == 1.0 && ties == 1 && argmax == target, "brute force: unique optimum at the target, payoff 1");
  }
  for (const char* a : {"ea", "iql", "bac", "bppo"}) {
    const auto cfg = config(std::string("synthetic_") + a + ".ini");
    const auto r = run_seeds(cfg);
    const auto hits = count_at_least(r, 0.95);
    o.check(cfg.budget == 3000 && r.seeds.size() == 5 && hits >= 4,
            std::string(a) + " >= 0.95 on " + std::to_string(hits) + "/5 seeds (T=" + std::to_string(cfg.budget) + ")");
  }
  {
    const auto r = run_seeds(config("synthetic_grad.ini"));
    const auto hits = count_at_least(r, 1.0);
    o.check(hits == r.seeds.size(), "grad reaches 1.0 on " + std::to_string(hits) + "/" + std::to_string(r.seeds.size()));
  }
  const double secs = seconds_since(t0);
  o.check(secs < 300.0, "runtime " + fmt("%.0f", secs) + " s < 300 s");
  return o;
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const double drift = checks::cavity_energy_drift(1000);
  o.check(drift < 1e-9, "cavity energy drift " + fmt("%.2e", drift) + " < 1e-9 over 1000 steps");
  const auto p = checks::pulse_travel();
  const double err = std::abs(p.measured - p.dispersion_free) / p.dispersion_free;
  o.check(p.dispersion_free >= 100.0 - 1.0 && err < 0.005,
          "pulse " + fmt("%.3f", p.measured) + " cells vs " + fmt("%.3f", p.dispersion_free) + " (err " +
              fmt("%.2e", err) + " < 5e-3)");
  const double refl = checks::pml_reflection();
  o.check(refl < 0.01, "pml reflection " + fmt("%.2e", refl) + " < 1e-2");
  const double t = checks::straight_guide_ratio(1);
  o.check(t >= 0.97 && t <= 1.0, "straight guide " + fmt("%.4f", t) + " in [0.97, 1]");
  const double secs = seconds_since(t0);
  o.check(secs < 120.0, "runtime " + fmt("%.0f", secs) + " s < 120 s");
  return o;
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const auto bppo_cfg = config("bend_bppo.ini");
  const auto random_cfg = config("bend_random.ini");
  Params ep = bppo_cfg.env_params;
  const auto env = make_environment(bppo_cfg.env_name, ep);
  const auto s = env->shape();
  o.check(bppo_cfg.env_name == "bend" && s.nx <= 24 && s.ny <= 24 && bppo_cfg.budget == 500 &&
              bppo_cfg.seeds.size() == 3 && random_cfg.budget == 500 && random_cfg.seeds.size() == 3,
          "bend " + std::to_string(s.nx) + "x" + std::to_string(s.ny) + ", T=500, 3 seeds");
  const double air = env->evaluate(Design(s));
  const double bppo = run_seeds(bppo_cfg).mean;
  const double random = run_seeds(random_cfg).mean;
  o.check(bppo >= air + 0.15, "bppo mean " + fmt("%.4f", bppo) + " >= all-air " + fmt("%.4f", air) + " + 0.15");
  o.check(bppo > random, "bppo mean exceeds random mean " + fmt("%.4f", random));
  const double secs = seconds_since(t0);
  o.check(secs < 1800.0, "runtime " + fmt("%.0f", secs) + " s < 1800 s");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const double worst = checks::mlp_gradient_worst_error(100);
  o.check(worst < 1e-4, "100 random nets, worst relative error " + fmt("%.2e", worst) + " < 1e-4");
  Rng rng(4);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform();
    const double a = rng.bernoulli(p) ? 1.0 : 0.0;
    const double up = rng.normal();
    const auto st = nn::straight_through(a, p);
    bad += !(st.forward() == a && st.backward(up) == up);
  }
  o.check(bad == 0, "straight-through forward = sample, backward = upstream exactly (10^4 draws)");
  return o;
}

Outcome criterion6() {
  Outcome o;
  DuctState s(1);
  s.visits[0] = {2, 2};
  s.rewards[0] = {1.0, 3.0};
  const double s0 = duct_score(s, 0, 0, 1.0, 1.0), s1 = duct_score(s, 0, 1, 1.0, 1.0);
  o.check(std::abs(s0 - 1.5) < 1e-12 && std::abs(s1 - 2.5) < 1e-12 && duct_select(s, 0, 1.0, 1.0) == 1,
          "duct scores " + fmt("%.4g", s0) + " vs " + fmt("%.4g", s1) + " -> action 1");
  const double clip = ppo_clip_objective(2.0, 1.0, BppoConfig{}.clip);
  o.check(std::abs(clip - 1.4978) < 1e-12, "ppo clip objective " + fmt("%.6g", clip));
  const double eps = iql_epsilon(IqlConfig{}, 0.3 * 3000, 3000);
  o.check(std::abs(eps - 0.525) < 1e-12, "iql epsilon(0.3T) " + fmt("%.6g", eps));
  const std::array<double, 2> zero{0.0, 0.0}, targets{0.65, 0.35};
  const double sp = splitter_objective(zero, targets);
  const double oracle = 1.0 - (0.65 * 0.65 + 0.35 * 0.35) / 2.0;
  o.check(std::abs(sp - oracle) < 1e-12 && std::abs(sp - 0.7275) < 1e-12,
          "splitter objective at (0,0) " + fmt("%.6g", sp) + " = 1 - (0.65^2 + 0.35^2)/2");
  const auto masked = BacConfig{}.masked_agents(1024);
  o.check(masked == 973, "bac masked agents " + std::to_string(masked) + " of 1024");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto r = checks::fabrication_sweep(10000);
  o.check(r.designs == 10000 && r.not_idempotent == 0, "idempotent on " + std::to_string(r.designs) + " designs");
  o.check(r.floating_material == 0 && r.enclosed_air == 0, "no floating material, no enclosed air");

  const FabricationConstraint bottom{FabricationConstraint::Mode::connected_no_cavities, Edge::bottom};
  const GridShape s(7, 7);
  const Design solid = Design::filled(s, 1);
  Design dot(s);
  dot.set(3, 3, 0, 1);
  Design ring(s), block(s);
  for (int v = 0; v < 5; ++v)
    for (int u = 1; u < 6; ++u) {
      block.set(u, v, 0, 1);
      const bool hole = v >= 1 && v < 4 && u >= 2 && u < 5;
      ring.set(u, v, 0, hole ? 0 : 1);
    }
  o.check(apply_fabrication(solid, bottom) == solid, "solid design unchanged");
  o.check(apply_fabrication(dot, bottom) == Design(s), "floating dot removed");
  o.check(apply_fabrication(ring, bottom) == block, "anchored ring filled");
  return o;
}

Outcome criterion8() {
  Outcome o;
  auto late_mean = [](const std::vector<double>& v) {
    const std::size_t from = v.size() - v.size() / 4;
    return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(from), v.end(), 0.0) /
           static_cast<double>(v.size() - from);
  };
  auto greedy_cfg = config("gol_greedy.ini");
  greedy_cfg.seeds = {0};
  const auto greedy = run_seeds(greedy_cfg);
  const double gv = late_mean(greedy.seeds[0].variance);
  o.check(greedy.seeds[0].variance.size() > 100, "greedy variance, last quarter " + fmt("%.4g", gv));

  Params ep = greedy_cfg.env_params;
  const auto env = make_environment(greedy_cfg.env_name, ep);
  for (const char* a : {"bppo", "bac"}) {
    auto cfg = config(std::string("gol_") + a + ".ini");
    cfg.seeds = {0};
    cfg.robustness_probs = {0.0, 0.05, 0.10};
    const auto r = run_seeds(cfg);
    const auto& s = r.seeds[0];
    const double v = late_mean(s.variance);
    o.check(v > 0.0 && v >= 2.0 * gv, std::string(a) + " variance " + fmt("%.4g", v) + " >= 2x greedy");
    const auto& c = s.robustness;
    const bool exact = c.size() == 3 && c[0].second == s.best_payoff && c[0].second == env->evaluate(s.best);
    const bool monotone = c.size() == 3 && c[0].second >= c[1].second && c[1].second >= c[2].second;
    o.check(exact, std::string(a) + " robustness at p=0 equals best " + fmt("%.4f", s.best_payoff));
    o.check(monotone, std::string(a) + " robustness " + fmt("%.4f", c[0].second) + " >= " +
                          fmt("%.4f", c[1].second) + " >= " + fmt("%.4f", c[2].second));
  }
  return o;
}

// Default hyperparameters, with BAC's inner loops shortened to keep this
// quick.
std::unique_ptr<Optimizer> small_optimizer(const std::string& name) {
  Params p;
  if (name == "bac") {
    p.set("policy_steps", "16");
    p.set("critic_steps", "4");
    p.set("critic_hidden", "32,32");
    p.set("policy_hidden", "32,32");
  }
  auto algo = make_optimizer(name, p);
  p.finish();
  return algo;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome criterion9() {
  Outcome o;
  const GolEnv gol(8, 8);
  const auto synthetic = SyntheticSeparableEnv::with_random_target(GridShape(10, 1), 3);
  for (const auto& name : optimizer_names()) {
    const PayoffEnvironment& env = name == "grad" ? static_cast<const PayoffEnvironment&>(synthetic) : gol;
    std::string traces[2];
    for (auto& t : traces) {
      auto algo = small_optimizer(name);
      std::ostringstream csv;
      write_trace_csv(csv, run_optimization(env, *algo, Budget{120}, 5).trace);
      t = csv.str();
    }
    bool within = true;
    for (std::size_t T : {1, 7, 33, 101}) {
      CountingEnvironment counted(env);
      auto algo = small_optimizer(name);
      const auto r = run_optimization(counted, *algo, Budget{T}, 9);
      within = within && counted.calls() <= T && r.evaluations <= T && r.trace.size() <= T;
    }
    o.check(traces[0] == traces[1] && !traces[0].empty(), name + " traces bit-identical");
    o.check(within, name + " never exceeds T");
  }

  // The same through the file-producing harness, serial vs. parallel seeds.
  const auto tmp = std::filesystem::temp_directory_path() / "bintopo_acceptance_c9";
  std::filesystem::remove_all(tmp);
  auto cfg = load_experiment(g_configs + "/gol_bppo.ini");
  cfg.budget = 200;
  cfg.seeds = {0, 1, 2};
  cfg.curves = false;
  cfg.variance = false;
  cfg.robustness_probs.clear();
  bool same = true;
  std::string dirs[2];
  for (int k = 0; k < 2; ++k) {
    cfg.jobs = k == 0 ? 1 : 3;
    cfg.out_dir = (tmp / std::to_string(k)).string();
    dirs[k] = cfg.out_dir;
    run_experiment(cfg);
  }
  for (int s = 0; s < 3; ++s) {
    const std::string f = "trace_" + std::to_string(s) + ".csv";
    const auto a = slurp(std::filesystem::path(dirs[0]) / f), b = slurp(std::filesystem::path(dirs[1]) / f);
    same = same && !a.empty() && a == b;
  }
  std::filesystem::remove_all(tmp);
  o.check(same, "harness trace files identical with 1 and 3 jobs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);

  CLI::App app{"bintopo acceptance criteria"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "Criterion number (repeatable; default all)")->check(CLI::Range(1, 9));
  app.add_option("--configs", g_configs, "Directory of shipped configs");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"GoL benchmark at desk scale", criterion1}},
      {2, {"oracle equivalence on the separable environment", criterion2}},
      {3, {"FDTD physics", criterion3}},
      {4, {"FDTD bend optimization", criterion4}},
      {5, {"gradient correctness", criterion5}},
      {6, {"formula checks", criterion6}},
      {7, {"fabrication mapping", criterion7}},
      {8, {"design variance and robustness", criterion8}},
      {9, {"determinism and budget", criterion9}},
  };

  bool all = true;
  for (int c : selected) {
    const auto& [title, fn] = criteria.at(c);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.check(false, std::string("threw: ") + e.what());
    }
    all = all && o.pass;
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("criterion %d %s  %s (%.1f s): %s\n", c, o.pass ? "PASS" : "FAIL", title.c_str(), seconds_since(t0),
                detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
