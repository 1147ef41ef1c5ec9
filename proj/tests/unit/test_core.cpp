#include <doctest.h>

#include <sstream>

#include "bintopo/core/buffer.hpp"
#include "bintopo/core/errors.hpp"
#include "bintopo/core/params.hpp"
#include "bintopo/core/run.hpp"
#include "bintopo/env/gol.hpp"
#include "bintopo/optim/registry.hpp"

using namespace bintopo;

TEST_SUITE("core") {

TEST_CASE("design indexing is x fastest") {
  GridShape s(3, 2, 2);
  CHECK(s.size() == 12);
  CHECK(s.index(1, 0, 0) == 1);
  CHECK(s.index(0, 1, 0) == 3);
  CHECK(s.index(0, 0, 1) == 6);
  const auto c = s.coords(11);
  CHECK(c == std::array<int, 3>{2, 1, 1});
  Design d(s);
  d.set(2, 1, 1, 1);
  CHECK(d[11] == 1);
  CHECK(d.count_ones() == 1);
  CHECK(d.complement().count_ones() == 11);
}

TEST_CASE("design rejects bad input") {
  CHECK_THROWS_AS(GridShape(0, 1, 1), ShapeMismatch);
  CHECK_THROWS_AS(Design(GridShape(2, 2), std::vector<std::uint8_t>{0, 1, 0}), LengthMismatch);
  CHECK_THROWS_AS(Design(GridShape(2, 1), std::vector<std::uint8_t>{0, 2}), FormatError);
  Design d(GridShape(2, 2));
  CHECK_THROWS_AS(d.set(4, 1), IndexOutOfRange);
}

TEST_CASE("pbd round trip") {
  Rng rng(7);
  for (const GridShape s : {GridShape(5, 3), GridShape(4, 2, 3), GridShape(1, 1)}) {
    const Design d = Design::random(s, rng);
    std::stringstream ss;
    write_pbd(ss, d);
    CHECK(read_pbd(ss) == d);
  }
  std::stringstream text("PBD 3 2 1\n010\n111\n");
  const Design d = read_pbd(text);
  CHECK(d.to_string() == "010111");

  std::stringstream bad_header("PBX 3 2 1\n010\n111\n");
  CHECK_THROWS_AS(read_pbd(bad_header), FormatError);
  std::stringstream short_body("PBD 3 2 1\n010\n");
  CHECK_THROWS_AS(read_pbd(short_body), FormatError);
  std::stringstream bad_char("PBD 2 1 1\n0x\n");
  CHECK_THROWS_AS(read_pbd(bad_char), FormatError);
}

TEST_CASE("hamming payoff") {
  const GridShape s(4, 1);
  const std::vector<std::uint8_t> target{1, 0, 1, 1};
  CHECK(hamming_payoff(Design(s, target), target) == 1.0);
  CHECK(hamming_payoff(Design::from_string(s, "0100"), target) == 0.0);
  CHECK(hamming_payoff(Design::from_string(s, "1000"), target) == doctest::Approx(0.5));
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(0, Stream::algorithm) == derive_seed(0, Stream::algorithm));
  CHECK(derive_seed(0, Stream::algorithm) != derive_seed(0, Stream::buffer));
  CHECK(derive_seed(0, Stream::init, 1) != derive_seed(0, Stream::init, 2));
  CHECK(derive_seed(1, Stream::init) != derive_seed(2, Stream::init));
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(c.below(7) < 7);
  }
}

TEST_CASE("experience buffer is a bounded fifo") {
  ExperienceBuffer buf(3);
  Rng rng(1);
  CHECK_THROWS_AS(buf.sample(1, rng), EmptyBuffer);
  const GridShape s(2, 1);
  for (int i = 0; i < 5; ++i) buf.push(Design(s), static_cast<double>(i));
  CHECK(buf.size() == 3);
  CHECK(buf[0].payoff == 2.0);
  CHECK(buf[2].payoff == 4.0);
  for (const auto& e : buf.sample(50, rng)) CHECK(e.payoff >= 2.0);
}

TEST_CASE("params reject unread keys") {
  Params p(std::map<std::string, std::string>{{"lr", "0.1"}, {"lrr", "0.2"}}, "algorithm");
  CHECK(p.get_double("lr", 1.0) == 0.1);
  CHECK_THROWS_AS(p.finish(), ConfigError);

  Params q(std::map<std::string, std::string>{{"hidden", "64, 32"}, {"flag", "true"}, {"n", "x"}});
  CHECK(q.get_int_list("hidden", {}) == std::vector<int>{64, 32});
  CHECK(q.get_bool("flag", false));
  CHECK_THROWS_AS(q.get_int("n", 0), ConfigError);

  Params algo(std::map<std::string, std::string>{{"population", "10"}, {"popluation", "12"}});
  CHECK_THROWS_AS(
      {
        make_optimizer("ea", algo);
        algo.finish();
      },
      ConfigError);
  Params empty;
  CHECK_THROWS_AS(make_optimizer("simulated-annealing", empty), ConfigError);
}

TEST_CASE("every optimizer respects the evaluation budget") {
  const auto env = SyntheticSeparableEnv::with_random_target(GridShape(6, 1), 3);
  const GolEnv gol(8, 8);
  for (const auto& name : optimizer_names()) {
    for (std::size_t budget : {1, 7, 64, 101}) {
      Params p;
      if (name == "bac") {
        p.set("critic_steps", "2");
        p.set("policy_steps", "2");
        p.set("critic_hidden", "8");
        p.set("policy_hidden", "8");
        p.set("reinit_burst_multiplier", "2");
        p.set("critic_reinit_period", "20");
      } else if (name == "bppo") {
        p.set("hidden", "8");
        p.set("updates_per_rollout", "2");
      } else if (name == "iql") {
        p.set("hidden", "8");
      }
      auto algo = make_optimizer(name, p);
      const PayoffEnvironment& target = name == "grad" ? static_cast<const PayoffEnvironment&>(env) : gol;
      const auto r = run_optimization(target, *algo, Budget{budget}, 11);
      INFO(name << " T=" << budget);
      CHECK(r.evaluations == budget);
      CHECK(r.trace.size() == budget);
    }
  }
}

TEST_CASE("trace records are well formed") {
  const GolEnv gol(6, 6);
  Params p;
  auto algo = make_optimizer("random", p);
  RunOptions opt;
  opt.record_designs = true;
  const auto r = run_optimization(gol, *algo, Budget{200}, 4, opt);
  REQUIRE(r.trace.size() == 200);
  CHECK(r.designs.size() == 200);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].step == i + 1);
    CHECK(r.trace[i].wall_ms == 0.0);
    if (i > 0) CHECK(r.trace[i].best_so_far >= r.trace[i - 1].best_so_far);
  }
  CHECK(r.best_payoff == r.trace.back().best_so_far);
  CHECK(gol.evaluate(r.best) == r.best_payoff);
}

TEST_CASE("gradient optimizer needs a differentiable environment") {
  const GolEnv gol(4, 4);
  Params p;
  auto algo = make_optimizer("grad", p);
  CHECK_THROWS_AS(run_optimization(gol, *algo, Budget{10}, 0), IncompatibleAlgorithm);
  Params q;
  auto rnd = make_optimizer("random", q);
  CHECK_THROWS_AS(run_optimization(gol, *rnd, Budget{0}, 0), ConfigError);
}

TEST_CASE("synthetic environment relaxation") {
  const GridShape s(3, 1);
  const SyntheticSeparableEnv env(s, {1, 0, 1});
  const std::vector<double> at{1.0, 0.0, 1.0};
  CHECK(env.relaxed_payoff(at) == 1.0);
  for (double g : env.relaxed_gradient(at)) CHECK(g == 0.0);
  const std::vector<double> half{0.5, 0.5, 0.5};
  const auto g = env.relaxed_gradient(half);
  CHECK(g[0] > 0.0);
  CHECK(g[1] < 0.0);
  // Finite-difference check of the relaxation gradient.
  for (std::size_t i = 0; i < 3; ++i) {
    auto a = half, b = half;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    CHECK(g[i] == doctest::Approx((env.relaxed_payoff(a) - env.relaxed_payoff(b)) / 2e-6).epsilon(1e-6));
  }
}

}  // TEST_SUITE
