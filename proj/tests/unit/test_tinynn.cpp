#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bintopo/core/errors.hpp"
#include "bintopo/core/rng.hpp"
#include "bintopo/nn/mlp.hpp"
#include "bintopo/nn/optim.hpp"
#include "checks.hpp"

using namespace bintopo;
using namespace bintopo::nn;

namespace {

// Scalar reference forward pass read straight from the flat parameter
// layout: per layer, out x in weights in column-major order, then bias.
std::vector<double> scalar_forward(const std::vector<int>& sizes, const Vector& theta, Activation act,
                                   Head head, std::vector<double> x) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    std::vector<double> y(static_cast<std::size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double s = theta[static_cast<Eigen::Index>(off + static_cast<std::size_t>(in * out + o))];
      for (int i = 0; i < in; ++i) {
        s += theta[static_cast<Eigen::Index>(off + static_cast<std::size_t>(o + out * i))] *
             x[static_cast<std::size_t>(i)];
      }
      const bool last = l + 2 == sizes.size();
      if (!last) {
        s = act == Activation::relu ? (s > 0 ? s : 0.0) : std::tanh(s);
      } else if (head == Head::sigmoid) {
        s = 1.0 / (1.0 + std::exp(-s));
      }
      y[static_cast<std::size_t>(o)] = s;
    }
    off += static_cast<std::size_t>(in * out + out);
    x = std::move(y);
  }
  return x;
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_SUITE("tinynn") {

TEST_CASE("zero parameters with sigmoid head give one half") {
  Mlp net({4, 8, 3}, Activation::relu, Head::sigmoid);
  net.params().setZero();
  Rng rng(2);
  const Matrix out = net.forward(random_matrix(5, 4, rng));
  for (Eigen::Index i = 0; i < out.size(); ++i) CHECK(out.data()[i] == 0.5);
}

TEST_CASE("identity linear layer") {
  Mlp net({3, 3}, Activation::relu, Head::linear);
  net.params().setZero();
  net.weight(0) = Matrix::Identity(3, 3);
  Vector x(3);
  x << 0.5, -2.0, 7.25;
  CHECK((net.forward_one(x) - x).norm() == 0.0);
}

TEST_CASE("forward matches a scalar oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> sizes{1 + static_cast<int>(rng.below(6)), 2 + static_cast<int>(rng.below(9)),
                                 2 + static_cast<int>(rng.below(9)), 1 + static_cast<int>(rng.below(4))};
    const auto act = trial % 2 ? Activation::tanh : Activation::relu;
    const auto head = trial % 3 ? Head::linear : Head::sigmoid;
    Mlp net(sizes, act, head);
    net.reinitialize(static_cast<std::uint64_t>(trial));
    const Matrix x = random_matrix(3, sizes[0], rng);
    const Matrix y = net.forward(x);
    for (int b = 0; b < 3; ++b) {
      std::vector<double> xi;
      for (int i = 0; i < sizes[0]; ++i) xi.push_back(x(b, i));
      const auto ref = scalar_forward(sizes, net.params(), act, head, xi);
      for (int o = 0; o < sizes.back(); ++o) {
        CHECK(std::abs(y(b, o) - ref[static_cast<std::size_t>(o)]) <=
              1e-12 * std::max(1.0, std::abs(ref[static_cast<std::size_t>(o)])));
      }
    }
  }
}

TEST_CASE("zero upstream gives zero gradients") {
  Mlp net({3, 5, 2}, Activation::tanh, Head::sigmoid);
  net.reinitialize(3);
  Rng rng(3);
  Mlp::Cache cache;
  net.forward(random_matrix(4, 3, rng), cache);
  Vector g;
  const Matrix dx = net.backward(cache, Matrix::Zero(4, 2), g);
  CHECK(g.size() == static_cast<Eigen::Index>(net.param_count()));
  CHECK(g.norm() == 0.0);
  CHECK(dx.norm() == 0.0);
}

TEST_CASE("linear model squared loss has the closed form gradient") {
  Mlp net({3, 1}, Activation::relu, Head::linear);
  net.reinitialize(9);
  Vector x(3);
  x << 0.3, -1.2, 2.0;
  const double target = 0.7;
  Mlp::Cache cache;
  const Matrix pred = net.forward(x.transpose(), cache);
  const double r = pred(0, 0) - target;
  Matrix up(1, 1);
  up(0, 0) = 2.0 * r;
  Vector g;
  net.backward(cache, up, g);
  for (int i = 0; i < 3; ++i) CHECK(g(i) == doctest::Approx(2.0 * r * x(i)).epsilon(1e-14));
  CHECK(g(3) == doctest::Approx(2.0 * r).epsilon(1e-14));
}

TEST_CASE("analytic gradients match central differences on 100 random nets") {
  const double worst = checks::mlp_gradient_worst_error(100);
  MESSAGE("worst relative error " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("input tangent matches the input gradient") {
  Mlp net({4, 6, 6, 1}, Activation::tanh, Head::linear);
  net.reinitialize(21);
  Rng rng(21);
  const Matrix x = random_matrix(5, 4, rng);
  Mlp::Cache cache;
  net.forward(x, cache);
  Vector g;
  const Matrix dx = net.backward(cache, Matrix::Ones(5, 1), g);
  for (int c = 0; c < 4; ++c) {
    const Matrix t = net.input_tangent(cache, c);
    for (int b = 0; b < 5; ++b) CHECK(t(b, 0) == doctest::Approx(dx(b, c)).epsilon(1e-12));
  }
}

TEST_CASE("shape errors") {
  Mlp net({3, 2}, Activation::relu, Head::linear);
  CHECK_THROWS_AS(net.forward(Matrix::Zero(2, 4)), ShapeMismatch);
  Mlp::Cache cache;
  net.forward(Matrix::Zero(2, 3), cache);
  Vector g;
  CHECK_THROWS_AS(net.backward(cache, Matrix::Zero(3, 2), g), ShapeMismatch);
  CHECK_THROWS_AS(Mlp({3}, Activation::relu, Head::linear), ShapeMismatch);
  Adam adam(4);
  Vector p = Vector::Zero(5);
  CHECK_THROWS_AS(adam.step(p, Vector::Zero(5), 0.1), ShapeMismatch);
}

TEST_CASE("initialization is seeded and bounded") {
  Mlp a({10, 20, 1}, Activation::relu, Head::sigmoid), b = a, c = a;
  a.reinitialize(5);
  b.reinitialize(5);
  c.reinitialize(6);
  CHECK(a.params() == b.params());
  CHECK(a.params() != c.params());
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    const double bound = std::sqrt(1.0 / a.layer_sizes()[l]);
    CHECK(a.weight(l).cwiseAbs().maxCoeff() <= bound);
  }
}

TEST_CASE("adam matches a scalar oracle") {
  for (bool nesterov : {false, true}) {
    const AdamConfig cfg{0.9, 0.999, 1e-8, nesterov};
    Adam adam(3, cfg);
    Vector p(3);
    p << 0.5, -1.0, 2.0;
    std::vector<double> q{0.5, -1.0, 2.0}, m(3, 0.0), v(3, 0.0);
    Rng rng(8);
    for (int t = 1; t <= 50; ++t) {
      Vector g(3);
      for (int i = 0; i < 3; ++i) g(i) = rng.normal();
      const double lr = 0.01 * (1 + t % 3);
      adam.step(p, g, lr);
      for (int i = 0; i < 3; ++i) {
        m[i] = cfg.b1 * m[i] + (1 - cfg.b1) * g(i);
        v[i] = cfg.b2 * v[i] + (1 - cfg.b2) * g(i) * g(i);
        const double vhat = v[i] / (1 - std::pow(cfg.b2, t));
        const double mhat = nesterov ? cfg.b1 * m[i] / (1 - std::pow(cfg.b1, t + 1)) +
                                           (1 - cfg.b1) * g(i) / (1 - std::pow(cfg.b1, t))
                                     : m[i] / (1 - std::pow(cfg.b1, t));
        q[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
      }
    }
    for (int i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(q[i]).epsilon(1e-12));
    CHECK(adam.steps() == 50);
  }
}

TEST_CASE("adam first step and zero gradients") {
  Adam adam(3, AdamConfig{0.9, 0.999, 1e-8, false});
  Vector p = Vector::Zero(3), g(3);
  g << 0.3, -5.0, 1e-3;
  adam.step(p, g, 0.01);
  CHECK(p(0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p(1) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(p(2) == doctest::Approx(-0.01).epsilon(1e-4));

  Adam still(2);
  Vector q(2);
  q << 1.0, -1.0;
  const Vector q0 = q;
  for (int t = 0; t < 100; ++t) still.step(q, Vector::Zero(2), 0.1);
  CHECK(q == q0);
}

TEST_CASE("cosine schedule endpoints") {
  const auto s = LrSchedule::cosine_warmup(0.01, 100, 1000);
  CHECK(s(0) == 0.0);
  CHECK(s(50) == doctest::Approx(0.005));
  CHECK(s(100) == 0.01);
  CHECK(s(1000) == 0.0);
  CHECK(s(2000) == 0.0);
  CHECK(s(550) == doctest::Approx(0.005));
  CHECK(LrSchedule::constant(0.3)(12345) == 0.3);
  CHECK_THROWS_AS(LrSchedule::cosine_warmup(0.01, 10, 5), ConfigError);
}

TEST_CASE("straight-through estimator") {
  const auto one = straight_through(1.0, 0.7);
  CHECK(one.forward() == 1.0);
  CHECK(one.backward(1.0) == 1.0);
  const auto zero = straight_through(0.0, 0.7);
  CHECK(zero.forward() == 0.0);
  CHECK(zero.backward(-2.5) == -2.5);
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    const double a = rng.bernoulli(p) ? 1.0 : 0.0;
    const double up = rng.normal();
    const auto st = straight_through(a, p);
    CHECK(st.forward() == a);
    CHECK(st.backward(up) == up);
  }
  CHECK_THROWS_AS(straight_through(1.0, 1.5), ConfigError);
}

TEST_CASE("checkpoints round trip and detect corruption") {
  const auto dir = std::filesystem::temp_directory_path() / "bintopo_nn_test";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "net").string();
  Mlp net({5, 7, 2}, Activation::tanh, Head::sigmoid);
  net.reinitialize(77);
  save_checkpoint(prefix, net);
  const Mlp back = load_checkpoint(prefix);
  CHECK(back.params() == net.params());
  CHECK(back.layer_sizes() == net.layer_sizes());
  CHECK(back.activation() == Activation::tanh);
  CHECK(back.head() == Head::sigmoid);

  Adam adam(net.param_count());
  Vector g = Vector::Ones(static_cast<Eigen::Index>(net.param_count()));
  adam.step(net.params(), g, 0.1);
  adam.save(prefix + ".adam");
  const Adam a2 = Adam::load(prefix + ".adam");
  CHECK(a2.steps() == 1);
  CHECK(a2.first_moment() == adam.first_moment());

  {
    std::fstream f(prefix + ".bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(3);
    f.put('\x55');
  }
  CHECK_THROWS_AS(load_checkpoint(prefix), FormatError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
