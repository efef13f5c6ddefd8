// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "swaplab/error.hpp"
#include "swaplab/optimizer.hpp"
#include "test_util.hpp"

using namespace swaplab;

namespace {

// 1-parameter model for scalar recurrences.
WeightVector scalar_model(double theta) {
  WeightVector w;
  Tensor t;
  t.name = "layer0/W";
  t.kind = ParamKind::kWeight;
  t.rows = 1;
  t.cols = 1;
  t.data = {theta};
  w.params.push_back(std::move(t));
  return w;
}

Gradient scalar_grad(const WeightVector& w, double g) {
  Gradient grad = zeros_like(w);
  grad.params[0].data[0] = g;
  return grad;
}

}  // namespace

TEST_CASE("lr 0 leaves the model unchanged but accumulates velocity") {
  WeightVector w = scalar_model(1.5);
  OptimizerState st = make_optimizer_state(w);
  OptimizerConfig cfg;
  cfg.momentum = 0.9;
  auto [w2, st2] = sgd_update(w, st, scalar_grad(w, 2.0), 0.0, cfg);
  CHECK(w2.params[0].data[0] == 1.5);
  CHECK(st2.velocity.params[0].data[0] == 2.0);
  // inputs untouched
  CHECK(w.params[0].data[0] == 1.5);
  CHECK(st.velocity.params[0].data[0] == 0.0);
}

TEST_CASE("momentum 0, decay 0 is plain SGD") {
  ModelSpec spec = make_model_spec({3, 4, 2}, false);
  RngStream rng(2, "init");
  WeightVector w = init_weights(spec, rng);
  OptimizerConfig cfg;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;
  OptimizerState st = make_optimizer_state(w);

  Gradient g = zeros_like(w);
  RngStream grng(3, "grad");
  for (auto& t : g.params)
    for (auto& v : t.data) v = grng.next_normal();

  auto [w2, st2] = sgd_update(w, st, g, 0.1, cfg);
  auto fw = w.flatten();
  auto fg = [&] {
    std::vector<double> out;
    for (const auto& t : g.params) out.insert(out.end(), t.data.begin(), t.data.end());
    return out;
  }();
  auto f2 = w2.flatten();
  for (size_t i = 0; i < fw.size(); ++i) CHECK(f2[i] == fw[i] - 0.1 * fg[i]);
}

TEST_CASE("two nesterov updates match the independent scalar recurrence") {
  WeightVector w = scalar_model(0.0);
  OptimizerState st = make_optimizer_state(w);
  OptimizerConfig cfg;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.0;
  cfg.nesterov = true;

  for (int i = 0; i < 2; ++i) {
    auto [w2, st2] = sgd_update(w, st, scalar_grad(w, 1.0), 0.1, cfg);
    w = w2;
    st = st2;
  }

  // Independent recurrence: v' = m v + g; theta -= lr (m v' + g).
  double theta = 0.0, v = 0.0;
  for (int i = 0; i < 2; ++i) {
    v = 0.9 * v + 1.0;
    theta -= 0.1 * (0.9 * v + 1.0);
  }
  CHECK(w.params[0].data[0] == doctest::Approx(theta).epsilon(1e-15));
  CHECK(theta == doctest::Approx(-0.461).epsilon(1e-12));
}

TEST_CASE("heavy-ball (non-nesterov) step uses the velocity directly") {
  WeightVector w = scalar_model(0.0);
  OptimizerState st = make_optimizer_state(w);
  OptimizerConfig cfg;
  cfg.momentum = 0.5;
  cfg.nesterov = false;
  auto [w1, st1] = sgd_update(w, st, scalar_grad(w, 1.0), 1.0, cfg);
  CHECK(w1.params[0].data[0] == doctest::Approx(-1.0));
  auto [w2, st2] = sgd_update(w1, st1, scalar_grad(w1, 1.0), 1.0, cfg);
  CHECK(w2.params[0].data[0] == doctest::Approx(-1.0 - 1.5));
}

TEST_CASE("weight decay adds wd*theta to weights but spares bias/gamma/beta by default") {
  ModelSpec spec = make_model_spec({2, 3, 2}, true);
  RngStream rng(5, "init");
  WeightVector w = init_weights(spec, rng);
  OptimizerConfig cfg;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.1;

  Gradient zero = zeros_like(w);
  auto [w2, st2] = sgd_update(w, make_optimizer_state(w), zero, 1.0, cfg);
  for (size_t t = 0; t < w.params.size(); ++t) {
    for (size_t i = 0; i < w.params[t].data.size(); ++i) {
      double expect = w.params[t].kind == ParamKind::kWeight
                          ? w.params[t].data[i] * (1.0 - 0.1)
                          : w.params[t].data[i];
      CHECK(w2.params[t].data[i] == doctest::Approx(expect).epsilon(1e-15));
    }
  }

  cfg.decay_bn_params = true;
  auto [w3, st3] = sgd_update(w, make_optimizer_state(w), zero, 1.0, cfg);
  for (size_t t = 0; t < w.params.size(); ++t)
    for (size_t i = 0; i < w.params[t].data.size(); ++i)
      CHECK(w3.params[t].data[i] ==
            doctest::Approx(w.params[t].data[i] * 0.9).epsilon(1e-15));
}

TEST_CASE("update is linear in the gradient at momentum 0, decay 0") {
  ModelSpec spec = make_model_spec({2, 4, 3}, false);
  RngStream rng(6, "init");
  WeightVector w = init_weights(spec, rng);
  OptimizerConfig cfg;
  cfg.momentum = 0.0;

  Gradient g = zeros_like(w);
  RngStream grng(7, "grad");
  for (auto& t : g.params)
    for (auto& v : t.data) v = grng.next_normal();
  Gradient g3 = g;
  for (auto& t : g3.params)
    for (auto& v : t.data) v *= 3.0;

  auto [w1, s1] = sgd_update(w, make_optimizer_state(w), g, 0.01, cfg);
  auto [w3, s3] = sgd_update(w, make_optimizer_state(w), g3, 0.01, cfg);
  auto f0 = w.flatten(), f1 = w1.flatten(), fx = w3.flatten();
  for (size_t i = 0; i < f0.size(); ++i)
    CHECK(fx[i] - f0[i] == doctest::Approx(3.0 * (f1[i] - f0[i])).epsilon(1e-12));
}

TEST_CASE("identical gradient sequences keep two states identical") {
  ModelSpec spec = make_model_spec({2, 3, 2}, false);
  RngStream rng(8, "init");
  WeightVector wa = init_weights(spec, rng);
  WeightVector wb = wa;
  OptimizerState sa = make_optimizer_state(wa);
  OptimizerState sb = make_optimizer_state(wb);
  OptimizerConfig cfg;
  cfg.weight_decay = 1e-3;

  RngStream grng(9, "grad");
  for (int step = 0; step < 25; ++step) {
    Gradient g = zeros_like(wa);
    for (auto& t : g.params)
      for (auto& v : t.data) v = grng.next_normal();
    sgd_update_inplace(wa, sa, g, 0.05, cfg);
    sgd_update_inplace(wb, sb, g, 0.05, cfg);
  }
  CHECK(wa.checksum() == wb.checksum());
  for (size_t t = 0; t < sa.velocity.params.size(); ++t)
    CHECK(sa.velocity.params[t].data == sb.velocity.params[t].data);
}

TEST_CASE("converges to the minimizer of a 1-D quadratic") {
  // f(theta) = 0.5 (theta - 3)^2, gradient theta - 3; lr below 2/(1+m) is stable.
  WeightVector w = scalar_model(-5.0);
  OptimizerState st = make_optimizer_state(w);
  OptimizerConfig cfg;
  cfg.momentum = 0.9;
  for (int i = 0; i < 10000; ++i) {
    double theta = w.params[0].data[0];
    sgd_update_inplace(w, st, scalar_grad(w, theta - 3.0), 0.05, cfg);
    if (std::fabs(w.params[0].data[0] - 3.0) < 1e-10) break;
  }
  CHECK(std::fabs(w.params[0].data[0] - 3.0) < 1e-8);
}

TEST_CASE("shape mismatch is a contract violation") {
  WeightVector w = scalar_model(0.0);
  ModelSpec other = make_model_spec({2, 2}, false);
  RngStream rng(0, "init");
  WeightVector w2 = init_weights(other, rng);
  Gradient wrong = zeros_like(w2);
  OptimizerState st = make_optimizer_state(w);
  OptimizerConfig cfg;
  CHECK_THROWS_AS(sgd_update_inplace(w, st, wrong, 0.1, cfg), ContractError);
}
