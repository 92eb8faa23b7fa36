#include <cmath>
#include <vector>

#include "doctest.h"

#include "bnvc/error.h"
#include "bnvc/train.h"

using namespace bnvc;

namespace {

std::vector<std::vector<Image>> tiny_dataset() {
  SynthConfig sc;
  sc.width = 16;
  sc.height = 16;
  sc.frames = 9;
  return generate_dataset(sc, 2, 11);
}

TrainConfig tiny_config(int steps) {
  TrainConfig tc;
  tc.model.widths = {4, 4, 4};
  tc.model.mv_latent = 4;
  tc.model.mv_hyper = 4;
  tc.model.ctx_latent = 8;
  tc.model.ctx_hyper = 4;
  tc.steps = steps;
  tc.rollout = 2;
  return tc;
}

}  // namespace

TEST_CASE("adam matches a hand-computed update") {
  ParamStore store;
  store.get_or_create("w", {2}, Init::constant(1.0));
  Tensor g({2});
  g.data()[0] = 0.5;
  g.data()[1] = -2.0;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(cfg);
  adam.step(store, {{"w", g}});
  // First step: m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
  CHECK(store.get("w").data()[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  CHECK(store.get("w").data()[1] == doctest::Approx(1.0 + 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-14));

  adam.step(store, {{"w", g}});
  double m = 0.9 * 0.1 * 0.5 + 0.1 * 0.5;
  double v = 0.999 * 0.001 * 0.25 + 0.001 * 0.25;
  double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  double want = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * mh / (std::sqrt(vh) + 1e-8);
  CHECK(store.get("w").data()[0] == doctest::Approx(want).epsilon(1e-13));
  CHECK(adam.steps() == 2);
}

TEST_CASE("adam minimizes a quadratic and clips") {
  ParamStore store;
  store.get_or_create("x", {3}, Init::constant(4.0));
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  Adam adam(cfg);
  for (int i = 0; i < 2000; ++i) {
    Tensor g({3});
    for (int k = 0; k < 3; ++k) g.data()[k] = 2 * (store.get("x").data()[k] - k);
    adam.step(store, {{"x", g}});
  }
  for (int k = 0; k < 3; ++k) CHECK(store.get("x").data()[k] == doctest::Approx(k).epsilon(1e-3));

  ParamStore s2;
  s2.get_or_create("y", {1}, Init::constant(0.0));
  cfg.clip_norm = 1.0;
  Adam clipped(cfg);
  Tensor big({1});
  big.data()[0] = 1e6;
  clipped.step(s2, {{"y", big}});
  CHECK(std::isfinite(s2.get("y").data()[0]));
  CHECK(s2.get("y").data()[0] == doctest::Approx(-0.05).epsilon(1e-6));

  Tensor wrong({2});
  CHECK_THROWS(clipped.step(s2, {{"y", wrong}}));
}

TEST_CASE("zero steps returns the seeded model") {
  auto data = tiny_dataset();
  TrainConfig tc = tiny_config(0);
  TrainResult r = train_toy(tc, data);
  Model seeded = Model::seeded(tc.model, tc.seed, tc.lambda_index);
  CHECK(r.log.empty());
  CHECK(r.model.weights.hash() == seeded.weights.hash());
  CHECK(r.model.lambda_index == tc.lambda_index);
}

TEST_CASE("short training run is reproducible and moves the weights") {
  auto data = tiny_dataset();
  TrainConfig tc = tiny_config(3);
  TrainResult a = train_toy(tc, data);
  TrainResult b = train_toy(tc, data);
  REQUIRE(a.log.size() == 3);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].step == static_cast<int>(i));
    CHECK(std::isfinite(a.log[i].loss));
    CHECK(a.log[i].loss == b.log[i].loss);
    CHECK(a.log[i].bpp > 0);
    CHECK(a.log[i].mse > 0);
  }
  CHECK(a.model.weights.hash() == b.model.weights.hash());
  CHECK(a.model.weights.hash() != Model::seeded(tc.model, tc.seed, tc.lambda_index).weights.hash());

  int seen = 0;
  train_toy(tc, data, [&](const TrainLogEntry &) { ++seen; });
  CHECK(seen == 3);

  CHECK(smoothed_loss(a.log, false, 1) == a.log[0].loss);
  CHECK(smoothed_loss(a.log, true, 1) == a.log[2].loss);
  CHECK(smoothed_loss(a.log, true, 100) == doctest::Approx((a.log[0].loss + a.log[1].loss + a.log[2].loss) / 3));
}

TEST_CASE("training input errors") {
  TrainConfig tc = tiny_config(1);
  CHECK_THROWS_AS(train_toy(tc, {}), UsageError);
  SynthConfig sc;
  sc.width = 16;
  sc.height = 16;
  sc.frames = 2;
  CHECK_THROWS_AS(train_toy(tc, generate_dataset(sc, 1, 3)), UsageError);
}

TEST_CASE("rollout evaluation uses the real coder") {
  auto data = tiny_dataset();
  TrainConfig tc = tiny_config(0);
  Model m = Model::seeded(tc.model, 3, 2);
  std::vector<Image> win(data[0].begin(), data[0].begin() + 4);
  RolloutEval e = evaluate_rollout(m, win, DuplicationPolicy::kNear, 1024);
  REQUIRE(e.mse.size() == 3);
  REQUIRE(e.bpp.size() == 3);
  double obj = 0;
  for (int i = 0; i < 3; ++i) {
    CHECK(e.bpp[i] > 0);
    obj += 1024 * e.mse[i] + e.bpp[i];
  }
  CHECK(e.objective == doctest::Approx(obj));

  CodingSettings cs;
  EncodeResult enc = encode_sequence(win, m, cs);
  for (int i = 0; i < 3; ++i) {
    double mse = 0;
    const Image &r = enc.recon[i + 1].pixels;
    for (std::size_t k = 0; k < r.planes.size(); ++k) {
      double d = (r.planes[k] - win[i + 1].planes[k]) / 255.0;
      mse += d * d;
    }
    CHECK(e.mse[i] == doctest::Approx(mse / r.planes.size()).epsilon(1e-12));
  }
}
