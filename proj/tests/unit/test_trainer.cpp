#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "scmix/trainer.hpp"

using namespace scmix;
using namespace scmix::testing;

namespace {

LinearSegModel random_model(int c, RngStream& s, double scale = 0.5) {
  LinearSegModel m = LinearSegModel::zeros(c);
  for (double& w : m.weights) w = s.uniform_real(-scale, scale);
  for (double& b : m.bias) b = s.uniform_real(-scale, scale);
  return m;
}

ProbMap random_probs(int h, int w, int c, RngStream& s) {
  std::vector<double> v(static_cast<std::size_t>(h) * w * c);
  for (std::size_t p = 0; p < v.size(); p += c) {
    double sum = 0.0;
    for (int k = 0; k < c; ++k) sum += v[p + k] = 0.01 + s.next_unit();
    for (int k = 0; k < c; ++k) v[p + k] /= sum;
  }
  return ProbMap(h, w, c, std::move(v));
}

WeightMap random_weights(int h, int w, RngStream& s) {
  std::vector<float> v(static_cast<std::size_t>(h) * w);
  for (auto& x : v) x = static_cast<float>(s.next_unit());
  return WeightMap(h, w, std::move(v));
}

TrainingBatch random_batch(int h, int w, int c, RngStream& s) {
  TrainingBatch batch;
  for (int i = 0; i < 2; ++i) {
    batch.source.push_back(
        BatchItem{PixelFeatures(random_image(h, w, s)), one_hot_encode(random_labels(h, w, c, s), c), std::nullopt});
    batch.mixed.push_back(BatchItem{PixelFeatures(random_image(h, w, s)),
                                    one_hot_encode(random_labels(h, w, c, s), c),
                                    random_weights(h, w, s)});
  }
  return batch;
}

BenchmarkConfig small_benchmark() {
  BenchmarkConfig cfg = BenchmarkConfig::defaults();
  cfg.height = 16;
  cfg.width = 16;
  cfg.samples_per_split = 6;
  return cfg;
}

TrainConfig short_config(Method m) {
  TrainConfig tc;
  tc.method = m;
  tc.pretrain_iterations = 10;
  tc.iterations = 20;
  tc.warmup_iterations = 5;
  tc.eval_interval = 10;
  tc.mixing.grid_candidates = {2, 4};
  return tc;
}

}  // namespace

TEST_CASE("pixel features follow the fixed recipe") {
  const ImageTensor img(3, 4, std::vector<float>(36, 0.5f));
  const PixelFeatures f(img);
  CHECK(f.pixel_count() == 12);
  for (int d = 0; d < 9; ++d) CHECK(f.row(0)[d] == doctest::Approx(0.0));
  CHECK(f.row(0)[9] == doctest::Approx(kFeatureGain * -0.5));
  CHECK(f.row(11)[9] == doctest::Approx(kFeatureGain * (0.75 - 0.5)));
  CHECK(f.row(11)[10] == doctest::Approx(kFeatureGain * (2.0 / 3.0 - 0.5)));
}

TEST_CASE("predict_probs") {
  RngStream s = test_stream(1);
  SUBCASE("zero model is uniform") {
    const ProbMap p = predict_probs(LinearSegModel::zeros(4), random_image(5, 5, s));
    for (double v : p.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("rows sum to one") {
    const ProbMap p = predict_probs(random_model(4, s, 3.0), random_image(7, 6, s));
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 6; ++x) {
        double sum = 0.0;
        for (double v : p.pixel(y, x)) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-6);
      }
    }
  }
  SUBCASE("hand-set logits") {
    LinearSegModel m = LinearSegModel::zeros(2);
    m.bias = {1.0, 0.0};
    const ProbMap p = predict_probs(m, ImageTensor(1, 1));
    const double e = std::exp(1.0);
    CHECK(std::abs(p(0, 0, 0) - e / (e + 1.0)) < 1e-12);
    CHECK(std::abs(p(0, 0, 1) - 1.0 / (e + 1.0)) < 1e-12);
  }
  SUBCASE("non-finite parameters") {
    LinearSegModel m = LinearSegModel::zeros(2);
    m.bias[0] = std::nan("");
    CHECK_THROWS_AS(predict_probs(m, ImageTensor(2, 2)), TrainingAborted);
  }
}

TEST_CASE("pseudo_label argmax and tie rule") {
  CHECK(pseudo_label(ProbMap(1, 1, 2, {0.2, 0.8})).class_at(0, 0) == 1);
  CHECK(pseudo_label(ProbMap(1, 1, 2, {0.5, 0.5})).class_at(0, 0) == 0);
  CHECK(pseudo_label(ProbMap(1, 1, 3, {0.2, 0.4, 0.4})).class_at(0, 0) == 1);
  RngStream s = test_stream(2);
  const ProbMap p = random_probs(16, 16, 4, s);
  const OneHotLabel y = pseudo_label(p);
  for (int r = 0; r < 16; ++r) {
    for (int x = 0; x < 16; ++x) {
      int best = 0;
      for (int c = 1; c < 4; ++c) {
        if (p(r, x, c) > p(r, x, best)) best = c;
      }
      CHECK(y.class_at(r, x) == best);
    }
  }
}

TEST_CASE("confidence_weight") {
  CHECK(confidence_weight(ProbMap(1, 2, 2, {0.99, 0.01, 0.98, 0.02}), 0.968) == 1.0);
  CHECK(confidence_weight(ProbMap(1, 2, 2, {0.6, 0.4, 0.5, 0.5}), 0.968) == 0.0);
  const ProbMap p(2, 2, 2, {0.99, 0.01, 0.5, 0.5, 0.97, 0.03, 0.9, 0.1});
  CHECK(confidence_weight(p, 0.968) == 0.5);
  CHECK(confidence_weight(ProbMap(1, 1, 2, {0.968, 0.032}), 0.968) == 0.0);
}

TEST_CASE("cross-entropy losses") {
  RngStream s = test_stream(3);
  SUBCASE("perfect prediction") {
    const OneHotLabel y = one_hot_encode(LabelMap(1, 2, 2, {0, 1}), 2);
    CHECK(ce_loss(ProbMap(1, 2, 2, {1.0, 0.0, 0.0, 1.0}), y) == doctest::Approx(0.0));
  }
  SUBCASE("uniform two-class") {
    const OneHotLabel y = one_hot_encode(random_labels(4, 4, 2, s), 2);
    const ProbMap p(4, 4, 2, std::vector<double>(32, 0.5));
    CHECK(std::abs(ce_loss(p, y) - std::log(2.0)) < 1e-12);
  }
  SUBCASE("scalar-loop oracles") {
    const LabelMap labels = random_labels(6, 5, 4, s);
    std::vector<std::uint16_t> lv(labels.values().begin(), labels.values().end());
    lv[3] = kIgnoreLabel;
    const LabelMap with_ignore(6, 5, 4, lv);
    const OneHotLabel y = one_hot_encode(with_ignore, 4);
    const ProbMap p = random_probs(6, 5, 4, s);
    const WeightMap w = random_weights(6, 5, s);
    double ce = 0.0;
    double wce = 0.0;
    int valid = 0;
    for (int r = 0; r < 6; ++r) {
      for (int x = 0; x < 5; ++x) {
        const auto l = with_ignore(r, x);
        if (l == kIgnoreLabel) continue;
        const double term = -std::log(std::max(p(r, x, l), 1e-7));
        ce += term;
        wce += w(r, x) * term;
        ++valid;
      }
    }
    CHECK(std::abs(ce_loss(p, y) - ce / valid) < 1e-6);
    CHECK(std::abs(wce_loss(p, y, w) - wce / valid) < 1e-6);
    CHECK(wce_loss(p, y, WeightMap(6, 5, 0.0f)) == 0.0);
    CHECK(wce_loss(p, y, WeightMap(6, 5, 1.0f)) == ce_loss(p, y));
    CHECK_THROWS_AS(ce_loss(random_probs(5, 5, 4, s), y), ShapeMismatch);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    RngStream s = test_stream(10 + trial);
    const TrainingBatch batch = random_batch(6, 6, 3, s);
    const LinearSegModel model = random_model(3, s);
    const ModelGradient g = loss_gradient(model, batch);
    const double h = 1e-4;
    double worst = 0.0;
    auto check = [&](LinearSegModel plus, LinearSegModel minus, double analytic) {
      const double fd = (batch_loss(plus, batch).total() - batch_loss(minus, batch).total()) / (2 * h);
      worst = std::max(worst, std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6}));
    };
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      LinearSegModel p = model;
      LinearSegModel m = model;
      p.weights[i] += h;
      m.weights[i] -= h;
      check(p, m, g.weights[i]);
    }
    for (std::size_t i = 0; i < model.bias.size(); ++i) {
      LinearSegModel p = model;
      LinearSegModel m = model;
      p.bias[i] += h;
      m.bias[i] -= h;
      check(p, m, g.bias[i]);
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("gradient steps") {
  RngStream s = test_stream(20);
  const TrainingBatch batch = random_batch(6, 6, 3, s);
  SUBCASE("zero learning rate") {
    const LinearSegModel model = random_model(3, s);
    CHECK(apply_step(model, loss_gradient(model, batch), 0.0) == model);
  }
  SUBCASE("descent on a fixed batch") {
    LinearSegModel model = LinearSegModel::zeros(3);
    std::vector<double> losses;
    for (int i = 0; i < 50; ++i) {
      LossBreakdown loss;
      const ModelGradient g = loss_gradient(model, batch, &loss);
      losses.push_back(loss.total());
      model = apply_step(model, g, 0.1);
    }
    for (std::size_t i = 2; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1]);
    CHECK(losses.back() < losses.front());
  }
  SUBCASE("loss parts") {
    const LinearSegModel model = random_model(3, s);
    const LossBreakdown l = batch_loss(model, batch);
    TrainingBatch src_only = batch;
    src_only.mixed.clear();
    CHECK(batch_loss(model, src_only).target_wce == 0.0);
    CHECK(batch_loss(model, src_only).source_ce == doctest::Approx(l.source_ce));
  }
}

TEST_CASE("ema update") {
  const LinearSegModel zero = LinearSegModel::zeros(2);
  LinearSegModel one = zero;
  std::fill(one.weights.begin(), one.weights.end(), 1.0);
  std::fill(one.bias.begin(), one.bias.end(), 1.0);
  CHECK(ema_update(zero, one, 1.0) == zero);
  CHECK(ema_update(zero, one, 0.0) == one);
  LinearSegModel teacher = zero;
  for (int t = 1; t <= 100; ++t) {
    teacher = ema_update(teacher, one, 0.999);
    if (t == 1 || t == 10 || t == 100) {
      const double expected = 1.0 - std::pow(0.999, t);
      for (double w : teacher.weights) CHECK(std::abs(w - expected) <= 1e-9);
      for (double b : teacher.bias) CHECK(std::abs(b - expected) <= 1e-9);
    }
  }
  RngStream s = test_stream(21);
  const LinearSegModel a = random_model(3, s);
  const LinearSegModel b = random_model(3, s);
  const LinearSegModel mid = ema_update(a, b, 0.7);
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    CHECK(mid.weights[i] >= std::min(a.weights[i], b.weights[i]));
    CHECK(mid.weights[i] <= std::max(a.weights[i], b.weights[i]));
  }
  CHECK_THROWS(ema_update(a, LinearSegModel::zeros(2), 0.5));
}

TEST_CASE("miou from confusion counts") {
  SUBCASE("perfect prediction") {
    RngStream s = test_stream(22);
    const std::vector<LabelMap> y = {random_labels(4, 4, 3, s)};
    CHECK(iou_from_predictions(y, y, 3).mean == 1.0);
  }
  SUBCASE("all class 0 on half and half") {
    const std::vector<LabelMap> pred = {LabelMap(2, 2, 2, {0, 0, 0, 0})};
    const std::vector<LabelMap> gt = {LabelMap(2, 2, 2, {0, 0, 1, 1})};
    const IoUReport r = iou_from_predictions(pred, gt, 2);
    REQUIRE(r.per_class[0].has_value());
    REQUIRE(r.per_class[1].has_value());
    CHECK(*r.per_class[0] == 0.5);
    CHECK(*r.per_class[1] == 0.0);
    CHECK(r.mean == 0.25);
  }
  SUBCASE("absent classes and ignore") {
    const std::vector<LabelMap> pred = {LabelMap(1, 3, 3, {0, 1, 2})};
    const std::vector<LabelMap> gt = {LabelMap(1, 3, 3, {0, 1, kIgnoreLabel})};
    const IoUReport r = iou_from_predictions(pred, gt, 3);
    CHECK_FALSE(r.per_class[2].has_value());
    CHECK(r.mean == 1.0);
  }
  SUBCASE("order invariance") {
    RngStream s = test_stream(23);
    std::vector<LabelMap> pred;
    std::vector<LabelMap> gt;
    for (int i = 0; i < 6; ++i) {
      pred.push_back(random_labels(5, 5, 4, s));
      gt.push_back(random_labels(5, 5, 4, s));
    }
    const double a = iou_from_predictions(pred, gt, 4).mean;
    std::reverse(pred.begin(), pred.end());
    std::reverse(gt.begin(), gt.end());
    CHECK(iou_from_predictions(pred, gt, 4).mean == a);
  }
  SUBCASE("empty split") {
    const std::vector<LabelMap> none;
    CHECK_THROWS(iou_from_predictions(none, none, 2));
  }
}

TEST_CASE("model serialization roundtrip") {
  RngStream s = test_stream(24);
  const LinearSegModel m = random_model(4, s);
  CHECK(deserialize_model(serialize_model(m)) == m);
  auto bytes = serialize_model(m);
  bytes.resize(bytes.size() - 8);
  CHECK_THROWS_AS(deserialize_model(bytes), FormatError);
}

TEST_CASE("train config validation") {
  TrainConfig tc;
  CHECK_NOTHROW(tc.validate());
  tc.momentum = 1.5;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.threshold = -0.1;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.batch_size = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS(parse_method("dacs"));
}

TEST_CASE("train") {
  const CompoundBenchmark bench = make_compound_benchmark(small_benchmark());
  SUBCASE("zero iterations returns the initial model") {
    TrainConfig tc = short_config(Method::kSCMix);
    tc.iterations = 0;
    const TrainResult r = train(tc, bench);
    CHECK(r.history.empty());
    CHECK(r.student == LinearSegModel::zeros(4));
  }
  SUBCASE("same seed is bitwise identical") {
    for (Method m : all_methods()) {
      const TrainResult a = train(short_config(m), bench);
      const TrainResult b = train(short_config(m), bench);
      CHECK(serialize_model(a.student) == serialize_model(b.student));
      REQUIRE(a.history.size() == b.history.size());
      for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].loss.source_ce == b.history[i].loss.source_ce);
        CHECK(a.history[i].loss.target_wce == b.history[i].loss.target_wce);
        CHECK(a.history[i].miou_compound == b.history[i].miou_compound);
      }
    }
  }
  SUBCASE("history layout") {
    const TrainResult r = train(short_config(Method::kClassMix), bench);
    REQUIRE(r.history.size() == 30);
    CHECK_FALSE(r.history[9].self_training);
    CHECK(r.history[10].self_training);
    CHECK(r.history[9].loss.target_wce == 0.0);
    CHECK(r.history[19].miou_compound.has_value());
    CHECK(r.history[29].miou_open.has_value());
    CHECK_FALSE(r.history[20].miou_compound.has_value());
    CHECK(r.history.back().iteration == 30);
  }
  SUBCASE("teacher labels only raw target images") {
    std::set<const ImageTensor*> raw(bench.target_images().begin(), bench.target_images().end());
    int calls = 0;
    int foreign = 0;
    int mixed_differs = 0;
    TrainObserver obs;
    obs.on_pseudo_label = [&](const ImageTensor& img) {
      ++calls;
      foreign += raw.count(&img) == 0;
    };
    obs.on_mixed_sample = [&](int, const MixedSample& m) {
      mixed_differs += std::none_of(bench.target_images().begin(), bench.target_images().end(),
                                    [&](const ImageTensor* t) { return bitwise_equal(*t, m.image); });
    };
    train(short_config(Method::kSCMix), bench, &obs);
    CHECK(calls == 20 * 2 * 3);
    CHECK(foreign == 0);
    CHECK(mixed_differs > 0);
  }
  SUBCASE("observer errors propagate") {
    TrainObserver obs;
    obs.on_mixed_sample = [](int, const MixedSample&) { throw std::runtime_error("stop"); };
    CHECK_THROWS_AS(train(short_config(Method::kSCMix), bench, &obs), std::runtime_error);
  }
}

TEST_CASE("divergence guard") {
  CHECK_NOTHROW(check_divergence(1.0, 1.0, 1));
  CHECK_NOTHROW(check_divergence(10.0, 1.0, 5));
  CHECK_THROWS_AS(check_divergence(10.001, 1.0, 5), TrainingAborted);
  CHECK_THROWS_AS(check_divergence(std::nan(""), 1.0, 2), TrainingAborted);
  CHECK_THROWS_AS(check_divergence(INFINITY, 1.0, 2), TrainingAborted);
}

TEST_CASE("evaluate_miou rejects an empty split") {
  const Split empty{"none", 0, {}};
  CHECK_THROWS(evaluate_miou(LinearSegModel::zeros(2), empty));
}
