#include "scmix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scmix/serialize.hpp"

namespace scmix {

namespace {

// Softmax of W phi + b for one pixel into `out` (size C).
void pixel_probs(const LinearSegModel& model, std::span<const float> phi,
                 double* out) {
  const int c = model.num_classes;
  double max_logit = -INFINITY;
  for (int k = 0; k < c; ++k) {
    double z = model.bias[k];
    const double* w = model.weights.data() + static_cast<std::size_t>(k) * kFeatureDim;
    for (int d = 0; d < kFeatureDim; ++d) z += w[d] * phi[d];
    out[k] = z;
    max_logit = std::max(max_logit, z);
  }
  double sum = 0.0;
  for (int k = 0; k < c; ++k) {
    out[k] = std::exp(out[k] - max_logit);
    sum += out[k];
  }
  for (int k = 0; k < c; ++k) out[k] /= sum;
}

int label_of(const OneHotLabel& labels, std::size_t pixel) {
  const auto c = static_cast<std::size_t>(labels.num_classes());
  const auto v = labels.values().subspan(pixel * c, c);
  for (std::size_t k = 0; k < c; ++k) {
    if (v[k]) return static_cast<int>(k);
  }
  return -1;
}

struct TermAccumulator {
  double loss = 0.0;
  std::uint64_t valid = 0;
  std::vector<double> grad_w;
  std::vector<double> grad_b;
};

void accumulate_term(const LinearSegModel& model, std::span<const BatchItem> items,
                     bool want_gradient, TermAccumulator& acc) {
  const int c = model.num_classes;
  std::vector<double> probs(static_cast<std::size_t>(c));
  if (want_gradient) {
    acc.grad_w.assign(model.weights.size(), 0.0);
    acc.grad_b.assign(model.bias.size(), 0.0);
  }
  for (const BatchItem& item : items) {
    if (item.features.height() != item.labels.height() ||
        item.features.width() != item.labels.width()) {
      throw ShapeMismatch("batch item features vs labels");
    }
    if (item.labels.num_classes() != c) {
      throw ShapeMismatch("batch labels have " +
                          std::to_string(item.labels.num_classes()) +
                          " classes, model has " + std::to_string(c));
    }
    if (item.weights) require_same_extent(*item.weights, item.labels, "batch weights");
    const std::size_t n = item.features.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
      const int y = label_of(item.labels, p);
      if (y < 0) continue;
      ++acc.valid;
      const double w = item.weights ? static_cast<double>(item.weights->values()[p]) : 1.0;
      const auto phi = item.features.row(p);
      pixel_probs(model, phi, probs.data());
      const double py = probs[static_cast<std::size_t>(y)];
      acc.loss += w * -std::log(std::max(py, kProbabilityFloor));
      if (!want_gradient || w == 0.0) continue;
      const bool clamped = py < kProbabilityFloor;
      if (clamped) continue;
      for (int k = 0; k < c; ++k) {
        const double delta = w * (probs[k] - (k == y ? 1.0 : 0.0));
        double* g = acc.grad_w.data() + static_cast<std::size_t>(k) * kFeatureDim;
        for (int d = 0; d < kFeatureDim; ++d) g[d] += delta * phi[d];
        acc.grad_b[k] += delta;
      }
    }
  }
}

double term_loss_probs(const ProbMap& probs, const OneHotLabel& labels,
                       const WeightMap* weights) {
  require_same_extent(probs, labels, "loss: probs vs labels");
  if (probs.num_classes() != labels.num_classes()) {
    throw ShapeMismatch("loss: class count mismatch");
  }
  if (weights) require_same_extent(*weights, labels, "loss: weights vs labels");
  const auto c = static_cast<std::size_t>(probs.num_classes());
  double sum = 0.0;
  std::uint64_t valid = 0;
  for (std::size_t p = 0; p < labels.pixel_count(); ++p) {
    const int y = label_of(labels, p);
    if (y < 0) continue;
    ++valid;
    const double w = weights ? static_cast<double>(weights->values()[p]) : 1.0;
    const double py = probs.values()[p * c + static_cast<std::size_t>(y)];
    sum += w * -std::log(std::max(py, kProbabilityFloor));
  }
  return valid == 0 ? 0.0 : sum / static_cast<double>(valid);
}

}  // namespace

PixelFeatures::PixelFeatures(const ImageTensor& image)
    : height_(image.height()), width_(image.width()),
      data_(image.pixel_count() * kFeatureDim) {
  const int h = height_;
  const int w = width_;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* out = data_.data() + (static_cast<std::size_t>(y) * w + x) * kFeatureDim;
      for (int ch = 0; ch < 3; ++ch) {
        double s = 0.0;
        double s2 = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            const double v = image(yy, xx, ch);
            s += v;
            s2 += v * v;
          }
        }
        const double mean = s / 9.0;
        const double var = std::max(s2 / 9.0 - mean * mean, 0.0);
        out[ch] = static_cast<float>(kFeatureGain * (image(y, x, ch) - 0.5));
        out[3 + ch] = static_cast<float>(kFeatureGain * (mean - 0.5));
        out[6 + ch] = static_cast<float>(kFeatureGain * std::sqrt(var));
      }
      out[9] = static_cast<float>(kFeatureGain * (static_cast<double>(x) / w - 0.5));
      out[10] = static_cast<float>(kFeatureGain * (static_cast<double>(y) / h - 0.5));
    }
  }
}

LinearSegModel LinearSegModel::zeros(int num_classes) {
  if (num_classes < 1) throw InvalidArgument("model needs at least one class");
  LinearSegModel m;
  m.num_classes = num_classes;
  m.weights.assign(static_cast<std::size_t>(num_classes) * kFeatureDim, 0.0);
  m.bias.assign(static_cast<std::size_t>(num_classes), 0.0);
  return m;
}

void LinearSegModel::validate() const {
  if (num_classes < 1 ||
      weights.size() != static_cast<std::size_t>(num_classes) * kFeatureDim ||
      bias.size() != static_cast<std::size_t>(num_classes)) {
    throw ShapeMismatch("model parameter shapes do not match its class count");
  }
  for (double v : weights) {
    if (!std::isfinite(v)) throw TrainingAborted("model has non-finite weights");
  }
  for (double v : bias) {
    if (!std::isfinite(v)) throw TrainingAborted("model has non-finite bias");
  }
}

ProbMap predict_probs(const LinearSegModel& model, const PixelFeatures& features) {
  model.validate();
  const auto c = static_cast<std::size_t>(model.num_classes);
  std::vector<double> out(features.pixel_count() * c);
  for (std::size_t p = 0; p < features.pixel_count(); ++p) {
    pixel_probs(model, features.row(p), out.data() + p * c);
  }
  return ProbMap(features.height(), features.width(), model.num_classes,
                 std::move(out));
}

ProbMap predict_probs(const LinearSegModel& model, const ImageTensor& image) {
  return predict_probs(model, PixelFeatures(image));
}

OneHotLabel pseudo_label(const ProbMap& probs) {
  const auto c = static_cast<std::size_t>(probs.num_classes());
  std::vector<std::uint8_t> out(probs.size(), 0);
  const auto v = probs.values();
  for (std::size_t p = 0; p < probs.pixel_count(); ++p) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (v[p * c + k] > v[p * c + best]) best = k;
    }
    out[p * c + best] = 1;
  }
  return OneHotLabel(probs.height(), probs.width(), probs.num_classes(),
                     std::move(out));
}

double confidence_weight(const ProbMap& probs, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw InvalidArgument("confidence threshold must satisfy 0 <= tau <= 1");
  }
  std::size_t above = 0;
  for (int y = 0; y < probs.height(); ++y) {
    for (int x = 0; x < probs.width(); ++x) {
      if (probs.max_prob(y, x) > tau) ++above;
    }
  }
  return static_cast<double>(above) / static_cast<double>(probs.pixel_count());
}

double ce_loss(const ProbMap& probs, const OneHotLabel& labels) {
  return term_loss_probs(probs, labels, nullptr);
}

double wce_loss(const ProbMap& probs, const OneHotLabel& labels,
                const WeightMap& weights) {
  return term_loss_probs(probs, labels, &weights);
}

LossBreakdown batch_loss(const LinearSegModel& model, const TrainingBatch& batch) {
  model.validate();
  TermAccumulator src;
  TermAccumulator mix;
  accumulate_term(model, batch.source, false, src);
  accumulate_term(model, batch.mixed, false, mix);
  LossBreakdown out;
  if (src.valid) out.source_ce = src.loss / static_cast<double>(src.valid);
  if (mix.valid) out.target_wce = mix.loss / static_cast<double>(mix.valid);
  return out;
}

ModelGradient loss_gradient(const LinearSegModel& model, const TrainingBatch& batch,
                            LossBreakdown* loss) {
  model.validate();
  TermAccumulator src;
  TermAccumulator mix;
  accumulate_term(model, batch.source, true, src);
  accumulate_term(model, batch.mixed, true, mix);
  ModelGradient g;
  g.weights.assign(model.weights.size(), 0.0);
  g.bias.assign(model.bias.size(), 0.0);
  for (const TermAccumulator* t : {&src, &mix}) {
    if (!t->valid) continue;
    const double scale = 1.0 / static_cast<double>(t->valid);
    for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] += scale * t->grad_w[i];
    for (std::size_t i = 0; i < g.bias.size(); ++i) g.bias[i] += scale * t->grad_b[i];
  }
  for (double v : g.weights) {
    if (!std::isfinite(v)) throw TrainingAborted("non-finite gradient (weights)");
  }
  for (double v : g.bias) {
    if (!std::isfinite(v)) throw TrainingAborted("non-finite gradient (bias)");
  }
  if (loss) {
    loss->source_ce = src.valid ? src.loss / static_cast<double>(src.valid) : 0.0;
    loss->target_wce = mix.valid ? mix.loss / static_cast<double>(mix.valid) : 0.0;
  }
  return g;
}

LinearSegModel apply_step(const LinearSegModel& model,
                          const ModelGradient& gradient, double learning_rate) {
  if (gradient.weights.size() != model.weights.size() ||
      gradient.bias.size() != model.bias.size()) {
    throw ShapeMismatch("gradient shape does not match the model");
  }
  LinearSegModel out = model;
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    out.weights[i] -= learning_rate * gradient.weights[i];
  }
  for (std::size_t i = 0; i < out.bias.size(); ++i) {
    out.bias[i] -= learning_rate * gradient.bias[i];
  }
  return out;
}

LinearSegModel ema_update(const LinearSegModel& teacher,
                          const LinearSegModel& student, double momentum) {
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw InvalidArgument("EMA momentum must satisfy 0 <= m <= 1");
  }
  if (teacher.num_classes != student.num_classes ||
      teacher.weights.size() != student.weights.size() ||
      teacher.bias.size() != student.bias.size()) {
    throw ShapeMismatch("teacher and student shapes differ");
  }
  LinearSegModel out = teacher;
  const double keep = momentum;
  const double take = 1.0 - momentum;
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    out.weights[i] = keep * teacher.weights[i] + take * student.weights[i];
  }
  for (std::size_t i = 0; i < out.bias.size(); ++i) {
    out.bias[i] = keep * teacher.bias[i] + take * student.bias[i];
  }
  return out;
}

const char* method_name(Method method) {
  switch (method) {
    case Method::kSourceOnly: return "source-only";
    case Method::kMeanTeacher: return "mt-only";
    case Method::kCutMix: return "cutmix-st";
    case Method::kClassMix: return "classmix-st";
    case Method::kSCMix: return "scmix-st";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (name == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + name +
                    "' (expected source-only, mt-only, cutmix-st, classmix-st or "
                    "scmix-st)");
}

std::vector<Method> all_methods() {
  return {Method::kSourceOnly, Method::kMeanTeacher, Method::kCutMix,
          Method::kClassMix, Method::kSCMix};
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("trainer.learning_rate: must satisfy lr >= 0");
  }
  if (iterations < 0) throw ConfigError("trainer.iterations: must satisfy T >= 0");
  if (warmup_iterations < 0) throw ConfigError("trainer.warmup_iterations: must be >= 0");
  if (pretrain_iterations < 0) {
    throw ConfigError("trainer.pretrain_iterations: must be >= 0");
  }
  if (batch_size < 1) throw ConfigError("trainer.batch_size: must be >= 1");
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw ConfigError("trainer.momentum: must satisfy 0 <= m <= 1");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("trainer.threshold: must satisfy 0 <= tau <= 1");
  }
  if (eval_interval < 1) throw ConfigError("trainer.eval_interval: must be >= 1");
  mixing.validate();
  augment.validate();
}

IoUReport iou_from_predictions(std::span<const LabelMap> predictions,
                               std::span<const LabelMap> labels, int num_classes) {
  if (predictions.size() != labels.size()) {
    throw ShapeMismatch("prediction and label counts differ");
  }
  if (labels.empty()) throw InvalidArgument("cannot evaluate an empty split");
  const auto c = static_cast<std::size_t>(num_classes);
  IoUReport r;
  r.true_positive.assign(c, 0);
  r.false_positive.assign(c, 0);
  r.false_negative.assign(c, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require_same_extent(predictions[i], labels[i], "prediction vs label");
    const auto pv = predictions[i].values();
    const auto lv = labels[i].values();
    for (std::size_t p = 0; p < lv.size(); ++p) {
      const auto truth = lv[p];
      if (truth == kIgnoreLabel) continue;
      const auto pred = pv[p];
      if (truth >= c || pred >= c) throw InvalidLabel("label outside class range", static_cast<long>(p));
      if (pred == truth) {
        ++r.true_positive[truth];
      } else {
        ++r.false_positive[pred];
        ++r.false_negative[truth];
      }
    }
  }
  double sum = 0.0;
  int present = 0;
  r.per_class.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    const std::uint64_t denom = r.true_positive[k] + r.false_positive[k] + r.false_negative[k];
    if (denom == 0) continue;
    const double iou = static_cast<double>(r.true_positive[k]) / static_cast<double>(denom);
    r.per_class[k] = iou;
    sum += iou;
    ++present;
  }
  r.mean = present ? sum / present : 0.0;
  return r;
}

namespace {

LabelMap predict_labels(const LinearSegModel& model, const PixelFeatures& features) {
  return pseudo_label(predict_probs(model, features)).to_label_map();
}

IoUReport evaluate_cached(const LinearSegModel& model,
                          std::span<const PixelFeatures* const> features,
                          std::span<const SceneSample* const> samples) {
  std::vector<LabelMap> predictions;
  std::vector<LabelMap> labels;
  predictions.reserve(samples.size());
  labels.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    predictions.push_back(predict_labels(model, *features[i]));
    labels.push_back(samples[i]->labels);
  }
  return iou_from_predictions(predictions, labels, model.num_classes);
}

}  // namespace

IoUReport evaluate_miou(const LinearSegModel& model,
                        std::span<const SceneSample* const> samples) {
  if (samples.empty()) throw InvalidArgument("cannot evaluate an empty split");
  std::vector<LabelMap> predictions;
  std::vector<LabelMap> labels;
  for (const SceneSample* s : samples) {
    predictions.push_back(predict_labels(model, PixelFeatures(s->image)));
    labels.push_back(s->labels);
  }
  return iou_from_predictions(predictions, labels, model.num_classes);
}

IoUReport evaluate_miou(const LinearSegModel& model, const Split& split) {
  std::vector<const SceneSample*> ptrs;
  for (const auto& s : split.samples) ptrs.push_back(&s);
  return evaluate_miou(model, ptrs);
}

IoUReport evaluate_compound_miou(const LinearSegModel& model,
                                 const CompoundBenchmark& benchmark) {
  std::vector<const SceneSample*> ptrs;
  for (std::size_t i = 0; i < benchmark.target_count(); ++i) {
    for (const auto& s : benchmark.target_split_for_evaluation(i).samples) {
      ptrs.push_back(&s);
    }
  }
  return evaluate_miou(model, ptrs);
}

TrainResult train(const TrainConfig& config, const CompoundBenchmark& benchmark,
                  const TrainObserver* observer) {
  config.validate();
  const int num_classes = benchmark.config().num_classes;
  TrainResult result;
  result.student = LinearSegModel::zeros(num_classes);
  result.teacher = result.student;
  if (config.iterations == 0) return result;

  const auto& src_samples = benchmark.source().samples;
  if (src_samples.empty() || benchmark.target_images().empty()) {
    throw InvalidArgument("benchmark has an empty source or target split");
  }
  std::vector<LabeledImage> sources;
  std::vector<PixelFeatures> source_features;
  for (const auto& s : src_samples) {
    sources.emplace_back(s.image, s.labels);
    source_features.emplace_back(s.image);
  }
  const auto& target_images = benchmark.target_images();
  std::vector<PixelFeatures> target_features;
  for (const ImageTensor* img : target_images) target_features.emplace_back(*img);

  // Evaluation caches: compound = target splits in order, then the open split.
  std::vector<const SceneSample*> compound_samples;
  for (std::size_t i = 0; i < benchmark.target_count(); ++i) {
    for (const auto& s : benchmark.target_split_for_evaluation(i).samples) {
      compound_samples.push_back(&s);
    }
  }
  std::vector<const PixelFeatures*> compound_features;
  for (const auto& f : target_features) compound_features.push_back(&f);
  std::vector<PixelFeatures> open_features;
  std::vector<const SceneSample*> open_samples;
  for (const auto& s : benchmark.open().samples) {
    open_features.emplace_back(s.image);
    open_samples.push_back(&s);
  }
  std::vector<const PixelFeatures*> open_feature_ptrs;
  for (const auto& f : open_features) open_feature_ptrs.push_back(&f);

  const Method method = config.method;
  const int targets_per_item = method == Method::kSourceOnly ? 0
                               : method == Method::kSCMix   ? config.mixing.mixed_targets
                                                            : 1;
  const int total_steps = config.pretrain_iterations + config.iterations;
  const auto n_src = static_cast<std::int64_t>(sources.size());
  const auto n_tgt = static_cast<std::int64_t>(target_images.size());
  double initial_loss = -1.0;

  for (int step = 0; step < total_steps; ++step) {
    const bool self_training = step >= config.pretrain_iterations;
    if (step == config.pretrain_iterations) result.teacher = result.student;

    RngStream sampling(config.seed, static_cast<std::uint64_t>(step),
                       StreamPurpose::kDataSampling);
    TrainingBatch batch;
    std::vector<std::int64_t> src_idx(static_cast<std::size_t>(config.batch_size));
    for (auto& i : src_idx) i = sampling.uniform_int(0, n_src - 1);
    for (auto i : src_idx) {
      batch.source.push_back(BatchItem{source_features[static_cast<std::size_t>(i)],
                                       sources[static_cast<std::size_t>(i)].one_hot,
                                       std::nullopt});
    }

    if (self_training && targets_per_item > 0) {
      for (int b = 0; b < config.batch_size; ++b) {
        std::vector<TargetTriple> triples;
        for (int k = 0; k < targets_per_item; ++k) {
          const auto t = static_cast<std::size_t>(sampling.uniform_int(0, n_tgt - 1));
          if (observer && observer->on_pseudo_label) observer->on_pseudo_label(*target_images[t]);
          const ProbMap probs = predict_probs(result.teacher, target_features[t]);
          triples.push_back(TargetTriple{
              *target_images[t], pseudo_label(probs),
              static_cast<float>(confidence_weight(probs, config.threshold))});
        }
        const LabeledImage& source = sources[src_idx[static_cast<std::size_t>(b)]];
        const RngStream base(config.seed, static_cast<std::uint64_t>(step),
                             StreamPurpose::kGridDims, static_cast<std::uint64_t>(b));
        MixedSample mixed;
        switch (method) {
          case Method::kSCMix:
            mixed = scmix(source, triples, config.mixing, base);
            break;
          case Method::kClassMix:
            mixed = classmix_single(source, triples[0], base);
            break;
          case Method::kCutMix:
            mixed = cutmix_single(source, triples[0], base);
            break;
          case Method::kMeanTeacher: {
            const auto& t = triples[0];
            mixed = MixedSample{t.image, t.pseudo_labels,
                                WeightMap(t.image.height(), t.image.width(), t.confidence),
                                ProvenanceMap(t.image.height(), t.image.width(),
                                              std::vector<std::uint16_t>(t.image.pixel_count(), 1))};
            break;
          }
          case Method::kSourceOnly:
            break;
        }
        if (observer && observer->on_mixed_sample) observer->on_mixed_sample(step + 1, mixed);
        const ImageTensor augmented = post_augment(mixed.image, config.augment, base);
        batch.mixed.push_back(
            BatchItem{PixelFeatures(augmented), std::move(mixed.labels), std::move(mixed.weights)});
      }
    }

    LossBreakdown loss;
    const ModelGradient grad = loss_gradient(result.student, batch, &loss);
    if (initial_loss < 0.0) initial_loss = loss.total();
    check_divergence(loss.total(), initial_loss, step + 1);
    const double ramp = config.warmup_iterations > 0
                            ? std::min(1.0, static_cast<double>(step + 1) /
                                                config.warmup_iterations)
                            : 1.0;
    result.student = apply_step(result.student, grad, config.learning_rate * ramp);
    if (self_training) {
      result.teacher = ema_update(result.teacher, result.student, config.momentum);
    }

    HistoryRow row;
    row.iteration = step + 1;
    row.self_training = self_training;
    row.loss = loss;
    const int st_iter = step + 1 - config.pretrain_iterations;
    if (self_training &&
        (st_iter % config.eval_interval == 0 || step + 1 == total_steps)) {
      row.miou_compound =
          evaluate_cached(result.student, compound_features, compound_samples).mean;
      row.miou_open =
          evaluate_cached(result.student, open_feature_ptrs, open_samples).mean;
    }
    result.history.push_back(row);
  }
  return result;
}

void check_divergence(double loss, double initial_loss, int iteration) {
  if (!std::isfinite(loss)) {
    throw TrainingAborted("non-finite loss at iteration " + std::to_string(iteration));
  }
  if (loss > kDivergenceFactor * initial_loss) {
    throw TrainingAborted("loss " + std::to_string(loss) + " at iteration " +
                          std::to_string(iteration) + " exceeds 10x the initial loss " +
                          std::to_string(initial_loss));
  }
}

std::vector<std::byte> serialize_model(const LinearSegModel& model) {
  model.validate();
  RawTensor raw;
  raw.kind = TensorKind::kModel;
  raw.height = static_cast<std::uint32_t>(model.num_classes);
  raw.width = kFeatureDim + 1;
  raw.channels = 1;
  for (int k = 0; k < model.num_classes; ++k) {
    for (int d = 0; d < kFeatureDim; ++d) {
      raw.f64.push_back(model.weights[static_cast<std::size_t>(k) * kFeatureDim + d]);
    }
    raw.f64.push_back(model.bias[static_cast<std::size_t>(k)]);
  }
  return encode_raw(raw);
}

LinearSegModel deserialize_model(std::span<const std::byte> bytes) {
  RawTensor raw = decode_raw(bytes);
  if (raw.kind != TensorKind::kModel) throw FormatError("file does not hold a model");
  if (raw.width != kFeatureDim + 1 || raw.channels != 1) {
    throw FormatError("model file has unexpected parameter layout");
  }
  LinearSegModel m = LinearSegModel::zeros(static_cast<int>(raw.height));
  for (int k = 0; k < m.num_classes; ++k) {
    const std::size_t row = static_cast<std::size_t>(k) * (kFeatureDim + 1);
    for (int d = 0; d < kFeatureDim; ++d) {
      m.weights[static_cast<std::size_t>(k) * kFeatureDim + d] = raw.f64[row + d];
    }
    m.bias[static_cast<std::size_t>(k)] = raw.f64[row + kFeatureDim];
  }
  m.validate();
  return m;
}

}  // namespace scmix
