#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scmix/mixing.hpp"
#include "scmix/synth_domains.hpp"
#include "scmix/tensor.hpp"

namespace scmix {

// RGB, 3x3 local mean per channel, 3x3 local standard deviation per
// channel, x/W, y/H. Windows clamp at the border. Intensities and
// coordinates are centered at 0.5; every feature is scaled by kFeatureGain.
inline constexpr int kFeatureDim = 11;
inline constexpr double kFeatureGain = 2.0;

class PixelFeatures {
 public:
  PixelFeatures() = default;
  explicit PixelFeatures(const ImageTensor& image);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  std::span<const float> row(std::size_t pixel) const {
    return std::span<const float>(data_).subspan(pixel * kFeatureDim, kFeatureDim);
  }
  std::span<const float> values() const { return data_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// Per-pixel softmax(W phi + b).
struct LinearSegModel {
  int num_classes = 0;
  std::vector<double> weights;  // C x D, row-major
  std::vector<double> bias;     // C

  static LinearSegModel zeros(int num_classes);
  std::size_t parameter_count() const { return weights.size() + bias.size(); }
  void validate() const;  // throws TrainingAborted on non-finite entries

  friend bool operator==(const LinearSegModel&, const LinearSegModel&) = default;
};

inline constexpr double kProbabilityFloor = 1e-7;

ProbMap predict_probs(const LinearSegModel& model, const PixelFeatures& features);
ProbMap predict_probs(const LinearSegModel& model, const ImageTensor& image);

// Argmax; ties go to the lowest class index.
OneHotLabel pseudo_label(const ProbMap& probs);

// Fraction of pixels whose max probability is strictly above tau.
double confidence_weight(const ProbMap& probs, double tau);

// Mean over non-ignored pixels of -log(max(p_y, 1e-7)).
double ce_loss(const ProbMap& probs, const OneHotLabel& labels);
// Same normalization, each pixel term scaled by its weight.
double wce_loss(const ProbMap& probs, const OneHotLabel& labels,
                const WeightMap& weights);

struct BatchItem {
  PixelFeatures features;
  OneHotLabel labels;
  std::optional<WeightMap> weights;  // absent = all ones
};

// Total loss = CE pooled over `source` + WCE pooled over `mixed`.
struct TrainingBatch {
  std::vector<BatchItem> source;
  std::vector<BatchItem> mixed;
};

struct LossBreakdown {
  double source_ce = 0.0;
  double target_wce = 0.0;
  double total() const { return source_ce + target_wce; }
};

struct ModelGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

LossBreakdown batch_loss(const LinearSegModel& model, const TrainingBatch& batch);

// Analytic gradient of batch_loss: per valid pixel, w * (p - y) phi^T over
// the term's valid-pixel count. Pixels whose label probability sits below
// the log clamp contribute nothing, matching the clamped loss.
ModelGradient loss_gradient(const LinearSegModel& model, const TrainingBatch& batch,
                            LossBreakdown* loss = nullptr);

LinearSegModel apply_step(const LinearSegModel& model,
                          const ModelGradient& gradient, double learning_rate);

// teacher <- m * teacher + (1 - m) * student
LinearSegModel ema_update(const LinearSegModel& teacher,
                          const LinearSegModel& student, double momentum);

enum class Method { kSourceOnly, kMeanTeacher, kCutMix, kClassMix, kSCMix };

const char* method_name(Method method);  // "source-only", ..., "scmix-st"
Method parse_method(const std::string& name);
std::vector<Method> all_methods();

struct TrainConfig {
  double learning_rate = 0.1;
  int iterations = 3000;          // self-training iterations T
  int warmup_iterations = 150;
  int pretrain_iterations = 300;  // source-only steps before the teacher copy
  int batch_size = 2;
  double momentum = 0.999;        // EMA m
  double threshold = 0.968;       // confidence tau
  int eval_interval = 500;
  MixParams mixing;
  AugmentParams augment;
  Method method = Method::kSCMix;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct HistoryRow {
  int iteration = 0;  // 1-based, counted across both phases
  bool self_training = false;
  LossBreakdown loss;
  std::optional<double> miou_compound;
  std::optional<double> miou_open;
};

struct TrainResult {
  LinearSegModel student;
  LinearSegModel teacher;
  std::vector<HistoryRow> history;
};

inline constexpr double kDivergenceFactor = 10.0;

// Throws TrainingAborted when `loss` is non-finite or exceeds
// kDivergenceFactor times `initial_loss`. `iteration` is 1-based.
void check_divergence(double loss, double initial_loss, int iteration);

// Test instrumentation.
struct TrainObserver {
  // Called with every image the teacher labels.
  std::function<void(const ImageTensor&)> on_pseudo_label;
  std::function<void(int iteration, const MixedSample&)> on_mixed_sample;
};

TrainResult train(const TrainConfig& config, const CompoundBenchmark& benchmark,
                  const TrainObserver* observer = nullptr);

struct IoUReport {
  std::vector<std::optional<double>> per_class;  // empty when class absent
  double mean = 0.0;
  std::vector<std::uint64_t> true_positive;
  std::vector<std::uint64_t> false_positive;
  std::vector<std::uint64_t> false_negative;
};

// Confusion from (prediction, label) pairs; ignored labels are skipped.
IoUReport iou_from_predictions(std::span<const LabelMap> predictions,
                               std::span<const LabelMap> labels, int num_classes);

IoUReport evaluate_miou(const LinearSegModel& model,
                        std::span<const SceneSample* const> samples);
IoUReport evaluate_miou(const LinearSegModel& model, const Split& split);
// Union of every seen target split.
IoUReport evaluate_compound_miou(const LinearSegModel& model,
                                 const CompoundBenchmark& benchmark);

std::vector<std::byte> serialize_model(const LinearSegModel& model);
LinearSegModel deserialize_model(std::span<const std::byte> bytes);

}  // namespace scmix
