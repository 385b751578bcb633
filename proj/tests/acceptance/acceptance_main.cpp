// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "mix_oracles.hpp"
#include "scmix/cli.hpp"
#include "scmix/discrepancy.hpp"
#include "scmix/experiment.hpp"

using namespace scmix;
using namespace scmix::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kMixInstances = 1000;
constexpr double kMixSeconds = 30.0;
constexpr int kDegeneracyInstances = 200;
constexpr double kDegeneracySeconds = 10.0;
constexpr double kReachabilitySeconds = 60.0;
constexpr int kGradientBatches = 20;
constexpr double kGradientRelTol = 1e-4;
constexpr double kFiniteDifferenceStep = 1e-4;
constexpr double kEmaTol = 1e-9;
constexpr double kLossTol = 1e-9;
constexpr int kConfidenceTensors = 100;
constexpr double kTau = 0.968;
constexpr double kOrderingSeconds = 600.0;
constexpr int kOrderingMinSeedWins = 4;
constexpr double kSameDistributionMax = 0.3;
constexpr double kSeparableMin = 1.6;
constexpr double kBoundSeconds = 60.0;

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1 ----------------------------------------------------------------------

void mixing_correctness() {
  const auto t0 = Clock::now();
  int bad = 0;
  std::string first;
  for (int i = 0; i < kMixInstances; ++i) {
    RngStream s(1000 + static_cast<std::uint64_t>(i), 0, StreamPurpose::kDataSampling);
    const int h = static_cast<int>(s.uniform_int(4, 32));
    const int w = static_cast<int>(s.uniform_int(4, 32));
    const int c = static_cast<int>(s.uniform_int(2, 6));
    MixParams params;
    params.mixed_targets = static_cast<int>(s.uniform_int(1, 4));
    params.grid_candidates.clear();
    const int side = std::min(h, w);
    for (int g = 1; g <= std::min(side, 8); ++g) {
      if (s.next_unit() < 0.5) params.grid_candidates.push_back(g);
    }
    if (params.grid_candidates.empty()) params.grid_candidates.push_back(1);

    ImageTensor img = random_image(h, w, s);
    std::vector<std::uint16_t> lv(static_cast<std::size_t>(h) * w);
    for (auto& l : lv) {
      l = s.next_unit() < 0.05 ? kIgnoreLabel : static_cast<std::uint16_t>(s.uniform_int(0, c - 1));
    }
    const LabeledImage src(std::move(img), LabelMap(h, w, c, std::move(lv)));
    const auto targets = random_targets(params.mixed_targets, h, w, c, s);
    const RngStream base(static_cast<std::uint64_t>(i), 7, StreamPurpose::kGridDims);

    const std::string e1 = check_mixed_sample(src, targets, scmix::scmix(src, targets, params, base));
    const std::span<const TargetTriple> first_target(targets.data(), 1);
    const std::string e2 = check_mixed_sample(src, first_target, classmix_single(src, targets[0], base));
    const std::string e3 = check_mixed_sample(src, first_target, cutmix_single(src, targets[0], base));
    for (const auto* e : {&e1, &e2, &e3}) {
      if (!e->empty()) {
        ++bad;
        if (first.empty()) first = "instance " + std::to_string(i) + ": " + *e;
      }
    }
  }
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(kMixInstances) + " instances, " + std::to_string(bad) +
                       " failures, " + fmt("%.2f s", secs);
  if (!first.empty()) detail += " (" + first + ")";
  report(1, "mixing correctness", bad == 0 && secs < kMixSeconds, detail);
}

// 2 ----------------------------------------------------------------------

void degeneracy() {
  const auto t0 = Clock::now();
  MixParams params;
  params.mixed_targets = 1;
  params.grid_candidates = {1};
  int mismatches = 0;
  for (int i = 0; i < kDegeneracyInstances; ++i) {
    RngStream s(5000 + static_cast<std::uint64_t>(i), 0, StreamPurpose::kDataSampling);
    const int h = static_cast<int>(s.uniform_int(4, 48));
    const int w = static_cast<int>(s.uniform_int(4, 48));
    const int c = static_cast<int>(s.uniform_int(2, 8));
    const LabeledImage src = random_source(h, w, c, s);
    const auto targets = random_targets(1, h, w, c, s);
    const RngStream base(static_cast<std::uint64_t>(i), 3, StreamPurpose::kGridDims);
    const MixedSample a = scmix::scmix(src, targets, params, base);
    const MixedSample b = classmix_single(src, targets[0], base);
    if (canonical_bytes(a) != canonical_bytes(b) || !(a.provenance == b.provenance)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  report(2, "degeneracy", mismatches == 0 && secs < kDegeneracySeconds,
         std::to_string(kDegeneracyInstances) + " instances, " + std::to_string(mismatches) +
             " mismatches, " + fmt("%.2f s", secs));
}

// 3 ----------------------------------------------------------------------

void reachability() {
  const auto t0 = Clock::now();
  EnumerateConfig ec;  // 4x4, 2 classes, 2 targets, N_c = 2, G = [1, 2]
  std::size_t violations = 0;
  int non_strict = 0;
  std::size_t cm_total = 0;
  std::size_t sc_total = 0;
  for (int i = 0; i < ec.instances; ++i) {
    const ToyInstance t =
        make_toy_instance(ec, RngStream(static_cast<std::uint64_t>(i), 0, StreamPurpose::kDataSampling));
    const ReachabilityResult r = check_reachability(t, ec);
    violations += r.violations;
    non_strict += r.strict ? 0 : 1;
    cm_total += r.classmix_size;
    sc_total += r.scmix_size;
  }
  const double secs = seconds_since(t0);
  report(3, "reachability", violations == 0 && non_strict == 0 && secs < kReachabilitySeconds,
         std::to_string(ec.instances) + " toy instances, " + std::to_string(violations) +
             " violations, " + std::to_string(non_strict) + " non-strict, mean |ClassMix| " +
             fmt("%.1f", static_cast<double>(cm_total) / ec.instances) + " vs |SCMix| " +
             fmt("%.1f", static_cast<double>(sc_total) / ec.instances) + ", " + fmt("%.2f s", secs));
}

// 4 ----------------------------------------------------------------------

void trainer_numerics() {
  double worst_grad = 0.0;
  for (int b = 0; b < kGradientBatches; ++b) {
    RngStream s(9000 + static_cast<std::uint64_t>(b), 0, StreamPurpose::kDataSampling);
    const int c = static_cast<int>(s.uniform_int(2, 5));
    TrainingBatch batch;
    for (int i = 0; i < 2; ++i) {
      batch.source.push_back(BatchItem{PixelFeatures(random_image(6, 6, s)),
                                       one_hot_encode(random_labels(6, 6, c, s), c), std::nullopt});
      std::vector<float> wv(36);
      for (auto& x : wv) x = static_cast<float>(s.next_unit());
      batch.mixed.push_back(BatchItem{PixelFeatures(random_image(6, 6, s)),
                                      one_hot_encode(random_labels(6, 6, c, s), c),
                                      WeightMap(6, 6, std::move(wv))});
    }
    LinearSegModel model = LinearSegModel::zeros(c);
    for (double& w : model.weights) w = s.uniform_real(-0.5, 0.5);
    for (double& w : model.bias) w = s.uniform_real(-0.5, 0.5);
    const ModelGradient g = loss_gradient(model, batch);
    const double h = kFiniteDifferenceStep;
    auto probe = [&](double* param, double analytic) {
      const double keep = *param;
      *param = keep + h;
      const double up = batch_loss(model, batch).total();
      *param = keep - h;
      const double down = batch_loss(model, batch).total();
      *param = keep;
      const double fd = (up - down) / (2 * h);
      worst_grad = std::max(worst_grad, std::abs(fd - analytic) /
                                            std::max({std::abs(fd), std::abs(analytic), 1e-6}));
    };
    for (std::size_t i = 0; i < model.weights.size(); ++i) probe(&model.weights[i], g.weights[i]);
    for (std::size_t i = 0; i < model.bias.size(); ++i) probe(&model.bias[i], g.bias[i]);
  }

  LinearSegModel teacher = LinearSegModel::zeros(3);
  LinearSegModel student = teacher;
  std::fill(student.weights.begin(), student.weights.end(), 1.0);
  std::fill(student.bias.begin(), student.bias.end(), 1.0);
  double worst_ema = 0.0;
  for (int t = 1; t <= 100; ++t) {
    teacher = ema_update(teacher, student, 0.999);
    if (t == 1 || t == 10 || t == 100) {
      const double expected = 1.0 - std::pow(0.999, t);
      for (double v : teacher.weights) worst_ema = std::max(worst_ema, std::abs(v - expected));
      for (double v : teacher.bias) worst_ema = std::max(worst_ema, std::abs(v - expected));
    }
  }

  double worst_wce = 0.0;
  for (int i = 0; i < 20; ++i) {
    RngStream s(9500 + static_cast<std::uint64_t>(i), 0, StreamPurpose::kDataSampling);
    LinearSegModel m = LinearSegModel::zeros(4);
    for (double& w : m.weights) w = s.uniform_real(-2.0, 2.0);
    const ImageTensor img = random_image(8, 8, s);
    const ProbMap p = predict_probs(m, img);
    const OneHotLabel y = one_hot_encode(random_labels(8, 8, 4, s), 4);
    worst_wce = std::max(worst_wce, std::abs(wce_loss(p, y, WeightMap(8, 8, 1.0f)) - ce_loss(p, y)));
  }
  report(4, "trainer numerics",
         worst_grad <= kGradientRelTol && worst_ema <= kEmaTol && worst_wce <= kLossTol,
         std::to_string(kGradientBatches) + " batches, max gradient rel error " +
             fmt("%.3g", worst_grad) + ", max EMA error " + fmt("%.3g", worst_ema) +
             ", max |wce - ce| " + fmt("%.3g", worst_wce));
}

// 5 ----------------------------------------------------------------------

void confidence_weights() {
  int mismatches = 0;
  for (int i = 0; i < kConfidenceTensors; ++i) {
    RngStream s(12000 + static_cast<std::uint64_t>(i), 0, StreamPurpose::kDataSampling);
    const int h = static_cast<int>(s.uniform_int(1, 24));
    const int w = static_cast<int>(s.uniform_int(1, 24));
    const int c = static_cast<int>(s.uniform_int(2, 6));
    const double sharp = s.uniform_real(0.0, 12.0);
    std::vector<double> v(static_cast<std::size_t>(h) * w * c);
    for (std::size_t p = 0; p < v.size(); p += static_cast<std::size_t>(c)) {
      double sum = 0.0;
      for (int k = 0; k < c; ++k) sum += v[p + k] = std::exp(sharp * s.normal());
      for (int k = 0; k < c; ++k) v[p + k] /= sum;
    }
    const ProbMap probs(h, w, c, v);
    std::size_t count = 0;
    for (std::size_t p = 0; p < v.size(); p += static_cast<std::size_t>(c)) {
      double best = 0.0;
      for (int k = 0; k < c; ++k) best = std::max(best, v[p + k]);
      if (best > kTau) ++count;
    }
    const double oracle = static_cast<double>(count) / static_cast<double>(h * w);
    if (confidence_weight(probs, kTau) != oracle) ++mismatches;
  }
  report(5, "confidence weight", mismatches == 0,
         std::to_string(kConfidenceTensors) + " tensors, " + std::to_string(mismatches) +
             " mismatches at tau " + fmt("%.3f", kTau));
}

// 6 and 7 ------------------------------------------------------------------

std::map<std::uint64_t, ComparisonRow> rows_by_seed(const ComparisonReport& r, const std::string& m) {
  std::map<std::uint64_t, ComparisonRow> out;
  for (const auto& row : r.rows) {
    if (row.method == m) out[row.seed] = row;
  }
  return out;
}

void benchmark_runs() {
  const ExperimentConfig cfg;  // defaults
  const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto t0 = Clock::now();
  const CompoundBenchmark bench = make_compound_benchmark(cfg.benchmark);
  const ComparisonReport cmp = run_comparison(
      cfg, bench, {Method::kSourceOnly, Method::kClassMix, Method::kSCMix}, cfg.seeds, {}, jobs);
  const double secs = seconds_since(t0);
  const auto& so = cmp.summary_for("source-only");
  const auto& cm = cmp.summary_for("classmix-st");
  const auto& sc = cmp.summary_for("scmix-st");
  const auto cm_rows = rows_by_seed(cmp, "classmix-st");
  const auto sc_rows = rows_by_seed(cmp, "scmix-st");
  int wins = 0;
  for (auto seed : cfg.seeds) wins += sc_rows.at(seed).miou_compound > cm_rows.at(seed).miou_compound;
  const bool compound_order = sc.mean_compound > cm.mean_compound && cm.mean_compound > so.mean_compound;
  const bool open_order = sc.mean_open > cm.mean_open && cm.mean_open > so.mean_open;
  std::ostringstream d;
  d << "compound " << format_metric(sc.mean_compound) << " / " << format_metric(cm.mean_compound)
    << " / " << format_metric(so.mean_compound) << " (scmix-st / classmix-st / source-only), open "
    << format_metric(sc.mean_open) << " / " << format_metric(cm.mean_open) << " / "
    << format_metric(so.mean_open) << ", scmix-st ahead on " << wins << "/" << cfg.seeds.size()
    << " seeds, " << fmt("%.1f s", secs);
  report(6, "benchmark ordering",
         compound_order && open_order && wins >= kOrderingMinSeedWins && secs < kOrderingSeconds,
         d.str());

  ExperimentConfig one = cfg;
  one.trainer.mixing.mixed_targets = 1;
  ExperimentConfig two = cfg;
  two.trainer.mixing.mixed_targets = 2;
  const auto r1 = run_comparison(one, bench, {Method::kSCMix}, cfg.seeds, {}, jobs);
  const auto r2 = run_comparison(two, bench, {Method::kSCMix}, cfg.seeds, {}, jobs);
  const double m1 = r1.summary.front().mean_compound;
  const double m2 = r2.summary.front().mean_compound;
  report(7, "N_c sweep direction", m2 >= m1,
         "compound mIoU " + format_metric(m2) + " at N_c=2 vs " + format_metric(m1) +
             " at N_c=1 (open " + format_metric(r2.summary.front().mean_open) + " vs " +
             format_metric(r1.summary.front().mean_open) + ")");
}

// 8 ----------------------------------------------------------------------

DomainSampleSet describe_split(const Split& split) {
  std::vector<const ImageTensor*> ptrs;
  for (const auto& s : split.samples) ptrs.push_back(&s.image);
  return describe_images(ptrs, split.name);
}

void bound_structure() {
  const auto t0 = Clock::now();
  bool counts_ok = true;
  bool dominance_ok = true;
  std::string sums;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    BenchmarkConfig bc = BenchmarkConfig::defaults();
    bc.seed = seed;
    const CompoundBenchmark bench = make_compound_benchmark(bc);
    const DomainSampleSet source = describe_split(bench.source());
    std::vector<DomainSampleSet> subs;
    for (std::size_t i = 0; i < bench.target_count(); ++i) {
      subs.push_back(describe_split(bench.target_split_for_evaluation(i)));
    }
    const BoundReport r = ocda_bound_terms(source, subs, RngStream(seed, 0, StreamPurpose::kDiscrepancy));
    counts_ok = counts_ok && r.terms.size() == 6;
    dominance_ok = dominance_ok && r.full_sum >= r.conventional_sum;
    sums += (sums.empty() ? "" : ", ") + format_metric(r.conventional_sum) + "<=" + format_metric(r.full_sum);
  }

  // Same generator spec, disjoint streams.
  BenchmarkConfig a = BenchmarkConfig::defaults();
  BenchmarkConfig b = a;
  b.seed = a.seed + 100;
  const CompoundBenchmark ba = make_compound_benchmark(a);
  const CompoundBenchmark bb = make_compound_benchmark(b);
  const double same = proxy_hdh_distance(describe_split(ba.source()), describe_split(bb.source()),
                                         RngStream(1, 0, StreamPurpose::kDiscrepancy));

  RngStream s(77, 0, StreamPurpose::kDataSampling);
  DomainSampleSet left{"left", {}};
  DomainSampleSet right{"right", {}};
  for (int i = 0; i < 100; ++i) {
    std::vector<double> u(8);
    std::vector<double> v(8);
    for (double& x : u) x = -4.0 + 0.5 * s.normal();
    for (double& x : v) x = 4.0 + 0.5 * s.normal();
    left.samples.push_back(u);
    right.samples.push_back(v);
  }
  const double separable = proxy_hdh_distance(left, right, RngStream(2, 0, StreamPurpose::kDiscrepancy));
  const double secs = seconds_since(t0);
  report(8, "bound structure",
         counts_ok && dominance_ok && same <= kSameDistributionMax && separable >= kSeparableMin &&
             secs < kBoundSeconds,
         std::string("6 terms ") + (counts_ok ? "on every run" : "NOT on every run") + ", sums " + sums +
             ", same-distribution " + format_metric(same) + ", separable " +
             format_metric(separable) + ", " + fmt("%.1f s", secs));
}

// 9 ----------------------------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scmix");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(e.path(), root).generic_string()] = s.str();
  }
  return out;
}

const char* kSmallConfig =
    "[benchmark]\nheight = 16\nwidth = 16\nsamples_per_split = 12\n"
    "[trainer]\niterations = 40\npretrain_iterations = 20\nwarmup_iterations = 10\neval_interval = 20\n"
    "[mixing]\ngrid_candidates = 1,2,4\n"
    "[sweep]\nvalues = 1;2\n"
    "[discrepancy]\nepochs = 50\nmin_samples = 8\n";

const char* kAugmentInputs =
    "[inputs]\nsource_image = data/source/0000_image.png\n"
    "source_label = data/source/0000_label.png\n"
    "target_images = data/target_1/0000_image.png,data/target_2/0000_image.png,"
    "data/target_3/0000_image.png\n"
    "apply_post_augment = true\n";

// Runs every subcommand under `root`; returns the failing step or "".
std::string run_all(const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cfg = (root / "small.cfg").string();
  std::ofstream(cfg, std::ios::binary) << kSmallConfig;
  std::ofstream(root / "augment.cfg", std::ios::binary) << kSmallConfig << kAugmentInputs;
  const std::string out = (root / "out").string();
  const std::string model = out + "/train/model.scmt";
  const std::vector<std::pair<std::string, std::vector<std::string>>> steps = {
      {"gen-data", {"gen-data", "--config", cfg, "--seed", "3", "--out", (root / "data").string()}},
      {"train", {"train", "--config", cfg, "--seed", "3", "--methods", "scmix-st", "--out", out + "/train"}},
      {"eval", {"eval", "--config", cfg, "--model", model, "--split", "compound", "--out", out + "/eval"}},
      {"augment", {"augment", "--config", (root / "augment.cfg").string(), "--seed", "3", "--model", model,
                   "--out", out + "/augment"}},
      {"compare", {"compare", "--config", cfg, "--seeds", "1,2", "--methods",
                   "source-only,mt-only,cutmix-st,classmix-st,scmix-st", "--out", out + "/compare"}},
      {"sweep", {"sweep", "--config", cfg, "--seeds", "1,2", "--out", out + "/sweep"}},
      {"discrepancy", {"discrepancy", "--config", cfg, "--seed", "3", "--data", (root / "data").string(),
                       "--out", out + "/discrepancy"}},
      {"enumerate-reachable", {"enumerate-reachable", "--config", cfg, "--seed", "3", "--out",
                               out + "/enumerate"}},
  };
  for (const auto& [name, args] : steps) {
    if (cli(args) != kExitOk) return name;
  }
  return {};
}

void determinism() {
  const fs::path base = fs::temp_directory_path() / "scmix_acceptance_determinism";
  const std::string e1 = run_all(base / "run_a");
  const std::string e2 = run_all(base / "run_b");
  if (!e1.empty() || !e2.empty()) {
    report(9, "determinism", false, "subcommand failed: " + (e1.empty() ? e2 : e1));
    return;
  }
  const auto a = snapshot(base / "run_a");
  const auto b = snapshot(base / "run_b");
  std::size_t differing = 0;
  std::string first;
  for (const auto& [path, bytes] : a) {
    const auto it = b.find(path);
    if (it == b.end() || it->second != bytes) {
      ++differing;
      if (first.empty()) first = path;
    }
  }
  if (a.size() != b.size()) ++differing;
  std::string detail = "8 subcommands, " + std::to_string(a.size()) + " files, " +
                       std::to_string(differing) + " differ";
  if (!first.empty()) detail += " (first: " + first + ")";
  report(9, "determinism", differing == 0 && !a.empty(), detail);
  fs::remove_all(base);
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      mixing_correctness, degeneracy, reachability, trainer_numerics, confidence_weights,
      benchmark_runs, bound_structure, determinism};
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion aborted: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
