#include "scmix/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace scmix {

namespace {

using nlohmann::json;

ComparisonRow run_one(const ExperimentConfig& config, const CompoundBenchmark& benchmark,
                      Method method, std::uint64_t seed) {
  TrainConfig tc = config.trainer;
  tc.method = method;
  tc.seed = seed;
  const TrainResult result = train(tc, benchmark);
  const IoUReport compound = evaluate_compound_miou(result.student, benchmark);
  const IoUReport open = evaluate_miou(result.student, benchmark.open());
  return ComparisonRow{method_name(method), seed, compound.mean, open.mean,
                       compound.per_class};
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first error
// (in index order) is rethrown after every worker joined.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers =
      std::min(static_cast<std::size_t>(std::max(jobs, 1)), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const MethodSummary& ComparisonReport::summary_for(const std::string& method) const {
  for (const auto& s : summary) {
    if (s.method == method) return s;
  }
  throw InvalidArgument("comparison report has no method '" + method + "'");
}

std::vector<MethodSummary> summarize(const std::vector<ComparisonRow>& rows) {
  std::vector<MethodSummary> out;
  std::vector<std::vector<double>> compound;
  std::vector<std::vector<double>> open;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const MethodSummary& s) { return s.method == r.method; });
    std::size_t i = static_cast<std::size_t>(it - out.begin());
    if (it == out.end()) {
      out.push_back(MethodSummary{r.method});
      compound.emplace_back();
      open.emplace_back();
    }
    compound[i].push_back(r.miou_compound);
    open[i].push_back(r.miou_open);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].runs = static_cast<int>(compound[i].size());
    out[i].mean_compound = mean_of(compound[i]);
    out[i].std_compound = sample_std(compound[i]);
    out[i].mean_open = mean_of(open[i]);
    out[i].std_open = sample_std(open[i]);
  }
  return out;
}

ComparisonReport run_comparison(const ExperimentConfig& config,
                                const std::vector<Method>& methods,
                                const std::vector<std::uint64_t>& seeds,
                                const std::function<void(const ComparisonRow&)>& on_row,
                                int jobs) {
  config.validate();
  const CompoundBenchmark benchmark = make_compound_benchmark(config.benchmark);
  return run_comparison(config, benchmark, methods, seeds, on_row, jobs);
}

ComparisonReport run_comparison(const ExperimentConfig& config,
                                const CompoundBenchmark& benchmark,
                                const std::vector<Method>& methods,
                                const std::vector<std::uint64_t>& seeds,
                                const std::function<void(const ComparisonRow&)>& on_row,
                                int jobs) {
  if (methods.empty()) throw ConfigError("methods: at least one method required");
  if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
  ComparisonReport report;
  report.config_hash = config_hash(config);
  report.seeds = seeds;
  report.num_classes = benchmark.config().num_classes;
  for (Method m : methods) {
    std::vector<ComparisonRow> rows(seeds.size());
    std::vector<char> done(seeds.size(), 0);
    std::exception_ptr failure;
    try {
      parallel_for(seeds.size(), jobs, [&](std::size_t i) {
        rows[i] = run_one(config, benchmark, m, seeds[i]);
        done[i] = 1;
      });
    } catch (...) {
      failure = std::current_exception();
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!done[i]) break;
      report.rows.push_back(rows[i]);
      if (on_row) on_row(rows[i]);
    }
    if (failure) std::rethrow_exception(failure);
  }
  report.summary = summarize(report.rows);
  return report;
}

std::string sweep_point_label(const std::vector<int>& point) {
  std::string out;
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (i) out += "/";
    out += std::to_string(point[i]);
  }
  return out;
}

const SweepRow& SweepReport::aggregate_for(const std::string& value) const {
  for (const auto& r : rows) {
    if (!r.seed && r.value == value) return r;
  }
  throw InvalidArgument("sweep report has no point '" + value + "'");
}

SweepReport run_sweep(const ExperimentConfig& config,
                      const std::vector<std::uint64_t>& seeds, int jobs) {
  config.validate();
  if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
  const CompoundBenchmark benchmark = make_compound_benchmark(config.benchmark);
  SweepReport report;
  report.config_hash = config_hash(config);
  report.axis = sweep_axis_name(config.sweep.axis);
  report.seeds = seeds;
  for (const auto& point : config.sweep.values) {
    ExperimentConfig local = config;
    if (config.sweep.axis == SweepAxis::kMixedTargets) {
      local.trainer.mixing.mixed_targets = point[0];
    } else {
      local.trainer.mixing.grid_candidates = point;
    }
    local.trainer.validate();
    const ComparisonReport cmp =
        run_comparison(local, benchmark, {Method::kSCMix}, seeds, {}, jobs);
    const std::string label = sweep_point_label(point);
    for (const auto& row : cmp.rows) {
      report.rows.push_back(SweepRow{label, row.seed, row.miou_compound, row.miou_open});
    }
    const MethodSummary& s = cmp.summary.front();
    report.rows.push_back(SweepRow{label, std::nullopt, s.mean_compound, s.mean_open});
  }
  return report;
}

ToyInstance make_toy_instance(const EnumerateConfig& config, RngStream stream) {
  config.validate();
  const int h = config.height;
  const int w = config.width;
  const auto n = static_cast<std::size_t>(h) * w;
  auto random_image = [&] {
    std::vector<float> v(n * 3);
    for (auto& x : v) x = static_cast<float>(stream.next_unit());
    return ImageTensor(h, w, std::move(v));
  };
  auto random_labels = [&] {
    std::vector<std::uint16_t> v(n);
    for (auto& x : v) x = static_cast<std::uint16_t>(stream.uniform_int(0, config.num_classes - 1));
    return LabelMap(h, w, config.num_classes, std::move(v));
  };
  ImageTensor image = random_image();
  LabelMap labels = random_labels();
  ToyInstance out{LabeledImage(std::move(image), std::move(labels)), {}};
  for (int t = 0; t < config.targets; ++t) {
    ImageTensor timg = random_image();
    const LabelMap pseudo = random_labels();
    const auto conf = static_cast<float>(stream.uniform_int(1, 4)) / 4.0f;
    out.targets.push_back(TargetTriple{std::move(timg), one_hot_encode(pseudo, config.num_classes), conf});
  }
  return out;
}

ReachabilityResult check_reachability(const ToyInstance& instance,
                                      const EnumerateConfig& config) {
  MixParams params;
  params.mixed_targets = config.mixed_targets;
  params.grid_candidates = config.grid_candidates;
  const std::span<const TargetTriple> mixed(instance.targets.data(),
                                            static_cast<std::size_t>(config.mixed_targets));
  const ReachableSet classmix =
      enumerate_reachable(instance.source, instance.targets, params, Mixer::kClassMix);
  const ReachableSet scmix_set =
      enumerate_reachable(instance.source, mixed, params, Mixer::kSCMix);
  ReachabilityResult r;
  r.classmix_size = classmix.size();
  r.scmix_size = scmix_set.size();
  for (const auto& s : classmix) {
    if (!scmix_set.count(s)) ++r.violations;
  }
  r.strict = r.violations == 0 && scmix_set.size() > classmix.size();
  return r;
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "# config_hash=" << report.config_hash << "\n";
  out << "method,seed,miou_compound,miou_open";
  for (int c = 0; c < report.num_classes; ++c) out << ",iou_class_" << c;
  out << "\n";
  for (const auto& r : report.rows) {
    out << r.method << "," << r.seed << "," << format_metric(r.miou_compound) << ","
        << format_metric(r.miou_open);
    for (const auto& v : r.per_class) out << "," << (v ? format_metric(*v) : "");
    out << "\n";
  }
  for (const auto& s : report.summary) {
    out << s.method << ",mean," << format_metric(s.mean_compound) << ","
        << format_metric(s.mean_open) << "\n";
    out << s.method << ",std," << format_metric(s.std_compound) << ","
        << format_metric(s.std_open) << "\n";
  }
  return out.str();
}

std::string comparison_json(const ComparisonReport& report) {
  json j;
  j["config_hash"] = report.config_hash;
  j["seeds"] = report.seeds;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json per_class = json::array();
    for (const auto& v : r.per_class) per_class.push_back(v ? json(*v) : json(nullptr));
    j["rows"].push_back({{"method", r.method},
                         {"seed", r.seed},
                         {"miou_compound", r.miou_compound},
                         {"miou_open", r.miou_open},
                         {"per_class_iou_compound", per_class}});
  }
  j["summary"] = json::array();
  for (const auto& s : report.summary) {
    j["summary"].push_back({{"method", s.method},
                            {"runs", s.runs},
                            {"mean_compound", s.mean_compound},
                            {"std_compound", s.std_compound},
                            {"mean_open", s.mean_open},
                            {"std_open", s.std_open}});
  }
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "# config_hash=" << report.config_hash << "\n";
  out << "axis,value,seed,miou_compound,miou_open\n";
  for (const auto& r : report.rows) {
    out << report.axis << "," << r.value << ","
        << (r.seed ? std::to_string(*r.seed) : std::string("mean")) << ","
        << format_metric(r.miou_compound) << "," << format_metric(r.miou_open) << "\n";
  }
  return out.str();
}

std::string sweep_json(const SweepReport& report) {
  json j;
  j["config_hash"] = report.config_hash;
  j["axis"] = report.axis;
  j["seeds"] = report.seeds;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"value", r.value},
                         {"seed", r.seed ? json(*r.seed) : json("mean")},
                         {"miou_compound", r.miou_compound},
                         {"miou_open", r.miou_open}});
  }
  return j.dump(2) + "\n";
}

}  // namespace scmix
