#include "scmix/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "scmix/experiment.hpp"
#include "scmix/png_io.hpp"
#include "scmix/serialize.hpp"

namespace scmix {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out;
  std::string methods;
  std::string model;
  std::string split = "compound";
  std::string axis;
  std::string values;
  std::string data;
  int jobs = 1;
};

ExperimentConfig load_config(const CommonArgs& args,
                             const std::set<std::string>& required = {}) {
  ExperimentConfig cfg = args.config.empty()
                             ? parse_config_text("", required)
                             : parse_config_file(args.config, required);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.seeds.empty()) cfg.seeds = parse_seed_list(args.seeds);
  if (!args.out.empty()) cfg.output_dir = args.out;
  cfg.validate();
  return cfg;
}

fs::path resolve(const ExperimentConfig& cfg, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || cfg.base_dir.empty()) return p;
  return cfg.base_dir / p;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw ConfigError("methods: empty entry in '" + text + "'");
    out.push_back(parse_method(item));
  }
  if (out.empty()) throw ConfigError("methods: at least one method required");
  return out;
}

json domain_json(const DomainSpec& d) {
  return {{"brightness_shift", d.brightness_shift},
          {"hue_rotation", d.hue_rotation},
          {"contrast_scale", d.contrast_scale},
          {"noise_sigma", d.noise_sigma},
          {"texture_frequency", d.texture_frequency}};
}

std::string indexed(std::size_t i, const char* suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu_%s.png", i, suffix);
  return buf;
}

json provenance_header(const ExperimentConfig& cfg, const std::string& command) {
  return {{"command", command}, {"config_hash", config_hash(cfg)}, {"seed", cfg.seed}};
}

int cmd_gen_data(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const fs::path out(cfg.output_dir);
  const CompoundBenchmark bench = make_compound_benchmark(cfg.benchmark);
  json manifest = provenance_header(cfg, "gen-data");
  manifest["benchmark_seed"] = cfg.benchmark.seed;
  manifest["height"] = cfg.benchmark.height;
  manifest["width"] = cfg.benchmark.width;
  manifest["classes"] = cfg.benchmark.num_classes;
  manifest["splits"] = json::array();
  auto emit = [&](const Split& split, const DomainSpec& spec, const char* role) {
    json entry = {{"name", split.name}, {"role", role}, {"domain_id", split.domain_id},
                  {"spec", domain_json(spec)}, {"samples", split.samples.size()}};
    entry["images"] = json::array();
    entry["labels"] = json::array();
    for (std::size_t i = 0; i < split.samples.size(); ++i) {
      const std::string img = split.name + "/" + indexed(i, "image");
      const std::string lbl = split.name + "/" + indexed(i, "label");
      write_png_rgb(out / img, split.samples[i].image);
      write_png_labels(out / lbl, split.samples[i].labels);
      entry["images"].push_back(img);
      entry["labels"].push_back(lbl);
    }
    manifest["splits"].push_back(entry);
  };
  emit(bench.source(), cfg.benchmark.source, "source");
  for (std::size_t i = 0; i < bench.target_count(); ++i) {
    emit(bench.target_split_for_evaluation(i), cfg.benchmark.targets[i], "target");
  }
  emit(bench.open(), cfg.benchmark.open, "open");
  manifest["warnings"] = bench.warnings();
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  write_text(out / "config.txt", emit_config_without_output(cfg));
  for (const auto& w : bench.warnings()) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << bench.split_count() << " splits to " << out.string() << "\n";
  return kExitOk;
}

std::vector<std::uint8_t> heatmap(const WeightMap& w) {
  std::vector<std::uint8_t> rgb;
  for (float v : w.values()) {
    rgb.push_back(to_u8(v));
    rgb.push_back(to_u8(0.5f * v));
    rgb.push_back(to_u8(1.0f - v));
  }
  return rgb;
}

std::vector<std::uint8_t> provenance_colors(const ProvenanceMap& p) {
  std::vector<std::uint8_t> rgb;
  for (std::uint16_t v : p.values()) {
    const auto c = v == 0 ? std::array<std::uint8_t, 3>{200, 200, 200}
                          : label_color(static_cast<std::uint16_t>(8 + v));
    rgb.insert(rgb.end(), c.begin(), c.end());
  }
  return rgb;
}

std::vector<std::uint8_t> image_rgb(const ImageTensor& img) {
  std::vector<std::uint8_t> rgb;
  for (float v : img.values()) rgb.push_back(to_u8(v));
  return rgb;
}

std::vector<std::uint8_t> label_rgb(const LabelMap& labels) {
  std::vector<std::uint8_t> rgb;
  for (std::uint16_t v : labels.values()) {
    const auto c = label_color(v);
    rgb.insert(rgb.end(), c.begin(), c.end());
  }
  return rgb;
}

// Side-by-side panels separated by a 2-pixel white gutter.
std::vector<std::uint8_t> concat_panels(int h, int w,
                                        const std::vector<std::vector<std::uint8_t>>& panels,
                                        int* total_width) {
  const int gap = 2;
  const int n = static_cast<int>(panels.size());
  const int tw = n * w + (n - 1) * gap;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(h) * tw * 3, 255);
  for (int k = 0; k < n; ++k) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) {
          out[(static_cast<std::size_t>(y) * tw + k * (w + gap) + x) * 3 + c] =
              panels[k][(static_cast<std::size_t>(y) * w + x) * 3 + c];
        }
      }
    }
  }
  *total_width = tw;
  return out;
}

int cmd_augment(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args, {"inputs"});
  const AugmentInputs& in = cfg.inputs;
  if (in.source_image.empty() || in.source_label.empty()) {
    throw ConfigError("inputs.source_image/source_label: both are required");
  }
  if (in.target_images.empty()) throw ConfigError("inputs.target_images: at least one required");
  if (args.model.empty() && in.target_probs.size() != in.target_images.size()) {
    throw ConfigError("inputs.target_probs: need one probability file per target image (" +
                      std::to_string(in.target_images.size()) + ") or --model");
  }
  const Mixer mixer = cfg.trainer.mixing.baseline;
  if (mixer == Mixer::kNone) throw ConfigError("mixing.baseline: augment needs a mixer");
  if (mixer == Mixer::kSCMix &&
      static_cast<std::size_t>(cfg.trainer.mixing.mixed_targets) != in.target_images.size()) {
    throw ConfigError("mixing.mixed_targets: must equal the number of inputs.target_images (" +
                      std::to_string(in.target_images.size()) + ")");
  }
  const int classes = cfg.benchmark.num_classes;
  const LabeledImage source(read_png_rgb(resolve(cfg, in.source_image)),
                            read_png_labels(resolve(cfg, in.source_label), classes));
  std::optional<LinearSegModel> model;
  if (!args.model.empty()) model = deserialize_model(read_file_bytes(args.model));

  std::vector<TargetTriple> targets;
  for (std::size_t i = 0; i < in.target_images.size(); ++i) {
    ImageTensor image = read_png_rgb(resolve(cfg, in.target_images[i]));
    const ProbMap probs =
        model ? predict_probs(*model, image)
              : deserialize_as<ProbMap>(read_file_bytes(resolve(cfg, in.target_probs[i])));
    if (probs.num_classes() != classes) {
      throw ShapeMismatch("target " + std::to_string(i + 1) + " probabilities have " +
                          std::to_string(probs.num_classes()) + " classes, expected " +
                          std::to_string(classes));
    }
    require_same_extent(probs, image, "target probabilities");
    targets.push_back(TargetTriple{
        std::move(image), pseudo_label(probs),
        static_cast<float>(confidence_weight(probs, cfg.trainer.threshold))});
  }

  const RngStream base(cfg.seed, 0, StreamPurpose::kGridDims);
  MixedSample mixed;
  switch (mixer) {
    case Mixer::kSCMix: mixed = scmix(source, targets, cfg.trainer.mixing, base); break;
    case Mixer::kClassMix: mixed = classmix_single(source, targets[0], base); break;
    case Mixer::kCutMix: mixed = cutmix_single(source, targets[0], base); break;
    case Mixer::kNone: break;
  }
  if (in.apply_post_augment) mixed.image = post_augment(mixed.image, cfg.trainer.augment, base);

  const fs::path out(cfg.output_dir);
  const int h = mixed.image.height();
  const int w = mixed.image.width();
  const LabelMap labels = mixed.labels.to_label_map();
  write_png_rgb(out / "mixed_image.png", mixed.image);
  write_png_labels(out / "mixed_label.png", labels);
  write_png_rgb8(out / "mixed_weights.png", h, w, heatmap(mixed.weights));
  write_png_rgb8(out / "mixed_provenance.png", h, w, provenance_colors(mixed.provenance));
  int tw = 0;
  const auto panel = concat_panels(h, w,
                                   {image_rgb(mixed.image), label_rgb(labels),
                                    heatmap(mixed.weights), provenance_colors(mixed.provenance)},
                                   &tw);
  write_png_rgb8(out / "panel.png", h, tw, panel);
  write_file_bytes(out / "mixed_image.scmt", serialize_tensor(mixed.image));
  write_file_bytes(out / "mixed_labels.scmt", serialize_tensor(mixed.labels));
  write_file_bytes(out / "mixed_weights.scmt", serialize_tensor(mixed.weights));

  json summary = provenance_header(cfg, "augment");
  summary["mixer"] = mixer_name(mixer);
  summary["post_augment"] = in.apply_post_augment;
  std::vector<std::size_t> counts(targets.size() + 1, 0);
  for (std::uint16_t v : mixed.provenance.values()) ++counts[v];
  summary["provenance_pixel_counts"] = counts;
  json conf = json::array();
  for (const auto& t : targets) conf.push_back(t.confidence);
  summary["target_confidence"] = conf;
  write_text(out / "augment.json", summary.dump(2) + "\n");
  std::cout << "wrote mixed sample panels to " << out.string() << "\n";
  return kExitOk;
}

std::string optional_metric(const std::optional<double>& v) {
  return v ? format_metric(*v) : std::string();
}

int cmd_train(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  if (!args.methods.empty()) {
    const auto methods = parse_methods(args.methods);
    if (methods.size() != 1) throw ConfigError("methods: train takes exactly one method");
    cfg.trainer.method = methods[0];
  }
  TrainConfig tc = cfg.trainer;
  tc.seed = cfg.seed;
  const CompoundBenchmark bench = make_compound_benchmark(cfg.benchmark);
  const TrainResult result = train(tc, bench);

  const fs::path out(cfg.output_dir);
  std::ostringstream csv;
  csv << "# config_hash=" << config_hash(cfg) << " seed=" << cfg.seed
      << " method=" << method_name(tc.method) << "\n";
  csv << "iteration,phase,loss_ce,loss_wce,miou_compound,miou_open\n";
  for (const auto& row : result.history) {
    csv << row.iteration << "," << (row.self_training ? "self-training" : "pretrain") << ","
        << format_metric(row.loss.source_ce) << "," << format_metric(row.loss.target_wce) << ","
        << optional_metric(row.miou_compound) << "," << optional_metric(row.miou_open) << "\n";
  }
  write_text(out / "history.csv", csv.str());
  write_file_bytes(out / "model.scmt", serialize_model(result.student));

  const IoUReport compound = evaluate_compound_miou(result.student, bench);
  const IoUReport open = evaluate_miou(result.student, bench.open());
  json summary = provenance_header(cfg, "train");
  summary["method"] = method_name(tc.method);
  summary["steps"] = result.history.size();
  summary["miou_compound"] = compound.mean;
  summary["miou_open"] = open.mean;
  write_text(out / "train.json", summary.dump(2) + "\n");
  std::cout << method_name(tc.method) << " seed " << cfg.seed << ": compound mIoU "
            << format_metric(compound.mean) << ", open mIoU " << format_metric(open.mean)
            << "\n";
  return kExitOk;
}

int cmd_eval(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const LinearSegModel model = deserialize_model(read_file_bytes(args.model));
  if (model.num_classes != cfg.benchmark.num_classes) {
    throw ShapeMismatch("model has " + std::to_string(model.num_classes) +
                        " classes, benchmark has " +
                        std::to_string(cfg.benchmark.num_classes));
  }
  const CompoundBenchmark bench = make_compound_benchmark(cfg.benchmark);
  IoUReport report;
  if (args.split == "compound") {
    report = evaluate_compound_miou(model, bench);
  } else if (args.split == "source") {
    report = evaluate_miou(model, bench.source());
  } else if (args.split == "open") {
    report = evaluate_miou(model, bench.open());
  } else {
    bool found = false;
    for (std::size_t i = 0; i < bench.target_count(); ++i) {
      if (bench.target_split_for_evaluation(i).name == args.split) {
        report = evaluate_miou(model, bench.target_split_for_evaluation(i));
        found = true;
      }
    }
    if (!found) {
      throw ConfigError("split: expected source, compound, open or target_1..target_" +
                        std::to_string(bench.target_count()) + ", got '" + args.split + "'");
    }
  }
  const fs::path out(cfg.output_dir);
  std::ostringstream csv;
  csv << "# config_hash=" << config_hash(cfg) << " split=" << args.split << "\n";
  csv << "class,iou,true_positive,false_positive,false_negative\n";
  json per_class = json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    csv << c << "," << optional_metric(report.per_class[c]) << ","
        << report.true_positive[c] << "," << report.false_positive[c] << ","
        << report.false_negative[c] << "\n";
    per_class.push_back(report.per_class[c] ? json(*report.per_class[c]) : json(nullptr));
  }
  write_text(out / "iou.csv", csv.str());
  json summary = provenance_header(cfg, "eval");
  summary["split"] = args.split;
  summary["miou"] = report.mean;
  summary["per_class_iou"] = per_class;
  write_text(out / "eval.json", summary.dump(2) + "\n");
  std::cout << args.split << " mIoU " << format_metric(report.mean) << "\n";
  return kExitOk;
}

int cmd_compare(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const auto methods = args.methods.empty() ? all_methods() : parse_methods(args.methods);
  const fs::path out(cfg.output_dir);
  std::vector<ComparisonRow> done;
  ComparisonReport report;
  try {
    report = run_comparison(cfg, methods, cfg.seeds,
                            [&](const ComparisonRow& r) {
                              done.push_back(r);
                              std::cout << r.method << " seed " << r.seed << ": compound "
                                        << format_metric(r.miou_compound) << ", open "
                                        << format_metric(r.miou_open) << std::endl;
                            },
                            args.jobs);
  } catch (...) {
    ComparisonReport partial;
    partial.config_hash = config_hash(cfg);
    partial.seeds = cfg.seeds;
    partial.num_classes = cfg.benchmark.num_classes;
    partial.rows = done;
    partial.summary = summarize(done);
    write_text(out / "comparison.partial.csv", comparison_csv(partial));
    throw;
  }
  write_text(out / "comparison.csv", comparison_csv(report));
  write_text(out / "comparison.json", comparison_json(report));
  for (const auto& s : report.summary) {
    std::cout << s.method << " mean: compound " << format_metric(s.mean_compound) << " +- "
              << format_metric(s.std_compound) << ", open " << format_metric(s.mean_open)
              << " +- " << format_metric(s.std_open) << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  if (!args.axis.empty()) cfg.sweep.axis = parse_sweep_axis(args.axis);
  if (!args.values.empty()) {
    ExperimentConfig scratch =
        parse_config_text("sweep.axis = " + std::string(sweep_axis_name(cfg.sweep.axis)) +
                          "\nsweep.values = " + args.values + "\n");
    cfg.sweep.values = scratch.sweep.values;
  } else if (!args.axis.empty() && cfg.sweep.axis == SweepAxis::kGridCandidates &&
             cfg.sweep.values == SweepConfig{}.values) {
    cfg.sweep.values = {{1, 2}, {2, 4}, {4, 8}, {8, 16}, {2, 4, 8}};
  }
  cfg.validate();
  const SweepReport report = run_sweep(cfg, cfg.seeds, args.jobs);
  const fs::path out(cfg.output_dir);
  write_text(out / "sweep.csv", sweep_csv(report));
  write_text(out / "sweep.json", sweep_json(report));
  for (const auto& r : report.rows) {
    if (!r.seed) {
      std::cout << report.axis << "=" << r.value << " mean: compound "
                << format_metric(r.miou_compound) << ", open " << format_metric(r.miou_open)
                << "\n";
    }
  }
  return kExitOk;
}

std::vector<DomainSampleSet> sets_from_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw FormatError("cannot read " + (dir / "manifest.json").string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw FormatError("manifest.json: " + std::string(e.what()));
  }
  std::vector<DomainSampleSet> sets;
  for (const auto& split : manifest.at("splits")) {
    const std::string role = split.at("role");
    if (role == "open") continue;
    std::vector<ImageTensor> images;
    for (const auto& p : split.at("images")) {
      images.push_back(read_png_rgb(dir / p.get<std::string>()));
    }
    std::vector<const ImageTensor*> ptrs;
    for (const auto& img : images) ptrs.push_back(&img);
    sets.push_back(describe_images(ptrs, split.at("name").get<std::string>()));
  }
  if (sets.size() < 2) throw FormatError("manifest lists no target splits");
  return sets;
}

int cmd_discrepancy(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  std::vector<DomainSampleSet> sets;
  if (!args.data.empty()) {
    sets = sets_from_manifest(args.data);
  } else {
    const CompoundBenchmark bench = make_compound_benchmark(cfg.benchmark);
    auto describe = [](const Split& split) {
      std::vector<const ImageTensor*> ptrs;
      for (const auto& s : split.samples) ptrs.push_back(&s.image);
      return describe_images(ptrs, split.name);
    };
    sets.push_back(describe(bench.source()));
    for (std::size_t i = 0; i < bench.target_count(); ++i) {
      sets.push_back(describe(bench.target_split_for_evaluation(i)));
    }
  }
  const std::span<const DomainSampleSet> subs(sets.data() + 1, sets.size() - 1);
  const BoundReport report = ocda_bound_terms(
      sets[0], subs, RngStream(cfg.seed, 0, StreamPurpose::kDiscrepancy), cfg.discrepancy);

  const fs::path out(cfg.output_dir);
  std::ostringstream csv;
  csv << "# config_hash=" << config_hash(cfg) << " seed=" << cfg.seed
      << " estimator=linear-classifier proxy\n";
  csv << "i,j,estimate\n";
  json terms = json::array();
  for (const auto& t : report.terms) {
    csv << t.first << "," << t.last << "," << format_metric(t.estimate) << "\n";
    terms.push_back({{"i", t.first}, {"j", t.last}, {"estimate", t.estimate}});
  }
  write_text(out / "bound.csv", csv.str());
  json summary = provenance_header(cfg, "discrepancy");
  summary["estimator"] =
      "proxy H-delta-H distance from a linear logistic domain classifier; an approximation, "
      "not the supremum over the hypothesis class";
  summary["source"] = sets[0].tag;
  json names = json::array();
  for (const auto& s : subs) names.push_back(s.tag);
  summary["subdomains"] = names;
  summary["terms"] = terms;
  summary["conventional_sum"] = report.conventional_sum;
  summary["full_sum"] = report.full_sum;
  write_text(out / "bound.json", summary.dump(2) + "\n");
  std::cout << "conventional sum " << format_metric(report.conventional_sum) << ", full sum "
            << format_metric(report.full_sum) << " over " << report.terms.size()
            << " terms\n";
  return kExitOk;
}

int cmd_enumerate(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const EnumerateConfig& ec = cfg.enumerate;
  json summary = provenance_header(cfg, "enumerate-reachable");
  summary["height"] = ec.height;
  summary["width"] = ec.width;
  summary["classes"] = ec.num_classes;
  summary["mixed_targets"] = ec.mixed_targets;
  summary["grid_candidates"] = ec.grid_candidates;
  json rows = json::array();
  std::size_t violations = 0;
  int strict = 0;
  for (int i = 0; i < ec.instances; ++i) {
    const ToyInstance inst = make_toy_instance(
        ec, RngStream(cfg.seed, static_cast<std::uint64_t>(i), StreamPurpose::kDataSampling));
    const ReachabilityResult r = check_reachability(inst, ec);
    violations += r.violations;
    strict += r.strict ? 1 : 0;
    rows.push_back({{"instance", i},
                    {"classmix_size", r.classmix_size},
                    {"scmix_size", r.scmix_size},
                    {"violations", r.violations},
                    {"strict", r.strict}});
  }
  summary["instances"] = rows;
  summary["total_violations"] = violations;
  summary["strict_instances"] = strict;
  summary["subset_holds"] = violations == 0;
  write_text(fs::path(cfg.output_dir) / "reachable.json", summary.dump(2) + "\n");
  std::cout << ec.instances << " instances, " << violations << " violations, " << strict
            << " strict\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Compound-domain mixing lab: data generation, mixing, training and analysis"};
  app.require_subcommand(1);
  CommonArgs args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "Config file (defaults when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "Experiment seed");
    sub->add_option("--out", args.out, "Output directory");
  };
  auto add_multi = [&](CLI::App* sub) {
    sub->add_option("--seeds", args.seeds, "Comma-separated seed list");
    sub->add_option("--jobs", args.jobs, "Worker threads per method")->check(CLI::Range(1, 256));
  };

  struct Entry {
    CLI::App* app;
    int (*run)(const CommonArgs&);
  };
  std::vector<Entry> entries;

  auto* gen = app.add_subcommand("gen-data", "Render the synthetic benchmark to PNG files");
  add_common(gen);
  entries.push_back({gen, cmd_gen_data});

  auto* aug = app.add_subcommand("augment", "Mix one source sample with target samples");
  add_common(aug);
  aug->add_option("--model", args.model, "Teacher model producing the target probabilities")
      ->check(CLI::ExistingFile);
  entries.push_back({aug, cmd_augment});

  auto* tr = app.add_subcommand("train", "Train one method and write history and model");
  add_common(tr);
  tr->add_option("--methods", args.methods, "Method to train (one of the comparison methods)");
  entries.push_back({tr, cmd_train});

  auto* ev = app.add_subcommand("eval", "Per-class IoU of a model on one split");
  add_common(ev);
  ev->add_option("--model", args.model, "Model file")->required()->check(CLI::ExistingFile);
  ev->add_option("--split", args.split, "source, compound, open or target_N");
  entries.push_back({ev, cmd_eval});

  auto* cmp = app.add_subcommand("compare", "Train and evaluate several methods over seeds");
  add_common(cmp);
  add_multi(cmp);
  cmp->add_option("--methods", args.methods, "Comma-separated method list");
  entries.push_back({cmp, cmd_compare});

  auto* sw = app.add_subcommand("sweep", "scmix-st over N_c or grid candidate values");
  add_common(sw);
  add_multi(sw);
  sw->add_option("--axis", args.axis, "nc or grid");
  sw->add_option("--values", args.values, "Points separated by ';', e.g. 1;2;3 or 2,4;4,8");
  entries.push_back({sw, cmd_sweep});

  auto* dis = app.add_subcommand("discrepancy", "Source versus joint-subdomain distance terms");
  add_common(dis);
  dis->add_option("--data", args.data, "Directory written by gen-data")
      ->check(CLI::ExistingDirectory);
  entries.push_back({dis, cmd_discrepancy});

  auto* en = app.add_subcommand("enumerate-reachable",
                                "Exhaustive ClassMix versus SCMix output sets on toy inputs");
  add_common(en);
  entries.push_back({en, cmd_enumerate});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    for (const auto& entry : entries) {
      if (entry.app->parsed()) return entry.run(args);
    }
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InvalidLabel& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ShapeMismatch& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const FormatError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InvalidArgument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace scmix
