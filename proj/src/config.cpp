#include "scmix/config.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace scmix {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

int parse_i32(const std::string& key, const std::string& v) {
  const auto x = parse_int(key, v);
  if (x < -2147483647 || x > 2147483647) throw ConfigError(key + ": integer out of range");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_ints(const std::vector<int>& v) {
  std::vector<std::string> parts;
  for (int x : v) parts.push_back(std::to_string(x));
  return join(parts, ",");
}

std::vector<std::vector<int>> parse_points(const std::string& key, const std::string& v) {
  std::vector<std::vector<int>> out;
  for (const auto& group : split(v, ';')) {
    if (group.empty()) continue;
    out.push_back(parse_int_list(group, key));
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

void add_domain_keys(std::map<std::string, Setter>& table, const std::string& prefix,
                     std::function<DomainSpec&(ExperimentConfig&)> get) {
  table[prefix + ".brightness_shift"] = [get](ExperimentConfig& c, const std::string& k,
                                              const std::string& v) {
    get(c).brightness_shift = parse_double(k, v);
  };
  table[prefix + ".hue_rotation"] = [get](ExperimentConfig& c, const std::string& k,
                                          const std::string& v) {
    get(c).hue_rotation = parse_double(k, v);
  };
  table[prefix + ".contrast_scale"] = [get](ExperimentConfig& c, const std::string& k,
                                            const std::string& v) {
    get(c).contrast_scale = parse_double(k, v);
  };
  table[prefix + ".noise_sigma"] = [get](ExperimentConfig& c, const std::string& k,
                                         const std::string& v) {
    get(c).noise_sigma = parse_double(k, v);
  };
  table[prefix + ".texture_frequency"] = [get](ExperimentConfig& c, const std::string& k,
                                               const std::string& v) {
    get(c).texture_frequency = parse_double(k, v);
  };
}

#define SCMIX_KEY(name, expr)                                                 \
  table[name] = [](ExperimentConfig& c, const std::string& k,                 \
                   const std::string& v) {                                    \
    (void)k;                                                                  \
    expr;                                                                     \
  }

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> table;
    SCMIX_KEY("experiment.seed", c.seed = parse_u64(k, v));
    SCMIX_KEY("experiment.seeds", c.seeds = parse_seed_list(v));
    SCMIX_KEY("experiment.out", c.output_dir = v);

    SCMIX_KEY("benchmark.height", c.benchmark.height = parse_i32(k, v));
    SCMIX_KEY("benchmark.width", c.benchmark.width = parse_i32(k, v));
    SCMIX_KEY("benchmark.classes", c.benchmark.num_classes = parse_i32(k, v));
    SCMIX_KEY("benchmark.samples_per_split",
              c.benchmark.samples_per_split = parse_i32(k, v));
    SCMIX_KEY("benchmark.seed", c.benchmark.seed = parse_u64(k, v));
    add_domain_keys(table, "benchmark.source",
                    [](ExperimentConfig& c) -> DomainSpec& { return c.benchmark.source; });
    add_domain_keys(table, "benchmark.open",
                    [](ExperimentConfig& c) -> DomainSpec& { return c.benchmark.open; });

    SCMIX_KEY("trainer.learning_rate", c.trainer.learning_rate = parse_double(k, v));
    SCMIX_KEY("trainer.iterations", c.trainer.iterations = parse_i32(k, v));
    SCMIX_KEY("trainer.warmup_iterations", c.trainer.warmup_iterations = parse_i32(k, v));
    SCMIX_KEY("trainer.pretrain_iterations",
              c.trainer.pretrain_iterations = parse_i32(k, v));
    SCMIX_KEY("trainer.batch_size", c.trainer.batch_size = parse_i32(k, v));
    SCMIX_KEY("trainer.momentum", c.trainer.momentum = parse_double(k, v));
    SCMIX_KEY("trainer.threshold", c.trainer.threshold = parse_double(k, v));
    SCMIX_KEY("trainer.eval_interval", c.trainer.eval_interval = parse_i32(k, v));
    SCMIX_KEY("trainer.method", c.trainer.method = parse_method(v));

    SCMIX_KEY("mixing.mixed_targets", c.trainer.mixing.mixed_targets = parse_i32(k, v));
    SCMIX_KEY("mixing.grid_candidates",
              c.trainer.mixing.grid_candidates = parse_int_list(v, k));
    SCMIX_KEY("mixing.baseline", c.trainer.mixing.baseline = parse_mixer(v));

    SCMIX_KEY("augment.jitter_scale", c.trainer.augment.jitter_scale = parse_double(k, v));
    SCMIX_KEY("augment.jitter_brightness",
              c.trainer.augment.jitter_brightness = parse_double(k, v));
    SCMIX_KEY("augment.blur_probability",
              c.trainer.augment.blur_probability = parse_double(k, v));
    SCMIX_KEY("augment.blur_sigma_min",
              c.trainer.augment.blur_sigma_min = parse_double(k, v));
    SCMIX_KEY("augment.blur_sigma_max",
              c.trainer.augment.blur_sigma_max = parse_double(k, v));

    SCMIX_KEY("discrepancy.repeats", c.discrepancy.repeats = parse_i32(k, v));
    SCMIX_KEY("discrepancy.train_fraction",
              c.discrepancy.train_fraction = parse_double(k, v));
    SCMIX_KEY("discrepancy.epochs", c.discrepancy.epochs = parse_i32(k, v));
    SCMIX_KEY("discrepancy.learning_rate",
              c.discrepancy.learning_rate = parse_double(k, v));
    SCMIX_KEY("discrepancy.l2", c.discrepancy.l2 = parse_double(k, v));
    SCMIX_KEY("discrepancy.min_samples",
              c.discrepancy.min_samples = static_cast<std::size_t>(parse_u64(k, v)));

    SCMIX_KEY("sweep.axis", c.sweep.axis = parse_sweep_axis(v));
    SCMIX_KEY("sweep.values", c.sweep.values = parse_points(k, v));

    SCMIX_KEY("enumerate.height", c.enumerate.height = parse_i32(k, v));
    SCMIX_KEY("enumerate.width", c.enumerate.width = parse_i32(k, v));
    SCMIX_KEY("enumerate.classes", c.enumerate.num_classes = parse_i32(k, v));
    SCMIX_KEY("enumerate.targets", c.enumerate.targets = parse_i32(k, v));
    SCMIX_KEY("enumerate.instances", c.enumerate.instances = parse_i32(k, v));
    SCMIX_KEY("enumerate.mixed_targets", c.enumerate.mixed_targets = parse_i32(k, v));
    SCMIX_KEY("enumerate.grid_candidates",
              c.enumerate.grid_candidates = parse_int_list(v, k));

    SCMIX_KEY("inputs.source_image", c.inputs.source_image = v);
    SCMIX_KEY("inputs.source_label", c.inputs.source_label = v);
    SCMIX_KEY("inputs.target_images", c.inputs.target_images = v.empty() ? std::vector<std::string>{} : split(v, ','));
    SCMIX_KEY("inputs.target_probs", c.inputs.target_probs = v.empty() ? std::vector<std::string>{} : split(v, ','));
    SCMIX_KEY("inputs.apply_post_augment",
              c.inputs.apply_post_augment = parse_bool(k, v));
    return table;
  }();
  return table;
}

#undef SCMIX_KEY

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s = {
      "experiment", "benchmark", "benchmark.source", "benchmark.open", "trainer",
      "mixing", "augment", "discrepancy", "sweep", "enumerate", "inputs"};
  return s;
}

bool is_target_section(const std::string& s, int* index) {
  static const std::string prefix = "benchmark.target.";
  if (s.rfind(prefix, 0) != 0) return false;
  const std::string rest = s.substr(prefix.size());
  if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) return false;
  *index = std::stoi(rest);
  return true;
}

// Prefixes the key onto messages from shared parsers that do not know it.
void apply_setter(const Setter& setter, ExperimentConfig& cfg, const std::string& key,
                  const std::string& value) {
  try {
    setter(cfg, key, value);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(key, 0) == 0) throw;
    throw ConfigError(key + ": " + msg);
  } catch (const InvalidArgument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void emit_domain(std::ostringstream& out, const std::string& section, const DomainSpec& d) {
  out << "[" << section << "]\n"
      << "brightness_shift = " << fmt(d.brightness_shift) << "\n"
      << "hue_rotation = " << fmt(d.hue_rotation) << "\n"
      << "contrast_scale = " << fmt(d.contrast_scale) << "\n"
      << "noise_sigma = " << fmt(d.noise_sigma) << "\n"
      << "texture_frequency = " << fmt(d.texture_frequency) << "\n\n";
}

}  // namespace

const char* sweep_axis_name(SweepAxis axis) {
  return axis == SweepAxis::kMixedTargets ? "nc" : "grid";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "nc") return SweepAxis::kMixedTargets;
  if (name == "grid") return SweepAxis::kGridCandidates;
  throw ConfigError("sweep.axis: must be one of nc, grid; got '" + name + "'");
}

void SweepConfig::validate() const {
  if (values.empty()) throw ConfigError("sweep.values: at least one sweep point required");
  for (const auto& point : values) {
    if (axis == SweepAxis::kMixedTargets) {
      if (point.size() != 1 || point[0] < 1) {
        throw ConfigError("sweep.values: N_c points must be single integers >= 1");
      }
    } else {
      if (point.empty()) throw ConfigError("sweep.values: empty grid candidate set");
      for (int g : point) {
        if (g < 1) throw ConfigError("sweep.values: grid candidates must be >= 1");
      }
    }
  }
}

void EnumerateConfig::validate() const {
  if (height < 1 || width < 1) throw ConfigError("enumerate.height/width: must be >= 1");
  if (num_classes < 1 || num_classes > 16) {
    throw ConfigError("enumerate.classes: must satisfy 1 <= C <= 16");
  }
  if (targets < 1) throw ConfigError("enumerate.targets: must be >= 1");
  if (instances < 1) throw ConfigError("enumerate.instances: must be >= 1");
  if (mixed_targets < 1 || mixed_targets > targets) {
    throw ConfigError("enumerate.mixed_targets: must satisfy 1 <= N_c <= enumerate.targets");
  }
  if (grid_candidates.empty()) throw ConfigError("enumerate.grid_candidates: must be nonempty");
  for (int g : grid_candidates) {
    if (g < 1 || g > std::min(height, width)) {
      throw ConfigError("enumerate.grid_candidates: entries must lie in [1, min(H, W)]");
    }
  }
}

void ExperimentConfig::validate() const {
  benchmark.validate();
  trainer.validate();
  const int side = std::min(benchmark.height, benchmark.width);
  for (int g : trainer.mixing.grid_candidates) {
    if (g > side) {
      throw ConfigError("mixing.grid_candidates: entries must not exceed the image side " +
                        std::to_string(side));
    }
  }
  if (discrepancy.repeats < 1) throw ConfigError("discrepancy.repeats: must be >= 1");
  if (!(discrepancy.train_fraction > 0.0 && discrepancy.train_fraction < 1.0)) {
    throw ConfigError("discrepancy.train_fraction: must satisfy 0 < f < 1");
  }
  if (discrepancy.epochs < 1) throw ConfigError("discrepancy.epochs: must be >= 1");
  if (!(discrepancy.learning_rate > 0.0)) {
    throw ConfigError("discrepancy.learning_rate: must be > 0");
  }
  if (!(discrepancy.l2 >= 0.0)) throw ConfigError("discrepancy.l2: must be >= 0");
  if (discrepancy.min_samples < 4) throw ConfigError("discrepancy.min_samples: must be >= 4");
  sweep.validate();
  if (sweep.axis == SweepAxis::kGridCandidates) {
    for (const auto& point : sweep.values) {
      for (int g : point) {
        if (g > side) {
          throw ConfigError("sweep.values: grid candidates must not exceed the image side " +
                            std::to_string(side));
        }
      }
    }
  }
  enumerate.validate();
  if (seeds.empty()) throw ConfigError("experiment.seeds: at least one seed required");
  if (output_dir.empty()) throw ConfigError("experiment.out: must be nonempty");
}

bool same_settings(const ExperimentConfig& a, const ExperimentConfig& b) {
  return emit_config(a) == emit_config(b);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) throw ConfigError("seeds: empty entry in '" + text + "'");
    out.push_back(parse_u64("seeds", part));
  }
  if (out.empty()) throw ConfigError("seeds: at least one seed required");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) throw ConfigError(key + ": empty entry in '" + text + "'");
    out.push_back(parse_i32(key, part));
  }
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated integer list");
  return out;
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::set<std::string>& required_sections) {
  ExperimentConfig cfg;
  std::map<int, DomainSpec> targets;
  std::set<std::string> seen_keys;
  std::set<std::string> seen_sections;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  const auto& table = key_table();
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      int idx = 0;
      if (!known_sections().count(section) && !is_target_section(section, &idx)) {
        throw ConfigError(where + ": unknown section [" + section + "]");
      }
      seen_sections.insert(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string short_key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (short_key.empty()) throw ConfigError(where + ": empty key");
    const std::string key = section.empty() ? short_key : section + "." + short_key;
    if (!seen_keys.insert(key).second) throw ConfigError(key + ": duplicate key");
    const auto dot = key.rfind('.');
    const std::string owner = dot == std::string::npos ? "" : key.substr(0, dot);
    seen_sections.insert(owner);

    int idx = 0;
    if (is_target_section(owner, &idx)) {
      if (idx < 1) throw ConfigError(key + ": subdomain index must be >= 1");
      ExperimentConfig scratch;
      const std::string field = key.substr(dot + 1);
      const auto it = table.find("benchmark.source." + field);
      if (it == table.end()) throw ConfigError(key + ": unknown key");
      scratch.benchmark.source = targets[idx];
      apply_setter(it->second, scratch, key, value);
      targets[idx] = scratch.benchmark.source;
      continue;
    }
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key + ": unknown key");
    apply_setter(it->second, cfg, key, value);
  }
  for (const auto& s : seen_sections) {
    int idx = 0;
    if (is_target_section(s, &idx) && !targets.count(idx)) targets[idx] = DomainSpec{};
  }
  if (!targets.empty()) {
    cfg.benchmark.targets.clear();
    int expected = 1;
    for (const auto& [idx, spec] : targets) {
      if (idx != expected) {
        throw ConfigError("benchmark.target." + std::to_string(expected) +
                          ": subdomains must be numbered 1..N without gaps");
      }
      cfg.benchmark.targets.push_back(spec);
      ++expected;
    }
  }
  for (const auto& r : required_sections) {
    if (!seen_sections.count(r)) throw ConfigError("[" + r + "]: missing required section");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path,
                                   const std::set<std::string>& required_sections) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig cfg = parse_config_text(text.str(), required_sections);
  cfg.base_dir = path.parent_path();
  return cfg;
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream out;
  std::vector<std::string> seeds;
  for (auto s : c.seeds) seeds.push_back(std::to_string(s));
  out << "[experiment]\n"
      << "seed = " << c.seed << "\n"
      << "seeds = " << join(seeds, ",") << "\n"
      << "out = " << c.output_dir << "\n\n";

  const auto& b = c.benchmark;
  out << "[benchmark]\n"
      << "height = " << b.height << "\n"
      << "width = " << b.width << "\n"
      << "classes = " << b.num_classes << "\n"
      << "samples_per_split = " << b.samples_per_split << "\n"
      << "seed = " << b.seed << "\n\n";
  emit_domain(out, "benchmark.source", b.source);
  for (std::size_t i = 0; i < b.targets.size(); ++i) {
    emit_domain(out, "benchmark.target." + std::to_string(i + 1), b.targets[i]);
  }
  emit_domain(out, "benchmark.open", b.open);

  const auto& t = c.trainer;
  out << "[trainer]\n"
      << "learning_rate = " << fmt(t.learning_rate) << "\n"
      << "iterations = " << t.iterations << "\n"
      << "warmup_iterations = " << t.warmup_iterations << "\n"
      << "pretrain_iterations = " << t.pretrain_iterations << "\n"
      << "batch_size = " << t.batch_size << "\n"
      << "momentum = " << fmt(t.momentum) << "\n"
      << "threshold = " << fmt(t.threshold) << "\n"
      << "eval_interval = " << t.eval_interval << "\n"
      << "method = " << method_name(t.method) << "\n\n";

  out << "[mixing]\n"
      << "mixed_targets = " << t.mixing.mixed_targets << "\n"
      << "grid_candidates = " << fmt_ints(t.mixing.grid_candidates) << "\n"
      << "baseline = " << mixer_name(t.mixing.baseline) << "\n\n";

  const auto& a = t.augment;
  out << "[augment]\n"
      << "jitter_scale = " << fmt(a.jitter_scale) << "\n"
      << "jitter_brightness = " << fmt(a.jitter_brightness) << "\n"
      << "blur_probability = " << fmt(a.blur_probability) << "\n"
      << "blur_sigma_min = " << fmt(a.blur_sigma_min) << "\n"
      << "blur_sigma_max = " << fmt(a.blur_sigma_max) << "\n\n";

  const auto& d = c.discrepancy;
  out << "[discrepancy]\n"
      << "repeats = " << d.repeats << "\n"
      << "train_fraction = " << fmt(d.train_fraction) << "\n"
      << "epochs = " << d.epochs << "\n"
      << "learning_rate = " << fmt(d.learning_rate) << "\n"
      << "l2 = " << fmt(d.l2) << "\n"
      << "min_samples = " << d.min_samples << "\n\n";

  std::vector<std::string> points;
  for (const auto& p : c.sweep.values) points.push_back(fmt_ints(p));
  out << "[sweep]\n"
      << "axis = " << sweep_axis_name(c.sweep.axis) << "\n"
      << "values = " << join(points, ";") << "\n\n";

  const auto& e = c.enumerate;
  out << "[enumerate]\n"
      << "height = " << e.height << "\n"
      << "width = " << e.width << "\n"
      << "classes = " << e.num_classes << "\n"
      << "targets = " << e.targets << "\n"
      << "instances = " << e.instances << "\n"
      << "mixed_targets = " << e.mixed_targets << "\n"
      << "grid_candidates = " << fmt_ints(e.grid_candidates) << "\n\n";

  const auto& in = c.inputs;
  out << "[inputs]\n"
      << "source_image = " << in.source_image << "\n"
      << "source_label = " << in.source_label << "\n"
      << "target_images = " << join(in.target_images, ",") << "\n"
      << "target_probs = " << join(in.target_probs, ",") << "\n"
      << "apply_post_augment = " << (in.apply_post_augment ? "true" : "false") << "\n";
  return out.str();
}

std::string emit_config_without_output(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  copy.output_dir = ExperimentConfig{}.output_dir;
  return emit_config(copy);
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : emit_config_without_output(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace scmix
