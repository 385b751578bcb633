// Python bindings: numpy in, numpy out. Images are float32 (H, W, 3), label
// maps uint16 (H, W) with 65535 as ignore, probabilities float64 (H, W, C).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "scmix/cli.hpp"
#include "scmix/config.hpp"
#include "scmix/discrepancy.hpp"
#include "scmix/errors.hpp"
#include "scmix/mixing.hpp"
#include "scmix/synth_domains.hpp"
#include "scmix/trainer.hpp"

namespace py = pybind11;
using namespace scmix;

namespace {

template <class T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <class T>
std::vector<T> flat(const Array<T>& a) {
  return std::vector<T>(a.data(), a.data() + a.size());
}

void require_ndim(const py::array& a, int ndim, const char* what) {
  if (a.ndim() != ndim) {
    throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(ndim) +
                        " dimensions, got " + std::to_string(a.ndim()));
  }
}

ImageTensor to_image(const Array<float>& a) {
  require_ndim(a, 3, "image");
  if (a.shape(2) != 3) throw ShapeMismatch("image: last axis must have 3 channels");
  return ImageTensor(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), flat(a));
}

LabelMap to_labels(const Array<std::uint16_t>& a, int num_classes) {
  require_ndim(a, 2, "labels");
  return LabelMap(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), num_classes, flat(a));
}

ProbMap to_probs(const Array<double>& a) {
  require_ndim(a, 3, "probs");
  return ProbMap(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                 static_cast<int>(a.shape(2)), flat(a));
}

template <class T, class G>
py::array_t<T> to_numpy(const G& g, std::vector<py::ssize_t> shape) {
  py::array_t<T> out(shape);
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

py::array_t<float> image_array(const ImageTensor& t) {
  return to_numpy<float>(t, {t.height(), t.width(), 3});
}

py::array_t<std::uint16_t> label_array(const LabelMap& t) {
  return to_numpy<std::uint16_t>(t, {t.height(), t.width()});
}

py::dict mixed_dict(const MixedSample& m) {
  py::dict d;
  d["image"] = image_array(m.image);
  d["labels"] = label_array(m.labels.to_label_map());
  d["weights"] = to_numpy<float>(m.weights, {m.weights.height(), m.weights.width()});
  d["provenance"] = to_numpy<std::uint16_t>(m.provenance, {m.provenance.height(), m.provenance.width()});
  return d;
}

py::dict make_benchmark(int height, int width, int samples_per_split, std::uint64_t seed) {
  BenchmarkConfig cfg = BenchmarkConfig::defaults();
  cfg.height = height;
  cfg.width = width;
  cfg.samples_per_split = samples_per_split;
  cfg.seed = seed;
  const CompoundBenchmark bench = make_compound_benchmark(cfg);
  py::dict out;
  auto add = [&](const Split& split) {
    const auto n = static_cast<py::ssize_t>(split.samples.size());
    py::array_t<float> images({n, static_cast<py::ssize_t>(height), static_cast<py::ssize_t>(width),
                               static_cast<py::ssize_t>(3)});
    py::array_t<std::uint16_t> labels({n, static_cast<py::ssize_t>(height), static_cast<py::ssize_t>(width)});
    float* pi = images.mutable_data();
    std::uint16_t* pl = labels.mutable_data();
    for (const auto& s : split.samples) {
      pi = std::copy(s.image.values().begin(), s.image.values().end(), pi);
      pl = std::copy(s.labels.values().begin(), s.labels.values().end(), pl);
    }
    out[py::str(split.name)] = py::make_tuple(images, labels);
  };
  add(bench.source());
  for (std::size_t i = 0; i < bench.target_count(); ++i) add(bench.target_split_for_evaluation(i));
  add(bench.open());
  return out;
}

py::dict mix(const std::string& method, const Array<float>& source_image,
             const Array<std::uint16_t>& source_labels, int num_classes,
             const std::vector<Array<float>>& target_images,
             const std::vector<Array<double>>& target_probs, double tau, int mixed_targets,
             const std::vector<int>& grid_candidates, std::uint64_t seed, std::uint64_t iteration) {
  if (target_images.size() != target_probs.size()) {
    throw InvalidArgument("target_images and target_probs differ in length");
  }
  if (target_images.empty()) throw InvalidArgument("at least one target required");
  const LabeledImage source(to_image(source_image), to_labels(source_labels, num_classes));
  std::vector<TargetTriple> targets;
  for (std::size_t i = 0; i < target_images.size(); ++i) {
    const ProbMap probs = to_probs(target_probs[i]);
    targets.push_back(TargetTriple{to_image(target_images[i]), pseudo_label(probs),
                                   static_cast<float>(confidence_weight(probs, tau))});
  }
  const RngStream base(seed, iteration, StreamPurpose::kGridDims);
  const Mixer mixer = parse_mixer(method);
  switch (mixer) {
    case Mixer::kSCMix: {
      MixParams params;
      params.mixed_targets = mixed_targets;
      params.grid_candidates = grid_candidates;
      return mixed_dict(scmix::scmix(source, targets, params, base));
    }
    case Mixer::kClassMix:
      return mixed_dict(classmix_single(source, targets.front(), base));
    case Mixer::kCutMix:
      return mixed_dict(cutmix_single(source, targets.front(), base));
    case Mixer::kNone:
      break;
  }
  throw InvalidArgument("unknown mixer " + method);
}

DomainSampleSet to_set(const Array<double>& a, const char* tag) {
  require_ndim(a, 2, tag);
  DomainSampleSet s{tag, {}};
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    s.samples.emplace_back(a.data(i, 0), a.data(i, 0) + a.shape(1));
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compound-target mixing benchmark core";

  static py::exception<Error> error(m, "ScmixError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const InvalidLabel& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ShapeMismatch& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.attr("IGNORE_LABEL") = kIgnoreLabel;

  m.def("make_benchmark", &make_benchmark, py::arg("height") = 48, py::arg("width") = 48,
        py::arg("samples_per_split") = 100, py::arg("seed") = 7,
        "Split name -> (images float32 (N,H,W,3), labels uint16 (N,H,W)).");

  m.def("mix", &mix, py::arg("method"), py::arg("source_image"), py::arg("source_labels"),
        py::arg("num_classes"), py::arg("target_images"), py::arg("target_probs"),
        py::arg("tau") = 0.968, py::arg("mixed_targets") = 3,
        py::arg("grid_candidates") = std::vector<int>{1, 2, 4, 8, 16}, py::arg("seed") = 1,
        py::arg("iteration") = 0,
        "Mix one source sample with targets; method is scmix, classmix or cutmix.");

  m.def(
      "pseudo_label",
      [](const Array<double>& probs) { return label_array(pseudo_label(to_probs(probs)).to_label_map()); },
      py::arg("probs"));

  m.def(
      "confidence_weight",
      [](const Array<double>& probs, double tau) { return confidence_weight(to_probs(probs), tau); },
      py::arg("probs"), py::arg("tau") = 0.968);

  m.def(
      "image_descriptor",
      [](const Array<float>& image) { return image_descriptor(to_image(image)); }, py::arg("image"));

  m.def(
      "proxy_distance",
      [](const Array<double>& a, const Array<double>& b, std::uint64_t seed) {
        return proxy_hdh_distance(to_set(a, "a"), to_set(b, "b"),
                                  RngStream(seed, 0, StreamPurpose::kDiscrepancy));
      },
      py::arg("a"), py::arg("b"), py::arg("seed") = 1,
      "Proxy H-delta-H distance in [0, 2] between two (N, D) descriptor sets.");

  m.def(
      "config_hash", [](const std::string& text) { return config_hash(parse_config_text(text)); },
      py::arg("text"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "scmix");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        py::gil_scoped_release release;
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool in process and returns its exit code.");
}
