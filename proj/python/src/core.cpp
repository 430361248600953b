// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "dysflux/datasets.hpp"
#include "dysflux/error.hpp"
#include "dysflux/features_io.hpp"
#include "dysflux/files.hpp"
#include "dysflux/gradcheck.hpp"
#include "dysflux/head.hpp"
#include "dysflux/losses.hpp"
#include "dysflux/metrics.hpp"
#include "dysflux/synthetic.hpp"
#include "dysflux/training.hpp"

namespace py = pybind11;
using namespace dysflux;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

/// nlohmann JSON → Python objects via the json module (exact round trip of
/// the library's own JSON documents).
py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json from_python(const py::handle& obj) {
  const std::string text = py::str(py::module_::import("json").attr("dumps")(obj));
  return Json::parse(text);
}

std::optional<Split> optional_split(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return parse_split(*s);
}

/// Defaults, overridden by whatever keys `overrides` holds (nested "loss"
/// keys merge individually). The class set defaults to the manifest's.
TrainConfig config_from(const py::object& overrides, const Manifest& manifest) {
  TrainConfig defaults;
  defaults.class_set = manifest.class_set;
  Json j = defaults.to_json();
  if (!overrides.is_none()) j.merge_patch(from_python(overrides));
  TrainConfig config = TrainConfig::from_json(j);
  config.validate();
  return config;
}

Manifest load(const std::filesystem::path& path, std::optional<int> threshold) {
  LoadOptions options;
  options.binarize_threshold = threshold;
  return load_manifest(path, options);
}

py::dict distribution_dict(const LabelDistribution& d) {
  py::dict percent, positives;
  for (const auto& c : d.classes) {
    percent[py::str(c.name)] = c.percent;
    positives[py::str(c.name)] = c.positives;
  }
  py::dict out;
  out["total"] = d.total;
  out["percent"] = percent;
  out["positives"] = positives;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dysflux core: classification head, losses, datasets, training and metrics";
  m.attr("__version__") = DYSFLUX_VERSION;

  // Errors: one Python class per C++ class, all deriving from DysfluxError.
  static py::exception<Error> base(m, "DysfluxError");
  static py::exception<ShapeError> shape(m, "ShapeError", base.ptr());
  static py::exception<DomainError> domain(m, "DomainError", base.ptr());
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  static py::exception<ValidationError> validation(m, "ValidationError", base.ptr());
  static py::exception<DataError> data(m, "DataError", base.ptr());
  static py::exception<FormatError> format(m, "FormatError", base.ptr());
  static py::exception<StateError> state(m, "StateError", base.ptr());
  static py::exception<OracleError> oracle(m, "OracleError", base.ptr());
  static py::exception<IoError> io(m, "IoError", base.ptr());
  static py::exception<MergeError> merge_error(m, "MergeError", base.ptr());
  static py::exception<IncompatibleError> incompatible(m, "IncompatibleError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ShapeError& e) {
      shape(e.what());
    } catch (const DomainError& e) {
      domain(e.what());
    } catch (const ConfigError& e) {
      config(e.what());
    } catch (const ValidationError& e) {
      py::object exc = validation;
      py::object instance = exc(e.what());
      instance.attr("issues") = e.issues();
      PyErr_SetObject(validation.ptr(), instance.ptr());
    } catch (const DataError& e) {
      data(e.what());
    } catch (const FormatError& e) {
      py::object exc = format;
      py::object instance = exc(e.what());
      instance.attr("field") = e.field();
      PyErr_SetObject(format.ptr(), instance.ptr());
    } catch (const StateError& e) {
      state(e.what());
    } catch (const OracleError& e) {
      oracle(e.what());
    } catch (const IoError& e) {
      io(e.what());
    } catch (const MergeError& e) {
      merge_error(e.what());
    } catch (const IncompatibleError& e) {
      incompatible(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.attr("LABEL_NAMES") = std::vector<std::string>(kLabelNames.begin(), kLabelNames.end());
  m.def("class_names", [](const std::string& set) { return class_names(parse_class_set(set)); },
        py::arg("class_set"));

  // Losses.
  m.def("focal_loss", &focal_loss, py::arg("p"), py::arg("y"), py::arg("alpha"),
        py::arg("gamma"));
  m.def(
      "focal_loss_multi",
      [](const std::vector<double>& probs, const std::vector<int>& targets, double alpha,
         double gamma) { return focal_loss_multi(probs, targets, alpha, gamma); },
      py::arg("probs"), py::arg("targets"), py::arg("alpha"), py::arg("gamma"));
  m.def(
      "aux_cross_entropy",
      [](const std::vector<double>& logits, int target, const std::vector<double>& weights) {
        return aux_cross_entropy(logits, target, weights);
      },
      py::arg("logits"), py::arg("target"), py::arg("weights") = std::vector<double>{});
  m.def("mtl_loss", &mtl_loss, py::arg("main"), py::arg("aux"), py::arg("w_main"));

  // Head.
  py::class_<HeadParams>(m, "HeadParams")
      .def_property_readonly("num_layers", &HeadParams::num_layers)
      .def_property_readonly("hidden_dim", &HeadParams::hidden_dim)
      .def_property_readonly("num_classes", &HeadParams::num_classes)
      .def_property_readonly("project_qkv", [](const HeadParams& p) { return p.project_qkv; })
      .def_property_readonly("parameter_count", &HeadParams::parameter_count)
      .def("flatten", [](const HeadParams& p) { return to_array(p.flatten()); })
      .def("fields",
           [](const HeadParams& p) {
             py::dict out;
             p.for_each([&](std::string_view name, const Tensor& t) {
               out[py::str(std::string(name))] = to_array(t);
             });
             return out;
           })
      .def(
          "forward",
          [](const HeadParams& p, const Array& hidden) {
            const HeadOutput o = head_forward(to_tensor(hidden), p);
            py::dict out;
            out["main_probs"] = to_array(o.main_probs);
            out["main_logits"] = to_array(o.main_logits);
            out["aux_logits"] = to_array(o.aux_logits);
            out["pooled"] = to_array(o.pooled);
            return out;
          },
          py::arg("hidden"));
  m.def("init_params", &init_params, py::arg("seed"), py::arg("num_layers"),
        py::arg("hidden_dim"), py::arg("num_classes"), py::arg("project_qkv") = true);
  m.def(
      "weighted_layer_sum",
      [](const Array& hidden, const Array& weights) {
        return to_array(weighted_layer_sum(to_tensor(hidden), to_tensor(weights)));
      },
      py::arg("hidden"), py::arg("weights"));

  // Feature files.
  m.def(
      "write_features",
      [](const std::filesystem::path& dir, const std::string& clip_id, const Array& hidden) {
        return write_features(dir, clip_id, to_tensor(hidden));
      },
      py::arg("dir"), py::arg("clip_id"), py::arg("hidden"));
  m.def(
      "read_features",
      [](const std::filesystem::path& path) {
        const FeatureFile f = read_features(path);
        py::array_t<float> values({static_cast<py::ssize_t>(f.layers),
                                   static_cast<py::ssize_t>(f.frames),
                                   static_cast<py::ssize_t>(f.width)});
        std::copy(f.values.begin(), f.values.end(), values.mutable_data());
        return py::make_tuple(f.clip_id, values);
      },
      py::arg("path"));

  // Datasets.
  py::class_<Manifest>(m, "Manifest")
      .def_readonly("name", &Manifest::name)
      .def_readonly("dataset_id", &Manifest::dataset_id)
      .def_property_readonly("class_set",
                             [](const Manifest& mf) { return to_string(mf.class_set); })
      .def_readonly("n_annotators", &Manifest::n_annotators)
      .def_property_readonly("binarization_rule", &Manifest::binarization_rule)
      .def("__len__", [](const Manifest& mf) { return mf.records.size(); })
      .def("clip_ids",
           [](const Manifest& mf, const std::optional<std::string>& split) {
             std::vector<std::string> ids;
             for (const auto* r : mf.select(optional_split(split))) ids.push_back(r->clip_id);
             return ids;
           },
           py::arg("split") = py::none())
      .def("labels",
           [](const Manifest& mf, const std::string& clip_id) {
             const ClipRecord* r = mf.find(clip_id);
             if (!r) throw DataError("no clip " + clip_id);
             return std::vector<int>(r->labels.begin(), r->labels.end());
           },
           py::arg("clip_id"))
      .def("save", [](const Manifest& mf, const std::filesystem::path& p) { save_manifest(mf, p); },
           py::arg("path"));
  m.def("load_manifest", &load, py::arg("path"), py::arg("binarize_threshold") = py::none());
  m.def(
      "binarize_labels",
      [](const std::vector<int>& counts, int n, int threshold) {
        const LabelVector v = binarize_labels(counts, n, threshold);
        return std::vector<int>(v.begin(), v.end());
      },
      py::arg("counts"), py::arg("n_annotators"), py::arg("threshold") = 2);
  m.def(
      "merge",
      [](const std::vector<Manifest>& inputs, const std::string& name,
         const std::string& custom_name) {
        return merge(inputs, parse_merge_name(name), custom_name);
      },
      py::arg("manifests"), py::arg("name") = "custom", py::arg("custom_name") = "custom");
  m.def(
      "speaker_leaks",
      [](const Manifest& mf) {
        py::list out;
        for (const auto& leak : validate_speaker_exclusivity(mf).leaks) {
          std::vector<std::string> splits;
          for (Split s : leak.splits) splits.push_back(to_string(s));
          out.append(py::make_tuple(leak.dataset_id, leak.speaker_id, splits));
        }
        return out;
      },
      py::arg("manifest"));
  m.def(
      "label_distribution",
      [](const Manifest& mf, const std::optional<std::string>& split) {
        return distribution_dict(label_distribution(mf, optional_split(split)));
      },
      py::arg("manifest"), py::arg("split") = py::none());
  m.def(
      "cooccurrence",
      [](const Manifest& mf, const std::optional<std::string>& split) {
        return cooccurrence_stats(mf, optional_split(split)).fraction;
      },
      py::arg("manifest"), py::arg("split") = py::none());
  m.def(
      "make_batches",
      [](const Manifest& mf, const std::string& split, std::size_t batch_size,
         std::uint64_t seed, std::uint64_t epoch) {
        return make_batches(mf, parse_split(split), batch_size, seed, epoch);
      },
      py::arg("manifest"), py::arg("split"), py::arg("batch_size"), py::arg("seed"),
      py::arg("epoch") = 0);

  // Metrics.
  m.def(
      "prf1",
      [](const LabelMatrix& preds, const LabelMatrix& targets,
         const std::vector<std::string>& names) {
        const Prf1 r = prf1(preds, targets, names);
        py::list classes;
        for (const auto& c : r.classes) {
          py::dict d;
          d["name"] = c.name;
          d["status"] = to_string(c.status);
          d["tp"] = c.tp;
          d["fp"] = c.fp;
          d["fn"] = c.fn;
          d["tn"] = c.tn;
          d["precision"] = c.precision;
          d["recall"] = c.recall;
          d["f1"] = c.f1;
          classes.append(d);
        }
        py::dict out;
        out["classes"] = classes;
        out["macro_precision"] = r.macro_precision;
        out["macro_recall"] = r.macro_recall;
        out["macro_f1"] = r.macro_f1;
        return out;
      },
      py::arg("preds"), py::arg("targets"), py::arg("names") = std::vector<std::string>{});

  // Training and evaluation over files on disk.
  m.def(
      "train",
      [](const std::filesystem::path& manifest_path, const std::filesystem::path& features_dir,
         const std::filesystem::path& out_dir, const py::object& config,
         const std::optional<std::filesystem::path>& warm_start_from) {
        const Manifest mf = load_manifest(manifest_path);
        const TrainConfig cfg = config_from(config, mf);
        const DirectoryFeatures features(features_dir);
        std::optional<TrainInit> init;
        if (warm_start_from) {
          const Checkpoint source = load_checkpoint(*warm_start_from);
          const auto train_split = mf.select(Split::train);
          if (train_split.empty()) throw DataError("manifest has no train clips");
          const Tensor probe = features.load(train_split.front()->clip_id);
          init = warm_start(source, cfg, probe.dim(0), probe.dim(2));
        }
        Checkpoint ck;
        {
          py::gil_scoped_release release;
          ck = train(cfg, mf, features, init);
        }
        save_checkpoint(ck, out_dir);
        const auto bytes = read_file(out_dir / "params.json");
        return to_python(Json::parse(std::string(reinterpret_cast<const char*>(bytes.data()),
                                                 bytes.size())));
      },
      py::arg("manifest"), py::arg("features_dir"), py::arg("out_dir"),
      py::arg("config") = py::none(), py::arg("warm_start") = py::none(),
      "Trains a head and writes the checkpoint; returns its params.json document.");
  m.def(
      "evaluate",
      [](const std::filesystem::path& checkpoint_dir, const std::filesystem::path& manifest_path,
         const std::filesystem::path& features_dir, const std::string& split, double threshold) {
        const Checkpoint ck = load_checkpoint(checkpoint_dir);
        const Manifest mf = load_manifest(manifest_path);
        const DirectoryFeatures features(features_dir);
        const MetricsReport report = evaluate(ck, mf, parse_split(split), features, threshold);
        py::dict out = to_python(report.to_json());
        out["tsv"] = report.to_tsv();
        return out;
      },
      py::arg("checkpoint"), py::arg("manifest"), py::arg("features_dir"),
      py::arg("split") = "test", py::arg("threshold") = 0.5);
  m.def("default_config", [] { return to_python(TrainConfig{}.to_json()); });

  // Utilities.
  m.def(
      "write_synthetic_corpus",
      [](const std::filesystem::path& dir, std::uint64_t seed) {
        write_synthetic_corpus(SyntheticSpec{}, seed, dir);
        return dir / "manifest.jsonl";
      },
      py::arg("dir"), py::arg("seed") = 0);
  m.def(
      "gradient_suite",
      [](std::size_t seeds) {
        GradientSuiteOptions options;
        for (std::size_t s = 0; s < seeds; ++s) options.seeds.push_back(s);
        GradientSuite suite;
        {
          py::gil_scoped_release release;
          suite = run_gradient_suite(options);
        }
        return suite.worst;
      },
      py::arg("seeds") = 20, "Worst relative finite-difference error over the seeds.");
}
