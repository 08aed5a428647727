#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbitdet/json_io.hpp"
#include "orbitdet/kernels.hpp"
#include "orbitdet/ppm.hpp"
#include "orbitdet/tensor_io.hpp"

namespace py = pybind11;
using namespace orbitdet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

TensorF32 to_tensor(const FloatArray& arr) {
    Shape s;
    for (py::ssize_t i = 0; i < arr.ndim(); ++i)
        s.dims.push_back(static_cast<int>(arr.shape(i)));
    std::vector<float> data(arr.data(), arr.data() + arr.size());
    return TensorF32(std::move(s), std::move(data));
}

py::array_t<float> to_array(const TensorF32& t) {
    std::vector<py::ssize_t> shape(t.shape.dims.begin(), t.shape.dims.end());
    py::array_t<float> arr(shape);
    std::copy(t.data.begin(), t.data.end(), arr.mutable_data());
    return arr;
}

json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<int64_t>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        json j = json::object();
        for (auto item : obj.cast<py::dict>())
            j[item.first.cast<std::string>()] = py_to_json(item.second);
        return j;
    }
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        json j = json::array();
        for (auto item : obj.cast<py::sequence>()) j.push_back(py_to_json(item));
        return j;
    }
    throw py::type_error("cannot convert python object to JSON");
}

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return py::none();
        case json::value_t::boolean: return py::bool_(j.get<bool>());
        case json::value_t::number_integer: return py::int_(j.get<int64_t>());
        case json::value_t::number_unsigned: return py::int_(j.get<uint64_t>());
        case json::value_t::number_float: return py::float_(j.get<double>());
        case json::value_t::string: return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const json& v : j) out.append(json_to_py(v));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = json_to_py(v);
            return out;
        }
        default: return py::none();
    }
}

GraphIR graph_arg(const py::dict& d) { return graph_from_json(py_to_json(d)); }

OpConstraintSet constraints_arg(const py::object& obj) {
    if (obj.is_none()) return OpConstraintSet{};
    return constraints_from_json(py_to_json(obj));
}

HeadConfig head_arg(const py::object& obj) {
    if (obj.is_none()) return HeadConfig{};
    return head_config_from_json(py_to_json(obj));
}

WeightStore weights_arg(const py::dict& d) {
    WeightStore store;
    for (auto item : d)
        store.tensors.emplace(item.first.cast<std::string>(),
                              to_tensor(item.second.cast<FloatArray>()));
    return store;
}

TensorMap tensor_map_arg(const py::dict& d) {
    TensorMap m;
    for (auto item : d)
        m.emplace(item.first.cast<std::string>(), to_tensor(item.second.cast<FloatArray>()));
    return m;
}

py::dict tensor_map_out(const TensorMap& m) {
    py::dict out;
    for (const auto& [k, v] : m) out[py::str(k)] = to_array(v);
    return out;
}

ExecOptions exec_options(const std::string& mode, const QuantParamsMap* params) {
    ExecOptions opt;
    if (mode == "fake_quant") {
        opt.mode = ExecMode::fake_quant;
        opt.qparams = params;
    } else if (mode != "float") {
        throw ConfigError("mode must be 'float' or 'fake_quant'");
    }
    return opt;
}

py::list detections_out(const std::vector<Detection>& dets) {
    py::list out;
    for (const Detection& d : dets) {
        py::dict e;
        e["class_id"] = d.class_id;
        e["score"] = d.score;
        e["bbox"] = py::make_tuple(d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h);
        out.append(e);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "accelerator-deployment pipeline toolkit: graph passes, INT8 "
              "quantization, detection post-processing, pipeline benchmarks, "
              "mAP evaluation";

    // kernels
    m.def("mish", py::overload_cast<float>(&mish), py::arg("x"));
    m.def("leaky_relu", py::overload_cast<float, float>(&leaky_relu), py::arg("x"), py::arg("alpha") = 0.1f);
    m.def("mish_array", [](const FloatArray& x) { return to_array(mish(to_tensor(x))); });
    m.def(
        "conv2d",
        [](const FloatArray& input, const FloatArray& weights, const FloatArray& bias, int stride,
           int pad) { return to_array(conv2d(to_tensor(input), to_tensor(weights), to_tensor(bias), stride, pad)); },
        py::arg("input"), py::arg("weights"), py::arg("bias"), py::arg("stride") = 1,
        py::arg("pad") = 0);
    m.def(
        "max_pool2d",
        [](const FloatArray& input, int k, int stride) { return to_array(max_pool2d(to_tensor(input), k, stride)); },
        py::arg("input"), py::arg("k"), py::arg("stride"));
    m.def("upsample_nearest2x",
          [](const FloatArray& input) { return to_array(upsample_nearest2x(to_tensor(input))); });
    m.def("concat_channels", [](const FloatArray& a, const FloatArray& b) {
        return to_array(concat_channels(to_tensor(a), to_tensor(b)));
    });

    // quantization
    m.def("select_fraction_bits", &select_fraction_bits, py::arg("max_abs"));
    m.def(
        "quantize",
        [](const FloatArray& x, int fraction_bits) {
            const TensorI8 q = quantize(to_tensor(x), QuantParams{fraction_bits});
            std::vector<py::ssize_t> shape(q.shape.dims.begin(), q.shape.dims.end());
            py::array_t<int8_t> arr(shape);
            std::copy(q.data.begin(), q.data.end(), arr.mutable_data());
            return arr;
        },
        py::arg("x"), py::arg("fraction_bits"));
    m.def(
        "dequantize",
        [](const py::array_t<int8_t, py::array::c_style | py::array::forcecast>& q, int fraction_bits) {
            Shape s;
            for (py::ssize_t i = 0; i < q.ndim(); ++i) s.dims.push_back(static_cast<int>(q.shape(i)));
            std::vector<int8_t> data(q.data(), q.data() + q.size());
            return to_array(dequantize(TensorI8(std::move(s), std::move(data), QuantParams{fraction_bits})));
        },
        py::arg("q"), py::arg("fraction_bits"));

    // graph passes and execution (graphs travel as JSON-shaped dicts)
    m.def(
        "validate_graph",
        [](const py::dict& graph, const py::object& constraints) {
            return json_to_py(violations_to_json(validate(graph_arg(graph), constraints_arg(constraints))));
        },
        py::arg("graph"), py::arg("constraints") = py::none());
    m.def(
        "rewrite_mish_to_leaky",
        [](const py::dict& graph, float alpha) {
            return json_to_py(graph_to_json(rewrite_mish_to_leaky(graph_arg(graph), alpha)));
        },
        py::arg("graph"), py::arg("alpha") = 0.1f);
    m.def(
        "partition_graph",
        [](const py::dict& graph, const py::object& constraints) {
            return json_to_py(partition_to_json(partition(graph_arg(graph), constraints_arg(constraints))));
        },
        py::arg("graph"), py::arg("constraints") = py::none());
    m.def(
        "execute_graph",
        [](const py::dict& graph, const py::dict& weights, const py::dict& inputs,
           const std::string& mode, const py::object& params) {
            QuantParamsMap pm;
            if (!params.is_none()) pm = params_from_json(py_to_json(params));
            const auto opt = exec_options(mode, &pm);
            return tensor_map_out(execute(graph_arg(graph), weights_arg(weights), tensor_map_arg(inputs), opt));
        },
        py::arg("graph"), py::arg("weights"), py::arg("inputs"), py::arg("mode") = "float",
        py::arg("params") = py::none());
    m.def(
        "calibrate_graph",
        [](const py::dict& graph, const py::dict& weights, const py::list& input_sets) {
            std::vector<TensorMap> calib;
            for (auto item : input_sets) calib.push_back(tensor_map_arg(item.cast<py::dict>()));
            return json_to_py(params_to_json(calibrate(graph_arg(graph), weights_arg(weights), calib)));
        },
        py::arg("graph"), py::arg("weights"), py::arg("input_sets"));
    m.def(
        "estimate_cost",
        [](const py::dict& graph, const py::dict& weights, int ops_per_clock, int cores,
           double clock_hz) {
            const DpuConfig d{ops_per_clock, cores, clock_hz};
            return json_to_py(cost_report_to_json(estimate_cost(graph_arg(graph), weights_arg(weights), d)));
        },
        py::arg("graph"), py::arg("weights"), py::arg("ops_per_clock") = 4096, py::arg("cores") = 1,
        py::arg("clock_hz") = 300e6);

    // detection front/back end
    m.def(
        "letterbox",
        [](const FloatArray& image, int input_size) {
            auto [boxed, meta] = letterbox(to_tensor(image), input_size);
            py::dict md;
            md["scale"] = meta.scale;
            md["pad_x"] = meta.pad_x;
            md["pad_y"] = meta.pad_y;
            md["orig_w"] = meta.orig_w;
            md["orig_h"] = meta.orig_h;
            return py::make_tuple(to_array(boxed), md);
        },
        py::arg("image"), py::arg("input_size") = 416);
    m.def("iou", [](const py::tuple& a, const py::tuple& b) {
        auto box = [](const py::tuple& t) {
            return BBox{t[0].cast<float>(), t[1].cast<float>(), t[2].cast<float>(), t[3].cast<float>()};
        };
        return iou(box(a), box(b));
    });
    m.def(
        "detect_postprocess",
        [](const py::list& heads, const py::object& head_config, const py::object& meta,
           const std::string& filter) {
            const HeadConfig cfg = head_arg(head_config);
            std::vector<TensorF32> tensors;
            for (auto h : heads) tensors.push_back(to_tensor(h.cast<FloatArray>()));
            const auto candidates = decode(tensors, cfg);
            const FilterMode fm = filter == "parallel" ? FilterMode::parallel : FilterMode::serial;
            const auto raw = filter_confidence(candidates, cfg, fm);
            const auto kept = nms(raw, cfg.nms_iou_threshold);
            LetterboxMeta lm;
            if (meta.is_none()) {
                lm.scale = 1.0;
                lm.orig_w = cfg.input_size;
                lm.orig_h = cfg.input_size;
            } else {
                const py::dict d = meta.cast<py::dict>();
                lm.scale = d["scale"].cast<double>();
                lm.pad_x = d["pad_x"].cast<int>();
                lm.pad_y = d["pad_y"].cast<int>();
                lm.orig_w = d["orig_w"].cast<int>();
                lm.orig_h = d["orig_h"].cast<int>();
            }
            return detections_out(unletterbox(kept, lm));
        },
        py::arg("heads"), py::arg("head_config") = py::none(), py::arg("meta") = py::none(),
        py::arg("filter") = "serial");
    m.def(
        "decode_count",
        [](const py::object& head_config) { return head_arg(head_config).total_candidates(); },
        py::arg("head_config") = py::none());

    // pipeline benchmark (synthetic stages)
    m.def(
        "run_benchmark",
        [](const std::string& mode, const std::vector<double>& stage_ms, int frames, int warmup) {
            std::vector<StageSpec> stages;
            for (size_t i = 0; i < stage_ms.size(); ++i)
                stages.push_back(StageSpec::busy_wait("stage_" + std::to_string(i + 1), stage_ms[i]));
            PipelineStats stats;
            if (mode == "sequential") {
                stats = run_sequential(stages, frames);
            } else if (mode == "pipelined") {
                BenchOptions opt;
                opt.warmup_frames = warmup;
                stats = run_pipelined(stages, frames, opt);
            } else {
                throw ConfigError("mode must be 'sequential' or 'pipelined'");
            }
            return json_to_py(pipeline_stats_to_json(stats));
        },
        py::arg("mode"), py::arg("stage_ms"), py::arg("frames") = 40, py::arg("warmup") = 3);
    m.def(
        "measure_latency",
        [](const std::vector<double>& stage_ms, int samples) {
            std::vector<StageSpec> stages;
            for (size_t i = 0; i < stage_ms.size(); ++i)
                stages.push_back(StageSpec::busy_wait("stage_" + std::to_string(i + 1), stage_ms[i]));
            return measure_latency(stages, samples);
        },
        py::arg("stage_ms"), py::arg("samples") = 3);

    // evaluation
    m.def(
        "evaluate_detections",
        [](const py::list& dets, const py::list& annotations, double iou_thresh) {
            return json_to_py(eval_report_to_json(evaluate(detections_from_json(py_to_json(dets)),
                                                           annotations_from_json(py_to_json(annotations)),
                                                           iou_thresh)));
        },
        py::arg("detections"), py::arg("annotations"), py::arg("iou") = 0.5);

    // file formats
    m.def("save_tensor", [](const std::string& path, const FloatArray& x) { save_tensor(path, to_tensor(x)); });
    m.def("load_tensor_f32", [](const std::string& path) { return to_array(load_tensor_f32(path)); });
    m.def("load_ppm", [](const std::string& path) { return to_array(load_ppm(path)); });
    m.def("save_ppm", [](const std::string& path, const FloatArray& img) { save_ppm(path, to_tensor(img)); });

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_RuntimeError);
}
