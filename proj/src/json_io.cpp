#include "orbitdet/json_io.hpp"

#include <filesystem>
#include <fstream>

#include "orbitdet/errors.hpp"
#include "orbitdet/tensor_io.hpp"

namespace orbitdet {

namespace fs = std::filesystem;

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw IoError("'" + path + "': " + e.what());
    }
    return j;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << j.dump(2) << "\n";
    if (!os) throw IoError("write failed for '" + path + "'");
}

json graph_to_json(const GraphIR& g) {
    json nodes = json::array();
    for (const Node& n : g.nodes) {
        json attrs = json::object();
        switch (n.op) {
            case OpKind::input:
                if (!n.shape.empty()) attrs["shape"] = n.shape;
                break;
            case OpKind::conv2d:
                attrs["weights"] = n.conv.weights;
                attrs["bias"] = n.conv.bias;
                attrs["stride"] = n.conv.stride;
                attrs["pad"] = n.conv.pad;
                break;
            case OpKind::max_pool2d:
                attrs["k"] = n.pool.k;
                attrs["stride"] = n.pool.stride;
                break;
            case OpKind::activation:
                attrs["fn"] = to_string(n.act.fn);
                attrs["alpha"] = n.act.alpha;
                break;
            default:
                break;
        }
        nodes.push_back({{"id", n.id}, {"op", to_string(n.op)}, {"attrs", attrs}, {"inputs", n.inputs}});
    }
    return json{{"nodes", nodes}};
}

GraphIR graph_from_json(const json& j) {
    GraphIR g;
    try {
        for (const json& jn : j.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<std::string>();
            n.op = op_kind_from_string(jn.at("op").get<std::string>());
            if (jn.contains("inputs")) n.inputs = jn.at("inputs").get<std::vector<std::string>>();
            const json attrs = jn.value("attrs", json::object());
            switch (n.op) {
                case OpKind::input:
                    if (attrs.contains("shape")) n.shape = attrs.at("shape").get<std::vector<int>>();
                    break;
                case OpKind::conv2d:
                    n.conv.weights = attrs.at("weights").get<std::string>();
                    n.conv.bias = attrs.at("bias").get<std::string>();
                    n.conv.stride = attrs.value("stride", 1);
                    n.conv.pad = attrs.value("pad", 0);
                    break;
                case OpKind::max_pool2d:
                    n.pool.k = attrs.at("k").get<int>();
                    n.pool.stride = attrs.value("stride", n.pool.k);
                    break;
                case OpKind::activation:
                    n.act.fn = act_fn_from_string(attrs.at("fn").get<std::string>());
                    n.act.alpha = attrs.value("alpha", 0.1f);
                    break;
                default:
                    break;
            }
            g.nodes.push_back(std::move(n));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed graph JSON: ") + e.what());
    }
    check_structure(g);
    return g;
}

GraphIR load_graph(const std::string& path) { return graph_from_json(load_json(path)); }

void save_graph(const std::string& path, const GraphIR& g) { save_json(path, graph_to_json(g)); }

WeightStore load_weight_store(const GraphIR& g, const std::string& base_dir) {
    WeightStore store;
    for (const Node& n : g.nodes) {
        if (n.op != OpKind::conv2d) continue;
        for (const std::string& ref : {n.conv.weights, n.conv.bias}) {
            if (store.tensors.count(ref)) continue;
            const fs::path p = fs::path(ref).is_absolute() ? fs::path(ref) : fs::path(base_dir) / ref;
            store.tensors.emplace(ref, load_tensor_f32(p.string()));
        }
    }
    return store;
}

json constraints_to_json(const OpConstraintSet& c) {
    json ops = json::array(), acts = json::array();
    for (OpKind k : c.supported_ops) ops.push_back(to_string(k));
    for (ActFn f : c.supported_activations) acts.push_back(to_string(f));
    return json{{"supported_ops", ops},
                {"max_pool_kernel_limit", c.max_pool_kernel_limit},
                {"supported_activations", acts}};
}

OpConstraintSet constraints_from_json(const json& j) {
    OpConstraintSet c;
    try {
        if (j.contains("supported_ops")) {
            c.supported_ops.clear();
            for (const json& s : j.at("supported_ops"))
                c.supported_ops.insert(op_kind_from_string(s.get<std::string>()));
        }
        if (j.contains("max_pool_kernel_limit"))
            c.max_pool_kernel_limit = j.at("max_pool_kernel_limit").get<int>();
        if (j.contains("supported_activations")) {
            c.supported_activations.clear();
            for (const json& s : j.at("supported_activations"))
                c.supported_activations.insert(act_fn_from_string(s.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed constraints JSON: ") + e.what());
    }
    if (c.max_pool_kernel_limit < 1) throw IoError("max_pool_kernel_limit must be >= 1");
    return c;
}

OpConstraintSet load_constraints(const std::string& path) {
    return constraints_from_json(load_json(path));
}

json violations_to_json(const std::vector<Violation>& v) {
    json out = json::array();
    for (const Violation& x : v)
        out.push_back({{"node", x.node_id}, {"rule", to_string(x.rule)}, {"detail", x.detail}});
    return out;
}

json partition_to_json(const Partition& p) {
    json segs = json::array();
    for (const Segment& s : p.segments)
        segs.push_back({{"target", to_string(s.target)}, {"nodes", s.node_ids}});
    return json{{"segments", segs}};
}

json params_to_json(const QuantParamsMap& p) {
    json edges = json::object(), weights = json::object();
    for (const auto& [id, f] : p.edges) edges[id] = f;
    for (const auto& [id, f] : p.weights) weights[id] = f;
    return json{{"edges", edges}, {"weights", weights}};
}

QuantParamsMap params_from_json(const json& j) {
    QuantParamsMap p;
    try {
        if (j.contains("edges"))
            for (const auto& [id, f] : j.at("edges").items()) p.edges[id] = f.get<int>();
        if (j.contains("weights"))
            for (const auto& [id, f] : j.at("weights").items()) p.weights[id] = f.get<int>();
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed params JSON: ") + e.what());
    }
    return p;
}

QuantParamsMap load_params(const std::string& path) { return params_from_json(load_json(path)); }

void save_params(const std::string& path, const QuantParamsMap& p) {
    save_json(path, params_to_json(p));
}

json head_config_to_json(const HeadConfig& cfg) {
    json anchors = json::array();
    for (const auto& per_stride : cfg.anchors) {
        json a = json::array();
        for (const auto& [w, h] : per_stride) a.push_back({w, h});
        anchors.push_back(a);
    }
    return json{{"input_size", cfg.input_size},
                {"strides", cfg.strides},
                {"anchors", anchors},
                {"num_classes", cfg.num_classes},
                {"conf_threshold", cfg.conf_threshold},
                {"nms_iou_threshold", cfg.nms_iou_threshold}};
}

HeadConfig head_config_from_json(const json& j) {
    HeadConfig cfg;
    try {
        if (j.contains("input_size")) cfg.input_size = j.at("input_size").get<int>();
        if (j.contains("strides")) cfg.strides = j.at("strides").get<std::vector<int>>();
        if (j.contains("anchors")) {
            cfg.anchors.clear();
            for (const json& per_stride : j.at("anchors")) {
                std::vector<std::pair<float, float>> a;
                for (const json& wh : per_stride)
                    a.emplace_back(wh.at(0).get<float>(), wh.at(1).get<float>());
                cfg.anchors.push_back(std::move(a));
            }
        }
        if (j.contains("num_classes")) cfg.num_classes = j.at("num_classes").get<int>();
        if (j.contains("conf_threshold")) cfg.conf_threshold = j.at("conf_threshold").get<float>();
        if (j.contains("nms_iou_threshold"))
            cfg.nms_iou_threshold = j.at("nms_iou_threshold").get<float>();
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed head config JSON: ") + e.what());
    }
    check_config(cfg);
    return cfg;
}

HeadConfig load_head_config(const std::string& path) {
    return head_config_from_json(load_json(path));
}

namespace {

json bbox_to_json(const BBox& b) { return json{b.x, b.y, b.w, b.h}; }

BBox bbox_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw IoError("bbox must be [x, y, w, h]");
    return BBox{j.at(0).get<float>(), j.at(1).get<float>(), j.at(2).get<float>(),
                j.at(3).get<float>()};
}

}  // namespace

json detections_to_json(const std::vector<DetectionRecord>& dets) {
    json out = json::array();
    for (const DetectionRecord& r : dets)
        out.push_back({{"image", r.image},
                       {"class_id", r.det.class_id},
                       {"score", r.det.score},
                       {"bbox", bbox_to_json(r.det.bbox)}});
    return out;
}

std::vector<DetectionRecord> detections_from_json(const json& j) {
    std::vector<DetectionRecord> out;
    try {
        for (const json& jd : j) {
            DetectionRecord r;
            r.image = jd.at("image").get<std::string>();
            r.det.class_id = jd.at("class_id").get<int>();
            r.det.score = jd.at("score").get<float>();
            r.det.bbox = bbox_from_json(jd.at("bbox"));
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed detections JSON: ") + e.what());
    }
    return out;
}

std::vector<DetectionRecord> load_detections(const std::string& path) {
    return detections_from_json(load_json(path));
}

void save_detections(const std::string& path, const std::vector<DetectionRecord>& dets) {
    save_json(path, detections_to_json(dets));
}

json annotations_to_json(const std::vector<GroundTruth>& gts) {
    json out = json::array();
    for (const GroundTruth& g : gts)
        out.push_back({{"image", g.image}, {"class_id", g.class_id}, {"bbox", bbox_to_json(g.bbox)}});
    return out;
}

std::vector<GroundTruth> annotations_from_json(const json& j) {
    std::vector<GroundTruth> out;
    try {
        for (const json& jg : j) {
            GroundTruth g;
            g.image = jg.at("image").get<std::string>();
            g.class_id = jg.at("class_id").get<int>();
            g.bbox = bbox_from_json(jg.at("bbox"));
            out.push_back(std::move(g));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed annotations JSON: ") + e.what());
    }
    return out;
}

std::vector<GroundTruth> load_annotations(const std::string& path) {
    return annotations_from_json(load_json(path));
}

void save_annotations(const std::string& path, const std::vector<GroundTruth>& gts) {
    save_json(path, annotations_to_json(gts));
}

json eval_report_to_json(const EvalReport& r) {
    json ap = json::object();
    for (const auto& [cls, v] : r.per_class_ap) ap[std::to_string(cls)] = v;
    return json{{"iou", r.iou_threshold}, {"ap", ap}, {"map", r.map}};
}

json pipeline_stats_to_json(const PipelineStats& s, bool deterministic) {
    json j{{"mode", to_string(s.mode)}, {"frames", s.frames}};
    if (deterministic) {
        json names = json::array();
        for (const StageStat& st : s.stage_ms) names.push_back(st.name);
        j["stages"] = names;
        j["warmup_frames"] = s.warmup_frames;
        return j;
    }
    json stage_ms = json::object();
    for (const StageStat& st : s.stage_ms) stage_ms[st.name] = st.mean_ms;
    j["stage_ms"] = stage_ms;
    j["latency_ms"] = s.latency_ms;
    j["latency_mean_ms"] = s.latency_mean_ms;
    j["total_ms"] = s.total_ms;
    j["warmup_frames"] = s.warmup_frames;
    j["fps"] = s.fps;
    return j;
}

json cost_report_to_json(const CostReport& r) {
    json per_node = json::object();
    for (const auto& [id, v] : r.per_node_s) per_node[id] = v;
    return json{{"per_node_s", per_node}, {"total_s", r.total_s}};
}

}  // namespace orbitdet
