#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "orbitdet/bench.hpp"
#include "orbitdet/detect.hpp"
#include "orbitdet/eval.hpp"
#include "orbitdet/graph.hpp"
#include "orbitdet/graph_exec.hpp"
#include "orbitdet/quant.hpp"

namespace orbitdet {

using json = nlohmann::json;

// Graph IR: { "nodes": [ { "id", "op", "attrs": {...}, "inputs": [...] } ] }
json graph_to_json(const GraphIR& g);
GraphIR graph_from_json(const json& j);
GraphIR load_graph(const std::string& path);
void save_graph(const std::string& path, const GraphIR& g);

/// Reads every conv weight/bias TNSR reference, resolved against base_dir
/// (the graph file's directory, normally).
WeightStore load_weight_store(const GraphIR& g, const std::string& base_dir);

// Constraints: { "supported_ops": [...], "max_pool_kernel_limit": n,
//                "supported_activations": [...] } — missing keys keep defaults
json constraints_to_json(const OpConstraintSet& c);
OpConstraintSet constraints_from_json(const json& j);
OpConstraintSet load_constraints(const std::string& path);

json violations_to_json(const std::vector<Violation>& v);
json partition_to_json(const Partition& p);

// Quant params: { "edges": { id: f }, "weights": { id: f } }
json params_to_json(const QuantParamsMap& p);
QuantParamsMap params_from_json(const json& j);
QuantParamsMap load_params(const std::string& path);
void save_params(const std::string& path, const QuantParamsMap& p);

// Head config (all keys optional over defaults)
json head_config_to_json(const HeadConfig& cfg);
HeadConfig head_config_from_json(const json& j);
HeadConfig load_head_config(const std::string& path);

// Detections: [ { "image", "class_id", "score", "bbox": [x, y, w, h] } ]
json detections_to_json(const std::vector<DetectionRecord>& dets);
std::vector<DetectionRecord> detections_from_json(const json& j);
std::vector<DetectionRecord> load_detections(const std::string& path);
void save_detections(const std::string& path, const std::vector<DetectionRecord>& dets);

// Annotations: the detections shape minus "score"
json annotations_to_json(const std::vector<GroundTruth>& gts);
std::vector<GroundTruth> annotations_from_json(const json& j);
std::vector<GroundTruth> load_annotations(const std::string& path);
void save_annotations(const std::string& path, const std::vector<GroundTruth>& gts);

// Eval report: { "iou": x, "ap": { "<class>": v }, "map": v }
json eval_report_to_json(const EvalReport& r);

// Bench stats: { "mode", "frames", "stage_ms": {name: mean}, "latency_ms",
// "fps" } plus raw totals; deterministic=true strips every timing field.
json pipeline_stats_to_json(const PipelineStats& s, bool deterministic = false);

json cost_report_to_json(const CostReport& r);

// Shared file helpers (IoError on failure).
json load_json(const std::string& path);
void save_json(const std::string& path, const json& j);

}  // namespace orbitdet
