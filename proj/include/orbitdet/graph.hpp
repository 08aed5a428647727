#pragma once

#include <set>
#include <string>
#include <vector>

#include "orbitdet/tensor.hpp"

namespace orbitdet {

enum class OpKind { input, conv2d, max_pool2d, activation, upsample2x, concat, add, output };
enum class ActFn { mish, leaky_relu, linear };

const char* to_string(OpKind k);
const char* to_string(ActFn f);
OpKind op_kind_from_string(const std::string& s);
ActFn act_fn_from_string(const std::string& s);

struct ConvAttrs {
    std::string weights;  // weight-store key (TNSR path in serialized graphs)
    std::string bias;
    int stride = 1;
    int pad = 0;
};

struct PoolAttrs {
    int k = 2;
    int stride = 2;
};

struct ActAttrs {
    ActFn fn = ActFn::linear;
    float alpha = 0.1f;
};

/// One typed op node. Only the attrs block matching `op` is meaningful.
struct Node {
    std::string id;
    OpKind op = OpKind::input;
    std::vector<std::string> inputs;

    std::vector<int> shape;  // input nodes: declared tensor shape (NHWC)
    ConvAttrs conv;
    PoolAttrs pool;
    ActAttrs act;
};

/// Directed acyclic neural-network graph. Nodes are stored in a valid
/// topological order; passes treat values as immutable and return new graphs.
struct GraphIR {
    std::vector<Node> nodes;

    const Node* find(const std::string& id) const;
    const Node& node(const std::string& id) const;  // throws GraphError
    std::vector<std::string> input_ids() const;
    std::vector<std::string> output_ids() const;
};

/// Structural validity: unique ids, references resolve to earlier nodes
/// (which also rules out cycles), non-input nodes have >= 1 input, input
/// nodes have none, output nodes have exactly one input and no consumers.
/// Throws GraphError; this is distinct from constraint Violations.
void check_structure(const GraphIR& g);

/// What the accelerator will run. Defaults mirror a DPU-style op set:
/// mish is out, pooling is capped at 8x8.
struct OpConstraintSet {
    std::set<OpKind> supported_ops = {OpKind::conv2d,     OpKind::max_pool2d, OpKind::activation,
                                      OpKind::upsample2x, OpKind::concat,     OpKind::add};
    int max_pool_kernel_limit = 8;
    std::set<ActFn> supported_activations = {ActFn::leaky_relu, ActFn::linear};
};

enum class ViolationRule { unsupported_op, pool_kernel_too_large, unsupported_activation };

const char* to_string(ViolationRule r);

struct Violation {
    std::string node_id;
    ViolationRule rule;
    std::string detail;
};

/// Every constraint violation in the graph; empty iff the whole graph is
/// accelerator-runnable. Input/output nodes are graph plumbing, not compute,
/// and are never flagged.
std::vector<Violation> validate(const GraphIR& g, const OpConstraintSet& c = {});

/// Every mish activation becomes leaky_relu with the given slope; ids, edges
/// and all other attrs are untouched.
GraphIR rewrite_mish_to_leaky(const GraphIR& g, float alpha = 0.1f);

enum class Target { accelerator, host };

const char* to_string(Target t);

struct Segment {
    Target target;
    std::vector<std::string> node_ids;
};

/// Accelerator/host split of the compute nodes (inputs/outputs excluded).
struct Partition {
    std::vector<Segment> segments;
};

/// Greedy topological sweep: maximal runs of constraint-clean nodes become
/// accelerator segments; each violating node is isolated into its own host
/// segment.
Partition partition(const GraphIR& g, const OpConstraintSet& c = {});

/// DPU sizing knobs used by the linear cost model.
struct DpuConfig {
    int ops_per_clock = 4096;  // one of 512, 1024, 2048, 4096
    int cores = 1;             // 1..4
    double clock_hz = 300e6;
};

void check_config(const DpuConfig& d);  // throws ConfigError

}  // namespace orbitdet
