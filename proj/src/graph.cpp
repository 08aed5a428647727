#include "orbitdet/graph.hpp"

#include <unordered_map>
#include <unordered_set>

#include "orbitdet/errors.hpp"

namespace orbitdet {

const char* to_string(OpKind k) {
    switch (k) {
        case OpKind::input: return "input";
        case OpKind::conv2d: return "conv2d";
        case OpKind::max_pool2d: return "max_pool2d";
        case OpKind::activation: return "activation";
        case OpKind::upsample2x: return "upsample2x";
        case OpKind::concat: return "concat";
        case OpKind::add: return "add";
        case OpKind::output: return "output";
    }
    return "?";
}

const char* to_string(ActFn f) {
    switch (f) {
        case ActFn::mish: return "mish";
        case ActFn::leaky_relu: return "leaky_relu";
        case ActFn::linear: return "linear";
    }
    return "?";
}

const char* to_string(ViolationRule r) {
    switch (r) {
        case ViolationRule::unsupported_op: return "unsupported_op";
        case ViolationRule::pool_kernel_too_large: return "pool_kernel_too_large";
        case ViolationRule::unsupported_activation: return "unsupported_activation";
    }
    return "?";
}

const char* to_string(Target t) {
    return t == Target::accelerator ? "accelerator" : "host";
}

OpKind op_kind_from_string(const std::string& s) {
    for (OpKind k : {OpKind::input, OpKind::conv2d, OpKind::max_pool2d, OpKind::activation,
                     OpKind::upsample2x, OpKind::concat, OpKind::add, OpKind::output})
        if (s == to_string(k)) return k;
    throw IoError("unknown op kind: " + s);
}

ActFn act_fn_from_string(const std::string& s) {
    for (ActFn f : {ActFn::mish, ActFn::leaky_relu, ActFn::linear})
        if (s == to_string(f)) return f;
    throw IoError("unknown activation fn: " + s);
}

const Node* GraphIR::find(const std::string& id) const {
    for (const Node& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

const Node& GraphIR::node(const std::string& id) const {
    const Node* n = find(id);
    if (!n) throw GraphError("no node with id '" + id + "'");
    return *n;
}

std::vector<std::string> GraphIR::input_ids() const {
    std::vector<std::string> ids;
    for (const Node& n : nodes)
        if (n.op == OpKind::input) ids.push_back(n.id);
    return ids;
}

std::vector<std::string> GraphIR::output_ids() const {
    std::vector<std::string> ids;
    for (const Node& n : nodes)
        if (n.op == OpKind::output) ids.push_back(n.id);
    return ids;
}

void check_structure(const GraphIR& g) {
    std::unordered_set<std::string> seen;
    std::unordered_map<std::string, const Node*> by_id;
    for (const Node& n : g.nodes) {
        if (n.id.empty()) throw GraphError("node with empty id");
        if (!seen.insert(n.id).second) throw GraphError("duplicate node id '" + n.id + "'");
        by_id[n.id] = &n;
    }

    std::unordered_set<std::string> defined;  // ids earlier in the list
    for (const Node& n : g.nodes) {
        if (n.op == OpKind::input) {
            if (!n.inputs.empty())
                throw GraphError("input node '" + n.id + "' must not have inputs");
        } else {
            if (n.inputs.empty())
                throw GraphError("node '" + n.id + "' has no inputs");
        }
        if (n.op == OpKind::output && n.inputs.size() != 1)
            throw GraphError("output node '" + n.id + "' must have exactly one input");
        for (const std::string& ref : n.inputs) {
            auto it = by_id.find(ref);
            if (it == by_id.end())
                throw GraphError("node '" + n.id + "' references unknown node '" + ref + "'");
            if (!defined.count(ref))
                throw GraphError("node '" + n.id + "' references '" + ref +
                                 "' before its definition (cycle or bad order)");
            if (it->second->op == OpKind::output)
                throw GraphError("output node '" + ref + "' is consumed by '" + n.id + "'");
        }
        defined.insert(n.id);
    }
}

namespace {

// Constraint checks for one compute node. Input/output nodes are exempt.
void check_node(const Node& n, const OpConstraintSet& c, std::vector<Violation>* out) {
    if (n.op == OpKind::input || n.op == OpKind::output) return;
    if (!c.supported_ops.count(n.op)) {
        if (out)
            out->push_back({n.id, ViolationRule::unsupported_op,
                            std::string("op '") + to_string(n.op) + "' is not accelerator-supported"});
    }
    if (n.op == OpKind::max_pool2d && n.pool.k > c.max_pool_kernel_limit) {
        if (out)
            out->push_back({n.id, ViolationRule::pool_kernel_too_large,
                            "max_pool kernel " + std::to_string(n.pool.k) + " exceeds limit " +
                                std::to_string(c.max_pool_kernel_limit)});
    }
    if (n.op == OpKind::activation && !c.supported_activations.count(n.act.fn)) {
        if (out)
            out->push_back({n.id, ViolationRule::unsupported_activation,
                            std::string("activation '") + to_string(n.act.fn) +
                                "' is not accelerator-supported"});
    }
}

bool is_clean(const Node& n, const OpConstraintSet& c) {
    std::vector<Violation> v;
    check_node(n, c, &v);
    return v.empty();
}

}  // namespace

std::vector<Violation> validate(const GraphIR& g, const OpConstraintSet& c) {
    check_structure(g);
    std::vector<Violation> out;
    for (const Node& n : g.nodes) check_node(n, c, &out);
    return out;
}

GraphIR rewrite_mish_to_leaky(const GraphIR& g, float alpha) {
    check_structure(g);
    GraphIR out = g;
    for (Node& n : out.nodes) {
        if (n.op == OpKind::activation && n.act.fn == ActFn::mish) {
            n.act.fn = ActFn::leaky_relu;
            n.act.alpha = alpha;
        }
    }
    return out;
}

Partition partition(const GraphIR& g, const OpConstraintSet& c) {
    check_structure(g);
    Partition p;
    Segment run{Target::accelerator, {}};
    auto flush = [&] {
        if (!run.node_ids.empty()) {
            p.segments.push_back(run);
            run.node_ids.clear();
        }
    };
    for (const Node& n : g.nodes) {
        if (n.op == OpKind::input || n.op == OpKind::output) continue;
        if (is_clean(n, c)) {
            run.node_ids.push_back(n.id);
        } else {
            flush();
            p.segments.push_back({Target::host, {n.id}});
        }
    }
    flush();
    return p;
}

void check_config(const DpuConfig& d) {
    if (d.ops_per_clock != 512 && d.ops_per_clock != 1024 && d.ops_per_clock != 2048 &&
        d.ops_per_clock != 4096)
        throw ConfigError("ops_per_clock must be one of 512, 1024, 2048, 4096");
    if (d.cores < 1 || d.cores > 4) throw ConfigError("cores must be in [1, 4]");
    if (!(d.clock_hz > 0)) throw ConfigError("clock_hz must be positive");
}

}  // namespace orbitdet
