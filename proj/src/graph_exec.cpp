#include "orbitdet/graph_exec.hpp"

#include "orbitdet/errors.hpp"
#include "orbitdet/kernels.hpp"

namespace orbitdet {

const TensorF32& WeightStore::get(const std::string& key) const {
    auto it = tensors.find(key);
    if (it == tensors.end()) throw GraphError("weight store has no tensor '" + key + "'");
    return it->second;
}

namespace {

QuantParams edge_params(const ExecOptions& opt, const std::string& node_id) {
    if (!opt.qparams) throw ConfigError("fake_quant mode requires quant params");
    auto it = opt.qparams->edges.find(node_id);
    if (it == opt.qparams->edges.end())
        throw ConfigError("missing quant params for edge '" + node_id + "'");
    return QuantParams{it->second};
}

QuantParams weight_params(const ExecOptions& opt, const std::string& node_id) {
    if (!opt.qparams) throw ConfigError("fake_quant mode requires quant params");
    auto it = opt.qparams->weights.find(node_id);
    if (it == opt.qparams->weights.end())
        throw ConfigError("missing quant params for weights of '" + node_id + "'");
    return QuantParams{it->second};
}

const TensorF32& value_of(const TensorMap& values, const std::string& id) {
    auto it = values.find(id);
    if (it == values.end())
        throw GraphError("no value computed for node '" + id + "' (bad execution order?)");
    return it->second;
}

TensorF32 run_op(const Node& n, const WeightStore& w, const TensorMap& values,
                 const ExecOptions& opt) {
    switch (n.op) {
        case OpKind::conv2d: {
            TensorF32 weights = w.get(n.conv.weights);
            if (opt.mode == ExecMode::fake_quant)
                weights = fake_quantize(weights, weight_params(opt, n.id));
            const TensorF32& bias = w.get(n.conv.bias);
            return conv2d(value_of(values, n.inputs[0]), weights, bias, n.conv.stride, n.conv.pad);
        }
        case OpKind::max_pool2d:
            return max_pool2d(value_of(values, n.inputs[0]), n.pool.k, n.pool.stride);
        case OpKind::activation: {
            const TensorF32& x = value_of(values, n.inputs[0]);
            switch (n.act.fn) {
                case ActFn::mish: return mish(x);
                case ActFn::leaky_relu: return leaky_relu(x, n.act.alpha);
                case ActFn::linear: return x;
            }
            throw GraphError("bad activation fn");
        }
        case OpKind::upsample2x:
            return upsample_nearest2x(value_of(values, n.inputs[0]));
        case OpKind::concat: {
            if (n.inputs.size() < 2)
                throw GraphError("concat node '" + n.id + "' needs >= 2 inputs");
            TensorF32 acc = value_of(values, n.inputs[0]);
            for (size_t i = 1; i < n.inputs.size(); ++i)
                acc = concat_channels(acc, value_of(values, n.inputs[i]));
            return acc;
        }
        case OpKind::add: {
            if (n.inputs.size() < 2)
                throw GraphError("add node '" + n.id + "' needs >= 2 inputs");
            TensorF32 acc = value_of(values, n.inputs[0]);
            for (size_t i = 1; i < n.inputs.size(); ++i)
                acc = add(acc, value_of(values, n.inputs[i]));
            return acc;
        }
        case OpKind::output:
            return value_of(values, n.inputs[0]);
        case OpKind::input:
            throw GraphError("input node '" + n.id + "' cannot be executed; seed it");
    }
    throw GraphError("bad op kind");
}

}  // namespace

TensorMap seed_inputs(const GraphIR& g, const TensorMap& inputs, const ExecOptions& opt) {
    TensorMap values;
    for (const Node& n : g.nodes) {
        if (n.op != OpKind::input) continue;
        auto it = inputs.find(n.id);
        if (it == inputs.end()) throw ShapeError("no input tensor for input node '" + n.id + "'");
        TensorF32 v = it->second;
        if (!n.shape.empty() && v.shape.dims != n.shape)
            throw ShapeError("input '" + n.id + "' has shape " + v.shape.str() + ", declared " +
                             Shape(n.shape).str());
        if (opt.mode == ExecMode::fake_quant) v = fake_quantize(v, edge_params(opt, n.id));
        values.emplace(n.id, std::move(v));
    }
    return values;
}

void execute_nodes(const GraphIR& g, const WeightStore& w,
                   const std::vector<std::string>& node_ids, TensorMap& values,
                   const ExecOptions& opt) {
    for (const std::string& id : node_ids) {
        const Node& n = g.node(id);
        TensorF32 v = run_op(n, w, values, opt);
        // Output nodes pass through the already-quantized upstream edge.
        if (opt.mode == ExecMode::fake_quant && n.op != OpKind::output)
            v = fake_quantize(v, edge_params(opt, n.id));
        values.insert_or_assign(n.id, std::move(v));
    }
}

TensorMap collect_outputs(const GraphIR& g, const TensorMap& values) {
    TensorMap out;
    for (const Node& n : g.nodes)
        if (n.op == OpKind::output) out.emplace(n.id, value_of(values, n.id));
    return out;
}

TensorMap execute(const GraphIR& g, const WeightStore& w, const TensorMap& inputs,
                  const ExecOptions& opt) {
    check_structure(g);
    TensorMap values = seed_inputs(g, inputs, opt);
    std::vector<std::string> rest;
    for (const Node& n : g.nodes)
        if (n.op != OpKind::input) rest.push_back(n.id);
    execute_nodes(g, w, rest, values, opt);
    return collect_outputs(g, values);
}

std::map<std::string, Shape> infer_shapes(const GraphIR& g, const WeightStore& w) {
    check_structure(g);
    std::map<std::string, Shape> shapes;
    auto in_shape = [&](const Node& n, size_t i) -> const Shape& {
        return shapes.at(n.inputs[i]);
    };
    for (const Node& n : g.nodes) {
        switch (n.op) {
            case OpKind::input: {
                if (n.shape.empty())
                    throw ShapeError("input node '" + n.id + "' has no declared shape");
                Shape s{n.shape};
                for (int d : s.dims)
                    if (d < 1) throw ShapeError("input node '" + n.id + "' has non-positive dim");
                shapes[n.id] = s;
                break;
            }
            case OpKind::conv2d: {
                const Shape& in = in_shape(n, 0);
                if (in.rank() != 4) throw ShapeError("conv2d input must be 4-D");
                const TensorF32& weights = w.get(n.conv.weights);
                const int kh = weights.dim(1), kw = weights.dim(2);
                if (weights.dim(3) != in.dim(3))
                    throw ShapeError("conv2d '" + n.id + "' channel mismatch");
                const int oh = (in.dim(1) + 2 * n.conv.pad - kh) / n.conv.stride + 1;
                const int ow = (in.dim(2) + 2 * n.conv.pad - kw) / n.conv.stride + 1;
                if (oh < 1 || ow < 1) throw ShapeError("conv2d '" + n.id + "' kernel too large");
                shapes[n.id] = Shape{in.dim(0), oh, ow, weights.dim(0)};
                break;
            }
            case OpKind::max_pool2d: {
                const Shape& in = in_shape(n, 0);
                if (in.rank() != 4) throw ShapeError("max_pool2d input must be 4-D");
                const int oh = (in.dim(1) - n.pool.k) / n.pool.stride + 1;
                const int ow = (in.dim(2) - n.pool.k) / n.pool.stride + 1;
                if (oh < 1 || ow < 1) throw ShapeError("max_pool2d '" + n.id + "' kernel too large");
                shapes[n.id] = Shape{in.dim(0), oh, ow, in.dim(3)};
                break;
            }
            case OpKind::activation:
                shapes[n.id] = in_shape(n, 0);
                break;
            case OpKind::upsample2x: {
                const Shape& in = in_shape(n, 0);
                if (in.rank() != 4) throw ShapeError("upsample2x input must be 4-D");
                shapes[n.id] = Shape{in.dim(0), in.dim(1) * 2, in.dim(2) * 2, in.dim(3)};
                break;
            }
            case OpKind::concat: {
                Shape s = in_shape(n, 0);
                for (size_t i = 1; i < n.inputs.size(); ++i) {
                    const Shape& b = in_shape(n, i);
                    if (s.rank() != 4 || b.rank() != 4 || s.dim(0) != b.dim(0) ||
                        s.dim(1) != b.dim(1) || s.dim(2) != b.dim(2))
                        throw ShapeError("concat '" + n.id + "' spatial mismatch");
                    s.dims[3] += b.dim(3);
                }
                shapes[n.id] = s;
                break;
            }
            case OpKind::add: {
                const Shape& s = in_shape(n, 0);
                for (size_t i = 1; i < n.inputs.size(); ++i)
                    if (!(in_shape(n, i) == s)) throw ShapeError("add '" + n.id + "' shape mismatch");
                shapes[n.id] = s;
                break;
            }
            case OpKind::output:
                shapes[n.id] = in_shape(n, 0);
                break;
        }
    }
    return shapes;
}

CostReport estimate_cost(const GraphIR& g, const WeightStore& w, const DpuConfig& d) {
    check_config(d);
    const auto shapes = infer_shapes(g, w);
    const double rate = static_cast<double>(d.ops_per_clock) * d.clock_hz * d.cores;

    CostReport report;
    for (const Node& n : g.nodes) {
        double ops = 0.0;
        switch (n.op) {
            case OpKind::input:
            case OpKind::output:
                ops = 0.0;
                break;
            case OpKind::conv2d: {
                const TensorF32& weights = w.get(n.conv.weights);
                const double macs = static_cast<double>(shapes.at(n.id).elems()) *
                                    weights.dim(1) * weights.dim(2) * weights.dim(3);
                ops = 2.0 * macs;
                break;
            }
            default:
                ops = static_cast<double>(shapes.at(n.id).elems());
                break;
        }
        const double seconds = ops / rate;
        report.per_node_s[n.id] = seconds;
        report.total_s += seconds;
    }
    return report;
}

}  // namespace orbitdet
