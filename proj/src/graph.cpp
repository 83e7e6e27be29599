#include "metamix/graph.hpp"

#include <cmath>
#include <string>

namespace metamix {

const char* op_name(Op op) {
    switch (op) {
        case Op::Constant: return "constant";
        case Op::Param: return "param";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::SMul: return "smul";
        case Op::Scale: return "scale";
        case Op::MatMul: return "matmul";
        case Op::Transpose: return "transpose";
        case Op::AddBias: return "add_bias";
        case Op::SumRows: return "sum_rows";
        case Op::SumCols: return "sum_cols";
        case Op::SumAll: return "sum_all";
        case Op::RepeatRows: return "repeat_rows";
        case Op::RepeatCols: return "repeat_cols";
        case Op::LeakyRelu: return "leaky_relu";
        case Op::SoftmaxRows: return "softmax_rows";
        case Op::MseLoss: return "mse_loss";
        case Op::SoftmaxCeLoss: return "softmax_ce_loss";
        case Op::GatherRows: return "gather_rows";
        case Op::ScatterRowsAdd: return "scatter_rows_add";
        case Op::ConcatRows: return "concat_rows";
        case Op::SliceRows: return "slice_rows";
    }
    return "?";
}

const Graph::Node& Graph::node(NodeId id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) throw shape_error("graph: invalid node id");
    return nodes_[static_cast<size_t>(id)];
}

NodeId Graph::push(Node n, const char* what) {
    n.value.require_finite(what);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::constant(Tensor v) {
    Node n{.op = Op::Constant, .value = std::move(v)};
    return push(std::move(n), "constant");
}

NodeId Graph::param(Tensor v) {
    Node n{.op = Op::Param, .differentiable = true, .value = std::move(v)};
    return push(std::move(n), "param");
}

NodeId Graph::binary(Op op, NodeId a, NodeId b) {
    Node n{.op = op, .a = a, .b = b};
    n.differentiable = node(a).differentiable || node(b).differentiable;
    switch (op) {
        case Op::Add: n.value = metamix::add(node(a).value, node(b).value); break;
        case Op::Sub: n.value = metamix::sub(node(a).value, node(b).value); break;
        case Op::Mul: n.value = metamix::mul(node(a).value, node(b).value); break;
        case Op::MatMul: n.value = metamix::matmul(node(a).value, node(b).value); break;
        case Op::AddBias: n.value = metamix::add_bias(node(a).value, node(b).value); break;
        case Op::ConcatRows: n.value = metamix::concat_rows(node(a).value, node(b).value); break;
        default: throw shape_error("graph: not a binary op");
    }
    return push(std::move(n), op_name(op));
}

NodeId Graph::add(NodeId a, NodeId b) { return binary(Op::Add, a, b); }
NodeId Graph::sub(NodeId a, NodeId b) { return binary(Op::Sub, a, b); }
NodeId Graph::mul(NodeId a, NodeId b) { return binary(Op::Mul, a, b); }
NodeId Graph::matmul(NodeId a, NodeId b) { return binary(Op::MatMul, a, b); }
NodeId Graph::add_bias(NodeId h, NodeId bias) { return binary(Op::AddBias, h, bias); }
NodeId Graph::concat_rows(NodeId a, NodeId b) { return binary(Op::ConcatRows, a, b); }

NodeId Graph::smul(NodeId a, NodeId s) {
    const Tensor& sv = node(s).value;
    if (sv.rows() != 1 || sv.cols() != 1) throw shape_error("smul: scalar operand must be 1x1");
    Node n{.op = Op::SMul, .a = a, .b = s};
    n.differentiable = node(a).differentiable || node(s).differentiable;
    n.value = metamix::scale(node(a).value, sv.at(0, 0));
    return push(std::move(n), "smul");
}

NodeId Graph::scale(NodeId a, double s) {
    Node n{.op = Op::Scale, .a = a, .scalar = s};
    n.differentiable = node(a).differentiable;
    n.value = metamix::scale(node(a).value, s);
    return push(std::move(n), "scale");
}

NodeId Graph::transpose(NodeId a) {
    Node n{.op = Op::Transpose, .a = a};
    n.differentiable = node(a).differentiable;
    n.value = metamix::transpose(node(a).value);
    return push(std::move(n), "transpose");
}

NodeId Graph::sum_rows(NodeId a) {
    Node n{.op = Op::SumRows, .a = a, .extent = node(a).value.rows()};
    n.differentiable = node(a).differentiable;
    n.value = metamix::sum_rows(node(a).value);
    return push(std::move(n), "sum_rows");
}

NodeId Graph::sum_cols(NodeId a) {
    Node n{.op = Op::SumCols, .a = a, .extent = node(a).value.cols()};
    n.differentiable = node(a).differentiable;
    n.value = metamix::sum_cols(node(a).value);
    return push(std::move(n), "sum_cols");
}

NodeId Graph::sum_all(NodeId a) {
    Node n{.op = Op::SumAll, .a = a};
    n.differentiable = node(a).differentiable;
    n.value = Tensor::scalar(metamix::sum_all(node(a).value));
    return push(std::move(n), "sum_all");
}

NodeId Graph::repeat_rows(NodeId row, int rows) {
    Node n{.op = Op::RepeatRows, .a = row, .extent = rows};
    n.differentiable = node(row).differentiable;
    n.value = metamix::repeat_rows(node(row).value, rows);
    return push(std::move(n), "repeat_rows");
}

NodeId Graph::repeat_cols(NodeId col, int cols) {
    Node n{.op = Op::RepeatCols, .a = col, .extent = cols};
    n.differentiable = node(col).differentiable;
    n.value = metamix::repeat_cols(node(col).value, cols);
    return push(std::move(n), "repeat_cols");
}

NodeId Graph::leaky_relu(NodeId a, double slope) {
    Node n{.op = Op::LeakyRelu, .a = a, .scalar = slope};
    n.differentiable = node(a).differentiable;
    n.value = metamix::leaky_relu(node(a).value, slope);
    return push(std::move(n), "leaky_relu");
}

NodeId Graph::softmax_rows(NodeId a) {
    Node n{.op = Op::SoftmaxRows, .a = a};
    n.differentiable = node(a).differentiable;
    n.value = metamix::softmax_rows(node(a).value);
    return push(std::move(n), "softmax_rows");
}

NodeId Graph::mse_loss(NodeId pred, NodeId target) {
    Node n{.op = Op::MseLoss, .a = pred, .b = target};
    n.differentiable = node(pred).differentiable || node(target).differentiable;
    n.value = Tensor::scalar(metamix::mse_value(node(pred).value, node(target).value));
    return push(std::move(n), "mse_loss");
}

NodeId Graph::softmax_ce_loss(NodeId logits, NodeId target) {
    Node n{.op = Op::SoftmaxCeLoss, .a = logits, .b = target};
    n.differentiable = node(logits).differentiable || node(target).differentiable;
    n.value = Tensor::scalar(metamix::softmax_ce_value(node(logits).value, node(target).value));
    return push(std::move(n), "softmax_ce_loss");
}

NodeId Graph::gather_rows(NodeId a, std::span<const int32_t> idx) {
    Node n{.op = Op::GatherRows, .a = a, .index = {idx.begin(), idx.end()}, .extent = node(a).value.rows()};
    n.differentiable = node(a).differentiable;
    n.value = metamix::gather_rows(node(a).value, idx);
    return push(std::move(n), "gather_rows");
}

NodeId Graph::scatter_rows_add(NodeId a, std::span<const int32_t> idx, int out_rows) {
    Node n{.op = Op::ScatterRowsAdd, .a = a, .index = {idx.begin(), idx.end()}, .extent = out_rows};
    n.differentiable = node(a).differentiable;
    n.value = metamix::scatter_rows_add(node(a).value, idx, out_rows);
    return push(std::move(n), "scatter_rows_add");
}

NodeId Graph::slice_rows(NodeId a, int begin, int count) {
    Node n{.op = Op::SliceRows, .a = a, .extent = begin, .extent2 = count};
    n.differentiable = node(a).differentiable;
    n.value = metamix::slice_rows(node(a).value, begin, count);
    return push(std::move(n), "slice_rows");
}

NodeId Graph::row_scale(NodeId a, NodeId coeff_col) {
    return mul(a, repeat_cols(coeff_col, node(a).value.cols()));
}

NodeId Graph::col_scale(NodeId a, NodeId mask_row) {
    return mul(a, repeat_rows(mask_row, node(a).value.rows()));
}

std::vector<NodeId> Graph::gradient(NodeId loss, std::span<const NodeId> wrt, bool build_graph) {
    const Tensor& lv = node(loss).value;
    if (lv.rows() != 1 || lv.cols() != 1) throw shape_error("gradient: loss must be a 1x1 scalar");

    // Nodes on a path from some wrt entry to the loss.
    std::vector<uint8_t> from_wrt(static_cast<size_t>(loss) + 1, 0);
    for (NodeId w : wrt) {
        if (w < 0 || w > loss) throw shape_error("gradient: wrt node not on tape before loss");
        if (!node(w).differentiable) throw shape_error("gradient: wrt node is not differentiable");
        from_wrt[static_cast<size_t>(w)] = 1;
    }
    for (NodeId i = 0; i <= loss; ++i) {
        const Node& n = nodes_[static_cast<size_t>(i)];
        if (from_wrt[static_cast<size_t>(i)]) continue;
        const bool a_hit = n.a != kNoNode && from_wrt[static_cast<size_t>(n.a)];
        const bool b_hit = n.b != kNoNode && from_wrt[static_cast<size_t>(n.b)];
        if (a_hit || b_hit) from_wrt[static_cast<size_t>(i)] = 1;
    }

    std::vector<uint8_t> to_loss(static_cast<size_t>(loss) + 1, 0);
    to_loss[static_cast<size_t>(loss)] = 1;
    for (NodeId i = loss; i >= 0; --i) {
        if (!to_loss[static_cast<size_t>(i)]) continue;
        const Node& n = nodes_[static_cast<size_t>(i)];
        if (n.a != kNoNode) to_loss[static_cast<size_t>(n.a)] = 1;
        if (n.b != kNoNode) to_loss[static_cast<size_t>(n.b)] = 1;
    }
    for (NodeId w : wrt) {
        if (!to_loss[static_cast<size_t>(w)])
            throw shape_error("gradient: parameter unreachable from loss (wiring bug)");
    }

    // adj[i]: accumulated adjoint node for node i, or kNoNode.
    std::vector<NodeId> adj(static_cast<size_t>(loss) + 1, kNoNode);
    adj[static_cast<size_t>(loss)] = constant(Tensor::scalar(1.0));

    auto accumulate = [&](NodeId target, NodeId grad) {
        if (target == kNoNode) return;
        // Only propagate into subtrees that can reach a wrt entry.
        if (!from_wrt[static_cast<size_t>(target)] || !to_loss[static_cast<size_t>(target)]) return;
        NodeId& slot = adj[static_cast<size_t>(target)];
        slot = slot == kNoNode ? grad : add(slot, grad);
    };

    for (NodeId i = loss; i >= 0; --i) {
        const NodeId g = adj[static_cast<size_t>(i)];
        if (g == kNoNode) continue;
        // Copy the fields used below: pushing backward nodes may reallocate nodes_.
        const Op op = nodes_[static_cast<size_t>(i)].op;
        const NodeId a = nodes_[static_cast<size_t>(i)].a;
        const NodeId b = nodes_[static_cast<size_t>(i)].b;
        const double sc = nodes_[static_cast<size_t>(i)].scalar;
        const int32_t extent = nodes_[static_cast<size_t>(i)].extent;
        const int32_t extent2 = nodes_[static_cast<size_t>(i)].extent2;

        auto wants = [&](NodeId in) {
            return in != kNoNode && from_wrt[static_cast<size_t>(in)] && to_loss[static_cast<size_t>(in)];
        };

        switch (op) {
            case Op::Constant:
            case Op::Param:
                break;
            case Op::Add:
                accumulate(a, g);
                accumulate(b, g);
                break;
            case Op::Sub:
                accumulate(a, g);
                accumulate(b, scale(g, -1.0));
                break;
            case Op::Mul:
                if (wants(a)) accumulate(a, mul(g, b));
                if (wants(b)) accumulate(b, mul(g, a));
                break;
            case Op::SMul:
                if (wants(a)) accumulate(a, smul(g, b));
                if (wants(b)) accumulate(b, sum_all(mul(g, a)));
                break;
            case Op::Scale:
                accumulate(a, scale(g, sc));
                break;
            case Op::MatMul:
                if (wants(a)) accumulate(a, matmul(g, transpose(b)));
                if (wants(b)) accumulate(b, matmul(transpose(a), g));
                break;
            case Op::Transpose:
                accumulate(a, transpose(g));
                break;
            case Op::AddBias:
                accumulate(a, g);
                if (wants(b)) accumulate(b, sum_rows(g));
                break;
            case Op::SumRows:
                accumulate(a, repeat_rows(g, extent));
                break;
            case Op::SumCols:
                accumulate(a, repeat_cols(g, extent));
                break;
            case Op::SumAll:
                if (wants(a)) {
                    const Tensor& av = node(a).value;
                    accumulate(a, smul(constant(Tensor::full(av.rows(), av.cols(), 1.0)), g));
                }
                break;
            case Op::RepeatRows:
                accumulate(a, sum_rows(g));
                break;
            case Op::RepeatCols:
                accumulate(a, sum_cols(g));
                break;
            case Op::LeakyRelu:
                if (wants(a)) {
                    // Fixed sub-gradient convention at the kink: the negative
                    // branch slope applies at exactly zero. The mask is a
                    // constant, so second derivatives of the activation are
                    // zero almost everywhere, matching the piecewise-linear map.
                    const Tensor& av = node(a).value;
                    Tensor mask(av.rows(), av.cols());
                    for (int64_t k = 0; k < av.size(); ++k) mask[k] = av[k] > 0.0 ? 1.0 : sc;
                    accumulate(a, mul(g, constant(std::move(mask))));
                }
                break;
            case Op::SoftmaxRows:
                if (wants(a)) {
                    // i is the softmax output node itself.
                    const NodeId gs = mul(g, i);
                    const NodeId inner = sub(g, repeat_cols(sum_cols(gs), node(a).value.cols()));
                    accumulate(a, mul(i, inner));
                }
                break;
            case Op::MseLoss: {
                const double inv = 2.0 / static_cast<double>(node(a).value.size());
                if (wants(a)) accumulate(a, smul(sub(a, b), scale(g, inv)));
                if (wants(b)) accumulate(b, smul(sub(a, b), scale(g, -inv)));
                break;
            }
            case Op::SoftmaxCeLoss: {
                if (wants(b))
                    throw shape_error("gradient: softmax_ce_loss target gradient is unsupported");
                if (wants(a)) {
                    const double inv = 1.0 / static_cast<double>(node(a).value.rows());
                    accumulate(a, smul(sub(softmax_rows(a), b), scale(g, inv)));
                }
                break;
            }
            case Op::GatherRows:
                if (wants(a)) accumulate(a, scatter_rows_add(g, nodes_[static_cast<size_t>(i)].index, extent));
                break;
            case Op::ScatterRowsAdd:
                if (wants(a)) accumulate(a, gather_rows(g, nodes_[static_cast<size_t>(i)].index));
                break;
            case Op::ConcatRows:
                if (wants(a)) accumulate(a, slice_rows(g, 0, node(a).value.rows()));
                if (wants(b)) accumulate(b, slice_rows(g, node(a).value.rows(), node(b).value.rows()));
                break;
            case Op::SliceRows:
                if (wants(a)) {
                    std::vector<int32_t> idx(static_cast<size_t>(extent2));
                    for (int32_t k = 0; k < extent2; ++k) idx[static_cast<size_t>(k)] = extent + k;
                    accumulate(a, scatter_rows_add(g, idx, node(a).value.rows()));
                }
                break;
        }
    }

    std::vector<NodeId> out;
    out.reserve(wrt.size());
    for (NodeId w : wrt) {
        NodeId gi = adj[static_cast<size_t>(w)];
        if (gi == kNoNode) throw shape_error("gradient: parameter unreachable from loss (wiring bug)");
        out.push_back(build_graph ? gi : constant(node(gi).value));
    }
    return out;
}

}  // namespace metamix
