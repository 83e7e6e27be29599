#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metamix/tensor.hpp"

namespace metamix {

using NodeId = int32_t;
inline constexpr NodeId kNoNode = -1;

enum class Op : uint8_t {
    Constant,
    Param,
    Add,
    Sub,
    Mul,
    SMul,   // tensor * scalar node (1x1)
    Scale,  // tensor * compile-time constant
    MatMul,
    Transpose,
    AddBias,
    SumRows,
    SumCols,
    SumAll,
    RepeatRows,
    RepeatCols,
    LeakyRelu,  // slope 0 is plain relu
    SoftmaxRows,
    MseLoss,
    SoftmaxCeLoss,
    GatherRows,
    ScatterRowsAdd,
    ConcatRows,
    SliceRows,
};

const char* op_name(Op op);

/// One computation tape. Nodes are appended in evaluation order (the graph is
/// acyclic by construction) and values are computed eagerly. Backward rules
/// are themselves built from graph ops, so a gradient produced with
/// build_graph=true can be differentiated again for exact higher-order
/// derivatives.
///
/// A Graph is confined to one thread; independent graphs may run concurrently.
class Graph {
public:
    struct Node {
        Op op;
        NodeId a = kNoNode;
        NodeId b = kNoNode;
        double scalar = 0.0;          // Scale factor or LeakyRelu slope
        std::vector<int32_t> index;   // GatherRows / ScatterRowsAdd
        int32_t extent = 0;           // RepeatRows/Cols count, ScatterRowsAdd rows, SliceRows begin
        int32_t extent2 = 0;          // SliceRows count
        bool differentiable = false;  // has a Param ancestor
        Tensor value;
    };

    NodeId constant(Tensor v);
    NodeId param(Tensor v);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId smul(NodeId a, NodeId s);
    NodeId scale(NodeId a, double s);
    NodeId matmul(NodeId a, NodeId b);
    NodeId transpose(NodeId a);
    NodeId add_bias(NodeId h, NodeId bias);
    NodeId sum_rows(NodeId a);
    NodeId sum_cols(NodeId a);
    NodeId sum_all(NodeId a);
    NodeId repeat_rows(NodeId row, int rows);
    NodeId repeat_cols(NodeId col, int cols);
    NodeId leaky_relu(NodeId a, double slope);
    NodeId relu(NodeId a) { return leaky_relu(a, 0.0); }
    NodeId softmax_rows(NodeId a);
    NodeId mse_loss(NodeId pred, NodeId target);
    NodeId softmax_ce_loss(NodeId logits, NodeId target);
    NodeId gather_rows(NodeId a, std::span<const int32_t> idx);
    NodeId scatter_rows_add(NodeId a, std::span<const int32_t> idx, int out_rows);
    NodeId concat_rows(NodeId a, NodeId b);
    NodeId slice_rows(NodeId a, int begin, int count);

    /// Convenience: elementwise a * broadcast of a per-row coefficient column.
    NodeId row_scale(NodeId a, NodeId coeff_col);
    /// Convenience: elementwise a * broadcast of a per-column mask row.
    NodeId col_scale(NodeId a, NodeId mask_row);

    const Tensor& value(NodeId id) const { return node(id).value; }
    const Node& node(NodeId id) const;
    size_t size() const { return nodes_.size(); }

    /// Reverse-mode gradient of a scalar loss with respect to each entry of
    /// `wrt`. Every wrt node must be a differentiable ancestor of the loss.
    /// With build_graph=true the results stay attached to the tape and can be
    /// differentiated again; with build_graph=false they are detached
    /// constants (first-order semantics).
    std::vector<NodeId> gradient(NodeId loss, std::span<const NodeId> wrt, bool build_graph);

private:
    NodeId push(Node n, const char* what);
    NodeId binary(Op op, NodeId a, NodeId b);

    std::vector<Node> nodes_;
};

}  // namespace metamix
