#pragma once

#include <string>
#include <vector>

#include "metamix/graph.hpp"
#include "metamix/rng.hpp"
#include "metamix/tensor.hpp"

namespace metamix {

enum class LossKind { Mse, SoftmaxCe };

/// Fully connected base model: layer_dims = [in, hidden..., out] giving
/// L = layer_dims.size()-1 affine layers. Every layer except the head is
/// followed by the activation; the head is linear. Immutable and shareable.
struct MetaModel {
    std::vector<int> layer_dims;
    double act_slope = 0.01;  // leaky-relu negative slope; 0 gives plain relu
    LossKind loss = LossKind::Mse;

    int layers() const { return static_cast<int>(layer_dims.size()) - 1; }
    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    void validate() const;
};

/// One concrete parameter assignment for a MetaModel: per-layer weights and
/// biases, an optional per-parameter learning-rate set (MetaSGD), and a
/// per-layer adaptable mask (head-only adaptation switches everything but the
/// last layer off).
struct ParamSet {
    struct Layer {
        Tensor w;  // in x out
        Tensor b;  // 1 x out
    };
    std::vector<Layer> layers;
    std::vector<Layer> rates;       // empty unless MetaSGD
    std::vector<uint8_t> adaptable;

    bool has_rates() const { return !rates.empty(); }
    void validate_for(const MetaModel& model) const;
    bool bitwise_equal(const ParamSet& o) const;
};

/// Scaled-uniform fan-in/fan-out initialization, deterministic in the seed.
/// Weights are uniform on +-sqrt(6/(fan_in+fan_out)); biases start at zero.
ParamSet init_params(const MetaModel& model, uint64_t seed);

/// Attaches MetaSGD per-parameter rates, all initialized to `inner_lr`.
void attach_rates(ParamSet& params, double inner_lr);

/// Marks only the head layer adaptable (everything else frozen in the inner loop).
void set_head_only_adaptation(ParamSet& params);

// Versioned binary checkpoint; round-trips bit-exactly.
void save_params(const ParamSet& params, const std::string& path);
ParamSet load_params(const std::string& path);

/// Parameter leaves lifted onto a tape. Adapted copies share node ids for
/// layers that did not move.
struct ParamNodes {
    struct Layer {
        NodeId w = kNoNode;
        NodeId b = kNoNode;
    };
    std::vector<Layer> layers;
    std::vector<Layer> rates;
    std::vector<uint8_t> adaptable;

    std::vector<NodeId> flat() const;            // all layer tensors, w then b per layer
    std::vector<NodeId> flat_with_rates() const; // plus rate tensors when present
};

ParamNodes lift(Graph& g, const ParamSet& params);

/// Hidden representation after the first `l` layers (affine + activation
/// each); l = 0 returns the input unchanged. Requires 0 <= l <= L-1.
NodeId forward_to_layer(Graph& g, const MetaModel& model, const ParamNodes& p, NodeId x, int l);

/// Applies the remaining layers l+1..L to a representation of layer-l width.
/// The head stays linear. forward_from_layer(forward_to_layer(x, l), l) equals
/// the full forward pass for every l.
NodeId forward_from_layer(Graph& g, const MetaModel& model, const ParamNodes& p, NodeId h, int l);

NodeId forward(Graph& g, const MetaModel& model, const ParamNodes& p, NodeId x);

NodeId loss_node(Graph& g, const MetaModel& model, NodeId pred, NodeId target);

/// Plain (non-graph) forward pass for evaluation.
Tensor forward_value(const MetaModel& model, const ParamSet& params, const Tensor& x);
Tensor forward_to_layer_value(const MetaModel& model, const ParamSet& params, const Tensor& x, int l);
double loss_value(const MetaModel& model, const Tensor& pred, const Tensor& target);

}  // namespace metamix
