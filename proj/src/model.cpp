#include "metamix/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace metamix {

void MetaModel::validate() const {
    if (layer_dims.size() < 2) throw shape_error("model: need at least one layer");
    for (int d : layer_dims)
        if (d < 1) throw shape_error("model: layer widths must be positive");
    if (act_slope < 0.0) throw shape_error("model: negative activation slope");
}

void ParamSet::validate_for(const MetaModel& model) const {
    if (static_cast<int>(layers.size()) != model.layers()) throw shape_error("params: layer count mismatch");
    for (int l = 0; l < model.layers(); ++l) {
        const auto& lay = layers[static_cast<size_t>(l)];
        if (lay.w.rows() != model.layer_dims[static_cast<size_t>(l)] ||
            lay.w.cols() != model.layer_dims[static_cast<size_t>(l) + 1])
            throw shape_error("params: weight shape mismatch");
        if (lay.b.rows() != 1 || lay.b.cols() != lay.w.cols()) throw shape_error("params: bias shape mismatch");
        lay.w.require_finite("params");
        lay.b.require_finite("params");
    }
    if (!rates.empty() && rates.size() != layers.size()) throw shape_error("params: rate set layer count mismatch");
    if (adaptable.size() != layers.size()) throw shape_error("params: adaptable mask length mismatch");
}

bool ParamSet::bitwise_equal(const ParamSet& o) const {
    auto tensors_equal = [](const Tensor& a, const Tensor& b) {
        return a.same_shape(b) &&
               std::memcmp(a.data().data(), b.data().data(), sizeof(double) * static_cast<size_t>(a.size())) == 0;
    };
    if (layers.size() != o.layers.size() || rates.size() != o.rates.size() || adaptable != o.adaptable) return false;
    for (size_t l = 0; l < layers.size(); ++l)
        if (!tensors_equal(layers[l].w, o.layers[l].w) || !tensors_equal(layers[l].b, o.layers[l].b)) return false;
    for (size_t l = 0; l < rates.size(); ++l)
        if (!tensors_equal(rates[l].w, o.rates[l].w) || !tensors_equal(rates[l].b, o.rates[l].b)) return false;
    return true;
}

ParamSet init_params(const MetaModel& model, uint64_t seed) {
    model.validate();
    RngStream rng = named_stream(seed, "init");
    ParamSet p;
    for (int l = 0; l < model.layers(); ++l) {
        const int fan_in = model.layer_dims[static_cast<size_t>(l)];
        const int fan_out = model.layer_dims[static_cast<size_t>(l) + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Tensor w(fan_in, fan_out);
        for (int64_t i = 0; i < w.size(); ++i) w[i] = (2.0 * rng.uniform() - 1.0) * bound;
        p.layers.push_back({std::move(w), Tensor::zeros(1, fan_out)});
    }
    p.adaptable.assign(static_cast<size_t>(model.layers()), 1);
    return p;
}

void attach_rates(ParamSet& params, double inner_lr) {
    params.rates.clear();
    for (const auto& lay : params.layers)
        params.rates.push_back({Tensor::full(lay.w.rows(), lay.w.cols(), inner_lr),
                                Tensor::full(lay.b.rows(), lay.b.cols(), inner_lr)});
}

void set_head_only_adaptation(ParamSet& params) {
    params.adaptable.assign(params.layers.size(), 0);
    params.adaptable.back() = 1;
}

namespace {

constexpr uint32_t kMagic = 0x4d4d4b31;  // "MMK1"
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
void write_tensor(std::ostream& os, const Tensor& t) {
    write_u32(os, static_cast<uint32_t>(t.rows()));
    write_u32(os, static_cast<uint32_t>(t.cols()));
    os.write(reinterpret_cast<const char*>(t.data().data()), sizeof(double) * static_cast<size_t>(t.size()));
}

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw shape_error("checkpoint: truncated file");
    return v;
}

Tensor read_tensor(std::istream& is) {
    const int rows = static_cast<int>(read_u32(is));
    const int cols = static_cast<int>(read_u32(is));
    if (rows < 0 || cols < 0 || static_cast<int64_t>(rows) * cols > (1ll << 32))
        throw shape_error("checkpoint: implausible tensor shape");
    Tensor t(rows, cols);
    is.read(reinterpret_cast<char*>(t.data().data()), sizeof(double) * static_cast<size_t>(t.size()));
    if (!is) throw shape_error("checkpoint: truncated file");
    return t;
}

}  // namespace

void save_params(const ParamSet& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw shape_error("checkpoint: cannot open for writing: " + path);
    write_u32(os, kMagic);
    write_u32(os, kVersion);
    write_u32(os, static_cast<uint32_t>(params.layers.size()));
    write_u32(os, params.has_rates() ? 1u : 0u);
    for (size_t l = 0; l < params.layers.size(); ++l) {
        write_u32(os, static_cast<uint32_t>(params.adaptable[l]));
        write_tensor(os, params.layers[l].w);
        write_tensor(os, params.layers[l].b);
        if (params.has_rates()) {
            write_tensor(os, params.rates[l].w);
            write_tensor(os, params.rates[l].b);
        }
    }
    if (!os) throw shape_error("checkpoint: write failed: " + path);
}

ParamSet load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw shape_error("checkpoint: cannot open: " + path);
    if (read_u32(is) != kMagic) throw shape_error("checkpoint: bad magic in " + path);
    if (read_u32(is) != kVersion) throw shape_error("checkpoint: unsupported version in " + path);
    const uint32_t layers = read_u32(is);
    const bool rates = read_u32(is) != 0;
    ParamSet p;
    for (uint32_t l = 0; l < layers; ++l) {
        p.adaptable.push_back(static_cast<uint8_t>(read_u32(is)));
        Tensor w = read_tensor(is);
        Tensor b = read_tensor(is);
        p.layers.push_back({std::move(w), std::move(b)});
        if (rates) {
            Tensor rw = read_tensor(is);
            Tensor rb = read_tensor(is);
            p.rates.push_back({std::move(rw), std::move(rb)});
        }
    }
    return p;
}

std::vector<NodeId> ParamNodes::flat() const {
    std::vector<NodeId> out;
    for (const auto& l : layers) {
        out.push_back(l.w);
        out.push_back(l.b);
    }
    return out;
}

std::vector<NodeId> ParamNodes::flat_with_rates() const {
    std::vector<NodeId> out = flat();
    for (const auto& l : rates) {
        out.push_back(l.w);
        out.push_back(l.b);
    }
    return out;
}

ParamNodes lift(Graph& g, const ParamSet& params) {
    ParamNodes p;
    for (const auto& lay : params.layers) p.layers.push_back({g.param(lay.w), g.param(lay.b)});
    for (const auto& lay : params.rates) p.rates.push_back({g.param(lay.w), g.param(lay.b)});
    p.adaptable = params.adaptable;
    return p;
}

NodeId forward_to_layer(Graph& g, const MetaModel& model, const ParamNodes& p, NodeId x, int l) {
    if (l < 0 || l > model.layers() - 1) throw shape_error("forward_to_layer: layer index out of range");
    NodeId h = x;
    for (int i = 0; i < l; ++i) {
        h = g.add_bias(g.matmul(h, p.layers[static_cast<size_t>(i)].w), p.layers[static_cast<size_t>(i)].b);
        h = g.leaky_relu(h, model.act_slope);
    }
    return h;
}

NodeId forward_from_layer(Graph& g, const MetaModel& model, const ParamNodes& p, NodeId h, int l) {
    const int L = model.layers();
    if (l < 0 || l > L - 1) throw shape_error("forward_from_layer: layer index out of range");
    if (g.value(h).cols() != model.layer_dims[static_cast<size_t>(l)])
        throw shape_error("forward_from_layer: representation width does not match layer");
    NodeId out = h;
    for (int i = l; i < L; ++i) {
        out = g.add_bias(g.matmul(out, p.layers[static_cast<size_t>(i)].w), p.layers[static_cast<size_t>(i)].b);
        if (i < L - 1) out = g.leaky_relu(out, model.act_slope);
    }
    return out;
}

NodeId forward(Graph& g, const MetaModel& model, const ParamNodes& p, NodeId x) {
    return forward_from_layer(g, model, p, x, 0);
}

NodeId loss_node(Graph& g, const MetaModel& model, NodeId pred, NodeId target) {
    return model.loss == LossKind::Mse ? g.mse_loss(pred, target) : g.softmax_ce_loss(pred, target);
}

Tensor forward_to_layer_value(const MetaModel& model, const ParamSet& params, const Tensor& x, int l) {
    if (l < 0 || l > model.layers() - 1) throw shape_error("forward_to_layer: layer index out of range");
    Tensor h = x;
    for (int i = 0; i < l; ++i) {
        h = leaky_relu(add_bias(matmul(h, params.layers[static_cast<size_t>(i)].w), params.layers[static_cast<size_t>(i)].b),
                       model.act_slope);
    }
    return h;
}

Tensor forward_value(const MetaModel& model, const ParamSet& params, const Tensor& x) {
    const int L = model.layers();
    Tensor h = x;
    for (int i = 0; i < L; ++i) {
        h = add_bias(matmul(h, params.layers[static_cast<size_t>(i)].w), params.layers[static_cast<size_t>(i)].b);
        if (i < L - 1) h = leaky_relu(h, model.act_slope);
    }
    return h;
}

double loss_value(const MetaModel& model, const Tensor& pred, const Tensor& target) {
    return model.loss == LossKind::Mse ? mse_value(pred, target) : softmax_ce_value(pred, target);
}

}  // namespace metamix
