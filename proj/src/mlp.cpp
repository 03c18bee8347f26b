#include "advdist/mlp.hpp"

#include "advdist/error.hpp"
#include "advdist/rng.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

namespace advdist {

double sigmoid(double z) noexcept {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Mlp::Mlp(std::size_t inputs, std::span<const std::size_t> hidden, std::size_t outputs) : inputs_(inputs) {
    require(inputs >= 1 && outputs >= 1, ErrorCode::InvalidArgument, "network needs inputs and outputs");
    std::size_t prev = inputs;
    std::size_t offset = 0;
    auto add = [&](std::size_t width) {
        require(width >= 1, ErrorCode::InvalidArgument, "layer width must be positive");
        Layer l{prev, width, offset, offset + prev * width};
        offset = l.bias_offset + width;
        layers_.push_back(l);
        prev = width;
    };
    for (std::size_t w : hidden) {
        add(w);
    }
    add(outputs);
    params_.assign(offset, 0.0);
    offset_.assign(inputs, 0.0);
    scale_.assign(inputs, 1.0);
}

void Mlp::init_glorot(Rng& rng) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        const double a = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        for (double& w : weights(l)) {
            w = rng.uniform(-a, a);
        }
        for (double& b : bias(l)) {
            b = 0.0;
        }
    }
}

std::span<double> Mlp::weights(std::size_t l) {
    const auto& layer = layers_.at(l);
    return {params_.data() + layer.weight_offset, layer.inputs * layer.outputs};
}
std::span<const double> Mlp::weights(std::size_t l) const {
    const auto& layer = layers_.at(l);
    return {params_.data() + layer.weight_offset, layer.inputs * layer.outputs};
}
std::span<double> Mlp::bias(std::size_t l) {
    const auto& layer = layers_.at(l);
    return {params_.data() + layer.bias_offset, layer.outputs};
}
std::span<const double> Mlp::bias(std::size_t l) const {
    const auto& layer = layers_.at(l);
    return {params_.data() + layer.bias_offset, layer.outputs};
}

void Mlp::set_normalization(std::vector<double> offset, std::vector<double> scale) {
    require(offset.size() == inputs_ && scale.size() == inputs_, ErrorCode::DimensionMismatch,
            "normalization vectors must match the input width");
    for (double& s : scale) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            s = 1.0;
        }
    }
    offset_ = std::move(offset);
    scale_ = std::move(scale);
}

namespace {

void affine(std::span<const double> w, std::span<const double> b, std::span<const double> in, std::span<double> out) {
    const std::size_t n_in = in.size();
    for (std::size_t o = 0; o < out.size(); ++o) {
        const double* row = w.data() + o * n_in;
        double acc = b[o];
        for (std::size_t i = 0; i < n_in; ++i) {
            acc += row[i] * in[i];
        }
        out[o] = acc;
    }
}

}  // namespace

void Mlp::forward(std::span<const double> x, std::span<double> out) const {
    require(x.size() == inputs_, ErrorCode::DimensionMismatch,
            "expected " + std::to_string(inputs_) + " features, got " + std::to_string(x.size()));
    require(out.size() == outputs(), ErrorCode::DimensionMismatch, "output buffer size mismatch");
    std::vector<double> cur(inputs_);
    for (std::size_t i = 0; i < inputs_; ++i) {
        cur[i] = (x[i] - offset_[i]) / scale_[i];
    }
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const bool last = l + 1 == layers_.size();
        if (last) {
            affine(weights(l), bias(l), cur, out);
            break;
        }
        next.assign(layers_[l].outputs, 0.0);
        affine(weights(l), bias(l), cur, next);
        for (double& v : next) {
            v = v > 0.0 ? v : 0.0;
        }
        cur.swap(next);
    }
}

void Mlp::forward(std::span<const double> x, Tape& tape) const {
    require(x.size() == inputs_, ErrorCode::DimensionMismatch,
            "expected " + std::to_string(inputs_) + " features, got " + std::to_string(x.size()));
    const std::size_t n_layers = layers_.size();
    tape.activations.resize(n_layers);
    tape.preactivations.resize(n_layers);
    auto& in = tape.activations[0];
    in.resize(inputs_);
    for (std::size_t i = 0; i < inputs_; ++i) {
        in[i] = (x[i] - offset_[i]) / scale_[i];
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
        auto& pre = tape.preactivations[l];
        pre.resize(layers_[l].outputs);
        affine(weights(l), bias(l), tape.activations[l], pre);
        if (l + 1 < n_layers) {
            auto& act = tape.activations[l + 1];
            act.resize(pre.size());
            for (std::size_t k = 0; k < pre.size(); ++k) {
                act[k] = pre[k] > 0.0 ? pre[k] : 0.0;
            }
        }
    }
}

void Mlp::backward(const Tape& tape, std::span<const double> output_grad, std::span<double> param_grad,
                   std::span<double> input_grad) const {
    require(output_grad.size() == outputs(), ErrorCode::DimensionMismatch, "output gradient size mismatch");
    require(param_grad.empty() || param_grad.size() == params_.size(), ErrorCode::DimensionMismatch,
            "parameter gradient size mismatch");
    require(input_grad.empty() || input_grad.size() == inputs_, ErrorCode::DimensionMismatch,
            "input gradient size mismatch");

    std::vector<double> delta(output_grad.begin(), output_grad.end());
    std::vector<double> upstream;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& layer = layers_[l];
        const auto& act = tape.activations[l];
        const auto w = weights(l);
        if (!param_grad.empty()) {
            double* gw = param_grad.data() + layer.weight_offset;
            double* gb = param_grad.data() + layer.bias_offset;
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta[o];
                if (d == 0.0) {
                    continue;
                }
                double* row = gw + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) {
                    row[i] += d * act[i];
                }
                gb[o] += d;
            }
        }
        if (l == 0 && input_grad.empty()) {
            break;
        }
        upstream.assign(layer.inputs, 0.0);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            const double d = delta[o];
            if (d == 0.0) {
                continue;
            }
            const double* row = w.data() + o * layer.inputs;
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                upstream[i] += row[i] * d;
            }
        }
        if (l == 0) {
            for (std::size_t i = 0; i < inputs_; ++i) {
                input_grad[i] = upstream[i] / scale_[i];
            }
            break;
        }
        const auto& pre = tape.preactivations[l - 1];
        delta.resize(upstream.size());
        for (std::size_t i = 0; i < upstream.size(); ++i) {
            delta[i] = pre[i] > 0.0 ? upstream[i] : 0.0;
        }
    }
}

void to_json(nlohmann::json& j, const Mlp& net) {
    auto layers = nlohmann::json::array();
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const auto& layer = net.layers()[l];
        const auto w = net.weights(l);
        const auto b = net.bias(l);
        layers.push_back({{"inputs", layer.inputs},
                          {"outputs", layer.outputs},
                          {"weights", std::vector<double>(w.begin(), w.end())},
                          {"bias", std::vector<double>(b.begin(), b.end())}});
    }
    j = {{"inputs", net.inputs()},
         {"input_offset", net.input_offset()},
         {"input_scale", net.input_scale()},
         {"layers", layers}};
}

void from_json(const nlohmann::json& j, Mlp& net) {
    const auto inputs = j.at("inputs").get<std::size_t>();
    const auto& layers = j.at("layers");
    require(layers.is_array() && !layers.empty(), ErrorCode::InvalidArgument, "network JSON has no layers");
    std::vector<std::size_t> hidden;
    std::size_t prev = inputs;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto in = layers[l].at("inputs").get<std::size_t>();
        const auto out = layers[l].at("outputs").get<std::size_t>();
        require(in == prev, ErrorCode::DimensionMismatch, "layer shapes do not chain");
        if (l + 1 < layers.size()) {
            hidden.push_back(out);
        }
        prev = out;
    }
    Mlp result(inputs, hidden, prev);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto w = layers[l].at("weights").get<std::vector<double>>();
        const auto b = layers[l].at("bias").get<std::vector<double>>();
        auto dst_w = result.weights(l);
        auto dst_b = result.bias(l);
        require(w.size() == dst_w.size() && b.size() == dst_b.size(), ErrorCode::DimensionMismatch,
                "weight array size does not match layer shape");
        std::copy(w.begin(), w.end(), dst_w.begin());
        std::copy(b.begin(), b.end(), dst_b.begin());
    }
    result.set_normalization(j.at("input_offset").get<std::vector<double>>(),
                             j.at("input_scale").get<std::vector<double>>());
    net = std::move(result);
}

Optimizer::Optimizer(OptimizerConfig config, std::size_t num_params) : config_(config) {
    if (config_.kind == OptimizerKind::Adam) {
        m_.assign(num_params, 0.0);
        v_.assign(num_params, 0.0);
    }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
    const double lr = config_.learning_rate;
    if (config_.kind == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] -= lr * grad[i];
        }
        return;
    }
    ++t_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
        v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
        params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
    }
}

OptimizerKind parse_optimizer(const std::string& name) {
    if (name == "sgd") {
        return OptimizerKind::Sgd;
    }
    if (name == "adam") {
        return OptimizerKind::Adam;
    }
    fail(ErrorCode::InvalidArgument, "unknown optimizer '" + name + "' (expected sgd|adam)");
}

const char* optimizer_name(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

}  // namespace advdist
