#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace advdist {

class Rng;

/// Fully connected ReLU network with a fixed input normalization
/// x' = (x - offset) / scale and a linear final layer. Parameters live in one
/// flat buffer so optimizers can treat them uniformly.
class Mlp {
  public:
    struct Layer {
        std::size_t inputs = 0;
        std::size_t outputs = 0;
        std::size_t weight_offset = 0;  ///< row-major outputs x inputs
        std::size_t bias_offset = 0;

        friend bool operator==(const Layer&, const Layer&) = default;
    };

    /// Intermediate values recorded by a forward pass for backpropagation.
    struct Tape {
        std::vector<std::vector<double>> activations;  ///< [0] = normalized input
        std::vector<std::vector<double>> preactivations;
    };

    Mlp() = default;
    Mlp(std::size_t inputs, std::span<const std::size_t> hidden, std::size_t outputs);

    /// Glorot-uniform weights, zero biases.
    void init_glorot(Rng& rng);

    [[nodiscard]] std::size_t inputs() const noexcept { return inputs_; }
    [[nodiscard]] std::size_t outputs() const noexcept { return layers_.empty() ? 0 : layers_.back().outputs; }
    [[nodiscard]] const std::vector<Layer>& layers() const noexcept { return layers_; }

    [[nodiscard]] std::span<double> weights(std::size_t l);
    [[nodiscard]] std::span<const double> weights(std::size_t l) const;
    [[nodiscard]] std::span<double> bias(std::size_t l);
    [[nodiscard]] std::span<const double> bias(std::size_t l) const;
    [[nodiscard]] std::span<double> params() noexcept { return params_; }
    [[nodiscard]] std::span<const double> params() const noexcept { return params_; }

    void set_normalization(std::vector<double> offset, std::vector<double> scale);
    [[nodiscard]] const std::vector<double>& input_offset() const noexcept { return offset_; }
    [[nodiscard]] const std::vector<double>& input_scale() const noexcept { return scale_; }

    /// Final-layer output (no output nonlinearity). Throws DimensionMismatch.
    void forward(std::span<const double> x, std::span<double> out) const;
    void forward(std::span<const double> x, Tape& tape) const;

    /// Backpropagates dL/d(output). Accumulates into `param_grad` (same layout as
    /// params(), may be empty) and writes dL/dx into `input_grad` (may be empty).
    void backward(const Tape& tape, std::span<const double> output_grad, std::span<double> param_grad,
                  std::span<double> input_grad) const;

    friend bool operator==(const Mlp&, const Mlp&) = default;

  private:
    std::size_t inputs_ = 0;
    std::vector<Layer> layers_;
    std::vector<double> params_;
    std::vector<double> offset_;
    std::vector<double> scale_;
};

void to_json(nlohmann::json& j, const Mlp& net);
void from_json(const nlohmann::json& j, Mlp& net);

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Sgd;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Plain gradient descent or Adam over a flat parameter buffer.
class Optimizer {
  public:
    Optimizer(OptimizerConfig config, std::size_t num_params);
    void step(std::span<double> params, std::span<const double> grad);

  private:
    OptimizerConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    long long t_ = 0;
};

[[nodiscard]] OptimizerKind parse_optimizer(const std::string& name);
[[nodiscard]] const char* optimizer_name(OptimizerKind kind);

[[nodiscard]] double sigmoid(double z) noexcept;

}  // namespace advdist
