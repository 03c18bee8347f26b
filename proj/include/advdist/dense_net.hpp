#pragma once

#include "advdist/mlp.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace advdist {

class Rng;

/// Pseudo model: ReLU hidden layers and a scalar sigmoid output that regresses
/// the black box's class-of-interest confidence.
class DenseNet {
  public:
    DenseNet() = default;
    /// `net` must have exactly one output.
    explicit DenseNet(Mlp net);

    /// Glorot-initialized network of the given hidden widths.
    static DenseNet create(std::size_t inputs, std::span<const std::size_t> hidden, Rng& rng);

    [[nodiscard]] std::size_t inputs() const noexcept { return net_.inputs(); }

    /// sigmoid of the final affine output. Throws DimensionMismatch.
    [[nodiscard]] double forward(std::span<const double> x) const;

    /// Exact d/dx of (forward(x) - target)^2 by backpropagation.
    [[nodiscard]] std::vector<double> input_gradient(std::span<const double> x, double target) const;
    void input_gradient(std::span<const double> x, double target, std::span<double> out) const;

    [[nodiscard]] const Mlp& network() const noexcept { return net_; }
    [[nodiscard]] Mlp& network() noexcept { return net_; }

    friend bool operator==(const DenseNet&, const DenseNet&) = default;

  private:
    Mlp net_;
};

void to_json(nlohmann::json& j, const DenseNet& net);
void from_json(const nlohmann::json& j, DenseNet& net);

}  // namespace advdist
