#include "advdist/dense_net.hpp"

#include "advdist/error.hpp"
#include "advdist/rng.hpp"

#include <nlohmann/json.hpp>

namespace advdist {

DenseNet::DenseNet(Mlp net) : net_(std::move(net)) {
    require(net_.outputs() == 1, ErrorCode::DimensionMismatch, "pseudo model must have a scalar output");
}

DenseNet DenseNet::create(std::size_t inputs, std::span<const std::size_t> hidden, Rng& rng) {
    Mlp net(inputs, hidden, 1);
    net.init_glorot(rng);
    return DenseNet(std::move(net));
}

double DenseNet::forward(std::span<const double> x) const {
    double z = 0.0;
    net_.forward(x, std::span<double>(&z, 1));
    return sigmoid(z);
}

std::vector<double> DenseNet::input_gradient(std::span<const double> x, double target) const {
    std::vector<double> g(net_.inputs());
    input_gradient(x, target, g);
    return g;
}

void DenseNet::input_gradient(std::span<const double> x, double target, std::span<double> out) const {
    require(out.size() == net_.inputs(), ErrorCode::DimensionMismatch, "gradient buffer size mismatch");
    Mlp::Tape tape;
    net_.forward(x, tape);
    const double f = sigmoid(tape.preactivations.back()[0]);
    const double dz = 2.0 * (f - target) * f * (1.0 - f);
    net_.backward(tape, std::span<const double>(&dz, 1), {}, out);
}

void to_json(nlohmann::json& j, const DenseNet& net) {
    j = {{"kind", "dense_net"}, {"hidden_activation", "relu"}, {"output_activation", "sigmoid"},
         {"network", net.network()}};
}

void from_json(const nlohmann::json& j, DenseNet& net) {
    require(j.value("kind", std::string{}) == "dense_net", ErrorCode::InvalidArgument, "not a dense_net document");
    net = DenseNet(j.at("network").get<Mlp>());
}

}  // namespace advdist
