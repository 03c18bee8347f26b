#include "advdist/classifier.hpp"
#include "advdist/dense_net.hpp"
#include "advdist/error.hpp"
#include "advdist/extraction.hpp"
#include "advdist/rng.hpp"
#include "../support/oracles.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace advdist;

namespace {

using oracles::random_net;
using oracles::stratum_counts;

// Straight-line forward pass written against the documented layout.
double forward_oracle(const DenseNet& net, const std::vector<double>& x) {
    const auto& m = net.network();
    std::vector<double> a(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) a[j] = (x[j] - m.input_offset()[j]) / m.input_scale()[j];
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
        const auto& layer = m.layers()[l];
        const auto w = m.weights(l);
        const auto b = m.bias(l);
        std::vector<double> z(layer.outputs);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            double s = b[o];
            for (std::size_t i = 0; i < layer.inputs; ++i) s += w[o * layer.inputs + i] * a[i];
            z[o] = l + 1 < m.layers().size() ? std::max(0.0, s) : s;
        }
        a = z;
    }
    return 1.0 / (1.0 + std::exp(-a[0]));
}

class ConstantClassifier final : public Classifier {
  public:
    explicit ConstantClassifier(Prediction p) : p_(p) {}
    Prediction predict(std::span<const double>) const override { return p_; }
    std::size_t num_classes() const override { return 2; }
    std::optional<std::size_t> num_features() const override { return std::nullopt; }

  private:
    Prediction p_;
};

}  // namespace

TEST_CASE("lhs_design stratification") {
    SUBCASE("four points over [0,8]") {
        const auto d = lhs_design({{0.0, 8.0}}, 4, 3);
        std::vector<double> xs;
        for (std::size_t i = 0; i < 4; ++i) xs.push_back(d.points.at(i, 0));
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(xs[k] >= 2.0 * static_cast<double>(k));
            CHECK(xs[k] <= 2.0 * static_cast<double>(k + 1));
        }
        CHECK(xs[0] < 2.0);
        CHECK(xs[1] < 4.0);
        CHECK(xs[2] < 6.0);
    }
    SUBCASE("single point lies in the box") {
        const auto d = lhs_design({{-1.0, 1.0}, {5.0, 6.0}}, 1, 9);
        REQUIRE(d.points.rows() == 1);
        CHECK(d.points.at(0, 0) >= -1.0);
        CHECK(d.points.at(0, 0) <= 1.0);
        CHECK(d.points.at(0, 1) >= 5.0);
        CHECK(d.points.at(0, 1) <= 6.0);
    }
    SUBCASE("constant column") {
        const auto d = lhs_design({{2.5, 2.5}, {0.0, 1.0}}, 10, 1);
        for (std::size_t i = 0; i < 10; ++i) CHECK(d.points.at(i, 0) == 2.5);
    }
    SUBCASE("n=100, M=5 passes the bin-count oracle") {
        std::mt19937_64 gen(4);
        std::uniform_real_distribution<double> u(-50.0, 50.0);
        FeatureRanges r;
        for (int j = 0; j < 5; ++j) {
            const double a = u(gen), b = u(gen);
            r.push_back({std::min(a, b), std::max(a, b)});
        }
        const auto d = lhs_design(r, 100, 17);
        for (std::size_t j = 0; j < 5; ++j) {
            const auto c = stratum_counts(d, j);
            CHECK(std::all_of(c.begin(), c.end(), [](int v) { return v == 1; }));
        }
    }
    SUBCASE("property: random triples") {
        std::mt19937_64 gen(99);
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = 1 + gen() % 200;
            const std::size_t m = 1 + gen() % 10;
            std::uniform_real_distribution<double> u(-1e3, 1e3);
            FeatureRanges r;
            for (std::size_t j = 0; j < m; ++j) {
                const double a = u(gen), b = u(gen);
                r.push_back({std::min(a, b), std::max(a, b)});
            }
            const auto d = lhs_design(r, n, gen());
            for (std::size_t j = 0; j < m; ++j) {
                const auto c = stratum_counts(d, j);
                CHECK(std::all_of(c.begin(), c.end(), [](int v) { return v == 1; }));
            }
        }
    }
    SUBCASE("deterministic under the seed, columns permuted independently") {
        const FeatureRanges r{{0.0, 1.0}, {0.0, 1.0}};
        const auto a = lhs_design(r, 50, 5);
        const auto b = lhs_design(r, 50, 5);
        CHECK(std::equal(a.points.data().begin(), a.points.data().end(), b.points.data().begin()));
        int same_stratum = 0;
        for (std::size_t i = 0; i < 50; ++i) {
            same_stratum += static_cast<int>(a.points.at(i, 0) * 50) == static_cast<int>(a.points.at(i, 1) * 50);
        }
        CHECK(same_stratum < 50);
    }
}

TEST_CASE("DenseNet forward") {
    SUBCASE("zero weights give sigmoid of the output bias") {
        Mlp m(3, std::vector<std::size_t>{4}, 1);
        DenseNet net(m);
        const std::vector<double> x{1.0, -2.0, 7.0};
        CHECK(net.forward(x) == 0.5);
        net.network().bias(1)[0] = 1.3;
        CHECK(net.forward(x) == doctest::Approx(1.0 / (1.0 + std::exp(-1.3))).epsilon(1e-15));
    }
    SUBCASE("matches a straight-line oracle") {
        std::mt19937_64 gen(8);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int t = 0; t < 50; ++t) {
            const std::size_t m = 1 + gen() % 6;
            const auto net = random_net(m, {1 + gen() % 9, 1 + gen() % 9}, gen());
            std::vector<double> x(m);
            for (auto& v : x) v = u(gen);
            const double y = net.forward(x);
            CHECK(std::abs(y - forward_oracle(net, x)) <= 1e-12);
            CHECK(y > 0.0);
            CHECK(y < 1.0);
        }
    }
    SUBCASE("dimension mismatch") {
        const auto net = random_net(3, {2}, 1);
        const std::vector<double> x{1.0};
        CHECK_THROWS_AS((void)net.forward(x), Error);
    }
}

TEST_CASE("DenseNet input_gradient") {
    SUBCASE("zero at the target") {
        const auto net = random_net(4, {5, 5}, 2);
        const std::vector<double> x{0.1, 0.2, -0.3, 0.4};
        for (double g : net.input_gradient(x, net.forward(x))) CHECK(g == 0.0);
    }
    SUBCASE("single layer closed form") {
        Mlp m(2, std::span<const std::size_t>{}, 1);
        m.weights(0)[0] = 0.8;
        m.weights(0)[1] = -1.1;
        m.bias(0)[0] = 0.2;
        m.set_normalization({0.5, -0.5}, {2.0, 4.0});
        const DenseNet net(m);
        const std::vector<double> x{1.0, 3.0};
        const double z = 0.8 * (1.0 - 0.5) / 2.0 - 1.1 * (3.0 + 0.5) / 4.0 + 0.2;
        const double f = 1.0 / (1.0 + std::exp(-z));
        const double t = 0.9;
        const auto g = net.input_gradient(x, t);
        CHECK(g[0] == doctest::Approx(2.0 * (f - t) * f * (1.0 - f) * 0.8 / 2.0).epsilon(1e-14));
        CHECK(g[1] == doctest::Approx(2.0 * (f - t) * f * (1.0 - f) * -1.1 / 4.0).epsilon(1e-14));
    }
    SUBCASE("central finite differences") {
        std::mt19937_64 gen(31);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const std::size_t m = 1 + gen() % 5;
            const auto net = random_net(m, {1 + gen() % 8, 1 + gen() % 8}, gen());
            std::vector<double> x(m);
            for (auto& v : x) v = u(gen);
            const double target = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
            worst = std::max(worst, oracles::gradient_error(net, x, target));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("fit_pseudo") {
    SUBCASE("constant black box is regressed to its constant") {
        const ConstantClassifier stub({1, 0.7});
        const auto design = lhs_design({{-1.0, 1.0}, {-1.0, 1.0}}, 2000, 3);
        ExtractionOptions opt;
        opt.hidden_widths = {8, 8};
        opt.epochs = 60;
        opt.learning_rate = 0.1;
        opt.seed = 4;
        const auto pm = fit_pseudo(stub, design, 1, opt);
        const auto held = lhs_design({{-1.0, 1.0}, {-1.0, 1.0}}, 200, 77);
        double err = 0.0;
        for (std::size_t i = 0; i < held.points.rows(); ++i) err += std::abs(pm.net.forward(held.points.row(i)) - 0.7);
        CHECK(err / 200.0 < 0.01);
        CHECK(pm.report.n_holdout == 200);
        CHECK(pm.report.r_squared <= 1.0);
    }
    SUBCASE("zero epochs is a contract error") {
        const ConstantClassifier stub({1, 0.7});
        ExtractionOptions opt;
        opt.epochs = 0;
        CHECK_THROWS_AS((void)fit_pseudo(stub, lhs_design({{0.0, 1.0}}, 50, 1), 1, opt), Error);
    }
    SUBCASE("logistic black box is recovered with high R^2, deterministically") {
        const auto bb = FeedForwardClassifier::logistic({2.0, -1.0}, 0.3);
        ExtractionOptions opt;
        opt.design_size = 4000;
        opt.hidden_widths = {16, 16};
        opt.epochs = 60;
        opt.learning_rate = 0.1;
        opt.seed = 2;
        const auto domain = Dataset::from_rows({{-2.0, -2.0}, {2.0, 2.0}});
        const auto a = extract_pseudo_model(bb, domain, 1, opt);
        const auto b = extract_pseudo_model(bb, domain, 1, opt);
        CHECK(a.report.r_squared > 0.9);
        CHECK(a.net == b.net);
        CHECK(a.report.n_design == 4000);
    }
    SUBCASE("serialization round trip") {
        testing::TempDir dir("pm");
        PseudoModel pm{random_net(3, {4, 2}, 6), {}};
        pm.report.r_squared = 0.5;
        save_pseudo_model(pm, dir / "p.json");
        const auto back = load_pseudo_model(dir / "p.json");
        CHECK(back.net == pm.net);
        CHECK(back.report.r_squared == 0.5);
    }
}

TEST_CASE("r_squared") {
    const std::vector<double> t{1.0, 2.0, 3.0, 4.0};
    CHECK(r_squared(t, t) == 1.0);
    const std::vector<double> mean(4, 2.5);
    CHECK(r_squared(t, mean) == doctest::Approx(0.0));
    const std::vector<double> p{1.5, 2.0, 2.5, 4.0};
    // 1 - 0.5 / 5
    CHECK(r_squared(t, p) == doctest::Approx(0.9));
}
