#include "advdist/synthetic.hpp"

#include "advdist/error.hpp"
#include "advdist/rng.hpp"

namespace advdist {

Dataset gaussian_mixture(std::size_t n, std::uint64_t seed) {
    require(n >= 2, ErrorCode::InvalidArgument, "mixture needs at least two rows");
    Rng rng(stream_seed(seed, {0x5101}));
    std::vector<double> features;
    std::vector<ClassId> labels;
    features.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const ClassId c = rng.bernoulli(0.5) ? 1 : 0;
        features.push_back(rng.normal(c == 1 ? 1.0 : -1.0, 1.0));
        features.push_back(rng.normal());
        labels.push_back(c);
    }
    return Dataset(n, 2, std::move(features), std::move(labels), {"f0", "f1"}, {"0", "1"});
}

SyntheticScenario synth_overconfident(std::size_t n, std::uint64_t seed, double keep_fraction) {
    const Dataset all = gaussian_mixture(n, seed);
    auto split = bias_split(all, parse_predicate(kOverconfidentPredicate, all.feature_names()), keep_fraction,
                            stream_seed(seed, {0x5102}));
    return SyntheticScenario{std::move(split.train), std::move(split.test), 1, split.dropped};
}

FeedForwardClassifier calibrated_generator() {
    return FeedForwardClassifier::logistic({1.5, 0.5}, 0.0);
}

SyntheticScenario synth_calibrated(std::size_t n, std::uint64_t seed) {
    const Dataset mixture = gaussian_mixture(n, seed);
    const auto truth = calibrated_generator();
    Rng rng(stream_seed(seed, {0x5103}));
    std::vector<ClassId> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = rng.bernoulli(truth.class_probability(mixture.row(i), 1)) ? 1 : 0;
    }
    const auto data = mixture.data();
    const Dataset all(n, 2, std::vector<double>(data.begin(), data.end()), std::move(labels), {"f0", "f1"},
                      {"0", "1"});
    auto split = bias_split(all, [](std::span<const double>, ClassId) { return false; }, 1.0,
                            stream_seed(seed, {0x5104}));
    return SyntheticScenario{std::move(split.train), std::move(split.test), 1, 0};
}

}  // namespace advdist
