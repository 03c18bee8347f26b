#pragma once

#include "advdist/classifier.hpp"
#include "advdist/dataset.hpp"

#include <cstdint>

namespace advdist {

/// Train/test pair from a synthetic generator. `test` is the unbiased pool.
struct SyntheticScenario {
    Dataset train;
    Dataset test;
    ClassId class_of_interest = 1;
    std::size_t dropped = 0;
};

/// Two unit-variance Gaussian classes centred at (-1, 0) and (+1, 0); class 1
/// is the class of interest.
[[nodiscard]] Dataset gaussian_mixture(std::size_t n, std::uint64_t seed);

/// Training rows of the other class that fall in this region are censored.
inline constexpr const char* kOverconfidentPredicate = "label==0 && f0>0 && f1>0";

/// Gaussian mixture split in half; all but `keep_fraction` of the class-0
/// training rows in the upper-right quadrant are removed. A classifier trained
/// on `train` becomes overconfident there. keep_fraction = 1 disables the bias.
[[nodiscard]] SyntheticScenario synth_overconfident(std::size_t n, std::uint64_t seed, double keep_fraction = 0.0);

/// Logistic model that generates labels for synth_calibrated.
[[nodiscard]] FeedForwardClassifier calibrated_generator();

/// Features from the mixture's marginal, labels drawn from calibrated_generator,
/// so that model is calibrated on the data by construction. No bias.
[[nodiscard]] SyntheticScenario synth_calibrated(std::size_t n, std::uint64_t seed);

}  // namespace advdist
