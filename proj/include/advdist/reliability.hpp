#pragma once

#include "advdist/classifier.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace advdist {

struct ReliabilityBin {
    double lower = 0.0;  ///< exclusive
    double upper = 0.0;  ///< inclusive
    std::size_t count = 0;
    double observed = 0.0;  ///< accuracy; NaN for an empty bin
    double expected = 0.0;  ///< mean confidence; NaN for an empty bin
    double gap = 0.0;       ///< expected - observed; positive means overconfident
};

struct ReliabilityDiagram {
    std::vector<ReliabilityBin> bins;
    std::size_t total = 0;  ///< predictions that fell in some bin

    /// Count-weighted mean |gap|.
    [[nodiscard]] double ece() const;
};

/// Bins predictions with confidence in (lower, 1] into intervals of bin_width;
/// the last bin is truncated at 1. Predictions at or below `lower` (and, when
/// given, predictions of other classes) are left out. Throws EmptyInput,
/// DimensionMismatch, InvalidArgument.
[[nodiscard]] ReliabilityDiagram reliability(std::span<const Prediction> predictions, std::span<const ClassId> truths,
                                             double bin_width = 0.05, double lower = 0.65,
                                             std::optional<ClassId> only_class = std::nullopt);

/// CSV: lower,upper,count,observed,expected,gap
[[nodiscard]] std::string reliability_to_csv(const ReliabilityDiagram& diagram);

}  // namespace advdist
