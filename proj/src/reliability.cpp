#include "advdist/reliability.hpp"

#include "advdist/error.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace advdist {

double ReliabilityDiagram::ece() const {
    if (total == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& b : bins) {
        if (b.count > 0) {
            sum += static_cast<double>(b.count) / static_cast<double>(total) * std::abs(b.gap);
        }
    }
    return sum;
}

ReliabilityDiagram reliability(std::span<const Prediction> predictions, std::span<const ClassId> truths,
                               double bin_width, double lower, std::optional<ClassId> only_class) {
    require(!predictions.empty(), ErrorCode::EmptyInput, "reliability of an empty prediction list");
    require(predictions.size() == truths.size(), ErrorCode::DimensionMismatch, "prediction/truth length mismatch");
    require(bin_width > 0.0 && lower >= 0.0 && lower < 1.0, ErrorCode::InvalidArgument, "bad reliability binning");

    // Tolerance keeps e.g. 0.35 / 0.05 at 7 bins despite rounding.
    const auto nbins = static_cast<std::size_t>(std::ceil((1.0 - lower) / bin_width - 1e-9));
    ReliabilityDiagram diagram;
    diagram.bins.resize(nbins);
    std::vector<double> conf_sum(nbins, 0.0);
    std::vector<std::size_t> correct(nbins, 0);
    for (std::size_t k = 0; k < nbins; ++k) {
        diagram.bins[k].lower = lower + static_cast<double>(k) * bin_width;
        diagram.bins[k].upper = k + 1 == nbins ? 1.0 : lower + static_cast<double>(k + 1) * bin_width;
    }
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        if (!(p.confidence > lower) || p.confidence > 1.0) {
            continue;
        }
        if (only_class && p.label != *only_class) {
            continue;
        }
        auto k = static_cast<std::ptrdiff_t>(std::ceil((p.confidence - lower) / bin_width - 1e-9)) - 1;
        k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(nbins) - 1);
        auto& bin = diagram.bins[static_cast<std::size_t>(k)];
        ++bin.count;
        conf_sum[static_cast<std::size_t>(k)] += p.confidence;
        correct[static_cast<std::size_t>(k)] += p.label == truths[i] ? 1 : 0;
        ++diagram.total;
    }
    for (std::size_t k = 0; k < nbins; ++k) {
        auto& bin = diagram.bins[k];
        if (bin.count == 0) {
            bin.observed = bin.expected = bin.gap = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const auto n = static_cast<double>(bin.count);
        bin.observed = static_cast<double>(correct[k]) / n;
        bin.expected = conf_sum[k] / n;
        bin.gap = bin.expected - bin.observed;
    }
    return diagram;
}

std::string reliability_to_csv(const ReliabilityDiagram& diagram) {
    std::string out = "lower,upper,count,observed,expected,gap\n";
    for (const auto& b : diagram.bins) {
        out += textio::format_double(b.lower) + ',' + textio::format_double(b.upper) + ',' + std::to_string(b.count) +
               ',' + textio::format_double(b.observed) + ',' + textio::format_double(b.expected) + ',' +
               textio::format_double(b.gap) + '\n';
    }
    return out;
}

}  // namespace advdist
