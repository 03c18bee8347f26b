#pragma once

#include "advdist/classifier.hpp"
#include "advdist/dataset.hpp"
#include "advdist/dense_net.hpp"
#include "advdist/mlp.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace advdist {

/// Latin hypercube design: every column has exactly one point in each of the
/// n equal-width strata of its range.
struct LhsDesign {
    Dataset points;
    FeatureRanges ranges;
    std::uint64_t seed = 0;
};

/// Independent random stratum permutation per column; uniform position inside
/// each stratum. Constant columns (min == max) yield the constant.
[[nodiscard]] LhsDesign lhs_design(const FeatureRanges& ranges, std::size_t n, std::uint64_t seed);

enum class DesignSource { Lhs, Dataset };

struct ExtractionOptions {
    DesignSource design_source = DesignSource::Lhs;
    std::size_t design_size = 20000;
    std::vector<std::size_t> hidden_widths{64, 64, 64, 64};
    std::size_t epochs = 20;
    double learning_rate = 1e-2;
    std::size_t batch_size = 128;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double holdout_fraction = 0.1;
    std::uint64_t seed = 0;
    int workers = 0;  ///< threads for labelling the design (0 = OpenMP default)
};

struct ExtractionReport {
    double r_squared = 0.0;  ///< 1 - SSE/SST on the held-out design rows
    double train_mse = 0.0;
    double holdout_mse = 0.0;
    std::size_t n_design = 0;
    std::size_t n_holdout = 0;
    std::size_t epochs = 0;
};

struct PseudoModel {
    DenseNet net;
    ExtractionReport report;
};

/// Trains the pseudo model on (design row, class-of-interest confidence of
/// m_o) pairs by mini-batch descent on mean squared error. The network input
/// is normalized to the design's bounding box.
[[nodiscard]] PseudoModel fit_pseudo(const Classifier& m_o, const Dataset& design, ClassId class_of_interest,
                                     const ExtractionOptions& options);

[[nodiscard]] PseudoModel fit_pseudo(const Classifier& m_o, const LhsDesign& design, ClassId class_of_interest,
                                     const ExtractionOptions& options);

/// Builds the design from `domain` per options.design_source, then fits.
[[nodiscard]] PseudoModel extract_pseudo_model(const Classifier& m_o, const Dataset& domain,
                                               ClassId class_of_interest, const ExtractionOptions& options);

/// Coefficient of determination; 1 when both SSE and SST vanish, 0 when only SST does.
[[nodiscard]] double r_squared(std::span<const double> truth, std::span<const double> predicted);

void to_json(nlohmann::json& j, const ExtractionReport& r);
void save_pseudo_model(const PseudoModel& model, const std::filesystem::path& path);
[[nodiscard]] PseudoModel load_pseudo_model(const std::filesystem::path& path);

[[nodiscard]] DesignSource parse_design_source(const std::string& name);

}  // namespace advdist
