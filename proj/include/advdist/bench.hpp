#pragma once

#include "advdist/attack.hpp"
#include "advdist/classifier.hpp"
#include "advdist/dataset.hpp"
#include "advdist/extraction.hpp"
#include "advdist/gad.hpp"
#include "advdist/reliability.hpp"
#include "advdist/search.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace advdist {

struct DatasetSpec {
    /// "synthetic:overconfident", "synthetic:calibrated", or a CSV path.
    std::string source = "synthetic:overconfident";
    std::string label_column = "label";
    std::size_t synthetic_rows = 8000;
    /// Censoring rule for CSV sources (synthetic sources carry their own).
    std::optional<std::string> bias_predicate;
    double keep_fraction = 0.0;  ///< share of predicate-matching training rows kept
    double test_fraction = 0.5;
};

struct ClassifierSpec {
    /// mlp | logistic | generator | file | external
    std::string type = "mlp";
    std::vector<std::size_t> hidden_widths{16, 16};
    std::size_t epochs = 300;
    double learning_rate = 0.5;
    std::string path;                  ///< model JSON for `file`
    std::vector<std::string> command;  ///< argv for `external`
};

struct ExperimentConfig {
    DatasetSpec dataset;
    /// Class name, or the numeric id when no name matches.
    std::string class_of_interest = "1";
    ClassifierSpec classifier;
    ExtractionOptions extraction;
    AttackConfig attack;
    bool default_epsilon = true;  ///< epsilon from the pool's feature ranges
    bool clip_to_pool = false;    ///< clip adversaries to the pool's feature ranges
    GadOptions gad;
    std::vector<SearchMethod> searches{SearchMethod::Gad, SearchMethod::Random};
    std::size_t replications = 100;
    std::size_t subset_size = 250;
    std::size_t budget = 50;
    std::uint64_t seed = 1;
    double threshold = kEligibilityThreshold;
    double reliability_bin_width = 0.05;
};

/// Throws InvalidArgument on a malformed or inconsistent document.
[[nodiscard]] ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
[[nodiscard]] ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Invariants: budget <= subset size, replications >= 1, ...
void validate(const ExperimentConfig& cfg);

struct Quartiles {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantiles of the values; throws EmptyInput.
[[nodiscard]] Quartiles quartiles(std::vector<double> values);

struct SearchSummary {
    SearchMethod method = SearchMethod::Gad;
    std::vector<double> mean_sdr;  ///< per step, length budget
    std::vector<double> sdr_stderr;
    std::vector<double> mean_errors;
    std::vector<double> errors_stderr;
    Quartiles queried_confidence;
    /// Per-replication traces, in replication order.
    std::vector<SearchTrace> traces;
};

struct StageFingerprints {
    std::uint64_t dataset = 0;
    std::uint64_t classifier = 0;
    std::uint64_t pseudo_model = 0;
    std::uint64_t attacks = 0;
    std::uint64_t gad = 0;
};

struct BenchReport {
    std::size_t replications = 0;  ///< replications that ran
    std::size_t skipped = 0;       ///< replications with fewer than budget eligible rows
    std::size_t budget = 0;
    std::size_t pool_size = 0;
    std::size_t eligible_pool = 0;
    std::size_t flipped = 0;
    ClassId class_of_interest = 0;
    double pool_accuracy = 0.0;
    ExtractionReport extraction;
    ReliabilityDiagram reliability;
    StageFingerprints fingerprints;
    std::vector<SearchSummary> searches;

    [[nodiscard]] const SearchSummary& search(SearchMethod method) const;
};

/// Everything computed once per experiment, before the replications.
struct PreparedPool {
    Dataset pool;  ///< labelled, unbiased evaluation rows
    ClassId class_of_interest = 0;
    std::shared_ptr<const Classifier> classifier;
    std::vector<Prediction> predictions;
    PseudoModel pseudo;
    std::vector<std::size_t> eligible;
    std::vector<AttackResult> attacks;  ///< aligned with `eligible`
    std::vector<GadRecord> gad;         ///< aligned with `eligible`
    StageFingerprints fingerprints;
};

/// Extract, attack and score the eligible rows of `pool` with the
/// extraction, attack, gad, threshold and seed settings of cfg.
[[nodiscard]] PreparedPool score_pool(std::shared_ptr<const Classifier> classifier, Dataset pool,
                                      ClassId class_of_interest, const ExperimentConfig& cfg, int workers = 0);

/// Builds the dataset and classifier from cfg, then score_pool on the test split.
[[nodiscard]] PreparedPool prepare_pool(const ExperimentConfig& cfg, int workers = 0);

/// The classifier of a spec, trained on `train` when the type needs it.
[[nodiscard]] std::shared_ptr<const Classifier> build_classifier(const ClassifierSpec& spec, const Dataset& train,
                                                                 std::uint64_t seed);

/// Replicated search comparison on a prepared pool. Output is independent of
/// the worker count.
[[nodiscard]] BenchReport run_replications(const ExperimentConfig& cfg, const PreparedPool& prepared, int workers = 0);

[[nodiscard]] BenchReport run_experiment(const ExperimentConfig& cfg, int workers = 0);

void to_json(nlohmann::json& j, const BenchReport& report);

/// step,<method>_mean,<method>_se,... one row per query step.
[[nodiscard]] std::string sdr_curve_csv(const BenchReport& report);
[[nodiscard]] std::string errors_curve_csv(const BenchReport& report);
/// method,min,q1,median,q3,max
[[nodiscard]] std::string confidences_csv(const BenchReport& report);

/// Writes report.json, sdr_curve.csv, errors_curve.csv, confidences.csv and
/// reliability.csv into `dir`.
void write_report(const BenchReport& report, const std::filesystem::path& dir);

/// Resolves a class name (or numeric id) against a class table.
[[nodiscard]] ClassId resolve_class(const std::string& name, const std::vector<std::string>& class_names);

}  // namespace advdist
