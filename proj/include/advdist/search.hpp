#pragma once

#include "advdist/classifier.hpp"
#include "advdist/dataset.hpp"
#include "advdist/gad.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace advdist {

/// Predictions at or below this confidence never enter a query set.
inline constexpr double kEligibilityThreshold = 0.65;

/// Label source for queried instances. Repeated queries for one index must
/// return the same label.
class Oracle {
  public:
    virtual ~Oracle() = default;
    [[nodiscard]] virtual ClassId label(std::size_t index) const = 0;
};

/// Simulated oracle backed by ground-truth labels indexed by pool row.
class GroundTruthOracle final : public Oracle {
  public:
    explicit GroundTruthOracle(std::vector<ClassId> truth) : truth_(std::move(truth)) {}
    [[nodiscard]] ClassId label(std::size_t index) const override { return truth_.at(index); }

  private:
    std::vector<ClassId> truth_;
};

/// Evaluation pool: features and black-box predictions, row-aligned.
struct PoolView {
    const Dataset* features = nullptr;  ///< may be null for label-blind searches
    std::span<const Prediction> predictions;
    ClassId class_of_interest = 0;
    double threshold = kEligibilityThreshold;
};

[[nodiscard]] constexpr bool is_eligible(const Prediction& p, ClassId class_of_interest,
                                         double threshold = kEligibilityThreshold) noexcept {
    return p.label == class_of_interest && p.confidence > threshold;
}

/// Ascending eligible pool rows, restricted to `rows` when given.
[[nodiscard]] std::vector<std::size_t> eligible_indices(const PoolView& pool,
                                                        std::optional<std::span<const std::size_t>> rows = std::nullopt);

struct QueryStep {
    std::size_t index = 0;
    double confidence = 0.0;
    ClassId predicted = 0;
    ClassId label = 0;
    bool is_error = false;
    double sdr = 0.0;  ///< SDR of the prefix ending here; NaN if undefined

    friend bool operator==(const QueryStep& a, const QueryStep& b);
};

/// Ordered queries with oracle answers and the running discovery ratio.
class SearchTrace {
  public:
    explicit SearchTrace(std::size_t budget = 0) : budget_(budget) {}

    /// Appends a query; throws InvalidArgument on a duplicate index or when
    /// the budget is already spent.
    const QueryStep& record(std::size_t index, double confidence, ClassId predicted, ClassId label);

    [[nodiscard]] std::size_t budget() const noexcept { return budget_; }
    [[nodiscard]] const std::vector<QueryStep>& steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t size() const noexcept { return steps_.size(); }
    [[nodiscard]] bool contains(std::size_t index) const;
    [[nodiscard]] std::vector<std::size_t> queried() const;
    [[nodiscard]] std::vector<std::size_t> errors() const;
    [[nodiscard]] std::size_t errors_found() const noexcept { return errors_; }
    [[nodiscard]] std::vector<double> sdr_curve() const;
    /// SDR of the whole trace (NaN when empty or undefined).
    [[nodiscard]] double current_sdr() const noexcept;

    friend bool operator==(const SearchTrace&, const SearchTrace&) = default;

  private:
    std::size_t budget_;
    std::vector<QueryStep> steps_;
    std::vector<std::size_t> sorted_indices_;
    std::size_t errors_ = 0;
    double expected_errors_ = 0.0;
};

/// Discovered errors over expected errors sum(1 - confidence). Throws
/// DegenerateConfidence when the expected count is zero.
[[nodiscard]] double sdr(std::span<const Prediction> queried, std::span<const ClassId> truth);
[[nodiscard]] double sdr(std::span<const QueryStep> steps);

/// Picks the next instance to show the oracle given the trace so far.
class QueryStrategy {
  public:
    virtual ~QueryStrategy() = default;
    /// nullopt when every candidate has been queried.
    [[nodiscard]] virtual std::optional<std::size_t> next(const SearchTrace& trace) = 0;
};

enum class SearchMethod { Gad, Random, LeastConfidence, Metamodel };

[[nodiscard]] SearchMethod parse_search_method(const std::string& name);
[[nodiscard]] const char* search_method_name(SearchMethod method);

/// Ascending gad (ties by index) over the candidates; candidates without a
/// record rank last.
[[nodiscard]] std::unique_ptr<QueryStrategy> make_gad_strategy(std::vector<std::size_t> candidates,
                                                               std::span<const GadRecord> records);
/// Uniform order without replacement, fixed by the seed.
[[nodiscard]] std::unique_ptr<QueryStrategy> make_random_strategy(std::vector<std::size_t> candidates,
                                                                  std::uint64_t seed);
[[nodiscard]] std::unique_ptr<QueryStrategy> make_least_confidence_strategy(std::vector<std::size_t> candidates,
                                                                            std::span<const Prediction> predictions);
/// Least-confidence until the first error; afterwards refits a logistic
/// meta-model on (features, confidence) -> error after every query and takes
/// the unqueried candidate with the highest predicted error probability.
[[nodiscard]] std::unique_ptr<QueryStrategy> make_metamodel_strategy(std::vector<std::size_t> candidates,
                                                                     const PoolView& pool, std::uint64_t seed);

[[nodiscard]] std::unique_ptr<QueryStrategy> make_strategy(SearchMethod method, std::vector<std::size_t> candidates,
                                                           const PoolView& pool, std::span<const GadRecord> records,
                                                           std::uint64_t seed);

/// Runs the oracle loop for `budget` steps. Throws BudgetExceedsPool when the
/// budget exceeds the candidate count.
[[nodiscard]] SearchTrace run_search(QueryStrategy& strategy, std::size_t candidate_count, const PoolView& pool,
                                     const Oracle& oracle, std::size_t budget);

[[nodiscard]] SearchTrace gad_search(const PoolView& pool, std::span<const GadRecord> records, const Oracle& oracle,
                                     std::size_t budget);
[[nodiscard]] SearchTrace random_search(const PoolView& pool, const Oracle& oracle, std::size_t budget,
                                        std::uint64_t seed);
[[nodiscard]] SearchTrace least_confidence_search(const PoolView& pool, const Oracle& oracle, std::size_t budget);
[[nodiscard]] SearchTrace metamodel_search(const PoolView& pool, const Oracle& oracle, std::size_t budget,
                                           std::uint64_t seed);

/// One JSON object per line: {step, index, confidence, predicted, label, is_error, sdr}.
[[nodiscard]] std::string trace_to_jsonl(const SearchTrace& trace);
[[nodiscard]] std::string step_to_json_line(const QueryStep& step, std::size_t step_number);
/// Rebuilds a trace (recomputing sdr) from JSON lines.
[[nodiscard]] SearchTrace trace_from_jsonl(std::string_view text, std::size_t budget);

}  // namespace advdist
