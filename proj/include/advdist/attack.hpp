#pragma once

#include "advdist/classifier.hpp"
#include "advdist/dataset.hpp"
#include "advdist/dense_net.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace advdist {

/// Regression target used for the loss whose input gradient drives each step.
enum class AttackTarget {
    /// c = 1 if the pseudo model's confidence at the original x is >= 0.5, else
    /// 0; constant over iterations. Ascending (f - c)^2 pushes the pseudo
    /// model's output toward the opposite class.
    PredictedClass,
    /// c = pseudo-model confidence at the original x, constant. The gradient
    /// vanishes at x_adv = x, so the attack stalls on its first step.
    Literal,
    /// c = pseudo-model confidence at the current x_adv; also zero gradient.
    Tracking,
};

struct AttackConfig {
    double epsilon = 0.01;         ///< step size in feature units; > 0
    std::size_t max_iters = 1000;  ///< >= 1
    std::optional<FeatureRanges> clip_to_ranges;
    AttackTarget target = AttackTarget::PredictedClass;
};

struct AttackResult {
    std::vector<double> x_adv;
    std::size_t iterations = 0;
    bool flipped = false;
    double mae_to_original = 0.0;

    friend bool operator==(const AttackResult&, const AttackResult&) = default;
};

/// Iterated gradient-sign steps on the pseudo model until the black box's
/// label changes. Budget exhaustion (or a step that leaves x_adv unchanged,
/// which would repeat forever) returns flipped = false with x_adv as reached.
[[nodiscard]] AttackResult attack(const Classifier& m_o, const DenseNet& m_p, std::span<const double> x,
                                  const AttackConfig& cfg);

/// One result per row of eval, row-aligned. workers = 0 uses the OpenMP
/// default; results do not depend on the worker count.
[[nodiscard]] std::vector<AttackResult> attack_all(const Classifier& m_o, const DenseNet& m_p, const Dataset& eval,
                                                   const AttackConfig& cfg, int workers = 0);

/// One percent of the mean column width (1e-2 if every column is constant).
[[nodiscard]] double default_epsilon(const FeatureRanges& ranges);

/// -1, 0 or +1.
[[nodiscard]] constexpr double sign(double v) noexcept {
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

[[nodiscard]] AttackTarget parse_attack_target(const std::string& name);
[[nodiscard]] const char* attack_target_name(AttackTarget target);

/// CSV with header `index,flipped,iterations,mae,<feature names>`.
[[nodiscard]] std::string attacks_to_csv(const std::vector<AttackResult>& results, std::span<const std::size_t> indices,
                                         const std::vector<std::string>& feature_names);

struct IndexedAttacks {
    std::vector<std::size_t> indices;
    std::vector<AttackResult> results;
};
[[nodiscard]] IndexedAttacks attacks_from_csv(std::string_view text);

}  // namespace advdist
