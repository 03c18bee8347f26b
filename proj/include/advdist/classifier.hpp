#pragma once

#include "advdist/dataset.hpp"
#include "advdist/mlp.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace advdist {

/// Predicted label and the probability the model assigns to it.
struct Prediction {
    ClassId label = 0;
    double confidence = 0.0;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Black-box classifier: only predictions and confidences are observable.
/// Implementations must be deterministic for identical inputs.
class Classifier {
  public:
    virtual ~Classifier() = default;

    /// Throws DimensionMismatch when x has the wrong width.
    [[nodiscard]] virtual Prediction predict(std::span<const double> x) const = 0;
    [[nodiscard]] virtual std::size_t num_classes() const = 0;
    /// Expected feature count, when the implementation knows it.
    [[nodiscard]] virtual std::optional<std::size_t> num_features() const = 0;

    /// Probability of class c at x. The default reconstructs it from predict():
    /// the reported confidence for the predicted class, otherwise the remaining
    /// mass shared evenly among the other classes (exact for two classes).
    [[nodiscard]] virtual double class_probability(std::span<const double> x, ClassId c) const;

    /// Whether predict may be called concurrently from several threads.
    [[nodiscard]] virtual bool thread_safe() const { return true; }
};

/// Class-of-interest confidence derived from a prediction (see
/// Classifier::class_probability for the convention).
[[nodiscard]] double class_confidence(const Prediction& p, ClassId class_of_interest, std::size_t num_classes);

/// Built-in classifier: an Mlp producing one logit (two classes, sigmoid) or K
/// logits (softmax). With no hidden layers this is logistic regression.
class FeedForwardClassifier final : public Classifier {
  public:
    FeedForwardClassifier(Mlp net, std::size_t num_classes, std::vector<std::string> class_names = {},
                          std::vector<std::string> feature_names = {});

    /// Binary logistic model p(class 1 | x) = sigmoid(w.x + b).
    static FeedForwardClassifier logistic(std::vector<double> weights, double bias);

    [[nodiscard]] Prediction predict(std::span<const double> x) const override;
    [[nodiscard]] std::size_t num_classes() const override { return num_classes_; }
    [[nodiscard]] std::optional<std::size_t> num_features() const override { return net_.inputs(); }
    [[nodiscard]] double class_probability(std::span<const double> x, ClassId c) const override;

    /// Full class distribution; sums to one.
    [[nodiscard]] std::vector<double> probabilities(std::span<const double> x) const;

    [[nodiscard]] const Mlp& network() const noexcept { return net_; }
    [[nodiscard]] const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  private:
    Mlp net_;
    std::size_t num_classes_;
    std::vector<std::string> class_names_;
    std::vector<std::string> feature_names_;
};

void to_json(nlohmann::json& j, const FeedForwardClassifier& model);
[[nodiscard]] FeedForwardClassifier classifier_from_json(const nlohmann::json& j);
void save_classifier(const FeedForwardClassifier& model, const std::filesystem::path& path);
[[nodiscard]] FeedForwardClassifier load_classifier(const std::filesystem::path& path);

struct TrainOptions {
    std::vector<std::size_t> hidden_widths;  ///< empty = logistic regression
    std::size_t epochs = 200;
    double learning_rate = 0.1;
    std::size_t batch_size = 0;  ///< 0 = full batch
    OptimizerKind optimizer = OptimizerKind::Sgd;
    std::uint64_t seed = 0;
    /// Per-epoch mean training loss, when non-null.
    std::vector<double>* loss_history = nullptr;
};

/// Cross-entropy gradient descent. Inputs are standardized with training-set
/// mean and standard deviation (stored in the model). Throws NoLabels,
/// SingleClass, EmptyDataset.
[[nodiscard]] FeedForwardClassifier train_classifier(const Dataset& train, const TrainOptions& options);

[[nodiscard]] FeedForwardClassifier train_logistic(const Dataset& train, std::size_t epochs, double learning_rate,
                                                   std::uint64_t seed);

[[nodiscard]] FeedForwardClassifier train_mlp(const Dataset& train, std::vector<std::size_t> hidden_widths,
                                              std::size_t epochs, double learning_rate, std::uint64_t seed);

/// Predictions for every row, in row order.
[[nodiscard]] std::vector<Prediction> predict_all(const Classifier& m, const Dataset& d);

[[nodiscard]] double accuracy(const std::vector<Prediction>& predictions, const std::vector<ClassId>& truth);

}  // namespace advdist
