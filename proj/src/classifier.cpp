#include "advdist/classifier.hpp"

#include "advdist/error.hpp"
#include "advdist/kernels.hpp"
#include "advdist/rng.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

namespace advdist {

double Classifier::class_probability(std::span<const double> x, ClassId c) const {
    return class_confidence(predict(x), c, num_classes());
}

double class_confidence(const Prediction& p, ClassId class_of_interest, std::size_t num_classes) {
    if (p.label == class_of_interest) {
        return p.confidence;
    }
    const double others = num_classes > 1 ? static_cast<double>(num_classes - 1) : 1.0;
    return (1.0 - p.confidence) / others;
}

FeedForwardClassifier::FeedForwardClassifier(Mlp net, std::size_t num_classes, std::vector<std::string> class_names,
                                             std::vector<std::string> feature_names)
    : net_(std::move(net)),
      num_classes_(num_classes),
      class_names_(std::move(class_names)),
      feature_names_(std::move(feature_names)) {
    require(num_classes_ >= 2, ErrorCode::InvalidArgument, "classifier needs at least two classes");
    const std::size_t expected_outputs = num_classes_ == 2 ? 1 : num_classes_;
    require(net_.outputs() == expected_outputs, ErrorCode::DimensionMismatch,
            "network output width does not match the class count");
    if (class_names_.empty()) {
        for (std::size_t c = 0; c < num_classes_; ++c) {
            class_names_.push_back(std::to_string(c));
        }
    }
    require(class_names_.size() == num_classes_, ErrorCode::InvalidArgument, "class name count mismatch");
}

FeedForwardClassifier FeedForwardClassifier::logistic(std::vector<double> weights, double bias) {
    Mlp net(weights.size(), std::span<const std::size_t>{}, 1);
    std::copy(weights.begin(), weights.end(), net.weights(0).begin());
    net.bias(0)[0] = bias;
    return FeedForwardClassifier(std::move(net), 2);
}

std::vector<double> FeedForwardClassifier::probabilities(std::span<const double> x) const {
    std::vector<double> logits(net_.outputs());
    net_.forward(x, logits);
    if (num_classes_ == 2) {
        return {sigmoid(-logits[0]), sigmoid(logits[0])};
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - top);
        sum += z;
    }
    for (double& z : logits) {
        z /= sum;
    }
    return logits;
}

Prediction FeedForwardClassifier::predict(std::span<const double> x) const {
    const auto p = probabilities(x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        if (p[k] > p[best]) {
            best = k;
        }
    }
    return {static_cast<ClassId>(best), p[best]};
}

double FeedForwardClassifier::class_probability(std::span<const double> x, ClassId c) const {
    require(c >= 0 && static_cast<std::size_t>(c) < num_classes_, ErrorCode::InvalidArgument, "class id out of range");
    return probabilities(x)[static_cast<std::size_t>(c)];
}

void to_json(nlohmann::json& j, const FeedForwardClassifier& model) {
    j = {{"kind", "feedforward"},
         {"num_classes", model.num_classes()},
         {"class_names", model.class_names()},
         {"feature_names", model.feature_names()},
         {"network", model.network()}};
}

FeedForwardClassifier classifier_from_json(const nlohmann::json& j) {
    require(j.value("kind", std::string{}) == "feedforward", ErrorCode::InvalidArgument,
            "not a feedforward classifier document");
    return FeedForwardClassifier(j.at("network").get<Mlp>(), j.at("num_classes").get<std::size_t>(),
                                 j.value("class_names", std::vector<std::string>{}),
                                 j.value("feature_names", std::vector<std::string>{}));
}

void save_classifier(const FeedForwardClassifier& model, const std::filesystem::path& path) {
    textio::write_file(path, nlohmann::json(model).dump(2) + "\n");
}

FeedForwardClassifier load_classifier(const std::filesystem::path& path) {
    try {
        return classifier_from_json(nlohmann::json::parse(textio::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, "invalid classifier file " + path.string() + ": " + e.what());
    }
}

namespace {

double log_sigmoid(double z) {
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

/// Cross-entropy of one example; writes dL/dlogits into grad.
double cross_entropy(std::span<const double> logits, ClassId y, std::size_t num_classes, std::span<double> grad) {
    if (num_classes == 2) {
        const double z = logits[0];
        grad[0] = sigmoid(z) - (y == 1 ? 1.0 : 0.0);
        return y == 1 ? -log_sigmoid(z) : -log_sigmoid(-z);
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        grad[k] = std::exp(logits[k] - top);
        sum += grad[k];
    }
    for (std::size_t k = 0; k < logits.size(); ++k) {
        grad[k] /= sum;
    }
    grad[static_cast<std::size_t>(y)] -= 1.0;
    return -(logits[static_cast<std::size_t>(y)] - top - std::log(sum));
}

double mean_loss(const Mlp& net, const Dataset& d, std::size_t num_classes) {
    std::vector<double> logits(net.outputs());
    std::vector<double> grad(net.outputs());
    double total = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        net.forward(d.row(i), logits);
        total += cross_entropy(logits, d.label(i), num_classes, grad);
    }
    return total / static_cast<double>(d.rows());
}

}  // namespace

FeedForwardClassifier train_classifier(const Dataset& train, const TrainOptions& options) {
    if (!train.has_labels()) {
        fail(ErrorCode::NoLabels, "training data has no labels");
    }
    require(!train.empty(), ErrorCode::EmptyDataset, "training data is empty");
    const auto& labels = train.labels();
    const std::size_t num_classes = std::max<std::size_t>(train.num_classes(), 2);
    std::vector<std::size_t> counts(num_classes, 0);
    for (ClassId y : labels) {
        ++counts[static_cast<std::size_t>(y)];
    }
    const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    if (present < 2) {
        fail(ErrorCode::SingleClass, "training data contains a single class");
    }
    require(options.learning_rate >= 0.0, ErrorCode::InvalidArgument, "learning rate must be non-negative");

    const std::size_t m = train.cols();
    const std::size_t n = train.rows();
    std::vector<double> mean(m, 0.0);
    std::vector<double> sd(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            mean[j] += train.at(i, j);
        }
    }
    for (double& v : mean) {
        v /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = train.at(i, j) - mean[j];
            sd[j] += d * d;
        }
    }
    for (double& v : sd) {
        v = std::sqrt(v / static_cast<double>(n));
    }

    const std::size_t outputs = num_classes == 2 ? 1 : num_classes;
    Mlp net(m, options.hidden_widths, outputs);
    Rng init_rng(stream_seed(options.seed, {0x1001}));
    net.init_glorot(init_rng);
    net.set_normalization(mean, sd);

    Optimizer opt({options.optimizer, options.learning_rate}, net.params().size());
    const std::size_t batch = options.batch_size == 0 ? n : std::min(options.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad(net.params().size());
    std::vector<double> out_grad(outputs);
    Mlp::Tape tape;

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        if (batch < n) {
            Rng shuffle_rng(stream_seed(options.seed, {0x1002, epoch}));
            shuffle_rng.shuffle(order);
        }
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(start + batch, n);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = order[k];
                net.forward(train.row(i), tape);
                cross_entropy(tape.preactivations.back(), labels[i], num_classes, out_grad);
                net.backward(tape, out_grad, grad, {});
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (double& g : grad) {
                g *= inv;
            }
            opt.step(net.params(), grad);
        }
        if (options.loss_history != nullptr) {
            options.loss_history->push_back(mean_loss(net, train, num_classes));
        }
    }

    std::vector<std::string> names = train.class_names();
    names.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (names[c].empty()) {
            names[c] = std::to_string(c);
        }
    }
    return FeedForwardClassifier(std::move(net), num_classes, std::move(names), train.feature_names());
}

FeedForwardClassifier train_logistic(const Dataset& train, std::size_t epochs, double learning_rate,
                                     std::uint64_t seed) {
    TrainOptions options;
    options.epochs = epochs;
    options.learning_rate = learning_rate;
    options.seed = seed;
    return train_classifier(train, options);
}

FeedForwardClassifier train_mlp(const Dataset& train, std::vector<std::size_t> hidden_widths, std::size_t epochs,
                                double learning_rate, std::uint64_t seed) {
    TrainOptions options;
    options.hidden_widths = std::move(hidden_widths);
    options.epochs = epochs;
    options.learning_rate = learning_rate;
    options.seed = seed;
    return train_classifier(train, options);
}

std::vector<Prediction> predict_all(const Classifier& m, const Dataset& d) {
    return kernels::predict_batch(m, d, 0);
}

double accuracy(const std::vector<Prediction>& predictions, const std::vector<ClassId>& truth) {
    require(predictions.size() == truth.size(), ErrorCode::DimensionMismatch, "prediction/truth length mismatch");
    require(!truth.empty(), ErrorCode::EmptyInput, "accuracy of an empty set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        correct += predictions[i].label == truth[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

}  // namespace advdist
