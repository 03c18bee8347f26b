#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace advdist {

using ClassId = int;

/// Row-major numeric feature matrix with optional dense integer labels.
/// Immutable once constructed; row index is the instance identity.
class Dataset {
  public:
    Dataset() = default;

    /// Validates every invariant (rectangular, finite, labels < class count).
    Dataset(std::size_t rows, std::size_t cols, std::vector<double> features,
            std::optional<std::vector<ClassId>> labels, std::vector<std::string> feature_names,
            std::vector<std::string> class_names);

    /// Convenience constructor with generated names f0.. and "0".."K-1".
    static Dataset from_rows(const std::vector<std::vector<double>>& rows,
                             std::optional<std::vector<ClassId>> labels = std::nullopt,
                             std::size_t num_classes = 0);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return rows_ == 0; }

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * cols_, cols_};
    }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return features_[i * cols_ + j]; }
    [[nodiscard]] std::span<const double> data() const noexcept { return features_; }

    [[nodiscard]] bool has_labels() const noexcept { return labels_.has_value(); }
    /// Throws NoLabels when absent.
    [[nodiscard]] const std::vector<ClassId>& labels() const;
    [[nodiscard]] ClassId label(std::size_t i) const { return labels().at(i); }

    [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    [[nodiscard]] const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    [[nodiscard]] std::size_t num_classes() const noexcept { return class_names_.size(); }

    /// Rows in the given order; names and class table are kept.
    [[nodiscard]] Dataset select(std::span<const std::size_t> indices) const;

    /// Same features, labels dropped.
    [[nodiscard]] Dataset without_labels() const;

    /// Content hash (FNV-1a over shape, features and labels).
    [[nodiscard]] std::uint64_t fingerprint() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> features_;
    std::optional<std::vector<ClassId>> labels_;
    std::vector<std::string> feature_names_;
    std::vector<std::string> class_names_;
};

struct Range {
    double min = 0.0;
    double max = 0.0;

    [[nodiscard]] double width() const noexcept { return max - min; }
    friend bool operator==(const Range&, const Range&) = default;
};

using FeatureRanges = std::vector<Range>;

/// Parses a headered CSV. With `label_column`, that column becomes the label
/// and its tokens map to dense ids in sorted order (numeric when every token
/// is an integer).
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path,
                               const std::optional<std::string>& label_column = std::nullopt);

/// Same grammar as load_csv, from an in-memory buffer.
[[nodiscard]] Dataset parse_csv(std::string_view text, const std::optional<std::string>& label_column = std::nullopt);

/// Writes features (and a trailing label column named `label_column` when the
/// dataset has labels) using shortest round-trip decimals.
void save_csv(const Dataset& d, const std::filesystem::path& path, const std::string& label_column = "label");
[[nodiscard]] std::string to_csv(const Dataset& d, const std::string& label_column = "label");

/// Column-wise exact min and max; throws EmptyDataset.
[[nodiscard]] FeatureRanges feature_ranges(const Dataset& d);

using RowPredicate = std::function<bool(std::span<const double> features, ClassId label)>;

struct BiasedSplit {
    Dataset train;
    Dataset test;
    std::size_t dropped = 0;  ///< predicate-matching training rows removed
};

/// Unbiased random test split of `test_fraction`, then removes all but
/// round(keep_fraction_matching * m) of the m predicate-matching training rows.
/// Output rows keep their original relative order.
[[nodiscard]] BiasedSplit bias_split(const Dataset& d, const RowPredicate& predicate, double keep_fraction_matching,
                                     std::uint64_t seed, double test_fraction = 0.5);

/// Conjunction of `<lhs> <op> <number>` clauses joined by "&&"; lhs is `label`,
/// a feature name, or `f<k>`; op is one of == != < <= > >=.
[[nodiscard]] RowPredicate parse_predicate(const std::string& text, const std::vector<std::string>& feature_names);

/// Distinct row indices drawn uniformly without replacement, in draw order.
[[nodiscard]] std::vector<std::size_t> sample_indices(std::size_t rows, std::size_t n, std::uint64_t seed);

/// n distinct rows, uniform without replacement; throws SubsetTooLarge.
[[nodiscard]] Dataset subset_sample(const Dataset& d, std::size_t n, std::uint64_t seed);

}  // namespace advdist
