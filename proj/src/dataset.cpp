#include "advdist/dataset.hpp"

#include "advdist/error.hpp"
#include "advdist/hash.hpp"
#include "advdist/rng.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace advdist {

Dataset::Dataset(std::size_t rows, std::size_t cols, std::vector<double> features,
                 std::optional<std::vector<ClassId>> labels, std::vector<std::string> feature_names,
                 std::vector<std::string> class_names)
    : rows_(rows),
      cols_(cols),
      features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)),
      class_names_(std::move(class_names)) {
    require(cols_ >= 1, ErrorCode::InvalidArgument, "dataset needs at least one feature");
    require(features_.size() == rows_ * cols_, ErrorCode::RaggedRow, "feature buffer does not match rows x cols");
    require(std::all_of(features_.begin(), features_.end(), [](double v) { return std::isfinite(v); }),
            ErrorCode::InvalidArgument, "feature values must be finite");
    if (feature_names_.empty()) {
        for (std::size_t j = 0; j < cols_; ++j) {
            feature_names_.push_back("f" + std::to_string(j));
        }
    }
    require(feature_names_.size() == cols_, ErrorCode::InvalidArgument, "feature name count mismatch");
    if (labels_) {
        require(labels_->size() == rows_, ErrorCode::InvalidArgument, "label count must equal row count");
        for (ClassId y : *labels_) {
            require(y >= 0 && static_cast<std::size_t>(y) < class_names_.size(), ErrorCode::InvalidArgument,
                    "label " + std::to_string(y) + " outside class table");
        }
    }
}

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows, std::optional<std::vector<ClassId>> labels,
                           std::size_t num_classes) {
    require(!rows.empty() || num_classes > 0 || !labels, ErrorCode::InvalidArgument, "empty row list");
    const std::size_t cols = rows.empty() ? 1 : rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        require(r.size() == cols, ErrorCode::RaggedRow, "inconsistent row length");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    std::vector<std::string> classes;
    if (labels) {
        std::size_t k = num_classes;
        for (ClassId y : *labels) {
            require(y >= 0, ErrorCode::InvalidArgument, "labels must be non-negative");
            k = std::max(k, static_cast<std::size_t>(y) + 1);
        }
        for (std::size_t c = 0; c < k; ++c) {
            classes.push_back(std::to_string(c));
        }
    } else {
        for (std::size_t c = 0; c < num_classes; ++c) {
            classes.push_back(std::to_string(c));
        }
    }
    return Dataset(rows.size(), cols, std::move(flat), std::move(labels), {}, std::move(classes));
}

const std::vector<ClassId>& Dataset::labels() const {
    if (!labels_) {
        fail(ErrorCode::NoLabels, "dataset has no labels");
    }
    return *labels_;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
    std::vector<double> flat;
    flat.reserve(indices.size() * cols_);
    std::optional<std::vector<ClassId>> labels;
    if (labels_) {
        labels.emplace();
        labels->reserve(indices.size());
    }
    for (std::size_t i : indices) {
        require(i < rows_, ErrorCode::InvalidArgument, "row index out of range");
        auto r = row(i);
        flat.insert(flat.end(), r.begin(), r.end());
        if (labels) {
            labels->push_back((*labels_)[i]);
        }
    }
    return Dataset(indices.size(), cols_, std::move(flat), std::move(labels), feature_names_, class_names_);
}

Dataset Dataset::without_labels() const {
    return Dataset(rows_, cols_, features_, std::nullopt, feature_names_, class_names_);
}

std::uint64_t Dataset::fingerprint() const {
    Fnv1a h;
    h.u64(rows_).u64(cols_).f64s(features_);
    if (labels_) {
        for (ClassId y : *labels_) {
            h.u64(static_cast<std::uint64_t>(y));
        }
    }
    return h.value();
}

Dataset parse_csv(std::string_view text, const std::optional<std::string>& label_column) {
    const auto all = textio::lines(text);
    require(!all.empty(), ErrorCode::ParseError, "missing header row");
    auto header = textio::split(all.front(), ',');
    for (auto& h : header) {
        h = std::string(textio::trim(h));
    }

    std::optional<std::size_t> label_idx;
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        require(it != header.end(), ErrorCode::InvalidArgument, "label column '" + *label_column + "' not in header");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::string> feature_names;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_idx) {
            feature_names.push_back(header[j]);
        }
    }
    require(!feature_names.empty(), ErrorCode::ParseError, "no feature columns");

    std::vector<double> flat;
    std::vector<ClassId> labels;
    std::vector<std::string> class_names;
    std::unordered_map<std::string, ClassId> class_ids;
    std::size_t rows = 0;

    for (std::size_t li = 1; li < all.size(); ++li) {
        if (textio::trim(all[li]).empty()) {
            continue;
        }
        ++rows;
        const auto cells = textio::split(all[li], ',');
        if (cells.size() != header.size()) {
            fail(ErrorCode::RaggedRow, "row " + std::to_string(rows) + " has " + std::to_string(cells.size()) +
                                           " cells, header has " + std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == label_idx) {
                std::string token(textio::trim(cells[j]));
                auto [it, inserted] = class_ids.try_emplace(token, static_cast<ClassId>(class_names.size()));
                if (inserted) {
                    class_names.push_back(token);
                }
                labels.push_back(it->second);
                continue;
            }
            auto v = textio::parse_double(cells[j]);
            if (!v || !std::isfinite(*v)) {
                throw ParseError(rows, header[j], "'" + cells[j] + "' is not a finite number");
            }
            flat.push_back(*v);
        }
    }

    std::optional<std::vector<ClassId>> label_vec;
    if (label_idx) {
        // Sorted class table (numeric when every token is an integer) so files
        // sharing a label set share ids.
        std::vector<std::string> sorted = class_names;
        const bool numeric = std::all_of(sorted.begin(), sorted.end(),
                                         [](const std::string& t) { return textio::parse_int(t).has_value(); });
        std::sort(sorted.begin(), sorted.end(), [numeric](const std::string& a, const std::string& b) {
            return numeric ? *textio::parse_int(a) < *textio::parse_int(b) : a < b;
        });
        std::vector<ClassId> remap(class_names.size());
        for (std::size_t c = 0; c < class_names.size(); ++c) {
            remap[c] = static_cast<ClassId>(std::find(sorted.begin(), sorted.end(), class_names[c]) - sorted.begin());
        }
        for (auto& y : labels) {
            y = remap[static_cast<std::size_t>(y)];
        }
        class_names = std::move(sorted);
        label_vec = std::move(labels);
    }
    const std::size_t cols = feature_names.size();
    return Dataset(rows, cols, std::move(flat), std::move(label_vec), std::move(feature_names),
                   std::move(class_names));
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
    if (!std::filesystem::exists(path)) {
        fail(ErrorCode::MissingFile, "no such file: " + path.string());
    }
    return parse_csv(textio::read_file(path), label_column);
}

std::string to_csv(const Dataset& d, const std::string& label_column) {
    std::string out;
    for (std::size_t j = 0; j < d.cols(); ++j) {
        if (j) {
            out += ',';
        }
        out += d.feature_names()[j];
    }
    if (d.has_labels()) {
        out += ',' + label_column;
    }
    out += '\n';
    for (std::size_t i = 0; i < d.rows(); ++i) {
        for (std::size_t j = 0; j < d.cols(); ++j) {
            if (j) {
                out += ',';
            }
            out += textio::format_double(d.at(i, j));
        }
        if (d.has_labels()) {
            out += ',' + d.class_names()[static_cast<std::size_t>(d.label(i))];
        }
        out += '\n';
    }
    return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path, const std::string& label_column) {
    textio::write_file(path, to_csv(d, label_column));
}

FeatureRanges feature_ranges(const Dataset& d) {
    require(!d.empty(), ErrorCode::EmptyDataset, "feature_ranges of an empty dataset");
    FeatureRanges ranges(d.cols());
    auto first = d.row(0);
    for (std::size_t j = 0; j < d.cols(); ++j) {
        ranges[j] = {first[j], first[j]};
    }
    for (std::size_t i = 1; i < d.rows(); ++i) {
        auto r = d.row(i);
        for (std::size_t j = 0; j < d.cols(); ++j) {
            ranges[j].min = std::min(ranges[j].min, r[j]);
            ranges[j].max = std::max(ranges[j].max, r[j]);
        }
    }
    return ranges;
}

BiasedSplit bias_split(const Dataset& d, const RowPredicate& predicate, double keep_fraction_matching,
                       std::uint64_t seed, double test_fraction) {
    if (!d.has_labels()) {
        fail(ErrorCode::NoLabels, "bias_split requires labels");
    }
    require(keep_fraction_matching >= 0.0 && keep_fraction_matching <= 1.0, ErrorCode::InvalidArgument,
            "keep fraction must lie in [0,1]");
    require(test_fraction >= 0.0 && test_fraction <= 1.0, ErrorCode::InvalidArgument,
            "test fraction must lie in [0,1]");

    Rng split_rng(stream_seed(seed, {1}));
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(d.rows())));
    auto order = sample_without_replacement(d.rows(), d.rows(), split_rng);
    std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_pool(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_pool.begin(), train_pool.end());

    std::vector<std::size_t> matching;
    std::vector<std::size_t> train_rows;
    for (std::size_t i : train_pool) {
        if (predicate(d.row(i), d.label(i))) {
            matching.push_back(i);
        } else {
            train_rows.push_back(i);
        }
    }
    const auto keep = static_cast<std::size_t>(std::floor(keep_fraction_matching * static_cast<double>(matching.size()) + 0.5));
    Rng keep_rng(stream_seed(seed, {2}));
    for (std::size_t k : sample_without_replacement(matching.size(), keep, keep_rng)) {
        train_rows.push_back(matching[k]);
    }
    std::sort(train_rows.begin(), train_rows.end());

    return BiasedSplit{d.select(train_rows), d.select(test_rows), matching.size() - keep};
}

namespace {

struct Clause {
    bool is_label = false;
    std::size_t feature = 0;
    std::string op;
    double value = 0.0;

    [[nodiscard]] bool eval(double lhs) const {
        if (op == "==") return lhs == value;
        if (op == "!=") return lhs != value;
        if (op == "<") return lhs < value;
        if (op == "<=") return lhs <= value;
        if (op == ">") return lhs > value;
        return lhs >= value;
    }
};

Clause parse_clause(std::string_view text, const std::vector<std::string>& names) {
    static constexpr std::string_view ops[] = {"==", "!=", "<=", ">=", "<", ">"};
    for (auto op : ops) {
        const auto pos = text.find(op);
        if (pos == std::string_view::npos) {
            continue;
        }
        Clause c;
        c.op = std::string(op);
        const auto lhs = std::string(textio::trim(text.substr(0, pos)));
        const auto rhs = textio::parse_double(text.substr(pos + op.size()));
        require(rhs.has_value(), ErrorCode::InvalidArgument, "predicate value is not a number: " + std::string(text));
        c.value = *rhs;
        if (lhs == "label") {
            c.is_label = true;
            return c;
        }
        auto it = std::find(names.begin(), names.end(), lhs);
        if (it != names.end()) {
            c.feature = static_cast<std::size_t>(it - names.begin());
            return c;
        }
        if (lhs.size() > 1 && lhs[0] == 'f') {
            if (auto k = textio::parse_int(std::string_view(lhs).substr(1)); k && *k >= 0 &&
                                                                              static_cast<std::size_t>(*k) < names.size()) {
                c.feature = static_cast<std::size_t>(*k);
                return c;
            }
        }
        fail(ErrorCode::InvalidArgument, "unknown predicate operand '" + lhs + "'");
    }
    fail(ErrorCode::InvalidArgument, "predicate clause without operator: " + std::string(text));
}

}  // namespace

RowPredicate parse_predicate(const std::string& text, const std::vector<std::string>& feature_names) {
    std::vector<Clause> clauses;
    std::string_view rest = text;
    while (true) {
        const auto pos = rest.find("&&");
        clauses.push_back(parse_clause(rest.substr(0, pos), feature_names));
        if (pos == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(pos + 2);
    }
    return [clauses](std::span<const double> x, ClassId y) {
        return std::all_of(clauses.begin(), clauses.end(), [&](const Clause& c) {
            return c.eval(c.is_label ? static_cast<double>(y) : x[c.feature]);
        });
    };
}

std::vector<std::size_t> sample_indices(std::size_t rows, std::size_t n, std::uint64_t seed) {
    if (n > rows) {
        fail(ErrorCode::SubsetTooLarge,
             "requested " + std::to_string(n) + " rows from a dataset of " + std::to_string(rows));
    }
    Rng rng(stream_seed(seed, {3}));
    return sample_without_replacement(rows, n, rng);
}

Dataset subset_sample(const Dataset& d, std::size_t n, std::uint64_t seed) {
    const auto idx = sample_indices(d.rows(), n, seed);
    return d.select(idx);
}

}  // namespace advdist
