#include "advdist/search.hpp"

#include "advdist/error.hpp"
#include "advdist/mlp.hpp"
#include "advdist/rng.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <unordered_map>

namespace advdist {

std::vector<std::size_t> eligible_indices(const PoolView& pool, std::optional<std::span<const std::size_t>> rows) {
    std::vector<std::size_t> out;
    auto consider = [&](std::size_t i) {
        require(i < pool.predictions.size(), ErrorCode::InvalidArgument, "pool row out of range");
        if (is_eligible(pool.predictions[i], pool.class_of_interest, pool.threshold)) {
            out.push_back(i);
        }
    };
    if (rows) {
        for (std::size_t i : *rows) {
            consider(i);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    } else {
        for (std::size_t i = 0; i < pool.predictions.size(); ++i) {
            consider(i);
        }
    }
    return out;
}

bool operator==(const QueryStep& a, const QueryStep& b) {
    const bool same_sdr = a.sdr == b.sdr || (std::isnan(a.sdr) && std::isnan(b.sdr));
    return a.index == b.index && a.confidence == b.confidence && a.predicted == b.predicted && a.label == b.label &&
           a.is_error == b.is_error && same_sdr;
}

const QueryStep& SearchTrace::record(std::size_t index, double confidence, ClassId predicted, ClassId label) {
    require(steps_.size() < budget_, ErrorCode::InvalidArgument, "search budget already spent");
    auto pos = std::lower_bound(sorted_indices_.begin(), sorted_indices_.end(), index);
    require(pos == sorted_indices_.end() || *pos != index, ErrorCode::InvalidArgument,
            "instance " + std::to_string(index) + " already queried");
    sorted_indices_.insert(pos, index);

    QueryStep step{index, confidence, predicted, label, label != predicted, 0.0};
    errors_ += step.is_error ? 1 : 0;
    expected_errors_ += 1.0 - confidence;
    step.sdr = expected_errors_ > 0.0 ? static_cast<double>(errors_) / expected_errors_
                                      : std::numeric_limits<double>::quiet_NaN();
    steps_.push_back(step);
    return steps_.back();
}

bool SearchTrace::contains(std::size_t index) const {
    return std::binary_search(sorted_indices_.begin(), sorted_indices_.end(), index);
}

std::vector<std::size_t> SearchTrace::queried() const {
    std::vector<std::size_t> out;
    for (const auto& s : steps_) {
        out.push_back(s.index);
    }
    return out;
}

std::vector<std::size_t> SearchTrace::errors() const {
    std::vector<std::size_t> out;
    for (const auto& s : steps_) {
        if (s.is_error) {
            out.push_back(s.index);
        }
    }
    return out;
}

std::vector<double> SearchTrace::sdr_curve() const {
    std::vector<double> out;
    for (const auto& s : steps_) {
        out.push_back(s.sdr);
    }
    return out;
}

double SearchTrace::current_sdr() const noexcept {
    return steps_.empty() ? std::numeric_limits<double>::quiet_NaN() : steps_.back().sdr;
}

double sdr(std::span<const Prediction> queried, std::span<const ClassId> truth) {
    require(queried.size() == truth.size(), ErrorCode::DimensionMismatch, "sdr prediction/truth length mismatch");
    std::size_t found = 0;
    double expected = 0.0;
    for (std::size_t i = 0; i < queried.size(); ++i) {
        found += queried[i].label != truth[i] ? 1 : 0;
        expected += 1.0 - queried[i].confidence;
    }
    if (!(expected > 0.0)) {
        fail(ErrorCode::DegenerateConfidence, "expected error count is zero");
    }
    return static_cast<double>(found) / expected;
}

double sdr(std::span<const QueryStep> steps) {
    std::size_t found = 0;
    double expected = 0.0;
    for (const auto& s : steps) {
        found += s.is_error ? 1 : 0;
        expected += 1.0 - s.confidence;
    }
    if (!(expected > 0.0)) {
        fail(ErrorCode::DegenerateConfidence, "expected error count is zero");
    }
    return static_cast<double>(found) / expected;
}

SearchMethod parse_search_method(const std::string& name) {
    if (name == "gad") return SearchMethod::Gad;
    if (name == "random") return SearchMethod::Random;
    if (name == "least_confidence") return SearchMethod::LeastConfidence;
    if (name == "metamodel") return SearchMethod::Metamodel;
    fail(ErrorCode::InvalidArgument,
         "unknown search method '" + name + "' (expected gad|random|least_confidence|metamodel)");
}

const char* search_method_name(SearchMethod method) {
    switch (method) {
        case SearchMethod::Gad: return "gad";
        case SearchMethod::Random: return "random";
        case SearchMethod::LeastConfidence: return "least_confidence";
        case SearchMethod::Metamodel: return "metamodel";
    }
    return "gad";
}

namespace {

/// Walks a fixed ranking, skipping queried entries.
class FixedOrderStrategy final : public QueryStrategy {
  public:
    explicit FixedOrderStrategy(std::vector<std::size_t> order) : order_(std::move(order)) {}

    std::optional<std::size_t> next(const SearchTrace& trace) override {
        for (std::size_t i : order_) {
            if (!trace.contains(i)) {
                return i;
            }
        }
        return std::nullopt;
    }

  private:
    std::vector<std::size_t> order_;
};

std::vector<std::size_t> least_confidence_order(std::vector<std::size_t> candidates,
                                                std::span<const Prediction> predictions) {
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        const double ca = predictions[a].confidence;
        const double cb = predictions[b].confidence;
        return ca != cb ? ca < cb : a < b;
    });
    return candidates;
}

class MetamodelStrategy final : public QueryStrategy {
  public:
    MetamodelStrategy(std::vector<std::size_t> candidates, const PoolView& pool, std::uint64_t seed)
        : candidates_(std::move(candidates)), pool_(pool), seed_(seed) {
        require(pool.features != nullptr, ErrorCode::InvalidArgument, "metamodel search needs pool features");
        fallback_ = least_confidence_order(candidates_, pool.predictions);
        const std::size_t m = pool.features->cols() + 1;
        mean_.assign(m, 0.0);
        sd_.assign(m, 0.0);
        if (candidates_.empty()) {
            return;
        }
        for (std::size_t i : candidates_) {
            const auto x = raw(i);
            for (std::size_t j = 0; j < m; ++j) {
                mean_[j] += x[j];
            }
        }
        for (double& v : mean_) {
            v /= static_cast<double>(candidates_.size());
        }
        for (std::size_t i : candidates_) {
            const auto x = raw(i);
            for (std::size_t j = 0; j < m; ++j) {
                sd_[j] += (x[j] - mean_[j]) * (x[j] - mean_[j]);
            }
        }
        for (double& v : sd_) {
            v = std::sqrt(v / static_cast<double>(candidates_.size()));
            if (!(v > 0.0)) {
                v = 1.0;
            }
        }
    }

    std::optional<std::size_t> next(const SearchTrace& trace) override {
        if (trace.errors_found() == 0) {
            for (std::size_t i : fallback_) {
                if (!trace.contains(i)) {
                    return i;
                }
            }
            return std::nullopt;
        }
        const auto weights = fit(trace);
        std::optional<std::size_t> best;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i : candidates_) {
            if (trace.contains(i)) {
                continue;
            }
            const double s = score(weights, i);
            if (!best || s > best_score || (s == best_score && i < *best)) {
                best = i;
                best_score = s;
            }
        }
        return best;
    }

  private:
    static constexpr std::size_t kIterations = 300;
    static constexpr double kLearningRate = 0.5;
    static constexpr double kRidge = 1e-3;

    std::vector<double> raw(std::size_t i) const {
        const auto f = pool_.features->row(i);
        std::vector<double> x(f.begin(), f.end());
        x.push_back(pool_.predictions[i].confidence);
        return x;
    }

    std::vector<double> standardized(std::size_t i) const {
        auto x = raw(i);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = (x[j] - mean_[j]) / sd_[j];
        }
        return x;
    }

    /// Logit of the error probability (monotone in the probability).
    double score(const std::vector<double>& w, std::size_t i) const {
        const auto x = standardized(i);
        double z = w.back();
        for (std::size_t j = 0; j < x.size(); ++j) {
            z += w[j] * x[j];
        }
        return z;
    }

    std::vector<double> fit(const SearchTrace& trace) const {
        const std::size_t m = mean_.size();
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (const auto& s : trace.steps()) {
            xs.push_back(standardized(s.index));
            ys.push_back(s.is_error ? 1.0 : 0.0);
        }
        Rng rng(stream_seed(seed_, {0x4001, trace.size()}));
        std::vector<double> w(m + 1);
        for (double& v : w) {
            v = rng.uniform(-0.01, 0.01);
        }
        std::vector<double> grad(m + 1);
        const double inv = 1.0 / static_cast<double>(xs.size());
        for (std::size_t it = 0; it < kIterations; ++it) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t r = 0; r < xs.size(); ++r) {
                double z = w[m];
                for (std::size_t j = 0; j < m; ++j) {
                    z += w[j] * xs[r][j];
                }
                const double d = (sigmoid(z) - ys[r]) * inv;
                for (std::size_t j = 0; j < m; ++j) {
                    grad[j] += d * xs[r][j];
                }
                grad[m] += d;
            }
            for (std::size_t j = 0; j < m; ++j) {
                grad[j] += kRidge * w[j];
            }
            for (std::size_t j = 0; j <= m; ++j) {
                w[j] -= kLearningRate * grad[j];
            }
        }
        return w;
    }

    std::vector<std::size_t> candidates_;
    PoolView pool_;
    std::uint64_t seed_;
    std::vector<std::size_t> fallback_;
    std::vector<double> mean_;
    std::vector<double> sd_;
};

}  // namespace

std::unique_ptr<QueryStrategy> make_gad_strategy(std::vector<std::size_t> candidates,
                                                 std::span<const GadRecord> records) {
    std::unordered_map<std::size_t, double> gad;
    for (const auto& r : records) {
        gad[r.index] = r.gad;
    }
    auto key = [&](std::size_t i) {
        auto it = gad.find(i);
        return it == gad.end() ? std::numeric_limits<double>::infinity() : it->second;
    };
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        const double ga = key(a);
        const double gb = key(b);
        return ga != gb ? ga < gb : a < b;
    });
    return std::make_unique<FixedOrderStrategy>(std::move(candidates));
}

std::unique_ptr<QueryStrategy> make_random_strategy(std::vector<std::size_t> candidates, std::uint64_t seed) {
    Rng rng(stream_seed(seed, {0x4101}));
    rng.shuffle(candidates);
    return std::make_unique<FixedOrderStrategy>(std::move(candidates));
}

std::unique_ptr<QueryStrategy> make_least_confidence_strategy(std::vector<std::size_t> candidates,
                                                              std::span<const Prediction> predictions) {
    return std::make_unique<FixedOrderStrategy>(least_confidence_order(std::move(candidates), predictions));
}

std::unique_ptr<QueryStrategy> make_metamodel_strategy(std::vector<std::size_t> candidates, const PoolView& pool,
                                                       std::uint64_t seed) {
    return std::make_unique<MetamodelStrategy>(std::move(candidates), pool, seed);
}

std::unique_ptr<QueryStrategy> make_strategy(SearchMethod method, std::vector<std::size_t> candidates,
                                             const PoolView& pool, std::span<const GadRecord> records,
                                             std::uint64_t seed) {
    switch (method) {
        case SearchMethod::Gad: return make_gad_strategy(std::move(candidates), records);
        case SearchMethod::Random: return make_random_strategy(std::move(candidates), seed);
        case SearchMethod::LeastConfidence:
            return make_least_confidence_strategy(std::move(candidates), pool.predictions);
        case SearchMethod::Metamodel: return make_metamodel_strategy(std::move(candidates), pool, seed);
    }
    fail(ErrorCode::InvalidArgument, "unknown search method");
}

SearchTrace run_search(QueryStrategy& strategy, std::size_t candidate_count, const PoolView& pool,
                       const Oracle& oracle, std::size_t budget) {
    if (budget > candidate_count) {
        fail(ErrorCode::BudgetExceedsPool, "budget " + std::to_string(budget) + " exceeds the " +
                                               std::to_string(candidate_count) + " eligible instances");
    }
    SearchTrace trace(budget);
    for (std::size_t b = 0; b < budget; ++b) {
        const auto q = strategy.next(trace);
        if (!q) {
            break;
        }
        const auto& p = pool.predictions[*q];
        trace.record(*q, p.confidence, p.label, oracle.label(*q));
    }
    return trace;
}

SearchTrace gad_search(const PoolView& pool, std::span<const GadRecord> records, const Oracle& oracle,
                       std::size_t budget) {
    auto candidates = eligible_indices(pool);
    const std::size_t n = candidates.size();
    auto strategy = make_gad_strategy(std::move(candidates), records);
    return run_search(*strategy, n, pool, oracle, budget);
}

SearchTrace random_search(const PoolView& pool, const Oracle& oracle, std::size_t budget, std::uint64_t seed) {
    auto candidates = eligible_indices(pool);
    const std::size_t n = candidates.size();
    auto strategy = make_random_strategy(std::move(candidates), seed);
    return run_search(*strategy, n, pool, oracle, budget);
}

SearchTrace least_confidence_search(const PoolView& pool, const Oracle& oracle, std::size_t budget) {
    auto candidates = eligible_indices(pool);
    const std::size_t n = candidates.size();
    auto strategy = make_least_confidence_strategy(std::move(candidates), pool.predictions);
    return run_search(*strategy, n, pool, oracle, budget);
}

SearchTrace metamodel_search(const PoolView& pool, const Oracle& oracle, std::size_t budget, std::uint64_t seed) {
    auto candidates = eligible_indices(pool);
    const std::size_t n = candidates.size();
    auto strategy = make_metamodel_strategy(std::move(candidates), pool, seed);
    return run_search(*strategy, n, pool, oracle, budget);
}

std::string step_to_json_line(const QueryStep& step, std::size_t step_number) {
    nlohmann::ordered_json j;
    j["step"] = step_number;
    j["index"] = step.index;
    j["confidence"] = step.confidence;
    j["predicted"] = step.predicted;
    j["label"] = step.label;
    j["is_error"] = step.is_error;
    j["sdr"] = std::isfinite(step.sdr) ? nlohmann::ordered_json(step.sdr) : nlohmann::ordered_json(nullptr);
    return j.dump();
}

std::string trace_to_jsonl(const SearchTrace& trace) {
    std::string out;
    for (std::size_t k = 0; k < trace.steps().size(); ++k) {
        out += step_to_json_line(trace.steps()[k], k + 1);
        out += '\n';
    }
    return out;
}

SearchTrace trace_from_jsonl(std::string_view text, std::size_t budget) {
    SearchTrace trace(budget);
    std::size_t line_no = 0;
    for (const auto& line : textio::lines(text)) {
        ++line_no;
        if (textio::trim(line).empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            require(j.at("step").get<std::size_t>() == trace.size() + 1, ErrorCode::ParseError,
                    "trace steps out of order at line " + std::to_string(line_no));
            trace.record(j.at("index").get<std::size_t>(), j.at("confidence").get<double>(),
                         j.at("predicted").get<ClassId>(), j.at("label").get<ClassId>());
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::ParseError, "bad trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return trace;
}

}  // namespace advdist
