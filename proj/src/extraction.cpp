#include "advdist/extraction.hpp"

#include "advdist/error.hpp"
#include "advdist/kernels.hpp"
#include "advdist/rng.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

namespace advdist {

LhsDesign lhs_design(const FeatureRanges& ranges, std::size_t n, std::uint64_t seed) {
    require(n >= 1, ErrorCode::InvalidArgument, "design size must be at least 1");
    require(!ranges.empty(), ErrorCode::InvalidArgument, "design needs at least one column");
    for (const auto& r : ranges) {
        require(std::isfinite(r.min) && std::isfinite(r.max) && r.min <= r.max, ErrorCode::InvalidArgument,
                "invalid feature range");
    }
    const std::size_t m = ranges.size();
    std::vector<double> points(n * m);
    std::vector<std::size_t> strata(n);
    for (std::size_t j = 0; j < m; ++j) {
        Rng rng(stream_seed(seed, {0x2001, j}));
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        rng.shuffle(strata);
        const double lo = ranges[j].min;
        const double hi = ranges[j].max;
        const double width = (hi - lo) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            // u strictly inside (0, 1)
            const double u = (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
            const double v = lo + (static_cast<double>(strata[i]) + u) * width;
            points[i * m + j] = std::clamp(v, lo, hi);
        }
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) {
        names.push_back("f" + std::to_string(j));
    }
    return LhsDesign{Dataset(n, m, std::move(points), std::nullopt, std::move(names), {}), ranges, seed};
}

double r_squared(std::span<const double> truth, std::span<const double> predicted) {
    require(truth.size() == predicted.size(), ErrorCode::DimensionMismatch, "r_squared length mismatch");
    require(!truth.empty(), ErrorCode::EmptyInput, "r_squared of an empty set");
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        sse += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
        sst += (truth[i] - mean) * (truth[i] - mean);
    }
    if (sst == 0.0) {
        return sse == 0.0 ? 1.0 : 0.0;
    }
    return 1.0 - sse / sst;
}

PseudoModel fit_pseudo(const Classifier& m_o, const Dataset& design, ClassId class_of_interest,
                       const ExtractionOptions& options) {
    require(options.epochs >= 1, ErrorCode::InvalidArgument, "extraction needs at least one epoch");
    require(!design.empty(), ErrorCode::EmptyDataset, "empty design");
    if (auto m = m_o.num_features(); m && *m != design.cols()) {
        fail(ErrorCode::DimensionMismatch, "design has " + std::to_string(design.cols()) +
                                               " features, classifier expects " + std::to_string(*m));
    }
    require(options.holdout_fraction >= 0.0 && options.holdout_fraction < 1.0, ErrorCode::InvalidArgument,
            "holdout fraction must lie in [0,1)");

    const auto targets = kernels::class_probability_batch(m_o, design, class_of_interest, options.workers);

    const std::size_t n = design.rows();
    Rng split_rng(stream_seed(options.seed, {0x2101}));
    auto order = sample_without_replacement(n, n, split_rng);
    std::size_t n_holdout = static_cast<std::size_t>(std::floor(options.holdout_fraction * static_cast<double>(n)));
    if (n_holdout == 0 && options.holdout_fraction > 0.0 && n >= 2) {
        n_holdout = 1;
    }
    const std::size_t n_train = n - n_holdout;
    std::span<const std::size_t> train_idx(order.data(), n_train);
    std::span<const std::size_t> holdout_idx(order.data() + n_train, n_holdout);

    const auto ranges = feature_ranges(design);
    std::vector<double> offset(design.cols());
    std::vector<double> scale(design.cols());
    for (std::size_t j = 0; j < design.cols(); ++j) {
        offset[j] = 0.5 * (ranges[j].min + ranges[j].max);
        scale[j] = 0.5 * ranges[j].width();
    }

    Rng init_rng(stream_seed(options.seed, {0x2102}));
    DenseNet net = DenseNet::create(design.cols(), options.hidden_widths, init_rng);
    Mlp& mlp = net.network();
    mlp.set_normalization(offset, scale);
    {
        double mean_target = 0.0;
        for (std::size_t i : train_idx) {
            mean_target += targets[i];
        }
        mean_target = std::clamp(mean_target / static_cast<double>(n_train), 1e-6, 1.0 - 1e-6);
        mlp.bias(mlp.layers().size() - 1)[0] = std::log(mean_target / (1.0 - mean_target));
    }

    Optimizer opt({options.optimizer, options.learning_rate}, mlp.params().size());
    const std::size_t batch = options.batch_size == 0 ? n_train : std::min(options.batch_size, n_train);
    std::vector<std::size_t> epoch_order(train_idx.begin(), train_idx.end());
    std::vector<double> grad(mlp.params().size());
    Mlp::Tape tape;

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        Rng shuffle_rng(stream_seed(options.seed, {0x2103, epoch}));
        shuffle_rng.shuffle(epoch_order);
        for (std::size_t start = 0; start < n_train; start += batch) {
            const std::size_t stop = std::min(start + batch, n_train);
            const double inv = 1.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = epoch_order[k];
                mlp.forward(design.row(i), tape);
                const double f = sigmoid(tape.preactivations.back()[0]);
                const double dz = 2.0 * (f - targets[i]) * f * (1.0 - f) * inv;
                mlp.backward(tape, std::span<const double>(&dz, 1), grad, {});
            }
            opt.step(mlp.params(), grad);
        }
    }

    PseudoModel out{std::move(net), {}};
    auto mse_over = [&](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (std::size_t i : idx) {
            const double e = out.net.forward(design.row(i)) - targets[i];
            s += e * e;
        }
        return idx.empty() ? 0.0 : s / static_cast<double>(idx.size());
    };
    out.report.train_mse = mse_over(train_idx);
    out.report.holdout_mse = mse_over(holdout_idx);
    if (!holdout_idx.empty()) {
        std::vector<double> truth;
        std::vector<double> pred;
        for (std::size_t i : holdout_idx) {
            truth.push_back(targets[i]);
            pred.push_back(out.net.forward(design.row(i)));
        }
        out.report.r_squared = r_squared(truth, pred);
    } else {
        out.report.r_squared = std::numeric_limits<double>::quiet_NaN();
    }
    out.report.n_design = n;
    out.report.n_holdout = n_holdout;
    out.report.epochs = options.epochs;
    return out;
}

PseudoModel fit_pseudo(const Classifier& m_o, const LhsDesign& design, ClassId class_of_interest,
                       const ExtractionOptions& options) {
    return fit_pseudo(m_o, design.points, class_of_interest, options);
}

PseudoModel extract_pseudo_model(const Classifier& m_o, const Dataset& domain, ClassId class_of_interest,
                                 const ExtractionOptions& options) {
    if (options.design_source == DesignSource::Dataset) {
        return fit_pseudo(m_o, domain.without_labels(), class_of_interest, options);
    }
    const auto design = lhs_design(feature_ranges(domain), options.design_size, stream_seed(options.seed, {0x2200}));
    return fit_pseudo(m_o, design, class_of_interest, options);
}

void to_json(nlohmann::json& j, const ExtractionReport& r) {
    j = {{"r_squared", r.r_squared}, {"train_mse", r.train_mse},   {"holdout_mse", r.holdout_mse},
         {"n_design", r.n_design},   {"n_holdout", r.n_holdout}, {"epochs", r.epochs}};
}

void save_pseudo_model(const PseudoModel& model, const std::filesystem::path& path) {
    nlohmann::json doc = model.net;
    doc["report"] = model.report;
    textio::write_file(path, doc.dump(2) + "\n");
}

PseudoModel load_pseudo_model(const std::filesystem::path& path) {
    try {
        const auto doc = nlohmann::json::parse(textio::read_file(path));
        PseudoModel out{doc.get<DenseNet>(), {}};
        if (doc.contains("report")) {
            const auto& r = doc["report"];
            out.report.r_squared = r.value("r_squared", 0.0);
            out.report.train_mse = r.value("train_mse", 0.0);
            out.report.holdout_mse = r.value("holdout_mse", 0.0);
            out.report.n_design = r.value("n_design", std::size_t{0});
            out.report.n_holdout = r.value("n_holdout", std::size_t{0});
            out.report.epochs = r.value("epochs", std::size_t{0});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, "invalid pseudo model file " + path.string() + ": " + e.what());
    }
}

DesignSource parse_design_source(const std::string& name) {
    if (name == "lhs") {
        return DesignSource::Lhs;
    }
    if (name == "dataset") {
        return DesignSource::Dataset;
    }
    fail(ErrorCode::InvalidArgument, "unknown design source '" + name + "' (expected lhs|dataset)");
}

}  // namespace advdist
