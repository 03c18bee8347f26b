#include "advdist/bench.hpp"

#include "advdist/error.hpp"
#include "advdist/external_classifier.hpp"
#include "advdist/hash.hpp"
#include "advdist/kernels.hpp"
#include "advdist/rng.hpp"
#include "advdist/synthetic.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <omp.h>

namespace advdist {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    require(j.is_object(), ErrorCode::InvalidArgument, where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        require(known, ErrorCode::InvalidArgument, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

ClassId resolve_class(const std::string& name, const std::vector<std::string>& class_names) {
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        if (class_names[c] == name) {
            return static_cast<ClassId>(c);
        }
    }
    const auto id = textio::parse_int(name);
    if (id && *id >= 0 && static_cast<std::size_t>(*id) < class_names.size()) {
        return static_cast<ClassId>(*id);
    }
    fail(ErrorCode::InvalidArgument, "unknown class '" + name + "'");
}

ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        check_keys(j,
                   {"dataset", "class_of_interest", "classifier", "extraction", "attack", "gad", "searches",
                    "replications", "subset_size", "budget", "seed", "threshold", "reliability_bin_width"},
                   "experiment config");
        if (j.contains("dataset")) {
            const auto& d = j.at("dataset");
            check_keys(d, {"source", "label_column", "rows", "bias_predicate", "keep_fraction", "test_fraction"},
                       "dataset");
            read(d, "source", cfg.dataset.source);
            read(d, "label_column", cfg.dataset.label_column);
            read(d, "rows", cfg.dataset.synthetic_rows);
            if (d.contains("bias_predicate") && !d.at("bias_predicate").is_null()) {
                cfg.dataset.bias_predicate = d.at("bias_predicate").get<std::string>();
            }
            read(d, "keep_fraction", cfg.dataset.keep_fraction);
            read(d, "test_fraction", cfg.dataset.test_fraction);
        }
        if (j.contains("class_of_interest")) {
            const auto& c = j.at("class_of_interest");
            cfg.class_of_interest = c.is_string() ? c.get<std::string>() : std::to_string(c.get<long long>());
        }
        if (j.contains("classifier")) {
            const auto& c = j.at("classifier");
            check_keys(c, {"type", "hidden", "epochs", "learning_rate", "path", "command"}, "classifier");
            read(c, "type", cfg.classifier.type);
            read(c, "hidden", cfg.classifier.hidden_widths);
            read(c, "epochs", cfg.classifier.epochs);
            read(c, "learning_rate", cfg.classifier.learning_rate);
            read(c, "path", cfg.classifier.path);
            read(c, "command", cfg.classifier.command);
        }
        if (j.contains("extraction")) {
            const auto& e = j.at("extraction");
            check_keys(e,
                       {"design_source", "design_size", "hidden", "epochs", "learning_rate", "batch_size",
                        "optimizer", "holdout_fraction"},
                       "extraction");
            if (e.contains("design_source")) {
                cfg.extraction.design_source = parse_design_source(e.at("design_source").get<std::string>());
            }
            read(e, "design_size", cfg.extraction.design_size);
            read(e, "hidden", cfg.extraction.hidden_widths);
            read(e, "epochs", cfg.extraction.epochs);
            read(e, "learning_rate", cfg.extraction.learning_rate);
            read(e, "batch_size", cfg.extraction.batch_size);
            if (e.contains("optimizer")) {
                cfg.extraction.optimizer = parse_optimizer(e.at("optimizer").get<std::string>());
            }
            read(e, "holdout_fraction", cfg.extraction.holdout_fraction);
        }
        if (j.contains("attack")) {
            const auto& a = j.at("attack");
            check_keys(a, {"epsilon", "max_iters", "target", "clip"}, "attack");
            if (a.contains("epsilon") && !(a.at("epsilon").is_string() && a.at("epsilon") == "default")) {
                cfg.attack.epsilon = a.at("epsilon").get<double>();
                cfg.default_epsilon = false;
            }
            read(a, "max_iters", cfg.attack.max_iters);
            if (a.contains("target")) {
                cfg.attack.target = parse_attack_target(a.at("target").get<std::string>());
            }
            read(a, "clip", cfg.clip_to_pool);
        }
        if (j.contains("gad")) {
            const auto& g = j.at("gad");
            check_keys(g, {"span", "scale"}, "gad");
            read(g, "span", cfg.gad.span);
            if (g.contains("scale")) {
                cfg.gad.scale = parse_response_scale(g.at("scale").get<std::string>());
            }
        }
        if (j.contains("searches")) {
            cfg.searches.clear();
            for (const auto& s : j.at("searches")) {
                cfg.searches.push_back(parse_search_method(s.get<std::string>()));
            }
        }
        read(j, "replications", cfg.replications);
        read(j, "subset_size", cfg.subset_size);
        read(j, "budget", cfg.budget);
        read(j, "seed", cfg.seed);
        read(j, "threshold", cfg.threshold);
        read(j, "reliability_bin_width", cfg.reliability_bin_width);
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("bad experiment config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::InvalidArgument, msg); };
    check(cfg.replications >= 1, "replications must be >= 1");
    check(cfg.budget >= 1, "budget must be >= 1");
    check(cfg.budget <= cfg.subset_size, "budget must not exceed the subset size");
    check(!cfg.searches.empty(), "at least one search is required");
    check(cfg.threshold >= 0.0 && cfg.threshold < 1.0, "threshold must lie in [0, 1)");
    check(cfg.dataset.keep_fraction >= 0.0 && cfg.dataset.keep_fraction <= 1.0, "keep_fraction must lie in [0, 1]");
    check(cfg.dataset.test_fraction > 0.0 && cfg.dataset.test_fraction < 1.0, "test_fraction must lie in (0, 1)");
    check(cfg.attack.epsilon > 0.0, "attack epsilon must be > 0");
    check(cfg.attack.max_iters >= 1, "attack max_iters must be >= 1");
    check(cfg.gad.span > 0.0 && cfg.gad.span <= 1.0, "gad span must lie in (0, 1]");
    check(cfg.extraction.epochs >= 1, "extraction epochs must be >= 1");
    check(cfg.extraction.design_size >= 1, "extraction design_size must be >= 1");
    check(cfg.reliability_bin_width > 0.0, "reliability_bin_width must be > 0");
    const auto& t = cfg.classifier.type;
    check(t == "mlp" || t == "logistic" || t == "generator" || t == "file" || t == "external",
          "classifier type must be mlp|logistic|generator|file|external");
    check(t != "file" || !cfg.classifier.path.empty(), "classifier type 'file' needs a path");
    check(t != "external" || !cfg.classifier.command.empty(), "classifier type 'external' needs a command");
}

void to_json(json& j, const ExperimentConfig& cfg) {
    json searches = json::array();
    for (auto m : cfg.searches) {
        searches.push_back(search_method_name(m));
    }
    j = json{{"dataset",
              {{"source", cfg.dataset.source},
               {"label_column", cfg.dataset.label_column},
               {"rows", cfg.dataset.synthetic_rows},
               {"bias_predicate", cfg.dataset.bias_predicate ? json(*cfg.dataset.bias_predicate) : json(nullptr)},
               {"keep_fraction", cfg.dataset.keep_fraction},
               {"test_fraction", cfg.dataset.test_fraction}}},
             {"class_of_interest", cfg.class_of_interest},
             {"classifier",
              {{"type", cfg.classifier.type},
               {"hidden", cfg.classifier.hidden_widths},
               {"epochs", cfg.classifier.epochs},
               {"learning_rate", cfg.classifier.learning_rate},
               {"path", cfg.classifier.path},
               {"command", cfg.classifier.command}}},
             {"extraction",
              {{"design_source", cfg.extraction.design_source == DesignSource::Lhs ? "lhs" : "dataset"},
               {"design_size", cfg.extraction.design_size},
               {"hidden", cfg.extraction.hidden_widths},
               {"epochs", cfg.extraction.epochs},
               {"learning_rate", cfg.extraction.learning_rate},
               {"batch_size", cfg.extraction.batch_size},
               {"optimizer", optimizer_name(cfg.extraction.optimizer)},
               {"holdout_fraction", cfg.extraction.holdout_fraction}}},
             {"attack",
              {{"epsilon", cfg.default_epsilon ? json("default") : json(cfg.attack.epsilon)},
               {"max_iters", cfg.attack.max_iters},
               {"target", attack_target_name(cfg.attack.target)},
               {"clip", cfg.clip_to_pool}}},
             {"gad", {{"span", cfg.gad.span}, {"scale", response_scale_name(cfg.gad.scale)}}},
             {"searches", searches},
             {"replications", cfg.replications},
             {"subset_size", cfg.subset_size},
             {"budget", cfg.budget},
             {"seed", cfg.seed},
             {"threshold", cfg.threshold},
             {"reliability_bin_width", cfg.reliability_bin_width}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    const std::string text = textio::read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j);
}

Quartiles quartiles(std::vector<double> values) {
    require(!values.empty(), ErrorCode::EmptyInput, "quartiles of an empty set");
    std::sort(values.begin(), values.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return Quartiles{values.front(), q(0.25), q(0.5), q(0.75), values.back()};
}

const SearchSummary& BenchReport::search(SearchMethod method) const {
    for (const auto& s : searches) {
        if (s.method == method) {
            return s;
        }
    }
    fail(ErrorCode::InvalidArgument, std::string("report has no ") + search_method_name(method) + " search");
}

std::shared_ptr<const Classifier> build_classifier(const ClassifierSpec& spec, const Dataset& train,
                                                   std::uint64_t seed) {
    if (spec.type == "mlp") {
        return std::make_shared<FeedForwardClassifier>(
            train_mlp(train, spec.hidden_widths, spec.epochs, spec.learning_rate, seed));
    }
    if (spec.type == "logistic") {
        return std::make_shared<FeedForwardClassifier>(train_logistic(train, spec.epochs, spec.learning_rate, seed));
    }
    if (spec.type == "generator") {
        require(train.cols() == 2, ErrorCode::DimensionMismatch, "the generator classifier needs two features");
        return std::make_shared<FeedForwardClassifier>(calibrated_generator());
    }
    if (spec.type == "file") {
        return std::make_shared<FeedForwardClassifier>(load_classifier(spec.path));
    }
    if (spec.type == "external") {
        return std::make_shared<ExternalClassifier>(spec.command, std::max<std::size_t>(train.num_classes(), 2),
                                                    train.cols());
    }
    fail(ErrorCode::InvalidArgument, "unknown classifier type '" + spec.type + "'");
}

PreparedPool score_pool(std::shared_ptr<const Classifier> classifier, Dataset pool, ClassId class_of_interest,
                        const ExperimentConfig& cfg, int workers) {
    require(classifier != nullptr, ErrorCode::InvalidArgument, "no classifier");
    require(!pool.empty(), ErrorCode::EmptyDataset, "empty evaluation pool");
    PreparedPool out;
    out.class_of_interest = class_of_interest;
    out.predictions = kernels::predict_batch(*classifier, pool, workers);

    Fnv1a h;
    out.fingerprints.dataset = pool.fingerprint();
    h.u64(out.fingerprints.dataset);
    for (const auto& p : out.predictions) {
        h.u64(static_cast<std::uint64_t>(p.label)).f64(p.confidence);
    }
    out.fingerprints.classifier = h.value();

    ExtractionOptions extraction = cfg.extraction;
    extraction.seed = stream_seed(cfg.seed, {0x5401});
    extraction.workers = workers;
    out.pseudo = extract_pseudo_model(*classifier, pool, class_of_interest, extraction);
    h.f64s(out.pseudo.net.network().params());
    out.fingerprints.pseudo_model = h.value();

    const PoolView view{&pool, out.predictions, class_of_interest, cfg.threshold};
    out.eligible = eligible_indices(view);
    AttackConfig attack = cfg.attack;
    const auto ranges = feature_ranges(pool);
    if (cfg.default_epsilon) {
        attack.epsilon = default_epsilon(ranges);
    }
    if (cfg.clip_to_pool) {
        attack.clip_to_ranges = ranges;
    }
    const Dataset eval = pool.select(out.eligible);
    out.attacks = kernels::attack_batch(*classifier, out.pseudo.net, eval, attack, workers);
    for (std::size_t k = 0; k < out.attacks.size(); ++k) {
        h.u64(out.eligible[k]).u64(out.attacks[k].flipped ? 1 : 0).f64s(out.attacks[k].x_adv);
    }
    out.fingerprints.attacks = h.value();

    std::vector<GadRecord> records(out.eligible.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        records[k].index = out.eligible[k];
        records[k].confidence = out.predictions[out.eligible[k]].confidence;
        records[k].mae = mae(eval.row(k), out.attacks[k].x_adv);
        records[k].flipped = out.attacks[k].flipped;
    }
    out.gad = fit_gad(std::move(records), cfg.gad).records;
    for (const auto& r : out.gad) {
        h.u64(r.index).f64(r.gad);
    }
    out.fingerprints.gad = h.value();

    out.classifier = std::move(classifier);
    out.pool = std::move(pool);
    return out;
}

PreparedPool prepare_pool(const ExperimentConfig& cfg, int workers) {
    validate(cfg);
    SyntheticScenario scenario;
    const auto& ds = cfg.dataset;
    if (ds.source == "synthetic:overconfident") {
        scenario = synth_overconfident(ds.synthetic_rows, cfg.seed, ds.keep_fraction);
    } else if (ds.source == "synthetic:calibrated") {
        scenario = synth_calibrated(ds.synthetic_rows, cfg.seed);
    } else {
        require(ds.source.rfind("synthetic:", 0) != 0, ErrorCode::InvalidArgument,
                "unknown synthetic generator '" + ds.source + "'");
        const Dataset all = load_csv(ds.source, ds.label_column);
        RowPredicate predicate = [](std::span<const double>, ClassId) { return false; };
        if (ds.bias_predicate) {
            predicate = parse_predicate(*ds.bias_predicate, all.feature_names());
        }
        auto split = bias_split(all, predicate, ds.bias_predicate ? ds.keep_fraction : 1.0,
                                stream_seed(cfg.seed, {0x5201}), ds.test_fraction);
        scenario.train = std::move(split.train);
        scenario.test = std::move(split.test);
        scenario.dropped = split.dropped;
    }
    const ClassId coi = resolve_class(cfg.class_of_interest, scenario.test.class_names());
    auto classifier = build_classifier(cfg.classifier, scenario.train, stream_seed(cfg.seed, {0x5301}));
    return score_pool(std::move(classifier), std::move(scenario.test), coi, cfg, workers);
}

BenchReport run_replications(const ExperimentConfig& cfg, const PreparedPool& prepared, int workers) {
    validate(cfg);
    const Dataset& pool = prepared.pool;
    require(pool.has_labels(), ErrorCode::NoLabels, "the simulated oracle needs a labelled pool");
    require(cfg.subset_size <= pool.rows(), ErrorCode::SubsetTooLarge,
            "subset size " + std::to_string(cfg.subset_size) + " exceeds the pool of " + std::to_string(pool.rows()));
    const PoolView view{&pool, prepared.predictions, prepared.class_of_interest, cfg.threshold};
    const GroundTruthOracle oracle(pool.labels());

    const std::size_t R = cfg.replications;
    const std::size_t M = cfg.searches.size();
    // traces[r] stays empty for a skipped replication
    std::vector<std::vector<SearchTrace>> traces(R);
    std::vector<std::exception_ptr> errors(R);
    const auto n = static_cast<std::ptrdiff_t>(R);

#pragma omp parallel for num_threads(kernels::resolve_workers(workers)) schedule(dynamic, 1)
    for (std::ptrdiff_t ri = 0; ri < n; ++ri) {
        const auto r = static_cast<std::size_t>(ri);
        try {
            const auto subset = sample_indices(pool.rows(), cfg.subset_size, cfg.seed + r + 1);
            const auto candidates = eligible_indices(view, std::span<const std::size_t>(subset));
            if (candidates.size() < cfg.budget) {
                continue;
            }
            for (std::size_t m = 0; m < M; ++m) {
                const auto method = cfg.searches[m];
                auto strategy = make_strategy(method, candidates, view, prepared.gad,
                                              stream_seed(cfg.seed, {0x5501, r, static_cast<std::uint64_t>(method)}));
                traces[r].push_back(run_search(*strategy, candidates.size(), view, oracle, cfg.budget));
            }
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    BenchReport report;
    report.budget = cfg.budget;
    report.pool_size = pool.rows();
    report.eligible_pool = prepared.eligible.size();
    report.class_of_interest = prepared.class_of_interest;
    report.extraction = prepared.pseudo.report;
    report.fingerprints = prepared.fingerprints;
    report.pool_accuracy = accuracy(prepared.predictions, pool.labels());
    report.reliability = reliability(prepared.predictions, pool.labels(), cfg.reliability_bin_width, cfg.threshold,
                                     prepared.class_of_interest);
    for (const auto& a : prepared.attacks) {
        report.flipped += a.flipped ? 1 : 0;
    }
    for (const auto& t : traces) {
        (t.empty() ? report.skipped : report.replications) += 1;
    }
    if (report.replications == 0) {
        fail(ErrorCode::InsufficientEligiblePool,
             "every replication had fewer than " + std::to_string(cfg.budget) + " eligible instances");
    }

    const std::size_t B = cfg.budget;
    for (std::size_t m = 0; m < M; ++m) {
        SearchSummary s;
        s.method = cfg.searches[m];
        std::vector<std::vector<double>> sdr_at(B);
        std::vector<std::vector<double>> errors_at(B);
        std::vector<double> confidences;
        for (std::size_t r = 0; r < R; ++r) {
            if (traces[r].empty()) {
                continue;
            }
            const auto& trace = traces[r][m];
            std::size_t found = 0;
            for (std::size_t k = 0; k < B; ++k) {
                const auto& step = trace.steps()[k];
                found += step.is_error ? 1 : 0;
                sdr_at[k].push_back(step.sdr);
                errors_at[k].push_back(static_cast<double>(found));
                confidences.push_back(step.confidence);
            }
            s.traces.push_back(trace);
        }
        for (std::size_t k = 0; k < B; ++k) {
            s.mean_sdr.push_back(mean_of(sdr_at[k]));
            s.sdr_stderr.push_back(stderr_of(sdr_at[k], s.mean_sdr.back()));
            s.mean_errors.push_back(mean_of(errors_at[k]));
            s.errors_stderr.push_back(stderr_of(errors_at[k], s.mean_errors.back()));
        }
        s.queried_confidence = quartiles(std::move(confidences));
        report.searches.push_back(std::move(s));
    }
    return report;
}

BenchReport run_experiment(const ExperimentConfig& cfg, int workers) {
    return run_replications(cfg, prepare_pool(cfg, workers), workers);
}

void to_json(json& j, const BenchReport& report) {
    json searches = json::array();
    for (const auto& s : report.searches) {
        const auto& q = s.queried_confidence;
        searches.push_back({{"method", search_method_name(s.method)},
                            {"mean_sdr", s.mean_sdr},
                            {"sdr_stderr", s.sdr_stderr},
                            {"mean_errors", s.mean_errors},
                            {"errors_stderr", s.errors_stderr},
                            {"final_mean_sdr", s.mean_sdr.empty() ? json(nullptr) : json(s.mean_sdr.back())},
                            {"queried_confidence",
                             {{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}}}});
    }
    json bins = json::array();
    for (const auto& b : report.reliability.bins) {
        bins.push_back({{"lower", b.lower},
                        {"upper", b.upper},
                        {"count", b.count},
                        {"observed", b.observed},
                        {"expected", b.expected},
                        {"gap", b.gap}});
    }
    json extraction;
    to_json(extraction, report.extraction);
    const auto& f = report.fingerprints;
    j = json{{"replications", report.replications},
             {"skipped", report.skipped},
             {"budget", report.budget},
             {"pool_size", report.pool_size},
             {"eligible_pool", report.eligible_pool},
             {"flipped", report.flipped},
             {"class_of_interest", report.class_of_interest},
             {"pool_accuracy", report.pool_accuracy},
             {"extraction", extraction},
             {"reliability", {{"bins", bins}, {"ece", report.reliability.ece()}}},
             {"fingerprints",
              {{"dataset", hex(f.dataset)},
               {"classifier", hex(f.classifier)},
               {"pseudo_model", hex(f.pseudo_model)},
               {"attacks", hex(f.attacks)},
               {"gad", hex(f.gad)}}},
             {"searches", searches}};
}

namespace {

std::string curve_csv(const BenchReport& report, bool errors) {
    std::string out = "step";
    for (const auto& s : report.searches) {
        const std::string name = search_method_name(s.method);
        out += ',' + name + "_mean," + name + "_se";
    }
    out += '\n';
    for (std::size_t k = 0; k < report.budget; ++k) {
        out += std::to_string(k + 1);
        for (const auto& s : report.searches) {
            out += ',' + textio::format_double(errors ? s.mean_errors[k] : s.mean_sdr[k]);
            out += ',' + textio::format_double(errors ? s.errors_stderr[k] : s.sdr_stderr[k]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace

std::string sdr_curve_csv(const BenchReport& report) {
    return curve_csv(report, false);
}

std::string errors_curve_csv(const BenchReport& report) {
    return curve_csv(report, true);
}

std::string confidences_csv(const BenchReport& report) {
    std::string out = "method,min,q1,median,q3,max\n";
    for (const auto& s : report.searches) {
        const auto& q = s.queried_confidence;
        out += std::string(search_method_name(s.method)) + ',' + textio::format_double(q.min) + ',' +
               textio::format_double(q.q1) + ',' + textio::format_double(q.median) + ',' +
               textio::format_double(q.q3) + ',' + textio::format_double(q.max) + '\n';
    }
    return out;
}

void write_report(const BenchReport& report, const std::filesystem::path& dir) {
    json j;
    to_json(j, report);
    textio::write_file(dir / "report.json", j.dump(2) + "\n");
    textio::write_file(dir / "sdr_curve.csv", sdr_curve_csv(report));
    textio::write_file(dir / "errors_curve.csv", errors_curve_csv(report));
    textio::write_file(dir / "confidences.csv", confidences_csv(report));
    textio::write_file(dir / "reliability.csv", reliability_to_csv(report.reliability));
}

}  // namespace advdist
