#include "advdist/cli.hpp"

#include "advdist/attack.hpp"
#include "advdist/bench.hpp"
#include "advdist/classifier.hpp"
#include "advdist/error.hpp"
#include "advdist/external_classifier.hpp"
#include "advdist/extraction.hpp"
#include "advdist/gad.hpp"
#include "advdist/kernels.hpp"
#include "advdist/search.hpp"
#include "advdist/session.hpp"
#include "advdist/synthetic.hpp"
#include "advdist/textio.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>

namespace advdist {

namespace {

struct Common {
    bool json_errors = false;
    int workers = 0;
    std::uint64_t seed = 1;
};

/// Destination of a data output: a file path or `-` for the data stream.
class Sink {
  public:
    Sink(std::ostream& out) : out_(out) {}
    void write(const std::string& target, const std::string& text) const {
        if (target == "-") {
            out_ << text;
            out_.flush();
        } else {
            textio::write_file(target, text);
        }
    }

  private:
    std::ostream& out_;
};

/// Reads a file, or the whole input stream for `-`.
std::string slurp(const std::string& source) {
    if (source == "-") {
        return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    }
    return textio::read_file(source);
}

struct ModelArgs {
    std::string model;
    std::string external;
    std::size_t num_classes = 2;
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
    auto* model = cmd->add_option("--model", m.model, "Classifier JSON written by `train`");
    auto* external = cmd->add_option("--external", m.external,
                                     "Command line of an external classifier speaking the predict protocol");
    model->excludes(external);
    cmd->add_option("--num-classes", m.num_classes, "Class count of the external classifier")
        ->capture_default_str();
}

std::shared_ptr<const Classifier> open_model(const ModelArgs& m, std::size_t num_features) {
    if (!m.model.empty()) {
        return std::make_shared<FeedForwardClassifier>(load_classifier(m.model));
    }
    require(!m.external.empty(), ErrorCode::InvalidArgument, "one of --model or --external is required");
    std::vector<std::string> argv;
    for (auto& part : textio::split(m.external, ' ')) {
        if (!part.empty()) {
            argv.push_back(part);
        }
    }
    return std::make_shared<ExternalClassifier>(argv, m.num_classes, num_features);
}

std::vector<std::string> class_table(const Classifier& m, const Dataset& d) {
    if (d.has_labels()) {
        return d.class_names();
    }
    if (const auto* ff = dynamic_cast<const FeedForwardClassifier*>(&m); ff && !ff->class_names().empty()) {
        return ff->class_names();
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < m.num_classes(); ++c) {
        names.push_back(std::to_string(c));
    }
    return names;
}

std::optional<std::string> label_column_opt(const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

std::vector<std::size_t> parse_widths(const std::string& text) {
    std::vector<std::size_t> out;
    if (textio::trim(text).empty()) {
        return out;
    }
    for (const auto& part : textio::split(text, ',')) {
        const auto v = textio::parse_int(part);
        require(v && *v > 0, ErrorCode::InvalidArgument, "bad layer width '" + part + "'");
        out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
}

std::string predictions_csv(const std::vector<Prediction>& preds) {
    std::string out = "index,label,confidence\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out += std::to_string(i) + ',' + std::to_string(preds[i].label) + ',' +
               textio::format_double(preds[i].confidence) + '\n';
    }
    return out;
}

std::vector<Prediction> predictions_from_csv(const std::string& text) {
    const auto rows = textio::lines(text);
    require(!rows.empty() && textio::trim(rows.front()) == "index,label,confidence", ErrorCode::ParseError,
            "predictions need the header index,label,confidence");
    std::vector<Prediction> out;
    for (std::size_t li = 1; li < rows.size(); ++li) {
        if (textio::trim(rows[li]).empty()) {
            continue;
        }
        const auto cells = textio::split(rows[li], ',');
        if (cells.size() != 3) {
            fail(ErrorCode::RaggedRow, "prediction row " + std::to_string(li) + " does not have 3 cells");
        }
        const auto index = textio::parse_int(cells[0]);
        const auto label = textio::parse_int(cells[1]);
        const auto conf = textio::parse_double(cells[2]);
        if (!index || *index != static_cast<long long>(out.size())) throw ParseError(li, "index", cells[0]);
        if (!label || *label < 0) throw ParseError(li, "label", cells[1]);
        if (!conf) throw ParseError(li, "confidence", cells[2]);
        out.push_back(Prediction{static_cast<ClassId>(*label), *conf});
    }
    return out;
}

std::string truth_csv(const Dataset& d) {
    std::string out = "index,label\n";
    for (std::size_t i = 0; i < d.rows(); ++i) {
        out += std::to_string(i) + ',' + std::to_string(d.label(i)) + '\n';
    }
    return out;
}

std::vector<ClassId> truth_from_csv(const std::string& text) {
    const auto rows = textio::lines(text);
    require(!rows.empty() && textio::trim(rows.front()) == "index,label", ErrorCode::ParseError,
            "oracle labels need the header index,label");
    std::map<std::size_t, ClassId> by_index;
    for (std::size_t li = 1; li < rows.size(); ++li) {
        if (textio::trim(rows[li]).empty()) {
            continue;
        }
        const auto cells = textio::split(rows[li], ',');
        if (cells.size() != 2) {
            fail(ErrorCode::RaggedRow, "oracle row " + std::to_string(li) + " does not have 2 cells");
        }
        const auto index = textio::parse_int(cells[0]);
        const auto label = textio::parse_int(cells[1]);
        if (!index || *index < 0) throw ParseError(li, "index", cells[0]);
        if (!label || *label < 0) throw ParseError(li, "label", cells[1]);
        by_index[static_cast<std::size_t>(*index)] = static_cast<ClassId>(*label);
    }
    std::vector<ClassId> out(by_index.empty() ? 0 : by_index.rbegin()->first + 1, -1);
    for (const auto& [i, y] : by_index) {
        out[i] = y;
    }
    return out;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Search for high-confidence classifier errors with generalized adversarial distance", "advdist"};
    app.require_subcommand(1);
    Common common;
    app.add_flag("--json-errors", common.json_errors, "Report failures as one JSON object on stderr");
    app.add_option("--workers", common.workers, "Worker threads (0 = all available); outputs do not depend on it")
        ->capture_default_str();
    app.add_option("--seed", common.seed, "Master seed")->capture_default_str();
    app.fallthrough();
    const Sink sink(out);

    // synth
    std::string synth_kind = "overconfident";
    std::size_t synth_rows = 8000;
    double synth_keep = 0.0;
    std::string synth_dir;
    auto* synth = app.add_subcommand("synth", "Write a synthetic train/test scenario (train.csv, test.csv, truth.csv)");
    synth->add_option("--kind", synth_kind, "overconfident | calibrated")
        ->check(CLI::IsMember({"overconfident", "calibrated"}))
        ->capture_default_str();
    synth->add_option("--rows", synth_rows, "Rows before the train/test split")->capture_default_str();
    synth->add_option("--keep-fraction", synth_keep, "Share of censored training rows kept (overconfident only)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    synth->add_option("--out", synth_dir, "Output directory")->required();

    // train
    std::string train_data;
    std::string train_label = "label";
    std::string train_type = "mlp";
    std::string train_hidden = "16,16";
    std::size_t train_epochs = 300;
    double train_lr = 0.5;
    std::string train_out = "-";
    auto* train = app.add_subcommand("train", "Train a built-in classifier on a labelled CSV");
    train->add_option("--data", train_data, "Training CSV")->required();
    train->add_option("--label-column", train_label, "Label column")->capture_default_str();
    train->add_option("--type", train_type, "mlp | logistic")
        ->check(CLI::IsMember({"mlp", "logistic"}))
        ->capture_default_str();
    train->add_option("--hidden", train_hidden, "Comma-separated hidden widths (mlp)")->capture_default_str();
    train->add_option("--epochs", train_epochs, "Full-batch epochs")->capture_default_str();
    train->add_option("--lr", train_lr, "Learning rate")->capture_default_str();
    train->add_option("--out", train_out, "Model JSON, or - for stdout")->capture_default_str();

    // predict
    ModelArgs predict_model;
    std::string predict_data;
    std::string predict_label;
    std::string predict_out = "-";
    std::string predict_truth;
    auto* predict = app.add_subcommand("predict", "Predict every pool row (index,label,confidence)");
    add_model_options(predict, predict_model);
    predict->add_option("--data", predict_data, "Pool CSV")->required();
    predict->add_option("--label-column", predict_label, "Label column to drop from the features");
    predict->add_option("--out", predict_out, "Predictions CSV, or - for stdout")->capture_default_str();
    predict->add_option("--truth-out", predict_truth, "Also write the pool labels as index,label");

    // extract
    ModelArgs extract_model;
    std::string extract_data;
    std::string extract_label;
    std::string extract_coi = "1";
    std::string extract_design = "lhs";
    ExtractionOptions extraction;
    std::string extract_hidden = "64,64,64,64";
    std::string extract_optimizer = "sgd";
    std::string extract_out = "-";
    auto* extract = app.add_subcommand("extract", "Fit a pseudo model of the classifier's class-of-interest confidence");
    add_model_options(extract, extract_model);
    extract->add_option("--data", extract_data, "Domain CSV (pool)")->required();
    extract->add_option("--label-column", extract_label, "Label column to drop from the features");
    extract->add_option("--class-of-interest", extract_coi, "Class name or id")->capture_default_str();
    extract->add_option("--design", extract_design, "lhs | dataset")
        ->check(CLI::IsMember({"lhs", "dataset"}))
        ->capture_default_str();
    extract->add_option("--design-size", extraction.design_size, "Design points")->capture_default_str();
    extract->add_option("--hidden", extract_hidden, "Comma-separated hidden widths")->capture_default_str();
    extract->add_option("--epochs", extraction.epochs, "Training epochs")->capture_default_str();
    extract->add_option("--lr", extraction.learning_rate, "Learning rate")->capture_default_str();
    extract->add_option("--batch-size", extraction.batch_size, "Mini-batch size")->capture_default_str();
    extract->add_option("--optimizer", extract_optimizer, "sgd | adam")
        ->check(CLI::IsMember({"sgd", "adam"}))
        ->capture_default_str();
    extract->add_option("--holdout", extraction.holdout_fraction, "Held-out share for R^2")->capture_default_str();
    extract->add_option("--out", extract_out, "Pseudo model JSON, or - for stdout")->capture_default_str();

    // attack
    ModelArgs attack_model;
    std::string attack_data;
    std::string attack_label;
    std::string attack_pseudo;
    std::string attack_coi = "1";
    double attack_threshold = kEligibilityThreshold;
    bool attack_all_rows = false;
    std::optional<double> attack_epsilon;
    AttackConfig attack_cfg;
    std::string attack_target = "predicted_class";
    bool attack_clip = false;
    std::string attack_out = "-";
    auto* attack_cmd = app.add_subcommand("attack", "Run the adversarial attack over the eligible pool rows");
    add_model_options(attack_cmd, attack_model);
    attack_cmd->add_option("--data", attack_data, "Pool CSV")->required();
    attack_cmd->add_option("--label-column", attack_label, "Label column to drop from the features");
    attack_cmd->add_option("--pseudo", attack_pseudo, "Pseudo model JSON from `extract`")->required();
    attack_cmd->add_option("--class-of-interest", attack_coi, "Class name or id")->capture_default_str();
    attack_cmd->add_option("--threshold", attack_threshold, "Eligibility confidence threshold (strict)")
        ->capture_default_str();
    attack_cmd->add_flag("--all", attack_all_rows, "Attack every row, not only eligible ones");
    attack_cmd->add_option("--epsilon", attack_epsilon, "Step size (default: 1% of the mean column range)");
    attack_cmd->add_option("--max-iters", attack_cfg.max_iters, "Iteration budget per instance")->capture_default_str();
    attack_cmd->add_option("--target", attack_target, "predicted_class | literal | tracking")
        ->check(CLI::IsMember({"predicted_class", "literal", "tracking"}))
        ->capture_default_str();
    attack_cmd->add_flag("--clip", attack_clip, "Clip adversaries to the pool's feature ranges");
    attack_cmd->add_option("--out", attack_out, "Attacks CSV, or - for stdout")->capture_default_str();

    // score
    std::string score_pool_path;
    std::string score_label;
    std::string score_preds;
    std::string score_attacks;
    std::string score_scale = "raw";
    double score_span = 0.75;
    std::string score_out = "-";
    auto* score = app.add_subcommand("score", "Compute GAD scores from a pool, its predictions and attacks");
    score->add_option("--pool", score_pool_path, "Pool CSV")->required();
    score->add_option("--label-column", score_label, "Label column to drop from the features");
    score->add_option("--preds", score_preds, "Predictions CSV from `predict`")->required();
    score->add_option("--attacks", score_attacks, "Attacks CSV from `attack` (- for stdin)")->required();
    score->add_option("--scale", score_scale, "raw | log")->check(CLI::IsMember({"raw", "log"}))->capture_default_str();
    score->add_option("--span", score_span, "LOESS span in (0, 1]")->capture_default_str();
    score->add_option("--out", score_out, "GAD CSV, or - for stdout")->capture_default_str();

    // search
    std::string search_method = "gad";
    std::size_t search_budget = 50;
    std::string search_gad;
    std::string search_preds;
    std::string search_pool;
    std::string search_label;
    std::string search_truth;
    std::string search_coi = "1";
    double search_threshold = kEligibilityThreshold;
    std::string search_out = "-";
    auto* search = app.add_subcommand("search", "Run a query search against a simulated oracle");
    search->add_option("--method", search_method, "gad | random | least_confidence | metamodel")
        ->check(CLI::IsMember({"gad", "random", "least_confidence", "metamodel"}))
        ->capture_default_str();
    search->add_option("--budget", search_budget, "Queries to issue")->capture_default_str();
    search->add_option("--gad", search_gad, "GAD CSV from `score` (- for stdin); required for gad");
    search->add_option("--preds", search_preds,
                       "Predictions CSV; without it the GAD rows are the candidates, predicted as the class of interest");
    search->add_option("--pool", search_pool, "Pool CSV (metamodel features)");
    search->add_option("--label-column", search_label, "Label column to drop from the pool features");
    search->add_option("--oracle-labels", search_truth, "Ground truth as index,label")->required();
    search->add_option("--class-of-interest", search_coi, "Class id")->capture_default_str();
    search->add_option("--threshold", search_threshold, "Eligibility confidence threshold (strict)")
        ->capture_default_str();
    search->add_option("--out", search_out, "Trace JSON lines, or - for stdout")->capture_default_str();

    // bench
    std::string bench_config;
    std::string bench_out = env_or("GAD_OUTPUT_DIR", "");
    auto* bench = app.add_subcommand("bench", "Run the replicated search comparison from a JSON config");
    bench->add_option("--config", bench_config, "Experiment config JSON")->required();
    bench->add_option("--out", bench_out, "Output directory (env GAD_OUTPUT_DIR)");

    // serve
    std::string serve_dir = env_or("GAD_DATA_DIR", "data");
    int serve_port = std::atoi(env_or("GAD_PORT", "8080").c_str());
    std::string serve_host = "0.0.0.0";
    std::string serve_static = env_or("GAD_STATIC_DIR", "");
    auto* serve_cmd = app.add_subcommand("serve", "Start the labelling session service");
    serve_cmd->add_option("--data-dir", serve_dir, "Data directory (env GAD_DATA_DIR)")->capture_default_str();
    serve_cmd->add_option("--port", serve_port, "TCP port (env GAD_PORT)")->capture_default_str();
    serve_cmd->add_option("--host", serve_host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--static-dir", serve_static, "UI bundle served at / (env GAD_STATIC_DIR)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        // subcommand help requests land here too
        if (e.get_exit_code() == 0) {
            out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
            return 0;
        }
        if (common.json_errors) {
            err << nlohmann::json{{"error", "UsageError"}, {"message", e.what()}}.dump() << '\n';
        } else {
            err << "advdist: " << e.what() << "\n" << "Run with --help for usage.\n";
        }
        return kExitUsage;
    }

    try {
        const int workers = common.workers;
        const std::uint64_t seed = common.seed;
        if (*synth) {
            const auto scenario = synth_kind == "overconfident" ? synth_overconfident(synth_rows, seed, synth_keep)
                                                                : synth_calibrated(synth_rows, seed);
            const std::filesystem::path dir(synth_dir);
            save_csv(scenario.train, dir / "train.csv");
            save_csv(scenario.test, dir / "test.csv");
            textio::write_file(dir / "truth.csv", truth_csv(scenario.test));
        } else if (*train) {
            const Dataset d = load_csv(train_data, train_label);
            const auto model = train_type == "logistic"
                                   ? train_logistic(d, train_epochs, train_lr, seed)
                                   : train_mlp(d, parse_widths(train_hidden), train_epochs, train_lr, seed);
            err << "training accuracy " << textio::format_double(accuracy(predict_all(model, d), d.labels()))
                << '\n';
            sink.write(train_out, nlohmann::json(model).dump(2) + "\n");
        } else if (*predict) {
            const Dataset d = load_csv(predict_data, label_column_opt(predict_label));
            const auto model = open_model(predict_model, d.cols());
            sink.write(predict_out, predictions_csv(kernels::predict_batch(*model, d, workers)));
            if (!predict_truth.empty()) {
                sink.write(predict_truth, truth_csv(d));
            }
        } else if (*extract) {
            const Dataset d = load_csv(extract_data, label_column_opt(extract_label));
            const auto model = open_model(extract_model, d.cols());
            extraction.design_source = parse_design_source(extract_design);
            extraction.hidden_widths = parse_widths(extract_hidden);
            extraction.optimizer = parse_optimizer(extract_optimizer);
            extraction.seed = seed;
            extraction.workers = workers;
            const ClassId coi = resolve_class(extract_coi, class_table(*model, d));
            const auto pseudo = extract_pseudo_model(*model, d, coi, extraction);
            err << "pseudo model R^2 " << textio::format_double(pseudo.report.r_squared) << '\n';
            nlohmann::json doc = pseudo.net;
            doc["report"] = pseudo.report;
            sink.write(extract_out, doc.dump(2) + "\n");
        } else if (*attack_cmd) {
            const Dataset d = load_csv(attack_data, label_column_opt(attack_label));
            const auto model = open_model(attack_model, d.cols());
            const auto pseudo = load_pseudo_model(attack_pseudo);
            const auto ranges = feature_ranges(d);
            attack_cfg.epsilon = attack_epsilon ? *attack_epsilon : default_epsilon(ranges);
            attack_cfg.target = parse_attack_target(attack_target);
            if (attack_clip) {
                attack_cfg.clip_to_ranges = ranges;
            }
            std::vector<std::size_t> rows;
            if (attack_all_rows) {
                for (std::size_t i = 0; i < d.rows(); ++i) {
                    rows.push_back(i);
                }
            } else {
                const auto preds = kernels::predict_batch(*model, d, workers);
                const ClassId coi = resolve_class(attack_coi, class_table(*model, d));
                rows = eligible_indices(PoolView{&d, preds, coi, attack_threshold});
            }
            const auto results = kernels::attack_batch(*model, pseudo.net, d.select(rows), attack_cfg, workers);
            std::size_t flipped = 0;
            for (const auto& r : results) {
                flipped += r.flipped ? 1 : 0;
            }
            err << "flipped " << flipped << " of " << results.size() << '\n';
            sink.write(attack_out, attacks_to_csv(results, rows, d.feature_names()));
        } else if (*score) {
            const Dataset d = load_csv(score_pool_path, label_column_opt(score_label));
            const auto preds = predictions_from_csv(slurp(score_preds));
            require(preds.size() == d.rows(), ErrorCode::DimensionMismatch, "predictions do not cover the pool");
            const auto attacks = attacks_from_csv(slurp(score_attacks));
            std::vector<GadRecord> records;
            for (std::size_t k = 0; k < attacks.indices.size(); ++k) {
                const std::size_t i = attacks.indices[k];
                require(i < d.rows(), ErrorCode::DimensionMismatch, "attack index outside the pool");
                GadRecord r;
                r.index = i;
                r.confidence = preds[i].confidence;
                r.mae = mae(d.row(i), attacks.results[k].x_adv);
                r.flipped = attacks.results[k].flipped;
                records.push_back(r);
            }
            const auto fit = fit_gad(std::move(records), GadOptions{score_span, parse_response_scale(score_scale)});
            sink.write(score_out, gad_records_to_csv(fit.records));
        } else if (*search) {
            const auto method = parse_search_method(search_method);
            const auto truth = truth_from_csv(slurp(search_truth));
            std::vector<GadRecord> records;
            if (!search_gad.empty()) {
                records = gad_records_from_csv(slurp(search_gad));
            }
            require(method != SearchMethod::Gad || !search_gad.empty(), ErrorCode::InvalidArgument,
                    "--method gad needs --gad");
            const auto coi_id = textio::parse_int(search_coi);
            require(coi_id && *coi_id >= 0, ErrorCode::InvalidArgument, "--class-of-interest must be a class id");
            const auto coi = static_cast<ClassId>(*coi_id);
            std::vector<Prediction> preds;
            if (!search_preds.empty()) {
                preds = predictions_from_csv(slurp(search_preds));
            } else {
                require(!records.empty(), ErrorCode::InvalidArgument, "--preds is required without --gad");
                std::size_t n = 0;
                for (const auto& r : records) {
                    n = std::max(n, r.index + 1);
                }
                preds.assign(n, Prediction{-1, 0.0});
                for (const auto& r : records) {
                    preds[r.index] = Prediction{coi, r.confidence};
                }
            }
            std::optional<Dataset> pool;
            if (!search_pool.empty()) {
                pool = load_csv(search_pool, label_column_opt(search_label));
                require(pool->rows() == preds.size(), ErrorCode::DimensionMismatch, "pool and predictions differ");
            }
            require(method != SearchMethod::Metamodel || pool, ErrorCode::InvalidArgument,
                    "--method metamodel needs --pool");
            require(truth.size() >= preds.size(), ErrorCode::DimensionMismatch, "oracle labels do not cover the pool");
            const PoolView view{pool ? &*pool : nullptr, preds, coi, search_threshold};
            const GroundTruthOracle oracle(truth);
            auto candidates = eligible_indices(view);
            const std::size_t count = candidates.size();
            auto strategy = make_strategy(method, std::move(candidates), view, records, seed);
            const auto trace = run_search(*strategy, count, view, oracle, search_budget);
            err << "errors found " << trace.errors_found() << " of " << trace.size() << ", sdr "
                << textio::format_double(trace.current_sdr()) << '\n';
            sink.write(search_out, trace_to_jsonl(trace));
        } else if (*bench) {
            require(!bench_out.empty(), ErrorCode::InvalidArgument, "bench needs --out or GAD_OUTPUT_DIR");
            auto cfg = load_experiment_config(bench_config);
            const auto report = run_experiment(cfg, workers);
            write_report(report, bench_out);
            for (const auto& s : report.searches) {
                err << search_method_name(s.method) << " mean SDR at B=" << report.budget << ": "
                    << textio::format_double(s.mean_sdr.back()) << '\n';
            }
        } else if (*serve_cmd) {
            SessionManager manager(serve_dir, workers);
            const auto restored = manager.restore();
            ServerOptions options;
            options.host = serve_host;
            options.port = serve_port;
            if (!serve_static.empty()) {
                options.static_dir = serve_static;
            }
            err << "restored " << restored << " session(s); listening on " << serve_host << ':' << serve_port
                << std::endl;
            serve(manager, options);
        }
    } catch (const Error& e) {
        if (common.json_errors) {
            err << nlohmann::json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump() << '\n';
        } else {
            err << "advdist: " << error_code_name(e.code()) << ": " << e.what() << '\n';
        }
        return kExitFailure;
    } catch (const std::exception& e) {
        if (common.json_errors) {
            err << nlohmann::json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
        } else {
            err << "advdist: " << e.what() << '\n';
        }
        return kExitFailure;
    }
    return 0;
}

}  // namespace advdist
