#include "advdist/session.hpp"

#include "advdist/error.hpp"
#include "advdist/kernels.hpp"
#include "advdist/textio.hpp"

#include <httplib.h>

#include <cmath>
#include <fstream>
#include <random>

namespace advdist {

namespace {

using nlohmann::json;

json sdr_value(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

bool safe_name(const std::string& s) {
    if (s.empty() || s.size() > 128 || s.front() == '.') {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return 404;
        default: return 400;
    }
}

const char* status_name(int status) {
    switch (status) {
        case 400: return "bad_request";
        case 404: return "not_found";
        case 409: return "conflict";
        case 410: return "gone";
        case 422: return "unprocessable_label";
        default: return "internal_error";
    }
}

}  // namespace

json error_body(int status, const std::string& message) {
    return json{{"error", status_name(status)}, {"message", message}};
}

Session::Session(std::string id, json config, PreparedPool pool, SearchMethod method, std::size_t budget,
                 std::uint64_t seed, std::filesystem::path dir)
    : id_(std::move(id)),
      config_(std::move(config)),
      prepared_(std::move(pool)),
      trace_(budget),
      trace_path_(dir / (id_ + ".jsonl")) {
    for (const auto& r : prepared_.gad) {
        gad_by_index_[r.index] = r.gad;
    }
    candidate_count_ = prepared_.eligible.size();
    if (budget > candidate_count_) {
        throw HttpError(400, "budget " + std::to_string(budget) + " exceeds the " + std::to_string(candidate_count_) +
                                 " eligible instances");
    }
    const PoolView view{&prepared_.pool, prepared_.predictions, prepared_.class_of_interest,
                        config_.value("threshold", kEligibilityThreshold)};
    strategy_ = make_strategy(method, prepared_.eligible, view, prepared_.gad, seed);
}

std::optional<std::size_t> Session::advance_locked() {
    if (!pending_ && trace_.size() < trace_.budget()) {
        pending_ = strategy_->next(trace_);
    }
    return pending_;
}

json Session::next() {
    std::lock_guard lock(mutex_);
    if (trace_.size() >= trace_.budget()) {
        throw HttpError(410, "labelling budget exhausted");
    }
    const auto q = advance_locked();
    if (!q) {
        throw HttpError(410, "every eligible instance has been labelled");
    }
    const auto& p = prepared_.predictions[*q];
    const auto features = prepared_.pool.row(*q);
    const auto g = gad_by_index_.find(*q);
    return json{{"index", *q},
                {"features", std::vector<double>(features.begin(), features.end())},
                {"feature_names", prepared_.pool.feature_names()},
                {"predicted_label", p.label},
                {"confidence", p.confidence},
                {"gad", g == gad_by_index_.end() ? json(nullptr) : sdr_value(g->second)},
                {"step", trace_.size() + 1},
                {"budget", trace_.budget()},
                {"class_names", config_.at("class_names")}};
}

ClassId Session::parse_label(const json& label) const {
    const auto& names = config_.at("class_names");
    if (label.is_number_integer()) {
        const auto id = label.get<long long>();
        if (id >= 0 && static_cast<std::size_t>(id) < names.size()) {
            return static_cast<ClassId>(id);
        }
    } else if (label.is_string()) {
        const auto s = label.get<std::string>();
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (names[c] == s) {
                return static_cast<ClassId>(c);
            }
        }
    }
    throw HttpError(422, "unknown label " + label.dump());
}

json Session::label(std::size_t index, const json& label) {
    std::lock_guard lock(mutex_);
    if (trace_.size() >= trace_.budget()) {
        throw HttpError(410, "labelling budget exhausted");
    }
    if (!pending_ || *pending_ != index) {
        throw HttpError(409, "instance " + std::to_string(index) + " is not the current query");
    }
    const ClassId y = parse_label(label);
    const auto& p = prepared_.predictions[index];
    const auto& step = trace_.record(index, p.confidence, p.label, y);
    pending_.reset();
    std::ofstream out(trace_path_, std::ios::app);
    out << step_to_json_line(step, trace_.size()) << '\n';
    out.flush();
    if (!out) {
        throw HttpError(500, "cannot persist the trace");
    }
    return metrics_locked();
}

json Session::metrics_locked() const {
    return json{{"step", trace_.size()},
                {"budget", trace_.budget()},
                {"errors_found", trace_.errors_found()},
                {"sdr", sdr_value(trace_.current_sdr())},
                {"sdr_curve", [&] {
                     json curve = json::array();
                     for (double v : trace_.sdr_curve()) {
                         curve.push_back(sdr_value(v));
                     }
                     return curve;
                 }()},
                {"status", trace_.size() >= trace_.budget() ? "exhausted" : "active"}};
}

json Session::metrics() const {
    std::lock_guard lock(mutex_);
    return metrics_locked();
}

std::string Session::trace_jsonl() const {
    std::lock_guard lock(mutex_);
    return trace_to_jsonl(trace_);
}

SearchTrace Session::trace() const {
    std::lock_guard lock(mutex_);
    return trace_;
}

void Session::replay(std::string_view jsonl) {
    const SearchTrace saved = trace_from_jsonl(jsonl, trace_.budget());
    std::lock_guard lock(mutex_);
    for (const auto& step : saved.steps()) {
        const auto q = advance_locked();
        require(q && *q == step.index, ErrorCode::ParseError,
                "persisted trace of session " + id_ + " diverges from its query order");
        const auto& p = prepared_.predictions[step.index];
        trace_.record(step.index, p.confidence, p.label, step.label);
        pending_.reset();
    }
}

SessionManager::SessionManager(std::filesystem::path data_dir, int workers)
    : data_dir_(std::move(data_dir)), workers_(workers) {
    std::filesystem::create_directories(data_dir_ / "sessions");
}

std::string SessionManager::fresh_id() const {
    std::random_device rd;
    for (;;) {
        const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
        std::string id(buf);
        if (!sessions_.contains(id) && !std::filesystem::exists(data_dir_ / "sessions" / (id + ".json"))) {
            return id;
        }
    }
}

std::shared_ptr<Session> SessionManager::build(const std::string& id, const json& request,
                                               const std::vector<GadRecord>* cached_gad) {
    if (!request.is_object()) {
        throw HttpError(400, "session config must be a JSON object");
    }
    for (const auto& [key, value] : request.items()) {
        static const char* known[] = {"dataset", "classifier", "class_of_interest", "method", "budget", "seed",
                                      "label_column", "threshold", "extraction", "attack", "gad"};
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; })) {
            throw HttpError(400, "unknown key '" + key + "'");
        }
    }
    std::string dataset_id;
    std::string model_id;
    std::string class_of_interest = "1";
    SearchMethod method = SearchMethod::Gad;
    std::size_t budget = 50;
    std::uint64_t seed = 1;
    std::optional<std::string> label_column;
    ExperimentConfig cfg;
    try {
        dataset_id = request.at("dataset").get<std::string>();
        model_id = request.at("classifier").get<std::string>();
        if (request.contains("class_of_interest")) {
            const auto& c = request.at("class_of_interest");
            class_of_interest = c.is_string() ? c.get<std::string>() : std::to_string(c.get<long long>());
        }
        if (request.contains("method")) {
            method = parse_search_method(request.at("method").get<std::string>());
        }
        budget = request.value("budget", budget);
        seed = request.value("seed", seed);
        if (request.contains("label_column")) {
            label_column = request.at("label_column").get<std::string>();
        }
        json sub = {{"budget", budget}, {"subset_size", budget}, {"seed", seed}};
        for (const char* key : {"threshold", "extraction", "attack", "gad"}) {
            if (request.contains(key)) {
                sub[key] = request.at(key);
            }
        }
        cfg = experiment_config_from_json(sub);
    } catch (const json::exception& e) {
        throw HttpError(400, std::string("bad session config: ") + e.what());
    } catch (const Error& e) {
        throw HttpError(400, e.what());
    }
    if (!safe_name(dataset_id) || !safe_name(model_id)) {
        throw HttpError(400, "artifact ids may only contain letters, digits, '-', '_' and '.'");
    }
    const auto dataset_path = data_dir_ / "datasets" / (dataset_id + ".csv");
    const auto model_path = data_dir_ / "models" / (model_id + ".json");
    if (!std::filesystem::exists(dataset_path)) {
        throw HttpError(404, "no dataset '" + dataset_id + "'");
    }
    if (!std::filesystem::exists(model_path)) {
        throw HttpError(404, "no classifier '" + model_id + "'");
    }

    try {
        if (!label_column) {
            // a column named "label" is the ground truth unless told otherwise
            const auto text = textio::read_file(dataset_path);
            const auto header = textio::split(text.substr(0, text.find('\n')), ',');
            for (auto h : header) {
                if (!h.empty() && h.back() == '\r') {
                    h.pop_back();
                }
                if (h == "label") {
                    label_column = "label";
                }
            }
        }
        Dataset pool = load_csv(dataset_path, label_column);
        auto model = std::make_shared<FeedForwardClassifier>(load_classifier(model_path));
        std::vector<std::string> class_names = pool.has_labels() ? pool.class_names() : model->class_names();
        if (class_names.size() < model->num_classes()) {
            class_names.clear();
            for (std::size_t c = 0; c < model->num_classes(); ++c) {
                class_names.push_back(std::to_string(c));
            }
        }
        const ClassId coi = resolve_class(class_of_interest, class_names);

        PreparedPool prepared;
        if (cached_gad) {
            prepared.class_of_interest = coi;
            prepared.predictions = kernels::predict_batch(*model, pool, workers_);
            const PoolView view{&pool, prepared.predictions, coi, cfg.threshold};
            prepared.eligible = eligible_indices(view);
            prepared.gad = *cached_gad;
            prepared.classifier = model;
            prepared.pool = std::move(pool);
        } else {
            prepared = score_pool(model, std::move(pool), coi, cfg, workers_);
        }

        json config = request;
        config["session_id"] = id;
        config["class_names"] = class_names;
        config["class_of_interest_id"] = coi;
        config["threshold"] = cfg.threshold;
        return std::make_shared<Session>(id, std::move(config), std::move(prepared), method, budget, seed,
                                         data_dir_ / "sessions");
    } catch (const Error& e) {
        throw HttpError(status_for(e.code()), e.what());
    }
}

std::string SessionManager::create(const json& request) {
    std::string id;
    {
        std::shared_lock lock(registry_mutex_);
        id = fresh_id();
    }
    auto session = build(id, request, nullptr);
    const auto dir = data_dir_ / "sessions";
    // persist everything a restart needs before the session becomes visible
    textio::write_file(dir / (id + ".gad.csv"), gad_records_to_csv(session->gad_records()));
    textio::write_file(dir / (id + ".jsonl"), "");
    textio::write_file(dir / (id + ".json"), request.dump(2) + "\n");
    std::unique_lock lock(registry_mutex_);
    if (sessions_.contains(id)) {
        throw HttpError(500, "session id collision");
    }
    sessions_.emplace(id, std::move(session));
    return id;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw HttpError(404, "no session '" + id + "'");
    }
    return it->second;
}

std::vector<std::string> SessionManager::ids() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) {
        out.push_back(id);
    }
    return out;
}

std::size_t SessionManager::restore() {
    std::size_t restored = 0;
    const auto dir = data_dir_ / "sessions";
    std::vector<std::filesystem::path> configs;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto& p = entry.path();
        if (p.extension() == ".json") {
            configs.push_back(p);
        }
    }
    std::sort(configs.begin(), configs.end());
    for (const auto& p : configs) {
        const std::string id = p.stem().string();
        const json request = json::parse(textio::read_file(p));
        std::vector<GadRecord> cached;
        const auto gad_path = dir / (id + ".gad.csv");
        const bool have_gad = std::filesystem::exists(gad_path);
        if (have_gad) {
            cached = gad_records_from_csv(textio::read_file(gad_path));
        }
        auto session = build(id, request, have_gad ? &cached : nullptr);
        const auto trace_path = dir / (id + ".jsonl");
        if (std::filesystem::exists(trace_path)) {
            session->replay(textio::read_file(trace_path));
        }
        std::unique_lock lock(registry_mutex_);
        sessions_[id] = std::move(session);
        ++restored;
    }
    return restored;
}



namespace {

constexpr const char* kFallbackIndex = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>advdist</title></head>
<body><h1>advdist session service</h1>
<p>No UI bundle is installed. The JSON API lives under <code>/sessions</code>.</p></body></html>
)";

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Handler>
auto guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const HttpError& e) {
            send_json(res, e.status(), error_body(e.status(), e.what()));
        } catch (const Error& e) {
            send_json(res, 400, error_body(400, e.what()));
        } catch (const std::exception& e) {
            send_json(res, 500, error_body(500, e.what()));
        }
    };
}

nlohmann::json parse_body(const httplib::Request& req) {
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw HttpError(400, std::string("request body is not JSON: ") + e.what());
    }
}

}  // namespace

void install_routes(httplib::Server& server, SessionManager& manager, const ServerOptions& options) {
    server.Post("/sessions", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                    const auto id = manager.create(parse_body(req));
                    send_json(res, 201, {{"session_id", id}});
                }));
    server.Get(R"(/sessions/([^/]+)/next)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, manager.get(req.matches[1])->next());
               }));
    server.Post(R"(/sessions/([^/]+)/label)",
                guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                    auto session = manager.get(req.matches[1]);
                    const auto body = parse_body(req);
                    if (!body.is_object() || !body.contains("index") || !body.contains("label") ||
                        !body.at("index").is_number_unsigned()) {
                        throw HttpError(400, "expected {\"index\": <n>, \"label\": <class>}");
                    }
                    send_json(res, 200, session->label(body.at("index").get<std::size_t>(), body.at("label")));
                }));
    server.Get(R"(/sessions/([^/]+)/metrics)",
               guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, manager.get(req.matches[1])->metrics());
               }));
    server.Get(R"(/sessions/([^/]+)/trace)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                   res.status = 200;
                   res.set_content(manager.get(req.matches[1])->trace_jsonl(), "application/x-ndjson");
               }));
    server.Get("/sessions", guarded([&manager](const httplib::Request&, httplib::Response& res) {
                   send_json(res, 200, {{"sessions", manager.ids()}});
               }));
    if (options.static_dir && std::filesystem::is_directory(*options.static_dir)) {
        server.set_mount_point("/", options.static_dir->string());
    } else {
        server.Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(kFallbackIndex, "text/html");
        });
    }
}

void serve(SessionManager& manager, const ServerOptions& options) {
    httplib::Server server;
    install_routes(server, manager, options);
    if (!server.bind_to_port(options.host, options.port)) {
        fail(ErrorCode::IoError, "cannot listen on " + options.host + ":" + std::to_string(options.port));
    }
    server.listen_after_bind();
}

}  // namespace advdist
