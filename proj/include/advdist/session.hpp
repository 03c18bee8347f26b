#pragma once

#include "advdist/bench.hpp"
#include "advdist/search.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace advdist {

/// Failure carrying the HTTP status the service answers with.
class HttpError : public std::runtime_error {
  public:
    HttpError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
    [[nodiscard]] int status() const noexcept { return status_; }

  private:
    int status_;
};

/// One labelling session: a scored pool, a fixed query strategy and the
/// growing trace. Every method locks the session.
class Session {
  public:
    enum class Status { Active, Exhausted };

    /// `config` is the creation document; `records` are the pool's GAD scores.
    Session(std::string id, nlohmann::json config, PreparedPool pool, SearchMethod method, std::size_t budget,
            std::uint64_t seed, std::filesystem::path dir);

    [[nodiscard]] const std::string& id() const noexcept { return id_; }

    /// Current query; repeated calls return the same instance until it is
    /// labelled. Throws HttpError 410 once the budget is spent.
    [[nodiscard]] nlohmann::json next();
    /// Throws 409 when index is not the pending query, 422 on an unknown label.
    [[nodiscard]] nlohmann::json label(std::size_t index, const nlohmann::json& label);
    [[nodiscard]] nlohmann::json metrics() const;
    [[nodiscard]] std::string trace_jsonl() const;
    [[nodiscard]] SearchTrace trace() const;
    /// Pool scores; fixed at construction.
    [[nodiscard]] const std::vector<GadRecord>& gad_records() const noexcept { return prepared_.gad; }

    /// Re-applies a persisted trace; each line must match the strategy's choice.
    void replay(std::string_view jsonl);

  private:
    [[nodiscard]] nlohmann::json metrics_locked() const;
    [[nodiscard]] ClassId parse_label(const nlohmann::json& label) const;
    [[nodiscard]] std::optional<std::size_t> advance_locked();

    std::string id_;
    nlohmann::json config_;
    PreparedPool prepared_;
    std::unordered_map<std::size_t, double> gad_by_index_;
    std::size_t candidate_count_ = 0;
    std::unique_ptr<QueryStrategy> strategy_;
    SearchTrace trace_;
    std::optional<std::size_t> pending_;
    std::filesystem::path trace_path_;
    mutable std::mutex mutex_;
};

/// Session registry backed by a data directory:
///   datasets/<id>.csv, models/<id>.json  (inputs)
///   sessions/<sid>.json, <sid>.jsonl, <sid>.gad.csv  (state)
class SessionManager {
  public:
    explicit SessionManager(std::filesystem::path data_dir, int workers = 0);

    /// Throws HttpError 400 (bad document) or 404 (missing artifact).
    [[nodiscard]] std::string create(const nlohmann::json& request);
    /// Throws HttpError 404 for an unknown id.
    [[nodiscard]] std::shared_ptr<Session> get(const std::string& id) const;
    [[nodiscard]] std::vector<std::string> ids() const;
    /// Loads every persisted session; returns how many were restored.
    std::size_t restore();

    [[nodiscard]] const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

  private:
    [[nodiscard]] std::shared_ptr<Session> build(const std::string& id, const nlohmann::json& request,
                                                 const std::vector<GadRecord>* cached_gad);
    [[nodiscard]] std::string fresh_id() const;

    std::filesystem::path data_dir_;
    int workers_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    mutable std::shared_mutex registry_mutex_;
};

struct ServerOptions {
    std::string host = "0.0.0.0";
    int port = 8080;
    /// Directory with the UI bundle served at `/`; a placeholder page when unset.
    std::optional<std::filesystem::path> static_dir;
};

/// Registers the API routes and the static mount on `server`.
void install_routes(httplib::Server& server, SessionManager& manager, const ServerOptions& options);

/// Blocks serving HTTP until the process is stopped. Throws IoError when the
/// port cannot be bound.
void serve(SessionManager& manager, const ServerOptions& options);

/// Shared error body: {"error": <code>, "message": <text>}.
[[nodiscard]] nlohmann::json error_body(int status, const std::string& message);

}  // namespace advdist
