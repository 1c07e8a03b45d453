#pragma once

#include "fastread/active.hpp"
#include "fastread/corpus.hpp"
#include "fastread/eval.hpp"
#include "fastread/features.hpp"
#include "fastread/treatment.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

namespace httplib {
class Server;
}

namespace fastread {

class SessionError : public std::runtime_error {
public:
    enum class Kind { not_found, bad_request, exhausted };

    SessionError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct SessionStatus {
    std::size_t found = 0;
    std::size_t coded = 0;
    std::size_t total = 0;
    QueryPhase phase = QueryPhase::random;

    /// "Documents Coded: found / coded (total)"
    std::string text() const;
    bool operator==(const SessionStatus&) const = default;
};

struct SessionOptions {
    TreatmentCode treatment = TreatmentCode::fastread();
    TreatmentConfig config;
    std::size_t batch = 10;
    std::uint64_t seed = 0;
    std::size_t max_terms = kDefaultMaxTerms;
};

struct Batch {
    QueryPhase phase = QueryPhase::random;
    std::vector<std::size_t> ids;
};

/// One live review over one corpus. The directory holds the corpus
/// snapshot, the settings and an append-only label journal (one JSON line
/// per submit). Replaying the journal rebuilds the state exactly, and
/// batch selection is a pure function of that state, so a restarted
/// process serves the same batches.
class Session {
public:
    static std::unique_ptr<Session> create(const std::filesystem::path& dir, std::string id,
                                           Corpus corpus, const SessionOptions& options);
    static std::unique_ptr<Session> recover(const std::filesystem::path& dir);

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;
    ~Session();

    const std::string& id() const noexcept { return id_; }
    const Corpus& corpus() const noexcept { return corpus_; }
    const SessionOptions& options() const noexcept { return options_; }

    SessionStatus status() const;
    /// Up to options().batch uncoded studies; retrains first when due.
    Batch next_batch();
    /// Applies yes/no codes (re-coding overwrites) and journals them. The
    /// whole submit is rejected if any id or code is invalid.
    SessionStatus submit(const std::vector<std::pair<std::size_t, Code>>& labels);
    /// (coded, found) after each non-empty submit.
    std::vector<CurvePoint> curve() const;
    std::string export_csv() const;
    /// Drops every code and truncates the journal.
    SessionStatus restart();

private:
    Session(std::filesystem::path dir, std::string id, Corpus corpus, SessionOptions options);

    void apply(const std::vector<std::pair<std::size_t, Code>>& labels);
    void reset_state();
    void append_journal(const std::vector<std::pair<std::size_t, Code>>& labels);
    SessionStatus status_locked() const;

    std::filesystem::path dir_;
    std::string id_;
    Corpus corpus_;
    SessionOptions options_;
    FeatureMatrix features_;

    mutable std::mutex mutex_;
    ReviewState state_;
    std::vector<CurvePoint> curve_;
    std::size_t version_ = 0;  // bumped by every state change
    // S-codes freeze on the labels held just before stability was reached
    std::optional<ReviewState> pre_stable_;
    std::optional<LinearModel> frozen_;
    std::optional<std::pair<std::size_t, Batch>> cached_;  // (version_, batch)
};

/// All sessions under <workspace>/sessions, recovered on construction.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path workspace);

    std::string create(Corpus corpus, const SessionOptions& options);
    std::shared_ptr<Session> get(const std::string& id) const;
    std::vector<std::string> ids() const;
    const std::filesystem::path& workspace() const noexcept { return workspace_; }

    /// Problems met while recovering sessions at startup.
    std::vector<std::string> recovery_errors;

private:
    std::filesystem::path workspace_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::set<std::string> reserved_;
};

/// REST front end over a SessionStore.
///
///   POST /sessions                 create (JSON {csv|file, name, treatment, seed, batch} or text/csv)
///   GET  /sessions/{id}/batch      next batch of studies
///   POST /sessions/{id}/labels     {"labels": {"<id>": "yes"|"no", ...}}
///   GET  /sessions/{id}/status
///   GET  /sessions/{id}/curve
///   GET  /sessions/{id}/export     text/csv
///   POST /sessions/{id}/restart
///   GET  /status                   liveness
///
/// Errors are JSON {"error", "detail"}.
class ReviewServer {
public:
    explicit ReviewServer(SessionStore& store,
                          std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~ReviewServer();

    /// Binds without serving; false when the port is unavailable.
    bool bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen();
    void stop();
    int port() const noexcept { return port_; }

private:
    void install_routes();

    SessionStore& store_;
    std::unique_ptr<httplib::Server> server_;
    int port_ = -1;
};

}  // namespace fastread
