#include "fastread/service.hpp"

#include "fastread/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

namespace fastread {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kCorpusFile = "corpus.csv";
constexpr const char* kSettingsFile = "session.json";
constexpr const char* kJournalFile = "journal.jsonl";

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Writes to a temporary sibling, syncs, then renames over the target.
void write_file_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    const bool ok = std::fwrite(contents.data(), 1, contents.size(), f) == contents.size() &&
                    std::fflush(f) == 0 && ::fsync(fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw std::runtime_error("write failed for " + tmp.string());
    fs::rename(tmp, path);
}

void append_line_durable(const fs::path& path, const std::string& line) {
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (!f) throw std::runtime_error("cannot append to " + path.string());
    const std::string data = line + "\n";
    const bool ok = std::fwrite(data.data(), 1, data.size(), f) == data.size() &&
                    std::fflush(f) == 0 && ::fsync(fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw std::runtime_error("journal append failed for " + path.string());
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json settings_json(const std::string& id, const std::string& name, const SessionOptions& o) {
    return json{{"id", id},
                {"name", name},
                {"treatment", o.treatment.to_string()},
                {"seed", o.seed},
                {"batch", o.batch},
                {"max_terms", o.max_terms},
                {"t1", o.config.t1},
                {"t2", o.config.t2},
                {"target_recall", o.config.target_recall}};
}

std::vector<std::pair<std::size_t, Code>> labels_from_json(const json& j) {
    std::vector<std::pair<std::size_t, Code>> labels;
    for (const auto& entry : j.at("labels")) {
        const Code code = parse_code(entry.at(1).get<std::string>());
        if (code == Code::undetermined) throw std::runtime_error("undetermined code in journal");
        labels.emplace_back(entry.at(0).get<std::size_t>(), code);
    }
    return labels;
}

}  // namespace

std::string SessionStatus::text() const {
    return "Documents Coded: " + std::to_string(found) + " / " + std::to_string(coded) + " (" +
           std::to_string(total) + ")";
}

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

Session::Session(fs::path dir, std::string id, Corpus corpus, SessionOptions options)
    : dir_(std::move(dir)),
      id_(std::move(id)),
      corpus_(std::move(corpus)),
      options_(options),
      features_(featurize(corpus_, options_.max_terms)),
      state_(corpus_.size(), options_.seed) {}

Session::~Session() = default;

std::unique_ptr<Session> Session::create(const fs::path& dir, std::string id, Corpus corpus,
                                         const SessionOptions& options) {
    options.config.validate();
    if (options.batch == 0) throw SessionError(SessionError::Kind::bad_request, "batch size must be positive");
    // the session starts from a clean slate whatever codes the upload carried
    corpus = corpus.with_codes(std::vector<Code>(corpus.size(), Code::undetermined));

    fs::create_directories(dir);
    auto session = std::unique_ptr<Session>(new Session(dir, std::move(id), std::move(corpus), options));
    write_file_atomic(dir / kCorpusFile, to_csv(session->corpus_));
    write_file_atomic(dir / kJournalFile, "");
    write_file_atomic(dir / kSettingsFile,
                      settings_json(session->id_, session->corpus_.name(), options).dump(2) + "\n");
    return session;
}

std::unique_ptr<Session> Session::recover(const fs::path& dir) {
    const json settings = json::parse(read_file(dir / kSettingsFile));
    SessionOptions options;
    const auto code = TreatmentCode::parse(settings.at("treatment").get<std::string>());
    if (!code) throw std::runtime_error("unknown treatment in " + (dir / kSettingsFile).string());
    options.treatment = *code;
    options.seed = settings.at("seed").get<std::uint64_t>();
    options.batch = settings.at("batch").get<std::size_t>();
    options.max_terms = settings.at("max_terms").get<std::size_t>();
    options.config.t1 = settings.at("t1").get<std::size_t>();
    options.config.t2 = settings.at("t2").get<std::size_t>();
    options.config.target_recall = settings.at("target_recall").get<double>();

    Corpus corpus = parse_csv(read_file(dir / kCorpusFile), settings.at("name").get<std::string>());
    auto session = std::unique_ptr<Session>(
        new Session(dir, settings.at("id").get<std::string>(), std::move(corpus), options));

    // Replay; a torn or invalid tail (crash mid-append) is cut off.
    const fs::path journal = dir / kJournalFile;
    std::string valid;
    bool torn = false;
    if (fs::exists(journal)) {
        std::istringstream in(read_file(journal));
        std::string line;
        while (std::getline(in, line)) {
            if (in.eof()) {
                torn = true;  // no trailing newline: the append did not finish
                break;
            }
            try {
                auto labels = labels_from_json(json::parse(line));
                for (const auto& [id, c] : labels) {
                    if (id >= session->corpus_.size()) throw std::runtime_error("id out of range");
                }
                session->apply(labels);
                valid += line + "\n";
            } catch (const std::exception&) {
                torn = true;
                break;
            }
        }
    }
    if (torn || !fs::exists(journal)) write_file_atomic(journal, valid);
    return session;
}

void Session::reset_state() {
    state_ = ReviewState(corpus_.size(), options_.seed);
    curve_.clear();
    pre_stable_.reset();
    frozen_.reset();
    cached_.reset();
    ++version_;
}

void Session::apply(const std::vector<std::pair<std::size_t, Code>>& labels) {
    const bool freezes = !options_.treatment.is_linear() &&
                         options_.treatment.stop() == StopRule::stop && !pre_stable_ &&
                         not_stable(state_, options_.config);
    std::optional<ReviewState> before;
    if (freezes) before = state_;

    for (const auto& [id, code] : labels) {
        if (state_.is_labeled(id)) {
            state_.recode(id, code);
        } else {
            state_.record_label(id, code);
        }
    }
    if (freezes && !not_stable(state_, options_.config)) pre_stable_ = std::move(before);

    curve_.emplace_back(state_.labeled_count(), state_.relevant_count());
    cached_.reset();
    ++version_;
}

void Session::append_journal(const std::vector<std::pair<std::size_t, Code>>& labels) {
    json entries = json::array();
    for (const auto& [id, code] : labels) entries.push_back({id, std::string(to_string(code))});
    const json line{{"seq", curve_.size() + 1}, {"ts", utc_timestamp()}, {"labels", entries}};
    append_line_durable(dir_ / kJournalFile, line.dump());
}

SessionStatus Session::status_locked() const {
    return {state_.relevant_count(), state_.labeled_count(), corpus_.size(),
            phase(options_.treatment, state_, options_.config)};
}

SessionStatus Session::status() const {
    std::lock_guard lock(mutex_);
    return status_locked();
}

Batch Session::next_batch() {
    std::lock_guard lock(mutex_);
    if (cached_ && cached_->first == version_) return cached_->second;
    if (state_.unlabeled().empty()) {
        throw SessionError(SessionError::Kind::exhausted, "every study has been coded");
    }

    const auto& code = options_.treatment;
    const auto& config = options_.config;
    // selection depends only on the current labels and the session seed
    state_.clear_model();
    state_.reseed(mix_seed(options_.seed, state_.labeled_count()));
    const bool trainable = state_.relevant_count() > 0 && state_.irrelevant_count() > 0;
    if (!code.is_linear() && trainable && state_.relevant_count() >= enough(code, config)) {
        if (should_retrain(code, state_, config)) {
            state_.set_model(train_step(code, state_, features_, config,
                                        mix_seed(options_.seed, state_.labeled_count())));
        } else {
            if (!frozen_) {
                const bool use_snapshot = pre_stable_ && pre_stable_->relevant_count() > 0 &&
                                          pre_stable_->irrelevant_count() > 0;
                const ReviewState& basis = use_snapshot ? *pre_stable_ : state_;
                frozen_ = train_step(code, basis, features_, config,
                                     mix_seed(options_.seed, basis.labeled_count()));
            }
            state_.set_model(*frozen_);
        }
    }

    Batch batch;
    batch.phase = phase(code, state_, config);
    batch.ids = query_next(code, state_, features_, config, options_.batch);
    cached_ = std::pair{version_, batch};
    return batch;
}

SessionStatus Session::submit(const std::vector<std::pair<std::size_t, Code>>& labels) {
    std::lock_guard lock(mutex_);
    for (const auto& [id, code] : labels) {
        if (id >= corpus_.size()) {
            throw SessionError(SessionError::Kind::bad_request,
                               "unknown study id " + std::to_string(id));
        }
        if (code == Code::undetermined) {
            throw SessionError(SessionError::Kind::bad_request,
                               "study " + std::to_string(id) + " needs a yes or no code");
        }
    }
    if (labels.empty()) return status_locked();

    append_journal(labels);
    apply(labels);
    return status_locked();
}

std::vector<CurvePoint> Session::curve() const {
    std::lock_guard lock(mutex_);
    return curve_;
}

std::string Session::export_csv() const {
    std::lock_guard lock(mutex_);
    return to_csv(corpus_.with_codes(state_.codes()));
}

SessionStatus Session::restart() {
    std::lock_guard lock(mutex_);
    write_file_atomic(dir_ / kJournalFile, "");
    reset_state();
    return status_locked();
}

// ---------------------------------------------------------------------------
// SessionStore
// ---------------------------------------------------------------------------

SessionStore::SessionStore(fs::path workspace) : workspace_(std::move(workspace)) {
    const fs::path root = workspace_ / "sessions";
    fs::create_directories(root);
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        try {
            auto session = Session::recover(entry.path());
            const std::string id = session->id();
            sessions_.emplace(id, std::move(session));
        } catch (const std::exception& e) {
            recovery_errors.push_back(entry.path().string() + ": " + e.what());
        }
    }
}

std::string SessionStore::create(Corpus corpus, const SessionOptions& options) {
    static thread_local std::mt19937_64 token_source(std::random_device{}());
    std::string id;
    {
        std::unique_lock lock(mutex_);
        do {
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(token_source()));
            id = buf;
        } while (sessions_.contains(id) || reserved_.contains(id) ||
                 fs::exists(workspace_ / "sessions" / id));
        reserved_.insert(id);
    }

    // featurizing can take a while; other sessions stay available meanwhile
    std::shared_ptr<Session> session;
    try {
        session = Session::create(workspace_ / "sessions" / id, id, std::move(corpus), options);
    } catch (...) {
        std::unique_lock lock(mutex_);
        reserved_.erase(id);
        throw;
    }
    std::unique_lock lock(mutex_);
    reserved_.erase(id);
    sessions_.emplace(id, std::move(session));
    return id;
}

std::shared_ptr<Session> SessionStore::get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError(SessionError::Kind::not_found, "no session " + id);
    return it->second;
}

std::vector<std::string> SessionStore::ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, session] : sessions_) out.push_back(id);
    return out;
}

}  // namespace fastread
