#include "fastread/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

namespace fastread {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void send_error(httplib::Response& res, int status, const std::string& error,
                const std::string& detail) {
    res.status = status;
    res.set_content(json{{"error", error}, {"detail", detail}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json status_json(const SessionStatus& s) {
    return json{{"found", s.found},
                {"coded", s.coded},
                {"total", s.total},
                {"phase", std::string(to_string(s.phase))},
                {"status", s.text()}};
}

json study_json(const Study& study) {
    return json{{"id", study.id},
                {"title", study.title},
                {"abstract", study.abstract},
                {"year", study.year ? json(*study.year) : json(nullptr)},
                {"pdf_link", study.pdf_link}};
}

std::uint64_t fresh_seed() {
    static thread_local std::mt19937_64 source(std::random_device{}());
    return source();
}

// Runs a handler, mapping library exceptions to JSON error responses.
template <class Handler>
void guarded(httplib::Response& res, Handler&& handler) {
    try {
        handler();
    } catch (const SessionError& e) {
        switch (e.kind()) {
            case SessionError::Kind::not_found: send_error(res, 404, "not_found", e.what()); break;
            case SessionError::Kind::bad_request: send_error(res, 400, "bad_request", e.what()); break;
            case SessionError::Kind::exhausted: send_error(res, 409, "exhausted", e.what()); break;
        }
    } catch (const CorpusError& e) {
        send_error(res, 400, "invalid_corpus", e.what());
    } catch (const VocabularyError& e) {
        send_error(res, 400, "invalid_corpus", e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

SessionOptions options_from(const json& body) {
    SessionOptions options;
    options.seed = fresh_seed();
    if (body.contains("treatment")) {
        const auto code = TreatmentCode::parse(body.at("treatment").get<std::string>());
        if (!code) {
            throw SessionError(SessionError::Kind::bad_request,
                               "unknown treatment " + body.at("treatment").dump());
        }
        options.treatment = *code;
    }
    if (body.contains("seed")) options.seed = body.at("seed").get<std::uint64_t>();
    if (body.contains("batch")) options.batch = body.at("batch").get<std::size_t>();
    if (body.contains("max_terms")) options.max_terms = body.at("max_terms").get<std::size_t>();
    if (options.batch == 0) throw SessionError(SessionError::Kind::bad_request, "batch must be positive");
    return options;
}

// Workspace-relative path that may not climb out of the workspace.
fs::path workspace_file(const fs::path& workspace, const std::string& name) {
    const fs::path relative = fs::path(name).lexically_normal();
    if (relative.is_absolute() || relative.empty() || *relative.begin() == "..") {
        throw SessionError(SessionError::Kind::bad_request, "file must be inside the workspace");
    }
    return workspace / relative;
}

}  // namespace

ReviewServer::ReviewServer(SessionStore& store, std::optional<fs::path> static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
    // the library default adds SO_REUSEPORT, which would let a second
    // server share a port that is already serving
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    if (static_dir) server_->set_mount_point("/", static_dir->string());
    install_routes();
}

ReviewServer::~ReviewServer() { stop(); }

bool ReviewServer::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        return port_ > 0;
    }
    if (!server_->bind_to_port(host, port)) return false;
    port_ = port;
    return true;
}

bool ReviewServer::listen() { return server_->listen_after_bind(); }

void ReviewServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
}

void ReviewServer::install_routes() {
    auto& srv = *server_;

    srv.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, json{{"ok", true}, {"sessions", store_.ids().size()}});
    });

    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            json body = json::object();
            std::string csv_text;
            std::string name = "upload";
            if (req.get_header_value("Content-Type").starts_with("text/csv")) {
                csv_text = req.body;
                for (const char* key : {"treatment", "name"}) {
                    if (req.has_param(key)) body[key] = req.get_param_value(key);
                }
                for (const char* key : {"seed", "batch", "max_terms"}) {
                    if (!req.has_param(key)) continue;
                    const auto text = req.get_param_value(key);
                    std::uint64_t v = 0;
                    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
                    if (ec != std::errc{} || p != text.data() + text.size()) {
                        throw SessionError(SessionError::Kind::bad_request,
                                           std::string("query parameter ") + key + " must be an integer");
                    }
                    body[key] = v;
                }
            } else {
                body = json::parse(req.body.empty() ? std::string("{}") : req.body);
                if (body.contains("csv")) {
                    csv_text = body.at("csv").get<std::string>();
                } else if (body.contains("file")) {
                    const auto path = workspace_file(store_.workspace(), body.at("file").get<std::string>());
                    std::ifstream in(path, std::ios::binary);
                    if (!in) throw SessionError(SessionError::Kind::bad_request, "cannot read " + path.string());
                    std::ostringstream buffer;
                    buffer << in.rdbuf();
                    csv_text = buffer.str();
                    name = path.stem().string();
                } else {
                    throw SessionError(SessionError::Kind::bad_request, "body needs \"csv\" or \"file\"");
                }
            }
            if (body.contains("name")) name = body.at("name").get<std::string>();

            const SessionOptions options = options_from(body);
            const std::string id = store_.create(parse_csv(csv_text, name), options);
            send_json(res, json{{"id", id}, {"status", status_json(store_.get(id)->status())}}, 201);
        });
    });

    srv.Get(R"(/sessions/([^/]+)/batch)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto session = store_.get(req.matches[1]);
            const Batch batch = session->next_batch();
            json studies = json::array();
            for (auto id : batch.ids) studies.push_back(study_json(session->corpus()[id]));
            send_json(res, json{{"phase", std::string(to_string(batch.phase))},
                                {"studies", studies},
                                {"status", status_json(session->status())}});
        });
    });

    srv.Post(R"(/sessions/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto session = store_.get(req.matches[1]);
            const json body = json::parse(req.body.empty() ? std::string("{}") : req.body);
            const json submitted = body.value("labels", json::object());
            if (!submitted.is_object()) {
                throw SessionError(SessionError::Kind::bad_request, "labels must map study ids to codes");
            }
            std::vector<std::pair<std::size_t, Code>> labels;
            for (const auto& [key, value] : submitted.items()) {
                std::size_t id = 0;
                auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
                if (ec != std::errc{} || p != key.data() + key.size()) {
                    throw SessionError(SessionError::Kind::bad_request, "unknown study id " + key);
                }
                const Code code = value.is_string() ? parse_code(value.get<std::string>()) : Code::undetermined;
                if (code == Code::undetermined) {
                    throw SessionError(SessionError::Kind::bad_request,
                                       "study " + key + " needs a yes or no code");
                }
                labels.emplace_back(id, code);
            }
            send_json(res, status_json(session->submit(labels)));
        });
    });

    srv.Get(R"(/sessions/([^/]+)/status)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, status_json(store_.get(req.matches[1])->status())); });
    });

    srv.Get(R"(/sessions/([^/]+)/curve)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            json points = json::array();
            for (const auto& [coded, found] : store_.get(req.matches[1])->curve()) {
                points.push_back({coded, found});
            }
            send_json(res, json{{"points", points}});
        });
    });

    srv.Get(R"(/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto session = store_.get(req.matches[1]);
            res.set_header("Content-Disposition",
                           "attachment; filename=\"" + session->corpus().name() + "_coded.csv\"");
            res.set_content(session->export_csv(), "text/csv");
        });
    });

    srv.Post(R"(/sessions/([^/]+)/restart)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, status_json(store_.get(req.matches[1])->restart())); });
    });
}

}  // namespace fastread
