#include "courtside/http_server.hpp"

#include "courtside/errors.hpp"
#include "courtside/match_context.hpp"

#include <httplib.h>

namespace courtside {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

std::string sse_frame(std::uint64_t id, const json& data) {
    return "id: " + std::to_string(id) + "\nevent: winprob\ndata: " + data.dump() + "\n\n";
}

bool match_completed(const FeedHub& hub, const std::string& match_id) {
    const auto snap = hub.find_snapshot(FeedKind::Scores, match_id);
    return snap && snap->latest.payload.value("completed", false);
}

/// Per-connection state of one win-probability stream.
struct Stream {
    std::string match_id;
    std::shared_ptr<EventQueue> queue = std::make_shared<EventQueue>();
    Subscription subscription;
    std::vector<json> backlog;  // history not yet written
    std::vector<std::uint64_t> backlog_ids;
    std::uint64_t last_sent = 0;
};

} // namespace

struct HttpServer::Impl {
    Gateway& gateway;
    FeedHub& hub;
    const LiveTracker* tracker;
    httplib::Server server;
    std::atomic<bool> stopping{false};

    Impl(Gateway& g, FeedHub& h, const LiveTracker* t) : gateway(g), hub(h), tracker(t) {}

    void routes(const ServerConfig& config);
    void chat(const httplib::Request& req, httplib::Response& res);
    void matches(httplib::Response& res);
    void snapshot(const httplib::Request& req, httplib::Response& res);
    void stream(const httplib::Request& req, httplib::Response& res, std::chrono::milliseconds poll);
};

void HttpServer::Impl::routes(const ServerConfig& config) {
    const auto threads = config.threads;
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    server.set_keep_alive_timeout(1);
    // SO_REUSEPORT (the library default) would let a second server share the port silently.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server.set_payload_max_length(64 * 1024);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send_error(res, 500, what);
    });

    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, stopping ? 503 : 200, {{"status", stopping ? "stopping" : "ready"}});
    });
    server.Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) { chat(req, res); });
    server.Options("/v1/chat", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    server.Get("/v1/categories", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, gateway.catalog().to_json());
    });
    server.Get("/v1/matches", [this](const httplib::Request&, httplib::Response& res) { matches(res); });
    server.Get(R"(/v1/matches/([^/]+)/snapshot/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) { snapshot(req, res); });
    const auto poll = config.stream_poll;
    server.Get(R"(/v1/matches/([^/]+)/winprob/stream)",
               [this, poll](const httplib::Request& req, httplib::Response& res) { stream(req, res, poll); });
}

void HttpServer::Impl::chat(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
        body = json::parse(req.body);
    } catch (const json::exception& e) {
        return send_error(res, 400, std::string("malformed JSON: ") + e.what());
    }
    try {
        const auto request = chat_request_from_json(body);
        if (request.match_id.empty()) return send_error(res, 400, "match_id is required");
        send_json(res, 200, to_json(gateway.handle_chat(request)));
    } catch (const ValidationError& e) {
        send_error(res, 400, e.what());
    }
}

void HttpServer::Impl::matches(httplib::Response& res) {
    json out = json::array();
    for (const auto& id : hub.match_ids()) {
        json players = json::array();
        for (const auto& p : match_context_from_feeds(hub, id).players) players.push_back(p.name);
        json score = nullptr;
        if (const auto snap = hub.find_snapshot(FeedKind::Scores, id)) score = snap->latest.payload;
        out.push_back({{"match_id", id},
                       {"players", players},
                       {"completed", match_completed(hub, id)},
                       {"score", score}});
    }
    send_json(res, 200, {{"matches", out}});
}

void HttpServer::Impl::snapshot(const httplib::Request& req, httplib::Response& res) {
    const std::string match_id = req.matches[1];
    FeedKind kind;
    try {
        kind = feed_kind_from_string(std::string(req.matches[2]));
    } catch (const ValidationError& e) {
        return send_error(res, 404, e.what());
    }
    const auto snap = hub.find_snapshot(kind, match_id);
    if (!snap) return send_error(res, 404, "no " + std::string(to_string(kind)) + " snapshot for " + match_id);
    send_json(res, 200, snap->to_json());
}

void HttpServer::Impl::stream(const httplib::Request& req, httplib::Response& res, std::chrono::milliseconds poll) {
    auto st = std::make_shared<Stream>();
    st->match_id = req.matches[1];
    if (hub.last_sequence(FeedKind::LikelihoodToWin, st->match_id) == 0 && !hub.find_snapshot(FeedKind::Scores, st->match_id))
        return send_error(res, 404, "unknown match " + st->match_id);

    if (req.has_header("Last-Event-ID")) {
        try {
            st->last_sent = std::stoull(req.get_header_value("Last-Event-ID"));
        } catch (const std::exception&) {
            return send_error(res, 400, "Last-Event-ID must be an unsigned integer");
        }
    }

    // Subscribe before reading history so no event falls in between; the
    // sequence check below drops the overlap.
    auto queue = st->queue;
    st->subscription = hub.subscribe(FeedKind::LikelihoodToWin, st->match_id,
                                     [queue](const FeedEvent& e) { queue->push(e); });
    if (tracker) {
        for (const auto& rec : tracker->trace(st->match_id)) {
            st->backlog.push_back(likelihood_payload(rec, tracker->config()));
            st->backlog_ids.push_back(static_cast<std::uint64_t>(rec.point_index));
        }
    } else if (const auto snap = hub.find_snapshot(FeedKind::LikelihoodToWin, st->match_id)) {
        st->backlog.push_back(snap->latest.payload);
        st->backlog_ids.push_back(snap->sequence());
    }

    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, st, poll](std::size_t, httplib::DataSink& sink) {
            auto emit = [&](std::uint64_t id, json data) {
                if (id <= st->last_sent) return true;
                data["match_id"] = st->match_id;
                data["sequence"] = id;
                const auto frame = sse_frame(id, data);
                st->last_sent = id;
                return sink.write(frame.data(), frame.size());
            };
            if (!st->backlog.empty()) {
                for (std::size_t i = 0; i < st->backlog.size(); ++i)
                    if (!emit(st->backlog_ids[i], std::move(st->backlog[i]))) return false;
                st->backlog.clear();
                st->backlog_ids.clear();
                return true;
            }
            if (stopping) {
                sink.done();
                return true;
            }
            if (auto e = st->queue->pop_for(poll)) {
                if (!emit(e->sequence, e->payload)) return false;
                return true;
            }
            if (match_completed(hub, st->match_id) &&
                st->last_sent >= hub.last_sequence(FeedKind::LikelihoodToWin, st->match_id)) {
                sink.done();
                return true;
            }
            // Comment line keeps idle proxies from closing the connection.
            return sink.write(":\n\n", 3);
        },
        [st](bool) { st->subscription.cancel(); });
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(Gateway& gateway, FeedHub& hub, const LiveTracker* tracker, ServerConfig config)
    : impl_(std::make_unique<Impl>(gateway, hub, tracker)), config_(std::move(config)) {
    impl_->routes(config_);
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::bind() {
    if (config_.port == 0) {
        port_ = impl_->server.bind_to_any_port(config_.host);
        if (port_ <= 0) throw ConfigurationError("cannot bind " + config_.host);
    } else {
        if (!impl_->server.bind_to_port(config_.host, config_.port))
            throw ConfigurationError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
        port_ = config_.port;
    }
}

int HttpServer::start() {
    bind();
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void HttpServer::run() {
    bind();
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    impl_->stopping = true;
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

bool HttpServer::running() const noexcept { return impl_->server.is_running(); }

} // namespace courtside
