#pragma once

#include "courtside/feed_hub.hpp"
#include "courtside/gateway.hpp"
#include "courtside/live_tracker.hpp"
#include "courtside/runtime.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <thread>

namespace courtside {

/// JSON-over-HTTP front end:
///   POST /v1/chat                               chat turn
///   GET  /v1/categories                         tiles and subquestions
///   GET  /v1/matches                            known matches
///   GET  /v1/matches/{id}/snapshot/{kind}       latest feed snapshot
///   GET  /v1/matches/{id}/winprob/stream        server-sent win probabilities
///   GET  /healthz
class HttpServer {
public:
    /// `tracker` may be null; streams then start from the latest snapshot.
    HttpServer(Gateway& gateway, FeedHub& hub, const LiveTracker* tracker, ServerConfig config);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the configured address (port 0 picks a free port) and serves on
    /// a background thread. Throws ConfigurationError when binding fails.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    /// Ends open streams, stops accepting, and waits for in-flight requests.
    void stop();

    int port() const noexcept { return port_; }
    bool running() const noexcept;

private:
    struct Impl;
    void bind();

    std::unique_ptr<Impl> impl_;
    ServerConfig config_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace courtside
