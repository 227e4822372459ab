#pragma once

#include <memory>
#include <string>

#include "frontier_lab/service.hpp"

namespace flab::service {

/// REST + server-sent-events front end over a SessionManager.
///
///   GET  /maps
///   POST /sessions
///   GET  /sessions/{id}
///   GET  /sessions/{id}/rounds/{k}/state
///   POST /sessions/{id}/rounds/{k}/choice      {"frontier": i}
///   GET  /sessions/{id}/rounds/{k}/stream      text/event-stream of snapshots
///   GET  /sessions/{id}/export                 application/x-ndjson
///
/// Errors come back as {"error": code, "message": text}.
class HttpServer {
public:
    HttpServer(SessionManager& manager, std::string host = "127.0.0.1", int port = 0);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and serves on a background thread. Returns the bound port.
    int start();
    /// Serves on the calling thread until stop() is called from elsewhere.
    void run();
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace flab::service
