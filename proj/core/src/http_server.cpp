#include "frontier_lab/http_server.hpp"

#include <httplib.h>

#include <atomic>

namespace flab::service {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, {{"error", code}, {"message", message}});
}

template <class F>
void guarded(httplib::Response& res, F&& fn) {
    try {
        fn();
    } catch (const ServiceError& e) {
        send_error(res, e.status(), e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const ConfigError& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

int round_of(const httplib::Request& req) {
    try {
        return std::stoi(req.matches[2].str());
    } catch (const std::exception&) {
        throw ServiceError(404, "unknown_round", "bad round index");
    }
}

nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw ServiceError(400, "bad_request", "body is not valid JSON");
    return j;
}

}  // namespace

struct HttpServer::Impl {
    SessionManager& manager;
    std::string host;
    int port;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};

    Impl(SessionManager& m, std::string h, int p) : manager(m), host(std::move(h)), port(p) { routes(); }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
        server.Get("/maps", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                nlohmann::json maps = nlohmann::json::array();
                for (const auto& m : manager.config().maps) maps.push_back(m.id());
                send_json(res, 200, {{"maps", maps}});
            });
        });
        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 201, manager.create_session(parse_body(req))); });
        });
        server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, manager.describe(req.matches[1].str())); });
        });
        server.Get(R"(/sessions/([^/]+)/rounds/(-?\d+)/state)", [this](const httplib::Request& req,
                                                                     httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, manager.get_state(req.matches[1].str(), round_of(req))); });
        });
        server.Post(R"(/sessions/([^/]+)/rounds/(-?\d+)/choice)", [this](const httplib::Request& req,
                                                                       httplib::Response& res) {
            guarded(res, [&] {
                send_json(res, 200, manager.submit_choice(req.matches[1].str(), round_of(req), parse_body(req)));
            });
        });
        server.Get(R"(/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                res.status = 200;
                res.set_content(manager.export_session(req.matches[1].str()), "application/x-ndjson");
            });
        });
        server.Get(R"(/sessions/([^/]+)/rounds/(-?\d+)/stream)", [this](const httplib::Request& req,
                                                                      httplib::Response& res) {
            guarded(res, [&] { stream(req, res); });
        });
    }

    void stream(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1].str();
        const int round = round_of(req);
        auto sub = manager.subscribe(id, round);
        res.status = 200;
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [this, sub](std::size_t, httplib::DataSink& sink) {
                if (stopping) return false;
                if (auto event = sub->next(std::chrono::milliseconds(250))) {
                    const std::string frame = "event: snapshot\ndata: " + *event + "\n\n";
                    return sink.write(frame.data(), frame.size());
                }
                if (sub->closed()) {
                    sink.done();
                    return true;
                }
                // Comment line keeps proxies from timing the stream out and detects dropped clients.
                static constexpr char kKeepAlive[] = ": keep-alive\n\n";
                return sink.write(kKeepAlive, sizeof kKeepAlive - 1);
            },
            [this, id, round, sub](bool) {
                try {
                    manager.unsubscribe(id, round, sub);
                } catch (const ServiceError&) {
                }
            });
    }
};

HttpServer::HttpServer(SessionManager& manager, std::string host, int port)
    : impl_(std::make_unique<Impl>(manager, std::move(host), port)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
    auto& s = impl_->server;
    if (impl_->port == 0) {
        impl_->port = s.bind_to_any_port(impl_->host);
    } else if (!s.bind_to_port(impl_->host, impl_->port)) {
        impl_->port = -1;
    }
    if (impl_->port < 0) throw std::runtime_error("cannot bind " + impl_->host);
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void HttpServer::run() {
    if (!impl_->server.listen(impl_->host, impl_->port)) throw std::runtime_error("cannot listen on " + impl_->host);
}

void HttpServer::stop() {
    if (!impl_) return;
    impl_->stopping = true;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const { return impl_->port; }

}  // namespace flab::service
