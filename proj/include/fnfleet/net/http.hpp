#pragma once

#include <fnfleet/net/message.hpp>

#include <chrono>
#include <memory>
#include <string>
#include <thread>

namespace fnfleet::net {

/// Real HTTP/1.1 client.
class HttpClient : public Client {
public:
    explicit HttpClient(std::chrono::milliseconds timeout = std::chrono::seconds(5)) : timeout_(timeout) {}

    Response send(const std::string& target, const Request& request) override;

private:
    std::chrono::milliseconds timeout_;
};

/// Serves a Handler over HTTP/1.1 on a listening socket.
class HttpServer {
public:
    explicit HttpServer(Handler handler);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port.
    /// Returns the bound port; throws ConnectionError if binding fails.
    int start(const std::string& host, int port);

    /// Binds and serves on the calling thread until stop().
    void listen(const std::string& host, int port);

    void stop();

    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
};

} // namespace fnfleet::net
