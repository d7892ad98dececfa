#pragma once

#include <fnfleet/api/config.hpp>
#include <fnfleet/api/control_plane.hpp>
#include <fnfleet/api/router.hpp>
#include <fnfleet/deploy/transport.hpp>
#include <fnfleet/net/http.hpp>
#include <fnfleet/registry/store.hpp>

#include <memory>

namespace fnfleet::api {

/// The control plane served over HTTP, built from an ApiConfig: journal
/// store under `storage`, SSH or simulated transport, webhook notifier.
class ApiService {
public:
    explicit ApiService(ApiConfig config);
    ~ApiService();

    /// Binds and serves in the background; returns the bound port.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();

    ControlPlane& control_plane() { return *plane_; }
    const ApiConfig& config() const { return config_; }

private:
    ApiConfig config_;
    std::shared_ptr<registry::JournalStore> store_;
    std::unique_ptr<deploy::Transport> transport_;
    std::unique_ptr<net::Client> client_;
    std::unique_ptr<ControlPlane> plane_;
    std::unique_ptr<Router> router_;
    std::unique_ptr<net::HttpServer> server_;
};

} // namespace fnfleet::api
