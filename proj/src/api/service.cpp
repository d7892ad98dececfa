#include <fnfleet/api/service.hpp>

#include <fnfleet/deploy/sim_transport.hpp>
#include <fnfleet/deploy/ssh_transport.hpp>

#include <filesystem>
#include <fstream>

namespace fnfleet::api {

namespace {

void ensure_writable(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto probe = dir / ".write-test";
    {
        std::ofstream out(probe);
        if (!out) {
            throw StorageError("storage path " + dir.string() + " is not writable");
        }
    }
    std::filesystem::remove(probe, ec);
}

} // namespace

ApiService::ApiService(ApiConfig config) : config_(std::move(config))
{
    config_.validate();
    ensure_writable(config_.storage);
    store_ = std::make_shared<registry::JournalStore>(config_.storage, config_.compact_after);

    if (config_.transport == "simulated") {
        transport_ = std::make_unique<deploy::SimTransport>(std::make_shared<deploy::SimFleet>(true));
    } else {
        auto credentials = config_.credentials_file.empty() ? deploy::CredentialStore{}
                                                            : deploy::CredentialStore::load(config_.credentials_file);
        transport_ = std::make_unique<deploy::SshTransport>(std::move(credentials), deploy::SshOptions{});
    }
    client_ = std::make_unique<net::HttpClient>();
    plane_ = std::make_unique<ControlPlane>(store_, *transport_, *client_,
                                            ControlPlaneOptions{config_.notifier_url, config_.default_base_dir},
                                            wall_now);
    router_ = std::make_unique<Router>(*plane_, config_.admin_token);
    server_ = std::make_unique<net::HttpServer>(router_->handler());
}

ApiService::~ApiService()
{
    stop();
}

int ApiService::start()
{
    auto [host, port] = config_.listen_endpoint();
    return server_->start(host, port);
}

void ApiService::run()
{
    auto [host, port] = config_.listen_endpoint();
    server_->listen(host, port);
}

void ApiService::stop()
{
    if (server_) {
        server_->stop();
    }
    if (store_) {
        store_->flush();
    }
}

} // namespace fnfleet::api
