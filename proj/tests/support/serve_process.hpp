#pragma once

#include <boost/process.hpp>

#include <nlohmann/json.hpp>

#include <fnfleet/net/http.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace fnfleet::testing {

/// A `fnfleet serve` child on an ephemeral port with the simulated transport.
class ServeProcess {
public:
    ServeProcess(const std::string& cli, const std::filesystem::path& storage, const std::string& token)
    {
        config_ = storage.parent_path() / (storage.filename().string() + ".json");
        std::ofstream(config_) << nlohmann::json{{"listen", "127.0.0.1:0"},
                                                 {"storage", storage.string()},
                                                 {"admin_token", token},
                                                 {"transport", "simulated"}}
                                      .dump();
        child_ = boost::process::child(cli, "serve", "--config", config_.string(),
                                       boost::process::std_out > out_, boost::process::std_err > boost::process::null);
        std::string line;
        while (std::getline(out_, line)) {
            if (line.rfind("listening ", 0) == 0) {
                target_ = line.substr(10);
                return;
            }
        }
        throw std::runtime_error("serve exited before listening");
    }

    ~ServeProcess()
    {
        if (child_.running()) {
            kill();
        }
    }

    const std::string& target() const { return target_; }

    /// SIGKILL, so nothing gets a chance to flush or shut down cleanly.
    void kill()
    {
        child_.terminate();
        child_.wait();
    }

    int exit_code() const { return child_.exit_code(); }

private:
    std::filesystem::path config_;
    boost::process::ipstream out_;
    boost::process::child child_;
    std::string target_;
};

} // namespace fnfleet::testing
