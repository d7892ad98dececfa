#pragma once

#include <fnfleet/net/message.hpp>

#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace fnfleet::net {

/// In-process stand-in for the network: endpoints are handlers attached at
/// an address, requests are delivered synchronously on the caller's thread.
class SimNetwork : public Client {
public:
    using Observer = std::function<void(const std::string& target, const Request&)>;

    void attach(const std::string& address, Handler handler);
    void detach(const std::string& address);

    /// A down endpoint stays attached but refuses connections.
    void set_down(const std::string& address, bool down);

    void add_observer(Observer observer);

    Response send(const std::string& target, const Request& request) override;

    std::size_t delivered() const;

private:
    static std::string normalize(const std::string& target);

    mutable std::mutex mutex_;
    std::map<std::string, Handler> endpoints_;
    std::set<std::string> down_;
    std::vector<Observer> observers_;
    std::size_t delivered_ = 0;
};

} // namespace fnfleet::net
