#include <fnfleet/net/sim_network.hpp>

#include <fnfleet/common/error.hpp>

namespace fnfleet::net {

std::string SimNetwork::normalize(const std::string& target)
{
    return Url::parse(target).authority();
}

void SimNetwork::attach(const std::string& address, Handler handler)
{
    std::lock_guard lock(mutex_);
    endpoints_[normalize(address)] = std::move(handler);
}

void SimNetwork::detach(const std::string& address)
{
    std::lock_guard lock(mutex_);
    endpoints_.erase(normalize(address));
}

void SimNetwork::set_down(const std::string& address, bool down)
{
    std::lock_guard lock(mutex_);
    if (down) {
        down_.insert(normalize(address));
    } else {
        down_.erase(normalize(address));
    }
}

void SimNetwork::add_observer(Observer observer)
{
    std::lock_guard lock(mutex_);
    observers_.push_back(std::move(observer));
}

Response SimNetwork::send(const std::string& target, const Request& request)
{
    auto key = normalize(target);
    Handler handler;
    std::vector<Observer> observers;
    {
        std::lock_guard lock(mutex_);
        auto it = endpoints_.find(key);
        if (it == endpoints_.end() || down_.count(key) != 0) {
            throw ConnectionError(key + ": connection refused");
        }
        handler = it->second;
        observers = observers_;
        ++delivered_;
    }
    for (const auto& observer : observers) {
        observer(key, request);
    }
    return handler(request);
}

std::size_t SimNetwork::delivered() const
{
    std::lock_guard lock(mutex_);
    return delivered_;
}

} // namespace fnfleet::net
