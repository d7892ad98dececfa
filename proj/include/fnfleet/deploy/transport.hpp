#pragma once

#include <fnfleet/registry/types.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace fnfleet::deploy {

/// An open connect/transfer/exec channel to one device. Not shared across
/// threads. Every operation on a closed session throws SessionClosed.
class TransportSession {
public:
    virtual ~TransportSession() = default;

    /// Creates or overwrites `path` with `data`.
    virtual void write_file(const std::string& path, std::string_view data) = 0;
    virtual std::string read_file(const std::string& path) = 0;

    /// Starts `command` detached and returns its handle. Throws LaunchError
    /// if the process exits nonzero right away.
    virtual std::string launch_detached(const std::string& command) = 0;
    virtual bool is_alive(const std::string& handle) = 0;
    virtual void terminate(const std::string& handle) = 0;

    virtual void close() = 0;
    virtual bool is_open() const = 0;

    /// Application bytes sent to the device over this session so far.
    virtual std::uint64_t bytes_sent() const = 0;
};

/// Opens sessions. Throws TransportError when the device cannot be reached
/// or refuses the credentials.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::unique_ptr<TransportSession> open(const registry::Address& peer, const std::string& credentials) = 0;
};

} // namespace fnfleet::deploy
