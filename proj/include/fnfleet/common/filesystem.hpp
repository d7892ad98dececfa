#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fnfleet {

/// The slice of a device's filesystem the platform touches: function files
/// written by the transport and artifacts written by action handlers.
class DeviceFilesystem {
public:
    virtual ~DeviceFilesystem() = default;
    virtual void write(const std::string& path, std::string_view data) = 0;
    virtual std::optional<std::string> read(const std::string& path) const = 0;
    virtual bool exists(const std::string& path) const = 0;
    /// Paths starting with `prefix`, sorted.
    virtual std::vector<std::string> list(const std::string& prefix) const = 0;
};

class MemoryFilesystem : public DeviceFilesystem {
public:
    void write(const std::string& path, std::string_view data) override;
    std::optional<std::string> read(const std::string& path) const override;
    bool exists(const std::string& path) const override;
    std::vector<std::string> list(const std::string& prefix) const override;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> files_;
};

/// Maps device paths onto a local directory; absolute paths are taken
/// relative to `root`.
class DiskFilesystem : public DeviceFilesystem {
public:
    explicit DiskFilesystem(std::filesystem::path root);

    void write(const std::string& path, std::string_view data) override;
    std::optional<std::string> read(const std::string& path) const override;
    bool exists(const std::string& path) const override;
    std::vector<std::string> list(const std::string& prefix) const override;

private:
    std::filesystem::path resolve(const std::string& path) const;

    std::filesystem::path root_;
};

} // namespace fnfleet
