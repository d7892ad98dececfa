#pragma once

#include <fnfleet/common/time.hpp>
#include <fnfleet/registry/types.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

namespace fnfleet::testing {

/// Hand-advanced clock for tests that care about timestamps.
struct ManualClock {
    std::shared_ptr<Timestamp> now = std::make_shared<Timestamp>(parse_iso8601("2024-01-01T00:00:00Z"));

    TimeSource source() const
    {
        auto p = now;
        return [p] { return *p; };
    }
    void advance(Duration d) { *now += d; }
    void advance_seconds(double s) { *now += seconds_to_duration(s); }
};

inline registry::FunctionDraft motion_draft()
{
    registry::FunctionDraft draft;
    draft.name = "motion-monitor";
    draft.source = "import time\nprint('watching')\n";
    draft.interpreter_template = "python {file} {port} {interval}";
    draft.params = {
        {"port", registry::ParamKind::Integer, true, std::nullopt},
        {"interval", registry::ParamKind::Integer, false, registry::ParamValue{std::int64_t{10}}},
    };
    draft.extension = "py";
    return draft;
}

inline registry::FunctionDraft plain_draft(std::string name, std::string source = "echo hi\n")
{
    registry::FunctionDraft draft;
    draft.name = std::move(name);
    draft.source = std::move(source);
    draft.interpreter_template = "sh {file}";
    draft.extension = "sh";
    return draft;
}

inline registry::Address addr(const std::string& text)
{
    return registry::Address::parse(text);
}

inline std::vector<registry::Capability> caps(std::initializer_list<const char*> items)
{
    std::vector<registry::Capability> out;
    for (const char* item : items) {
        out.push_back(registry::Capability::parse(item));
    }
    return out;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& stem)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (stem + "-" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace fnfleet::testing
