#include <fnfleet/common/filesystem.hpp>

#include <fnfleet/common/error.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace fnfleet {

void MemoryFilesystem::write(const std::string& path, std::string_view data)
{
    std::lock_guard lock(mutex_);
    files_[path] = std::string(data);
}

std::optional<std::string> MemoryFilesystem::read(const std::string& path) const
{
    std::lock_guard lock(mutex_);
    auto it = files_.find(path);
    if (it == files_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool MemoryFilesystem::exists(const std::string& path) const
{
    std::lock_guard lock(mutex_);
    return files_.count(path) != 0;
}

std::vector<std::string> MemoryFilesystem::list(const std::string& prefix) const
{
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (auto it = files_.lower_bound(prefix); it != files_.end() && it->first.rfind(prefix, 0) == 0; ++it) {
        out.push_back(it->first);
    }
    return out;
}

DiskFilesystem::DiskFilesystem(std::filesystem::path root) : root_(std::move(root))
{
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) {
        throw StorageError("cannot create " + root_.string() + ": " + ec.message());
    }
}

std::filesystem::path DiskFilesystem::resolve(const std::string& path) const
{
    std::filesystem::path relative(path);
    if (relative.is_absolute()) {
        relative = relative.relative_path();
    }
    auto full = (root_ / relative).lexically_normal();
    auto rel = full.lexically_relative(root_);
    if (rel.empty() || *rel.begin() == "..") {
        throw ValidationError("path escapes the device root: " + path);
    }
    return full;
}

void DiskFilesystem::write(const std::string& path, std::string_view data)
{
    auto full = resolve(path);
    std::filesystem::create_directories(full.parent_path());
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw StorageError("cannot write " + full.string());
    }
}

std::optional<std::string> DiskFilesystem::read(const std::string& path) const
{
    std::ifstream in(resolve(path), std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool DiskFilesystem::exists(const std::string& path) const
{
    return std::filesystem::is_regular_file(resolve(path));
}

std::vector<std::string> DiskFilesystem::list(const std::string& prefix) const
{
    std::vector<std::string> out;
    std::error_code ec;
    for (auto it = std::filesystem::recursive_directory_iterator(root_, ec);
         !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
        if (!it->is_regular_file()) {
            continue;
        }
        auto device_path = "/" + it->path().lexically_relative(root_).generic_string();
        if (device_path.rfind(prefix, 0) == 0) {
            out.push_back(device_path);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace fnfleet
