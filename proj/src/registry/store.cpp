#include <fnfleet/registry/store.hpp>

#include <fnfleet/common/error.hpp>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

namespace fnfleet::registry {

namespace {

constexpr std::array<EntityKind, 6> kAllKinds = {EntityKind::Function,       EntityKind::Device,
                                                 EntityKind::Deployment,     EntityKind::AutoDeployRule,
                                                 EntityKind::InteropRule,    EntityKind::TelemetryBatch};

void put_le(std::string& out, std::uint64_t value, int bytes)
{
    for (int i = 0; i < bytes; ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
    }
}

std::uint64_t get_le(const unsigned char* in, int bytes)
{
    std::uint64_t value = 0;
    for (int i = bytes - 1; i >= 0; --i) {
        value = (value << 8) | in[i];
    }
    return value;
}

bool valid_kind(std::uint8_t raw)
{
    return raw >= 1 && raw <= static_cast<std::uint8_t>(EntityKind::TelemetryBatch);
}

void write_all(int fd, const std::string& data)
{
    const char* ptr = data.data();
    std::size_t remaining = data.size();
    while (remaining > 0) {
        ssize_t n = ::write(fd, ptr, remaining);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw StorageError(std::string("journal write failed: ") + std::strerror(errno));
        }
        ptr += n;
        remaining -= static_cast<std::size_t>(n);
    }
}

} // namespace

std::string_view to_string(EntityKind kind)
{
    switch (kind) {
    case EntityKind::Function: return "function";
    case EntityKind::Device: return "device";
    case EntityKind::Deployment: return "deployment";
    case EntityKind::AutoDeployRule: return "autodeploy_rule";
    case EntityKind::InteropRule: return "interop_rule";
    case EntityKind::TelemetryBatch: return "telemetry_batch";
    }
    return "unknown";
}

EntityKind parse_entity_kind(std::string_view text)
{
    for (auto kind : kAllKinds) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw StorageError("unknown entity kind '" + std::string(text) + "'");
}

void MemoryStore::put(EntityKind kind, const std::string& id, const nlohmann::json& body)
{
    std::lock_guard lock(mutex_);
    image_[kind][id] = body;
}

void MemoryStore::erase(EntityKind kind, const std::string& id)
{
    std::lock_guard lock(mutex_);
    image_[kind].erase(id);
}

StoreImage MemoryStore::load() const
{
    std::lock_guard lock(mutex_);
    return image_;
}

JournalStore::JournalStore(std::filesystem::path directory, std::size_t compact_after)
    : directory_(std::move(directory)), compact_after_(compact_after)
{
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    if (ec) {
        throw StorageError("cannot create storage directory " + directory_.string() + ": " + ec.message());
    }
    recover();
    fd_ = ::open(journal_path(directory_).c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw StorageError("cannot open journal in " + directory_.string() + ": " + std::strerror(errno));
    }
}

JournalStore::~JournalStore()
{
    if (fd_ >= 0) {
        ::fsync(fd_);
        ::close(fd_);
    }
}

void JournalStore::recover()
{
    auto snapshot_file = snapshot_path(directory_);
    if (std::filesystem::exists(snapshot_file)) {
        std::ifstream in(snapshot_file);
        nlohmann::json snapshot;
        try {
            in >> snapshot;
        } catch (const nlohmann::json::exception& e) {
            throw StorageError("corrupt snapshot " + snapshot_file.string() + ": " + e.what());
        }
        sequence_ = snapshot.at("last_seq").get<std::uint64_t>();
        for (const auto& [kind_name, entities] : snapshot.at("entities").items()) {
            auto& bucket = image_[parse_entity_kind(kind_name)];
            for (const auto& [id, body] : entities.items()) {
                bucket[id] = body;
            }
        }
    }

    auto journal_file = journal_path(directory_);
    if (!std::filesystem::exists(journal_file)) {
        return;
    }
    std::ifstream in(journal_file, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());

    std::size_t offset = 0;
    std::size_t good_end = 0;
    while (offset + 4 <= data.size()) {
        auto length = static_cast<std::size_t>(get_le(bytes + offset, 4));
        if (length < 9 || offset + 4 + length > data.size()) {
            break;
        }
        const unsigned char* record = bytes + offset + 4;
        std::uint64_t seq = get_le(record, 8);
        std::uint8_t kind_byte = record[8];
        std::uint8_t raw_kind = kind_byte & static_cast<std::uint8_t>(~kTombstoneBit);
        nlohmann::json body =
            nlohmann::json::parse(data.begin() + static_cast<std::ptrdiff_t>(offset + 4 + 9),
                                  data.begin() + static_cast<std::ptrdiff_t>(offset + 4 + length), nullptr, false);
        if (body.is_discarded() || !valid_kind(raw_kind) || !body.contains("id")) {
            break;
        }
        if (seq > sequence_) {
            auto kind = static_cast<EntityKind>(raw_kind);
            auto id = body.at("id").get<std::string>();
            if (kind_byte & kTombstoneBit) {
                image_[kind].erase(id);
            } else {
                image_[kind][id] = std::move(body);
            }
            sequence_ = seq;
        }
        ++journal_records_;
        offset += 4 + length;
        good_end = offset;
    }
    if (good_end != data.size()) {
        std::filesystem::resize_file(journal_file, good_end);
    }
}

void JournalStore::append(std::uint8_t kind_byte, const nlohmann::json& body)
{
    std::string text = body.dump();
    std::string record;
    record.reserve(4 + 9 + text.size());
    put_le(record, 9 + text.size(), 4);
    put_le(record, sequence_ + 1, 8);
    record.push_back(static_cast<char>(kind_byte));
    record += text;
    write_all(fd_, record);
    ++sequence_;
    ++journal_records_;
}

void JournalStore::put(EntityKind kind, const std::string& id, const nlohmann::json& body)
{
    std::lock_guard lock(mutex_);
    nlohmann::json stored = body;
    stored["id"] = id;
    append(static_cast<std::uint8_t>(kind), stored);
    image_[kind][id] = std::move(stored);
    if (compact_after_ != 0 && journal_records_ >= compact_after_) {
        compact_locked();
    }
}

void JournalStore::erase(EntityKind kind, const std::string& id)
{
    std::lock_guard lock(mutex_);
    append(static_cast<std::uint8_t>(kind) | kTombstoneBit, nlohmann::json{{"id", id}});
    image_[kind].erase(id);
}

StoreImage JournalStore::load() const
{
    std::lock_guard lock(mutex_);
    return image_;
}

void JournalStore::flush()
{
    std::lock_guard lock(mutex_);
    if (::fsync(fd_) != 0) {
        throw StorageError(std::string("journal fsync failed: ") + std::strerror(errno));
    }
}

void JournalStore::compact()
{
    std::lock_guard lock(mutex_);
    compact_locked();
}

void JournalStore::compact_locked()
{
    nlohmann::json entities = nlohmann::json::object();
    for (const auto& [kind, bucket] : image_) {
        auto& out = entities[std::string(to_string(kind))];
        out = nlohmann::json::object();
        for (const auto& [id, body] : bucket) {
            out[id] = body;
        }
    }
    nlohmann::json snapshot{{"last_seq", sequence_}, {"entities", entities}};

    auto target = snapshot_path(directory_);
    auto temp = target;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::trunc);
        out << snapshot.dump();
        out.flush();
        if (!out) {
            throw StorageError("cannot write snapshot " + temp.string());
        }
    }
    int snap_fd = ::open(temp.c_str(), O_RDONLY | O_CLOEXEC);
    if (snap_fd >= 0) {
        ::fsync(snap_fd);
        ::close(snap_fd);
    }
    std::filesystem::rename(temp, target);

    // The snapshot now covers every journal record, so the journal can restart empty.
    if (::ftruncate(fd_, 0) != 0) {
        throw StorageError(std::string("journal truncate failed: ") + std::strerror(errno));
    }
    ::fsync(fd_);
    journal_records_ = 0;
}

std::uint64_t JournalStore::last_sequence() const
{
    std::lock_guard lock(mutex_);
    return sequence_;
}

std::size_t JournalStore::journal_records() const
{
    std::lock_guard lock(mutex_);
    return journal_records_;
}

} // namespace fnfleet::registry
