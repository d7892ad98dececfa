#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

namespace fnfleet::registry {

enum class EntityKind : std::uint8_t {
    Function = 1,
    Device = 2,
    Deployment = 3,
    AutoDeployRule = 4,
    InteropRule = 5,
    TelemetryBatch = 6,
};

std::string_view to_string(EntityKind kind);
EntityKind parse_entity_kind(std::string_view text);

/// All live entities, keyed by kind then id.
using StoreImage = std::map<EntityKind, std::map<std::string, nlohmann::json>>;

/// Persistence contract shared by every control-plane component. Bodies are
/// JSON objects carrying their own "id". Implementations are thread-safe.
class Store {
public:
    virtual ~Store() = default;

    virtual void put(EntityKind kind, const std::string& id, const nlohmann::json& body) = 0;
    virtual void erase(EntityKind kind, const std::string& id) = 0;
    virtual StoreImage load() const = 0;
    virtual void flush() = 0;
};

class MemoryStore : public Store {
public:
    void put(EntityKind kind, const std::string& id, const nlohmann::json& body) override;
    void erase(EntityKind kind, const std::string& id) override;
    StoreImage load() const override;
    void flush() override {}

private:
    mutable std::mutex mutex_;
    StoreImage image_;
};

/// Append-only journal plus periodic snapshot in a directory.
///
/// `journal.log` holds length-prefixed records:
///   u32 LE length of what follows | u64 LE sequence | u8 kind | JSON body
/// A kind byte with the high bit set is a tombstone for `body["id"]`.
/// `snapshot.json` holds {"last_seq": N, "entities": {kind: {id: body}}};
/// replay applies only journal records with a sequence above last_seq.
/// A torn record at the journal tail is discarded on open.
class JournalStore : public Store {
public:
    static constexpr std::uint8_t kTombstoneBit = 0x80;

    /// `compact_after` journal records trigger a snapshot; 0 disables it.
    explicit JournalStore(std::filesystem::path directory, std::size_t compact_after = 10000);
    ~JournalStore() override;

    JournalStore(const JournalStore&) = delete;
    JournalStore& operator=(const JournalStore&) = delete;

    void put(EntityKind kind, const std::string& id, const nlohmann::json& body) override;
    void erase(EntityKind kind, const std::string& id) override;
    StoreImage load() const override;
    void flush() override;

    /// Writes a snapshot of the current image and truncates the journal.
    void compact();

    std::uint64_t last_sequence() const;
    std::size_t journal_records() const;

    static std::filesystem::path journal_path(const std::filesystem::path& dir) { return dir / "journal.log"; }
    static std::filesystem::path snapshot_path(const std::filesystem::path& dir) { return dir / "snapshot.json"; }

private:
    void append(std::uint8_t kind_byte, const nlohmann::json& body);
    void recover();
    void compact_locked();

    std::filesystem::path directory_;
    std::size_t compact_after_;
    int fd_ = -1;
    std::uint64_t sequence_ = 0;
    std::size_t journal_records_ = 0;
    StoreImage image_;
    mutable std::mutex mutex_;
};

} // namespace fnfleet::registry
