#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>

namespace fnfleet {

/// Hands out `<prefix>-NNNNNN` identifiers. The fixed width keeps lexical
/// order equal to allocation order and every id the same length.
class IdSequence {
public:
    explicit IdSequence(std::string prefix) : prefix_(std::move(prefix)) {}

    std::string next();

    /// Makes sure future ids sort after `existing` (used when reloading a store).
    void observe(std::string_view existing);

    const std::string& prefix() const { return prefix_; }

private:
    std::string prefix_;
    std::uint64_t last_ = 0;
    std::mutex mutex_;
};

} // namespace fnfleet
