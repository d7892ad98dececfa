#include <fnfleet/common/ids.hpp>

#include <charconv>
#include <cstdio>

namespace fnfleet {

std::string IdSequence::next()
{
    std::lock_guard lock(mutex_);
    ++last_;
    char digits[24];
    std::snprintf(digits, sizeof(digits), "%06llu", static_cast<unsigned long long>(last_));
    return prefix_ + "-" + digits;
}

void IdSequence::observe(std::string_view existing)
{
    if (existing.size() <= prefix_.size() + 1 || existing.substr(0, prefix_.size()) != prefix_ ||
        existing[prefix_.size()] != '-') {
        return;
    }
    auto digits = existing.substr(prefix_.size() + 1);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        return;
    }
    std::lock_guard lock(mutex_);
    if (value > last_) {
        last_ = value;
    }
}

} // namespace fnfleet
