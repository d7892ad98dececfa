#include <fnfleet/common/time.hpp>

#include <fnfleet/common/error.hpp>

#include <cmath>
#include <cstdio>

namespace fnfleet {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count)
{
    if (pos + count > text.size()) {
        throw ValidationError("timestamp truncated: " + std::string(text));
    }
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        char c = text[i];
        if (c < '0' || c > '9') {
            throw ValidationError("timestamp has non-digit at " + std::to_string(i) + ": " + std::string(text));
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c)
{
    if (pos >= text.size() || text[pos] != c) {
        throw ValidationError("malformed timestamp: " + std::string(text));
    }
}

} // namespace

Timestamp wall_now()
{
    return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());
}

std::string format_iso8601(Timestamp t)
{
    using namespace std::chrono;
    auto day = floor<days>(t);
    year_month_day ymd{day};
    hh_mm_ss<Duration> tod{t - day};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
    return buf;
}

Timestamp parse_iso8601(std::string_view text)
{
    using namespace std::chrono;
    int y = parse_digits(text, 0, 4);
    expect_char(text, 4, '-');
    int mo = parse_digits(text, 5, 2);
    expect_char(text, 7, '-');
    int d = parse_digits(text, 8, 2);
    expect_char(text, 10, 'T');
    int h = parse_digits(text, 11, 2);
    expect_char(text, 13, ':');
    int mi = parse_digits(text, 14, 2);
    expect_char(text, 16, ':');
    int s = parse_digits(text, 17, 2);
    std::size_t pos = 19;

    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int scale = 100;
        std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            millis += (text[pos] - '0') * scale;
            scale /= 10;
            ++pos;
        }
        if (pos == start) {
            throw ValidationError("empty fractional seconds: " + std::string(text));
        }
    }

    minutes offset{0};
    if (pos < text.size() && text[pos] == 'Z') {
        ++pos;
    } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        int sign = text[pos] == '+' ? 1 : -1;
        int oh = parse_digits(text, pos + 1, 2);
        expect_char(text, pos + 3, ':');
        int om = parse_digits(text, pos + 4, 2);
        offset = minutes{sign * (oh * 60 + om)};
        pos += 6;
    } else {
        throw ValidationError("timestamp lacks a zone designator: " + std::string(text));
    }
    if (pos != text.size()) {
        throw ValidationError("trailing characters in timestamp: " + std::string(text));
    }

    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
        throw ValidationError("timestamp out of range: " + std::string(text));
    }
    Timestamp result = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + Duration{millis};
    return result - offset;
}

Duration seconds_to_duration(double seconds)
{
    return Duration{static_cast<Duration::rep>(std::llround(seconds * 1000.0))};
}

double duration_to_seconds(Duration d)
{
    return static_cast<double>(d.count()) / 1000.0;
}

} // namespace fnfleet
