#include <doctest.h>

#include <fnfleet/common/error.hpp>
#include <fnfleet/common/filesystem.hpp>
#include <fnfleet/common/ids.hpp>
#include <fnfleet/common/process.hpp>
#include <fnfleet/common/time.hpp>

#include <filesystem>
#include <set>
#include <thread>

using namespace fnfleet;

TEST_CASE("iso-8601 timestamps round-trip with millisecond precision")
{
    auto t = parse_iso8601("2024-03-05T07:08:09.123Z");
    CHECK(format_iso8601(t) == "2024-03-05T07:08:09.123Z");
    CHECK(format_iso8601(parse_iso8601("2024-03-05T07:08:09Z")) == "2024-03-05T07:08:09.000Z");
    // 1,709,622,489 s since the epoch, computed independently with `date -u -d`
    CHECK(t.time_since_epoch().count() == 1709622489123LL);
}

TEST_CASE("iso-8601 offsets are normalised to UTC")
{
    CHECK(parse_iso8601("2024-03-05T09:08:09.000+02:00") == parse_iso8601("2024-03-05T07:08:09.000Z"));
    CHECK(parse_iso8601("2024-03-04T23:38:09.000-07:30") == parse_iso8601("2024-03-05T07:08:09.000Z"));
}

TEST_CASE("malformed timestamps are rejected")
{
    for (const char* bad : {"", "2024-03-05", "2024-03-05T07:08:09", "2024-13-05T07:08:09Z", "2024-02-30T00:00:00Z",
                            "2024-03-05T25:00:00Z", "yesterday", "2024-03-05T07:08:09.Z"}) {
        CAPTURE(std::string(bad));
        CHECK_THROWS_AS(parse_iso8601(bad), ValidationError);
    }
}

TEST_CASE("sub-millisecond digits are truncated")
{
    CHECK(format_iso8601(parse_iso8601("2024-03-05T07:08:09.123987Z")) == "2024-03-05T07:08:09.123Z");
}

TEST_CASE("seconds convert to millisecond durations")
{
    CHECK(seconds_to_duration(5) == Duration{5000});
    CHECK(seconds_to_duration(0.25) == Duration{250});
    CHECK(duration_to_seconds(Duration{1500}) == doctest::Approx(1.5));
}

TEST_CASE("id sequences are fixed width and ordered")
{
    IdSequence ids("dep");
    auto a = ids.next();
    auto b = ids.next();
    CHECK(a == "dep-000001");
    CHECK(b == "dep-000002");
    CHECK(a < b);

    IdSequence reloaded("dep");
    reloaded.observe("dep-000041");
    reloaded.observe("dep-000007");
    reloaded.observe("fn-000099");
    CHECK(reloaded.next() == "dep-000042");
}

TEST_CASE("id sequences stay unique under concurrent use")
{
    IdSequence ids("x");
    std::vector<std::vector<std::string>> seen(4);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 500; ++i) {
                seen[t].push_back(ids.next());
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    std::set<std::string> all;
    for (const auto& list : seen) {
        all.insert(list.begin(), list.end());
    }
    CHECK(all.size() == 2000);
}

TEST_CASE("memory filesystem stores, overwrites and lists by prefix")
{
    MemoryFilesystem fs;
    fs.write("/opt/a/x", "1");
    fs.write("/opt/a/y", "2");
    fs.write("/opt/b/z", "3");
    fs.write("/opt/a/x", "one");
    CHECK(fs.read("/opt/a/x") == std::optional<std::string>("one"));
    CHECK_FALSE(fs.read("/missing").has_value());
    CHECK(fs.exists("/opt/b/z"));
    CHECK(fs.list("/opt/a/") == std::vector<std::string>{"/opt/a/x", "/opt/a/y"});
}

TEST_CASE("disk filesystem maps device paths under its root")
{
    auto root = std::filesystem::temp_directory_path() / "fnfleet-test-diskfs";
    std::filesystem::remove_all(root);
    DiskFilesystem fs(root);
    fs.write("/opt/fn/a.py", std::string("print(1)\n\0bin", 13));
    CHECK(std::filesystem::exists(root / "opt/fn/a.py"));
    CHECK(fs.read("/opt/fn/a.py")->size() == 13);
    CHECK(fs.list("/opt/fn/") == std::vector<std::string>{"/opt/fn/a.py"});
    std::filesystem::remove_all(root);
}

TEST_CASE("processes run to completion with stdin and captured output")
{
    auto result = run_process("/bin/sh", {"-c", "cat; echo err >&2; exit 3"}, "hello");
    CHECK(result.exit_code == 3);
    CHECK(result.out == "hello");
    CHECK(result.err == "err\n");
}

TEST_CASE("every error code has a distinct name")
{
    std::set<std::string_view> names;
    for (int code = 0; code <= static_cast<int>(ErrorCode::Usage); ++code) {
        names.insert(to_string(static_cast<ErrorCode>(code)));
    }
    CHECK(names.size() == static_cast<std::size_t>(ErrorCode::Usage) + 1);
    NotFound e("gone");
    CHECK(e.code() == ErrorCode::NotFound);
    CHECK(std::string(e.what()) == "gone");
}
