#include <doctest.h>

#include "oracles/rule_oracle.hpp"
#include "oracles/telemetry_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/rule_sweep.hpp"

#include <fnfleet/common/error.hpp>
#include <fnfleet/net/sim_network.hpp>
#include <fnfleet/registry/store.hpp>
#include <fnfleet/rules/dispatcher.hpp>
#include <fnfleet/rules/pipeline.hpp>
#include <fnfleet/rules/rule.hpp>
#include <fnfleet/rules/rule_engine.hpp>
#include <fnfleet/rules/telemetry.hpp>

#include <cmath>
#include <random>
#include <set>
#include <thread>

using namespace fnfleet;
using namespace fnfleet::rules;
using nlohmann::json;
using fnfleet::testing::ManualClock;

namespace {

Timestamp at(double seconds)
{
    return parse_iso8601("2024-01-01T00:00:00Z") + seconds_to_duration(seconds);
}

auto always = [](const std::string&) { return true; };

InteropRule motion_rule(double cooldown_s = 0)
{
    InteropRule rule;
    rule.condition = {"dev-000001", "motion", Comparator::Equal, 1};
    rule.actions = {DeviceInvoke{"dev-000001", "record", json{{"duration", 5}}},
                    DeviceInvoke{"dev-000002", "record", json{{"duration", 5}}}, Notify{"motion at {device}"}};
    rule.cooldown = seconds_to_duration(cooldown_s);
    return rule;
}

TelemetryBatch batch(const std::string& device, const std::string& metric, std::vector<std::pair<double, double>> tv)
{
    TelemetryBatch b;
    b.device_id = device;
    b.metric = metric;
    for (auto [t, v] : tv) {
        b.samples.push_back(Sample{at(t), v});
    }
    return b;
}

/// Agents and a webhook on a simulated network, recording what they receive.
struct Endpoints {
    net::SimNetwork network;
    std::vector<std::pair<std::string, json>> received; // target, body
    std::mutex mutex;

    Endpoints()
    {
        for (const char* a : {"10.0.0.11:9000", "10.0.0.12:9000", "notifier:9999"}) {
            std::string address = a;
            network.attach(address, [this, address](const net::Request& r) {
                std::lock_guard lock(mutex);
                received.emplace_back(address + r.path, json::parse(r.body));
                return net::Response{200, R"({"status":"ok","detail":"done"})"};
            });
        }
    }

    AddressResolver resolver()
    {
        return [](const std::string& id) -> std::optional<std::string> {
            if (id == "dev-000001") return "10.0.0.11:9000";
            if (id == "dev-000002") return "10.0.0.12:9000";
            return std::nullopt;
        };
    }
};

} // namespace

TEST_CASE("comparators follow their mathematical meaning")
{
    struct Row {
        Comparator c;
        bool below, equal, above;
    };
    for (const auto& row : {Row{Comparator::Less, true, false, false}, Row{Comparator::LessEqual, true, true, false},
                            Row{Comparator::Greater, false, false, true},
                            Row{Comparator::GreaterEqual, false, true, true},
                            Row{Comparator::Equal, false, true, false}, Row{Comparator::NotEqual, true, false, true}}) {
        CHECK(holds(row.c, 1, 2) == row.below);
        CHECK(holds(row.c, 2, 2) == row.equal);
        CHECK(holds(row.c, 3, 2) == row.above);
        CHECK(parse_comparator(to_string(row.c)) == row.c);
    }
    CHECK(parse_comparator("≤") == Comparator::LessEqual);
    CHECK(parse_comparator("≥") == Comparator::GreaterEqual);
    CHECK(parse_comparator("≠") == Comparator::NotEqual);
    CHECK(parse_comparator("==") == Comparator::Equal);
    CHECK_THROWS_AS(parse_comparator("=<"), ValidationError);
}

TEST_CASE("rules are validated")
{
    auto ok = motion_rule();
    CHECK_NOTHROW(validate_rule(ok, always));

    auto no_actions = ok;
    no_actions.actions.clear();
    CHECK_THROWS_AS(validate_rule(no_actions, always), ValidationError);

    auto negative = ok;
    negative.cooldown = Duration{-1};
    CHECK_THROWS_AS(validate_rule(negative, always), ValidationError);

    auto no_metric = ok;
    no_metric.condition.metric.clear();
    CHECK_THROWS_AS(validate_rule(no_metric, always), ValidationError);

    CHECK_THROWS_AS(validate_rule(ok, [](const std::string& id) { return id != "dev-000002"; }), ValidationError);

    auto bad_placeholder = ok;
    bad_placeholder.actions = {Notify{"hello {user}"}};
    CHECK_THROWS_AS(validate_rule(bad_placeholder, always), ValidationError);
}

TEST_CASE("notification templates substitute event fields")
{
    TelemetryEvent ev{"dev-000001", "temp", 21.5, at(3)};
    CHECK(render_message("{device} {metric}={value} at {timestamp}", ev) ==
          "dev-000001 temp=21.5 at 2024-01-01T00:00:03.000Z");
    CHECK(render_message("no fields", ev) == "no fields");
}

TEST_CASE("rules round-trip through json with cooldown in seconds")
{
    auto rule = motion_rule(5);
    rule.id = "rule-000001";
    json j = rule;
    CHECK(j["cooldown"] == 5.0);
    CHECK(j["condition"]["comparator"] == "=");
    CHECK(rule_from_json(j) == rule);

    auto minimal = rule_from_json(json::parse(R"({
        "condition": {"source_device_id": "d", "metric": "m", "comparator": "≥", "threshold": 2},
        "actions": [{"type": "notify", "message_template": "x"}]})"));
    CHECK(minimal.cooldown == Duration{0});
    CHECK(minimal.condition.comparator == Comparator::GreaterEqual);
    CHECK_THROWS_AS(rule_from_json(json::parse(R"({"condition": {}, "actions": []})")), ValidationError);
    CHECK_THROWS_AS(rule_from_json(json::parse(R"({
        "condition": {"source_device_id": "d", "metric": "m", "comparator": "<", "threshold": "2"},
        "actions": [{"type": "notify", "message_template": "x"}]})")),
                    ValidationError);
    CHECK_THROWS_AS(action_from_json(json{{"type", "email"}}), ValidationError);
}

TEST_CASE("a matching event fires every action in declared order")
{
    RuleEngine engine(std::make_shared<registry::MemoryStore>());
    auto rule = engine.create_rule(motion_rule(), always);
    CHECK(rule.id == "rule-000001");
    auto eval = engine.evaluate({"dev-000001", "motion", 1, at(10)});
    REQUIRE(eval.fired.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(eval.fired[i].rule_id == rule.id);
        CHECK(eval.fired[i].action_index == i);
    }
    CHECK(engine.evaluate({"dev-000001", "motion", 0, at(11)}).fired.empty());
    CHECK(engine.evaluate({"dev-000002", "motion", 1, at(12)}).fired.empty());
    CHECK(engine.evaluate({"dev-000001", "temp", 1, at(13)}).fired.empty());
}

TEST_CASE("cooldown suppresses firings until it has elapsed")
{
    RuleEngine engine(std::make_shared<registry::MemoryStore>());
    auto rule = engine.create_rule(motion_rule(5), always);
    CHECK(engine.evaluate({"dev-000001", "motion", 1, at(10)}).fired.size() == 3);
    for (double t : {11.0, 12.0, 13.0, 14.999}) {
        auto eval = engine.evaluate({"dev-000001", "motion", 1, at(t)});
        CHECK(eval.fired.empty());
        CHECK(eval.suppressed == std::vector<std::string>{rule.id});
    }
    CHECK(engine.evaluate({"dev-000001", "motion", 1, at(15)}).fired.size() == 3);
}

TEST_CASE("zero cooldown never suppresses")
{
    RuleEngine engine(std::make_shared<registry::MemoryStore>());
    engine.create_rule(motion_rule(0), always);
    for (int i = 0; i < 5; ++i) {
        auto eval = engine.evaluate({"dev-000001", "motion", 1, at(10)});
        CHECK(eval.fired.size() == 3);
        CHECK(eval.suppressed.empty());
    }
}

TEST_CASE("rules evaluate in creation order and deleted rules stop firing")
{
    RuleEngine engine(std::make_shared<registry::MemoryStore>());
    InteropRule a = motion_rule();
    a.actions = {Notify{"a"}};
    InteropRule b = motion_rule();
    b.actions = {Notify{"b"}};
    auto ra = engine.create_rule(a, always);
    auto rb = engine.create_rule(b, always);
    auto eval = engine.evaluate({"dev-000001", "motion", 1, at(1)});
    REQUIRE(eval.fired.size() == 2);
    CHECK(eval.fired[0].rule_id == ra.id);
    CHECK(eval.fired[1].rule_id == rb.id);

    engine.delete_rule(ra.id);
    CHECK_THROWS_AS(engine.get_rule(ra.id), NotFound);
    CHECK_THROWS_AS(engine.delete_rule(ra.id), NotFound);
    eval = engine.evaluate({"dev-000001", "motion", 1, at(2)});
    REQUIRE(eval.fired.size() == 1);
    CHECK(eval.fired[0].rule_id == rb.id);
}

TEST_CASE("rules persist and reload from the store")
{
    auto store = std::make_shared<registry::MemoryStore>();
    std::vector<InteropRule> created;
    {
        RuleEngine engine(store);
        created.push_back(engine.create_rule(motion_rule(5), always));
        created.push_back(engine.create_rule(motion_rule(0), always));
        engine.delete_rule(created[0].id);
    }
    RuleEngine reloaded(store);
    CHECK(reloaded.list_rules() == std::vector<InteropRule>{created[1]});
    CHECK(reloaded.create_rule(motion_rule(), always).id == "rule-000003");
}

TEST_CASE("the engine matches the brute-force evaluator on a reduced sweep")
{
    auto report = fnfleet::testing::run_rule_sweep(99, 3, 50);
    CHECK(report.configurations == 6 + 36 + 216);
    CHECK(report.mismatches == 0);
    INFO(report.first_mismatch);
    CHECK(report.firings > 0);
    CHECK(report.suppressions > 0);
}

TEST_CASE("the oracle itself behaves on a hand-worked stream")
{
    using namespace fnfleet::oracle;
    std::vector<OracleRule> rules = {{"d", "m", "=", 1, 2, 5000}};
    std::vector<OracleEvent> events = {{"d", "m", 1, 10000}, {"d", "m", 1, 11000}, {"d", "m", 0, 12000},
                                       {"d", "m", 1, 15000}, {"x", "m", 1, 15000}};
    auto r = run_rule_oracle(rules, events);
    REQUIRE(r.fired.size() == 4);
    CHECK(r.fired[0].event == 0);
    CHECK(r.fired[2].event == 3);
    REQUIRE(r.suppressed.size() == 1);
    CHECK(r.suppressed[0].event == 1);
}

TEST_CASE("firings of one rule are at least a cooldown apart")
{
    std::mt19937 rng(21);
    for (int round = 0; round < 50; ++round) {
        RuleEngine engine(std::make_shared<registry::MemoryStore>());
        double cooldown = static_cast<double>(rng() % 6);
        auto rule = motion_rule(cooldown);
        rule.condition.comparator = Comparator::GreaterEqual;
        rule.actions = {Notify{"x"}};
        engine.create_rule(rule, always);
        double t = 0;
        std::vector<double> fired_at;
        for (int i = 0; i < 60; ++i) {
            t += static_cast<double>(rng() % 2000) / 1000.0;
            if (!engine.evaluate({"dev-000001", "motion", static_cast<double>(rng() % 2), at(t)}).fired.empty()) {
                fired_at.push_back(t);
            }
        }
        for (std::size_t i = 1; i < fired_at.size(); ++i) {
            CHECK(fired_at[i] - fired_at[i - 1] >= cooldown - 1e-9);
        }
    }
}

TEST_CASE("telemetry batches are validated and parsed")
{
    CHECK_NOTHROW(validate_batch(batch("d", "m", {{1, 0}, {1, 1}, {2, 0}})));
    CHECK_THROWS_AS(validate_batch(batch("d", "", {{1, 0}})), MalformedBatch);
    CHECK_THROWS_AS(validate_batch(batch("d", "m", {{2, 0}, {1, 0}})), MalformedBatch);
    CHECK_THROWS_AS(validate_batch(batch("d", "m", {{1, std::nan("")}})), MalformedBatch);

    auto parsed = batch_from_json(json::parse(R"({"device_id": "dev-000001", "metric": "motion",
        "samples": [{"timestamp": "2024-01-01T00:00:01Z", "value": 1}]})"));
    CHECK(parsed.samples.size() == 1);
    CHECK(parsed.samples[0].timestamp == at(1));
    for (const char* bad : {R"({"metric": "m", "samples": []})", R"({"device_id": "d", "samples": []})",
                            R"({"device_id": "d", "metric": "m", "samples": [{"value": 1}]})",
                            R"({"device_id": "d", "metric": "m", "samples": [{"timestamp": "x", "value": 1}]})",
                            R"({"device_id": "d", "metric": "m", "samples": [{"timestamp": "2024-01-01T00:00:01Z", "value": "1"}]})",
                            R"([1, 2])"}) {
        CAPTURE(std::string(bad));
        CHECK_THROWS_AS(batch_from_json(json::parse(bad)), MalformedBatch);
    }
}

TEST_CASE("telemetry range queries agree with a linear scan")
{
    auto store = std::make_shared<registry::MemoryStore>();
    TelemetryStore telemetry(store);
    oracle::TelemetryScan scan;
    std::mt19937 rng(8);
    const std::vector<std::string> devices = {"dev-1", "dev-2"};
    const std::vector<std::string> metrics = {"motion", "temp"};
    for (int b = 0; b < 60; ++b) {
        TelemetryBatch tb;
        tb.device_id = devices[rng() % 2];
        tb.metric = metrics[rng() % 2];
        std::int64_t t = static_cast<std::int64_t>(rng() % 100) * 1000;
        int n = static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            t += static_cast<std::int64_t>(rng() % 3) * 500;
            double v = static_cast<double>(rng() % 100);
            tb.samples.push_back(Sample{Timestamp{Duration{t}}, v});
            scan.add({tb.device_id, tb.metric, t, v});
        }
        CHECK(telemetry.append(tb) == static_cast<std::size_t>(n));
    }
    auto check_all = [&](const TelemetryStore& ts) {
        for (int q = 0; q < 200; ++q) {
            auto d = devices[rng() % 2];
            auto m = metrics[rng() % 2];
            std::int64_t from = static_cast<std::int64_t>(rng() % 110) * 1000;
            std::int64_t to = from + static_cast<std::int64_t>(rng() % 40) * 1000;
            auto got = ts.query(d, m, Timestamp{Duration{from}}, Timestamp{Duration{to}});
            auto want = scan.query(d, m, from, to);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].timestamp.time_since_epoch().count() == want[i].time_ms);
                CHECK(got[i].value == want[i].value);
            }
        }
    };
    check_all(telemetry);
    // the same series rebuilt from persisted batches
    TelemetryStore reloaded(store);
    CHECK(reloaded.total_samples() == telemetry.total_samples());
    check_all(reloaded);
}

TEST_CASE("dispatch delivers invocations and notifications")
{
    Endpoints ep;
    ActionDispatcher dispatcher(ep.network, ep.resolver(), "http://notifier:9999/notify");
    TelemetryEvent ev{"dev-000001", "motion", 1, at(10)};

    auto invoke = dispatcher.dispatch({"rule-000001", 0, DeviceInvoke{"dev-000002", "record", {{"duration", 5}}}, ev});
    CHECK(invoke.status == OutcomeStatus::Delivered);
    CHECK(invoke.detail == "done");
    CHECK(invoke.fired_at == at(10));

    auto note = dispatcher.dispatch({"rule-000001", 2, Notify{"motion at {device}"}, ev});
    CHECK(note.status == OutcomeStatus::Delivered);

    REQUIRE(ep.received.size() == 2);
    CHECK(ep.received[0].first == "10.0.0.12:9000/actions");
    CHECK(ep.received[0].second == json{{"action", "record"}, {"params", {{"duration", 5}}}});
    CHECK(ep.received[1].first == "notifier:9999/notify");
    CHECK(ep.received[1].second ==
          json{{"text", "motion at dev-000001"}, {"fired_at", "2024-01-01T00:00:10.000Z"}, {"rule_id", "rule-000001"}});
}

TEST_CASE("dispatch failures become failed outcomes")
{
    Endpoints ep;
    ep.network.attach("10.0.0.12:9000", [](const net::Request&) {
        return net::Response{500, R"({"status":"failed","detail":"handler failed: disk full"})"};
    });
    TelemetryEvent ev{"dev-000001", "motion", 1, at(10)};

    ActionDispatcher dispatcher(ep.network, ep.resolver(), "http://notifier:9999/notify");
    auto rejected = dispatcher.dispatch({"r", 0, DeviceInvoke{"dev-000002", "record", json::object()}, ev});
    CHECK(rejected.status == OutcomeStatus::Failed);
    CHECK(rejected.detail.rfind("status 500", 0) == 0);

    auto unknown = dispatcher.dispatch({"r", 0, DeviceInvoke{"dev-000009", "record", json::object()}, ev});
    CHECK(unknown.status == OutcomeStatus::Failed);

    ep.network.set_down("10.0.0.11:9000", true);
    auto down = dispatcher.dispatch({"r", 0, DeviceInvoke{"dev-000001", "record", json::object()}, ev});
    CHECK(down.status == OutcomeStatus::Failed);
    CHECK(down.detail.rfind("connection error", 0) == 0);

    ActionDispatcher silent(ep.network, ep.resolver(), "");
    auto none = silent.dispatch({"r", 0, Notify{"x"}, ev});
    CHECK(none.status == OutcomeStatus::Failed);
    CHECK(none.detail == "no notifier configured");

    CHECK(to_string(OutcomeStatus::Delivered) == "delivered");
    json j = none;
    CHECK(j["status"] == "failed");
}

TEST_CASE("ingest stores, evaluates and dispatches")
{
    Endpoints ep;
    ManualClock clock;
    auto registered = [](const std::string& id) { return id == "dev-000001" || id == "dev-000002"; };
    TelemetryPipeline pipeline(std::make_shared<registry::MemoryStore>(), ep.network, registered, ep.resolver(),
                               "http://notifier:9999/notify", clock.source());
    pipeline.create_rule(motion_rule(5));
    std::vector<ActionOutcome> observed;
    pipeline.set_outcome_observer([&](const ActionOutcome& o) { observed.push_back(o); });

    auto report = pipeline.ingest_telemetry(batch("dev-000001", "motion", {{10, 1}, {11, 1}, {12, 1}, {13, 0}, {14, 1}}));
    CHECK(report.stored == 5);
    CHECK(report.outcomes.size() == 3);
    CHECK(report.suppressed == 3);
    CHECK(observed.size() == 3);
    CHECK(pipeline.outcomes().size() == 3);
    REQUIRE(pipeline.suppressions().size() == 3);
    CHECK(pipeline.suppressions()[0].event_time == at(11));
    CHECK(pipeline.query_telemetry("dev-000001", "motion", at(0), at(100)).size() == 5);

    CHECK_THROWS_AS(pipeline.ingest_telemetry(batch("dev-000009", "motion", {{1, 1}})), UnknownDevice);
    CHECK_THROWS_AS(pipeline.ingest_telemetry(batch("dev-000001", "motion", {{2, 1}, {1, 1}})), MalformedBatch);
    CHECK_THROWS_AS(pipeline.query_telemetry("dev-000009", "motion", at(0), at(1)), UnknownDevice);
    CHECK_THROWS_AS(pipeline.create_rule([] {
        auto r = motion_rule();
        r.actions = {DeviceInvoke{"dev-000077", "record", json::object()}};
        return r;
    }()),
                    ValidationError);
}

TEST_CASE("a deleted rule does not fire when the same stream is replayed")
{
    Endpoints ep;
    ManualClock clock;
    TelemetryPipeline pipeline(std::make_shared<registry::MemoryStore>(), ep.network, always, ep.resolver(),
                               "http://notifier:9999/notify", clock.source());
    auto rule = pipeline.create_rule(motion_rule());
    auto stream = batch("dev-000001", "motion", {{1, 1}, {2, 1}});
    CHECK(pipeline.ingest_telemetry(stream).outcomes.size() == 6);
    pipeline.delete_rule(rule.id);
    auto replay = pipeline.ingest_telemetry(stream);
    CHECK(replay.stored == 2);
    CHECK(replay.outcomes.empty());
}

TEST_CASE("one device's malformed batch does not affect another's")
{
    Endpoints ep;
    ManualClock clock;
    TelemetryPipeline pipeline(std::make_shared<registry::MemoryStore>(), ep.network, always, ep.resolver(),
                               "http://notifier:9999/notify", clock.source());
    std::atomic<int> rejected{0};
    std::thread bad([&] {
        for (int i = 0; i < 200; ++i) {
            try {
                pipeline.ingest_telemetry(batch("dev-000002", "temp", {{2, 1}, {1, 1}}));
            } catch (const MalformedBatch&) {
                ++rejected;
            }
        }
    });
    std::thread good([&] {
        for (int i = 0; i < 200; ++i) {
            pipeline.ingest_telemetry(batch("dev-000001", "temp", {{static_cast<double>(i), static_cast<double>(i)}}));
        }
    });
    bad.join();
    good.join();
    CHECK(rejected == 200);
    auto series = pipeline.query_telemetry("dev-000001", "temp", at(0), at(1000));
    REQUIRE(series.size() == 200);
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(series[i].value == static_cast<double>(i));
    }
    CHECK(pipeline.query_telemetry("dev-000002", "temp", at(0), at(1000)).empty());
}

TEST_CASE("batches from one device are evaluated in arrival order")
{
    Endpoints ep;
    ManualClock clock;
    TelemetryPipeline pipeline(std::make_shared<registry::MemoryStore>(), ep.network, always, ep.resolver(),
                               "http://notifier:9999/notify", clock.source());
    InteropRule rule = motion_rule();
    rule.condition.comparator = Comparator::GreaterEqual;
    rule.condition.threshold = 0;
    rule.actions = {Notify{"{value}"}};
    pipeline.create_rule(rule);
    std::vector<std::thread> senders;
    std::mutex order_mutex;
    std::vector<double> sent_order;
    for (int s = 0; s < 4; ++s) {
        senders.emplace_back([&, s] {
            for (int i = 0; i < 25; ++i) {
                double v = s * 100 + i;
                std::lock_guard lock(order_mutex); // arrival order is what this lock admits
                sent_order.push_back(v);
                pipeline.ingest_telemetry(batch("dev-000001", "motion", {{v, v}}));
            }
        });
    }
    for (auto& t : senders) {
        t.join();
    }
    std::vector<double> delivered;
    for (const auto& [target, body] : ep.received) {
        delivered.push_back(std::stod(body["text"].get<std::string>()));
    }
    CHECK(delivered == sent_order);
}
