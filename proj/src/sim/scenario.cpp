#include <fnfleet/sim/scenario.hpp>

#include <fnfleet/common/error.hpp>
#include <fnfleet/registry/codec.hpp>
#include <fnfleet/sim/bundled.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace fnfleet::sim {

using nlohmann::json;

namespace {

const std::set<std::string> kEventTypes{"motion", "sample",  "series",  "assign", "stop",       "restart",
                                        "crash",  "probe",   "offline", "online", "delete_rule"};

// Events whose "device" must name a declared device.
const std::set<std::string> kDeviceEvents{"motion", "sample", "series",  "assign", "stop",
                                          "restart", "crash", "probe", "offline", "online"};

double number_or(const json& j, const char* key, double fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j.at(key).is_number()) {
        throw ValidationError(std::string("'") + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

} // namespace

Scenario parse_scenario(const json& j)
{
    if (!j.is_object()) {
        throw ValidationError("scenario must be a JSON object");
    }
    Scenario s;
    try {
        s.name = j.value("name", "scenario");
        s.seed = j.value("seed", std::uint64_t{0});

        std::set<std::string> device_names;
        std::set<std::string> addresses;
        for (const auto& d : j.value("devices", json::array())) {
            DeviceSpec spec;
            spec.name = d.at("name").get<std::string>();
            spec.address = d.at("address").get<std::string>();
            registry::Address::parse(spec.address);
            spec.capabilities = d.value("capabilities", std::vector<std::string>{});
            for (const auto& c : spec.capabilities) {
                registry::Capability::parse(c);
            }
            spec.boot_at = number_or(d, "boot_at", 0);
            spec.flush_interval = number_or(d, "flush_interval", 1);
            spec.base_dir = d.value("base_dir", "/opt/fnfleet");
            if (spec.boot_at < 0 || !(spec.flush_interval > 0)) {
                throw ValidationError("device " + spec.name + ": boot_at must be >= 0 and flush_interval > 0");
            }
            if (!device_names.insert(spec.name).second) {
                throw ValidationError("duplicate device name " + spec.name);
            }
            if (!addresses.insert(spec.address).second) {
                throw ValidationError("duplicate device address " + spec.address);
            }
            s.devices.push_back(std::move(spec));
        }

        std::set<std::string> function_keys;
        for (const auto& f : j.value("functions", json::array())) {
            FunctionSpec spec;
            if (f.contains("bundled")) {
                auto bundled_key = f.at("bundled").get<std::string>();
                auto draft = bundled_function(bundled_key);
                if (!draft) {
                    throw ValidationError("unknown bundled function " + bundled_key);
                }
                spec.key = f.value("key", bundled_key);
                spec.draft = *draft;
            } else {
                spec.draft = registry::function_draft_from_json(f);
                spec.key = f.value("key", spec.draft.name);
            }
            if (!function_keys.insert(spec.key).second) {
                throw ValidationError("duplicate function key " + spec.key);
            }
            s.functions.push_back(std::move(spec));
        }

        for (const auto& a : j.value("autodeploy", json::array())) {
            AutoDeploySpec spec;
            spec.capabilities = a.value("capabilities", std::vector<std::string>{});
            spec.function = a.at("function").get<std::string>();
            spec.bindings = a.value("bindings", json::object());
            if (!function_keys.count(spec.function)) {
                throw ValidationError("autodeploy rule names unknown function " + spec.function);
            }
            s.autodeploy.push_back(std::move(spec));
        }

        std::set<std::string> rule_names;
        for (const auto& r : j.value("rules", json::array())) {
            RuleSpec spec;
            spec.name = r.at("name").get<std::string>();
            spec.install_at = number_or(r, "install_at", 0);
            spec.body = r;
            spec.body.erase("name");
            spec.body.erase("install_at");
            if (!rule_names.insert(spec.name).second) {
                throw ValidationError("duplicate rule name " + spec.name);
            }
            s.rules.push_back(std::move(spec));
        }

        double last = 0;
        for (const auto& e : j.value("events", json::array())) {
            EventSpec spec;
            spec.at = number_or(e, "at", 0);
            spec.type = e.at("type").get<std::string>();
            spec.data = e;
            if (!kEventTypes.count(spec.type)) {
                throw ValidationError("unknown event type " + spec.type);
            }
            if (spec.at < last) {
                throw ValidationError("event times must be non-decreasing");
            }
            last = spec.at;
            if (kDeviceEvents.count(spec.type)) {
                auto device = e.at("device").get<std::string>();
                if (!device_names.count(device)) {
                    throw ValidationError("event refers to undeclared device " + device);
                }
            }
            if ((spec.type == "assign" || spec.type == "crash" || spec.type == "stop") &&
                !function_keys.count(e.at("function").get<std::string>())) {
                throw ValidationError("event refers to undeclared function " + e.at("function").get<std::string>());
            }
            if (spec.type == "delete_rule" && !rule_names.count(e.at("rule").get<std::string>())) {
                throw ValidationError("event refers to undeclared rule " + e.at("rule").get<std::string>());
            }
            s.events.push_back(std::move(spec));
        }
        s.run_until = number_or(j, "run_until", last + 10);
        if (s.run_until < last) {
            throw ValidationError("run_until is before the last event");
        }
        s.expect = j.value("expect", json::object());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed scenario: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read scenario " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto parsed = json::parse(buffer.str(), nullptr, false);
    if (parsed.is_discarded()) {
        throw ValidationError("scenario " + file.string() + " is not valid JSON");
    }
    return parse_scenario(parsed);
}

} // namespace fnfleet::sim
