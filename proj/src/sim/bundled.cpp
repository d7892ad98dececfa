#include <fnfleet/sim/bundled.hpp>

#include <sstream>

namespace fnfleet::sim {

using registry::FunctionDraft;
using registry::ParamKind;
using registry::ParamSpec;

std::optional<FunctionDraft> bundled_function(std::string_view key)
{
    if (key == "motion-monitor") {
        return FunctionDraft{"motion-monitor",
                             std::string(embedded_file("motion_monitor.py")),
                             "python {file} {port} {interval}",
                             {ParamSpec{"port", ParamKind::Integer, true, std::nullopt},
                              ParamSpec{"interval", ParamKind::Integer, false, std::int64_t{10}}},
                             "py"};
    }
    if (key == "camera-recorder") {
        return FunctionDraft{"camera-recorder", std::string(embedded_file("camera_recorder.py")), "python {file}", {},
                             "py"};
    }
    if (key == "relay-control") {
        return FunctionDraft{"relay-control", std::string(embedded_file("relay_control.py")), "python {file}", {},
                             "py"};
    }
    return std::nullopt;
}

std::vector<std::string> bundled_function_keys()
{
    return {"camera-recorder", "motion-monitor", "relay-control"};
}

std::optional<SimMarker> parse_sim_marker(std::string_view source)
{
    static constexpr std::string_view kPrefix = "# fnfleet-sim:";
    std::istringstream lines{std::string(source)};
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind(kPrefix, 0) != 0) {
            continue;
        }
        std::istringstream words(line.substr(kPrefix.size()));
        SimMarker marker;
        words >> marker.behaviour;
        std::string word;
        while (words >> word) {
            if (word.rfind("args=", 0) == 0) {
                std::istringstream names(word.substr(5));
                std::string name;
                while (std::getline(names, name, ',')) {
                    if (!name.empty()) {
                        marker.args.push_back(name);
                    }
                }
            }
        }
        if (marker.behaviour.empty()) {
            return std::nullopt;
        }
        return marker;
    }
    return std::nullopt;
}

} // namespace fnfleet::sim
