#pragma once

#include "oracles/rule_oracle.hpp"

#include <fnfleet/registry/store.hpp>
#include <fnfleet/rules/rule_engine.hpp>

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace fnfleet::testing {

struct SweepReport {
    std::size_t configurations = 0;
    std::size_t events = 0;
    std::size_t firings = 0;
    std::size_t suppressions = 0;
    std::size_t mismatches = 0;
    std::string first_mismatch;
    double seconds = 0;
};

/// Every comparator assignment for 1..max_rules rules, each checked event by
/// event against the brute-force oracle over a random stream of `events`
/// samples. Comparing after every event covers every shorter stream too.
inline SweepReport run_rule_sweep(unsigned seed, std::size_t max_rules = 5, std::size_t events = 50)
{
    static const char* ops[] = {"<", "<=", ">", ">=", "=", "!="};
    auto started = std::chrono::steady_clock::now();
    SweepReport report;
    std::size_t config_index = 0;

    for (std::size_t r = 1; r <= max_rules; ++r) {
        std::size_t combos = 1;
        for (std::size_t i = 0; i < r; ++i) {
            combos *= 6;
        }
        for (std::size_t combo = 0; combo < combos; ++combo, ++config_index) {
            std::mt19937 rng(seed + static_cast<unsigned>(config_index));
            std::vector<oracle::OracleRule> oracle_rules;
            std::size_t digits = combo;
            for (std::size_t k = 0; k < r; ++k) {
                oracle::OracleRule rule;
                rule.source = rng() % 4 == 0 ? "dev-b" : "dev-a";
                rule.metric = rng() % 4 == 0 ? "temp" : "motion";
                rule.op = ops[digits % 6];
                digits /= 6;
                rule.threshold = static_cast<double>(rng() % 3);
                rule.action_count = 1 + static_cast<int>(rng() % 3);
                static const std::int64_t cooldowns[] = {0, 0, 1000, 2500, 5000};
                rule.cooldown_ms = cooldowns[rng() % 5];
                oracle_rules.push_back(rule);
            }

            std::vector<oracle::OracleEvent> stream;
            std::int64_t t = 1'700'000'000'000;
            for (std::size_t e = 0; e < events; ++e) {
                oracle::OracleEvent ev;
                ev.source = rng() % 5 == 0 ? "dev-b" : "dev-a";
                ev.metric = rng() % 5 == 0 ? "temp" : "motion";
                ev.value = static_cast<double>(rng() % 4) - (rng() % 7 == 0 ? 0.5 : 0.0);
                auto step = static_cast<std::int64_t>(rng() % 1500);
                if (rng() % 20 == 0) {
                    step = -step; // a late sample
                }
                t += step;
                ev.time_ms = t;
                stream.push_back(ev);
            }

            rules::RuleEngine engine(std::make_shared<registry::MemoryStore>());
            std::map<std::string, std::size_t> index_of;
            for (std::size_t k = 0; k < oracle_rules.size(); ++k) {
                const auto& o = oracle_rules[k];
                rules::InteropRule draft;
                draft.condition = {o.source, o.metric, rules::parse_comparator(o.op), o.threshold};
                for (int a = 0; a < o.action_count; ++a) {
                    draft.actions.push_back(rules::Notify{"n" + std::to_string(a)});
                }
                draft.cooldown = Duration{o.cooldown_ms};
                auto created = engine.create_rule(draft, [](const std::string&) { return true; });
                index_of[created.id] = k;
            }

            auto expected = oracle::run_rule_oracle(oracle_rules, stream);
            std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> want_fired;
            std::map<std::size_t, std::vector<std::size_t>> want_suppressed;
            for (const auto& f : expected.fired) {
                want_fired[f.event].emplace_back(f.rule, f.action);
            }
            for (const auto& s : expected.suppressed) {
                want_suppressed[s.event].push_back(s.rule);
            }

            for (std::size_t e = 0; e < stream.size(); ++e) {
                const auto& ev = stream[e];
                rules::TelemetryEvent event{ev.source, ev.metric, ev.value, Timestamp{Duration{ev.time_ms}}};
                auto got = engine.evaluate(event);
                std::vector<std::pair<std::size_t, std::size_t>> fired;
                for (const auto& f : got.fired) {
                    fired.emplace_back(index_of.at(f.rule_id), f.action_index);
                }
                std::vector<std::size_t> suppressed;
                for (const auto& id : got.suppressed) {
                    suppressed.push_back(index_of.at(id));
                }
                auto want_f = want_fired[e];
                auto want_s = want_suppressed[e];
                std::sort(fired.begin(), fired.end());
                std::sort(want_f.begin(), want_f.end());
                std::sort(suppressed.begin(), suppressed.end());
                std::sort(want_s.begin(), want_s.end());
                if (fired != want_f || suppressed != want_s) {
                    if (report.mismatches == 0) {
                        std::ostringstream msg;
                        msg << "rules=" << r << " combo=" << combo << " event=" << e << " fired " << fired.size()
                            << " vs " << want_f.size() << ", suppressed " << suppressed.size() << " vs "
                            << want_s.size();
                        report.first_mismatch = msg.str();
                    }
                    ++report.mismatches;
                }
                report.firings += fired.size();
                report.suppressions += suppressed.size();
                ++report.events;
            }
            ++report.configurations;
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

} // namespace fnfleet::testing
