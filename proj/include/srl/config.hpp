// Scenario configs as TOML-style key-value files, plus the dotted
// `section.key=value` override syntax the CLI exposes for sweep scripting.
//
// Supported grammar (a deliberate subset of TOML):
//   # comment                     blank lines ignored
//   [section]                     flat sections, no nesting
//   [[disturbance]]               repeatable pulse tables
//   key = value                   value: number, true/false, or "string"
//
// Schema (all keys optional; unknown keys are errors):
//   preset                walk | soft_walk | press | none   (default none)
//   mode                  iic_low | iic_high | vic | passive
//   duration, seed, run_id
//   [sim]         dt_physics dt_control contact_enabled init_hip_offset
//   [torso]       height amp_x amp_z amp_pitch freq phase_z phase_pitch stationary
//   [ground]      stiffness damping ground_height friction_coeff
//   [thresholds]  contact_threshold stance_threshold
//   [scheduler]   li_b li_k hi_b hi_k sigmoid_a sigmoid_b dbmax dkmax
//   [pid]         kp ki kd integral_limit
//   [options]     torque_limit torso_feedback knee_gravity_ff
//   [model]       torso_mass torso_inertia attachment_offset gravity
//   [gait]        source (synth|csv) seed cycle_s fs csv
//   [classifier]  path
//   [[disturbance]] t_start t_end torque
#pragma once

#include "srl/fixtures.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace srl::config {

/// Flattened (dotted key, raw value) pairs in file order. `[[disturbance]]`
/// tables flatten to disturbance.0.*, disturbance.1.*, ...
using Entries = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double p_double(const std::string& key, const std::string& raw) {
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0')
        throw ConfigError("config: key '" + key + "' expects a number, got '" + raw + "'");
    return v;
}

inline std::uint64_t p_u64(const std::string& key, const std::string& raw) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0')
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + raw +
                          "'");
    return v;
}

inline bool p_bool(const std::string& key, const std::string& raw) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError("config: key '" + key + "' expects true/false, got '" + raw + "'");
}

inline std::string p_string(const std::string& key, const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        return raw.substr(1, raw.size() - 2);
    if (!raw.empty() && raw.front() == '"')
        throw ConfigError("config: key '" + key + "' has an unterminated string");
    return raw;
}

} // namespace detail

/// Parse config text into flattened entries. Line numbers are reported in
/// errors; values keep their raw token form for typed parsing later.
inline Entries parse_config_text(const std::string& text) {
    Entries out;
    std::istringstream in(text);
    std::string line, section;
    std::map<std::string, int> table_counts;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            const bool table_array = s.size() > 1 && s[1] == '[';
            const std::string close = table_array ? "]]" : "]";
            const std::size_t end = s.find(close);
            if (end == std::string::npos || end + close.size() != s.size())
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(line_no));
            std::string name = detail::trim(s.substr(table_array ? 2 : 1,
                                                     end - (table_array ? 2 : 1)));
            if (name.empty())
                throw ConfigError("config: empty section name at line " +
                                  std::to_string(line_no));
            if (table_array)
                section = name + "." + std::to_string(table_counts[name]++);
            else
                section = name;
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " +
                              std::to_string(line_no));
        const std::string key = detail::trim(s.substr(0, eq));
        std::string value = detail::trim(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: empty key at line " + std::to_string(line_no));
        if (!value.empty() && value.front() == '"') {
            const std::size_t endq = value.find('"', 1);
            if (endq == std::string::npos)
                throw ConfigError("config: unterminated string at line " +
                                  std::to_string(line_no));
            value = value.substr(0, endq + 1);
        } else {
            const std::size_t hash = value.find('#');
            if (hash != std::string::npos) value = detail::trim(value.substr(0, hash));
        }
        if (value.empty())
            throw ConfigError("config: empty value at line " + std::to_string(line_no));
        out.emplace_back(section.empty() ? key : section + "." + key, value);
    }
    return out;
}

inline Entries load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Append CLI overrides of the form `key=value` or `section.key=value`.
inline void apply_overrides(Entries& entries, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const std::size_t eq = o.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("config: override '" + o + "' is not key=value");
        entries.emplace_back(detail::trim(o.substr(0, eq)),
                             detail::trim(o.substr(eq + 1)));
    }
}

inline sim::ControllerMode mode_from_string(const std::string& s) {
    if (s == "iic_low") return sim::ControllerMode::IIC_low;
    if (s == "iic_high") return sim::ControllerMode::IIC_high;
    if (s == "vic") return sim::ControllerMode::VIC;
    if (s == "passive") return sim::ControllerMode::Passive;
    throw ConfigError("config: unknown mode '" + s +
                      "' (expected iic_low|iic_high|vic|passive)");
}

/// A scenario assembled from a config file plus bookkeeping the CLI needs.
struct LoadedScenario {
    sim::Scenario scenario;
    std::string run_id = "run";
    std::string classifier_path; ///< empty unless [classifier] path was given
};

namespace detail {

/// Relative file paths inside a config refer to the config's own directory.
inline std::string resolve_path(const std::string& base_dir, const std::string& p) {
    if (base_dir.empty() || p.empty()) return p;
    const std::filesystem::path fp(p);
    if (fp.is_absolute()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
}

} // namespace detail

/// Build the scenario: the optional preset supplies a base (applied with
/// mode/duration/seed), then remaining keys override field by field in file
/// order, then CLI overrides (already appended to `entries`) land on top.
/// Relative gait.csv / classifier.path values resolve against base_dir.
inline LoadedScenario build_scenario(const Entries& entries,
                                     const std::string& base_dir = "") {
    std::optional<std::string> preset;
    std::optional<sim::ControllerMode> mode;
    std::optional<double> duration;
    std::optional<std::uint64_t> seed;
    for (const auto& [k, v] : entries) {
        if (k == "preset") preset = detail::p_string(k, v);
        else if (k == "mode") mode = mode_from_string(detail::p_string(k, v));
        else if (k == "duration") duration = detail::p_double(k, v);
        else if (k == "seed") seed = detail::p_u64(k, v);
    }

    LoadedScenario out;
    sim::Scenario& sc = out.scenario;
    const sim::ControllerMode m = mode.value_or(sim::ControllerMode::IIC_low);
    if (preset && *preset != "none") {
        if (*preset == "walk")
            sc = fixtures::walk_scenario(m, duration.value_or(60.0), seed.value_or(1));
        else if (*preset == "soft_walk")
            sc = fixtures::soft_walk_scenario(m, duration.value_or(60.0),
                                              seed.value_or(1));
        else if (*preset == "press")
            sc = fixtures::press_scenario(m, duration.value_or(14.0));
        else
            throw ConfigError("config: unknown preset '" + *preset +
                              "' (expected walk|soft_walk|press|none)");
    } else {
        sc.cfg.mode = m;
        if (duration) sc.cfg.duration = *duration;
        if (seed) sc.cfg.seed = *seed;
        sc.reference = gait::GaitReference(fixtures::synth_gait(seed.value_or(1)));
    }

    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto& cfg = sc.cfg;
    auto dbl = [](double& field) {
        return [&field](const std::string& k, const std::string& v) {
            field = detail::p_double(k, v);
        };
    };
    auto bol = [](bool& field) {
        return [&field](const std::string& k, const std::string& v) {
            field = detail::p_bool(k, v);
        };
    };
    const std::map<std::string, Setter> setters = {
        {"sim.dt_physics", dbl(cfg.dt_physics)},
        {"sim.dt_control", dbl(cfg.dt_control)},
        {"sim.contact_enabled", bol(cfg.contact_enabled)},
        {"sim.init_hip_offset", dbl(cfg.init_hip_offset)},
        {"torso.height", dbl(cfg.torso.height)},
        {"torso.amp_x", dbl(cfg.torso.amp_x)},
        {"torso.amp_z", dbl(cfg.torso.amp_z)},
        {"torso.amp_pitch", dbl(cfg.torso.amp_pitch)},
        {"torso.freq", dbl(cfg.torso.freq)},
        {"torso.phase_z", dbl(cfg.torso.phase_z)},
        {"torso.phase_pitch", dbl(cfg.torso.phase_pitch)},
        {"torso.stationary", bol(cfg.torso.stationary)},
        {"ground.stiffness", dbl(cfg.ground.stiffness)},
        {"ground.damping", dbl(cfg.ground.damping)},
        {"ground.ground_height", dbl(cfg.ground.ground_height)},
        {"ground.friction_coeff", dbl(cfg.ground.friction_coeff)},
        {"thresholds.contact_threshold", dbl(cfg.thresholds.contact_threshold)},
        {"thresholds.stance_threshold", dbl(cfg.thresholds.stance_threshold)},
        {"scheduler.li_b", dbl(cfg.scheduler.LI.B)},
        {"scheduler.li_k", dbl(cfg.scheduler.LI.K)},
        {"scheduler.hi_b", dbl(cfg.scheduler.HI.B)},
        {"scheduler.hi_k", dbl(cfg.scheduler.HI.K)},
        {"scheduler.sigmoid_a", dbl(cfg.scheduler.sigmoid_a)},
        {"scheduler.sigmoid_b", dbl(cfg.scheduler.sigmoid_b)},
        {"scheduler.dbmax", dbl(cfg.scheduler.dBmax)},
        {"scheduler.dkmax", dbl(cfg.scheduler.dKmax)},
        {"pid.kp", dbl(cfg.pid.kp)},
        {"pid.ki", dbl(cfg.pid.ki)},
        {"pid.kd", dbl(cfg.pid.kd)},
        {"pid.integral_limit", dbl(cfg.pid.integral_limit)},
        {"options.torque_limit", dbl(cfg.options.torque_limit)},
        {"options.torso_feedback", bol(cfg.options.torso_feedback)},
        {"options.knee_gravity_ff", bol(cfg.options.knee_gravity_ff)},
        {"model.torso_mass", dbl(cfg.model.torso_mass)},
        {"model.torso_inertia", dbl(cfg.model.torso_inertia)},
        {"model.attachment_offset", dbl(cfg.model.attachment_offset)},
        {"model.gravity", dbl(cfg.model.gravity)},
    };

    std::map<std::string, std::string> gait_keys;
    std::map<int, sim::DisturbancePulse> pulses;
    for (const auto& [k, v] : entries) {
        if (k == "preset" || k == "mode" || k == "duration" || k == "seed") continue;
        if (k == "run_id") {
            out.run_id = detail::p_string(k, v);
            continue;
        }
        if (k == "classifier.path") {
            out.classifier_path = detail::resolve_path(base_dir, detail::p_string(k, v));
            continue;
        }
        if (k.rfind("gait.", 0) == 0) {
            gait_keys[k.substr(5)] = v;
            continue;
        }
        if (k.rfind("disturbance.", 0) == 0) {
            const std::size_t dot = k.find('.', 12);
            if (dot != std::string::npos) {
                const int idx = static_cast<int>(detail::p_u64(k, k.substr(12, dot - 12)));
                const std::string field = k.substr(dot + 1);
                auto& p = pulses[idx];
                if (field == "t_start") p.t_start = detail::p_double(k, v);
                else if (field == "t_end") p.t_end = detail::p_double(k, v);
                else if (field == "torque") p.torque = detail::p_double(k, v);
                else throw ConfigError("config: unknown key '" + k + "'");
                continue;
            }
        }
        const auto it = setters.find(k);
        if (it == setters.end()) throw ConfigError("config: unknown key '" + k + "'");
        it->second(k, v);
    }
    for (const auto& [idx, p] : pulses) cfg.disturbances.push_back(p);
    if (seed) cfg.seed = *seed;

    if (!gait_keys.empty()) {
        const std::string source = gait_keys.count("source")
                                       ? detail::p_string("gait.source", gait_keys["source"])
                                       : "synth";
        for (const auto& [k, v] : gait_keys)
            if (k != "source" && k != "seed" && k != "cycle_s" && k != "fs" && k != "csv")
                throw ConfigError("config: unknown key 'gait." + k + "'");
        if (source == "synth") {
            const std::uint64_t gs = gait_keys.count("seed")
                                         ? detail::p_u64("gait.seed", gait_keys["seed"])
                                         : seed.value_or(1);
            const double cycle = gait_keys.count("cycle_s")
                                     ? detail::p_double("gait.cycle_s", gait_keys["cycle_s"])
                                     : 1.1;
            const double fs = gait_keys.count("fs")
                                  ? detail::p_double("gait.fs", gait_keys["fs"])
                                  : 100.0;
            sc.reference = gait::GaitReference(fixtures::synth_gait(gs, cycle, fs));
        } else if (source == "csv") {
            if (!gait_keys.count("csv"))
                throw ConfigError("config: gait.source = csv requires gait.csv");
            sc.reference = gait::GaitReference(gait::load_gait_csv(detail::resolve_path(
                base_dir, detail::p_string("gait.csv", gait_keys["csv"]))));
        } else {
            throw ConfigError("config: unknown gait.source '" + source + "'");
        }
    }
    return out;
}

/// One-call convenience for the CLI: file, then overrides, then assembly.
/// The classifier referenced by [classifier] path is loaded here so a bad
/// path fails before any simulation starts.
inline LoadedScenario load_scenario(const std::string& path,
                                    const std::vector<std::string>& overrides = {}) {
    Entries entries = load_config_file(path);
    apply_overrides(entries, overrides);
    LoadedScenario loaded =
        build_scenario(entries, std::filesystem::path(path).parent_path().string());
    if (!loaded.classifier_path.empty())
        loaded.scenario.classifier = nn::PhaseClassifier::load(loaded.classifier_path);
    return loaded;
}

} // namespace srl::config
