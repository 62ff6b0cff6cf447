#include <catch2/catch_amalgamated.hpp>

#include <srl/config.hpp>

#include <cstdio>
#include <fstream>
#include <string>

using namespace srl;

namespace {

config::Entries parse(const std::string& text) {
    return config::parse_config_text(text);
}

} // namespace

TEST_CASE("parser flattens sections, comments and strings", "[config]") {
    const auto e = parse("# header comment\n"
                         "mode = \"vic\"\n"
                         "duration = 4.4   # trailing comment\n"
                         "\n"
                         "[torso]\n"
                         "amp_z = 0.01\n"
                         "stationary = false\n"
                         "[[disturbance]]\n"
                         "t_start = 1.0\n"
                         "[[disturbance]]\n"
                         "t_start = 2.0\n");
    REQUIRE(e.size() == 6);
    REQUIRE(e[0] == std::pair<std::string, std::string>("mode", "\"vic\""));
    REQUIRE(e[1].second == "4.4");
    REQUIRE(e[2].first == "torso.amp_z");
    REQUIRE(e[4].first == "disturbance.0.t_start");
    REQUIRE(e[5].first == "disturbance.1.t_start");
}

TEST_CASE("parser reports malformed lines with their numbers", "[config]") {
    auto line_of = [](const std::string& text) {
        try {
            config::parse_config_text(text);
        } catch (const ConfigError& err) {
            return std::string(err.what());
        }
        return std::string();
    };
    REQUIRE(line_of("a = 1\nnot a pair\n").find("line 2") != std::string::npos);
    REQUIRE(line_of("[unclosed\n").find("line 1") != std::string::npos);
    REQUIRE(line_of("x = \"oops\n").find("unterminated") != std::string::npos);
    REQUIRE(line_of("= 3\n").find("empty key") != std::string::npos);
    REQUIRE(line_of("x =\n").find("empty value") != std::string::npos);
}

TEST_CASE("a preset base is overridden field by field", "[config]") {
    auto loaded = config::build_scenario(parse("preset = \"walk\"\n"
                                               "mode = \"iic_high\"\n"
                                               "duration = 2.2\n"
                                               "run_id = \"custom\"\n"
                                               "[ground]\n"
                                               "stiffness = 5000\n"));
    const auto& cfg = loaded.scenario.cfg;
    REQUIRE(loaded.run_id == "custom");
    REQUIRE(cfg.mode == sim::ControllerMode::IIC_high);
    REQUIRE(cfg.duration == 2.2);
    REQUIRE(cfg.ground.stiffness == 5000.0);
    REQUIRE(cfg.ground.damping == 25.0);        // from the walk preset
    REQUIRE(cfg.scheduler.HI.K == 640.0);       // from the walk preset
    REQUIRE(cfg.thresholds.contact_threshold == 1.0);
}

TEST_CASE("without a preset the library defaults apply", "[config]") {
    auto loaded = config::build_scenario(parse("duration = 1.0\n"
                                               "[scheduler]\n"
                                               "hi_k = 500\n"));
    const auto& cfg = loaded.scenario.cfg;
    REQUIRE(cfg.mode == sim::ControllerMode::IIC_low);
    REQUIRE(cfg.scheduler.HI.K == 500.0);
    REQUIRE(cfg.scheduler.LI.K == 60.0);
    REQUIRE(cfg.ground.damping == 300.0); // library default, not the walk tuning
    REQUIRE(loaded.run_id == "run");
}

TEST_CASE("disturbance tables populate the pulse train", "[config]") {
    auto loaded = config::build_scenario(parse("preset = \"walk\"\n"
                                               "duration = 1.1\n"
                                               "[[disturbance]]\n"
                                               "t_start = 0.5\n"
                                               "t_end = 0.7\n"
                                               "torque = 2.5\n"
                                               "[[disturbance]]\n"
                                               "t_start = 0.9\n"
                                               "t_end = 1.0\n"
                                               "torque = -1.0\n"));
    const auto& d = loaded.scenario.cfg.disturbances;
    REQUIRE(d.size() == 2);
    REQUIRE(d[0].t_start == 0.5);
    REQUIRE(d[0].torque == 2.5);
    REQUIRE(d[1].torque == -1.0);
}

TEST_CASE("gait section switches the reference source", "[config]") {
    auto synth = config::build_scenario(parse("duration = 1.0\n"
                                              "[gait]\n"
                                              "seed = 5\n"
                                              "cycle_s = 0.9\n"));
    REQUIRE(synth.scenario.reference.cycle_period() == Catch::Approx(0.9));

    const std::string path = "config_gait_tmp.csv";
    gait::save_gait_csv(fixtures::synth_gait(3), path);
    auto filed = config::build_scenario(parse("duration = 1.0\n"
                                              "[gait]\n"
                                              "source = \"csv\"\n"
                                              "csv = \"" + path + "\"\n"));
    REQUIRE(filed.scenario.reference.cycle_period() == Catch::Approx(1.1));
    std::remove(path.c_str());

    REQUIRE_THROWS_AS(config::build_scenario(parse("[gait]\nsource = \"midi\"\n")),
                      ConfigError);
    REQUIRE_THROWS_AS(config::build_scenario(parse("[gait]\nsource = \"csv\"\n")),
                      ConfigError);
}

TEST_CASE("unknown keys and bad values are rejected by name", "[config]") {
    auto message = [](const std::string& text) {
        try {
            config::build_scenario(parse(text));
        } catch (const ConfigError& err) {
            return std::string(err.what());
        }
        return std::string();
    };
    REQUIRE(message("walk_speed = 3\n").find("walk_speed") != std::string::npos);
    REQUIRE(message("[torso]\namp_q = 1\n").find("torso.amp_q") != std::string::npos);
    REQUIRE(message("duration = fast\n").find("number") != std::string::npos);
    REQUIRE(message("[torso]\nstationary = 2\n").find("true/false") != std::string::npos);
    REQUIRE(message("preset = \"jog\"\n").find("jog") != std::string::npos);
    REQUIRE(message("mode = \"turbo\"\n").find("turbo") != std::string::npos);
}

TEST_CASE("overrides land after file keys and share their validation", "[config]") {
    auto entries = parse("preset = \"walk\"\nduration = 2.2\n[ground]\ndamping = 25\n");
    config::apply_overrides(entries, {"ground.damping=40", "mode=iic_high"});
    auto loaded = config::build_scenario(entries);
    REQUIRE(loaded.scenario.cfg.ground.damping == 40.0);
    REQUIRE(loaded.scenario.cfg.mode == sim::ControllerMode::IIC_high);

    config::Entries bad = entries;
    config::apply_overrides(bad, {"ground.bounciness=1"});
    REQUIRE_THROWS_AS(config::build_scenario(bad), ConfigError);
    REQUIRE_THROWS_AS(config::apply_overrides(entries, {"no_equals_sign"}), ConfigError);
}

TEST_CASE("missing config files name the path", "[config]") {
    try {
        config::load_config_file("does/not/exist.toml");
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        REQUIRE(std::string(err.what()).find("does/not/exist.toml") != std::string::npos);
    }
}

TEST_CASE("a config file round-trips into a runnable scenario", "[config]") {
    const std::string path = "config_run_tmp.toml";
    std::ofstream(path) << "preset = \"walk\"\n"
                           "mode = \"iic_low\"\n"
                           "duration = 1.1\n"
                           "run_id = \"smoke\"\n";
    auto loaded = config::load_scenario(path);
    const auto rec = sim::run_scenario(loaded.scenario);
    REQUIRE(rec.rows.size() == 1101);
    std::remove(path.c_str());
}
