// End-to-end checks of the srlsim binary: exit codes, file emission,
// determinism. SRLSIM_BIN and FIXTURES_DIR come from the build.
#include <catch2/catch_amalgamated.hpp>

#include <srl/gait.hpp>
#include <srl/record.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SRLSIM_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult res;
    char buf[4096];
    while (std::fgets(buf, sizeof(buf), pipe)) res.output += buf;
    const int status = pclose(pipe);
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    res.exit_code = WEXITSTATUS(status);
    return res;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
    const fs::path p = dir / "cfg.toml";
    std::ofstream out(p);
    out << body;
    return p;
}

} // namespace

TEST_CASE("help exits zero with usage text", "[cli]") {
    const auto res = run_cli("--help");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("Usage") != std::string::npos);
    CHECK(res.output.find("gen-fixtures") != std::string::npos);
}

TEST_CASE("unknown flag exits two", "[cli]") {
    CHECK(run_cli("--definitely-not-a-flag").exit_code == 2);
    CHECK(run_cli("run --config x.toml --frobnicate").exit_code == 2);
}

TEST_CASE("missing config exits three and names the path", "[cli]") {
    const auto res = run_cli("run --config does/not/exist.toml");
    CHECK(res.exit_code == 3);
    CHECK(res.output.find("does/not/exist.toml") != std::string::npos);
}

TEST_CASE("bad override key exits three and names the key", "[cli]") {
    const auto dir = scratch("badkey");
    const auto cfg = write_config(dir, "preset = \"walk\"\nduration = 1.1\n");
    const auto res =
        run_cli("run --config " + cfg.string() + " --set ground.bounciness=2");
    CHECK(res.exit_code == 3);
    CHECK(res.output.find("bounciness") != std::string::npos);
}

TEST_CASE("run emits the documented files and lists them on stdout", "[cli]") {
    const auto dir = scratch("run");
    const auto cfg = write_config(
        dir, "preset = \"walk\"\nmode = \"iic_low\"\nduration = 1.1\n"
             "run_id = \"t\"\n");
    const auto res = run_cli("run --config " + cfg.string() + " --out " +
                             (dir / "out").string());
    REQUIRE(res.exit_code == 0);
    for (const std::string name :
         {"t_record.csv", "t_metrics.csv", "t_trajectory.svg", "t_force.svg",
          "t_impedance.svg"}) {
        const fs::path p = dir / "out" / name;
        CHECK(fs::exists(p));
        CHECK(res.output.find(p.string()) != std::string::npos);
    }
    const auto rec = srl::sim::SimRecord::load_csv((dir / "out/t_record.csv").string());
    CHECK(rec.rows.size() == 1101);
}

TEST_CASE("two identical runs give byte-identical artifacts", "[cli]") {
    const auto dir = scratch("det");
    const auto cfg = write_config(
        dir, "preset = \"walk\"\nmode = \"iic_low\"\nduration = 1.1\n");
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " +
                    (dir / "a").string())
                .exit_code == 0);
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " +
                    (dir / "b").string())
                .exit_code == 0);
    CHECK(file_bytes(dir / "a/run_record.csv") == file_bytes(dir / "b/run_record.csv"));
    CHECK(file_bytes(dir / "a/run_force.svg") == file_bytes(dir / "b/run_force.svg"));
}

TEST_CASE("plot renders a record and rejects unknown kinds", "[cli]") {
    const auto dir = scratch("plot");
    const auto cfg = write_config(
        dir, "preset = \"walk\"\nduration = 1.1\nrun_id = \"p\"\n");
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " +
                    (dir / "out").string())
                .exit_code == 0);
    const std::string rec = (dir / "out/p_record.csv").string();
    const auto ok =
        run_cli("plot --record " + rec + " --kind force --out " + (dir / "pl").string());
    CHECK(ok.exit_code == 0);
    CHECK(fs::exists(dir / "pl/p_record_force.svg"));

    const auto bad =
        run_cli("plot --record " + rec + " --kind pie --out " + (dir / "pl").string());
    CHECK(bad.exit_code == 3);
    CHECK(bad.output.find("pie") != std::string::npos);
}

TEST_CASE("metrics subcommand reproduces the run metrics", "[cli]") {
    const auto dir = scratch("metrics");
    const auto cfg = write_config(
        dir, "preset = \"walk\"\nduration = 2.2\nrun_id = \"m\"\n");
    REQUIRE(run_cli("run --config " + cfg.string() + " --out " +
                    (dir / "out").string())
                .exit_code == 0);
    const auto res = run_cli("metrics --record " + (dir / "out/m_record.csv").string() +
                             " --run-id m --mode iic_low --out " + (dir / "m2").string());
    REQUIRE(res.exit_code == 0);
    // same record, same defaults: the two metrics files must agree byte for byte
    CHECK(file_bytes(dir / "out/m_metrics.csv") == file_bytes(dir / "m2/m_metrics.csv"));
}

TEST_CASE("gen-fixtures is deterministic and round-trips", "[cli]") {
    const auto a = scratch("gen_a");
    const auto b = scratch("gen_b");
    REQUIRE(run_cli("gen-fixtures --out " + a.string() + " --walk-duration 1.1")
                .exit_code == 0);
    REQUIRE(run_cli("gen-fixtures --out " + b.string() + " --walk-duration 1.1")
                .exit_code == 0);
    for (const std::string name : {"gait_human.csv", "gait_srl.csv",
                                   "training_data.csv"})
        CHECK(file_bytes(a / name) == file_bytes(b / name));

    const auto traj = srl::gait::load_gait_csv((a / "gait_human.csv").string());
    CHECK(traj.samples.size() == 110);
    CHECK(traj.cycle_period == Catch::Approx(1.1));
}

TEST_CASE("calibrate recovers the generated pair's map", "[cli]") {
    const auto dir = scratch("cal");
    REQUIRE(run_cli("gen-fixtures --out " + dir.string() + " --walk-duration 1.1")
                .exit_code == 0);
    const auto res = run_cli("calibrate --human " + (dir / "gait_human.csv").string() +
                             " --srl " + (dir / "gait_srl.csv").string() + " --out " +
                             (dir / "out").string());
    REQUIRE(res.exit_code == 0);
    CHECK(fs::exists(dir / "out/clme_map.csv"));
    CHECK(res.output.find("rms residual") != std::string::npos);
}

TEST_CASE("sweep on the bundled fixture emits summary and plots", "[cli]") {
    const auto dir = scratch("sweep");
    const auto res = run_cli(std::string("sweep --config ") + FIXTURES_DIR +
                             "/iic_low.toml --modes iic_low,iic_high --out " +
                             (dir / "out").string() +
                             " --set duration=2.2 --warmup 1.1");
    REQUIRE(res.exit_code == 0);
    for (const std::string name :
         {"sweep_metrics.csv", "sweep_summary.csv", "sweep_trajectory.svg",
          "sweep_force.svg", "sweep_impedance.svg"})
        CHECK(fs::exists(dir / "out" / name));
    const auto summary = file_bytes(dir / "out/sweep_summary.csv");
    CHECK(summary.find("iic_low") != std::string::npos);
    CHECK(summary.find("iic_high") != std::string::npos);
}

TEST_CASE("vic fixture resolves its classifier relative to the config", "[cli]") {
    const auto dir = scratch("vicfix");
    const auto res = run_cli(std::string("run --config ") + FIXTURES_DIR +
                             "/vic.toml --out " + (dir / "out").string() +
                             " --set duration=1.1");
    REQUIRE(res.exit_code == 0);
    CHECK(fs::exists(dir / "out/vic_record.csv"));
}
