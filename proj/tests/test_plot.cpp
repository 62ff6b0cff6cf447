#include <catch2/catch_amalgamated.hpp>

#include <srl/fixtures.hpp>
#include <srl/plot.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace srl;

namespace {

const sim::SimRecord& short_walk() {
    static const sim::SimRecord rec =
        sim::run_scenario(fixtures::walk_scenario(sim::ControllerMode::IIC_low, 3.3));
    return rec;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t p = hay.find(needle); p != std::string::npos;
         p = hay.find(needle, p + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("plot kinds parse and print by name", "[plot]") {
    using plot::PlotKind;
    REQUIRE(plot::plot_kind_from("trajectory") == PlotKind::Trajectory);
    REQUIRE(plot::plot_kind_from("force") == PlotKind::Force);
    REQUIRE(plot::plot_kind_from("impedance") == PlotKind::Impedance);
    REQUIRE(std::string(plot::to_string(PlotKind::Force)) == "force");
    REQUIRE_THROWS_AS(plot::plot_kind_from("pie"), ConfigError);
}

TEST_CASE("three-run comparison renders one panel per record", "[plot]") {
    const auto& rec = short_walk();
    std::vector<plot::Panel> panels;
    for (const char* title : {"iic_low", "iic_high", "vic"})
        panels.push_back(plot::record_panel(rec, plot::PlotKind::Trajectory, title));
    const std::string svg = plot::render_svg(panels);
    REQUIRE(svg.rfind("<svg", 0) == 0);
    REQUIRE(count_of(svg, "joint angle [rad]") == 3);
    // Four series per trajectory panel: hip, hip ref, knee, knee ref.
    REQUIRE(count_of(svg, "<polyline") == 12);
    REQUIRE(svg.find("height=\"720\"") != std::string::npos);
}

TEST_CASE("force and impedance panels carry their series", "[plot]") {
    const auto& rec = short_walk();
    const auto force = plot::record_panel(rec, plot::PlotKind::Force, "f");
    REQUIRE(force.series.size() == 1);
    REQUIRE(force.series[0].label == "grf");
    const auto imp = plot::record_panel(rec, plot::PlotKind::Impedance, "z");
    REQUIRE(imp.series.size() == 2);
    REQUIRE(imp.y_label == "impedance");
}

TEST_CASE("stance regions become shaded spans", "[plot]") {
    const auto& rec = short_walk();
    const auto shades = plot::stance_shades(rec);
    REQUIRE(!shades.empty());
    REQUIRE(shades.size() <= 6);
    std::size_t wide = 0;
    for (std::size_t i = 0; i < shades.size(); ++i) {
        REQUIRE(shades[i].x1 > shades[i].x0);
        if (i > 0) REQUIRE(shades[i].x0 > shades[i - 1].x1);
        if (shades[i].x1 - shades[i].x0 > 0.2) ++wide;
    }
    // 3.3 s of the walk holds one main stance band per 1.1 s cycle.
    REQUIRE(wide == 3);
}

TEST_CASE("identical records give byte-identical svg files", "[plot]") {
    const std::string a = "plot_det_a.svg", b = "plot_det_b.svg";
    const auto& rec = short_walk();
    plot::write_comparison_svg({rec}, {"run"}, plot::PlotKind::Force, a);
    plot::write_comparison_svg({rec}, {"run"}, plot::PlotKind::Force, b);
    const std::string bytes = file_bytes(a);
    REQUIRE(bytes == file_bytes(b));
    REQUIRE(bytes.find("<svg") == 0);
    REQUIRE(bytes.find("timestamp") == std::string::npos);
    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("an empty record is rejected before any file is written", "[plot]") {
    const std::string path = "plot_should_not_exist.svg";
    sim::SimRecord empty;
    REQUIRE_THROWS_AS(plot::record_panel(empty, plot::PlotKind::Force, "x"),
                      InvalidStateError);
    bool threw = false;
    try {
        plot::write_comparison_svg({empty}, {"x"}, plot::PlotKind::Force, path);
    } catch (const InvalidStateError&) {
        threw = true;
    }
    REQUIRE(threw);
    std::ifstream probe(path);
    REQUIRE(!probe.good());
}

TEST_CASE("mismatched titles are rejected", "[plot]") {
    const auto& rec = short_walk();
    REQUIRE_THROWS_AS(
        plot::write_comparison_svg({rec}, {"a", "b"}, plot::PlotKind::Force, "x.svg"),
        InvalidStateError);
}
