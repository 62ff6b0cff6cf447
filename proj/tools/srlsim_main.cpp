// srlsim: run scenarios and sweeps, train the phase classifier, calibrate
// the gait map, and emit CSV traces plus deterministic SVG plots.
//
// Exit codes: 0 success, 2 bad command line, 3 bad config or input file,
// 4 runtime failure. Every file written is listed on stdout, one per line.

#include <CLI11.hpp>

#include <srl/classifier.hpp>
#include <srl/config.hpp>
#include <srl/controller.hpp>
#include <srl/fixtures.hpp>
#include <srl/gait.hpp>
#include <srl/metrics.hpp>
#include <srl/plot.hpp>
#include <srl/record.hpp>
#include <srl/sim.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace srl;

namespace {

void emit(const fs::path& p) { std::cout << p.string() << "\n"; }

/// One metrics row from a record. Rows before `warmup` are excluded so the
/// initial settle does not dominate; rmsj is 0 when the force trace never
/// produces a rising window (no contact).
metrics::MetricsRow make_row(const sim::SimRecord& rec, const std::string& run_id,
                             const std::string& mode, double warmup,
                             double threshold, double cutoff_hz) {
    if (rec.rows.size() < 2)
        throw InvalidStateError("metrics: record needs at least 2 rows");
    const double dt = rec.rows[1].t - rec.rows[0].t;
    std::size_t first = 0;
    while (first < rec.rows.size() && rec.rows[first].t < warmup - 1e-12) ++first;
    if (rec.rows.size() - first < 5)
        throw InvalidStateError("metrics: warmup leaves fewer than 5 rows");

    std::vector<double> force, q, q_d;
    force.reserve(rec.rows.size() - first);
    for (std::size_t i = first; i < rec.rows.size(); ++i) {
        force.push_back(rec.rows[i].grf);
        q.push_back(rec.rows[i].q_s(0));
        q_d.push_back(rec.rows[i].q_d(0));
    }

    metrics::MetricsRow row;
    row.run_id = run_id;
    row.mode = mode;
    row.peak_force_N = *std::max_element(force.begin(), force.end());
    row.rms_err_rad = metrics::rms_tracking_error(q, q_d);
    try {
        row.rmsj = metrics::mean_rising_rmsj(force, dt, threshold, cutoff_hz);
    } catch (const InvalidStateError&) {
        row.rmsj = 0.0;
    }
    return row;
}

void print_rows(const std::vector<metrics::MetricsRow>& rows, double cutoff_hz) {
    std::printf("%-16s %-9s %12s %12s %12s\n", "run_id", "mode", "rmsj",
                "peak_force_N", "rms_err_rad");
    for (const auto& r : rows)
        std::printf("%-16s %-9s %12.4g %12.4g %12.4g\n", r.run_id.c_str(),
                    r.mode.c_str(), r.rmsj, r.peak_force_N, r.rms_err_rad);
    std::printf("rmsj low-pass cutoff: %g Hz\n", cutoff_hz);
}

struct RunArgs {
    std::string config;
    std::string out = ".";
    std::vector<std::string> sets;
    double warmup = 0.0;
    double cutoff_hz = 5.0;
};

int cmd_run(const RunArgs& a) {
    const auto loaded = config::load_scenario(a.config, a.sets);
    const auto rec = sim::run_scenario(loaded.scenario);
    fs::create_directories(a.out);
    const fs::path base = fs::path(a.out) / loaded.run_id;

    const auto record_path = fs::path(base.string() + "_record.csv");
    rec.save_csv(record_path.string());
    emit(record_path);

    const std::string mode = sim::to_string(loaded.scenario.cfg.mode);
    const auto row = make_row(rec, loaded.run_id, mode, a.warmup,
                              loaded.scenario.cfg.thresholds.contact_threshold,
                              a.cutoff_hz);
    const auto metrics_path = fs::path(base.string() + "_metrics.csv");
    metrics::save_metrics_csv({row}, metrics_path.string());
    emit(metrics_path);

    for (const auto kind : {plot::PlotKind::Trajectory, plot::PlotKind::Force,
                            plot::PlotKind::Impedance}) {
        const auto svg =
            fs::path(base.string() + "_" + plot::to_string(kind) + ".svg");
        plot::write_comparison_svg({rec}, {loaded.run_id}, kind, svg.string());
        emit(svg);
    }
    print_rows({row}, a.cutoff_hz);
    return 0;
}

struct SweepArgs {
    std::string config;
    std::string out = ".";
    std::string modes = "iic_low,iic_high,vic";
    int reps = 1;
    std::vector<std::string> sets;
    double warmup = 2.2;
    double cutoff_hz = 5.0;
    bool records = false;
};

std::vector<std::string> split_modes(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        std::string tok = s.substr(pos, next - pos);
        while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
        while (!tok.empty() && tok.back() == ' ') tok.pop_back();
        if (!tok.empty()) out.push_back(tok);
        pos = next + 1;
    }
    if (out.empty()) throw ConfigError("sweep: --modes is empty");
    return out;
}

int cmd_sweep(const SweepArgs& a) {
    if (a.reps < 1) throw ConfigError("sweep: --reps must be >= 1");
    const auto modes = split_modes(a.modes);
    for (const auto& m : modes) config::mode_from_string(m); // validate early

    std::vector<sim::Scenario> scens;
    std::vector<std::string> ids;
    std::vector<std::string> id_mode;
    double threshold = 1.0;
    for (const auto& m : modes) {
        for (int r = 0; r < a.reps; ++r) {
            auto sets = a.sets;
            sets.push_back("mode=" + m);
            // repetitions jitter the synthetic gait; rep 0 keeps the config's own
            if (r > 0) sets.push_back("gait.seed=" + std::to_string(1 + r));
            auto loaded = config::load_scenario(a.config, sets);
            threshold = loaded.scenario.cfg.thresholds.contact_threshold;
            scens.push_back(std::move(loaded.scenario));
            ids.push_back(a.reps == 1 ? m : m + "-r" + std::to_string(r));
            id_mode.push_back(m);
        }
    }

    const auto items = sim::run_sweep(scens);
    fs::create_directories(a.out);

    std::vector<metrics::MetricsRow> rows;
    std::vector<const sim::SimRecord*> lead; // rep-0 record per mode, for plots
    std::vector<std::string> lead_titles;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].record) {
            std::cout << "failed: " << ids[i] << ": " << items[i].error << "\n";
            continue;
        }
        rows.push_back(make_row(*items[i].record, ids[i], id_mode[i], a.warmup,
                                threshold, a.cutoff_hz));
        if (i % static_cast<std::size_t>(a.reps) == 0) {
            lead.push_back(&*items[i].record);
            lead_titles.push_back(id_mode[i]);
        }
        if (a.records) {
            const auto p = fs::path(a.out) / (ids[i] + "_record.csv");
            items[i].record->save_csv(p.string());
            emit(p);
        }
    }
    if (rows.empty()) throw InvalidStateError("sweep: every run failed");

    const auto metrics_path = fs::path(a.out) / "sweep_metrics.csv";
    metrics::save_metrics_csv(rows, metrics_path.string());
    emit(metrics_path);

    // Per-mode mean and sample standard deviation over successful reps.
    std::ofstream sum((fs::path(a.out) / "sweep_summary.csv").string(),
                      std::ios::binary);
    if (!sum) throw ConfigError("sweep: cannot open summary file");
    sum << "mode,runs,rmsj_mean,rmsj_std,peak_force_N_mean,peak_force_N_std,"
           "rms_err_rad_mean,rms_err_rad_std\n";
    char buf[512];
    for (const auto& m : modes) {
        std::vector<const metrics::MetricsRow*> grp;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].mode == m) grp.push_back(&rows[i]);
        if (grp.empty()) continue;
        const double n = static_cast<double>(grp.size());
        auto stats = [&](auto get) {
            double mean = 0.0;
            for (const auto* r : grp) mean += get(*r);
            mean /= n;
            double ss = 0.0;
            for (const auto* r : grp) ss += (get(*r) - mean) * (get(*r) - mean);
            const double sd = grp.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            return std::pair<double, double>(mean, sd);
        };
        const auto [jm, js] = stats([](const metrics::MetricsRow& r) { return r.rmsj; });
        const auto [pm, ps] =
            stats([](const metrics::MetricsRow& r) { return r.peak_force_N; });
        const auto [em, es] =
            stats([](const metrics::MetricsRow& r) { return r.rms_err_rad; });
        std::snprintf(buf, sizeof(buf),
                      "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.c_str(),
                      grp.size(), jm, js, pm, ps, em, es);
        sum << buf;
    }
    sum.close();
    emit(fs::path(a.out) / "sweep_summary.csv");

    if (!lead.empty()) {
        std::vector<sim::SimRecord> recs;
        recs.reserve(lead.size());
        for (const auto* r : lead) recs.push_back(*r);
        for (const auto kind : {plot::PlotKind::Trajectory, plot::PlotKind::Force,
                                plot::PlotKind::Impedance}) {
            const auto svg = fs::path(a.out) / (std::string("sweep_") +
                                                plot::to_string(kind) + ".svg");
            plot::write_comparison_svg(recs, lead_titles, kind, svg.string());
            emit(svg);
        }
    }
    print_rows(rows, a.cutoff_hz);
    return 0;
}

struct TrainArgs {
    std::string out = ".";
    std::string data;
    std::uint64_t seed = 42;
    std::uint32_t epochs = 150;
    double walk_duration = 12.1;
};

int cmd_train(const TrainArgs& a) {
    const auto pool = a.data.empty() ? fixtures::walk_training_pool(a.walk_duration)
                                     : nn::load_training_csv(a.data);
    const auto clf = nn::train_classifier(pool, a.seed, a.epochs);
    fs::create_directories(a.out);
    const auto path = fs::path(a.out) / "phase_classifier.srlc";
    clf.save(path.string());
    emit(path);
    std::printf("samples: %zu\nholdout accuracy: %.4f\n", pool.size(),
                clf.holdout_accuracy);
    return 0;
}

struct CalibrateArgs {
    std::string human;
    std::string srl_path;
    std::string out = ".";
};

int cmd_calibrate(const CalibrateArgs& a) {
    const auto h = gait::load_gait_csv(a.human);
    const auto s = gait::load_gait_csv(a.srl_path);
    if (h.samples.size() != s.samples.size())
        throw ConfigError("calibrate: sample counts differ (" +
                          std::to_string(h.samples.size()) + " vs " +
                          std::to_string(s.samples.size()) + ")");
    const auto res = gait::calibrate_clme(h.samples, s.samples);

    fs::create_directories(a.out);
    const auto path = fs::path(a.out) / "clme_map.csv";
    std::ofstream out(path.string(), std::ios::binary);
    if (!out) throw ConfigError("calibrate: cannot open " + path.string());
    out << "c0,c1,c2,c3\n";
    char buf[256];
    for (int r = 0; r < 4; ++r) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", res.C(r, 0),
                      res.C(r, 1), res.C(r, 2), res.C(r, 3));
        out << buf;
    }
    out.close();
    emit(path);
    std::printf("rms residual: %.6g rad\n", res.rms_residual);
    return 0;
}

struct MetricsArgs {
    std::string record;
    std::string out = ".";
    std::string run_id = "record";
    std::string mode = "unknown";
    double warmup = 0.0;
    double cutoff_hz = 5.0;
    double threshold = 1.0;
};

int cmd_metrics(const MetricsArgs& a) {
    const auto rec = sim::SimRecord::load_csv(a.record);
    const auto row =
        make_row(rec, a.run_id, a.mode, a.warmup, a.threshold, a.cutoff_hz);
    fs::create_directories(a.out);
    const auto path = fs::path(a.out) / (a.run_id + "_metrics.csv");
    metrics::save_metrics_csv({row}, path.string());
    emit(path);
    print_rows({row}, a.cutoff_hz);
    return 0;
}

struct PlotArgs {
    std::string record;
    std::string kind;
    std::string out = ".";
};

int cmd_plot(const PlotArgs& a) {
    const auto kind = plot::plot_kind_from(a.kind);
    const auto rec = sim::SimRecord::load_csv(a.record);
    fs::create_directories(a.out);
    const std::string stem = fs::path(a.record).stem().string();
    const auto path =
        fs::path(a.out) / (stem + "_" + plot::to_string(kind) + ".svg");
    plot::write_comparison_svg({rec}, {stem}, kind, path.string());
    emit(path);
    return 0;
}

struct GenArgs {
    std::string out = ".";
    std::uint64_t seed = 1;
    double walk_duration = 12.1;
};

int cmd_gen_fixtures(const GenArgs& a) {
    fs::create_directories(a.out);

    const auto human = fixtures::synth_gait(a.seed);
    const auto human_path = fs::path(a.out) / "gait_human.csv";
    gait::save_gait_csv(human, human_path.string());
    emit(human_path);

    // Demo gait map: block-diagonal so mapped velocities stay the time
    // derivatives of mapped positions. `calibrate` on the pair recovers it.
    Eigen::Matrix2d A;
    A << 1.12, 0.08, -0.05, 0.93;
    Mat4 C = Mat4::Zero();
    C.topLeftCorner<2, 2>() = A;
    C.bottomRightCorner<2, 2>() = A;
    gait::GaitTrajectory mapped = human;
    for (auto& s : mapped.samples) s = C * s;
    const auto srl_path = fs::path(a.out) / "gait_srl.csv";
    gait::save_gait_csv(mapped, srl_path.string());
    emit(srl_path);

    const auto pool = fixtures::walk_training_pool(a.walk_duration);
    const auto train_path = fs::path(a.out) / "training_data.csv";
    nn::save_training_csv(pool, train_path.string());
    emit(train_path);

    std::printf("gait_human.csv: %zu samples\ngait_srl.csv: %zu samples\n"
                "training_data.csv: %zu samples\n",
                human.samples.size(), mapped.samples.size(), pool.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"srlsim: desk-scale simulator for a torso-mounted 2-DOF "
                 "supernumerary leg"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run one scenario; write record CSV, "
                                          "metrics CSV and SVG plots");
    run->add_option("--config", run_args.config, "Scenario config file")->required();
    run->add_option("--out", run_args.out, "Output directory");
    run->add_option("--set", run_args.sets,
                    "Override a config key, section.key=value");
    run->add_option("--warmup", run_args.warmup,
                    "Exclude rows before this time from metrics [s]");
    run->add_option("--cutoff-hz", run_args.cutoff_hz, "RMSJ low-pass cutoff [Hz]");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand(
        "sweep", "Run one config across controller modes and repetitions");
    sweep->add_option("--config", sweep_args.config, "Scenario config file")
        ->required();
    sweep->add_option("--out", sweep_args.out, "Output directory");
    sweep->add_option("--modes", sweep_args.modes, "Comma-separated mode list");
    sweep->add_option("--reps", sweep_args.reps,
                      "Repetitions per mode; rep > 0 jitters the gait seed");
    sweep->add_option("--set", sweep_args.sets,
                      "Override a config key, section.key=value");
    sweep->add_option("--warmup", sweep_args.warmup,
                      "Exclude rows before this time from metrics [s]");
    sweep->add_option("--cutoff-hz", sweep_args.cutoff_hz,
                      "RMSJ low-pass cutoff [Hz]");
    sweep->add_flag("--records", sweep_args.records, "Also write per-run record CSVs");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train-classifier",
                                     "Train the gait-phase classifier");
    train->add_option("--out", train_args.out, "Output directory");
    train->add_option("--data", train_args.data,
                      "Labeled training CSV (default: built-in simulated pool)");
    train->add_option("--seed", train_args.seed, "Training seed");
    train->add_option("--epochs", train_args.epochs, "Training epochs");
    train->add_option("--walk-duration", train_args.walk_duration,
                      "Walk duration per pool run [s]");

    CalibrateArgs cal_args;
    auto* cal = app.add_subcommand("calibrate",
                                   "Fit the human-to-leg gait map from paired CSVs");
    cal->add_option("--human", cal_args.human, "Human gait CSV")->required();
    cal->add_option("--srl", cal_args.srl_path, "Leg gait CSV")->required();
    cal->add_option("--out", cal_args.out, "Output directory");

    MetricsArgs met_args;
    auto* met = app.add_subcommand("metrics", "Compute metrics from a record CSV");
    met->add_option("--record", met_args.record, "Record CSV")->required();
    met->add_option("--out", met_args.out, "Output directory");
    met->add_option("--run-id", met_args.run_id, "Row run_id");
    met->add_option("--mode", met_args.mode, "Row mode label");
    met->add_option("--warmup", met_args.warmup,
                    "Exclude rows before this time from metrics [s]");
    met->add_option("--cutoff-hz", met_args.cutoff_hz, "RMSJ low-pass cutoff [Hz]");
    met->add_option("--threshold", met_args.threshold,
                    "Contact threshold for rising windows [N]");

    PlotArgs plot_args;
    auto* plt = app.add_subcommand("plot", "Render one plot kind from a record CSV");
    plt->add_option("--record", plot_args.record, "Record CSV")->required();
    plt->add_option("--kind", plot_args.kind, "trajectory | force | impedance")
        ->required();
    plt->add_option("--out", plot_args.out, "Output directory");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen-fixtures",
                                   "Write the bundled synthetic gait and "
                                   "training datasets");
    gen->add_option("--out", gen_args.out, "Output directory");
    gen->add_option("--seed", gen_args.seed, "Gait seed");
    gen->add_option("--walk-duration", gen_args.walk_duration,
                    "Walk duration per pool run [s]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e); // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(run_args);
        if (app.got_subcommand(sweep)) return cmd_sweep(sweep_args);
        if (app.got_subcommand(train)) return cmd_train(train_args);
        if (app.got_subcommand(cal)) return cmd_calibrate(cal_args);
        if (app.got_subcommand(met)) return cmd_metrics(met_args);
        if (app.got_subcommand(plt)) return cmd_plot(plot_args);
        if (app.got_subcommand(gen)) return cmd_gen_fixtures(gen_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const CsvFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ModelConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ControllerConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
