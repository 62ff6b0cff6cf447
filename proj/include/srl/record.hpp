// Simulation trace: one row per physics step plus CSV export. Column
// values are written with %.17g so round-trips and byte-level diffing of
// repeated runs are exact.
#pragma once

#include "srl/contact.hpp"
#include "srl/core.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

namespace srl::sim {

/// Gate outcome per control cycle. Accepted, or the index of the violated
/// stability inequality.
enum class GateVerdict { Accepted = 0, RejectedCond1 = 1, RejectedCond2 = 2, RejectedCond3 = 3 };

inline const char* to_string(GateVerdict v) {
    switch (v) {
        case GateVerdict::Accepted: return "accept";
        case GateVerdict::RejectedCond1: return "reject-cond1";
        case GateVerdict::RejectedCond2: return "reject-cond2";
        case GateVerdict::RejectedCond3: return "reject-cond3";
    }
    return "?";
}

struct RecordRow {
    double t = 0.0;
    Vec3 q_b = Vec3::Zero();
    Vec3 dq_b = Vec3::Zero();
    Vec2 q_s = Vec2::Zero();
    Vec2 dq_s = Vec2::Zero();
    Vec2 qdd_s = Vec2::Zero();
    Vec2 q_d = Vec2::Zero();
    Vec2 dq_d = Vec2::Zero();
    Vec2 ddq_d = Vec2::Zero();
    Vec2 tau = Vec2::Zero();
    double grf = 0.0;
    double grf_tan = 0.0;
    double foot_x = 0.0;
    double foot_z = 0.0;
    contact::GaitPhase phase_true = contact::GaitPhase::Swing;
    contact::GaitPhase phase_pred = contact::GaitPhase::Swing;
    double confidence = 0.0;
    double B = 0.0;
    double K = 0.0;
    GateVerdict gate = GateVerdict::Accepted;
    double jtf_hip = 0.0;    ///< hip entry of J_s^T F_s (contact only)
    double dist_norm = 0.0;  ///< |dB*(de) + dK*e| on the hip axis
    double energy = 0.0;
};

struct SimRecord {
    std::vector<RecordRow> rows;

    static constexpr const char* csv_header =
        "t,x,z,pitch,dx,dz,dpitch,hip,knee,dhip,dknee,ddhip,ddknee,"
        "hip_d,knee_d,dhip_d,dknee_d,ddhip_d,ddknee_d,tau_hip,tau_knee,"
        "grf,grf_tan,foot_x,foot_z,phase_true,phase_pred,confidence,"
        "B,K,gate,jtf_hip,dist_norm,energy";

    void save_csv(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("SimRecord: cannot open " + path);
        out << csv_header << "\n";
        char buf[1024];
        for (const auto& r : rows) {
            std::snprintf(
                buf, sizeof(buf),
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g,%d,"
                "%.17g,%.17g,%.17g\n",
                r.t, r.q_b(0), r.q_b(1), r.q_b(2), r.dq_b(0), r.dq_b(1), r.dq_b(2),
                r.q_s(0), r.q_s(1), r.dq_s(0), r.dq_s(1), r.qdd_s(0), r.qdd_s(1),
                r.q_d(0), r.q_d(1), r.dq_d(0), r.dq_d(1), r.ddq_d(0), r.ddq_d(1),
                r.tau(0), r.tau(1), r.grf, r.grf_tan, r.foot_x, r.foot_z,
                static_cast<int>(r.phase_true), static_cast<int>(r.phase_pred),
                r.confidence, r.B, r.K, static_cast<int>(r.gate), r.jtf_hip,
                r.dist_norm, r.energy);
            out << buf;
        }
    }

    static SimRecord load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw CsvFormatError("SimRecord: cannot open " + path, 0);
        std::string line;
        if (!std::getline(in, line)) throw CsvFormatError("SimRecord: empty file " + path, 0);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != csv_header)
            throw CsvFormatError("SimRecord: unexpected header in " + path, 1);
        SimRecord rec;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::array<double, 34> v{};
            const char* p = line.c_str();
            for (std::size_t k = 0; k < v.size(); ++k) {
                char* end = nullptr;
                v[k] = std::strtod(p, &end);
                if (end == p)
                    throw CsvFormatError("SimRecord: malformed value in " + path, line_no);
                p = end;
                if (k + 1 < v.size()) {
                    if (*p != ',')
                        throw CsvFormatError("SimRecord: expected 34 columns in " + path,
                                             line_no);
                    ++p;
                }
            }
            RecordRow r;
            r.t = v[0];
            r.q_b = Vec3(v[1], v[2], v[3]);
            r.dq_b = Vec3(v[4], v[5], v[6]);
            r.q_s = Vec2(v[7], v[8]);
            r.dq_s = Vec2(v[9], v[10]);
            r.qdd_s = Vec2(v[11], v[12]);
            r.q_d = Vec2(v[13], v[14]);
            r.dq_d = Vec2(v[15], v[16]);
            r.ddq_d = Vec2(v[17], v[18]);
            r.tau = Vec2(v[19], v[20]);
            r.grf = v[21];
            r.grf_tan = v[22];
            r.foot_x = v[23];
            r.foot_z = v[24];
            try {
                r.phase_true = contact::phase_from_index(static_cast<int>(v[25]));
                r.phase_pred = contact::phase_from_index(static_cast<int>(v[26]));
            } catch (const InvalidStateError& e) {
                throw CsvFormatError(std::string("SimRecord: ") + e.what(), line_no);
            }
            r.confidence = v[27];
            r.B = v[28];
            r.K = v[29];
            const int g = static_cast<int>(v[30]);
            if (g < 0 || g > 3)
                throw CsvFormatError("SimRecord: gate verdict out of range", line_no);
            r.gate = static_cast<GateVerdict>(g);
            r.jtf_hip = v[31];
            r.dist_norm = v[32];
            r.energy = v[33];
            rec.rows.push_back(r);
        }
        return rec;
    }
};

} // namespace srl::sim
