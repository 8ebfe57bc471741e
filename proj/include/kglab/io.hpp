#pragma once

// disk formats: JSON reports (spectra, resonance tables, FGR, fits) and CSV
// tables (eigenfunctions, continuation families, trajectories). All numeric
// output goes through nlohmann::json or fixed %.17g so single-threaded reruns
// are byte-identical.

#include "kglab/dynamics.hpp"
#include "kglab/fgr.hpp"
#include "kglab/toy.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>

namespace kglab {

using nlohmann::json;

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json spectrum_report_json(const SpectralData& sd, const H3Report& h3) {
    json j;
    j["mass"] = sd.mass;
    j["eigenvalues"] = sd.eigenvalues;
    j["omegas"] = sd.omegas;
    j["signed_omegas"] = sd.signed_omegas;
    j["n"] = sd.n();
    j["N"] = h3.N;
    j["h2_violations"] = sd.hypothesis_violations;
    j["h3_min_gap"] = h3.min_gap;
    j["h3_scanned_order"] = h3.scanned_order;
    j["h3_violations"] = h3.violations;
    return j;
}

inline void write_eigenfunctions_csv(const std::string& path, const SpectralData& sd) {
    std::string out = "r";
    for (int jcol = 0; jcol < sd.n(); ++jcol) out += ",phi_" + std::to_string(jcol);
    out += "\n";
    const RVec r = sd.disc.nodes();
    for (int i = 0; i < sd.disc.n_points; ++i) {
        out += fmt17(r[i]);
        for (int jcol = 0; jcol < sd.n(); ++jcol)
            out += "," + fmt17(sd.eigenfunctions(i, jcol));
        out += "\n";
    }
    write_text(path, out);
}

// one row per continuation sample: z, E, then the correction q at every node
inline void write_family_csv(const std::string& path, const BoundStateFamily& fam) {
    std::string out = "z,E";
    for (int i = 0; i < fam.disc.n_points; ++i) out += ",q_" + std::to_string(i);
    out += "\n";
    for (std::size_t s = 0; s < fam.zs.size(); ++s) {
        out += fmt17(fam.zs[s]) + "," + fmt17(fam.E_samples[int(s)]);
        for (int i = 0; i < fam.disc.n_points; ++i)
            out += "," + fmt17(fam.q_samples(i, int(s)));
        out += "\n";
    }
    write_text(path, out);
}

// import counterpart of write_family_csv; grid and linear data come from sd
inline BoundStateFamily read_family_csv(const std::string& path, const SpectralData& sd,
                                        int branch) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    BoundStateFamily fam;
    fam.branch = branch;
    fam.disc = sd.disc;
    fam.mass = sd.mass;
    fam.e_lin = sd.eigenvalues.at(branch);
    fam.phi = sd.eigenfunctions.col(branch);

    std::string line;
    if (!std::getline(in, line) || line.rfind("z,E", 0) != 0)
        throw std::runtime_error("family csv: bad header in " + path);
    std::vector<double> zs, Es;
    std::vector<RVec> qs;
    while (std::getline(in, line)) {
        if (trim_copy(line).empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (int(vals.size()) != 2 + sd.disc.n_points)
            throw std::runtime_error("family csv: column count mismatch in " + path);
        zs.push_back(vals[0]);
        Es.push_back(vals[1]);
        RVec q(sd.disc.n_points);
        for (int i = 0; i < sd.disc.n_points; ++i) q[i] = vals[2 + i];
        qs.push_back(std::move(q));
    }
    if (zs.size() < 2) throw std::runtime_error("family csv: too few samples in " + path);
    fam.zs = zs;
    fam.E_samples = Eigen::Map<RVec>(Es.data(), int(Es.size()));
    fam.q_samples.resize(sd.disc.n_points, int(qs.size()));
    for (std::size_t s = 0; s < qs.size(); ++s) fam.q_samples.col(int(s)) = qs[s];
    fam.build_splines();
    return fam;
}

inline json monomial_json(const MonomialPair& p, int two_n) {
    json j;
    std::vector<int> mu(two_n), nu(two_n);
    for (int i = 0; i < two_n; ++i) {
        mu[i] = p.mu[i];
        nu[i] = p.nu[i];
    }
    j["mu"] = mu;
    j["nu"] = nu;
    j["jtilde"] = int(p.jtilde);
    return j;
}

inline json resonance_table_json(const ResonanceTable& tab) {
    json j;
    j["two_n"] = tab.two_n;
    j["mass"] = tab.mass;
    j["N"] = tab.N;
    j["r"] = tab.r;
    j["tol"] = tab.tol;
    std::vector<double> wt(tab.signed_omegas.data(),
                           tab.signed_omegas.data() + tab.signed_omegas.size());
    j["signed_omegas"] = wt;
    j["M_size"] = tab.M.size();
    j["quarantine_size"] = tab.quarantine.size();
    json mins = json::array();
    for (const auto& p : tab.M_min) mins.push_back(monomial_json(p, tab.two_n));
    j["M_min"] = mins;
    j["Lambda"] = tab.Lambda;
    j["M_L"] = tab.M_L;
    return j;
}

inline json fgr_report_json(const FgrReport& rep, const std::string& method) {
    json j;
    j["Lambda"] = rep.Lambda;
    j["gamma"] = rep.gamma;
    j["total"] = rep.total;
    j["c_certified"] = rep.c_certified;
    j["h4_margin"] = rep.h4_margin;
    j["degenerate"] = rep.degenerate;
    j["low_confidence"] = rep.low_confidence;
    j["method"] = method;
    return j;
}

inline json toy_report_json(const ToyDecayReport& rep) {
    json j;
    j["c_frak"] = rep.c_frak;
    j["exponent"] = rep.exponent;
    j["exponent_target"] = -0.5;  // reduced law y' = -2 pi c y^3
    j["c_fit"] = rep.c_fit;
    j["ode_max_rel_dev"] = rep.ode_max_rel_dev;
    j["fit_t_min"] = rep.fit_t_min;
    j["fit_t_max"] = rep.fit_t_max;
    j["inconclusive"] = rep.inconclusive;
    return j;
}

inline void write_toy_csv(const std::string& path, const ToyDecayReport& rep) {
    std::string out = "t,abs_z_sq\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        out += fmt17(rep.times[i]) + "," + fmt17(rep.y[i]) + "\n";
    write_text(path, out);
}

inline void write_trajectory_csv(const std::string& path, const ModeTrajectory& traj) {
    if (traj.times.empty()) {
        write_text(path, "t\n");
        return;
    }
    const int two_n = int(traj.z_series.front().size());
    std::string out = "t";
    for (int J = 0; J < two_n; ++J)
        out += ",re_z" + std::to_string(J) + ",im_z" + std::to_string(J);
    for (int J = 0; J < two_n; ++J)
        for (int K = J + 1; K < two_n; ++K)
            out += ",Z" + std::to_string(J) + std::to_string(K);
    out += ",local_norm,energy\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += fmt17(traj.times[i]);
        for (int J = 0; J < two_n; ++J)
            out += "," + fmt17(traj.z_series[i][J].real()) + "," +
                   fmt17(traj.z_series[i][J].imag());
        for (int k = 0; k < traj.Zprod_series[i].size(); ++k)
            out += "," + fmt17(traj.Zprod_series[i][k]);
        out += "," + fmt17(traj.radiation_local_norm[i]) + "," +
               fmt17(traj.energy_series[i]) + "\n";
    }
    write_text(path, out);
}

inline json trajectory_fit_json(const ModeTrajectory& traj, const TrajectoryDiagnostics& diag) {
    json j;
    j["survival_index"] = diag.survival_index;
    j["offdiag_tail_max"] = diag.offdiag_tail_max;
    j["sup_zdot_residual"] = diag.sup_zdot_residual;
    j["l2_monomials"] = diag.l2_monomials;
    j["truncated"] = traj.truncated;
    if (traj.truncated) j["truncation_note"] = traj.truncation_note;
    if (!traj.times.empty()) {
        j["t_final"] = traj.times.back();
        j["snapshots"] = traj.times.size();
        std::vector<double> zfin;
        for (int J = 0; J < traj.z_series.back().size(); ++J)
            zfin.push_back(std::abs(traj.z_series.back()[J]));
        j["final_abs_z"] = zfin;
        j["energy_initial"] = traj.energy_series.front();
        j["energy_final"] = traj.energy_series.back();
    }
    return j;
}

}  // namespace kglab
