#include <catch2/catch_amalgamated.hpp>

#include "kglab/config.hpp"
#include "kglab/io.hpp"

#include <cstdio>

using namespace kglab;

namespace {

const std::set<std::string> kToySchema = {"alpha", "beta", "name", "flag"};

std::string temp_path(const std::string& stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("config parsing: comments, whitespace, typed getters") {
    const std::string text =
        "# header comment\n"
        "alpha = 2.5\n"
        "  beta=7   # inline comment\n"
        "name = hello world\n"
        "flag = true\n"
        "\n";
    const Config cfg = Config::parse_string(text, kToySchema);
    CHECK(cfg.get_double("alpha", 0.0) == 2.5);
    CHECK(cfg.get_int("beta", 0) == 7);
    CHECK(cfg.get_string("name", "") == "hello world");
    CHECK(cfg.get_bool("flag", false));
    // defaults for absent keys
    CHECK(cfg.get_double("gamma_absent", 1.5) == 1.5);
    CHECK_FALSE(cfg.has("gamma_absent"));
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS(Config::parse_string("alpha = 1\nbogus_key = 2\n", kToySchema),
                    std::invalid_argument);
    CHECK_THROWS_AS(Config::parse_string("alpha 1\n", kToySchema), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse_string("= 3\n", kToySchema), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse_string("alpha = 1\nalpha = 2\n", kToySchema),
                    std::invalid_argument);
    const Config cfg = Config::parse_string("alpha = 1x\nflag = yes\nbeta = 1.5\n",
                                            {"alpha", "flag", "beta"});
    CHECK_THROWS_AS(cfg.get_double("alpha", 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cfg.get_bool("flag", false), std::invalid_argument);
    CHECK_THROWS_AS(cfg.get_int("beta", 0), std::invalid_argument);
}

TEST_CASE("config hash: stable, order-insensitive, value-sensitive") {
    const Config a = Config::parse_string("alpha = 1\nbeta = 2\n", kToySchema);
    const Config b = Config::parse_string("beta = 2\nalpha = 1\n", kToySchema);
    const Config c = Config::parse_string("alpha = 1\nbeta = 3\n", kToySchema);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("shipped configs satisfy the run schema") {
    for (const char* name : {"full_smoke.cfg", "toy_only.cfg", "free.cfg"}) {
        const std::string path = std::string(KGLAB_CONFIG_DIR) + "/" + name;
        CHECK_NOTHROW(Config::parse_file(path, run_config_schema()));
    }
    CHECK_THROWS_AS(Config::parse_file(temp_path("no_such_file.cfg"), run_config_schema()),
                    std::runtime_error);
}

TEST_CASE("json report round trips through disk") {
    ToyDecayReport rep;
    rep.times = {0.0, 1.0};
    rep.y = {0.01, 0.009};
    rep.c_frak = 32.5;
    rep.exponent = -0.49;
    rep.c_fit = 31.0;
    rep.ode_max_rel_dev = 0.01;
    rep.fit_t_min = 10.0;
    rep.fit_t_max = 100.0;
    const std::string path = temp_path("kglab_toy_fit.json");
    write_json(path, toy_report_json(rep));
    std::ifstream in(path);
    const json back = json::parse(in);
    CHECK(back["c_frak"].get<double>() == 32.5);
    CHECK(back["exponent"].get<double>() == -0.49);
    CHECK(back["exponent_target"].get<double>() == -0.5);
    CHECK_FALSE(back["inconclusive"].get<bool>());
    std::remove(path.c_str());
}

TEST_CASE("resonance table json carries the classification") {
    RVec wt(2);
    wt << 0.4, -0.4;
    const ResonanceTable tab = build_table(wt, 1.0, 2);
    const json j = resonance_table_json(tab);
    CHECK(j["two_n"] == 2);
    CHECK(j["M_min"].size() == tab.M_min.size());
    CHECK(j["Lambda"].size() == tab.Lambda.size());
    for (std::size_t k = 0; k < tab.M_min.size(); ++k) {
        const auto mu = j["M_min"][k]["mu"].get<std::vector<int>>();
        const auto nu = j["M_min"][k]["nu"].get<std::vector<int>>();
        for (int J = 0; J < 2; ++J) {
            CHECK(mu[J] == tab.M_min[k].mu[J]);
            CHECK(nu[J] == tab.M_min[k].nu[J]);
        }
    }
}

TEST_CASE("family csv round trip reproduces the continuation exactly") {
    Discretization disc{Geometry::radial3d, 64, 20.0, std::nullopt};
    PotentialSpec pot;
    pot.wells = {GaussianWell{-1.8, 3.0, 0.0}};
    const Operator op = assemble_operator(disc, pot);
    const SpectralData sd = point_spectrum(op, 1.0);
    REQUIRE(sd.n() >= 1);
    const BoundStateFamily fam = continue_branch(sd, op, 0, default_z_path(0.1, 1e-3, 8));

    const std::string path = temp_path("kglab_family.csv");
    write_family_csv(path, fam);
    const BoundStateFamily back = read_family_csv(path, sd, 0);
    std::remove(path.c_str());

    REQUIRE(back.zs.size() == fam.zs.size());
    for (std::size_t s = 0; s < fam.zs.size(); ++s) {
        CHECK(back.zs[s] == fam.zs[s]);  // %.17g round-trips doubles exactly
        CHECK(back.E_samples[int(s)] == fam.E_samples[int(s)]);
    }
    CHECK((back.q_samples - fam.q_samples).cwiseAbs().maxCoeff() == 0.0);
    // splines rebuilt: interpolation agrees
    RVec q1, q2;
    double e1, e2;
    fam.interpolate(0.05, q1, e1);
    back.interpolate(0.05, q2, e2);
    CHECK(e1 == e2);
    CHECK((q1 - q2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trajectory csv layout") {
    ModeTrajectory traj;
    for (int i = 0; i < 3; ++i) {
        traj.times.push_back(0.5 * i);
        CVec z(2);
        z << cdouble(0.1 * i, 0.2), cdouble(-0.3, 0.01 * i);
        traj.z_series.push_back(z);
        RVec zp(1);
        zp << std::abs(z[0] * std::conj(z[1]));
        traj.Zprod_series.push_back(zp);
        traj.radiation_local_norm.push_back(0.01 * i);
        traj.energy_series.push_back(1.0 - 1e-4 * i);
    }
    const std::string path = temp_path("kglab_traj.csv");
    write_trajectory_csv(path, traj);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,re_z0,im_z0,re_z1,im_z1,Z01,local_norm,energy");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    std::remove(path.c_str());
}
