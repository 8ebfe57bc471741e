#pragma once

// shared two-branch test fixture: gaussian well with n = 2 bound states,
// continued to |z| = 0.5; built once per test binary

#include "kglab/bound_states.hpp"

#include <catch2/catch_amalgamated.hpp>

namespace kglab::testing {

struct Lab {
    Discretization disc;
    Operator op;
    SpectralData sd;
    std::vector<BoundStateFamily> fams;
};

inline const Lab& lab() {
    static const Lab L = [] {
        Lab l;
        l.disc = Discretization{Geometry::radial3d, 384, 40.0, std::nullopt};
        PotentialSpec pot;
        pot.wells = {GaussianWell{-1.4, 5.0, 0.0}};
        l.op = assemble_operator(l.disc, pot);
        l.sd = point_spectrum(l.op, 1.0);
        REQUIRE(l.sd.n() == 2);
        const auto path = default_z_path(0.5, 1e-3, 24);
        for (int j = 0; j < l.sd.n(); ++j)
            l.fams.push_back(continue_branch(l.sd, l.op, j, path));
        return l;
    }();
    return L;
}

}  // namespace kglab::testing
