#pragma once

// Spatial discretization for the radial-3D / line-1D Klein-Gordon lab.
//
// In radial3d geometry the stored field is w(r) = r*u(r) on the uniform
// interior grid r_i = i*h, i = 1..n, with Dirichlet conditions w(0) = w(R) = 0.
// The radial Laplacian acting on u then reduces to -d^2/dr^2 acting on w, and
// the L^2(R^3) inner product of radial functions becomes 4*pi * int |w|^2 dr.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kglab {

using cdouble = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

enum class Geometry { radial3d, line1d };

struct SpongeSpec {
    double width = 0.0;
    double strength = 0.0;
};

struct Discretization {
    Geometry geometry = Geometry::radial3d;
    int n_points = 0;
    double domain_radius = 0.0;
    std::optional<SpongeSpec> sponge;  // absent -> plain Dirichlet

    void validate() const {
        if (n_points < 16) throw std::invalid_argument("Discretization: n_points must be >= 16");
        if (domain_radius <= 0.0) throw std::invalid_argument("Discretization: domain_radius must be > 0");
        if (sponge && sponge->width >= domain_radius)
            throw std::invalid_argument("Discretization: sponge width must be < domain_radius");
    }

    // grid spacing; interior nodes only, both ends are Dirichlet
    double spacing() const {
        const double len = (geometry == Geometry::radial3d) ? domain_radius : 2.0 * domain_radius;
        return len / (n_points + 1);
    }

    // node coordinates: r_i = i*h (radial) or x_i = -R + i*h (line)
    RVec nodes() const {
        const double h = spacing();
        RVec x(n_points);
        const double x0 = (geometry == Geometry::radial3d) ? 0.0 : -domain_radius;
        for (int i = 0; i < n_points; ++i) x[i] = x0 + (i + 1) * h;
        return x;
    }

    // quadrature weight per node for the discrete L^2 inner product
    double measure() const {
        return (geometry == Geometry::radial3d) ? 4.0 * kPi * spacing() : spacing();
    }

    bool same_grid(const Discretization& o) const {
        return geometry == o.geometry && n_points == o.n_points &&
               domain_radius == o.domain_radius;
    }
};

// real inner product of eq-style <g|h> = Re int g conj(h)
inline double inner(const Discretization& d, const CVec& f, const CVec& g) {
    return d.measure() * f.conjugate().cwiseProduct(g).sum().real();
}
inline double inner(const Discretization& d, const RVec& f, const RVec& g) {
    return d.measure() * f.dot(g);
}
// full complex pairing int f conj(g)  (note: conjugate on the second slot)
inline cdouble cinner(const Discretization& d, const CVec& f, const CVec& g) {
    return d.measure() * g.conjugate().cwiseProduct(f).sum();
}
inline double norm(const Discretization& d, const CVec& f) {
    return std::sqrt(d.measure()) * f.norm();
}
inline double norm(const Discretization& d, const RVec& f) {
    return std::sqrt(d.measure()) * f.norm();
}

// first-order Klein-Gordon state (u, v) = (u, du/dt) on one grid
struct FieldState {
    CVec u;
    CVec v;
    double time = 0.0;

    static FieldState zero(const Discretization& d) {
        FieldState s;
        s.u = CVec::Zero(d.n_points);
        s.v = CVec::Zero(d.n_points);
        return s;
    }
    FieldState& operator+=(const FieldState& o) {
        u += o.u;
        v += o.v;
        return *this;
    }
    FieldState operator-(const FieldState& o) const {
        FieldState s;
        s.u = u - o.u;
        s.v = v - o.v;
        s.time = time;
        return s;
    }
    FieldState operator*(cdouble a) const {
        FieldState s;
        s.u = a * u;
        s.v = a * v;
        s.time = time;
        return s;
    }
};

struct GaussianWell {
    double depth = 0.0;   // signed amplitude; negative = attractive
    double width = 1.0;
    double center = 0.0;
    double operator()(double x) const {
        const double s = (x - center) / width;
        return depth * std::exp(-s * s);
    }
};

enum class PotentialForm { gaussian_well, sum_of_gaussians, tabulated };

struct PotentialSpec {
    PotentialForm form = PotentialForm::gaussian_well;
    std::vector<GaussianWell> wells;  // one entry for gaussian_well
    RVec samples;                     // used when form == tabulated

    static PotentialSpec free_potential() {
        PotentialSpec p;
        p.form = PotentialForm::gaussian_well;
        p.wells = {GaussianWell{0.0, 1.0, 0.0}};
        return p;
    }

    RVec evaluate(const Discretization& d) const {
        if (form == PotentialForm::tabulated) {
            if (samples.size() != d.n_points)
                throw std::invalid_argument("PotentialSpec: tabulated sample count mismatch");
            return samples;
        }
        const RVec x = d.nodes();
        RVec v = RVec::Zero(d.n_points);
        for (const auto& w : wells)
            for (int i = 0; i < d.n_points; ++i) v[i] += w(x[i]);
        return v;
    }

    // Schwartz-decay surrogate: values at the boundary below 1e-12 of the peak,
    // and well widths resolved by at least 4 grid spacings.
    void validate(const Discretization& d) const {
        const RVec v = evaluate(d);
        const double peak = v.cwiseAbs().maxCoeff();
        if (peak == 0.0) return;  // free potential
        const double edge = std::abs(v[d.n_points - 1]);
        if (edge > 1e-12 * peak)
            throw std::invalid_argument(
                "PotentialSpec: potential does not decay below 1e-12 of peak at grid boundary");
        if (form != PotentialForm::tabulated) {
            const double h = d.spacing();
            for (const auto& w : wells)
                if (w.depth != 0.0 && w.width < 4.0 * h)
                    throw std::invalid_argument(
                        "PotentialSpec: well width " + std::to_string(w.width) +
                        " narrower than 4 grid spacings (h=" + std::to_string(h) + ")");
        }
    }
};

}  // namespace kglab
