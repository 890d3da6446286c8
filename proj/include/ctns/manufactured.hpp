#pragma once
/**
 * @file manufactured.hpp
 * @brief Closed-form solution triples and their hand-derived source terms
 *        for the regularized system on the unit box.
 *
 *   n = 1.5 + 0.5 cos(πx)cos(πy) e^{−t}
 *   c = 1 + 0.25 cos(πx) e^{−t}
 *   u = U e^{−t} (sin²(πx) sin(2πy), −sin(2πx) sin²(πy), 0)
 *
 * The velocity vanishes on every wall and is exactly divergence free. The
 * manufactured pressure is zero and the filter is switched off, so the
 * convecting velocity equals u.
 */

#include "ctns/cell_solver.hpp"
#include "ctns/fields.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ctns {

enum class ManufacturedKind { none, coupled, n_only, c_only, u_only, constant };

inline std::string to_string(ManufacturedKind k) {
    switch (k) {
    case ManufacturedKind::none: return "none";
    case ManufacturedKind::coupled: return "coupled";
    case ManufacturedKind::n_only: return "n_only";
    case ManufacturedKind::c_only: return "c_only";
    case ManufacturedKind::u_only: return "u_only";
    case ManufacturedKind::constant: return "constant";
    }
    return "none";
}

inline ManufacturedKind manufactured_kind_from_string(const std::string& s) {
    for (auto k : {ManufacturedKind::none, ManufacturedKind::coupled, ManufacturedKind::n_only,
                   ManufacturedKind::c_only, ManufacturedKind::u_only, ManufacturedKind::constant}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown manufactured recipe '" + s + "'");
}

struct ManufacturedSolution {
    ManufacturedKind kind = ManufacturedKind::coupled;
    double m = 1.5;
    double epsilon = 0.01;
    double velocity_amplitude = 0.5;  ///< U
    double g = 1.0;                   ///< potential φ = g·x
    double constant_value = 1.0;      ///< level of the steady-constant recipe
    bool z_walls = false;             ///< 3D: velocity carries the profile sin²(πz)

    /// Decoupled recipes evolve one equation; the other fields are pinned to their exact values.
    bool evolves_n() const { return all() || kind == ManufacturedKind::n_only; }
    bool evolves_c() const { return all() || kind == ManufacturedKind::c_only; }
    bool evolves_u() const { return all() || kind == ManufacturedKind::u_only; }

    // ---- exact fields ------------------------------------------------------

    double n(double x, double y, double, double t) const {
        if (kind == ManufacturedKind::constant) return constant_value;
        if (kind == ManufacturedKind::u_only) return 0.0;
        return 1.5 + 0.5 * std::cos(pi * x) * std::cos(pi * y) * std::exp(-t);
    }

    double c(double x, double, double, double t) const {
        if (kind == ManufacturedKind::constant) return constant_value;
        if (kind == ManufacturedKind::n_only || kind == ManufacturedKind::u_only) return 1.0;
        return 1.0 + 0.25 * std::cos(pi * x) * std::exp(-t);
    }

    double u(int d, double x, double y, double z, double t) const {
        if (!(kind == ManufacturedKind::coupled || kind == ManufacturedKind::u_only)) return 0.0;
        return velocity(x, y, z, t)[d];
    }

    // ---- sources -----------------------------------------------------------

    /// n_t + u·∇n − ∇·(D(n)∇n) + ∇·(sat(n)∇c).
    double source_n(double x, double y, double z, double t) const {
        if (!evolves_n()) return 0.0;
        if (kind == ManufacturedKind::constant) return 0.0;
        const double e = std::exp(-t);
        const double cx = std::cos(pi * x), sx = std::sin(pi * x);
        const double cy = std::cos(pi * y), sy = std::sin(pi * y);
        const double nv = 1.5 + 0.5 * cx * cy * e;
        const double nt = -0.5 * cx * cy * e;
        const double nx = -0.5 * pi * sx * cy * e;
        const double ny = -0.5 * pi * cx * sy * e;
        const double lap_n = -pi * pi * cx * cy * e;
        const double dn = m * std::pow(nv + epsilon, m - 1.0);
        const double ddn = m * (m - 1.0) * std::pow(nv + epsilon, m - 2.0);
        double s = nt - (ddn * (nx * nx + ny * ny) + dn * lap_n);
        if (kind == ManufacturedKind::coupled) {
            const auto v = velocity(x, y, z, t);
            s += v[0] * nx + v[1] * ny;
            const double cxg = -0.25 * pi * sx * e;
            const double lap_c = -0.25 * pi * pi * cx * e;
            const double q = 1.0 + epsilon * nv;
            const double sat = nv / (q * q * q);
            const double dsat = (1.0 - 2.0 * epsilon * nv) / (q * q * q * q);
            s += dsat * nx * cxg + sat * lap_c;
        }
        return s;
    }

    /// c_t + u·∇c − Δc + c − n.
    double source_c(double x, double y, double z, double t) const {
        if (!evolves_c()) return 0.0;
        if (kind == ManufacturedKind::constant) return 0.0;
        const double e = std::exp(-t);
        const double cx = std::cos(pi * x), sx = std::sin(pi * x);
        const double cv = 1.0 + 0.25 * cx * e;
        const double ct = -0.25 * cx * e;
        const double cxg = -0.25 * pi * sx * e;
        const double lap_c = -0.25 * pi * pi * cx * e;
        double s = ct - lap_c + cv - n(x, y, z, t);
        if (kind == ManufacturedKind::coupled) s += velocity(x, y, z, t)[0] * cxg;
        return s;
    }

    /// u_t + (u·∇)u − Δu − n∇φ, component d.
    double source_u(int d, double x, double y, double z, double t) const {
        if (!evolves_u()) return 0.0;
        if (kind == ManufacturedKind::constant) return 0.0;
        if (d == 2) return 0.0;
        const double a = velocity_amplitude * std::exp(-t);
        const double sx = std::sin(pi * x), sy = std::sin(pi * y);
        const double s2x = std::sin(2 * pi * x), s2y = std::sin(2 * pi * y);
        const double c2x = std::cos(2 * pi * x), c2y = std::cos(2 * pi * y);
        const double ux = a * sx * sx * s2y;
        const double uy = -a * s2x * sy * sy;
        const double dux_dx = a * pi * s2x * s2y;
        const double dux_dy = a * sx * sx * 2 * pi * c2y;
        const double duy_dx = -a * 2 * pi * c2x * sy * sy;
        const double duy_dy = -a * s2x * pi * s2y;
        const double p2 = pi * pi;
        const double lap_ux = a * (2 * p2 * c2x * s2y - 4 * p2 * sx * sx * s2y);
        const double lap_uy = -a * (-4 * p2 * s2x * sy * sy + 2 * p2 * s2x * c2y);
        const double f = profile(z), f2 = profile_dd(z);
        double s;
        if (d == 0) {
            s = f * (-ux - lap_ux) + f * f * (ux * dux_dx + uy * dux_dy) - f2 * ux;
            if (kind == ManufacturedKind::coupled) s -= n(x, y, z, t) * g;
        } else {
            s = f * (-uy - lap_uy) + f * f * (ux * duy_dx + uy * duy_dy) - f2 * uy;
        }
        return s;
    }

private:
    static constexpr double pi = std::numbers::pi;

    bool all() const { return kind == ManufacturedKind::coupled || kind == ManufacturedKind::constant; }

    double profile(double z) const {
        if (!z_walls) return 1.0;
        const double sz = std::sin(pi * z);
        return sz * sz;
    }

    double profile_dd(double z) const { return z_walls ? 2.0 * pi * pi * std::cos(2.0 * pi * z) : 0.0; }

    std::array<double, 3> velocity(double x, double y, double z, double t) const {
        const double a = velocity_amplitude * std::exp(-t) * profile(z);
        const double sx = std::sin(pi * x), sy = std::sin(pi * y);
        return {a * sx * sx * std::sin(2 * pi * y), -a * std::sin(2 * pi * x) * sy * sy, 0.0};
    }
};

// ---- sampling helpers ------------------------------------------------------

inline ScalarField sample_n(const ManufacturedSolution& ms, const Grid& g, double t) {
    ScalarField f(g);
    f.sample([&](double x, double y, double z) { return ms.n(x, y, z, t); });
    return f;
}

inline ScalarField sample_c(const ManufacturedSolution& ms, const Grid& g, double t) {
    ScalarField f(g);
    f.sample([&](double x, double y, double z) { return ms.c(x, y, z, t); });
    return f;
}

inline VectorField sample_u(const ManufacturedSolution& ms, const Grid& g, double t) {
    VectorField v(g);
    v.sample([&](int d, double x, double y, double z) { return ms.u(d, x, y, z, t); });
    return v;
}

inline ScalarField sample_source_n(const ManufacturedSolution& ms, const Grid& g, double t) {
    ScalarField f(g);
    f.sample([&](double x, double y, double z) { return ms.source_n(x, y, z, t); });
    return f;
}

inline ScalarField sample_source_c(const ManufacturedSolution& ms, const Grid& g, double t) {
    ScalarField f(g);
    f.sample([&](double x, double y, double z) { return ms.source_c(x, y, z, t); });
    return f;
}

inline VectorField sample_source_u(const ManufacturedSolution& ms, const Grid& g, double t) {
    VectorField v(g);
    v.sample([&](int d, double x, double y, double z) { return ms.source_u(d, x, y, z, t); });
    return v;
}

} // namespace ctns
