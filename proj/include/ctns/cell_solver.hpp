#pragma once
/**
 * @file cell_solver.hpp
 * @brief One step of n_t + u·∇n = ∇·(m(n+ε)^{m−1}∇n − n/(1+εn)³ ∇c)
 *        in conservative flux form.
 *
 * Diffusion is explicit and sub-cycled under the diffusive limit; the
 * chemotactic and advective fluxes then take one explicit upwind step.
 */

#include "ctns/calculus.hpp"
#include "ctns/errors.hpp"

#include <cmath>

namespace ctns {

enum class FaceAverage { arithmetic, harmonic };

struct CellStepParams {
    double m = 1.5;
    double epsilon = 0.01;
    double dt = 1e-3;
    double cfl = 0.5;
    bool force_cfl = false;
    FaceAverage face_average = FaceAverage::arithmetic;
    int diffusion_substeps = 0;  ///< 0 picks the smallest stable count
    const ScalarField* mms_source = nullptr;

    void validate() const {
        if (!(m > 1.0)) throw std::invalid_argument("CellStepParams: m must exceed 1");
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("CellStepParams: epsilon must lie in (0,1]");
        if (!(dt > 0.0)) throw std::invalid_argument("CellStepParams: dt must be positive");
        if (!(cfl > 0.0)) throw std::invalid_argument("CellStepParams: cfl must be positive");
        if (diffusion_substeps < 0) throw std::invalid_argument("CellStepParams: negative substep count");
    }
};

inline double saturated_sensitivity(double s, double eps) {
    const double q = 1.0 + eps * s;
    return s / (q * q * q);
}

inline double diffusion_coefficient(double s, double m, double eps) { return m * std::pow(s + eps, m - 1.0); }

namespace detail {
inline double face_coefficient(double nl, double nr, const CellStepParams& p) {
    if (p.face_average == FaceAverage::arithmetic) return diffusion_coefficient(0.5 * (nl + nr), p.m, p.epsilon);
    const double a = diffusion_coefficient(nl, p.m, p.epsilon);
    const double b = diffusion_coefficient(nr, p.m, p.epsilon);
    return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
}
} // namespace detail

/// F = m(n_face+ε)^{m−1}(n_R − n_L)/h on interior faces; walls carry no flux.
inline VectorField degenerate_diffusion_flux(const ScalarField& n, const CellStepParams& p) {
    const Grid& g = n.grid();
    VectorField out(g);
    const auto& a = n.array();
    for (int d = 0; d < g.ndim(); ++d) {
        auto& o = out.comp(d);
        const std::ptrdiff_t s = a.stride(d);
        const double inv_h = 1.0 / g.h(d);
        out.for_each_face(d, [&](int i, int j, int k) {
            if (out.is_wall_face(d, i, j, k)) return;
            const std::size_t c = a.index(i, j, k);
            const double nl = a.data()[c - s];
            const double nr = a.data()[c];
            o(i, j, k) = detail::face_coefficient(nl, nr, p) * (nr - nl) * inv_h;
        });
    }
    out.apply_bc();
    return out;
}

/// G = sat(n_up)(c_R − c_L)/h with n_up taken from the cell the drift leaves.
inline VectorField chemotaxis_flux(const ScalarField& n, const ScalarField& c, const CellStepParams& p) {
    const Grid& g = n.grid();
    VectorField out(g);
    const auto& a = n.array();
    const auto& b = c.array();
    for (int d = 0; d < g.ndim(); ++d) {
        auto& o = out.comp(d);
        const std::ptrdiff_t s = a.stride(d);
        const double inv_h = 1.0 / g.h(d);
        out.for_each_face(d, [&](int i, int j, int k) {
            if (out.is_wall_face(d, i, j, k)) return;
            const std::size_t q = a.index(i, j, k);
            const double grad_c = (b.data()[q] - b.data()[q - s]) * inv_h;
            const double n_up = grad_c > 0.0 ? a.data()[q - s] : a.data()[q];
            o(i, j, k) = saturated_sensitivity(n_up, p.epsilon) * grad_c;
        });
    }
    out.apply_bc();
    return out;
}

/// Upwind flux q_up·u on interior faces.
inline VectorField advective_flux(const ScalarField& q, const VectorField& u) {
    const Grid& g = q.grid();
    VectorField out(g);
    const auto& a = q.array();
    for (int d = 0; d < g.ndim(); ++d) {
        auto& o = out.comp(d);
        const auto& v = u.comp(d);
        const std::ptrdiff_t s = a.stride(d);
        out.for_each_face(d, [&](int i, int j, int k) {
            if (out.is_wall_face(d, i, j, k)) return;
            const double w = v(i, j, k);
            const std::size_t c = a.index(i, j, k);
            o(i, j, k) = w * (w > 0.0 ? a.data()[c - s] : a.data()[c]);
        });
    }
    out.apply_bc();
    return out;
}

/**
 * Largest dt·(outgoing face speed sum)/h over all cells, counting advective
 * speeds u and chemotactic drift ∇c. Keeping this below 1 makes the upwind
 * transport step positivity preserving because sat(s) ≤ s.
 */
inline double transport_cfl_number(const ScalarField* c, const VectorField* u, double dt) {
    const Grid& g = c ? c->grid() : u->grid();
    double worst = 0.0;
    const auto& dims = g.dims();
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                double out = 0.0;
                const std::array<int, 3> idx{i, j, k};
                for (int d = 0; d < g.ndim(); ++d) {
                    const double inv_h = 1.0 / g.h(d);
                    std::array<int, 3> up = idx;
                    up[d] += 1;
                    if (u) {
                        const double lo = (*u)(d, i, j, k);
                        const double hi = (*u)(d, up[0], up[1], up[2]);
                        out += (std::max(hi, 0.0) + std::max(-lo, 0.0)) * inv_h;
                    }
                    if (c) {
                        std::array<int, 3> dn = idx;
                        dn[d] -= 1;
                        const double here = (*c)(i, j, k);
                        const double g_hi = idx[d] + 1 < dims[d] ? ((*c)(up[0], up[1], up[2]) - here) * inv_h : 0.0;
                        const double g_lo = idx[d] > 0 ? (here - (*c)(dn[0], dn[1], dn[2])) * inv_h : 0.0;
                        out += (std::max(g_hi, 0.0) + std::max(-g_lo, 0.0)) * inv_h;
                    }
                }
                worst = std::max(worst, dt * out);
            }
    return worst;
}

/// Substep count that keeps each explicit diffusion substep positivity preserving.
inline int diffusion_substep_count(const ScalarField& n, const CellStepParams& p) {
    if (p.diffusion_substeps > 0) return p.diffusion_substeps;
    const Grid& g = n.grid();
    const double dmax = diffusion_coefficient(std::max(n.max(), 0.0), p.m, p.epsilon);
    double rate = 0.0;
    for (int d = 0; d < g.ndim(); ++d) rate += 2.0 * dmax / (g.h(d) * g.h(d));
    return std::max(1, static_cast<int>(std::ceil(p.dt * rate * (1.0 + 1e-12))));
}

namespace detail {
inline void add_scaled_div(ScalarField& target, const VectorField& flux, double scale) {
    const ScalarField dv = div(flux);
    auto& t = target.array();
    const auto& a = dv.array();
    target.for_each_cell([&](int i, int j, int k) { t(i, j, k) += scale * a(i, j, k); });
}

/// Clamps roundoff negatives to zero; anything below -threshold raises NegativeDensity.
inline void enforce_nonnegative(ScalarField& f, double threshold) {
    auto& a = f.array();
    double worst = 0.0;
    f.for_each_cell([&](int i, int j, int k) {
        double& v = a(i, j, k);
        if (v < 0.0) {
            worst = std::min(worst, v);
            if (v > -threshold) v = 0.0;
        }
    });
    if (worst <= -threshold) throw NegativeDensity(worst);
    f.apply_bc();
}
} // namespace detail

inline ScalarField step_n(const ScalarField& n, const ScalarField& c, const VectorField& u, const CellStepParams& p) {
    p.validate();
    if (!(n.grid() == c.grid()) || !(n.grid() == u.grid())) throw std::invalid_argument("step_n: grid mismatch");

    const double cfl = transport_cfl_number(&c, &u, p.dt);
    if (cfl > p.cfl && !p.force_cfl) throw CflViolation(cfl, p.cfl);

    ScalarField cur = n;
    cur.apply_bc();
    const int substeps = diffusion_substep_count(cur, p);
    const double dts = p.dt / substeps;
    for (int s = 0; s < substeps; ++s) {
        const VectorField flux = degenerate_diffusion_flux(cur, p);
        detail::add_scaled_div(cur, flux, dts);
        cur.apply_bc();
    }

    ScalarField next = cur;
    detail::add_scaled_div(next, chemotaxis_flux(cur, c, p), -p.dt);
    detail::add_scaled_div(next, advective_flux(cur, u), -p.dt);
    if (p.mms_source) {
        auto& a = next.array();
        const auto& src = p.mms_source->array();
        next.for_each_cell([&](int i, int j, int k) { a(i, j, k) += p.dt * src(i, j, k); });
    }
    next.apply_bc();
    detail::enforce_nonnegative(next, 1e-14);
    return next;
}

} // namespace ctns
