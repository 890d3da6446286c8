#pragma once
/**
 * @file calculus.hpp
 * @brief Midpoint reductions and second-order MAC stencils.
 *
 * grad lands on faces, div lands on cells, and laplace is exactly
 * div(grad(.)) evaluated in one sweep. All operators expect the ghost layer
 * of their input to be current.
 */

#include "ctns/fields.hpp"

#include <cmath>
#include <limits>

namespace ctns {

inline double integrate(const ScalarField& f) {
    CompensatedSum s;
    const auto& a = f.array();
    f.for_each_cell([&](int i, int j, int k) { s.add(a(i, j, k)); });
    return s.value() * f.grid().cell_volume();
}

/// Σ f·g·vol over interior cells.
inline double inner(const ScalarField& f, const ScalarField& g) {
    CompensatedSum s;
    const auto& a = f.array();
    const auto& b = g.array();
    f.for_each_cell([&](int i, int j, int k) { s.add(a(i, j, k) * b(i, j, k)); });
    return s.value() * f.grid().cell_volume();
}

inline double lp_norm(const ScalarField& f, double p) {
    if (std::isinf(p) && p > 0) {
        double m = 0.0;
        const auto& a = f.array();
        f.for_each_cell([&](int i, int j, int k) { m = std::max(m, std::abs(a(i, j, k))); });
        return m;
    }
    if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
    CompensatedSum s;
    const auto& a = f.array();
    f.for_each_cell([&](int i, int j, int k) { s.add(std::pow(std::abs(a(i, j, k)), p)); });
    return std::pow(s.value() * f.grid().cell_volume(), 1.0 / p);
}

/// Σ over all faces of a·b·vol.
inline double inner(const VectorField& a, const VectorField& b) {
    CompensatedSum s;
    for (int d = 0; d < a.ncomp(); ++d) {
        const auto& x = a.comp(d);
        const auto& y = b.comp(d);
        a.for_each_face(d, [&](int i, int j, int k) { s.add(x(i, j, k) * y(i, j, k)); });
    }
    return s.value() * a.grid().cell_volume();
}

inline double l2_norm(const VectorField& u) { return std::sqrt(inner(u, u)); }

/// Face gradient; wall faces are left at zero (no-flux).
inline VectorField grad(const ScalarField& f) {
    const Grid& g = f.grid();
    VectorField out(g);
    const auto& a = f.array();
    for (int d = 0; d < g.ndim(); ++d) {
        auto& o = out.comp(d);
        const double inv_h = 1.0 / g.h(d);
        const std::ptrdiff_t s = a.stride(d);
        out.for_each_face(d, [&](int i, int j, int k) {
            if (out.is_wall_face(d, i, j, k)) return;
            const std::size_t c = a.index(i, j, k);
            o(i, j, k) = (a.data()[c] - a.data()[c - s]) * inv_h;
        });
    }
    out.apply_bc();
    return out;
}

inline ScalarField div(const VectorField& v) {
    const Grid& g = v.grid();
    ScalarField out(g);
    auto& o = out.array();
    for (int d = 0; d < g.ndim(); ++d) {
        const auto& a = v.comp(d);
        const double inv_h = 1.0 / g.h(d);
        const std::ptrdiff_t s = a.stride(d);
        out.for_each_cell([&](int i, int j, int k) {
            const std::size_t c = a.index(i, j, k);
            o(i, j, k) += (a.data()[c + s] - a.data()[c]) * inv_h;
        });
    }
    out.apply_bc();
    return out;
}

/// Writes div(grad f) into out (interior cells), same arithmetic as the composition.
inline void laplace_into(const ScalarField& f, ScalarField& out) {
    const Grid& g = f.grid();
    const auto& a = f.array();
    auto& o = out.array();
    const auto& n = g.dims();
    const double* fp = a.ptr();
    double* op = o.ptr();
    for (int k = 0; k < n[2]; ++k) {
        for (int j = 0; j < n[1]; ++j) {
            const std::size_t row = a.index(0, j, k);
            for (int i = 0; i < n[0]; ++i) op[row + i] = 0.0;
            for (int d = 0; d < g.ndim(); ++d) {
                const double inv_h = 1.0 / g.h(d);
                const std::ptrdiff_t s = a.stride(d);
                for (int i = 0; i < n[0]; ++i) {
                    const std::size_t c = row + i;
                    const double up = (fp[c + s] - fp[c]) * inv_h;
                    const double dn = (fp[c] - fp[c - s]) * inv_h;
                    op[c] += (up - dn) * inv_h;
                }
            }
        }
    }
}

inline ScalarField laplace(const ScalarField& f) {
    ScalarField out(f.grid());
    laplace_into(f, out);
    out.apply_bc();
    return out;
}

/// Componentwise Laplacian on interior faces using the no-slip ghosts; wall faces get 0.
inline void vector_laplacian_into(const VectorField& u, VectorField& out) {
    const Grid& g = u.grid();
    for (int d = 0; d < g.ndim(); ++d) {
        const auto& a = u.comp(d);
        auto& o = out.comp(d);
        const double* up = a.ptr();
        double* op = o.ptr();
        u.for_each_face(d, [&](int i, int j, int k) {
            const std::size_t c = a.index(i, j, k);
            if (u.is_wall_face(d, i, j, k)) {
                op[c] = 0.0;
                return;
            }
            double acc = 0.0;
            for (int e = 0; e < g.ndim(); ++e) {
                const double inv_h = 1.0 / g.h(e);
                const std::ptrdiff_t s = a.stride(e);
                acc += ((up[c + s] - up[c]) * inv_h - (up[c] - up[c - s]) * inv_h) * inv_h;
            }
            op[c] = acc;
        });
    }
}

inline VectorField vector_laplacian(const VectorField& u) {
    VectorField out(u.grid());
    vector_laplacian_into(u, out);
    out.apply_bc();
    return out;
}

/// Σ over interior faces of |grad f|²·vol.
inline double grad_norm_sq(const ScalarField& f) {
    const Grid& g = f.grid();
    const auto& a = f.array();
    CompensatedSum s;
    for (int d = 0; d < g.ndim(); ++d) {
        const double inv_h = 1.0 / g.h(d);
        const std::ptrdiff_t st = a.stride(d);
        f.for_each_cell([&](int i, int j, int k) {
            const int idx = d == 0 ? i : (d == 1 ? j : k);
            if (idx == 0) return;
            const std::size_t c = a.index(i, j, k);
            const double q = (a.data()[c] - a.data()[c - st]) * inv_h;
            s.add(q * q);
        });
    }
    return s.value() * g.cell_volume();
}

/**
 * Discrete ∫|∇u|² for a no-slip face field. Tangential differences that
 * straddle a wall live on the wall itself and carry half weight, which makes
 * the result equal to -inner(u, vector_laplacian(u)).
 */
inline double vector_grad_norm_sq(const VectorField& u) {
    const Grid& g = u.grid();
    CompensatedSum s;
    for (int d = 0; d < g.ndim(); ++d) {
        const auto& a = u.comp(d);
        const auto& n = a.n();
        for (int e = 0; e < g.ndim(); ++e) {
            const double inv_h = 1.0 / g.h(e);
            const std::ptrdiff_t st = a.stride(e);
            std::array<int, 3> lo{0, 0, 0}, hi{n[0], n[1], n[2]};
            if (e == d) {
                hi[e] = n[e] - 1;
            } else {
                lo[d] = 1;
                hi[d] = n[d] - 1;
                lo[e] = -1;
            }
            for (int k = lo[2]; k < hi[2]; ++k)
                for (int j = lo[1]; j < hi[1]; ++j)
                    for (int i = lo[0]; i < hi[0]; ++i) {
                        const std::size_t c = a.index(i, j, k);
                        const double q = (a.data()[c + st] - a.data()[c]) * inv_h;
                        double w = 1.0;
                        if (e != d) {
                            const int idx = e == 0 ? i : (e == 1 ? j : k);
                            if (idx == -1 || idx == n[e] - 1) w = 0.5;
                        }
                        s.add(w * q * q);
                    }
        }
    }
    return s.value() * g.cell_volume();
}

inline double max_abs_interior(const ScalarField& f) { return lp_norm(f, std::numeric_limits<double>::infinity()); }

} // namespace ctns
