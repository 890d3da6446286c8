#pragma once
/**
 * @file linear_solvers.hpp
 * @brief Matrix-free preconditioned conjugate gradient plus the three
 *        symmetric operators the steppers need: scalar Helmholtz (Neumann),
 *        vector Helmholtz (no-slip) and the Neumann pressure Poisson problem.
 */

#include "ctns/calculus.hpp"
#include "ctns/errors.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace ctns {

struct CgOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_iterations = 1000;
    bool zero_mean = false;  ///< project residuals onto mean-zero vectors (singular Neumann systems)
    std::string label = "conjugate gradient";
};

struct CgResult {
    int iterations = 0;
    double residual_norm = 0.0;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
    CompensatedSum s;
    for (std::size_t q = 0; q < a.size(); ++q) s.add(a[q] * b[q]);
    return s.value();
}
inline void remove_mean(std::vector<double>& v) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    const double m = s.value() / static_cast<double>(v.size());
    for (double& x : v) x -= m;
}
} // namespace detail

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Stops when ‖r‖₂ ≤ max(rel_tol·‖b‖₂, abs_tol); throws LinearSolveFailure otherwise.
inline CgResult conjugate_gradient(const LinearOperator& apply, std::span<const double> inv_diag,
                                   std::span<const double> b_in, std::vector<double>& x,
                                   const CgOptions& opt) {
    const std::size_t n = b_in.size();
    std::vector<double> b(b_in.begin(), b_in.end());
    if (x.size() != n) x.assign(n, 0.0);
    if (opt.zero_mean) {
        detail::remove_mean(b);
        detail::remove_mean(x);
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x, ap);
    for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - ap[q];
    if (opt.zero_mean) detail::remove_mean(r);

    const double target = std::max(opt.rel_tol * std::sqrt(detail::dot(b, b)), opt.abs_tol);
    double rnorm = std::sqrt(detail::dot(r, r));
    CgResult res;
    res.residual_norm = rnorm;
    if (rnorm <= target) return res;

    auto precondition = [&]() {
        for (std::size_t q = 0; q < n; ++q) z[q] = inv_diag.empty() ? r[q] : inv_diag[q] * r[q];
        if (opt.zero_mean) detail::remove_mean(z);
    };
    precondition();
    p = z;
    double rz = detail::dot(r, z);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        apply(p, ap);
        const double pap = detail::dot(p, ap);
        if (!(pap > 0.0)) throw LinearSolveFailure(opt.label + " lost positive definiteness", it, rnorm);
        const double alpha = rz / pap;
        for (std::size_t q = 0; q < n; ++q) {
            x[q] += alpha * p[q];
            r[q] -= alpha * ap[q];
        }
        if (opt.zero_mean) detail::remove_mean(r);
        rnorm = std::sqrt(detail::dot(r, r));
        res.iterations = it;
        res.residual_norm = rnorm;
        if (rnorm <= target) {
            if (opt.zero_mean) detail::remove_mean(x);
            return res;
        }
        precondition();
        const double rz_new = detail::dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t q = 0; q < n; ++q) p[q] = z[q] + beta * p[q];
    }
    throw LinearSolveFailure(opt.label, opt.max_iterations, rnorm);
}

// ============================================================================
// Operators
// ============================================================================

/// Default iteration cap: ten sweeps per cell along every axis.
inline int default_max_iterations(const Grid& g) {
    int s = 0;
    for (int a = 0; a < g.ndim(); ++a) s += g.dim(a);
    return 10 * s;
}

/**
 * Solves (σ·I − α·Δ_h) x = b on interior cells with homogeneous Neumann walls.
 * σ > 0, α ≥ 0. x is used as the initial guess.
 */
inline CgResult solve_scalar_helmholtz(double sigma, double alpha, const ScalarField& b, ScalarField& x,
                                       double rel_tol, int max_iterations) {
    const Grid& g = b.grid();
    ScalarField work(g), lap(g);
    LinearOperator apply = [&](std::span<const double> in, std::span<double> out) {
        work.set_interior(in);
        laplace_into(work, lap);
        std::size_t q = 0;
        const auto& w = work.array();
        const auto& l = lap.array();
        work.for_each_cell([&](int i, int j, int k) {
            out[q++] = sigma * w(i, j, k) - alpha * l(i, j, k);
        });
    };
    std::vector<double> inv_diag;
    inv_diag.reserve(g.cell_count());
    b.for_each_cell([&](int i, int j, int k) {
        const std::array<int, 3> idx{i, j, k};
        double d = sigma;
        for (int a = 0; a < g.ndim(); ++a) {
            const int nb = (idx[a] > 0 ? 1 : 0) + (idx[a] < g.dim(a) - 1 ? 1 : 0);
            d += alpha * nb / (g.h(a) * g.h(a));
        }
        inv_diag.push_back(1.0 / d);
    });
    std::vector<double> sol = x.interior();
    CgOptions opt;
    opt.rel_tol = rel_tol;
    opt.max_iterations = max_iterations;
    opt.label = "scalar Helmholtz solve";
    const auto rhs = b.interior();
    CgResult r = conjugate_gradient(apply, inv_diag, rhs, sol, opt);
    x.set_interior(sol);
    return r;
}

/**
 * Solves (I − α·L_h) x = b componentwise on faces with no-slip walls, where
 * L_h is the vector Laplacian. Wall faces are identity rows and stay zero.
 */
inline CgResult solve_vector_helmholtz(double alpha, const VectorField& b, VectorField& x, double rel_tol,
                                       int max_iterations) {
    const Grid& g = b.grid();
    VectorField work(g), lap(g);
    LinearOperator apply = [&](std::span<const double> in, std::span<double> out) {
        work.set_faces(in);
        vector_laplacian_into(work, lap);
        std::size_t q = 0;
        for (int d = 0; d < g.ndim(); ++d) {
            const auto& w = work.comp(d);
            const auto& l = lap.comp(d);
            work.for_each_face(d, [&](int i, int j, int k) {
                out[q++] = w(i, j, k) - alpha * l(i, j, k);
            });
        }
    };
    std::vector<double> inv_diag;
    inv_diag.reserve(b.face_count());
    for (int d = 0; d < g.ndim(); ++d) {
        b.for_each_face(d, [&](int i, int j, int k) {
            if (b.is_wall_face(d, i, j, k)) {
                inv_diag.push_back(1.0);
                return;
            }
            const std::array<int, 3> idx{i, j, k};
            double diag = 1.0;
            for (int e = 0; e < g.ndim(); ++e) {
                double c = 2.0;
                if (e != d && (idx[e] == 0 || idx[e] == g.dim(e) - 1)) c = 3.0;
                diag += alpha * c / (g.h(e) * g.h(e));
            }
            inv_diag.push_back(1.0 / diag);
        });
    }
    std::vector<double> sol = x.faces();
    CgOptions opt;
    opt.rel_tol = rel_tol;
    opt.max_iterations = max_iterations;
    opt.label = "vector Helmholtz solve";
    const auto rhs = b.faces();
    CgResult r = conjugate_gradient(apply, inv_diag, rhs, sol, opt);
    x.set_faces(sol);
    return r;
}

/**
 * Solves Δ_h p = f with Neumann walls in the zero-mean gauge. The mean of f
 * is discarded. Converged when ‖Δ_h p − f‖₂ (unweighted, cellwise) ≤ abs_tol,
 * which bounds the cellwise maximum of the residual by the same number.
 */
inline CgResult solve_pressure_poisson(const ScalarField& f, ScalarField& p, double abs_tol, int max_iterations) {
    const Grid& g = f.grid();
    ScalarField work(g), lap(g);
    LinearOperator apply = [&](std::span<const double> in, std::span<double> out) {
        work.set_interior(in);
        laplace_into(work, lap);
        std::size_t q = 0;
        const auto& l = lap.array();
        work.for_each_cell([&](int i, int j, int k) { out[q++] = -l(i, j, k); });
    };
    std::vector<double> rhs = f.interior();
    for (double& v : rhs) v = -v;
    std::vector<double> sol = p.interior();
    CgOptions opt;
    opt.rel_tol = 0.0;
    opt.abs_tol = abs_tol;
    opt.max_iterations = max_iterations;
    opt.zero_mean = true;
    opt.label = "pressure Poisson solve";
    CgResult r = conjugate_gradient(apply, {}, rhs, sol, opt);
    p.set_interior(sol);
    return r;
}

} // namespace ctns
