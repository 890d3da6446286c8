#pragma once
/**
 * @file fluid_solver.hpp
 * @brief Filtered-convection Navier–Stokes step with Chorin projection on
 *        the MAC grid.
 *
 * The viscous term is taken backward Euler (a vector Helmholtz solve), the
 * filtered convection and the buoyancy force explicitly.
 */

#include "ctns/calculus.hpp"
#include "ctns/cell_solver.hpp"
#include "ctns/linear_solvers.hpp"

#include <cmath>

namespace ctns {

struct FluidStepParams {
    double epsilon = 0.01;  ///< filter width; 0 disables the filter
    double dt = 1e-3;
    ScalarField phi;        ///< potential at cell centers
    double proj_tol = 1e-8;
    double solver_tol = 1e-10;
    double cfl = 0.5;
    bool force_cfl = false;
    bool convection = true;
    const VectorField* mms_source = nullptr;

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("FluidStepParams: epsilon must lie in [0,1]");
        if (!(dt > 0.0)) throw std::invalid_argument("FluidStepParams: dt must be positive");
        if (!(proj_tol > 0.0 && proj_tol <= 1e-6)) throw std::invalid_argument("FluidStepParams: proj_tol must lie in (0,1e-6]");
        if (!(solver_tol > 0.0)) throw std::invalid_argument("FluidStepParams: solver_tol must be positive");
    }
};

/// Checks that phi is finite with finite first and second differences.
inline void check_potential(const ScalarField& phi) {
    ScalarField p = phi;
    p.apply_bc();
    if (!std::isfinite(max_abs_interior(p))) throw std::invalid_argument("potential is not finite");
    const VectorField g = grad(p);
    if (!std::isfinite(g.max_abs())) throw std::invalid_argument("potential gradient is not finite");
    if (!std::isfinite(max_abs_interior(div(g)))) throw std::invalid_argument("potential Laplacian is not finite");
}

inline int pressure_max_iterations(const Grid& g) { return 20 * default_max_iterations(g); }

/**
 * Projects w onto discretely divergence-free fields: solves Δ_h q = div w and
 * returns w − grad q. On return q holds the potential (warm start on entry)
 * and ‖div(result)‖_∞ ≤ proj_tol/10.
 */
inline VectorField project(const VectorField& w, ScalarField& q, double proj_tol) {
    const ScalarField dw = div(w);
    solve_pressure_poisson(dw, q, 0.1 * proj_tol, pressure_max_iterations(w.grid()));
    VectorField out = w;
    const VectorField gq = grad(q);
    for (int d = 0; d < w.ncomp(); ++d) {
        auto& o = out.comp(d);
        const auto& a = gq.comp(d);
        out.for_each_face(d, [&](int i, int j, int k) { o(i, j, k) -= a(i, j, k); });
    }
    out.apply_bc();
    return out;
}

inline VectorField project(const VectorField& w, double proj_tol) {
    ScalarField q(w.grid());
    return project(w, q, proj_tol);
}

/// v = P (I − εL_h)^{-1} u; returns u unchanged when ε = 0.
inline VectorField helmholtz_filter(const VectorField& u, double epsilon, double solver_tol = 1e-10,
                                    double proj_tol = 1e-8) {
    if (epsilon == 0.0) return u;
    if (!(epsilon > 0.0)) throw std::invalid_argument("helmholtz_filter: epsilon must be nonnegative");
    VectorField w = u;
    solve_vector_helmholtz(epsilon, u, w, solver_tol, default_max_iterations(u.grid()));
    return project(w, proj_tol);
}

/// Advective-form (v·∇_h)u on interior faces, centered differences, v averaged to u's faces.
inline VectorField convection_term(const VectorField& v, const VectorField& u) {
    const Grid& g = u.grid();
    VectorField out(g);
    for (int d = 0; d < g.ndim(); ++d) {
        const auto& a = u.comp(d);
        auto& o = out.comp(d);
        u.for_each_face(d, [&](int i, int j, int k) {
            if (u.is_wall_face(d, i, j, k)) return;
            const std::size_t c = a.index(i, j, k);
            double acc = 0.0;
            for (int e = 0; e < g.ndim(); ++e) {
                const std::ptrdiff_t s = a.stride(e);
                const double du = (a.data()[c + s] - a.data()[c - s]) / (2.0 * g.h(e));
                double ve;
                if (e == d) {
                    ve = v(d, i, j, k);
                } else {
                    // v_e faces around this face: cells {idx_d - 1, idx_d} along d, faces {idx_e, idx_e + 1} along e.
                    const auto& b = v.comp(e);
                    const std::size_t q = b.index(i, j, k);
                    const std::ptrdiff_t sd = b.stride(d);
                    const std::ptrdiff_t se = b.stride(e);
                    ve = 0.25 * (b.data()[q] + b.data()[q + se] + b.data()[q - sd] + b.data()[q - sd + se]);
                }
                acc += ve * du;
            }
            o(i, j, k) = acc;
        });
    }
    out.apply_bc();
    return out;
}

/// n_face·grad(φ) on interior faces.
inline VectorField buoyancy_force(const ScalarField& n, const ScalarField& phi) {
    const Grid& g = n.grid();
    VectorField out(g);
    const auto& na = n.array();
    const auto& pa = phi.array();
    for (int d = 0; d < g.ndim(); ++d) {
        auto& o = out.comp(d);
        const std::ptrdiff_t s = na.stride(d);
        out.for_each_face(d, [&](int i, int j, int k) {
            if (out.is_wall_face(d, i, j, k)) return;
            const std::size_t c = na.index(i, j, k);
            const double nf = 0.5 * (na.data()[c] + na.data()[c - s]);
            o(i, j, k) = nf * (pa.data()[c] - pa.data()[c - s]) / g.h(d);
        });
    }
    out.apply_bc();
    return out;
}

struct FluidStepResult {
    VectorField u;
    ScalarField pressure;
};

inline double velocity_cfl_number(const VectorField& u, double dt) {
    return dt * u.max_abs() / u.grid().min_spacing();
}

/**
 * u* solves (I − dt·L_h)u* = u + dt·[−(v·∇_h)u + n·grad φ + f], v the filtered
 * velocity; then Δ_h P = div(u*)/dt and u_new = u* − dt·grad P.
 * pressure_guess, if given, warm-starts the Poisson solve.
 */
inline FluidStepResult step_u(const VectorField& u, const ScalarField& n, const FluidStepParams& p,
                              const ScalarField* pressure_guess = nullptr) {
    p.validate();
    const Grid& g = u.grid();
    if (!(g == n.grid()) || !(g == p.phi.grid())) throw std::invalid_argument("step_u: grid mismatch");
    const double cfl = velocity_cfl_number(u, p.dt);
    if (cfl > p.cfl && !p.force_cfl) throw CflViolation(cfl, p.cfl);

    VectorField rhs = u;
    const VectorField force = buoyancy_force(n, p.phi);
    VectorField conv(g);
    if (p.convection) {
        const VectorField v = helmholtz_filter(u, p.epsilon, p.solver_tol, p.proj_tol);
        conv = convection_term(v, u);
    }
    for (int d = 0; d < g.ndim(); ++d) {
        auto& r = rhs.comp(d);
        const auto& fa = force.comp(d);
        const auto& ca = conv.comp(d);
        rhs.for_each_face(d, [&](int i, int j, int k) {
            if (rhs.is_wall_face(d, i, j, k)) return;
            double add = fa(i, j, k) - ca(i, j, k);
            if (p.mms_source) add += p.mms_source->comp(d)(i, j, k);
            r(i, j, k) += p.dt * add;
        });
    }
    rhs.apply_bc();

    VectorField star = u;
    solve_vector_helmholtz(p.dt, rhs, star, p.solver_tol, default_max_iterations(g));

    ScalarField q(g);
    if (pressure_guess) {
        q = *pressure_guess;
        auto& a = q.array();
        q.for_each_cell([&](int i, int j, int k) { a(i, j, k) *= p.dt; });
    }
    FluidStepResult res{project(star, q, p.proj_tol), ScalarField(g)};
    auto& pa = res.pressure.array();
    const auto& qa = q.array();
    res.pressure.for_each_cell([&](int i, int j, int k) { pa(i, j, k) = qa(i, j, k) / p.dt; });
    res.pressure.apply_bc();
    return res;
}

/// Σ n_face·(u·grad φ)·vol over interior faces.
inline double buoyancy_work(const VectorField& u, const ScalarField& n, const ScalarField& phi) {
    return inner(buoyancy_force(n, phi), u);
}

/// R = [∫|u_new|² − ∫|u_old|²]/(2dt) + ∫|∇_h u_new|² − ∫ n u_new·∇φ.
inline double discrete_energy_residual(const VectorField& u_old, const VectorField& u_new, const ScalarField& n,
                                       const FluidStepParams& p) {
    const double de = (inner(u_new, u_new) - inner(u_old, u_old)) / (2.0 * p.dt);
    return de + vector_grad_norm_sq(u_new) - buoyancy_work(u_new, n, p.phi);
}

} // namespace ctns
