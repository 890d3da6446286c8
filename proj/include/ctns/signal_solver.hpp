#pragma once
/**
 * @file signal_solver.hpp
 * @brief One semi-implicit step of c_t + u·∇c = Δc − c + n.
 */

#include "ctns/cell_solver.hpp"
#include "ctns/linear_solvers.hpp"

namespace ctns {

struct SignalStepOptions {
    double rel_tol = 1e-10;
    int max_iterations = 0;  ///< 0 selects default_max_iterations(grid)
    double cfl = 0.5;
    bool force_cfl = false;
};

/// Solves (I − dt·Δ_h + dt·I) c_new = c + dt·(n − div(c_up u)) + dt·src.
inline ScalarField step_c(const ScalarField& c, const ScalarField& n, const VectorField& u, double dt,
                          const ScalarField* mms_source = nullptr, const SignalStepOptions& opt = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_c: dt must be positive");
    if (!(c.grid() == n.grid()) || !(c.grid() == u.grid())) throw std::invalid_argument("step_c: grid mismatch");
    const double cfl = transport_cfl_number(nullptr, &u, dt);
    if (cfl > opt.cfl && !opt.force_cfl) throw CflViolation(cfl, opt.cfl);

    ScalarField rhs = c;
    detail::add_scaled_div(rhs, advective_flux(c, u), -dt);
    auto& r = rhs.array();
    const auto& na = n.array();
    rhs.for_each_cell([&](int i, int j, int k) {
        r(i, j, k) += dt * na(i, j, k);
        if (mms_source) r(i, j, k) += dt * mms_source->array()(i, j, k);
    });
    rhs.apply_bc();

    ScalarField next = c;
    const int iters = opt.max_iterations > 0 ? opt.max_iterations : default_max_iterations(c.grid());
    solve_scalar_helmholtz(1.0 + dt, dt, rhs, next, opt.rel_tol, iters);
    detail::enforce_nonnegative(next, 1e-12 * std::max(1.0, next.max()));
    return next;
}

} // namespace ctns
