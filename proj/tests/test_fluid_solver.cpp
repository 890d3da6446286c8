#include "ctns/fluid_solver.hpp"
#include "ctns/simulation.hpp"
#include "support/oracles.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace ctns;
using ctns::testing::DenseMac;

namespace {

VectorField random_velocity(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    VectorField u(g);
    for (int d = 0; d < g.ndim(); ++d) u.for_each_face(d, [&](int i, int j, int k) { u(d, i, j, k) = U(rng); });
    u.apply_bc();
    return u;
}

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

FluidStepParams quiet_params(const Grid& g, double dt) {
    FluidStepParams p;
    p.dt = dt;
    p.phi = ScalarField(g);
    p.convection = false;
    p.epsilon = 0.0;
    return p;
}

} // namespace

TEST(DenseOracle, DiscreteOperatorsAgree) {
    const Grid g = Grid::cube(6);
    const DenseMac mac(g);
    const VectorField u = random_velocity(g, 1);
    EXPECT_LE(max_diff(mac.L * mac.pack(u), mac.pack(vector_laplacian(u))), 1e-10);
    const ScalarField du = div(u);
    Eigen::VectorXd dv(mac.cell_count());
    du.for_each_cell([&](int i, int j, int k) { dv[mac.cell({i, j, k})] = du(i, j, k); });
    EXPECT_LE((mac.D * mac.pack(u) - dv).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HelmholtzFilter, MatchesDenseOracle) {
    const Grid g = Grid::cube(8);
    const DenseMac mac(g);
    const VectorField u = random_velocity(g, 2);
    for (double eps : {0.01, 0.1, 1.0}) {
        const VectorField v = helmholtz_filter(u, eps, 1e-13, 1e-11);
        const Eigen::VectorXd ref = mac.project(mac.helmholtz(eps, mac.pack(u)));
        EXPECT_LE(max_diff(mac.pack(v), ref), 1e-10) << "eps " << eps;
    }
}

TEST(StepU, PureViscousStepMatchesDenseOracle) {
    const Grid g = Grid::cube(8);
    const DenseMac mac(g);
    const VectorField u = project(random_velocity(g, 3), 1e-11);
    FluidStepParams p = quiet_params(g, 1e-2);
    p.solver_tol = 1e-13;
    p.proj_tol = 1e-11;
    const FluidStepResult r = step_u(u, ScalarField(g), p);
    const Eigen::VectorXd ref = mac.project(mac.helmholtz(p.dt, mac.pack(u)));
    EXPECT_LE(max_diff(mac.pack(r.u), ref), 1e-10);
}

TEST(Projection, ConstantForceIsPureGradient) {
    const Grid g = Grid::cube(8);
    const double grav = 3.0;
    VectorField w(g);
    w.sample([&](int d, double, double, double) { return d == 2 ? grav : 0.0; });
    ScalarField q(g);
    const VectorField out = project(w, q, 1e-10);
    EXPECT_LE(out.max_abs(), 1e-9);
    const double mean = integrate(q);
    q.for_each_cell([&](int i, int j, int k) { EXPECT_NEAR(q(i, j, k) - mean, grav * (g.center(2, k) - 0.5), 1e-9); });
}

TEST(Projection, IdempotentAndSolenoidal) {
    for (int nd : {2, 3}) {
        const Grid g = Grid::cube(8, 1.0, nd);
        const VectorField w = random_velocity(g, 4);
        const VectorField p1 = project(w, 1e-10);
        const VectorField p2 = project(p1, 1e-10);
        EXPECT_LE(max_abs_interior(div(p1)), 1e-10);
        double worst = 0.0;
        for (int d = 0; d < nd; ++d)
            p1.for_each_face(d, [&](int i, int j, int k) { worst = std::max(worst, std::abs(p1(d, i, j, k) - p2(d, i, j, k))); });
        EXPECT_LE(worst, 1e-9);
        EXPECT_LE(l2_norm(p1), l2_norm(w) * (1.0 + 1e-12));
    }
}

TEST(HelmholtzFilter, Nonexpansive) {
    for (int nd : {2, 3}) {
        const Grid g = Grid::cube(8, 1.0, nd);
        for (std::uint64_t seed : {5u, 6u, 7u}) {
            const VectorField u = random_velocity(g, seed);
            for (double eps : {0.0, 0.1, 1.0}) {
                const VectorField v = helmholtz_filter(u, eps);
                EXPECT_LE(l2_norm(v), l2_norm(u) * (1.0 + 1e-10)) << "eps " << eps;
            }
            EXPECT_TRUE(helmholtz_filter(u, 0.0) == u);
        }
    }
}

TEST(HelmholtzFilter, ApproachesIdentityOnSolenoidalFields) {
    const Grid g = Grid::cube(32, 1.0, 2);
    const VectorField u = vortex_velocity(g, 1.0);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {0.1, 0.01, 0.001, 1e-4}) {
        VectorField v = helmholtz_filter(u, eps);
        for (int d = 0; d < 2; ++d) v.for_each_face(d, [&](int i, int j, int k) { v(d, i, j, k) -= u(d, i, j, k); });
        const double gap = l2_norm(v);
        EXPECT_LT(gap, previous);
        EXPECT_LE(gap, eps * l2_norm(vector_laplacian(u)) * (1.0 + 1e-6) + 1e-9);
        previous = gap;
    }
}

TEST(StepU, HydrostaticBalance) {
    // gradient force is removed up to the viscous splitting defect, which is O(dt²)
    const Grid g = Grid::cube(8);
    std::vector<double> amp;
    for (double dt : {1e-3, 5e-4, 2.5e-4}) {
        FluidStepParams p;
        p.dt = dt;
        p.epsilon = 0.01;
        p.phi = ScalarField(g);
        p.phi.sample([](double x, double, double) { return 5.0 * x; });
        const FluidStepResult r = step_u(VectorField(g), ScalarField(g, 1.0), p);
        EXPECT_LE(max_abs_interior(div(r.u)), p.proj_tol);
        // u = P[dt²(I − dt L)^{-1} L f] since P f = 0
        const double bound = dt * dt * l2_norm(vector_laplacian(buoyancy_force(ScalarField(g, 1.0), p.phi)));
        EXPECT_LE(l2_norm(r.u), bound * (1.0 + 1e-8));
        amp.push_back(l2_norm(r.u));
    }
    EXPECT_GT(amp[0] / amp[1], 3.3);
    EXPECT_GT(amp[1] / amp[2], amp[0] / amp[1]);
}

TEST(StepU, ViscousEnergyDecays) {
    const Grid g = Grid::cube(16, 1.0, 2);
    VectorField u = vortex_velocity(g, 1.0);
    const FluidStepParams p = quiet_params(g, 2e-3);
    double e = inner(u, u);
    for (int s = 0; s < 20; ++s) {
        u = step_u(u, ScalarField(g), p).u;
        const double next = inner(u, u);
        EXPECT_LT(next, e);
        e = next;
    }
}

TEST(StepU, FullStepKeepsDivergenceAndEnergyResidualBounded) {
    const Grid g = Grid::cube(8);
    VectorField u = project(random_velocity(g, 8), 1e-10);
    ScalarField n(g);
    n.sample([](double x, double y, double z) { return 1.0 + 0.5 * std::cos(3 * x) * std::cos(2 * y) * std::cos(z); });
    FluidStepParams p;
    p.dt = 1e-3;
    p.epsilon = 0.05;
    p.phi = ScalarField(g);
    p.phi.sample([](double x, double, double) { return 5.0 * x; });
    ScalarField pressure(g);
    for (int s = 0; s < 20; ++s) {
        const FluidStepResult r = step_u(u, n, p, &pressure);
        EXPECT_LE(max_abs_interior(div(r.u)), p.proj_tol);
        const double res = discrete_energy_residual(u, r.u, n, p);
        EXPECT_LE(res, 1e-2 * std::max(1.0, inner(r.u, r.u)));
        u = r.u;
        pressure = r.pressure;
    }
}

TEST(StepU, CflAndParameterChecks) {
    const Grid g = Grid::cube(8);
    VectorField u = random_velocity(g, 9);
    FluidStepParams p = quiet_params(g, 0.5);
    EXPECT_THROW(step_u(u, ScalarField(g), p), CflViolation);
    p.force_cfl = true;
    EXPECT_NO_THROW(step_u(u, ScalarField(g), p));
    p.epsilon = 1.5;
    EXPECT_THROW(step_u(u, ScalarField(g), p), std::invalid_argument);
}

TEST(Convection, VanishesForZeroVelocity) {
    const Grid g = Grid::cube(6);
    const VectorField u = random_velocity(g, 10);
    EXPECT_EQ(convection_term(VectorField(g), u).max_abs(), 0.0);
    EXPECT_EQ(convection_term(u, VectorField(g)).max_abs(), 0.0);
}
