#include "ctns/diagnostics.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace ctns;

TEST(Functionals, ConstantStateClosedForms) {
    const Grid g({8, 8, 8}, {1.0, 2.0, 0.5});
    const ScalarField n(g, 1.0), c(g, 2.0);
    const double vol = 1.0;
    for (double m : {1.5, 1.8, 2.5}) {
        const double eps = 0.01;
        const double sign = m < 2.0 ? -1.0 : 1.0;
        const double expected = sign * std::pow(1.0 + eps, m - 1.0) * vol / (m - 1.0) + std::abs(2.0 - m) / m * 4.0 * vol;
        EXPECT_NEAR(functional_y(n, c, eps, m), expected, 1e-12);
        EXPECT_EQ(dissipation_g(n, c, eps, m), 0.0);
    }
    // n ln n vanishes at n = 1
    EXPECT_NEAR(functional_y(n, c, 0.01, 2.0), 0.5 * 4.0 * vol, 1e-12);
}

TEST(Functionals, DissipationNonnegativeAndYBelowSignalTerm) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    const Grid g = Grid::cube(6);
    for (int trial = 0; trial < 50; ++trial) {
        ScalarField n(g), c(g);
        n.for_each_cell([&](int i, int j, int k) {
            n(i, j, k) = U(rng);
            c(i, j, k) = U(rng);
        });
        n.apply_bc();
        c.apply_bc();
        const double m = 1.35 + 0.6 * (trial % 10) / 10.0;
        EXPECT_GE(dissipation_g(n, c, 0.01, m), 0.0);
        if (m < 2.0) {
            EXPECT_LE(functional_y(n, c, 0.01, m), (2.0 - m) / m * inner(c, c));
        }
    }
}

TEST(Functionals, RejectOutOfTheoryExponents) {
    const ScalarField f(Grid::cube(4), 1.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.5, 4.0 / 3.0);
    for (int q = 0; q < 100; ++q) {
        const double m = U(rng);
        EXPECT_THROW(functional_y(f, f, 0.01, m), DomainError);
        EXPECT_THROW(dissipation_g(f, f, 0.01, m), DomainError);
    }
}

TEST(Exponents, Anchors) {
    EXPECT_NEAR(st_bound_exponent(4.0 / 3.0, 6.0 / 5.0), 2.0, 1e-12);
    EXPECT_NEAR(st_bound_exponent(1.5, 6.0 / 5.0), 4.0, 1e-12);
    for (double m : {1.3, 1.5, 1.8, 2.0, 3.0}) EXPECT_NEAR(gn_interp_exponent(m, 6.0 * (m - 1.0)), 1.0, 1e-12);
}

TEST(Exponents, SixFifthsExponentAtLeastTwo) {
    for (int q = 0; q <= 200; ++q) {
        const double m = 4.0 / 3.0 + q * 0.01;
        EXPECT_GE(st_bound_exponent(m, 6.0 / 5.0), 2.0 - 1e-12);
    }
}

TEST(Exponents, RandomizedDomainErrors) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> Um(0.5, 3.0), Up(0.0, 15.0);
    int st_raised = 0, gn_raised = 0;
    for (int q = 0; q < 1000; ++q) {
        const double m = Um(rng), p = Up(rng);
        const bool st_ok = m >= 4.0 / 3.0 && p > 1.0 && p < 6.0 * (m - 1.0);
        const bool gn_ok = m > 7.0 / 6.0 && p > 1.0 && p <= 6.0 * (m - 1.0);
        if (st_ok) {
            const double v = st_bound_exponent(m, p);
            EXPECT_NEAR(v, 2.0 * p * (m - 7.0 / 6.0) / (p - 1.0), 1e-12 * std::abs(v));
            EXPECT_GT(v, 0.0);
        } else {
            EXPECT_THROW(st_bound_exponent(m, p), DomainError);
            ++st_raised;
        }
        if (gn_ok) {
            const double v = gn_interp_exponent(m, p);
            EXPECT_GT(v, 0.0);
            EXPECT_LE(v, 1.0 + 1e-12);
        } else {
            EXPECT_THROW(gn_interp_exponent(m, p), DomainError);
            ++gn_raised;
        }
    }
    EXPECT_GT(st_raised, 100);
    EXPECT_GT(gn_raised, 100);
}

TEST(OdeComparison, ClosedForm) {
    EXPECT_NEAR(ode_comparison_bound(5.0, 1.0, 1.0), 6.0, 1e-12);
    EXPECT_NEAR(ode_comparison_bound(0.0, 0.5, 1.0), 4.0, 1e-12);
    EXPECT_NEAR(ode_comparison_bound(1.0, 2.0, 0.5), 1.5, 1e-12);
    // b → 0 leaves the initial value
    EXPECT_NEAR(ode_comparison_bound(3.0, 1.0, 1e-300), 3.0, 1e-12);
    EXPECT_THROW(ode_comparison_bound(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(ode_comparison_bound(1.0, 1.0, 0.0), DomainError);
    EXPECT_THROW(ode_comparison_bound(1.0, -1.0, 1.0), DomainError);
}

TEST(OdeComparison, ForwardEulerTrials) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto t = ctns::testing::forward_euler_trial(rng, 1e-4);
        ASSERT_LE(t.max_window, t.b * (1.0 + 1e-12));
        EXPECT_TRUE(verify_ode_comparison(t.y, t.a, t.b)) << "trial " << trial;
    }
}

TEST(OdeComparison, DetectsViolation) {
    const std::vector<double> y{1.0, 2.0, 10.0};
    EXPECT_FALSE(verify_ode_comparison(y, 1.0, 0.5));
    EXPECT_TRUE(verify_ode_comparison(std::vector<double>{}, 1.0, 0.5));
}

TEST(Ledger, RecordStepPropertiesAndWindows) {
    const Grid g = Grid::cube(6);
    const double m = 1.5, eps = 0.01, dt = 0.25;
    DiagnosticsLedger L(m, eps);
    ASSERT_EQ(L.st_powers.size(), 2u);
    EXPECT_DOUBLE_EQ(L.st_powers[1].p, 2.0 * m - 4.0 / 3.0);
    const ScalarField n(g, 1.0), c(g, 0.5);
    const VectorField u(g);
    for (int q = 0; q <= 10; ++q) record_step(L, FlowState{q * dt, n, c, u}, eps, m, q == 0 ? 0.0 : dt);
    EXPECT_EQ(L.size(), 11u);
    ASSERT_EQ(L.windows.size(), 3u);
    EXPECT_TRUE(L.windows[0].complete());
    EXPECT_TRUE(L.windows[1].complete());
    EXPECT_FALSE(L.windows[2].complete());
    EXPECT_NEAR(L.windows[2].covered, 0.5, 1e-12);
    EXPECT_EQ(L.windows[0].grad_nm1_sq, 0.0);
    EXPECT_EQ(L.windows[0].grad_c_sq, 0.0);
    EXPECT_NEAR(L.windows[0].st_values[0], std::pow(1.0 + eps, 2.0), 1e-12);
    for (std::size_t q = 0; q < L.size(); ++q) {
        EXPECT_NEAR(L.mass_n[q], 1.0, 1e-14);
        EXPECT_NEAR(L.l1_c[q], 0.5, 1e-14);
        EXPECT_NEAR(L.c_sq[q], 0.25, 1e-14);
        EXPECT_EQ(L.energy_u[q], 0.0);
        EXPECT_GE(L.g_diss[q], 0.0);
    }
    EXPECT_THROW(record_step(L, FlowState{2.5, n, c, u}, eps, m, dt), std::invalid_argument);
    EXPECT_THROW(record_step(L, FlowState{2.6, n, c, u}, eps, m, dt), std::invalid_argument);
}

TEST(Ledger, WindowIntegralsUseTrapezoidRule) {
    const Grid g({8, 8}, {1.0, 1.0});
    const double m = 1.5, eps = 0.01, dt = 0.1;
    DiagnosticsLedger L(m, eps);
    std::vector<double> gc;
    for (int q = 0; q <= 10; ++q) {
        ScalarField c(g);
        const double amp = 1.0 + q;
        c.sample([&](double x, double, double) { return amp * x; });
        gc.push_back(grad_norm_sq(c));
        record_step(L, FlowState{q * dt, ScalarField(g, 1.0), c, VectorField(g)}, eps, m, q == 0 ? 0.0 : dt);
    }
    double trap = 0.0;
    for (int q = 0; q < 10; ++q) trap += 0.5 * dt * (gc[q] + gc[q + 1]);
    ASSERT_EQ(L.windows.size(), 1u);
    EXPECT_NEAR(L.windows[0].grad_c_sq, trap, 1e-10 * trap);
    EXPECT_TRUE(L.windows[0].complete());
}

TEST(Ledger, OutOfTheoryExponentRecordsNan) {
    const Grid g = Grid::cube(4);
    DiagnosticsLedger L(1.3, 0.01);
    record_step(L, FlowState{0.0, ScalarField(g, 1.0), ScalarField(g, 1.0), VectorField(g)}, 0.01, 1.3, 0.0);
    EXPECT_TRUE(std::isnan(L.y_func[0]));
    EXPECT_TRUE(std::isnan(L.g_diss[0]));
    std::ostringstream os;
    write_samples_csv(L, os);
    EXPECT_NE(os.str().find("nan"), std::string::npos);
}

TEST(Ledger, CsvLayout) {
    const Grid g = Grid::cube(4);
    DiagnosticsLedger L(1.5, 0.01);
    for (int q = 0; q <= 4; ++q)
        record_step(L, FlowState{q * 0.5, ScalarField(g, 1.0), ScalarField(g, 1.0), VectorField(g)}, 0.01, 1.5,
                    q == 0 ? 0.0 : 0.5);
    std::ostringstream s, w;
    write_samples_csv(L, s);
    write_windows_csv(L, w);
    std::istringstream in(s.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,mass_n,l1_c,y,g,energy_u");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 5);
    std::istringstream win(w.str());
    std::getline(win, line);
    EXPECT_EQ(line, "t_start,int_grad_nm1_sq,int_grad_c_sq,int_grad_u_sq,st_power_p,value");
    rows = 0;
    while (std::getline(win, line)) ++rows;
    EXPECT_EQ(rows, 4);
}
