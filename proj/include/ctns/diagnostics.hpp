#pragma once
/**
 * @file diagnostics.hpp
 * @brief Ledger of monitored functionals, exponent helpers and the ODE
 *        comparison checker.
 */

#include "ctns/calculus.hpp"
#include "ctns/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ctns {

// ============================================================================
// energy functional and dissipation
// ============================================================================

namespace detail {
inline void require_above_four_thirds(double m) {
    if (!(m > 4.0 / 3.0)) throw DomainError("functional requires m > 4/3");
}

inline ScalarField shifted_power(const ScalarField& n, double eps, double q) {
    ScalarField w(n.grid());
    auto& a = w.array();
    const auto& b = n.array();
    n.for_each_cell([&](int i, int j, int k) { a(i, j, k) = std::pow(b(i, j, k) + eps, q); });
    w.apply_bc();
    return w;
}
} // namespace detail

/**
 * y = ∓1/(m−1)∫(n+ε)^{m−1} + (|2−m|/m)∫c² (minus below m = 2, plus above).
 * At m = 2: y = ∫ n ln n + ½∫c².
 */
inline double functional_y(const ScalarField& n, const ScalarField& c, double epsilon, double m) {
    detail::require_above_four_thirds(m);
    const double c2 = inner(c, c);
    if (m == 2.0) {
        CompensatedSum s;
        const auto& a = n.array();
        n.for_each_cell([&](int i, int j, int k) {
            const double v = a(i, j, k);
            if (v > 0.0) s.add(v * std::log(v));
        });
        return s.value() * n.grid().cell_volume() + 0.5 * c2;
    }
    const double mass = integrate(detail::shifted_power(n, epsilon, m - 1.0));
    const double sign = m < 2.0 ? -1.0 : 1.0;
    return sign * mass / (m - 1.0) + std::abs(2.0 - m) / m * c2;
}

/**
 * g = m|2−m|/(4(m−1)²)∫|∇(n+ε)^{m−1}|² + (|2−m|/(2m))∫|∇c|².
 * At m = 2: g = ½∫|∇(n+ε)|² + ¼∫|∇c|².
 */
inline double dissipation_g(const ScalarField& n, const ScalarField& c, double epsilon, double m) {
    detail::require_above_four_thirds(m);
    const double gc = grad_norm_sq(c);
    if (m == 2.0) return 0.5 * grad_norm_sq(detail::shifted_power(n, epsilon, 1.0)) + 0.25 * gc;
    const double gw = grad_norm_sq(detail::shifted_power(n, epsilon, m - 1.0));
    const double k = std::abs(2.0 - m);
    return m * k / (4.0 * (m - 1.0) * (m - 1.0)) * gw + k / (2.0 * m) * gc;
}

/// 2p(m − 7/6)/(p − 1) for m ≥ 4/3 and p ∈ (1, 6(m−1)).
inline double st_bound_exponent(double m, double p) {
    if (!(m >= 4.0 / 3.0)) throw DomainError("st_bound_exponent: m must be at least 4/3");
    if (!(p > 1.0 && p < 6.0 * (m - 1.0))) throw DomainError("st_bound_exponent: p outside (1, 6(m-1))");
    return 2.0 * p * (m - 7.0 / 6.0) / (p - 1.0);
}

/// (p−1)/p · 6(m−1)/(6m−7) for m > 7/6 and p ∈ (1, 6(m−1)].
inline double gn_interp_exponent(double m, double p) {
    if (!(m > 7.0 / 6.0)) throw DomainError("gn_interp_exponent: m must exceed 7/6");
    if (!(p > 1.0 && p <= 6.0 * (m - 1.0))) throw DomainError("gn_interp_exponent: p outside (1, 6(m-1)]");
    return (p - 1.0) / p * (6.0 * (m - 1.0)) / (6.0 * m - 7.0);
}

inline double ode_comparison_bound(double y0, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("ode_comparison_bound: a and b must be positive");
    return std::max(y0 + b, b / a + 2.0 * b);
}

inline bool verify_ode_comparison(std::span<const double> y, double a, double b) {
    if (y.empty()) return true;
    const double bound = ode_comparison_bound(y[0], a, b);
    const double limit = bound + 1e-9 * std::abs(bound);
    for (double v : y) {
        if (!(v <= limit)) return false;
    }
    return true;
}

// ============================================================================
// Ledger
// ============================================================================

struct FlowState {
    double t = 0.0;
    ScalarField n;
    ScalarField c;
    VectorField u;
};

/// One unit-time window [t_start, t_start + 1].
struct WindowIntegrals {
    double t_start = 0.0;
    double covered = 0.0;  ///< length of the window integrated so far
    double grad_nm1_sq = 0.0;
    double grad_c_sq = 0.0;
    double grad_u_sq = 0.0;
    std::vector<double> st_values;  ///< one per DiagnosticsLedger::st_powers entry
    bool complete() const { return covered >= 1.0 - 1e-9; }
};

struct StPower {
    double p;
    double exponent;
};

class DiagnosticsLedger {
public:
    DiagnosticsLedger() = default;
    DiagnosticsLedger(double m, double epsilon) : m_(m), epsilon_(epsilon) {
        st_powers.push_back({6.0 / 5.0, 2.0});
        const double p2 = 2.0 * m - 4.0 / 3.0;
        if (p2 >= 1.0) st_powers.push_back({p2, p2});
    }

    double m() const { return m_; }
    double epsilon() const { return epsilon_; }

    std::vector<double> times, mass_n, l1_c, y_func, g_diss, energy_u, c_sq;
    std::vector<WindowIntegrals> windows;
    /// Per sample: index of the latest window and its running totals so far.
    struct WindowProgress {
        std::size_t window;
        std::array<double, 4> totals;
    };
    std::vector<WindowProgress> window_progress;
    std::vector<StPower> st_powers;

    std::size_t size() const { return times.size(); }

    /// Integrands entering the window integrals at one instant.
    struct Integrands {
        double grad_nm1_sq, grad_c_sq, grad_u_sq;
        std::vector<double> st;
    };

    Integrands last;

private:
    double m_ = 1.5;
    double epsilon_ = 0.01;
};

namespace detail {
inline void accumulate_segment(DiagnosticsLedger& L, double t0, double t1, const DiagnosticsLedger::Integrands& a,
                               const DiagnosticsLedger::Integrands& b) {
    double s = t0;
    while (s < t1 - 1e-14) {
        const double w0 = std::floor(s + 1e-12);
        const double e = std::min(t1, w0 + 1.0);
        const std::size_t widx = static_cast<std::size_t>(w0);
        while (L.windows.size() <= widx) {
            WindowIntegrals w;
            w.t_start = static_cast<double>(L.windows.size());
            w.st_values.assign(L.st_powers.size(), 0.0);
            L.windows.push_back(w);
        }
        auto lerp = [&](double fa, double fb, double t) { return fa + (fb - fa) * (t - t0) / (t1 - t0); };
        auto area = [&](double fa, double fb) { return 0.5 * (lerp(fa, fb, s) + lerp(fa, fb, e)) * (e - s); };
        WindowIntegrals& w = L.windows[widx];
        w.grad_nm1_sq += area(a.grad_nm1_sq, b.grad_nm1_sq);
        w.grad_c_sq += area(a.grad_c_sq, b.grad_c_sq);
        w.grad_u_sq += area(a.grad_u_sq, b.grad_u_sq);
        for (std::size_t q = 0; q < L.st_powers.size(); ++q) w.st_values[q] += area(a.st[q], b.st[q]);
        w.covered += e - s;
        s = e;
    }
}
} // namespace detail

/// Appends one sample and advances the window integrals by the trapezoid rule.
inline void record_step(DiagnosticsLedger& L, const FlowState& s, double epsilon, double m, double dt) {
    if (!L.times.empty()) {
        if (!(s.t > L.times.back())) throw std::invalid_argument("record_step: times must increase");
        if (dt > 0.0 && std::abs(s.t - L.times.back() - dt) > 1e-9 * std::max(1.0, s.t)) {
            throw std::invalid_argument("record_step: sample spacing differs from dt");
        }
    }
    const bool theory = m > 4.0 / 3.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    L.times.push_back(s.t);
    L.mass_n.push_back(integrate(s.n));
    L.l1_c.push_back(integrate(s.c));
    L.y_func.push_back(theory ? functional_y(s.n, s.c, epsilon, m) : nan);
    L.g_diss.push_back(theory ? dissipation_g(s.n, s.c, epsilon, m) : nan);
    L.energy_u.push_back(inner(s.u, s.u));
    L.c_sq.push_back(inner(s.c, s.c));

    DiagnosticsLedger::Integrands now;
    now.grad_nm1_sq = grad_norm_sq(detail::shifted_power(s.n, epsilon, m - 1.0));
    now.grad_c_sq = grad_norm_sq(s.c);
    now.grad_u_sq = vector_grad_norm_sq(s.u);
    const ScalarField shifted = detail::shifted_power(s.n, epsilon, 1.0);
    for (const auto& sp : L.st_powers) now.st.push_back(std::pow(lp_norm(shifted, sp.p), sp.exponent));

    if (L.times.size() > 1) {
        const double t0 = L.times[L.times.size() - 2];
        detail::accumulate_segment(L, t0, s.t, L.last, now);
    }
    L.last = now;
    DiagnosticsLedger::WindowProgress progress{0, {0.0, 0.0, 0.0, 0.0}};
    if (!L.windows.empty()) {
        const WindowIntegrals& w = L.windows.back();
        progress.window = L.windows.size() - 1;
        progress.totals = {w.grad_nm1_sq, w.grad_c_sq, w.grad_u_sq, w.st_values.empty() ? 0.0 : w.st_values[0]};
    }
    L.window_progress.push_back(progress);
}

// ============================================================================
// CSV export
// ============================================================================

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_samples_csv(const DiagnosticsLedger& L, std::ostream& os) {
    os << "t,mass_n,l1_c,y,g,energy_u\n";
    for (std::size_t q = 0; q < L.size(); ++q) {
        os << format_real(L.times[q]) << ',' << format_real(L.mass_n[q]) << ',' << format_real(L.l1_c[q]) << ','
           << format_real(L.y_func[q]) << ',' << format_real(L.g_diss[q]) << ',' << format_real(L.energy_u[q])
           << '\n';
    }
}

/// One row per (window, L^p entry); a window's gradient integrals repeat on each of its rows.
inline void write_windows_csv(const DiagnosticsLedger& L, std::ostream& os) {
    os << "t_start,int_grad_nm1_sq,int_grad_c_sq,int_grad_u_sq,st_power_p,value\n";
    for (const auto& w : L.windows) {
        for (std::size_t q = 0; q < L.st_powers.size(); ++q) {
            os << format_real(w.t_start) << ',' << format_real(w.grad_nm1_sq) << ',' << format_real(w.grad_c_sq)
               << ',' << format_real(w.grad_u_sq) << ',' << format_real(L.st_powers[q].p) << ','
               << format_real(w.st_values[q]) << '\n';
        }
    }
}

} // namespace ctns
