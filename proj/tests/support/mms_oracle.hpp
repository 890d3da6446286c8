#pragma once
// Finite-difference evaluation of the forced PDE operators on the exact fields.

#include "ctns/manufactured.hpp"

#include <array>
#include <cmath>
#include <functional>

namespace ctns::testing {

struct MmsOracle {
    const ManufacturedSolution& ms;
    int ndim = 2;
    double h = 1e-4;

    using Point = std::array<double, 3>;
    using Fn = std::function<double(const Point&, double)>;

    double dt_(const Fn& f, const Point& p, double t) const { return (f(p, t + h) - f(p, t - h)) / (2 * h); }

    double dx_(const Fn& f, const Point& p, double t, int k) const {
        Point a = p, b = p;
        a[k] += h;
        b[k] -= h;
        return (f(a, t) - f(b, t)) / (2 * h);
    }

    // ∇·(w(p)∇f)
    double div_weighted_grad(const Fn& f, const std::function<double(const Point&, double)>& w, const Point& p,
                             double t) const {
        double s = 0.0;
        for (int k = 0; k < ndim; ++k) {
            auto flux = [&](const Point& q, double tt) { return w(q, tt) * dx_(f, q, tt, k); };
            s += dx_(flux, p, t, k);
        }
        return s;
    }

    Fn n() const { return [this](const Point& p, double t) { return ms.n(p[0], p[1], p[2], t); }; }
    Fn c() const { return [this](const Point& p, double t) { return ms.c(p[0], p[1], p[2], t); }; }
    Fn u(int d) const { return [this, d](const Point& p, double t) { return ms.u(d, p[0], p[1], p[2], t); }; }

    double advect(const Fn& f, const Point& p, double t) const {
        double s = 0.0;
        for (int k = 0; k < ndim; ++k) s += ms.u(k, p[0], p[1], p[2], t) * dx_(f, p, t, k);
        return s;
    }

    /// n_t + u·∇n − ∇·(m(n+ε)^{m−1}∇n) + ∇·(n/(1+εn)³ ∇c)
    double cell(const Point& p, double t) const {
        const Fn N = n();
        auto D = [&](const Point& q, double tt) { return ms.m * std::pow(N(q, tt) + ms.epsilon, ms.m - 1.0); };
        auto S = [&](const Point& q, double tt) {
            const double v = N(q, tt), den = 1.0 + ms.epsilon * v;
            return v / (den * den * den);
        };
        return dt_(N, p, t) + advect(N, p, t) - div_weighted_grad(N, D, p, t) + div_weighted_grad(c(), S, p, t);
    }

    /// c_t + u·∇c − Δc + c − n
    double signal(const Point& p, double t) const {
        const Fn C = c();
        auto one = [](const Point&, double) { return 1.0; };
        return dt_(C, p, t) + advect(C, p, t) - div_weighted_grad(C, one, p, t) + C(p, t) - n()(p, t);
    }

    /// u_t + (u·∇)u − Δu − n∇(g x₁), pressure zero
    double fluid(int d, const Point& p, double t) const {
        const Fn U = u(d);
        auto one = [](const Point&, double) { return 1.0; };
        const double force = d == 0 ? ms.n(p[0], p[1], p[2], t) * ms.g : 0.0;
        return dt_(U, p, t) + advect(U, p, t) - div_weighted_grad(U, one, p, t) - force;
    }

    double divergence(const Point& p, double t) const {
        double s = 0.0;
        for (int k = 0; k < ndim; ++k) s += dx_(u(k), p, t, k);
        return s;
    }
};

} // namespace ctns::testing
