#pragma once
// Independent oracles shared by the unit tests and the acceptance binary.

#include "ctns/fields.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <vector>

namespace ctns::testing {

/// Dense MAC operators on interior faces, assembled from the stencil definitions.
struct DenseMac {
    Grid g;
    std::vector<std::array<int, 4>> faces;  // d, i, j, k
    std::map<std::array<int, 4>, int> face_index;
    Eigen::MatrixXd L, D, G;

    explicit DenseMac(const Grid& grid) : g(grid) {
        const int nd = g.ndim();
        for (int d = 0; d < nd; ++d) {
            std::array<int, 3> n{1, 1, 1};
            for (int a = 0; a < nd; ++a) n[a] = g.dim(a) + (a == d ? 1 : 0);
            for (int k = 0; k < n[2]; ++k)
                for (int j = 0; j < n[1]; ++j)
                    for (int i = 0; i < n[0]; ++i) {
                        const std::array<int, 3> idx{i, j, k};
                        if (idx[d] == 0 || idx[d] == g.dim(d)) continue;
                        face_index[{d, i, j, k}] = static_cast<int>(faces.size());
                        faces.push_back({d, i, j, k});
                    }
        }
        const int nf = static_cast<int>(faces.size());
        const int nc = static_cast<int>(g.cell_count());
        L = Eigen::MatrixXd::Zero(nf, nf);
        D = Eigen::MatrixXd::Zero(nc, nf);
        G = Eigen::MatrixXd::Zero(nf, nc);
        for (int f = 0; f < nf; ++f) {
            const int d = faces[f][0];
            const std::array<int, 3> idx{faces[f][1], faces[f][2], faces[f][3]};
            for (int e = 0; e < nd; ++e) {
                const double w = 1.0 / (g.h(e) * g.h(e));
                for (int s : {-1, 1}) {
                    L(f, f) -= w;
                    std::array<int, 3> nb = idx;
                    nb[e] += s;
                    if (e == d) {
                        if (nb[e] > 0 && nb[e] < g.dim(e)) L(f, face_index.at({d, nb[0], nb[1], nb[2]})) += w;
                    } else if (nb[e] < 0 || nb[e] >= g.dim(e)) {
                        L(f, f) -= w;
                    } else {
                        L(f, face_index.at({d, nb[0], nb[1], nb[2]})) += w;
                    }
                }
            }
            std::array<int, 3> left = idx;
            left[d] -= 1;
            G(f, cell(idx)) += 1.0 / g.h(d);
            G(f, cell(left)) -= 1.0 / g.h(d);
            D(cell(idx), f) -= 1.0 / g.h(d);
            D(cell(left), f) += 1.0 / g.h(d);
        }
    }

    int cell(const std::array<int, 3>& c) const { return c[0] + g.dim(0) * (c[1] + g.dim(1) * c[2]); }
    int cell_count() const { return static_cast<int>(g.cell_count()); }

    Eigen::VectorXd pack(const VectorField& u) const {
        Eigen::VectorXd v(faces.size());
        for (std::size_t f = 0; f < faces.size(); ++f) v[f] = u(faces[f][0], faces[f][1], faces[f][2], faces[f][3]);
        return v;
    }

    Eigen::VectorXd project(const Eigen::VectorXd& w) const {
        const int nc = cell_count();
        Eigen::MatrixXd A = D * G - Eigen::MatrixXd::Ones(nc, nc);
        const Eigen::VectorXd q = A.partialPivLu().solve(D * w);
        return w - G * q;
    }

    Eigen::VectorXd helmholtz(double alpha, const Eigen::VectorXd& b) const {
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(L.rows(), L.cols()) - alpha * L;
        return A.partialPivLu().solve(b);
    }
};

/// y' = −a·y + (1 − slack)·h by forward Euler, h a train of pulses with unit-window mass ≤ b.
struct OdeTrial {
    double a = 0.0, b = 0.0;
    double max_window = 0.0;
    std::vector<double> y;
};

inline OdeTrial forward_euler_trial(std::mt19937_64& rng, double dt) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    OdeTrial out;
    out.a = 0.05 + 5.0 * U(rng);
    out.b = 0.01 + 3.0 * U(rng);
    const double y0 = 10.0 * U(rng);
    const double T = 1.5 + 2.5 * U(rng);
    const int steps = static_cast<int>(T / dt);
    const int per_unit = static_cast<int>(std::lround(1.0 / dt));
    // pulses of mass at most b, separated by at least one unit of empty time
    std::vector<double> h(steps, 0.0);
    double start = U(rng);
    while (true) {
        const double width = 0.05 + 0.4 * U(rng);
        const int i0 = static_cast<int>(start / dt);
        const int i1 = i0 + std::max(1, static_cast<int>(width / dt));
        if (i0 >= steps) break;
        const double level = out.b / ((i1 - i0) * dt) * (0.5 + 0.5 * U(rng));
        for (int i = i0; i < std::min(i1, steps); ++i) h[i] = level;
        start = i1 * dt + 1.0 + U(rng);
    }
    double window = 0.0;
    for (int i = 0; i < steps; ++i) {
        window += h[i] * dt;
        if (i >= per_unit) window -= h[i - per_unit] * dt;
        out.max_window = std::max(out.max_window, window);
    }
    const double slack = U(rng) < 0.5 ? 0.0 : U(rng);
    out.y.reserve(steps + 1);
    out.y.push_back(y0);
    for (int i = 0; i < steps; ++i) out.y.push_back(out.y.back() + dt * (-out.a * out.y.back() + (1.0 - slack) * h[i]));
    return out;
}

} // namespace ctns::testing
