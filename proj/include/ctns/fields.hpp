#pragma once
/**
 * @file fields.hpp
 * @brief Uniform box grid, padded storage, cell-centered scalars and
 *        face-centered (MAC) vectors with one ghost layer.
 *
 * Index conventions: interior cells run over [0, n) on every axis and the
 * ghost layer sits at -1 and n. A vector component d is stored on the faces
 * normal to axis d, so along d its interior index runs over [0, n_d] with
 * faces 0 and n_d on the walls.
 *
 * In 2D the third axis has one cell of unit width and takes no part in any
 * stencil.
 */

#include "ctns/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctns {

/// Compensated (Neumaier) accumulator used by every reduction.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

class Grid {
public:
    Grid() = default;

    Grid(const std::vector<int>& dims, const std::vector<double>& extents) {
        if (dims.size() != extents.size() || dims.size() < 2 || dims.size() > 3) {
            throw std::invalid_argument("Grid: need 2 or 3 axes with matching extents");
        }
        ndim_ = static_cast<int>(dims.size());
        for (int a = 0; a < ndim_; ++a) {
            if (dims[a] < 4) throw std::invalid_argument("Grid: every axis needs at least 4 cells");
            if (!(extents[a] > 0.0) || !std::isfinite(extents[a])) {
                throw std::invalid_argument("Grid: extents must be positive");
            }
            dims_[a] = dims[a];
            extents_[a] = extents[a];
            h_[a] = extents[a] / dims[a];
        }
    }

    /// Cube (or square) with n cells per axis.
    static Grid cube(int n, double length = 1.0, int ndim = 3) {
        return Grid(std::vector<int>(ndim, n), std::vector<double>(ndim, length));
    }

    int ndim() const { return ndim_; }
    int dim(int axis) const { return dims_[axis]; }
    const std::array<int, 3>& dims() const { return dims_; }
    double extent(int axis) const { return extents_[axis]; }
    double h(int axis) const { return h_[axis]; }
    double min_spacing() const {
        double m = h_[0];
        for (int a = 1; a < ndim_; ++a) m = std::min(m, h_[a]);
        return m;
    }
    double cell_volume() const { return h_[0] * h_[1] * h_[2]; }
    double domain_volume() const { return extents_[0] * extents_[1] * extents_[2]; }
    std::size_t cell_count() const {
        return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    }
    double center(int axis, int i) const { return (i + 0.5) * h_[axis]; }
    double node(int axis, int i) const { return i * h_[axis]; }

    bool operator==(const Grid&) const = default;

private:
    int ndim_ = 0;
    std::array<int, 3> dims_{1, 1, 1};
    std::array<double, 3> extents_{1.0, 1.0, 1.0};
    std::array<double, 3> h_{1.0, 1.0, 1.0};
};

/// Dense 3-index array with one padding layer on each side.
class PaddedArray {
public:
    PaddedArray() = default;

    explicit PaddedArray(std::array<int, 3> n, double fill = 0.0) : n_(n) {
        s_ = {n[0] + 2, n[1] + 2, n[2] + 2};
        data_.assign(static_cast<std::size_t>(s_[0]) * s_[1] * s_[2], fill);
    }

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i + 1) +
               static_cast<std::size_t>(s_[0]) *
                   (static_cast<std::size_t>(j + 1) + static_cast<std::size_t>(s_[1]) * (k + 1));
    }
    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    std::ptrdiff_t stride(int axis) const {
        if (axis == 0) return 1;
        if (axis == 1) return s_[0];
        return static_cast<std::ptrdiff_t>(s_[0]) * s_[1];
    }
    const std::array<int, 3>& n() const { return n_; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }
    double* ptr() { return data_.data(); }
    const double* ptr() const { return data_.data(); }
    bool empty() const { return data_.empty(); }

    bool operator==(const PaddedArray&) const = default;

private:
    std::array<int, 3> n_{0, 0, 0};
    std::array<int, 3> s_{0, 0, 0};
    std::vector<double> data_;
};

enum class ScalarBc { neumann, fixed_ghost };

class ScalarField {
public:
    ScalarField() = default;

    explicit ScalarField(const Grid& grid, double fill = 0.0, ScalarBc bc = ScalarBc::neumann)
        : grid_(grid), bc_(bc), a_(grid.dims(), fill) {}

    const Grid& grid() const { return grid_; }
    ScalarBc bc_kind() const { return bc_; }

    double& operator()(int i, int j, int k = 0) { return a_(i, j, k); }
    double operator()(int i, int j, int k = 0) const { return a_(i, j, k); }

    PaddedArray& array() { return a_; }
    const PaddedArray& array() const { return a_; }
    std::size_t padded_size() const { return a_.data().size(); }

    template <class F>
    void for_each_cell(F&& f) const {
        const auto& n = grid_.dims();
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) f(i, j, k);
    }

    /// Sets interior values from f(x, y, z) at cell centers.
    template <class F>
    void sample(F&& f) {
        for_each_cell([&](int i, int j, int k) {
            a_(i, j, k) = f(grid_.center(0, i), grid_.center(1, j), grid_.center(2, k));
        });
        apply_bc();
    }

    void fill(double v) {
        std::fill(a_.data().begin(), a_.data().end(), v);
    }

    /// Mirrors interior values into the ghost layer (Neumann); no-op for fixed ghosts.
    void apply_bc() {
        if (bc_ != ScalarBc::neumann) return;
        const auto& n = grid_.dims();
        for (int axis = 0; axis < 3; ++axis) {
            const int b = (axis + 1) % 3;
            const int c = (axis + 2) % 3;
            for (int q = -1; q <= n[c]; ++q) {
                for (int p = -1; p <= n[b]; ++p) {
                    std::array<int, 3> lo{}, lo_in{}, hi{}, hi_in{};
                    lo[b] = lo_in[b] = hi[b] = hi_in[b] = p;
                    lo[c] = lo_in[c] = hi[c] = hi_in[c] = q;
                    lo[axis] = -1;
                    lo_in[axis] = 0;
                    hi[axis] = n[axis];
                    hi_in[axis] = n[axis] - 1;
                    a_(lo[0], lo[1], lo[2]) = a_(lo_in[0], lo_in[1], lo_in[2]);
                    a_(hi[0], hi[1], hi[2]) = a_(hi_in[0], hi_in[1], hi_in[2]);
                }
            }
        }
    }

    std::vector<double> interior() const {
        std::vector<double> out;
        out.reserve(grid_.cell_count());
        for_each_cell([&](int i, int j, int k) { out.push_back(a_(i, j, k)); });
        return out;
    }

    void set_interior(std::span<const double> v) {
        if (v.size() != grid_.cell_count()) throw std::invalid_argument("set_interior: size mismatch");
        std::size_t q = 0;
        for_each_cell([&](int i, int j, int k) { a_(i, j, k) = v[q++]; });
        apply_bc();
    }

    double min() const {
        double m = a_(0, 0, 0);
        for_each_cell([&](int i, int j, int k) { m = std::min(m, a_(i, j, k)); });
        return m;
    }
    double max() const {
        double m = a_(0, 0, 0);
        for_each_cell([&](int i, int j, int k) { m = std::max(m, a_(i, j, k)); });
        return m;
    }

    bool operator==(const ScalarField&) const = default;

private:
    Grid grid_;
    ScalarBc bc_ = ScalarBc::neumann;
    PaddedArray a_;
};

/// Face-centered velocity on the MAC grid with no-slip walls.
class VectorField {
public:
    VectorField() = default;

    explicit VectorField(const Grid& grid) : grid_(grid) {
        for (int d = 0; d < grid.ndim(); ++d) {
            auto n = grid.dims();
            n[d] += 1;
            c_[d] = PaddedArray(n);
        }
    }

    const Grid& grid() const { return grid_; }
    int ncomp() const { return grid_.ndim(); }

    PaddedArray& comp(int d) { return c_[d]; }
    const PaddedArray& comp(int d) const { return c_[d]; }
    double& operator()(int d, int i, int j, int k = 0) { return c_[d](i, j, k); }
    double operator()(int d, int i, int j, int k = 0) const { return c_[d](i, j, k); }

    /// Number of stored face positions of component d along axis a.
    int extent(int d, int a) const { return grid_.dim(a) + (a == d ? 1 : 0); }

    /// Visits every face of component d, walls included.
    template <class F>
    void for_each_face(int d, F&& f) const {
        const auto& n = c_[d].n();
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) f(i, j, k);
    }

    bool is_wall_face(int d, int i, int j, int k) const {
        const int idx = d == 0 ? i : (d == 1 ? j : k);
        return idx == 0 || idx == grid_.dim(d);
    }

    /// Position of face (i,j,k) of component d along axis a.
    double face_coord(int d, int a, int idx) const {
        return a == d ? grid_.node(a, idx) : grid_.center(a, idx);
    }

    /// Sets component values from f(d, x, y, z) at face centers, walls forced to zero.
    template <class F>
    void sample(F&& f) {
        for (int d = 0; d < ncomp(); ++d) {
            for_each_face(d, [&](int i, int j, int k) {
                c_[d](i, j, k) = is_wall_face(d, i, j, k)
                                     ? 0.0
                                     : f(d, face_coord(d, 0, i), face_coord(d, 1, j), face_coord(d, 2, k));
            });
        }
        apply_bc();
    }

    void fill(double v) {
        for (int d = 0; d < ncomp(); ++d) std::fill(c_[d].data().begin(), c_[d].data().end(), v);
    }

    /// Zeroes wall-normal faces and sets odd-reflected ghosts so the wall value is zero.
    void apply_bc() {
        const int nd = ncomp();
        for (int d = 0; d < nd; ++d) {
            PaddedArray& a = c_[d];
            const auto& n = a.n();
            for (int axis = 0; axis < 3; ++axis) {
                const int b = (axis + 1) % 3;
                const int c = (axis + 2) % 3;
                const bool active = axis < grid_.ndim();
                for (int q = -1; q <= n[c]; ++q) {
                    for (int p = -1; p <= n[b]; ++p) {
                        auto at = [&](int idx) -> double& {
                            std::array<int, 3> ix{};
                            ix[axis] = idx;
                            ix[b] = p;
                            ix[c] = q;
                            return a(ix[0], ix[1], ix[2]);
                        };
                        if (!active) {
                            at(-1) = at(0);
                            at(n[axis]) = at(n[axis] - 1);
                        } else if (axis == d) {
                            at(0) = 0.0;
                            at(n[axis] - 1) = 0.0;
                            at(-1) = -at(1);
                            at(n[axis]) = -at(n[axis] - 2);
                        } else {
                            at(-1) = -at(0);
                            at(n[axis]) = -at(n[axis] - 1);
                        }
                    }
                }
            }
        }
    }

    /// All faces (walls included) packed component by component.
    std::vector<double> faces() const {
        std::vector<double> out;
        for (int d = 0; d < ncomp(); ++d) {
            for_each_face(d, [&](int i, int j, int k) { out.push_back(c_[d](i, j, k)); });
        }
        return out;
    }

    std::size_t face_count() const {
        std::size_t total = 0;
        for (int d = 0; d < ncomp(); ++d) {
            const auto& n = c_[d].n();
            total += static_cast<std::size_t>(n[0]) * n[1] * n[2];
        }
        return total;
    }

    void set_faces(std::span<const double> v) {
        if (v.size() != face_count()) throw std::invalid_argument("set_faces: size mismatch");
        std::size_t q = 0;
        for (int d = 0; d < ncomp(); ++d) {
            for_each_face(d, [&](int i, int j, int k) { c_[d](i, j, k) = v[q++]; });
        }
        apply_bc();
    }

    double max_abs() const {
        double m = 0.0;
        for (int d = 0; d < ncomp(); ++d) {
            for_each_face(d, [&](int i, int j, int k) { m = std::max(m, std::abs(c_[d](i, j, k))); });
        }
        return m;
    }

    bool operator==(const VectorField&) const = default;

private:
    Grid grid_;
    std::array<PaddedArray, 3> c_;
};

} // namespace ctns
