#pragma once
/**
 * @file field_io.hpp
 * @brief Legacy VTK structured-points text output and a raw binary dump.
 *
 * Binary layout, little-endian, 64-byte header:
 *   [0,8)   magic "CTNSFLD1"
 *   [8,20)  uint32 dims[3]
 *   [20,24) uint32 component count (1 scalar, ndim vector)
 *   [24,48) double extents[3]
 *   [48,56) double time
 *   [56,60) uint32 ndim
 *   [60,64) reserved, zero
 * followed by doubles: scalar interior cells x-fastest, or each velocity
 * component's faces (walls included) x-fastest, component by component.
 */

#include "ctns/fields.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctns {

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

namespace detail {

inline constexpr char kFieldMagic[8] = {'C', 'T', 'N', 'S', 'F', 'L', 'D', '1'};

template <class T>
void put(std::vector<char>& buf, std::size_t offset, T v) {
    std::memcpy(buf.data() + offset, &v, sizeof v);
}

template <class T>
T get(const std::vector<char>& buf, std::size_t offset) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof v);
    return v;
}

inline std::vector<char> make_header(const Grid& g, std::uint32_t ncomp, double time) {
    std::vector<char> h(64, 0);
    std::memcpy(h.data(), kFieldMagic, 8);
    for (int a = 0; a < 3; ++a) put<std::uint32_t>(h, 8 + 4 * a, static_cast<std::uint32_t>(g.dim(a)));
    put<std::uint32_t>(h, 20, ncomp);
    for (int a = 0; a < 3; ++a) put<double>(h, 24 + 8 * a, g.extent(a));
    put<double>(h, 48, time);
    put<std::uint32_t>(h, 56, static_cast<std::uint32_t>(g.ndim()));
    return h;
}

inline void write_blob(const std::string& path, const std::vector<char>& header, const std::vector<double>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

struct BlobHeader {
    Grid grid;
    std::uint32_t ncomp;
    double time;
};

inline BlobHeader read_blob(const std::string& path, std::vector<double>& data) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<char> h(64);
    in.read(h.data(), 64);
    if (in.gcount() != 64 || std::memcmp(h.data(), kFieldMagic, 8) != 0)
        throw std::runtime_error("'" + path + "' is not a field dump");
    const auto ndim = get<std::uint32_t>(h, 56);
    if (ndim != 2 && ndim != 3) throw std::runtime_error("'" + path + "': bad dimension count");
    std::vector<int> dims;
    std::vector<double> ext;
    for (std::uint32_t a = 0; a < ndim; ++a) {
        dims.push_back(static_cast<int>(get<std::uint32_t>(h, 8 + 4 * a)));
        ext.push_back(get<double>(h, 24 + 8 * a));
    }
    BlobHeader out{Grid(dims, ext), get<std::uint32_t>(h, 20), get<double>(h, 48)};
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg()) - 64;
    if (bytes % sizeof(double) != 0) throw std::runtime_error("'" + path + "': truncated payload");
    data.resize(bytes / sizeof(double));
    in.seekg(64);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
    return out;
}

} // namespace detail

inline void write_binary(const std::string& path, const ScalarField& f, double time) {
    detail::write_blob(path, detail::make_header(f.grid(), 1, time), f.interior());
}

inline void write_binary(const std::string& path, const VectorField& u, double time) {
    detail::write_blob(path, detail::make_header(u.grid(), static_cast<std::uint32_t>(u.ncomp()), time), u.faces());
}

inline ScalarField read_binary_scalar(const std::string& path, double* time = nullptr) {
    std::vector<double> data;
    const auto h = detail::read_blob(path, data);
    if (h.ncomp != 1) throw std::runtime_error("'" + path + "' holds a vector field");
    ScalarField f(h.grid);
    f.set_interior(data);
    if (time) *time = h.time;
    return f;
}

inline VectorField read_binary_vector(const std::string& path, double* time = nullptr) {
    std::vector<double> data;
    const auto h = detail::read_blob(path, data);
    if (h.ncomp != static_cast<std::uint32_t>(h.grid.ndim())) throw std::runtime_error("'" + path + "' is not a velocity dump");
    VectorField u(h.grid);
    u.set_faces(data);
    if (time) *time = h.time;
    return u;
}

/// Cell data of one scalar in legacy VTK structured-points form.
inline void write_vtk(std::ostream& os, const ScalarField& f, const std::string& name) {
    const Grid& g = f.grid();
    os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.dim(0) + 1 << ' ' << g.dim(1) + 1 << ' ' << g.dim(2) + 1 << '\n';
    os << "ORIGIN 0 0 0\nSPACING " << g.h(0) << ' ' << g.h(1) << ' ' << g.h(2) << '\n';
    os << "CELL_DATA " << g.cell_count() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    os.precision(17);
    f.for_each_cell([&](int i, int j, int k) { os << f(i, j, k) << '\n'; });
}

/// Velocity averaged to cell centers, written as VTK cell vectors.
inline void write_vtk(std::ostream& os, const VectorField& u, const std::string& name) {
    const Grid& g = u.grid();
    os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << g.dim(0) + 1 << ' ' << g.dim(1) + 1 << ' ' << g.dim(2) + 1 << '\n';
    os << "ORIGIN 0 0 0\nSPACING " << g.h(0) << ' ' << g.h(1) << ' ' << g.h(2) << '\n';
    os << "CELL_DATA " << g.cell_count() << "\nVECTORS " << name << " double\n";
    os.precision(17);
    const auto& dims = g.dims();
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                std::array<double, 3> v{0.0, 0.0, 0.0};
                for (int d = 0; d < u.ncomp(); ++d) {
                    std::array<int, 3> up{i, j, k};
                    up[d] += 1;
                    v[d] = 0.5 * (u(d, i, j, k) + u(d, up[0], up[1], up[2]));
                }
                os << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
            }
}

inline void write_vtk(const std::string& path, const ScalarField& f, const std::string& name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_vtk(out, f, name);
}

inline void write_vtk(const std::string& path, const VectorField& u, const std::string& name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_vtk(out, u, name);
}

} // namespace ctns
