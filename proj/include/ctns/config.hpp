#pragma once
/**
 * @file config.hpp
 * @brief SimConfig and its INI-style text form.
 *
 * Sections: [grid] [model] [time] [initial] [potential] [forcing]
 * [tolerances] [certificate] [output]. Unknown sections and keys are errors.
 */

#include "ctns/cell_solver.hpp"
#include "ctns/errors.hpp"
#include "ctns/manufactured.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <type_traits>
#include <sstream>
#include <string>
#include <vector>

namespace ctns {

struct SimConfig {
    // [grid]
    std::vector<int> dims{16, 16, 16};
    std::vector<double> extents{1.0, 1.0, 1.0};
    // [model]
    double m = 1.5;
    double epsilon = 0.01;
    double filter_epsilon = 0.01;
    FaceAverage face_average = FaceAverage::arithmetic;
    bool convection = true;
    // [time]
    double dt = 1e-3;
    double t_end = 2.0;
    double snapshot_interval = 0.02;
    double cfl = 0.5;
    bool force_cfl = false;
    // [initial]
    std::string n_recipe = "bump";  ///< bump | constant
    double n_base = 2.0;
    double n_amplitude = 1.0;
    std::string c_recipe = "bump";  ///< bump | constant
    double c_base = 2.0;
    double c_amplitude = 0.5;
    std::string u_recipe = "zero";  ///< zero | vortex
    double u_amplitude = 0.0;
    // [potential]
    std::string potential_recipe = "linear";  ///< linear (g·x₁) | constant
    double g = 5.0;
    // [forcing]
    ManufacturedKind forcing = ManufacturedKind::none;
    double forcing_velocity = 0.5;
    // [tolerances]
    double proj_tol = 1e-8;
    double solver_tol = 1e-10;
    double tol_energy = 1e-2;
    double tol_super = 5.5e-3;
    // [certificate]
    int test_functions = 20;
    double t_cut = 0.0;  ///< 0 selects t_end
    std::uint64_t seed = 12345;
    // [output]
    std::string output_directory = "out";
    bool write_fields = true;

    Grid grid() const { return Grid(dims, extents); }

    ManufacturedSolution manufactured() const {
        ManufacturedSolution ms;
        ms.kind = forcing;
        ms.m = m;
        ms.epsilon = epsilon;
        ms.velocity_amplitude = forcing_velocity;
        ms.g = potential_recipe == "linear" ? g : 0.0;
        ms.z_walls = dims.size() == 3;
        ms.constant_value = n_base;
        return ms;
    }

    double cut_time() const { return t_cut > 0.0 ? t_cut : t_end; }

    bool operator==(const SimConfig&) const = default;

    /// Throws ConfigError on any out-of-range value.
    void validate() const {
        if (dims.size() != extents.size() || dims.size() < 2 || dims.size() > 3)
            throw ConfigError("grid: dims and extents need 2 or 3 matching entries");
        for (std::size_t a = 0; a < dims.size(); ++a) {
            if (dims[a] < 4) throw ConfigError("grid: every dim must be at least 4");
            if (!(extents[a] > 0.0)) throw ConfigError("grid: extents must be positive");
        }
        if (!(m > 1.0)) throw ConfigError("model.m must exceed 1");
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("model.epsilon must lie in (0,1]");
        if (!(filter_epsilon >= 0.0 && filter_epsilon <= 1.0)) throw ConfigError("model.filter_epsilon must lie in [0,1]");
        if (!(dt > 0.0)) throw ConfigError("time.dt must be positive");
        if (!(t_end > 0.0)) throw ConfigError("time.t_end must be positive");
        if (!(snapshot_interval >= dt)) throw ConfigError("time.snapshot_interval must be at least dt");
        const double ratio = snapshot_interval / dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw ConfigError("time.snapshot_interval must be a whole number of steps");
        if (!(cfl > 0.0)) throw ConfigError("time.cfl must be positive");
        if (n_recipe != "bump" && n_recipe != "constant") throw ConfigError("initial.n_recipe must be bump or constant");
        if (c_recipe != "bump" && c_recipe != "constant") throw ConfigError("initial.c_recipe must be bump or constant");
        if (u_recipe != "zero" && u_recipe != "vortex") throw ConfigError("initial.u_recipe must be zero or vortex");
        if (n_base - std::abs(n_amplitude) < 0.0 && n_recipe == "bump") throw ConfigError("initial: n0 must be nonnegative");
        if (c_base - std::abs(c_amplitude) < 0.0 && c_recipe == "bump") throw ConfigError("initial: c0 must be nonnegative");
        if ((n_recipe == "constant" && n_base < 0.0) || (c_recipe == "constant" && c_base < 0.0))
            throw ConfigError("initial: constants must be nonnegative");
        if (potential_recipe != "linear" && potential_recipe != "constant")
            throw ConfigError("potential.recipe must be linear or constant");
        if (!(proj_tol > 0.0 && proj_tol <= 1e-6)) throw ConfigError("tolerances.proj_tol must lie in (0,1e-6]");
        if (!(solver_tol > 0.0)) throw ConfigError("tolerances.solver_tol must be positive");
        if (!(tol_energy > 0.0) || !(tol_super > 0.0)) throw ConfigError("tolerances must be positive");
        if (test_functions < 0) throw ConfigError("certificate.test_functions must be nonnegative");
        if (t_cut < 0.0 || t_cut > t_end * (1.0 + 1e-12)) throw ConfigError("certificate.t_cut must lie in [0, t_end]");
        if (forcing != ManufacturedKind::none) {
            for (double e : extents)
                if (e != 1.0) throw ConfigError("forcing recipes require the unit box");
            if (filter_epsilon != 0.0) throw ConfigError("forcing recipes require model.filter_epsilon = 0");
            if (forcing == ManufacturedKind::constant && potential_recipe != "constant")
                throw ConfigError("the constant recipe requires potential.recipe = constant");
        }
    }

    /// Non-fatal notes about the parameter regime.
    std::vector<std::string> regime_notes() const {
        std::vector<std::string> notes;
        if (m <= 4.0 / 3.0) notes.push_back("warning: m <= 4/3 lies outside the very weak existence regime");
        if (m > 5.0 / 3.0) notes.push_back("info: m > 5/3 lies in the weak solution regime");
        return notes;
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + s + "'");
    }
    if (used != s.size()) throw ConfigError(key + ": trailing characters in '" + s + "'");
    if (!std::isfinite(v)) throw ConfigError(key + ": value must be finite");
    return v;
}

inline long long parse_integer(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + s + "'");
    }
    if (used != s.size()) throw ConfigError(key + ": trailing characters in '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& key, const std::string& s, F&& one) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError(key + ": empty list entry");
        out.push_back(one(key, item.substr(b, e - b + 1)));
    }
    return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t q = 0; q < v.size(); ++q) {
        if (q) out += ", ";
        if constexpr (std::is_floating_point_v<T>) out += fmt_double(v[q]);
        else out += std::to_string(v[q]);
    }
    return out;
}

} // namespace detail

/// Emits every field; parse_config(emit_config(c)) == c.
inline std::string emit_config(const SimConfig& c) {
    using detail::fmt_double;
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    std::ostringstream os;
    os << "[grid]\n"
       << "dims = " << detail::join(c.dims) << "\n"
       << "extents = " << detail::join(c.extents) << "\n\n"
       << "[model]\n"
       << "m = " << fmt_double(c.m) << "\n"
       << "epsilon = " << fmt_double(c.epsilon) << "\n"
       << "filter_epsilon = " << fmt_double(c.filter_epsilon) << "\n"
       << "face_average = " << (c.face_average == FaceAverage::arithmetic ? "arithmetic" : "harmonic") << "\n"
       << "convection = " << b(c.convection) << "\n\n"
       << "[time]\n"
       << "dt = " << fmt_double(c.dt) << "\n"
       << "t_end = " << fmt_double(c.t_end) << "\n"
       << "snapshot_interval = " << fmt_double(c.snapshot_interval) << "\n"
       << "cfl = " << fmt_double(c.cfl) << "\n"
       << "force_cfl = " << b(c.force_cfl) << "\n\n"
       << "[initial]\n"
       << "n_recipe = " << c.n_recipe << "\n"
       << "n_base = " << fmt_double(c.n_base) << "\n"
       << "n_amplitude = " << fmt_double(c.n_amplitude) << "\n"
       << "c_recipe = " << c.c_recipe << "\n"
       << "c_base = " << fmt_double(c.c_base) << "\n"
       << "c_amplitude = " << fmt_double(c.c_amplitude) << "\n"
       << "u_recipe = " << c.u_recipe << "\n"
       << "u_amplitude = " << fmt_double(c.u_amplitude) << "\n\n"
       << "[potential]\n"
       << "recipe = " << c.potential_recipe << "\n"
       << "g = " << fmt_double(c.g) << "\n\n"
       << "[forcing]\n"
       << "recipe = " << to_string(c.forcing) << "\n"
       << "velocity_amplitude = " << fmt_double(c.forcing_velocity) << "\n\n"
       << "[tolerances]\n"
       << "proj_tol = " << fmt_double(c.proj_tol) << "\n"
       << "solver_tol = " << fmt_double(c.solver_tol) << "\n"
       << "tol_energy = " << fmt_double(c.tol_energy) << "\n"
       << "tol_super = " << fmt_double(c.tol_super) << "\n\n"
       << "[certificate]\n"
       << "test_functions = " << c.test_functions << "\n"
       << "t_cut = " << fmt_double(c.t_cut) << "\n"
       << "seed = " << c.seed << "\n\n"
       << "[output]\n"
       << "directory = " << c.output_directory << "\n"
       << "write_fields = " << b(c.write_fields) << "\n";
    return os.str();
}

/// Parses the INI text; keys left out keep their defaults.
inline SimConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    SimConfig c;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto dbl = [](double& dst) -> Setter {
        return [&dst](const std::string& k, const std::string& v) { dst = detail::parse_double(k, v); };
    };
    auto boolean = [](bool& dst) -> Setter {
        return [&dst](const std::string& k, const std::string& v) { dst = detail::parse_bool(k, v); };
    };
    auto str = [](std::string& dst) -> Setter {
        return [&dst](const std::string&, const std::string& v) { dst = v; };
    };
    bool filter_given = false;
    const std::map<std::string, std::map<std::string, Setter>> schema{
        {"grid",
         {{"dims",
           [&](const std::string& k, const std::string& v) {
               c.dims = detail::parse_list<int>(k, v, [](const std::string& kk, const std::string& s) {
                   return static_cast<int>(detail::parse_integer(kk, s));
               });
           }},
          {"extents",
           [&](const std::string& k, const std::string& v) {
               c.extents = detail::parse_list<double>(k, v, detail::parse_double);
           }}}},
        {"model",
         {{"m", dbl(c.m)},
          {"epsilon", dbl(c.epsilon)},
          {"filter_epsilon",
           [&](const std::string& k, const std::string& v) {
               c.filter_epsilon = detail::parse_double(k, v);
               filter_given = true;
           }},
          {"face_average",
           [&](const std::string& k, const std::string& v) {
               if (v == "arithmetic") c.face_average = FaceAverage::arithmetic;
               else if (v == "harmonic") c.face_average = FaceAverage::harmonic;
               else throw ConfigError(k + ": expected arithmetic or harmonic");
           }},
          {"convection", boolean(c.convection)}}},
        {"time",
         {{"dt", dbl(c.dt)},
          {"t_end", dbl(c.t_end)},
          {"snapshot_interval", dbl(c.snapshot_interval)},
          {"cfl", dbl(c.cfl)},
          {"force_cfl", boolean(c.force_cfl)}}},
        {"initial",
         {{"n_recipe", str(c.n_recipe)},
          {"n_base", dbl(c.n_base)},
          {"n_amplitude", dbl(c.n_amplitude)},
          {"c_recipe", str(c.c_recipe)},
          {"c_base", dbl(c.c_base)},
          {"c_amplitude", dbl(c.c_amplitude)},
          {"u_recipe", str(c.u_recipe)},
          {"u_amplitude", dbl(c.u_amplitude)}}},
        {"potential", {{"recipe", str(c.potential_recipe)}, {"g", dbl(c.g)}}},
        {"forcing",
         {{"recipe",
           [&](const std::string& k, const std::string& v) {
               try {
                   c.forcing = manufactured_kind_from_string(v);
               } catch (const std::invalid_argument&) {
                   throw ConfigError(k + ": unknown recipe '" + v + "'");
               }
           }},
          {"velocity_amplitude", dbl(c.forcing_velocity)}}},
        {"tolerances",
         {{"proj_tol", dbl(c.proj_tol)},
          {"solver_tol", dbl(c.solver_tol)},
          {"tol_energy", dbl(c.tol_energy)},
          {"tol_super", dbl(c.tol_super)}}},
        {"certificate",
         {{"test_functions",
           [&](const std::string& k, const std::string& v) {
               c.test_functions = static_cast<int>(detail::parse_integer(k, v));
           }},
          {"t_cut", dbl(c.t_cut)},
          {"seed",
           [&](const std::string& k, const std::string& v) {
               const long long s = detail::parse_integer(k, v);
               if (s < 0) throw ConfigError(k + ": seed must be nonnegative");
               c.seed = static_cast<std::uint64_t>(s);
           }}}},
        {"output", {{"directory", str(c.output_directory)}, {"write_fields", boolean(c.write_fields)}}},
    };

    for (const auto& [section, body] : tree) {
        const auto sit = schema.find(section);
        if (sit == schema.end()) {
            if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
            throw ConfigError("unknown section [" + section + "]");
        }
        for (const auto& [key, node] : body) {
            const auto kit = sit->second.find(key);
            if (kit == sit->second.end()) throw ConfigError("unknown key '" + section + "." + key + "'");
            kit->second(section + "." + key, node.get_value<std::string>());
        }
    }
    if (!filter_given) c.filter_epsilon = c.forcing == ManufacturedKind::none ? c.epsilon : 0.0;
    c.validate();
    return c;
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace ctns
