#pragma once
/**
 * @file simulation.hpp
 * @brief Coupled time marching (n, then c, then u each step), online
 *        invariant gating, and trajectory storage.
 */

#include "ctns/cell_solver.hpp"
#include "ctns/config.hpp"
#include "ctns/diagnostics.hpp"
#include "ctns/field_io.hpp"
#include "ctns/fluid_solver.hpp"
#include "ctns/manufactured.hpp"
#include "ctns/signal_solver.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ctns {

/// Snapshots at uniform spacing plus everything the certifier needs.
struct TrajectoryRecord {
    double m = 1.5;
    double epsilon = 0.01;
    Grid grid;
    ScalarField phi;
    ManufacturedSolution forcing;  ///< kind none for source-free runs
    std::vector<double> times;
    std::vector<ScalarField> n, c;
    std::vector<VectorField> u;

    bool forced() const { return forcing.kind != ManufacturedKind::none; }
    std::size_t size() const { return times.size(); }
    double spacing() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

    void push(double t, const ScalarField& nn, const ScalarField& cc, const VectorField& uu) {
        times.push_back(t);
        n.push_back(nn);
        c.push_back(cc);
        u.push_back(uu);
    }
};

/// Per-step quantities checked online.
struct StepLog {
    std::vector<double> time, min_n, min_c, max_div, energy_residual, mass_drift;
};

struct RunResult {
    TrajectoryRecord trajectory;
    DiagnosticsLedger ledger;
    StepLog log;
    std::vector<std::string> notes;
    std::size_t steps = 0;
};

// ============================================================================
// Initial data and potential
// ============================================================================

inline ScalarField make_potential(const SimConfig& cfg, const Grid& g) {
    ScalarField phi(g);
    if (cfg.potential_recipe == "linear") phi.sample([&](double x, double, double) { return cfg.g * x; });
    return phi;
}

/// Discrete curl of the stream function a·sin²(πx/Lx)sin²(πy/Ly) on nodes; exactly divergence free.
inline VectorField vortex_velocity(const Grid& g, double amplitude) {
    VectorField u(g);
    const double pi = std::numbers::pi;
    auto psi = [&](int i, int j) {
        const double sx = std::sin(pi * g.node(0, i) / g.extent(0));
        const double sy = std::sin(pi * g.node(1, j) / g.extent(1));
        return amplitude * sx * sx * sy * sy;
    };
    u.for_each_face(0, [&](int i, int j, int k) {
        if (!u.is_wall_face(0, i, j, k)) u(0, i, j, k) = (psi(i, j + 1) - psi(i, j)) / g.h(1);
    });
    u.for_each_face(1, [&](int i, int j, int k) {
        if (!u.is_wall_face(1, i, j, k)) u(1, i, j, k) = -(psi(i + 1, j) - psi(i, j)) / g.h(0);
    });
    u.apply_bc();
    return u;
}

struct InitialState {
    ScalarField n, c;
    VectorField u;
};

inline InitialState make_initial_state(const SimConfig& cfg) {
    const Grid g = cfg.grid();
    InitialState s{ScalarField(g), ScalarField(g), VectorField(g)};
    if (cfg.forcing != ManufacturedKind::none) {
        const ManufacturedSolution ms = cfg.manufactured();
        s.n = sample_n(ms, g, 0.0);
        s.c = sample_c(ms, g, 0.0);
        s.u = sample_u(ms, g, 0.0);
        if (ms.evolves_u()) s.u = project(s.u, cfg.proj_tol);
        return s;
    }
    const double pi = std::numbers::pi;
    const double lx = g.extent(0), ly = g.extent(1);
    if (cfg.n_recipe == "bump") {
        s.n.sample([&](double x, double y, double) {
            return cfg.n_base + cfg.n_amplitude * std::cos(pi * x / lx) * std::cos(pi * y / ly);
        });
    } else {
        s.n.fill(cfg.n_base);
    }
    if (cfg.c_recipe == "bump") {
        s.c.sample([&](double, double y, double) { return cfg.c_base + cfg.c_amplitude * std::cos(pi * y / ly); });
    } else {
        s.c.fill(cfg.c_base);
    }
    if (cfg.u_recipe == "vortex") s.u = vortex_velocity(g, cfg.u_amplitude);
    return s;
}

// ============================================================================
// Output
// ============================================================================

inline void write_step_log_csv(const StepLog& log, std::ostream& os) {
    os << "t,min_n,min_c,max_div_u,energy_residual,mass_drift\n";
    for (std::size_t q = 0; q < log.time.size(); ++q) {
        os << format_real(log.time[q]) << ',' << format_real(log.min_n[q]) << ',' << format_real(log.min_c[q]) << ','
           << format_real(log.max_div[q]) << ',' << format_real(log.energy_residual[q]) << ','
           << format_real(log.mass_drift[q]) << '\n';
    }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << text;
}

/// Writes the ledger CSVs, the config echo and (optionally) the snapshot fields.
inline void write_run_outputs(const std::filesystem::path& dir, const SimConfig& cfg, const RunResult& r,
                              bool vtk = false) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_text_file(dir / "config.ini", emit_config(cfg));
    {
        std::ofstream out(dir / "ledger.csv");
        write_samples_csv(r.ledger, out);
    }
    {
        std::ofstream out(dir / "windows.csv");
        write_windows_csv(r.ledger, out);
    }
    {
        std::ofstream out(dir / "steps.csv");
        write_step_log_csv(r.log, out);
    }
    if (!cfg.write_fields) return;
    const fs::path snap = dir / "snapshots";
    fs::create_directories(snap);
    std::ofstream index(snap / "index.csv");
    index << "index,t\n";
    const auto& tr = r.trajectory;
    for (std::size_t q = 0; q < tr.size(); ++q) {
        char tag[16];
        std::snprintf(tag, sizeof tag, "%05zu", q);
        write_binary((snap / ("n_" + std::string(tag) + ".bin")).string(), tr.n[q], tr.times[q]);
        write_binary((snap / ("c_" + std::string(tag) + ".bin")).string(), tr.c[q], tr.times[q]);
        write_binary((snap / ("u_" + std::string(tag) + ".bin")).string(), tr.u[q], tr.times[q]);
        if (vtk) {
            write_vtk((snap / ("n_" + std::string(tag) + ".vtk")).string(), tr.n[q], "n");
            write_vtk((snap / ("c_" + std::string(tag) + ".vtk")).string(), tr.c[q], "c");
            write_vtk((snap / ("u_" + std::string(tag) + ".vtk")).string(), tr.u[q], "u");
        }
        index << q << ',' << format_real(tr.times[q]) << '\n';
    }
}

inline TrajectoryRecord trajectory_skeleton(const SimConfig& cfg) {
    TrajectoryRecord tr;
    tr.m = cfg.m;
    tr.epsilon = cfg.epsilon;
    tr.grid = cfg.grid();
    tr.phi = make_potential(cfg, tr.grid);
    tr.forcing = cfg.manufactured();
    return tr;
}

/// Reads a directory written by write_run_outputs; returns its config through cfg_out.
inline TrajectoryRecord load_trajectory(const std::filesystem::path& dir, SimConfig* cfg_out = nullptr) {
    namespace fs = std::filesystem;
    const SimConfig cfg = load_config((dir / "config.ini").string());
    TrajectoryRecord tr = trajectory_skeleton(cfg);
    const fs::path snap = dir / "snapshots";
    std::ifstream index(snap / "index.csv");
    if (!index) throw std::runtime_error("no snapshot index in '" + dir.string() + "'");
    std::string line;
    std::getline(index, line);
    while (std::getline(index, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::size_t q = std::stoul(line.substr(0, comma));
        char tag[16];
        std::snprintf(tag, sizeof tag, "%05zu", q);
        double t = 0.0;
        ScalarField n = read_binary_scalar((snap / ("n_" + std::string(tag) + ".bin")).string(), &t);
        ScalarField c = read_binary_scalar((snap / ("c_" + std::string(tag) + ".bin")).string());
        VectorField u = read_binary_vector((snap / ("u_" + std::string(tag) + ".bin")).string());
        if (!(n.grid() == tr.grid)) throw std::runtime_error("snapshot grid differs from the config grid");
        tr.push(t, n, c, u);
    }
    if (cfg_out) *cfg_out = cfg;
    return tr;
}

// ============================================================================
// Time marching
// ============================================================================

struct RunOptions {
    std::string dump_directory;  ///< where a failing state is dumped; empty disables
    bool keep_snapshots = true;
};

namespace detail {
inline void dump_state(const RunOptions& opt, const SimConfig& cfg, double t, const ScalarField& n,
                       const ScalarField& c, const VectorField& u, const std::string& what) {
    if (opt.dump_directory.empty()) return;
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(opt.dump_directory) / "failure";
    fs::create_directories(dir);
    write_text_file(dir / "config.ini", emit_config(cfg));
    write_text_file(dir / "reason.txt", what + "\n");
    write_binary((dir / "n.bin").string(), n, t);
    write_binary((dir / "c.bin").string(), c, t);
    write_binary((dir / "u.bin").string(), u, t);
}
} // namespace detail

/**
 * Marches the coupled system to t_end. Every step checks mass balance,
 * nonnegativity, ‖div u‖_∞ ≤ proj_tol and the fluid energy residual; a
 * failed check dumps the state and throws InvariantViolation.
 */
inline RunResult run_single(const SimConfig& cfg, const RunOptions& opt = {}) {
    cfg.validate();
    const Grid g = cfg.grid();
    const ManufacturedSolution ms = cfg.manufactured();
    const bool forced = ms.kind != ManufacturedKind::none;

    RunResult res;
    res.notes = cfg.regime_notes();
    res.trajectory = trajectory_skeleton(cfg);
    res.ledger = DiagnosticsLedger(cfg.m, cfg.epsilon);
    check_potential(res.trajectory.phi);

    InitialState s = make_initial_state(cfg);
    const double div0 = max_abs_interior(div(s.u));
    if (div0 > cfg.proj_tol) throw InvariantViolation(0, "initial velocity is not discretely divergence free");

    CellStepParams cp;
    cp.m = cfg.m;
    cp.epsilon = cfg.epsilon;
    cp.dt = cfg.dt;
    cp.cfl = cfg.cfl;
    cp.force_cfl = cfg.force_cfl;
    cp.face_average = cfg.face_average;
    SignalStepOptions sp;
    sp.rel_tol = cfg.solver_tol;
    sp.cfl = cfg.cfl;
    sp.force_cfl = cfg.force_cfl;
    FluidStepParams fp;
    fp.epsilon = cfg.filter_epsilon;
    fp.dt = cfg.dt;
    fp.phi = res.trajectory.phi;
    fp.proj_tol = cfg.proj_tol;
    fp.solver_tol = cfg.solver_tol;
    fp.cfl = cfg.cfl;
    fp.force_cfl = cfg.force_cfl;
    fp.convection = cfg.convection;

    const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
    const std::size_t every = static_cast<std::size_t>(std::llround(cfg.snapshot_interval / cfg.dt));
    const double mass0 = integrate(s.n);
    const double l1_bound = std::max(mass0, integrate(s.c)) * (1.0 + 1e-6);

    auto record = [&](double t, double dt) {
        record_step(res.ledger, FlowState{t, s.n, s.c, s.u}, cfg.epsilon, cfg.m, dt);
    };
    record(0.0, 0.0);
    if (opt.keep_snapshots) res.trajectory.push(0.0, s.n, s.c, s.u);

    ScalarField pressure(g);
    double expected_mass = mass0;
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t0 = static_cast<double>(step - 1) * cfg.dt;
        const double t1 = static_cast<double>(step) * cfg.dt;
        auto fail = [&](const std::string& what) {
            detail::dump_state(opt, cfg, t0, s.n, s.c, s.u, what);
            throw InvariantViolation(step, what);
        };

        std::optional<ScalarField> src_n, src_c;
        std::optional<VectorField> src_u;
        if (forced) {
            src_n = sample_source_n(ms, g, t0);
            src_c = sample_source_c(ms, g, t1);
            src_u = sample_source_u(ms, g, t1);
        }

        // cells
        ScalarField n_new(g);
        double drift = 0.0;
        if (!forced || ms.evolves_n()) {
            cp.mms_source = src_n ? &*src_n : nullptr;
            try {
                n_new = step_n(s.n, s.c, s.u, cp);
            } catch (const NegativeDensity& e) {
                detail::dump_state(opt, cfg, t0, s.n, s.c, s.u, e.what());
                throw;
            }
            expected_mass += src_n ? cfg.dt * integrate(*src_n) : 0.0;
            const double mass = integrate(n_new);
            drift = std::abs(mass - expected_mass) / std::max(std::abs(expected_mass), 1.0);
            if (drift > 1e-12) fail("mass drift " + format_real(drift) + " exceeds 1e-12");
            expected_mass = mass;
        } else {
            n_new = sample_n(ms, g, t1);
        }

        // signal
        ScalarField c_new = !forced || ms.evolves_c()
                                ? step_c(s.c, n_new, s.u, cfg.dt, src_c ? &*src_c : nullptr, sp)
                                : sample_c(ms, g, t1);

        // fluid
        FluidStepResult fr{VectorField(g), ScalarField(g)};
        double energy = 0.0;
        if (!forced || ms.evolves_u()) {
            fp.mms_source = src_u ? &*src_u : nullptr;
            fr = step_u(s.u, n_new, fp, &pressure);
            energy = discrete_energy_residual(s.u, fr.u, n_new, fp);
            if (src_u) energy -= inner(*src_u, fr.u);
            const double energy_scale = std::max(1.0, inner(fr.u, fr.u));
            if (energy > cfg.tol_energy * energy_scale)
                fail("energy residual " + format_real(energy) + " exceeds tol_energy");
        } else {
            fr.u = sample_u(ms, g, t1);
        }
        const double dv = max_abs_interior(div(fr.u));
        if (dv > cfg.proj_tol) fail("divergence " + format_real(dv) + " exceeds proj_tol");

        s.n = std::move(n_new);
        s.c = std::move(c_new);
        s.u = fr.u;
        pressure = fr.pressure;

        const double min_n = s.n.min(), min_c = s.c.min();
        if (min_n < 0.0 || min_c < 0.0) fail("negative density after step");

        res.log.time.push_back(t1);
        res.log.min_n.push_back(min_n);
        res.log.min_c.push_back(min_c);
        res.log.max_div.push_back(dv);
        res.log.energy_residual.push_back(energy);
        res.log.mass_drift.push_back(drift);

        record(t1, cfg.dt);
        if (!forced && res.ledger.l1_c.back() > l1_bound) fail("l1 norm of c exceeds max(int n0, int c0)");
        if (opt.keep_snapshots && step % every == 0) res.trajectory.push(t1, s.n, s.c, s.u);
    }
    res.steps = steps;
    return res;
}

} // namespace ctns
