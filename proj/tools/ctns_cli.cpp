// Command-line front end: run, sweep, mms, compare, certify.
//
// Exit codes: 0 all enabled checks passed, 1 usage or configuration error,
// 2 invariant violation or failed check, 3 solver failure.

#include "ctns/ctns.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ctns;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    bool force_cfl = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "configuration file (INI)");
    sub->add_option("--out", c.out_dir, "output directory (default: [output] directory)");
    sub->add_option("--seed", c.seed, "test-function seed override")->check(CLI::NonNegativeNumber);
    sub->add_flag("--force-cfl", c.force_cfl, "step past CFL violations");
}

SimConfig resolve(const Common& c) {
    SimConfig cfg = c.config_path.empty() ? SimConfig{} : load_config(c.config_path);
    if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
    if (c.force_cfl) cfg.force_cfl = true;
    if (!c.out_dir.empty()) cfg.output_directory = c.out_dir;
    cfg.validate();
    return cfg;
}

int emit(const SimConfig& cfg, const std::string& file, const std::string& text, bool pass) {
    fs::create_directories(cfg.output_directory);
    write_text_file(fs::path(cfg.output_directory) / file, text);
    std::cout << text;
    return pass ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chemotaxis-Navier-Stokes porous-medium simulator and residual certifier"};
    app.require_subcommand(1);

    Common run_opt, sweep_opt, mms_opt, compare_opt, certify_opt;
    bool vtk = false;
    std::vector<double> epsilons{0.1, 0.03, 0.01};
    int levels = 3;
    std::string recipe;
    bool weak = false;
    std::vector<double> exponents{1.5, 1.8};
    std::string stored;

    CLI::App* run = app.add_subcommand("run", "march one configuration and write the ledger and snapshots");
    add_common(run, run_opt);
    run->add_flag("--vtk", vtk, "also write VTK snapshots");

    CLI::App* sweep = app.add_subcommand("sweep", "epsilon sweep of the monitored bounds");
    add_common(sweep, sweep_opt);
    sweep->add_option("--epsilons", epsilons, "non-increasing epsilon list")->delimiter(',');

    CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence");
    add_common(mms, mms_opt);
    mms->add_option("--levels", levels, "refinement levels")->check(CLI::Range(3, 8));
    mms->add_option("--recipe", recipe, "coupled | n_only | c_only | u_only | constant");
    mms->add_flag("--weak", weak, "also report weak-residual convergence");

    CLI::App* compare = app.add_subcommand("compare", "m-regime comparison with certificates");
    add_common(compare, compare_opt);
    compare->add_option("--exponents", exponents, "diffusion exponents to compare")->delimiter(',');

    CLI::App* certify = app.add_subcommand("certify", "evaluate the residual certificate on a stored run");
    add_common(certify, certify_opt);
    certify->add_option("--trajectory", stored, "directory written by 'run'")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            const SimConfig cfg = resolve(run_opt);
            for (const auto& n : cfg.regime_notes()) std::cerr << n << "\n";
            const RunResult r = run_single(cfg, RunOptions{cfg.output_directory, true});
            write_run_outputs(cfg.output_directory, cfg, r, vtk);
            std::cout << "steps=" << r.steps << " snapshots=" << r.trajectory.size() << " output=" << cfg.output_directory
                      << "\n";
            return 0;
        }
        if (*sweep) {
            const SimConfig cfg = resolve(sweep_opt);
            const SweepReport rep = run_epsilon_sweep(cfg, epsilons);
            return emit(cfg, "sweep.txt", rep.text, rep.pass);
        }
        if (*mms) {
            SimConfig cfg = resolve(mms_opt);
            if (!recipe.empty()) cfg.forcing = manufactured_kind_from_string(recipe);
            if (cfg.forcing == ManufacturedKind::none) cfg.forcing = ManufacturedKind::coupled;
            cfg.filter_epsilon = 0.0;
            if (cfg.forcing == ManufacturedKind::constant) cfg.potential_recipe = "constant";
            cfg.validate();
            const MmsReport rep = run_mms(cfg, levels);
            std::string text = rep.text;
            bool pass = rep.pass;
            if (weak) {
                const WeakConvergenceReport wr = run_weak_convergence(cfg, levels, cfg.test_functions);
                text += wr.text;
                pass = pass && wr.pass;
            }
            return emit(cfg, "mms.txt", text, pass);
        }
        if (*compare) {
            const SimConfig cfg = resolve(compare_opt);
            RegimeOptions ro;
            ro.exponents = exponents;
            const RegimeReport rep = run_regime_compare(cfg, ro);
            return emit(cfg, "compare.txt", rep.text, rep.pass);
        }
        if (*certify) {
            SimConfig stored_cfg;
            const TrajectoryRecord tr = load_trajectory(stored, &stored_cfg);
            SimConfig cfg = stored_cfg;
            if (!certify_opt.config_path.empty()) cfg = load_config(certify_opt.config_path);
            if (certify_opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(certify_opt.seed);
            cfg.output_directory = certify_opt.out_dir.empty() ? stored : certify_opt.out_dir;
            CertifyOptions co;
            co.test_functions = cfg.test_functions;
            co.t_cut = cfg.cut_time();
            co.seed = cfg.seed;
            co.tol_super = cfg.tol_super;
            co.weak_n = tr.m > 5.0 / 3.0;
            co.equality_reports = true;
            const Certificate cert = certify_trajectory(tr, co);
            return emit(cfg, "certificate.txt", format_certificate(cert), cert.pass());
        }
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
