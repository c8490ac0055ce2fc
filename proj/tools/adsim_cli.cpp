#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "adsim/analysis.hpp"
#include "adsim/error.hpp"
#include "adsim/harness.hpp"

namespace fs = std::filesystem;
using namespace adsim;

namespace {

int run_simulate(const fs::path& config_path, const fs::path& out, unsigned workers, bool force) {
    const SimConfig config = load_config(config_path);
    const Grid grid = build_grid(config);
    const auto report = validate_stability(config, grid);
    std::cout << fmt::format("grid: {} cells, dt={} dt_max={:.6g}\n", cell_count(grid), report.dt, report.dt_max);
    if (config.geometry == GeometryKind::sphere && config.mode == SphereMode::full3d)
        std::cout << fmt::format("full3d cost estimate: {:.3g} cell-steps\n", cost_estimate(config, grid));
    if (!force) require_stable(report);
    if (!report.ok) std::cout << "warning: dt exceeds dt_max, running anyway (--force)\n";

    ExperimentPlan plan;
    plan.name = config_path.stem().string();
    plan.seed = config.seed;
    plan.output_dir = out;
    plan.variants.push_back({"run", config});
    const auto m = run_plan(plan, {workers, force, &std::cout});
    std::cout << fmt::format("wrote {} ({:.2f} s)\n", (out / plan.name).string(), m.wall_clock_seconds);
    return static_cast<int>(m.exit_code());
}

int run_sweep(const std::string& which, const fs::path& out, bool out_given, unsigned workers,
              std::size_t realizations, bool force) {
    ExperimentPlan plan;
    if (fs::is_regular_file(which)) {
        plan = plan_from_manifest(which);
        if (out_given) plan.output_dir = out;
    } else {
        plan = find_canned_plan(which, realizations);
        plan.output_dir = out;
    }
    const auto m = run_plan(plan, {workers, force, &std::cout});
    std::cout << fmt::format("plan {} hash {} done in {:.2f} s\n", m.plan, m.plan_hash, m.wall_clock_seconds);
    return static_cast<int>(m.exit_code());
}

int run_verify(const std::string& csv_path) {
    const auto checks = analysis::run_verification_suite();
    bool ok = true;
    std::string csv = "name,value,expected,tolerance,pass\n";
    for (const auto& c : checks) {
        std::cout << fmt::format("{:<4} {:<36} value={:.12g} expected={:.12g} tol={:g}\n", c.pass ? "PASS" : "FAIL",
                                 c.name, c.value, c.expected, c.tolerance);
        csv += fmt::format("{},{},{},{},{}\n", c.name, c.value, c.expected, c.tolerance, c.pass ? 1 : 0);
        ok = ok && c.pass;
    }
    if (!csv_path.empty()) write_file_atomic(csv_path, csv);
    std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
    return ok ? 0 : 1;
}

int run_fit(const fs::path& in) {
    const auto rows = read_sweep_csv(in);
    std::cout << fit_report(rows).text();
    return 0;
}

int run_plans() {
    for (const auto& p : make_canned_plans()) {
        std::cout << p.name << " (" << p.variants.size() << " variants)\n";
        for (const auto& v : p.variants)
            std::cout << fmt::format("  {:<28} nu={} delta={} {} N={}\n", v.name, v.config.nu, v.config.delta,
                                     forcing_label(v.config), v.config.realizations);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic boundary-forced Stokes simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    const unsigned default_workers = std::max(1u, std::thread::hardware_concurrency());

    auto* sim = app.add_subcommand("simulate", "run one ensemble from a config file");
    fs::path config_path, sim_out = "results";
    unsigned sim_workers = default_workers;
    bool sim_force = false;
    sim->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--workers", sim_workers, "worker threads")->check(CLI::PositiveNumber);
    sim->add_flag("--force", sim_force, "overwrite existing results and ignore the stability check");

    auto* sweep = app.add_subcommand("sweep", "run a canned plan or re-run a manifest");
    std::string plan_name;
    fs::path sweep_out = "results";
    unsigned sweep_workers = default_workers;
    std::size_t realizations = 250;
    bool sweep_force = false;
    sweep->add_option("--plan", plan_name, "plan name or manifest.json")->required();
    auto* out_opt = sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--workers", sweep_workers, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--realizations", realizations, "ensemble size for canned plans")->check(CLI::PositiveNumber);
    sweep->add_flag("--force", sweep_force, "overwrite existing results and run unstable variants");

    auto* verify = app.add_subcommand("verify", "run the analysis verification suite");
    std::string verify_csv;
    verify->add_option("--csv", verify_csv, "also write the checks as CSV");

    auto* fit = app.add_subcommand("fit", "scaling report from a sweep CSV");
    fs::path fit_in;
    fit->add_option("--in", fit_in, "sweep.csv")->required();

    auto* plans = app.add_subcommand("plans", "list canned plans");
    bool list = false;
    plans->add_flag("--list", list, "list plans and variants");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::config);
    }

    try {
        if (*sim) return run_simulate(config_path, sim_out, sim_workers, sim_force);
        if (*sweep)
            return run_sweep(plan_name, sweep_out, out_opt->count() > 0, sweep_workers, realizations, sweep_force);
        if (*verify) return run_verify(verify_csv);
        if (*fit) return run_fit(fit_in);
        if (*plans) return run_plans();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::io);
    }
    return 0;
}
