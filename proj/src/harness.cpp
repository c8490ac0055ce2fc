#include "adsim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "adsim/error.hpp"

namespace adsim {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out))
        throw ConfigError("bad number for '" + key + "': '" + v + "'");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("bad integer for '" + key + "': '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean for '" + key + "': '" + v + "'");
}

std::string num(double v) { return fmt::format("{}", v); }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Variant make_variant(std::string name, SimConfig c) { return {std::move(name), c}; }

}  // namespace

SimConfig parse_config(std::istream& in) {
    SimConfig c;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("line {}: expected key = value", lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
        if (key == "geometry") {
            if (v == "halfspace") c.geometry = GeometryKind::halfspace;
            else if (v == "sphere") c.geometry = GeometryKind::sphere;
            else throw ConfigError("unknown geometry '" + v + "'");
        } else if (key == "mode") {
            if (v == "axisymmetric") c.mode = SphereMode::axisymmetric;
            else if (v == "full3d") c.mode = SphereMode::full3d;
            else throw ConfigError("unknown mode '" + v + "'");
        } else if (key == "nu") c.nu = parse_double(key, v);
        else if (key == "delta") c.delta = parse_double(key, v);
        else if (key == "alpha") c.alpha = parse_double(key, v);
        else if (key == "dt") c.dt = parse_double(key, v);
        else if (key == "T") c.T = parse_double(key, v);
        else if (key == "y_max") c.y_max = parse_double(key, v);
        else if (key == "R") c.R = parse_double(key, v);
        else if (key == "noise_mode") c.noise_mode = noise_mode_from_string(v);
        else if (key == "deterministic_forcing") c.deterministic_forcing = parse_bool(key, v);
        else if (key == "realizations") c.realizations = parse_uint(key, v);
        else if (key == "seed") c.seed = parse_uint(key, v);
        else if (key == "sample_every") c.sample_every = parse_uint(key, v);
        else if (key == "amplitude") c.amplitude = parse_double(key, v);
        else if (key == "regularization") {
            if (v == "cell_average") c.regularization = Regularization::cell_average;
            else if (v == "half_cell_offset") c.regularization = Regularization::half_cell_offset;
            else throw ConfigError("unknown regularization '" + v + "'");
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

SimConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    return parse_config(in);
}

std::string format_config(const SimConfig& c) {
    std::string s;
    s += "geometry = " + to_string(c.geometry) + "\n";
    s += "mode = " + to_string(c.mode) + "\n";
    s += "nu = " + num(c.nu) + "\n";
    s += "delta = " + num(c.delta) + "\n";
    s += "alpha = " + num(c.alpha) + "\n";
    s += "dt = " + num(c.dt) + "\n";
    s += "T = " + num(c.T) + "\n";
    s += c.geometry == GeometryKind::sphere ? "R = " + num(c.R) + "\n" : "y_max = " + num(c.y_max) + "\n";
    s += "noise_mode = " + to_string(c.noise_mode) + "\n";
    s += std::string("deterministic_forcing = ") + (c.deterministic_forcing ? "true" : "false") + "\n";
    s += fmt::format("realizations = {}\n", c.realizations);
    s += fmt::format("seed = {}\n", c.seed);
    s += fmt::format("sample_every = {}\n", c.sample_every);
    s += "regularization = " + to_string(c.regularization) + "\n";
    s += "amplitude = " + num(c.amplitude) + "\n";
    return s;
}

std::string forcing_label(const SimConfig& c) {
    const bool noisy = c.noise_mode != NoiseMode::off;
    if (noisy && c.deterministic_forcing) return "mixed";
    if (noisy) return "stochastic";
    if (c.deterministic_forcing) return "deterministic";
    return "off";
}

void ExperimentPlan::validate() const {
    if (name.empty()) throw ConfigError("plan has no name");
    if (variants.empty()) throw ConfigError("plan '" + name + "' has no variants");
    std::set<std::string> names;
    for (const auto& v : variants) {
        if (v.name.empty() || v.name.find_first_of("/\\") != std::string::npos)
            throw ConfigError("bad variant name '" + v.name + "'");
        if (!names.insert(v.name).second) throw ConfigError("duplicate variant name '" + v.name + "'");
        if (v.config.geometry != variants.front().config.geometry)
            throw ConfigError("plan '" + name + "' mixes geometries");
        v.config.validate();
    }
}

ExperimentPlan with_variant_seeds(ExperimentPlan plan) {
    for (std::size_t i = 0; i < plan.variants.size(); ++i) plan.variants[i].config.seed = plan.seed + i;
    return plan;
}

std::vector<ExperimentPlan> make_canned_plans(std::size_t realizations) {
    const std::vector<double> nus{0.5, 0.25, 0.1, 0.075, 0.05};
    SimConfig base;
    base.delta = 0.75;
    base.alpha = 0.0005;
    base.dt = 0.005;
    base.T = 1.0;
    base.y_max = 10.0;
    base.realizations = realizations;

    SimConfig stochastic = base;
    SimConfig deterministic = base;
    deterministic.noise_mode = NoiseMode::off;
    deterministic.deterministic_forcing = true;
    deterministic.realizations = 1;

    std::vector<ExperimentPlan> plans;
    auto nu_plan = [&](std::string name, SimConfig c) {
        ExperimentPlan p;
        p.name = std::move(name);
        for (double nu : nus) {
            c.nu = nu;
            p.variants.push_back(make_variant("nu_" + num(nu), c));
        }
        return with_variant_seeds(p);
    };
    plans.push_back(nu_plan("halfspace-stochastic", stochastic));
    plans.push_back(nu_plan("halfspace-deterministic", deterministic));

    ExperimentPlan sweep;
    sweep.name = "halfspace-delta-sweep";
    for (const auto& [label, c0] : {std::pair{"stochastic", stochastic}, std::pair{"deterministic", deterministic}}) {
        for (double delta : {0.25, 0.5, 0.75, 0.9}) {
            SimConfig c = c0;
            c.nu = 0.1;
            c.delta = delta;
            sweep.variants.push_back(make_variant(std::string(label) + "_delta_" + num(delta), c));
        }
    }
    plans.push_back(with_variant_seeds(sweep));

    SimConfig sphere = stochastic;
    sphere.geometry = GeometryKind::sphere;
    sphere.mode = SphereMode::axisymmetric;
    sphere.R = 5.0;
    plans.push_back(nu_plan("sphere-stochastic", sphere));
    return plans;
}

ExperimentPlan find_canned_plan(const std::string& name, std::size_t realizations) {
    for (auto& p : make_canned_plans(realizations))
        if (p.name == name) return p;
    throw ConfigError("unknown plan '" + name + "'");
}

bool RunManifest::all_ok() const {
    return std::all_of(variants.begin(), variants.end(), [](const VariantRecord& v) { return v.status == "ok"; });
}

ExitCode RunManifest::exit_code() const { return all_ok() ? ExitCode::ok : ExitCode::stability; }

std::string plan_hash(const ExperimentPlan& plan) {
    std::string text = plan.name + "\n";
    for (const auto& v : plan.variants) text += "[" + v.name + "]\n" + format_config(v.config);
    return fmt::format("{:016x}", fnv1a(text));
}

std::string csv_body(const std::string& text) {
    std::string out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

std::string series_csv(const EnsembleStats& st, const Variant& variant) {
    std::string s = "# adsim series v1\n";
    s += "# variant: " + variant.name + "\n";
    std::istringstream cfg(format_config(variant.config));
    for (std::string line; std::getline(cfg, line);) s += "# config: " + line + "\n";
    s += fmt::format("# realizations: {}\n", st.realizations);
    s += "time,ke_mean,ke_sem,diss_mean,diss_sem,wall_ke_mean,wall_ke_sem,slipnorm_mean,cum_diss_mean\n";
    for (std::size_t k = 0; k < st.times.size(); ++k) {
        s += fmt::format("{},{},{},{},{},{},{},{},{}\n", st.times[k], st.kinetic_energy.mean[k],
                         st.kinetic_energy.sem[k], st.dissipation_rate.mean[k], st.dissipation_rate.sem[k],
                         st.wall_energy.mean[k], st.wall_energy.sem[k], st.slip_norm.mean[k],
                         st.cumulative_dissipation.mean[k]);
    }
    return s;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string s = "# adsim sweep v1\n";
    s += "nu,delta,mode,time_integrated_diss,final_wall_ke,final_ke,weak_diss\n";
    for (const auto& r : rows)
        s += fmt::format("{},{},{},{},{},{},{}\n", r.nu, r.delta, r.mode, r.time_integrated_diss, r.final_wall_ke,
                         r.final_ke, r.weak_diss);
    return s;
}

std::vector<SweepRow> parse_sweep_csv(std::istream& in) {
    static const std::vector<std::string> required{"nu",           "delta",          "mode",
                                                   "time_integrated_diss", "final_wall_ke", "final_ke",
                                                   "weak_diss"};
    std::string line;
    std::map<std::string, std::size_t> col;
    std::vector<SweepRow> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv(line);
        if (col.empty()) {
            for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
            for (const auto& r : required)
                if (!col.count(r)) throw ConfigError("sweep CSV: missing column '" + r + "'");
            continue;
        }
        if (cells.size() != col.size()) throw ConfigError(fmt::format("sweep CSV line {}: wrong field count", lineno));
        auto get = [&](const std::string& name) {
            return parse_double(fmt::format("{} (line {})", name, lineno), cells[col[name]]);
        };
        SweepRow r;
        r.nu = get("nu");
        r.delta = get("delta");
        r.mode = cells[col["mode"]];
        r.time_integrated_diss = get("time_integrated_diss");
        r.final_wall_ke = get("final_wall_ke");
        r.final_ke = get("final_ke");
        r.weak_diss = get("weak_diss");
        rows.push_back(r);
    }
    if (col.empty()) throw ConfigError("sweep CSV: no header line");
    return rows;
}

std::vector<SweepRow> read_sweep_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    return parse_sweep_csv(in);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
    }
}

std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["plan"] = m.plan;
    j["plan_hash"] = m.plan_hash;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["wall_clock_seconds"] = m.wall_clock_seconds;
    j["variants"] = nlohmann::ordered_json::array();
    for (const auto& v : m.variants)
        j["variants"].push_back({{"name", v.name}, {"seed", v.seed}, {"config", v.config}, {"file", v.file},
                                 {"status", v.status}});
    j["files"] = m.files;
    return j.dump(2) + "\n";
}

ExperimentPlan plan_from_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read manifest '" + path.string() + "'");
    ExperimentPlan plan;
    try {
        const auto j = nlohmann::json::parse(in);
        plan.name = j.at("plan").get<std::string>();
        plan.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& v : j.at("variants")) {
            std::istringstream cfg(v.at("config").get<std::string>());
            plan.variants.push_back({v.at("name").get<std::string>(), parse_config(cfg)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest '" + path.string() + "': " + e.what());
    }
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    plan.output_dir = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
    plan.validate();
    return plan;
}

double cost_estimate(const SimConfig& config, const Grid& grid) {
    return static_cast<double>(cell_count(grid)) * components_of(grid) * static_cast<double>(config.steps()) *
           static_cast<double>(config.realizations);
}

RunManifest run_plan(const ExperimentPlan& plan, const RunOptions& options) {
    plan.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = plan.output_dir / plan.name;
    const fs::path manifest_path = dir / "manifest.json";
    if (!options.force && fs::exists(manifest_path))
        throw IoError("'" + manifest_path.string() + "' exists; pass --force to overwrite");

    RunManifest m;
    m.plan = plan.name;
    m.plan_hash = plan_hash(plan);
    m.seed = plan.seed;
    std::vector<SweepRow> rows;
    for (const auto& v : plan.variants) {
        VariantRecord rec{v.name, v.config.seed, format_config(v.config), "", "ok"};
        const Grid grid = build_grid(v.config);
        const auto report = validate_stability(v.config, grid);
        if (!report.ok) {
            const auto why = fmt::format("unstable: dt={} exceeds dt_max={}", report.dt, report.dt_max);
            if (options.log) *options.log << "[" << plan.name << "] " << v.name << ": " << why << "\n";
            if (!options.force) {
                rec.status = why;
                m.variants.push_back(rec);
                continue;
            }
        }
        const auto forcing = build_forcing(v.config.forcing_spec(), grid);
        std::vector<DiagnosticsSeries> series;
        try {
            series = run_ensemble(v.config, grid, forcing, options.workers);
        } catch (const NumericError& e) {
            if (report.ok) throw;
            rec.status = std::string("diverged: ") + e.what();
            if (options.log) *options.log << "[" << plan.name << "] " << v.name << ": " << rec.status << "\n";
            m.variants.push_back(rec);
            continue;
        }
        const auto stats = accumulate_ensemble(series);
        rec.file = v.name + ".csv";
        write_file_atomic(dir / rec.file, series_csv(stats, v));
        m.files.push_back(rec.file);
        rows.push_back(make_sweep_row(stats, v.config.nu, v.config.delta, forcing_label(v.config)));
        if (options.log)
            *options.log << "[" << plan.name << "] " << v.name << ": " << cell_count(grid) << " cells, "
                         << v.config.realizations << " realizations, cum_diss="
                         << rows.back().time_integrated_diss << "\n";
        m.variants.push_back(rec);
    }
    write_file_atomic(dir / "sweep.csv", sweep_csv(rows));
    m.files.push_back("sweep.csv");
    m.files.push_back("manifest.json");
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file_atomic(manifest_path, manifest_json(m));
    return m;
}

FitReport fit_report(const std::vector<SweepRow>& rows) {
    std::map<std::pair<double, std::string>, std::vector<SweepRow>> groups;
    for (const auto& r : rows) groups[{r.delta, r.mode}].push_back(r);
    FitReport rep;
    for (auto& [key, g] : groups) {
        std::set<double> nus;
        for (const auto& r : g) nus.insert(r.nu);
        if (nus.size() < 3) continue;
        std::sort(g.begin(), g.end(), [](const SweepRow& a, const SweepRow& b) { return a.nu > b.nu; });
        std::vector<std::pair<double, double>> diss, wall;
        for (const auto& r : g) {
            diss.emplace_back(r.nu, r.time_integrated_diss);
            wall.emplace_back(r.nu, r.final_wall_ke);
        }
        FitGroup fg;
        fg.delta = key.first;
        fg.mode = key.second;
        fg.points = g.size();
        fg.dissipation = fit_scaling_exponent(diss);
        fg.wall_energy = fit_scaling_exponent(wall);
        fg.envelope = -key.first / 2.0;
        fg.weak_monotone = true;
        for (std::size_t i = 1; i < g.size(); ++i)
            if (!(g[i].weak_diss < g[i - 1].weak_diss)) fg.weak_monotone = false;
        fg.weak_ratio = g.front().weak_diss != 0.0 ? g.back().weak_diss / g.front().weak_diss : 0.0;
        rep.groups.push_back(fg);
    }
    if (rep.groups.empty()) throw DomainError("fit_report: no (delta, mode) group with at least 3 nu values");
    return rep;
}

std::string FitReport::text() const {
    std::string s;
    for (const auto& g : groups) {
        s += fmt::format("delta={} mode={} points={}\n", g.delta, g.mode, g.points);
        s += fmt::format("  dissipation slope  {:.3f}  (r2 {:.3f})\n", g.dissipation.slope, g.dissipation.r2);
        s += fmt::format("  wall energy slope  {:.3f}  (r2 {:.3f}, envelope {:.3f})\n", g.wall_energy.slope,
                         g.wall_energy.r2, g.envelope);
        s += fmt::format("  weak dissipation   {}  (smallest/largest nu ratio {:.3f})\n",
                         g.weak_monotone ? "decreasing" : "not monotone", g.weak_ratio);
    }
    return s;
}

}  // namespace adsim
