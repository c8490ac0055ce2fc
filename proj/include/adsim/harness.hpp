#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsim/diagnostics.hpp"
#include "adsim/error.hpp"
#include "adsim/solver.hpp"

namespace adsim {

inline constexpr const char* kVersion = "adsim 1.0.0";

/// Parses flat `key = value` text. Blank lines and `#` comments are ignored;
/// missing keys keep their defaults, unknown or repeated keys are errors.
SimConfig parse_config(std::istream& in);
SimConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(format_config(c)) reproduces c exactly.
std::string format_config(const SimConfig& config);

/// "stochastic", "deterministic", "mixed" or "off".
std::string forcing_label(const SimConfig& config);

struct Variant {
    std::string name;
    SimConfig config;
};

struct ExperimentPlan {
    std::string name;
    std::vector<Variant> variants;
    std::filesystem::path output_dir = "results";
    std::uint64_t seed = 20240101;

    /// Same geometry across variants, unique names, every config valid.
    void validate() const;
};

/// Canned experiments: halfspace-stochastic, halfspace-deterministic,
/// halfspace-delta-sweep, sphere-stochastic.
std::vector<ExperimentPlan> make_canned_plans(std::size_t realizations = 250);
ExperimentPlan find_canned_plan(const std::string& name, std::size_t realizations = 250);

/// Variant configs carry their own seeds: plan seed + variant index.
ExperimentPlan with_variant_seeds(ExperimentPlan plan);

struct VariantRecord {
    std::string name;
    std::uint64_t seed = 0;
    std::string config;  ///< format_config text
    std::string file;    ///< relative to the plan directory; empty if aborted
    std::string status;  ///< "ok" or the abort reason
};

struct RunManifest {
    std::string plan;
    std::string plan_hash;  ///< FNV-1a over the variant configs
    std::string version = kVersion;
    std::uint64_t seed = 0;
    double wall_clock_seconds = 0.0;
    std::vector<VariantRecord> variants;
    std::vector<std::string> files;

    bool all_ok() const;
    /// Exit code a CLI should report: 2 if any variant hit a stability abort.
    ExitCode exit_code() const;
};

std::string plan_hash(const ExperimentPlan& plan);

struct RunOptions {
    unsigned workers = 1;
    bool force = false;             ///< overwrite an existing manifest and run unstable variants
    std::ostream* log = nullptr;    ///< progress lines, optional
};

/// Runs variants in order and writes <output_dir>/<plan>/{<variant>.csv,
/// sweep.csv, manifest.json}. Each file is written to a temporary name and
/// renamed into place. A variant that fails the stability check is skipped and
/// recorded unless options.force is set; a forced variant that blows up is
/// recorded as diverged.
RunManifest run_plan(const ExperimentPlan& plan, const RunOptions& options = {});

std::string manifest_json(const RunManifest& manifest);
/// Rebuilds the plan recorded in a manifest; output goes next to the manifest
/// unless the caller changes output_dir.
ExperimentPlan plan_from_manifest(const std::filesystem::path& path);

std::string series_csv(const EnsembleStats& stats, const Variant& variant);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(std::istream& in);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);
/// Lines of a CSV document that are not `#` metadata.
std::string csv_body(const std::string& text);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct FitGroup {
    double delta = 0.0;
    std::string mode;
    std::size_t points = 0;
    PowerLawFit dissipation;  ///< time-integrated dissipation vs nu
    PowerLawFit wall_energy;  ///< final wall energy vs nu
    double envelope = 0.0;    ///< -delta/2
    bool weak_monotone = false;  ///< weak_diss decreases with nu
    double weak_ratio = 0.0;     ///< weak_diss at smallest nu / at largest nu
};

struct FitReport {
    std::vector<FitGroup> groups;
    std::string text() const;
};

/// Groups rows by (delta, mode) and fits every group with at least 3 distinct
/// nu values. Throws DomainError if no group qualifies.
FitReport fit_report(const std::vector<SweepRow>& rows);

/// Rough cost of a run in cell-steps (cells * components * steps * realizations).
double cost_estimate(const SimConfig& config, const Grid& grid);

}  // namespace adsim
