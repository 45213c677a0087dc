#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sphparvi/diagnostics.hpp"
#include "sphparvi/sampler.hpp"

namespace sphparvi {

/// 17 significant digits, as "%.17g"; enough to round-trip any double.
std::string format_double(double x);

/// Header dim0,...,dim{d-1}, then one row per particle.
std::string positions_csv(const Matrix& positions);

/// iter,avg_density,kinetic_energy; one row per completed iteration.
std::string trace_csv(const RunReport& report);

nlohmann::json diagnostics_json(const Diagnostics& diag);

/// Everything in summary.json: status, config, diagnostics, traces_meta and
/// timing. Wall-clock numbers are kept out so the file is reproducible; they
/// live in timing.json.
nlohmann::json summary_json(const RunReport& report, const TargetModel& target);

nlohmann::json timing_json(const RunReport& report);

/// Writes particles_final.csv, particles_best.csv, trace.csv, summary.json,
/// timing.json and snapshots/snapshot_<iter>.csv under out_dir.
void write_bundle(const RunReport& report, const std::filesystem::path& out_dir);

}  // namespace sphparvi
