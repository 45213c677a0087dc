#include "sphparvi/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "sphparvi/config.hpp"
#include "sphparvi/parallel.hpp"

namespace sphparvi {

using nlohmann::json;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec_json(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(finite_or_null(x));
    return a;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string positions_csv(const Matrix& positions) {
    std::string out;
    for (std::size_t k = 0; k < positions.cols(); ++k) {
        if (k) out += ',';
        out += "dim" + std::to_string(k);
    }
    out += '\n';
    for (std::size_t i = 0; i < positions.rows(); ++i) {
        for (std::size_t k = 0; k < positions.cols(); ++k) {
            if (k) out += ',';
            out += format_double(positions(i, k));
        }
        out += '\n';
    }
    return out;
}

std::string trace_csv(const RunReport& report) {
    std::string out = "iter,avg_density,kinetic_energy\n";
    for (std::size_t t = 0; t < report.avg_density_trace.size(); ++t) {
        out += std::to_string(t);
        out += ',';
        out += format_double(report.avg_density_trace[t]);
        out += ',';
        out += format_double(report.kinetic_energy_trace[t]);
        out += '\n';
    }
    return out;
}

json diagnostics_json(const Diagnostics& diag) {
    json hists = json::array();
    for (const auto& h : diag.per_dim_hist) hists.push_back({{"edges", vec_json(h.edges)}, {"masses", vec_json(h.masses)}});
    json kdes = json::array();
    for (const auto& [grid, dens] : diag.per_dim_kde) kdes.push_back({{"grid", vec_json(grid)}, {"density", vec_json(dens)}});
    json out = {
        {"mean", vec_json(diag.moments.mean)},
        {"cov_diag", vec_json(diag.moments.var)},
        {"variance_defined", diag.moments.variance_defined},
        {"histograms", hists},
        {"kde", kdes},
        {"w1_per_dim", diag.w1 ? vec_json(*diag.w1) : json(nullptr)},
        {"mode_occupancy", diag.occupancy ? vec_json(*diag.occupancy) : json(nullptr)},
    };
    return out;
}

json summary_json(const RunReport& report, const TargetModel& target) {
    const RunConfig& cfg = report.config;
    json diagnostics = json::object();
    if (report.best_positions.rows() > 0)
        diagnostics["best"] = diagnostics_json(summarize(report.best_positions, target, cfg.hist_bins, cfg.kde_points));
    diagnostics["final"] = diagnostics_json(summarize(report.final_positions, target, cfg.hist_bins, cfg.kde_points));
    diagnostics["initial"] = diagnostics_json(summarize(report.initial_positions, target, cfg.hist_bins, cfg.kde_points));

    json snaps = json::array();
    for (const auto& s : report.snapshots) snaps.push_back(s.first);
    const auto& rho = report.avg_density_trace;
    const auto& ke = report.kinetic_energy_trace;
    const auto& dt = report.dt_trace;
    json meta = {
        {"file", "trace.csv"},
        {"columns", {"iter", "avg_density", "kinetic_energy"}},
        {"iterations", report.completed_iterations()},
        {"best_iteration", report.best_iteration},
        {"best_avg_density", rho.empty() ? json(nullptr) : finite_or_null(*std::max_element(rho.begin(), rho.end()))},
        {"final_avg_density", rho.empty() ? json(nullptr) : finite_or_null(rho.back())},
        {"final_kinetic_energy", ke.empty() ? json(nullptr) : finite_or_null(ke.back())},
        {"dt_min", dt.empty() ? json(nullptr) : finite_or_null(*std::min_element(dt.begin(), dt.end()))},
        {"dt_max", dt.empty() ? json(nullptr) : finite_or_null(*std::max_element(dt.begin(), dt.end()))},
        {"snapshot_stride", cfg.snapshot_stride},
        {"snapshots", snaps},
    };

    return {
        {"status", report.failed ? "failed" : "ok"},
        {"abort_iteration", report.failed ? json(report.abort_iteration) : json(nullptr)},
        {"message", report.message},
        {"config", config_to_json(cfg)},
        {"target", target.description},
        {"diagnostics", diagnostics},
        {"traces_meta", meta},
        {"timing", {{"file", "timing.json"}, {"threads", thread_count()}}},
    };
}

json timing_json(const RunReport& report) {
    const int n = report.completed_iterations();
    const PhaseTimes& t = report.timing;
    return {
        {"cache_and_density_s", t.cache_and_density},
        {"forces_s", t.forces},
        {"integrate_s", t.integrate},
        {"total_s", t.total},
        {"per_iteration_s", n > 0 ? t.total / n : 0.0},
        {"threads", thread_count()},
    };
}

void write_bundle(const RunReport& report, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const TargetModel target = make_target(report.config.target);
    write_file(out_dir / "particles_final.csv", positions_csv(report.final_positions));
    write_file(out_dir / "particles_best.csv",
               positions_csv(report.best_positions.rows() ? report.best_positions : report.initial_positions));
    write_file(out_dir / "trace.csv", trace_csv(report));
    write_file(out_dir / "summary.json", summary_json(report, target).dump(2) + "\n");
    write_file(out_dir / "timing.json", timing_json(report).dump(2) + "\n");
    if (!report.snapshots.empty()) {
        fs::create_directories(out_dir / "snapshots");
        for (const auto& [iter, pos] : report.snapshots)
            write_file(out_dir / "snapshots" / ("snapshot_" + std::to_string(iter) + ".csv"), positions_csv(pos));
    }
}

}  // namespace sphparvi
