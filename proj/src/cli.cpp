#include "sphparvi/cli.hpp"

#include <cstdlib>
#include <string>

#include "sphparvi/config.hpp"
#include "sphparvi/output.hpp"
#include "sphparvi/parallel.hpp"

namespace sphparvi {

int apply_thread_env() {
    const char* raw = std::getenv("SPH_PARVI_THREADS");
    int n = 1;
    if (raw && *raw) {
        std::size_t used = 0;
        try {
            n = std::stoi(raw, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != std::string(raw).size() || n < 1)
            throw ConfigError(std::string("SPH_PARVI_THREADS must be a positive integer, got '") + raw + "'");
    }
    set_thread_count(n);
    return n;
}

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        apply_thread_env();
        cfg = parse_config(config_path, overrides);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    RunReport report;
    try {
        report = run(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const CapabilityError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        write_bundle(report, out_dir);
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << '\n';
        return kExitFailure;
    }

    if (report.failed) {
        err << "run failed: " << report.message << '\n';
        return kExitNumeric;
    }
    out << "completed " << report.completed_iterations() << " iterations; best iteration " << report.best_iteration
        << "; wrote " << out_dir.string() << '\n';
    return kExitOk;
}

int cmd_validate(const std::filesystem::path& config_path, const std::vector<std::string>& overrides,
                 std::ostream& out, std::ostream& err) {
    try {
        const RunConfig cfg = parse_config(config_path, overrides);
        const TargetModel target = make_target(cfg.target);
        if (cfg.mode == SamplingMode::ExternalPressure && !target.has_density())
            throw ConfigError("mode external_pressure needs a target with a log-density");
        out << "ok: " << to_string(cfg.mode) << ", M=" << cfg.M << ", d=" << cfg.d << ", T=" << cfg.T << ", target "
            << target.description << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
}

int cmd_selftest(std::ostream& out) {
    int failed = 0;
    for (const auto& r : run_selftest()) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        if (!r.passed) ++failed;
    }
    out << (failed ? std::to_string(failed) + " check(s) failed" : std::string("all checks passed")) << '\n';
    return failed ? kExitFailure : kExitOk;
}

}  // namespace sphparvi
