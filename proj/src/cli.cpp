#include "endscope/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "endscope/analysis.hpp"
#include "endscope/config.hpp"
#include "endscope/errors.hpp"
#include "endscope/report.hpp"

namespace endscope {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config;
    std::string out_dir;
    double tol = 0.0;  // 0: not given
    int jobs = 1;
    bool strict = false;
};

// --tol only ever tightens the configured tolerances.
QuadratureConfig effective_quadrature(const QuadratureConfig& base, double tol) {
    QuadratureConfig q = base;
    if (tol > 0.0) {
        q.rel_tol = std::min(q.rel_tol, tol);
        q.abs_tol = std::min(q.abs_tol, tol);
    }
    return q;
}

// Creates the output directory and proves it writable before any work.
std::string prepare_output_dir(const RunConfig& config, const CommonOptions& opts) {
    const std::string dir = opts.out_dir.empty() ? config.output.dir : opts.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw ConfigError("output directory '" + dir + "' cannot be created");
    const fs::path probe = fs::path(dir) / ".endscope_write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw ConfigError("output directory '" + dir + "' is not writable");
    }
    fs::remove(probe, ec);
    return dir;
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

template <typename Fn>
int guarded_command(std::ostream& err, Fn&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed report: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

int cmd_analyze(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
    const RunConfig config = load_config(opts.config);
    if (config.ends.empty()) throw ConfigError("no ends defined");
    if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
    const std::string dir = prepare_output_dir(config, opts);
    const QuadratureConfig cfg = effective_quadrature(config.quadrature, opts.tol);

    std::vector<EndAnalysis> results(config.ends.size());
    std::vector<std::exception_ptr> errors(config.ends.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < config.ends.size(); i = next++) {
            try {
                results[i] = analyze_end(config.ends[i], config, cfg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n_threads = std::min<int>(opts.jobs, static_cast<int>(config.ends.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    const std::string path = join(dir, config.output.report);
    write_atomic(path, dump(make_report(config_hash(config), results, nullptr, nullptr)));

    bool violation = false;
    bool inconclusive_seen = false;
    for (const EndAnalysis& a : results) {
        const EndSignature& s = a.signature;
        out << fmt::format("{}: volume {}, {}, theorem1 {}, theoremB {}", a.name, verdict_label(s.volume),
                           to_string(s.parabolicity.verdict), to_string(a.flags.theorem1.flag),
                           to_string(a.flags.theoremB.flag));
        if (a.flags.openQ1.hit || a.flags.openQ2.hit) out << ", open-question candidate";
        out << "\n";
        for (const AnalysisError& e : a.errors) err << fmt::format("{}: {} failed: {}\n", a.name, e.analysis, e.message);
        violation = violation || a.has_violation();
        inconclusive_seen = inconclusive_seen || a.has_inconclusive();
    }
    out << "report written to " << path << "\n";
    if (violation) {
        err << "consistency check failed\n";
        return kExitViolation;
    }
    if (inconclusive_seen) {
        if (opts.strict || !config.inconclusive_as_warning) {
            err << "inconclusive verdicts present\n";
            return kExitInconclusive;
        }
        err << "warning: inconclusive verdicts present\n";
    }
    return kExitOk;
}

int cmd_sweep(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
    const RunConfig config = load_config(opts.config);
    if (!config.sweep) throw ConfigError("no sweep defined");
    if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
    const std::string dir = prepare_output_dir(config, opts);
    const QuadratureConfig cfg = effective_quadrature(config.quadrature, opts.tol);

    const PhaseTable table = sweep_power_family(*config.sweep, cfg, opts.jobs);
    write_atomic(join(dir, config.output.phase_csv), phase_csv(table));
    write_atomic(join(dir, config.output.phase_json),
                 dump(make_report(config_hash(config), {}, &table, &*config.sweep)));
    out << fmt::format("cells {}, agreements {}, disagreements {}, excluded {}, inconclusive {}, theorem failures {}\n",
                       table.cells.size(), table.agreements, table.disagreements, table.excluded,
                       table.inconclusive, table.theorem_failures);
    for (const PhaseCell& c : table.cells) {
        if (c.agreement == Agreement::Disagree) {
            err << fmt::format("disagreement at m={} alpha={} p={}: analytic {} numeric {} ({})\n", c.m, c.alpha,
                               c.p, c.analytic_verdict, c.numeric_verdict, c.notes);
        }
    }
    if (table.disagreements > 0 || table.theorem_failures > 0) return kExitViolation;
    if (table.inconclusive > 0 && opts.strict) return kExitInconclusive;
    return kExitOk;
}

int cmd_verify(const std::vector<int>& ms, double tol, std::ostream& out, std::ostream& err) {
    const QuadratureConfig cfg = effective_quadrature(QuadratureConfig{}, tol);
    int failed = 0;
    for (int m : ms) {
        if (m < 3 || m > 64) throw ConfigError("verify-examples needs m in [3, 64]");
        for (const ExampleCheck& c : verify_examples(m, cfg)) {
            out << fmt::format("{} m={} {}: {} ({})\n", c.passed ? "PASS" : "FAIL", m, c.example, c.assertion,
                               c.detail);
            if (!c.passed) {
                ++failed;
                err << fmt::format("failed: m={} {}: {}\n", m, c.example, c.assertion);
            }
        }
    }
    return failed == 0 ? kExitOk : kExitViolation;
}

int cmd_plotdata(const std::string& report_path, const std::string& what, const std::string& out_dir,
                 std::ostream& out) {
    std::ifstream in(report_path);
    if (!in) throw ConfigError("cannot read report '" + report_path + "'");
    const nlohmann::json report = nlohmann::json::parse(in);
    const auto files = plot_files(report, what);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    for (const auto& [name, content] : files) {
        const std::string path = join(out_dir, name);
        write_atomic(path, content);
        out << "wrote " << path << "\n";
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"endscope: parabolicity, volume and mean-curvature integrability of rotationally symmetric ends", "endscope"};
    app.require_subcommand(1);

    CommonOptions analyze_opts;
    CLI::App* analyze = app.add_subcommand("analyze", "Analyse every end in a config and write a JSON report");
    CommonOptions sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "Sweep the power family and write the phase table");
    for (auto [cmd, opts] : {std::pair{analyze, &analyze_opts}, std::pair{sweep, &sweep_opts}}) {
        cmd->add_option("--config", opts->config, "Config file (YAML)")->required();
        cmd->add_option("--out", opts->out_dir, "Output directory (overrides output.dir)");
        cmd->add_option("--tol", opts->tol, "Tolerance cap; only tightens the configured tolerances")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--jobs", opts->jobs, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--strict", opts->strict, "Treat Inconclusive verdicts as failures");
    }

    std::vector<int> verify_ms{3, 4};
    double verify_tol = 0.0;
    CLI::App* verify = app.add_subcommand("verify-examples", "Check the three worked examples");
    verify->add_option("--m", verify_ms, "Dimensions to check");
    verify->add_option("--tol", verify_tol, "Tolerance cap; only tightens")->check(CLI::PositiveNumber);

    std::string plot_report;
    std::string plot_what;
    std::string plot_out = ".";
    CLI::App* plot = app.add_subcommand("plotdata", "Emit plot-ready text files from a report");
    plot->add_option("report", plot_report, "Report JSON")->required();
    plot->add_option("what", plot_what, "harmonic_profiles | V_of_s | h_trace | phase")->required();
    plot->add_option("--out", plot_out, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitConfigError;
    }

    if (analyze->parsed()) return guarded_command(err, [&] { return cmd_analyze(analyze_opts, out, err); });
    if (sweep->parsed()) return guarded_command(err, [&] { return cmd_sweep(sweep_opts, out, err); });
    if (verify->parsed()) return guarded_command(err, [&] { return cmd_verify(verify_ms, verify_tol, out, err); });
    return guarded_command(err, [&] { return cmd_plotdata(plot_report, plot_what, plot_out, out); });
}

}  // namespace endscope
