// synclab command line: validate scenario files, run simulations, sweep
// parameters. Outputs per run: run.csv, metrics.json, pe_report.csv, plot.gp.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synclab/synclab.hpp"

namespace fs = std::filesystem;
using namespace synclab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitGate = 4;

std::string default_out_dir() {
    if (const char* env = std::getenv("SYNCLAB_OUT")) return env;
    return "out";
}

json load_document(const std::string& file, bool reference,
                   const std::vector<std::string>& overrides) {
    json doc = reference ? json::parse(reference_scenario_json())
                         : parse_scenario_file(file);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw SchemaError("--set expects key=value, got '" + kv + "'");
        apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return doc;
}

struct RunArtifacts {
    ConvergenceMetrics metrics;
    json metrics_json;
};

/// Run one scenario and write run.csv / metrics.json / pe_report.csv / plot.gp.
RunArtifacts run_and_write(const SimConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const SimLog log = run(cfg);

    write_csv(log, (out_dir / "run.csv").string());
    write_plot_script(cfg, log, (out_dir / "plot.gp").string(), "run.csv");

    ConvergenceMetrics mx = convergence_metrics(log, 0.1);
    json metrics = metrics_to_json(cfg, log, mx);

    // PE report: Gram of phi^T(v(t)) over one estimated limit-cycle period,
    // windows starting at 10 s.
    try {
        std::vector<double> v1(log.t.size());
        for (int k = 0; k < log.samples(); ++k) v1[static_cast<std::size_t>(k)] =
            log.state(k, log.layout.v() + 0);
        const double period = estimate_period(log.t, v1, log.t.back() / 2.0);
        std::vector<Eigen::MatrixXd> f(log.t.size());
        for (int k = 0; k < log.samples(); ++k)
            f[static_cast<std::size_t>(k)] = eval_phi(cfg.leader, log.v_at(k)).transpose();
        const PEReport pe = pe_measure(log.t, f, period, 10.0);
        write_pe_report_csv(pe, (out_dir / "pe_report.csv").string());
        metrics["pe"] = {{"estimated_period", period},
                         {"window", pe.window},
                         {"start", pe.start},
                         {"min_gram_eigenvalue", pe.min_gram_eigenvalue},
                         {"windows", pe.window_starts.size()}};
    } catch (const InsufficientSamples& err) {
        std::ofstream((out_dir / "pe_report.csv").string())
            << "window_start,min_eigenvalue\n";
        metrics["pe"] = {{"note", std::string("not measured: ") + err.what()}};
    }

    // Observer Lyapunov diagnostic with the kappa_hat(t_end) proxy; reported
    // as a diagnostic, never as a certificate.
    {
        const int n = log.layout.n_followers;
        Eigen::VectorXd kappa_bar(n);
        for (int i = 0; i < n; ++i) kappa_bar(i) = log.kappa_at(log.samples() - 1, i);
        const auto v_series =
            observer_lyapunov(log, h_matrix(cfg.graph), cfg.observer.mu, kappa_bar);
        double max_inc = 0.0;
        const double t_transient = std::min(10.0, log.t.back() / 2.0);
        for (std::size_t k = 1; k < v_series.size(); ++k)
            if (log.t[k] >= t_transient)
                max_inc = std::max(max_inc, v_series[k] - v_series[k - 1]);
        metrics["observer_lyapunov"] = {
            {"kappa_bar", "kappa_hat(t_end) proxy; diagnostic, not a certificate"},
            {"max_increment_after_transient", max_inc},
            {"final", v_series.back()}};
    }

    std::ofstream mout((out_dir / "metrics.json").string());
    mout << metrics.dump(2) << "\n";
    return RunArtifacts{std::move(mx), std::move(metrics)};
}

/// --check gates: the run-mode subset of the acceptance thresholds.
int check_gates(const SimConfig& cfg, const RunArtifacts& art) {
    bool ok = true;
    const auto gate = [&](const std::string& name, bool pass, double value,
                          double threshold) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << value
                  << (pass ? " <= " : " > ") << threshold << "\n";
        ok = ok && pass;
    };
    if (!art.metrics_json["kappa"]["nondecreasing"].get<bool>()) {
        std::cout << "[FAIL] kappa_hat nondecreasing\n";
        ok = false;
    }
    if (cfg.has_arms()) {
        const double e = art.metrics.max_e.maxCoeff();
        const double ed = art.metrics.max_edot.maxCoeff();
        double tv = 0.0;
        for (const auto& x : art.metrics_json["kappa"]["total_variation_final_10s"])
            tv = std::max(tv, x.get<double>());
        gate("trailing max |e_i|", e <= 1e-2, e, 1e-2);
        gate("trailing max |edot_i|", ed <= 5e-2, ed, 5e-2);
        gate("kappa total variation, final 10 s", tv <= 1e-3, tv, 1e-3);
    } else {
        const double v = art.metrics.max_v_err.maxCoeff();
        gate("trailing max |vhat_i - v|", v <= 1e-2, v, 1e-2);
    }
    return ok ? kExitOk : kExitGate;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == '.' || c == '/' || c == '\\') c = '_';
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learning-based distributed observer / Euler-Lagrange synchronization lab"};
    app.require_subcommand(1);

    // validate
    std::string validate_file;
    auto* cmd_validate = app.add_subcommand("validate", "validate a scenario file");
    cmd_validate->add_option("file", validate_file, "scenario JSON file")->required();

    // run
    std::string run_file;
    bool run_reference = false;
    bool observer_only = false;
    bool check = false;
    std::string out_dir = default_out_dir();
    std::vector<std::string> overrides;
    auto* cmd_run = app.add_subcommand("run", "run a scenario");
    cmd_run->add_option("file", run_file, "scenario JSON file");
    cmd_run->add_flag("--reference", run_reference, "run the built-in reference scenario");
    cmd_run->add_flag("--observer-only", observer_only, "integrate only leader + observers");
    cmd_run->add_flag("--check", check, "apply the run-mode acceptance gates");
    cmd_run->add_option("--out", out_dir, "output directory (default $SYNCLAB_OUT or ./out)");
    cmd_run->add_option("--set", overrides, "override a config field, e.g. sim.dt=0.002");

    // sweep
    std::string sweep_file;
    bool sweep_reference = false;
    std::string sweep_param;
    std::string sweep_values;
    std::string sweep_out = default_out_dir();
    auto* cmd_sweep = app.add_subcommand("sweep", "run a scenario for several parameter values");
    cmd_sweep->add_option("file", sweep_file, "scenario JSON file");
    cmd_sweep->add_flag("--reference", sweep_reference, "sweep the built-in reference scenario");
    cmd_sweep->add_option("--param", sweep_param, "dotted config path, e.g. observer.mu")
        ->required();
    cmd_sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    cmd_sweep->add_option("--out", sweep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_validate->parsed()) {
            scenario_from_json(parse_scenario_file(validate_file));
            std::cout << "OK\n";
            return kExitOk;
        }

        if (cmd_run->parsed()) {
            if (run_reference == !run_file.empty()) {
                std::cerr << "run: give a scenario file or --reference (not both)\n";
                return kExitConfig;
            }
            json doc = load_document(run_file, run_reference, overrides);
            SimConfig cfg = scenario_from_json(doc);
            if (run_reference && cfg.sim.dt > 0.01)
                throw SchemaError("the reference scenario requires dt <= 0.01");
            cfg.observer_only = cfg.observer_only || observer_only;
            try {
                RunArtifacts art = run_and_write(cfg, out_dir);
                std::cout << "wrote " << (fs::path(out_dir) / "run.csv").string()
                          << " (" << art.metrics_json["run"]["samples"] << " samples)\n";
                if (check) return check_gates(cfg, art);
                return kExitOk;
            } catch (const NonFiniteState& err) {
                std::cerr << "numerical failure: " << err.what() << "\n";
                return kExitNumerical;
            } catch (const NonFiniteDerivative& err) {
                std::cerr << "numerical failure: " << err.what() << "\n";
                return kExitNumerical;
            }
        }

        if (cmd_sweep->parsed()) {
            if (sweep_reference == !sweep_file.empty()) {
                std::cerr << "sweep: give a scenario file or --reference (not both)\n";
                return kExitConfig;
            }
            const json base = load_document(sweep_file, sweep_reference, {});
            std::vector<std::string> values;
            std::stringstream ss(sweep_values);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) values.push_back(item);

            struct SweepRow {
                std::string value;
                std::string status;
                json metrics;
            };
            std::vector<std::future<SweepRow>> futures;
            for (const auto& value : values) {
                futures.push_back(std::async(std::launch::async, [&, value]() {
                    SweepRow row{value, "ok", {}};
                    try {
                        json doc = base;
                        apply_override(doc, sweep_param, value);
                        SimConfig cfg = scenario_from_json(doc);
                        const fs::path dir = fs::path(sweep_out) /
                                             (sanitize(sweep_param) + "_" + sanitize(value));
                        row.metrics = run_and_write(cfg, dir).metrics_json;
                    } catch (const Error& err) {
                        row.status = err.what();
                    }
                    return row;
                }));
            }

            fs::create_directories(sweep_out);
            std::ofstream summary(fs::path(sweep_out) / "sweep_summary.csv");
            summary << sweep_param << ",status,max_v_err,max_omega_err,max_e,max_edot\n";
            bool all_ok = true;
            for (auto& f : futures) {
                const SweepRow row = f.get();
                const bool ok = row.status == "ok";
                all_ok = all_ok && ok;
                const auto field = [&](const char* key) {
                    if (!ok || !row.metrics["trailing_window"].contains(key)) return std::string();
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.9g",
                                  row.metrics["trailing_window"][key].get<double>());
                    return std::string(buf);
                };
                summary << row.value << "," << (ok ? "ok" : "\"" + row.status + "\"") << ","
                        << field("max_v_err") << "," << field("max_omega_err") << ","
                        << field("max_e") << "," << field("max_edot") << "\n";
                std::cout << sweep_param << "=" << row.value << ": " << row.status << "\n";
            }
            return all_ok ? kExitOk : kExitNumerical;
        }
    } catch (const InvalidTopology& err) {
        std::cerr << "invalid topology: " << err.what() << "\n";
        return kExitConfig;
    } catch (const SchemaError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const IOError& err) {
        std::cerr << "io error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
