#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "synclab/analysis.hpp"
#include "synclab/errors.hpp"
#include "synclab/sim.hpp"

namespace synclab {

namespace detail {

inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

/// CSV column names, in the on-disk order: t, v, then per follower
/// vhat / omegahat / kappa (and q, qd, thetahat, tau, e, s when arms run).
inline std::vector<std::string> csv_header(const StateLayout& lay) {
    std::vector<std::string> cols;
    cols.emplace_back("t");
    for (int c = 0; c < lay.m; ++c) cols.push_back("v" + std::to_string(c));
    for (int i = 1; i <= lay.n_followers; ++i) {
        const std::string node = std::to_string(i);
        for (int c = 0; c < lay.m; ++c)
            cols.push_back("vhat" + node + "_" + std::to_string(c));
        for (int c = 0; c < lay.l; ++c)
            cols.push_back("omegahat" + node + "_" + std::to_string(c));
        cols.push_back("kappa" + node);
        if (lay.arms) {
            for (int c = 0; c < 2; ++c) cols.push_back("q" + node + "_" + std::to_string(c));
            for (int c = 0; c < 2; ++c) cols.push_back("qd" + node + "_" + std::to_string(c));
            for (int c = 0; c < 5; ++c)
                cols.push_back("thetahat" + node + "_" + std::to_string(c));
            for (int c = 0; c < 2; ++c) cols.push_back("tau" + node + "_" + std::to_string(c));
            for (int c = 0; c < 2; ++c) cols.push_back("e" + node + "_" + std::to_string(c));
            for (int c = 0; c < 2; ++c) cols.push_back("s" + node + "_" + std::to_string(c));
        }
    }
    return cols;
}

/// Write the run log; floating point serialized with 17 significant digits.
inline void write_csv(const SimLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot open '" + path + "' for writing");
    const StateLayout& lay = log.layout;

    const auto header = csv_header(lay);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << "\n";

    std::string line;
    for (int k = 0; k < log.samples(); ++k) {
        line.clear();
        line += detail::fmt17(log.t[static_cast<std::size_t>(k)]);
        for (int c = 0; c < lay.m; ++c)
            line += "," + detail::fmt17(log.state(k, lay.v() + c));
        for (int i = 0; i < lay.n_followers; ++i) {
            for (int c = 0; c < lay.m; ++c)
                line += "," + detail::fmt17(log.state(k, lay.v_hat(i) + c));
            for (int c = 0; c < lay.l; ++c)
                line += "," + detail::fmt17(log.state(k, lay.omega_hat(i) + c));
            line += "," + detail::fmt17(log.state(k, lay.kappa(i)));
            if (lay.arms) {
                for (int c = 0; c < 2; ++c)
                    line += "," + detail::fmt17(log.state(k, lay.q(i) + c));
                for (int c = 0; c < 2; ++c)
                    line += "," + detail::fmt17(log.state(k, lay.qd(i) + c));
                for (int c = 0; c < 5; ++c)
                    line += "," + detail::fmt17(log.state(k, lay.theta_hat(i) + c));
                for (int c = 0; c < 2; ++c)
                    line += "," + detail::fmt17(log.tau(k, 2 * i + c));
                for (int c = 0; c < 2; ++c)
                    line += "," + detail::fmt17(log.e(k, 2 * i + c));
                for (int c = 0; c < 2; ++c)
                    line += "," + detail::fmt17(log.s(k, 2 * i + c));
            }
        }
        out << line << "\n";
    }
}

inline void write_pe_report_csv(const PEReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot open '" + path + "' for writing");
    out << "window_start,min_eigenvalue\n";
    for (std::size_t k = 0; k < report.window_starts.size(); ++k)
        out << detail::fmt17(report.window_starts[k]) << ","
            << detail::fmt17(report.min_eigenvalues[k]) << "\n";
}

inline nlohmann::json metrics_to_json(const SimConfig& cfg, const SimLog& log,
                                      const ConvergenceMetrics& mx) {
    nlohmann::json j;
    j["run"] = {{"mode", log.layout.arms ? "full" : "observer_only"},
                {"followers", log.layout.n_followers},
                {"dt", cfg.sim.dt},
                {"t_end", cfg.sim.t_end},
                {"samples", log.samples()}};

    const auto to_vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    nlohmann::json w;
    w["start_time"] = mx.window_start;
    w["max_v_err_per_node"] = to_vec(mx.max_v_err);
    w["max_v_err"] = mx.max_v_err.size() ? mx.max_v_err.maxCoeff() : 0.0;
    w["max_omega_err_per_node"] = to_vec(mx.max_omega_err);
    w["max_omega_err"] = mx.max_omega_err.size() ? mx.max_omega_err.maxCoeff() : 0.0;
    w["kappa_tv_per_node"] = to_vec(mx.kappa_tv);
    if (log.layout.arms) {
        w["max_e_per_node"] = to_vec(mx.max_e);
        w["max_e"] = mx.max_e.maxCoeff();
        w["max_edot_per_node"] = to_vec(mx.max_edot);
        w["max_edot"] = mx.max_edot.maxCoeff();
        w["max_s_per_node"] = to_vec(mx.max_s);
        w["max_s"] = mx.max_s.maxCoeff();
    }
    j["trailing_window"] = w;

    Eigen::VectorXd kappa_final(log.layout.n_followers);
    for (int i = 0; i < log.layout.n_followers; ++i)
        kappa_final(i) = log.kappa_at(log.samples() - 1, i);
    j["kappa"] = {{"nondecreasing", kappa_nondecreasing(log)},
                  {"final", to_vec(kappa_final)},
                  {"total_variation_final_10s",
                   to_vec(kappa_total_variation(log, log.t.back() - 10.0))}};
    return j;
}

/// Gnuplot script laying out the four standard views of a run: joint/state
/// trajectories, tracking errors, adaptive gains, parameter error norms.
inline void write_plot_script(const SimConfig& cfg, const SimLog& log,
                              const std::string& path, const std::string& csv_name) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot open '" + path + "' for writing");
    const StateLayout& lay = log.layout;
    const auto header = csv_header(lay);
    const auto col = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return static_cast<int>(c + 1);  // gnuplot is 1-based
        throw IOError("plot script: unknown column " + name);
    };
    const Eigen::VectorXd& omega = cfg.leader.true_params;
    const int n = lay.n_followers;

    out << "# gnuplot script for " << csv_name << "\n";
    out << "set datafile separator ','\n";
    out << "set key outside right\nset grid\n";
    out << "set terminal pngcairo size 1400,1000\nset output 'run.png'\n";
    out << "set multiplot layout 2,2\n\n";

    if (lay.arms) {
        // leader output Ev and its rate E vdot as column expressions
        const std::string v0c = "$" + std::to_string(col("v0"));
        const std::string v1c = "$" + std::to_string(col("v1"));
        const std::string vdot0 = "(" + detail::fmt17(omega(0)) + "*" + v1c + ")";
        const std::string vdot1 = "(-" + detail::fmt17(omega(1)) + "*" + v0c + "+" +
                                  detail::fmt17(omega(2)) + "*(1-" + v0c + "**2)*" + v1c +
                                  ")";
        const Eigen::MatrixXd& E = cfg.leader.output_matrix;
        const auto combine = [&](int r, const std::string& c0, const std::string& c1) {
            return "(" + detail::fmt17(E(r, 0)) + "*" + c0 + "+" + detail::fmt17(E(r, 1)) +
                   "*" + c1 + ")";
        };

        out << "set title 'joint angles q_i vs leader output'\n";
        out << "plot ";
        for (int i = 1; i <= n; ++i)
            for (int c = 0; c < 2; ++c)
                out << "'" << csv_name << "' using 1:"
                    << col("q" + std::to_string(i) + "_" + std::to_string(c))
                    << " with lines notitle, ";
        out << "'" << csv_name << "' using 1:(" << combine(0, v0c, v1c)
            << ") with lines lw 2 lc 'black' title 'leader', ";
        out << "'" << csv_name << "' using 1:(" << combine(1, v0c, v1c)
            << ") with lines lw 2 lc 'black' notitle\n\n";

        out << "set title 'synchronization errors |e_i| and |de_i/dt|'\n";
        out << "plot ";
        for (int i = 1; i <= n; ++i) {
            const std::string e0 = "$" + std::to_string(col("e" + std::to_string(i) + "_0"));
            const std::string e1 = "$" + std::to_string(col("e" + std::to_string(i) + "_1"));
            out << "'" << csv_name << "' using 1:(sqrt(" << e0 << "**2+" << e1
                << "**2)) with lines title 'e_" << i << "', ";
        }
        for (int i = 1; i <= n; ++i) {
            const std::string d0 =
                "($" + std::to_string(col("qd" + std::to_string(i) + "_0")) + "-" +
                combine(0, vdot0, vdot1) + ")";
            const std::string d1 =
                "($" + std::to_string(col("qd" + std::to_string(i) + "_1")) + "-" +
                combine(1, vdot0, vdot1) + ")";
            out << "'" << csv_name << "' using 1:(sqrt(" << d0 << "**2+" << d1
                << "**2)) with lines dt 2 title 'de_" << i << "'"
                << (i < n ? ", " : "\n\n");
        }
    } else {
        out << "set title 'leader state v and estimates vhat_i'\n";
        out << "plot ";
        for (int i = 1; i <= n; ++i)
            for (int c = 0; c < lay.m; ++c)
                out << "'" << csv_name << "' using 1:"
                    << col("vhat" + std::to_string(i) + "_" + std::to_string(c))
                    << " with lines notitle, ";
        for (int c = 0; c < lay.m; ++c)
            out << "'" << csv_name << "' using 1:" << col("v" + std::to_string(c))
                << " with lines lw 2 lc 'black' " << (c == 0 ? "title 'leader'" : "notitle")
                << (c + 1 < lay.m ? ", " : "\n\n");

        out << "set title 'estimation errors |vhat_i - v|'\n";
        out << "set logscale y\nplot ";
        for (int i = 1; i <= n; ++i) {
            out << "'" << csv_name << "' using 1:(sqrt(";
            for (int c = 0; c < lay.m; ++c) {
                const std::string vh =
                    "$" + std::to_string(col("vhat" + std::to_string(i) + "_" +
                                             std::to_string(c)));
                const std::string vc = "$" + std::to_string(col("v" + std::to_string(c)));
                out << (c ? "+" : "") << "(" << vh << "-" << vc << ")**2";
            }
            out << ")) with lines title 'node " << i << "'" << (i < n ? ", " : "\n");
        }
        out << "unset logscale y\n\n";
    }

    out << "set title 'adaptive gains kappa_i'\n";
    out << "plot ";
    for (int i = 1; i <= n; ++i)
        out << "'" << csv_name << "' using 1:" << col("kappa" + std::to_string(i))
            << " with lines title 'node " << i << "'" << (i < n ? ", " : "\n\n");

    out << "set title 'parameter error norms |omegahat_i - omega|'\n";
    out << "set logscale y\nplot ";
    for (int i = 1; i <= n; ++i) {
        out << "'" << csv_name << "' using 1:(sqrt(";
        for (int c = 0; c < lay.l; ++c) {
            const std::string oh = "$" + std::to_string(col("omegahat" + std::to_string(i) +
                                                            "_" + std::to_string(c)));
            out << (c ? "+" : "") << "(" << oh << "-" << detail::fmt17(omega(c)) << ")**2";
        }
        out << ")) with lines title 'node " << i << "'" << (i < n ? ", " : "\n");
    }
    out << "unset multiplot\n";
}

}  // namespace synclab
