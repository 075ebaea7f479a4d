#pragma once

// Batch front end.  Every command loads one JSON config, runs, and drops
// deterministic CSV/JSON artifacts (plus gnuplot scripts for the sweep) into
// the output directory.  Exit codes: 0 success, 1 config error, 2 hypothesis
// validation failure, 3 numerical failure.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "kswitten/config.hpp"
#include "kswitten/dynamics.hpp"
#include "kswitten/errors.hpp"
#include "kswitten/expr.hpp"
#include "kswitten/io.hpp"
#include "kswitten/landscape.hpp"
#include "kswitten/reduction.hpp"
#include "kswitten/witten.hpp"

namespace ksw {

namespace cli_detail {

struct Session {
    Config cfg;
    std::string out_dir;
    ExprAst phi;
    std::vector<CriticalPoint> cps;
    AssumptionReport assumptions;
    WellDecomposition decomp;
};

inline JsonValue assumptions_json(const AssumptionReport& rep) {
    JsonValue a = JsonValue::object();
    a.add("morse_ok", JsonValue::boolean(rep.morse_ok));
    a.add("equal_minima_ok", JsonValue::boolean(rep.equal_minima_ok));
    a.add("equal_saddles_ok", JsonValue::boolean(rep.equal_saddles_ok));
    a.add("growth_ok", JsonValue::boolean(rep.growth_ok));
    JsonValue diags = JsonValue::array();
    for (const auto& d : rep.diagnostics) diags.push_back(JsonValue::string(d));
    a.add("diagnostics", std::move(diags));
    return a;
}

inline JsonValue landscape_json(const Session& s) {
    JsonValue root = JsonValue::object();
    root.add("config_hash", JsonValue::string(s.cfg.hash));
    root.add("potential", JsonValue::string(s.cfg.potential));
    JsonValue cps = JsonValue::array();
    for (const auto& cp : s.cps) {
        JsonValue c = JsonValue::object();
        c.add("location", JsonValue::number(cp.location));
        c.add("value", JsonValue::number(cp.value));
        c.add("second_derivative", JsonValue::number(cp.second_derivative));
        c.add("kind", JsonValue::string(cp.kind == CriticalKind::Minimum ? "minimum" : "maximum"));
        cps.push_back(std::move(c));
    }
    root.add("critical_points", std::move(cps));
    root.add("assumptions", assumptions_json(s.assumptions));
    if (s.assumptions.ok()) {
        JsonValue wells = JsonValue::array();
        for (const auto& E : s.decomp.wells) {
            JsonValue w = JsonValue::array();
            w.push_back(JsonValue::number(E.a));
            w.push_back(JsonValue::number(E.b));
            wells.push_back(std::move(w));
        }
        root.add("wells", std::move(wells));
        root.add("phi0", JsonValue::number(s.decomp.phi0));
        root.add("sigma1", JsonValue::number(s.decomp.sigma1));
        root.add("S", JsonValue::number(s.decomp.S));
        root.add("mu", JsonValue::number_array(s.decomp.mu));
        root.add("nu", JsonValue::number_array(s.decomp.nu));
    }
    return root;
}

inline JsonValue matrix_json(const SymMatrix& M) {
    JsonValue rows = JsonValue::array();
    for (int i = 0; i < M.n; ++i) {
        JsonValue r = JsonValue::array();
        for (int j = 0; j < M.n; ++j) r.push_back(JsonValue::number(M.at(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline JsonValue matrix_json(const Mat& M) {
    JsonValue rows = JsonValue::array();
    for (int i = 0; i < M.rows; ++i) {
        JsonValue r = JsonValue::array();
        for (int j = 0; j < M.cols; ++j) r.push_back(JsonValue::number(M.at(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline JsonValue eigen_json(const EigenSystem& es) {
    JsonValue e = JsonValue::object();
    e.add("values", JsonValue::number_array(es.values));
    JsonValue vecs = JsonValue::array();
    for (int k = 0; k < es.n; ++k) vecs.push_back(JsonValue::number_array(es.column(k)));
    e.add("vectors", std::move(vecs));
    return e;
}

// Landscape pipeline shared by the potential-driven commands.  Throws
// HypothesisError after writing the report when validation fails.
inline Session open_session(const Config& cfg, const std::string& out_dir, bool write_report) {
    Session s;
    s.cfg = cfg;
    s.out_dir = out_dir;
    if (!cfg.has_potential) throw ConfigError("config: \"potential\" is required for this command");
    if (!cfg.has_domain) throw ConfigError("config: \"domain\" is required for this command");

    s.phi = parse_expr(cfg.potential);
    s.cps = find_critical_points(s.phi, cfg.domain, cfg.tols.scan_n, cfg.tols.newton_tol,
                                 cfg.tols.merge_tol);
    LandscapeTols lt;
    lt.newton_tol = cfg.tols.newton_tol;
    lt.degeneracy_tol = cfg.tols.degeneracy_tol;
    lt.equal_height_tol = cfg.tols.equal_height_tol;
    lt.merge_tol = cfg.tols.merge_tol;
    s.assumptions = validate_assumptions(s.phi, s.cps, cfg.domain, lt);
    if (s.assumptions.ok()) s.decomp = decompose_wells(s.phi, s.cps, cfg.domain);

    if (write_report || !s.assumptions.ok())
        write_text_file(out_dir + "/landscape.json", landscape_json(s).dump());
    if (!s.assumptions.ok())
        throw HypothesisError("potential fails the standing hypotheses; see landscape.json");
    return s;
}

inline std::vector<double> tau_grid_of(const Config& cfg, double mu2) {
    if (!cfg.tau_grid.points.empty()) return cfg.tau_grid.points;
    double tau_max = cfg.tau_grid.tau_max;
    if (!(tau_max > 0.0)) tau_max = mu2 > 0.0 ? 5.0 / mu2 : 1.0;
    return make_tau_grid(cfg.tau_grid.count, tau_max);
}

inline void cmd_spectrum(const Session& s) {
    const Config& cfg = s.cfg;
    if (cfg.h_list.empty()) throw ConfigError("config: \"h_list\" is required for spectrum");
    const int N = s.decomp.well_count();
    const int k = cfg.spectrum_k > 0 ? cfg.spectrum_k : std::min(N + 1, 20);
    const bool ratios = s.decomp.has_saddles();

    std::vector<std::string> cols{"h"};
    for (int i = 1; i <= k; ++i) cols.push_back("lambda_" + std::to_string(i));
    if (ratios)
        for (int i = 2; i <= std::min(N, k); ++i) cols.push_back("ratio_" + std::to_string(i));

    CsvBuilder csv(cfg.hash, cols);
    JsonValue rows = JsonValue::array();
    const Grid grid = grid_from_interval(s.phi, s.decomp, cfg.domain.a, cfg.domain.b, cfg.grid_n);
    for (double h : cfg.h_list) {
        const auto W = assemble(s.phi, h, grid, s.decomp.phi0, cfg.tols.exp_guard);
        const auto sp = low_spectrum(W, k, cfg.tols.eps0);
        std::vector<double> row{h};
        for (double v : sp.values) row.push_back(v);

        JsonValue o = JsonValue::object();
        o.add("h", JsonValue::number(h));
        o.add("lambda", JsonValue::number_array(sp.values));
        o.add("count_below_eps0_h", JsonValue::integer(sp.count_below));
        if (ratios) {
            const double nu_h = h * std::exp(-2.0 * s.decomp.S / h);
            std::vector<double> rr;
            for (int i = 2; i <= std::min(N, k); ++i) {
                rr.push_back(sp.values[static_cast<std::size_t>(i - 1)] / nu_h);
                row.push_back(rr.back());
            }
            o.add("ratio", JsonValue::number_array(rr));

            // effective matrix in the aligned quasimode basis
            try {
                const double delta0 = cfg.tols.delta0 > 0.0 ? cfg.tols.delta0
                                                            : default_delta0(s.decomp);
                const double eps_cut = cfg.tols.eps_cut > 0.0
                                           ? cfg.tols.eps_cut
                                           : default_eps_cut(s.phi, s.decomp, delta0);
                std::vector<QuasiMode> q0;
                for (int n = 0; n < N; ++n)
                    q0.push_back(quasimode0(s.phi, s.decomp, grid, n, h, eps_cut));
                const auto spN = k >= N ? sp : low_spectrum(W, N, cfg.tols.eps0);
                const auto eff = effective_matrix(W, spN, q0, s.decomp.S);
                o.add("a_num", matrix_json(eff.a_num));
            } catch (const std::exception& e) {
                o.add("a_num_error", JsonValue::string(e.what()));
            }
        }
        csv.row(row);
        rows.push_back(std::move(o));
    }
    write_text_file(s.out_dir + "/spectrum.csv", csv.str());

    JsonValue root = JsonValue::object();
    root.add("config_hash", JsonValue::string(cfg.hash));
    root.add("S", JsonValue::number(s.decomp.S));
    root.add("rows", std::move(rows));
    write_text_file(s.out_dir + "/spectrum.json", root.dump());
}

inline void cmd_reduce(const Session& s) {
    const auto model = build_reduced_model(s.decomp.mu, s.decomp.nu, s.decomp.S);
    JsonValue root = JsonValue::object();
    root.add("config_hash", JsonValue::string(s.cfg.hash));
    root.add("S", JsonValue::number(model.S));
    root.add("kappa", JsonValue::number(model.kappa));
    root.add("mu", JsonValue::number_array(s.decomp.mu));
    root.add("nu", JsonValue::number_array(s.decomp.nu));
    root.add("L0", matrix_json(model.L0));
    root.add("A0", matrix_json(model.A0));
    root.add("eigen", eigen_json(model.eigen));
    root.add("kernel_vector", JsonValue::number_array(model.kernel_vector));
    write_text_file(s.out_dir + "/reduced.json", root.dump());
}

inline void write_evolution_csv(const Session& s, const HComparison& hc, int index) {
    const int N = s.decomp.well_count();
    std::vector<std::string> cols{"tau"};
    for (int n = 1; n <= N; ++n) cols.push_back("m_" + std::to_string(n));
    for (int n = 1; n <= N; ++n) cols.push_back("alpha_" + std::to_string(n));
    cols.push_back("l2_error");

    CsvBuilder csv(s.cfg.hash, cols);
    for (std::size_t it = 0; it < hc.evo.taus.size(); ++it) {
        std::vector<double> row{hc.evo.taus[it]};
        for (double m : hc.evo.masses[it]) row.push_back(m);
        for (double a : hc.alphas[it]) row.push_back(a);
        row.push_back(hc.l2_errors[it]);
        csv.row(row);
    }
    write_text_file(s.out_dir + "/evolve_" + std::to_string(index + 1) + ".csv", csv.str());
}

inline std::vector<HComparison> run_comparisons(const Session& s, int jobs) {
    const Config& cfg = s.cfg;
    if (cfg.h_list.empty()) throw ConfigError("config: \"h_list\" is required for this command");
    if (cfg.beta.empty()) throw ConfigError("config: \"beta\" is required for this command");
    if (static_cast<int>(cfg.beta.size()) != s.decomp.well_count())
        throw ConfigError("config: beta must have one entry per well (" +
                          std::to_string(s.decomp.well_count()) + ")");
    if (!s.decomp.has_saddles())
        throw ConfigError("evolve/sweep need at least two wells (no barrier to cross)");
    // surface grid misconfiguration on the calling thread
    grid_from_interval(s.phi, s.decomp, cfg.domain.a, cfg.domain.b, cfg.grid_n);
    if (cfg.grid_n > kDenseGridCap)
        throw ConfigError("config: grid_n exceeds the dense diagonalization cap " +
                          std::to_string(kDenseGridCap));

    const SymMatrix A0 = build_A0(s.decomp.mu, s.decomp.nu);
    const EigenSystem es = sym_eigen(A0);
    const double mu2 = es.values.size() > 1 ? es.values[1] : 0.0;
    const auto taus = tau_grid_of(cfg, mu2);

    std::vector<HComparison> results(cfg.h_list.size());
    std::vector<std::string> failures(cfg.h_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.h_list.size()) return;
            try {
                results[i] = compare_at_h(s.phi, s.decomp, A0, es, cfg.beta, cfg.h_list[i], taus,
                                          cfg.domain.a, cfg.domain.b, cfg.grid_n, cfg.tols.eps0);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.h_list.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures)
        if (!f.empty()) throw NumericError(f);
    return results;
}

inline void cmd_evolve(const Session& s, int jobs) {
    const auto results = run_comparisons(s, jobs);
    for (std::size_t i = 0; i < results.size(); ++i)
        write_evolution_csv(s, results[i], static_cast<int>(i));
}

inline void cmd_sweep(const Session& s, int jobs) {
    const auto results = run_comparisons(s, jobs);
    for (std::size_t i = 0; i < results.size(); ++i)
        write_evolution_csv(s, results[i], static_cast<int>(i));

    ComparisonReport rep;
    {
        const SymMatrix A0 = build_A0(s.decomp.mu, s.decomp.nu);
        const EigenSystem es = sym_eigen(A0);
        rep.mu2 = es.values.size() > 1 ? es.values[1] : 0.0;
    }
    std::vector<double> hs, l2s, ms;
    for (const auto& r : results) {
        rep.rows.push_back(r.row);
        hs.push_back(r.row.h);
        l2s.push_back(r.row.sup_l2_error);
        ms.push_back(r.row.sup_mass_error);
    }
    if (hs.size() >= 2) {
        rep.fitted_l2_order = fit_log_slope(hs, l2s);
        rep.fitted_mass_order = fit_log_slope(hs, ms);
    }

    JsonValue root = JsonValue::object();
    root.add("config_hash", JsonValue::string(s.cfg.hash));
    root.add("mu2", JsonValue::number(rep.mu2));
    root.add("fitted_l2_order", JsonValue::number(rep.fitted_l2_order));
    root.add("fitted_mass_order", JsonValue::number(rep.fitted_mass_order));
    JsonValue rows = JsonValue::array();
    for (const auto& r : rep.rows) {
        JsonValue o = JsonValue::object();
        o.add("h", JsonValue::number(r.h));
        o.add("sup_l2_error", JsonValue::number(r.sup_l2_error));
        o.add("sup_mass_error", JsonValue::number(r.sup_mass_error));
        o.add("l1_error_tau1", JsonValue::number(r.l1_error));
        rows.push_back(std::move(o));
    }
    root.add("rows", std::move(rows));
    write_text_file(s.out_dir + "/sweep.json", root.dump());

    CsvBuilder errs(s.cfg.hash, {"h", "sup_l2_error", "sup_mass_error", "l1_error_tau1"});
    for (const auto& r : rep.rows) errs.row({r.h, r.sup_l2_error, r.sup_mass_error, r.l1_error});
    write_text_file(s.out_dir + "/sweep_errors.csv", errs.str());

    std::string gp;
    gp += "# config_hash=" + s.cfg.hash + "\n";
    gp += "set logscale xy\n";
    gp += "set xlabel 'h'\n";
    gp += "set ylabel 'sup_tau error'\n";
    gp += "set key left top\n";
    gp += "set datafile separator ','\n";
    gp += "plot 'sweep_errors.csv' using 1:2 with linespoints title 'L2 error', \\\n";
    gp += "     'sweep_errors.csv' using 1:3 with linespoints title 'mass error'\n";
    write_text_file(s.out_dir + "/convergence.gp", gp);
}

inline void cmd_graph(const Config& cfg, const std::string& out_dir) {
    if (!cfg.has_graph) throw ConfigError("config: \"graph\" block is required for the graph command");
    const SymMatrix M = graph_laplacian(cfg.graph, cfg.graph_kappa);
    const EigenSystem es = sym_eigen(M);

    JsonValue root = JsonValue::object();
    root.add("config_hash", JsonValue::string(cfg.hash));
    JsonValue verts = JsonValue::array();
    for (const auto& v : cfg.graph.vertices) verts.push_back(JsonValue::string(v));
    root.add("vertices", std::move(verts));
    root.add("kappa", JsonValue::number(cfg.graph_kappa));
    root.add("laplacian", matrix_json(M));
    root.add("eigen", eigen_json(es));
    write_text_file(out_dir + "/graph.json", root.dump());
}

} // namespace cli_detail

inline int cli_run(const std::string& command, const std::string& config_path,
                   const std::string& out_override, int jobs, std::ostream& err) {
    try {
        Config cfg = load_config(config_path);
        const std::string out_dir = out_override.empty() ? cfg.output_dir : out_override;
        std::filesystem::create_directories(out_dir);

        if (command == "graph") {
            cli_detail::cmd_graph(cfg, out_dir);
            return 0;
        }
        cli_detail::Session s = cli_detail::open_session(cfg, out_dir, command == "analyze");
        if (command == "analyze") return 0;
        if (command == "spectrum") cli_detail::cmd_spectrum(s);
        else if (command == "reduce") cli_detail::cmd_reduce(s);
        else if (command == "evolve") cli_detail::cmd_evolve(s, jobs);
        else if (command == "sweep") cli_detail::cmd_sweep(s, jobs);
        else throw ConfigError("unknown command: " + command);
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const HypothesisError& e) {
        err << "hypothesis violation: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace ksw
