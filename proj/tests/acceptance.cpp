// Acceptance gate: every criterion prints one pass/fail line with its
// measured values; the process exits with the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "kswitten/dynamics.hpp"
#include "kswitten/expr.hpp"
#include "kswitten/io.hpp"
#include "kswitten/landscape.hpp"
#include "kswitten/reduction.hpp"
#include "kswitten/witten.hpp"

using namespace ksw;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  --  %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Case {
    ExprAst phi;
    Interval domain;
    WellDecomposition decomp;
};

Case make_case(const std::string& potential, double a, double b) {
    Case c;
    c.phi = parse_expr(potential);
    c.domain = {a, b};
    const auto cps = find_critical_points(c.phi, c.domain);
    c.decomp = decompose_wells(c.phi, cps, c.domain);
    return c;
}

double fit_line_intercept(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return (sy - slope * sx) / n;
}

// 1. Eyring-Kramers eigenvalue law for the double well.
void criterion1() {
    const double t0 = now_seconds();
    const double mu2 = 8.0 * std::sqrt(2.0) / M_PI;
    const auto c = make_case("(x^2-1)^2", -2.5, 2.5);
    const std::vector<double> hs{0.25, 0.2, 0.15, 0.1};

    std::vector<double> ratios;
    for (double h : hs) {
        const Grid grid = grid_from_interval(c.phi, c.decomp, -2.1, 2.1, 4001);
        const auto W = assemble(c.phi, h, grid, c.decomp.phi0);
        const auto sp = low_spectrum(W, 3);
        ratios.push_back(sp.values[1] / (h * std::exp(-2.0 / h)));
    }

    bool monotone = true;
    for (std::size_t i = 1; i < ratios.size(); ++i)
        monotone = monotone && std::fabs(ratios[i] - mu2) < std::fabs(ratios[i - 1] - mu2);
    const double rel_last = std::fabs(ratios.back() - mu2) / mu2;
    const double extrap = fit_line_intercept(hs, ratios);
    const double extrap_rel = std::fabs(extrap - mu2) / mu2;
    const double dt = now_seconds() - t0;

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "r(h)=(%.4f,%.4f,%.4f,%.4f), target %.5f, err(h=0.1)=%.2f%%, "
                  "extrapolation err=%.2f%%, %.1fs",
                  ratios[0], ratios[1], ratios[2], ratios[3], mu2, 100 * rel_last,
                  100 * extrap_rel, dt);
    report(1, "Eyring-Kramers eigenvalue law", monotone && rel_last <= 0.25 &&
                                                   extrap_rel <= 0.05 && dt <= 60.0, buf);
}

// 2. Exact kernel and eigenvalue count below eps0 h.
void criterion2() {
    bool ok = true;
    std::string detail;
    const auto run = [&](const Case& c, const Grid& grid, double h, int N) {
        const double t0 = now_seconds();
        const auto W = assemble(c.phi, h, grid, c.decomp.phi0);
        const auto sp = low_spectrum(W, N + 1);
        const auto g = W.zero_mode();
        const double kernel_residual = norm2(W.apply_M(g)) / (W.m_norm_inf() * norm2(g));
        const double dt = now_seconds() - t0;
        const bool pass = sp.values[0] <= 1e-13 * sp.values[static_cast<std::size_t>(N)] &&
                          sp.count_below == N &&
                          sp.values[static_cast<std::size_t>(N)] >= 0.05 * h &&
                          kernel_residual <= 1e-13 && dt <= 30.0;
        ok = ok && pass;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%sN=%d h=%.2f count=%d", detail.empty() ? "" : "; ", N, h,
                      sp.count_below);
        detail += buf;
    };

    const auto dw = make_case("(x^2-1)^2", -2.5, 2.5);
    const Grid gdw = grid_from_interval(dw.phi, dw.decomp, -2.1, 2.1, 4001);
    for (double h : {0.25, 0.2, 0.15, 0.1}) run(dw, gdw, h, 2);

    const auto tw = make_case("x^2*(x^2-1)^2", -1.6, 1.6);
    const Grid gtw = build_grid(tw.phi, tw.decomp, 3001);
    for (double h : {0.06, 0.05, 0.04}) run(tw, gtw, h, 3);

    report(2, "exact kernel + eigenvalue count", ok, detail);
}

// 3. Supersymmetric pairing of d^T d and d d^T.
void criterion3() {
    std::mt19937 rng(987654);
    std::uniform_real_distribution<double> ua(0.9, 1.2), uc(0.5, 1.5), uh(0.12, 0.35);
    std::uniform_int_distribution<int> un(501, 701);

    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 5; ++trial) {
        const bool triple = trial >= 3;
        const double a = ua(rng), cc = uc(rng);
        const std::string pot = triple
            ? fmt17(cc) + "*x^2*(x^2-" + fmt17(a) + ")^2"
            : fmt17(cc) + "*(x^2-" + fmt17(a) + ")^2";
        const auto c = make_case(pot, -3.5, 3.5);
        const double h = triple ? 0.5 * uh(rng) : uh(rng);
        const Grid grid = build_grid(c.phi, c.decomp, un(rng));
        const auto W = assemble(c.phi, h, grid, c.decomp.phi0);

        const auto seq = W.gk_sequence();
        const int p = W.rows();
        const auto m1 = one_form_eigenvalues(W, p);
        for (int i = 1; i <= p; ++i) {
            const double s = gk_singular_value(seq, p, i);
            const double rel = std::fabs(s * s - m1[static_cast<std::size_t>(i - 1)]) /
                               m1[static_cast<std::size_t>(i - 1)];
            worst = std::max(worst, rel);
        }
        ok = ok && worst <= 1e-10;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "worst relative mismatch over 5 cases: %.2e (tol 1e-10)", worst);
    report(3, "supersymmetric spectral pairing", ok, buf);
}

// 4. Normalization asymptotics of c_1(h).
void criterion4() {
    const auto c = make_case("(x^2-1)^2", -2.5, 2.5);
    const Grid grid = grid_from_interval(c.phi, c.decomp, -2.1, 2.1, 4001);
    const double delta0 = default_delta0(c.decomp);
    const double eps = default_eps_cut(c.phi, c.decomp, delta0);
    const double target = std::pow(8.0 / M_PI, 0.25);

    std::vector<double> errs;
    for (double h : {0.1, 0.05, 0.025}) {
        const auto q = quasimode0(c.phi, c.decomp, grid, 0, h, eps);
        errs.push_back(std::fabs(q.normalization - target) / target);
    }
    const bool ok = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] <= 0.01;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "c1 errors vs (8/pi)^{1/4}=%.5f: %.3f%% -> %.3f%% -> %.3f%% (<=1%% at h=0.025)",
                  target, 100 * errs[0], 100 * errs[1], 100 * errs[2]);
    report(4, "normalization constant asymptotics", ok, buf);
}

// 5. Interaction-matrix scaling.
void criterion5() {
    const auto c = make_case("(x^2-1)^2", -2.5, 2.5);
    const Grid grid = grid_from_interval(c.phi, c.decomp, -2.1, 2.1, 3001);
    const double delta0 = default_delta0(c.decomp);
    const double eps = default_eps_cut(c.phi, c.decomp, delta0);
    const double target = std::pow(2.0, 1.25);

    std::vector<double> errs;
    for (double h : {0.2, 0.15, 0.1}) {
        const auto W = assemble(c.phi, h, grid, c.decomp.phi0);
        const std::vector<QuasiMode> q0{quasimode0(c.phi, c.decomp, grid, 0, h, eps),
                                        quasimode0(c.phi, c.decomp, grid, 1, h, eps)};
        const std::vector<QuasiMode> q1{quasimode1(c.phi, c.decomp, grid, 0, h, delta0)};
        const auto L = hat_L(W, q0, q1);
        const double scale = std::sqrt(h / M_PI) * std::exp(-c.decomp.S / h);
        const double e = std::max(std::fabs(L.at(0, 0) / scale + target),
                                  std::fabs(L.at(0, 1) / scale - target)) /
                         target;
        errs.push_back(e);
        // the 1x2 double-well matrix has no entries off the two-diagonal pattern
    }
    const bool ok = errs[2] <= 0.20 && errs[0] > errs[1] && errs[1] > errs[2];
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "scaled-entry errors vs 2^{5/4}: %.2f%% -> %.2f%% -> %.2f%% (<=20%% at h=0.1); "
                  "off-pattern entries: none for N=2",
                  100 * errs[0], 100 * errs[1], 100 * errs[2]);
    report(5, "interaction-matrix scaling", ok, buf);
}

// 6. Effective matrix vs A0, and the mu^{-1/4} kernel residual.
void criterion6() {
    const auto dw = make_case("(x^2-1)^2", -2.5, 2.5);
    const Grid gdw = grid_from_interval(dw.phi, dw.decomp, -2.1, 2.1, 2001);
    const double d0dw = default_delta0(dw.decomp);
    const double epsdw = default_eps_cut(dw.phi, dw.decomp, d0dw);
    const auto A0dw = build_A0(dw.decomp.mu, dw.decomp.nu);

    std::vector<double> hs{0.2, 0.15, 0.1}, errs;
    for (double h : hs) {
        const auto W = assemble(dw.phi, h, gdw, dw.decomp.phi0);
        const std::vector<QuasiMode> q0{quasimode0(dw.phi, dw.decomp, gdw, 0, h, epsdw),
                                        quasimode0(dw.phi, dw.decomp, gdw, 1, h, epsdw)};
        const auto sp = low_spectrum(W, 2);
        const auto eff = effective_matrix(W, sp, q0, dw.decomp.S);
        double gap = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                gap = std::max(gap, std::fabs(eff.a_num.at(i, j) - A0dw.at(i, j)));
        errs.push_back(gap);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double lx = std::log(hs[i]), ly = std::log(errs[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double order = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);

    // triple well at h = 0.1: computed-kernel residual against mu^{-1/4}
    const auto tw = make_case("x^2*(x^2-1)^2", -1.6, 1.6);
    const Grid gtw = build_grid(tw.phi, tw.decomp, 3001);
    const double d0tw = default_delta0(tw.decomp);
    const double epstw = default_eps_cut(tw.phi, tw.decomp, d0tw);
    const double h = 0.1;
    const auto W = assemble(tw.phi, h, gtw, tw.decomp.phi0);
    std::vector<QuasiMode> q0;
    for (int n = 0; n < 3; ++n) q0.push_back(quasimode0(tw.phi, tw.decomp, gtw, n, h, epstw));
    const auto sp = low_spectrum(W, 3);
    const auto eff = effective_matrix(W, sp, q0, tw.decomp.S);
    const auto ker = a0_kernel_vector(tw.decomp.mu);
    const double kernel_residual = norm2(eff.a_num.apply(ker)) / eff.a_num.norm_inf();

    const bool ok = order >= 0.7 && kernel_residual <= 1e-6;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "fitted order %.2f (>=0.7); triple-well kernel residual %.2e (required <=1e-6; "
                  "value is Theta(h^2) basis-alignment drift, ~5e-7 first reached near h=0.025)",
                  order, kernel_residual);
    report(6, "effective matrix convergence + kernel residual", ok, buf);
}

// 7. Dynamics against the reduced model.
void criterion7() {
    const double t0 = now_seconds();
    const auto c = make_case("(x^2-1)^2", -2.5, 2.5);
    const double mu2 = 8.0 * std::sqrt(2.0) / M_PI;
    const auto taus = make_tau_grid(25, 3.0);
    const auto rep =
        verify_theorem(c.phi, c.decomp, {1.0, 0.0}, {0.2, 0.15, 0.1}, taus, -2.1, 2.1, 1501);

    bool decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        decreasing = decreasing && rep.rows[i].sup_l2_error < rep.rows[i - 1].sup_l2_error;

    // normalized masses at h = 0.1 vs the closed form, uniformly on the grid
    const Grid grid = grid_from_interval(c.phi, c.decomp, -2.1, 2.1, 1501);
    auto prop = make_heat_propagator(assemble(c.phi, 0.1, grid, c.decomp.phi0), c.decomp);
    const auto psis = make_psi_family(c.phi, c.decomp, grid, 0.1);
    const auto evo = heat_evolve(prop, c.decomp, psis, prepare_initial(psis, {1.0, 0.0}), taus);
    double worst_mass = 0.0;
    for (std::size_t it = 0; it < taus.size(); ++it) {
        const double tot = evo.masses[it][0] + evo.masses[it][1];
        const double decay = std::exp(-mu2 * taus[it]);
        worst_mass = std::max(worst_mass,
                              std::fabs(evo.masses[it][0] / tot - 0.5 * (1.0 + decay)));
        worst_mass = std::max(worst_mass,
                              std::fabs(evo.masses[it][1] / tot - 0.5 * (1.0 - decay)));
    }
    const double dt = now_seconds() - t0;
    const bool ok = decreasing && rep.fitted_l2_order >= 0.7 && worst_mass <= 0.10 && dt <= 120.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "E(h)=(%.4f,%.4f,%.4f), fitted order %.2f (>=0.7), sup mass error %.4f "
                  "(<=0.10), %.0fs",
                  rep.rows[0].sup_l2_error, rep.rows[1].sup_l2_error, rep.rows[2].sup_l2_error,
                  rep.fitted_l2_order, worst_mass, dt);
    report(7, "dynamics vs reduced model", ok, buf);
}

// 8. Conservation and monotonicity on dynamics runs.
void criterion8() {
    const auto c = make_case("(x^2-1)^2", -2.5, 2.5);
    const Grid grid = grid_from_interval(c.phi, c.decomp, -2.1, 2.1, 1201);
    const double h = 0.12;
    auto prop = make_heat_propagator(assemble(c.phi, h, grid, c.decomp.phi0), c.decomp);
    const auto psis = make_psi_family(c.phi, c.decomp, grid, h);
    const auto taus = make_tau_grid(25, 3.0);
    const auto evo = heat_evolve(prop, c.decomp, psis, prepare_initial(psis, {0.8, -0.6}), taus);

    double drift = 0.0, prev = HUGE_VAL;
    bool monotone = true;
    for (std::size_t it = 0; it < taus.size(); ++it) {
        drift = std::max(drift, std::fabs(evo.mass_total[it] / evo.mass_total[0] - 1.0));
        const double nrm = l2_norm(grid, evo.states[it]);
        monotone = monotone && nrm <= prev * (1.0 + 1e-12);
        prev = nrm;
    }

    std::vector<double> gibbs(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j)
        gibbs[static_cast<std::size_t>(j)] =
            std::exp(-2.0 * (prop.w.phi_node[static_cast<std::size_t>(j)] - c.decomp.phi0) / h);
    const auto ks = ks_solve(prop, c.decomp, gibbs, {0.0, h * std::exp(2.0 / h)});
    double gibbs_move = 0.0;
    for (std::size_t j = 0; j < gibbs.size(); ++j)
        gibbs_move = std::max(gibbs_move, std::fabs(ks.states[1][j] - gibbs[j]));

    const bool ok = drift <= 1e-10 && monotone && gibbs_move <= 1e-10;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "mass drift %.1e (<=1e-10), norm monotone %s, Gibbs stationarity %.1e (<=1e-10)",
                  drift, monotone ? "yes" : "NO", gibbs_move);
    report(8, "conservation and monotonicity", ok, buf);
}

// 9. Graph reduction.
void criterion9() {
    bool ok = true;
    std::string detail;

    GraphSpec c3;
    c3.vertices = {"1", "2", "3"};
    c3.edges = {{0, 1}, {1, 2}, {2, 0}};
    const auto M3 = graph_laplacian(c3, 1.0);
    for (int i = 0; i < 3 && ok; ++i)
        for (int j = 0; j < 3 && ok; ++j)
            ok = std::fabs(M3.at(i, j) - (i == j ? 2.0 : -1.0)) <= 1e-14;
    detail += ok ? "3-cycle pattern ok" : "3-cycle pattern WRONG";

    GraphSpec c4;
    c4.vertices = {"1", "2", "3", "4"};
    c4.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    const double kappa = 0.85;
    const auto es = sym_eigen(graph_laplacian(c4, kappa));
    const std::vector<double> expect{0.0, 2.0 * kappa, 2.0 * kappa, 4.0 * kappa};
    for (int k = 0; k < 4; ++k)
        ok = ok && std::fabs(es.values[static_cast<std::size_t>(k)] -
                             expect[static_cast<std::size_t>(k)]) <= 1e-10 * std::max(1.0, 4.0 * kappa);
    const auto v0 = es.column(0);
    for (int i = 1; i < 4; ++i) ok = ok && std::fabs(v0[static_cast<std::size_t>(i)] - v0[0]) <= 1e-10;
    detail += "; 4-cycle eigenvalues {0,2,2,4}*kappa and constant kernel ok";

    GraphSpec disc;
    disc.vertices = {"1", "2", "3", "4"};
    disc.edges = {{0, 1}, {2, 3}};
    bool rejected = false;
    try {
        graph_laplacian(disc, 1.0);
    } catch (const HypothesisError&) {
        rejected = true;
    }
    ok = ok && rejected;
    detail += rejected ? "; disconnected input rejected" : "; disconnected input ACCEPTED";

    report(9, "graph reduction", ok, detail);
}

// 10. Structural identities.
void criterion10() {
    std::mt19937 rng(24601);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    std::uniform_int_distribution<int> sizes(1, 9);

    double worst_factor = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int N = sizes(rng);
        std::vector<double> mu(static_cast<std::size_t>(N)), nu(static_cast<std::size_t>(N - 1));
        for (auto& m : mu) m = u(rng);
        for (auto& v : nu) v = u(rng);
        const auto A = build_A0(mu, nu);
        const auto LtL = matmul(transpose(build_L0(mu, nu)), build_L0(mu, nu));
        double scale = 1.0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) scale = std::max(scale, std::fabs(A.at(i, j)));
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                worst_factor =
                    std::max(worst_factor, std::fabs(A.at(i, j) - LtL.at(i, j) / M_PI) / scale);
    }

    double worst_semi = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> mu(5), nu(4);
        for (auto& m : mu) m = u(rng);
        for (auto& v : nu) v = u(rng);
        const auto A = build_A0(mu, nu);
        const auto es = sym_eigen(A);
        std::vector<double> beta{u(rng), -u(rng), u(rng), u(rng), -u(rng)};
        const auto direct = reduced_evolve(es, A, beta, 1.9);
        const auto stepped = reduced_evolve(es, A, reduced_evolve(es, A, beta, 0.6), 1.3);
        for (int i = 0; i < 5; ++i)
            worst_semi = std::max(worst_semi, std::fabs(direct[static_cast<std::size_t>(i)] -
                                                        stepped[static_cast<std::size_t>(i)]));
    }

    const bool ok = worst_factor <= 1e-12 && worst_semi <= 1e-10;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "A0 vs L0^T L0/pi worst %.1e (<=1e-12); semigroup defect %.1e (<=1e-10)",
                  worst_factor, worst_semi);
    report(10, "structural identities", ok, buf);
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures;
}
