#pragma once

// Exact spectral propagation of the Witten heat flow and of the original
// drift-diffusion density over exponentially long rescaled times, plus the
// comparison harness against the reduced model.  Time stepping would be
// meaningless at t ~ e^{2S/h}; instead u(t) = sum_k e^{-lambda_k t} <u0,v_k> v_k.
//
// The low cluster uses the relatively accurate eigenvalues from the
// bidiagonal route: an absolute error of 1e-13 in lambda_2 ~ 1e-10 would
// turn into e^{O(1)} after rescaling, so the full QL decomposition serves
// only the orthogonal complement, where every mode has decayed to zero for
// any positive rescaled time.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kswitten/errors.hpp"
#include "kswitten/expr.hpp"
#include "kswitten/landscape.hpp"
#include "kswitten/linalg.hpp"
#include "kswitten/reduction.hpp"
#include "kswitten/witten.hpp"

namespace ksw {

constexpr int kDenseGridCap = 4001;

struct HeatPropagator {
    DiscreteWitten w;
    double nu_h = 0.0;   // h e^{-2S/h}; 0 marks a single well (no rescaled time)
    Spectrum low;        // accurate low eigenpairs
    EigenSystem full;    // complete QL decomposition of M
};

inline HeatPropagator make_heat_propagator(DiscreteWitten w, const WellDecomposition& decomp,
                                           double eps0 = kDefaultEps0) {
    if (w.n() > kDenseGridCap)
        throw ConfigError("heat propagator: grid size " + std::to_string(w.n()) +
                          " exceeds the dense diagonalization cap " + std::to_string(kDenseGridCap));
    HeatPropagator p;
    p.nu_h = decomp.has_saddles() ? w.h * std::exp(-2.0 * decomp.S / w.h) : 0.0;
    const int n_low = std::min(std::max(decomp.well_count(), 1), 20);
    p.low = low_spectrum(w, n_low, eps0);
    p.full = tridiag_eigen(w.m_diag, w.m_off, true);
    p.w = std::move(w);
    return p;
}

// u(t) for heat times t >= 0 (t = tau / nu_h for rescaled experiments).
inline std::vector<double> propagate_t(const HeatPropagator& p, const std::vector<double>& u0,
                                       double t) {
    if (t < 0.0) throw ConfigError("propagate_t: negative time");
    const int n = p.w.n();
    const int nlow = static_cast<int>(p.low.vectors.size());

    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    std::vector<double> perp = u0;
    for (int k = 0; k < nlow; ++k) {
        const auto& v = p.low.vectors[static_cast<std::size_t>(k)];
        const double c = dot(v, u0);
        axpy(-c, v, perp);
        axpy(std::exp(-p.low.values[static_cast<std::size_t>(k)] * t) * c, v, u);
    }
    // Complement: every eigenvalue here is clamped at zero; M is a Gram
    // matrix, so negative QL output is rounding noise.
    std::vector<double> coef(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        const double pj = perp[static_cast<std::size_t>(j)];
        if (pj == 0.0) continue;
        const double* row = &p.full.vectors[static_cast<std::size_t>(j) * n];
        for (int m = 0; m < n; ++m) coef[static_cast<std::size_t>(m)] += row[m] * pj;
    }
    for (int m = 0; m < n; ++m)
        coef[static_cast<std::size_t>(m)] *=
            std::exp(-std::max(p.full.values[static_cast<std::size_t>(m)], 0.0) * t);
    for (int j = 0; j < n; ++j) {
        const double* row = &p.full.vectors[static_cast<std::size_t>(j) * n];
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += row[m] * coef[static_cast<std::size_t>(m)];
        u[static_cast<std::size_t>(j)] += s;
    }
    return u;
}

struct EvolutionResult {
    std::vector<double> taus;
    std::vector<std::vector<double>> states;  // u(tau) on the nodes
    std::vector<std::vector<double>> masses;  // well masses of rho(tau)
    std::vector<std::vector<double>> coeffs;  // b_n(tau) = <u(tau), psi_n>
    std::vector<double> mass_total;           // sum_j u_j g_j dx, conserved
};

// Sharp-indicator localized state on well n: psi = c_n h^{-1/4} 1_{E_n}
// e^{-(phi-phi0)/h}, unit L2 norm.
inline QuasiMode make_psi(const ExprAst& phi, const WellDecomposition& d, const Grid& grid,
                          double h, int well) {
    if (well < 0 || well >= d.well_count()) throw ConfigError("make_psi: well index out of range");
    const Interval E = d.wells[static_cast<std::size_t>(well)];
    QuasiMode q;
    q.kind = QuasiModeKind::ZeroForm;
    q.index = well;
    q.h = h;
    q.vec.assign(static_cast<std::size_t>(grid.n), 0.0);
    for (int j = 0; j < grid.n; ++j) {
        const double x = grid.node(j);
        if (x > E.a && x < E.b)
            q.vec[static_cast<std::size_t>(j)] = std::exp(-(eval_value(phi, x) - d.phi0) / h);
    }
    const double nrm = l2_norm(grid, q.vec);
    if (!(nrm > 0.0)) throw NumericError("make_psi: no grid node inside the well");
    for (auto& v : q.vec) v /= nrm;
    q.normalization = std::pow(h, 0.25) / nrm;
    return q;
}

inline std::vector<QuasiMode> make_psi_family(const ExprAst& phi, const WellDecomposition& d,
                                              const Grid& grid, double h) {
    std::vector<QuasiMode> psis;
    for (int n = 0; n < d.well_count(); ++n) psis.push_back(make_psi(phi, d, grid, h, n));
    return psis;
}

// Psi(beta) = sum beta_n psi_n.
inline std::vector<double> prepare_initial(const std::vector<QuasiMode>& psis,
                                           const std::vector<double>& beta) {
    if (psis.size() != beta.size()) throw ConfigError("prepare_initial: beta length mismatch");
    std::vector<double> u0(psis.front().vec.size(), 0.0);
    for (std::size_t n = 0; n < psis.size(); ++n) axpy(beta[n], psis[n].vec, u0);
    return u0;
}

// Trapezoid mass of rho over each well.
inline std::vector<double> well_masses(const std::vector<double>& rho, const WellDecomposition& d,
                                       const Grid& grid) {
    std::vector<double> m(static_cast<std::size_t>(d.well_count()), 0.0);
    for (int n = 0; n < d.well_count(); ++n) {
        const Interval E = d.wells[static_cast<std::size_t>(n)];
        int first = -1, last = -1;
        for (int j = 0; j < grid.n; ++j) {
            const double x = grid.node(j);
            if (x > E.a && x < E.b) {
                if (first < 0) first = j;
                last = j;
            }
        }
        if (first < 0) continue;
        double s = 0.5 * (rho[static_cast<std::size_t>(first)] + rho[static_cast<std::size_t>(last)]);
        for (int j = first + 1; j < last; ++j) s += rho[static_cast<std::size_t>(j)];
        m[static_cast<std::size_t>(n)] = s * grid.dx();
    }
    return m;
}

inline std::vector<double> to_density(const HeatPropagator& p, const std::vector<double>& u) {
    std::vector<double> rho(u.size());
    const auto g = p.w.zero_mode();
    for (std::size_t j = 0; j < u.size(); ++j) rho[j] = g[j] * u[j];
    return rho;
}

// Evolve u0 over the rescaled tau grid (t = tau / nu_h) and collect masses,
// coefficients and the conserved total mass.
inline EvolutionResult heat_evolve(const HeatPropagator& p, const WellDecomposition& decomp,
                                   const std::vector<QuasiMode>& psis,
                                   const std::vector<double>& u0, const std::vector<double>& taus) {
    if (p.nu_h <= 0.0)
        throw ConfigError("heat_evolve: rescaled time needs a finite barrier (use propagate_t)");
    EvolutionResult r;
    r.taus = taus;
    const auto g = p.w.zero_mode();
    const double dx = p.w.grid.dx();
    for (double tau : taus) {
        auto u = propagate_t(p, u0, tau / p.nu_h);
        auto rho = to_density(p, u);
        r.masses.push_back(well_masses(rho, decomp, p.w.grid));
        std::vector<double> b;
        for (const auto& psi : psis) b.push_back(l2_inner(p.w.grid, u, psi.vec));
        r.coeffs.push_back(std::move(b));
        r.mass_total.push_back(dx * dot(u, g));
        r.states.push_back(std::move(u));
    }
    return r;
}

// Kramers-Smoluchowski density flow at temperature epsilon: rho(t) =
// e^{-(phi-phi0)/h} u(t/h^2) with u0 = e^{(phi-phi0)/h} rho0 and h = 2 eps^2.
inline EvolutionResult ks_solve(const HeatPropagator& p, const WellDecomposition& decomp,
                                const std::vector<double>& rho0,
                                const std::vector<double>& phys_times) {
    const double h = p.w.h;
    const auto g = p.w.zero_mode();
    std::vector<double> u0(rho0.size());
    for (std::size_t j = 0; j < rho0.size(); ++j) {
        const double expo = (p.w.phi_node[j] - p.w.phi0) / h;
        if (expo > 700.0)
            throw NumericError("ks_solve: e^{(phi-phi0)/h} overflows on this domain; "
                               "shrink the interval or raise h");
        u0[j] = rho0[j] * std::exp(expo);
    }

    EvolutionResult r;
    r.taus = phys_times;
    const double dx = p.w.grid.dx();
    for (double t : phys_times) {
        auto u = propagate_t(p, u0, t / (h * h));
        auto rho = to_density(p, u);
        r.masses.push_back(well_masses(rho, decomp, p.w.grid));
        r.mass_total.push_back(dx * dot(u, g));
        r.states.push_back(std::move(rho)); // density, not u
    }
    return r;
}

// ---------------------------------------------------------------------------
// Theorem-level comparison

struct ComparisonRow {
    double h = 0.0;
    double sup_l2_error = 0.0;   // sup_tau ||u(tau) - Psi(e^{-tau A0} beta)||
    double sup_mass_error = 0.0; // sup_tau max_n |normalized mass - prediction|
    double l1_error = 0.0;       // L1 distance to the reduced profile at tau = 1
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double fitted_l2_order = 0.0;
    double fitted_mass_order = 0.0;
    double mu2 = 0.0; // spectral gap of A0, sets the relaxation scale
};

inline std::vector<double> make_tau_grid(int count, double tau_max) {
    std::vector<double> taus{0.0};
    if (count < 2 || !(tau_max > 0.0)) throw ConfigError("make_tau_grid: bad parameters");
    const double lo = tau_max * 1e-3;
    for (int i = 0; i < count; ++i)
        taus.push_back(lo * std::pow(tau_max / lo, static_cast<double>(i) / (count - 1)));
    return taus;
}

inline double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Normalized leading-order mass prediction: alpha_n mu_n^{-1/4} renormalized.
inline std::vector<double> predicted_normalized_masses(const std::vector<double>& alpha,
                                                       const std::vector<double>& mu) {
    std::vector<double> m(alpha.size());
    double tot = 0.0;
    for (std::size_t n = 0; n < alpha.size(); ++n) {
        m[n] = alpha[n] * std::pow(mu[n], -0.25);
        tot += m[n];
    }
    for (auto& v : m) v /= tot;
    return m;
}

// The per-h half of the theorem comparison: evolve Psi(beta), compare with
// Psi(e^{-tau A0} beta) in L2 and at the level of well masses, and measure
// the L1 remainder at tau = 1 against the reduced density profile.
struct HComparison {
    ComparisonRow row;
    EvolutionResult evo;
    std::vector<std::vector<double>> alphas;    // reduced coefficients per tau
    std::vector<double> l2_errors;              // per tau
};

inline HComparison compare_at_h(const ExprAst& phi, const WellDecomposition& decomp,
                                const SymMatrix& A0, const EigenSystem& es,
                                const std::vector<double>& beta, double h,
                                const std::vector<double>& taus, double grid_a, double grid_b,
                                int grid_n, double eps0 = kDefaultEps0) {
    const Grid grid = grid_from_interval(phi, decomp, grid_a, grid_b, grid_n);
    auto prop = make_heat_propagator(assemble(phi, h, grid, decomp.phi0), decomp, eps0);
    const auto psis = make_psi_family(phi, decomp, grid, h);
    const auto u0 = prepare_initial(psis, beta);

    HComparison out;
    out.row.h = h;
    out.evo = heat_evolve(prop, decomp, psis, u0, taus);

    for (std::size_t it = 0; it < taus.size(); ++it) {
        auto alpha = reduced_evolve(es, A0, beta, taus[it]);
        auto diff = out.evo.states[it];
        for (std::size_t n = 0; n < psis.size(); ++n) axpy(-alpha[n], psis[n].vec, diff);
        const double l2 = l2_norm(grid, diff);
        out.l2_errors.push_back(l2);
        out.row.sup_l2_error = std::max(out.row.sup_l2_error, l2);

        const auto& m = out.evo.masses[it];
        double tot = 0.0;
        for (double v : m) tot += v;
        const auto pred = predicted_normalized_masses(alpha, decomp.mu);
        for (std::size_t n = 0; n < m.size(); ++n)
            out.row.sup_mass_error = std::max(out.row.sup_mass_error, std::fabs(m[n] / tot - pred[n]));
        out.alphas.push_back(std::move(alpha));
    }

    {
        const double tau_star = 1.0;
        const auto alpha = reduced_evolve(es, A0, beta, tau_star);
        auto u = propagate_t(prop, u0, tau_star / prop.nu_h);
        auto rho = to_density(prop, u);
        std::vector<double> profile(rho.size(), 0.0);
        const auto g = prop.w.zero_mode();
        for (std::size_t n = 0; n < psis.size(); ++n)
            for (std::size_t j = 0; j < rho.size(); ++j)
                profile[j] += alpha[n] * psis[n].vec[j] * g[j];
        std::vector<double> absdiff(rho.size());
        for (std::size_t j = 0; j < rho.size(); ++j) absdiff[j] = std::fabs(rho[j] - profile[j]);
        const std::vector<double> ones(rho.size(), 1.0);
        out.row.l1_error = l2_inner(grid, absdiff, ones);
    }
    return out;
}

// For each h in the list: run the comparison, then fit the error order in h.
inline ComparisonReport verify_theorem(const ExprAst& phi, const WellDecomposition& decomp,
                                       const std::vector<double>& beta,
                                       const std::vector<double>& h_list,
                                       const std::vector<double>& taus, double grid_a,
                                       double grid_b, int grid_n,
                                       double eps0 = kDefaultEps0) {
    if (!decomp.has_saddles()) throw ConfigError("verify_theorem: needs at least two wells");
    ComparisonReport rep;

    const SymMatrix A0 = build_A0(decomp.mu, decomp.nu);
    const EigenSystem es = sym_eigen(A0);
    rep.mu2 = es.values.size() > 1 ? es.values[1] : 0.0;

    for (double h : h_list)
        rep.rows.push_back(
            compare_at_h(phi, decomp, A0, es, beta, h, taus, grid_a, grid_b, grid_n, eps0).row);

    std::vector<double> hs, l2s, ms;
    for (const auto& r : rep.rows) {
        hs.push_back(r.h);
        l2s.push_back(r.sup_l2_error);
        ms.push_back(r.sup_mass_error);
    }
    if (hs.size() >= 2) {
        rep.fitted_l2_order = fit_log_slope(hs, l2s);
        rep.fitted_mass_order = fit_log_slope(hs, ms);
    }
    return rep;
}

} // namespace ksw
