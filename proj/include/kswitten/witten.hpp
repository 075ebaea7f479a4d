#pragma once

// Discrete Witten Laplacian in factorized form.  The first-order factor d is
// assembled so that d * exp(-(phi - phi0)/h) telescopes to zero exactly:
// row j carries -(h/dx) e^{(phi_j - phi_mid)/h} and +(h/dx) e^{(phi_{j+1} -
// phi_mid)/h} with phi_mid the midpoint value, so only differences of phi
// over one cell ever enter an exponent.  M = d^T d is then positive
// semi-definite with an exact known kernel, M1 = d d^T carries the one-form
// side, and the nonzero spectra of the two pair up.  Exponentially small
// eigenvalues are read off as squared singular values of the bidiagonal d
// via Golub-Kahan bisection, which keeps full relative accuracy ten orders
// of magnitude below ||M||.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kswitten/errors.hpp"
#include "kswitten/expr.hpp"
#include "kswitten/landscape.hpp"
#include "kswitten/linalg.hpp"

namespace ksw {

constexpr int kGridFloor = 501;
constexpr double kDefaultEps0 = 0.05;  // eigenvalue-count window [0, eps0*h]

struct Grid {
    double a = 0.0, b = 0.0;
    int n = 0;

    double dx() const { return (b - a) / (n - 1); }
    double node(int j) const { return a + j * dx(); }
    double mid(int j) const { return a + (j + 0.5) * dx(); }
};

// Smallest interval containing all wells with phi(a), phi(b) >= sigma1 + margin
// (default margin 2S), found by marching outward and bisecting.
inline Grid build_grid(const ExprAst& phi, const WellDecomposition& decomp, int n,
                       double margin = -1.0) {
    if (n < kGridFloor)
        throw ConfigError("build_grid: node count " + std::to_string(n) + " is below the floor " +
                          std::to_string(kGridFloor));

    double level;
    double left_start, right_start;
    if (decomp.has_saddles()) {
        if (margin < 0.0) margin = 2.0 * decomp.S;
        level = decomp.sigma1 + margin;
        left_start = decomp.wells.front().a;
        right_start = decomp.wells.back().b;
    } else {
        // Single well: no saddle level; truncate a fixed few units above the minimum.
        level = decomp.phi0 + (margin > 0.0 ? margin : 4.0);
        left_start = decomp.minima.front().location;
        right_start = decomp.minima.back().location;
    }

    const double width = std::max(right_start - left_start, 1.0);
    auto march = [&](double from, double dir) {
        double x = from, step = 0.05 * width;
        for (int it = 0; it < 500; ++it) {
            const double xn = x + dir * step;
            if (eval_value(phi, xn) >= level)
                return detail::bisect_level(phi, std::min(x, xn), std::max(x, xn), level);
            x = xn;
            step *= 1.3;
        }
        throw NumericError("build_grid: potential not confining within scan range");
    };

    Grid g;
    g.a = march(left_start, -1.0);
    g.b = march(right_start, +1.0);
    g.n = n;
    return g;
}

// Grid on a caller-chosen interval; still must truncate outside all wells.
inline Grid grid_from_interval(const ExprAst& phi, const WellDecomposition& decomp, double a,
                               double b, int n) {
    if (n < kGridFloor)
        throw ConfigError("grid: node count " + std::to_string(n) + " is below the floor " +
                          std::to_string(kGridFloor));
    if (!(b > a)) throw ConfigError("grid: empty interval");
    if (decomp.has_saddles()) {
        if (decomp.wells.front().a < a || decomp.wells.back().b > b)
            throw ConfigError("grid: interval does not contain all wells");
        if (eval_value(phi, a) < decomp.sigma1 || eval_value(phi, b) < decomp.sigma1)
            throw ConfigError("grid: phi at the interval ends must reach the saddle level");
    }
    return Grid{a, b, n};
}

struct DiscreteWitten {
    Grid grid;
    double h = 0.0;
    double phi0 = 0.0;
    std::vector<double> phi_node;   // n values
    std::vector<double> dlo, dhi;   // rows of d: dlo[j] at (j,j), dhi[j] at (j,j+1)
    std::vector<double> m_diag, m_off;    // M = d^T d, n x n tridiagonal
    std::vector<double> m1_diag, m1_off;  // M1 = d d^T, (n-1) x (n-1) tridiagonal

    int n() const { return grid.n; }
    int rows() const { return grid.n - 1; }

    std::vector<double> apply_d(const std::vector<double>& x) const {
        std::vector<double> y(static_cast<std::size_t>(rows()));
        for (int j = 0; j < rows(); ++j)
            y[static_cast<std::size_t>(j)] = dlo[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)] +
                                             dhi[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j + 1)];
        return y;
    }

    std::vector<double> apply_dT(const std::vector<double>& y) const {
        std::vector<double> x(static_cast<std::size_t>(n()), 0.0);
        for (int j = 0; j < rows(); ++j) {
            x[static_cast<std::size_t>(j)] += dlo[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(j + 1)] += dhi[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
        }
        return x;
    }

    std::vector<double> apply_M(const std::vector<double>& x) const { return apply_dT(apply_d(x)); }

    double m_norm_inf() const {
        double m = 0.0;
        for (int j = 0; j < n(); ++j) {
            double s = std::fabs(m_diag[static_cast<std::size_t>(j)]);
            if (j > 0) s += std::fabs(m_off[static_cast<std::size_t>(j - 1)]);
            if (j + 1 < n()) s += std::fabs(m_off[static_cast<std::size_t>(j)]);
            m = std::max(m, s);
        }
        return m;
    }

    // Exact kernel direction of d: the discrete Gibbs profile.
    std::vector<double> zero_mode() const {
        std::vector<double> g(static_cast<std::size_t>(n()));
        for (int j = 0; j < n(); ++j)
            g[static_cast<std::size_t>(j)] = std::exp(-(phi_node[static_cast<std::size_t>(j)] - phi0) / h);
        return g;
    }

    // Interleaved Golub-Kahan sequence of the wide bidiagonal d.
    std::vector<double> gk_sequence() const {
        std::vector<double> c;
        c.reserve(static_cast<std::size_t>(2 * rows()));
        for (int j = 0; j < rows(); ++j) {
            c.push_back(std::fabs(dlo[static_cast<std::size_t>(j)]));
            c.push_back(dhi[static_cast<std::size_t>(j)]);
        }
        return c;
    }
};

inline DiscreteWitten assemble(const ExprAst& phi, double h, const Grid& grid,
                               double phi0, double exp_guard = 500.0) {
    if (!(h > 0.0 && h <= 1.0)) throw ConfigError("assemble: h must lie in (0, 1]");
    DiscreteWitten w;
    w.grid = grid;
    w.h = h;
    w.phi0 = phi0;

    const int n = grid.n, p = n - 1;
    const double dx = grid.dx();
    const double scale = h / dx;

    w.phi_node.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) w.phi_node[static_cast<std::size_t>(j)] = eval_value(phi, grid.node(j));

    w.dlo.resize(static_cast<std::size_t>(p));
    w.dhi.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        const double pm = eval_value(phi, grid.mid(j));
        const double ea = (w.phi_node[static_cast<std::size_t>(j)] - pm) / h;
        const double eb = (w.phi_node[static_cast<std::size_t>(j + 1)] - pm) / h;
        if (std::fabs(ea) > exp_guard || std::fabs(eb) > exp_guard)
            throw NumericError("assemble: local exponent exceeds " + std::to_string(exp_guard) +
                               "; grid too coarse for h=" + std::to_string(h));
        w.dlo[static_cast<std::size_t>(j)] = -scale * std::exp(ea);
        w.dhi[static_cast<std::size_t>(j)] = scale * std::exp(eb);
    }

    w.m_diag.assign(static_cast<std::size_t>(n), 0.0);
    w.m_off.assign(static_cast<std::size_t>(p), 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        if (j < p) s += w.dlo[static_cast<std::size_t>(j)] * w.dlo[static_cast<std::size_t>(j)];
        if (j > 0) s += w.dhi[static_cast<std::size_t>(j - 1)] * w.dhi[static_cast<std::size_t>(j - 1)];
        w.m_diag[static_cast<std::size_t>(j)] = s;
    }
    for (int j = 0; j < p; ++j)
        w.m_off[static_cast<std::size_t>(j)] = w.dlo[static_cast<std::size_t>(j)] * w.dhi[static_cast<std::size_t>(j)];

    w.m1_diag.assign(static_cast<std::size_t>(p), 0.0);
    w.m1_off.assign(static_cast<std::size_t>(p > 0 ? p - 1 : 0), 0.0);
    for (int i = 0; i < p; ++i)
        w.m1_diag[static_cast<std::size_t>(i)] = w.dlo[static_cast<std::size_t>(i)] * w.dlo[static_cast<std::size_t>(i)] +
                                                 w.dhi[static_cast<std::size_t>(i)] * w.dhi[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < p; ++i)
        w.m1_off[static_cast<std::size_t>(i)] = w.dhi[static_cast<std::size_t>(i)] * w.dlo[static_cast<std::size_t>(i + 1)];

    return w;
}

inline DiscreteWitten assemble(const ExprAst& phi, double h, const Grid& grid) {
    double phi0 = HUGE_VAL;
    for (int j = 0; j < grid.n; ++j) phi0 = std::min(phi0, eval_value(phi, grid.node(j)));
    return assemble(phi, h, grid, phi0);
}

// ---------------------------------------------------------------------------
// Low spectrum

struct Spectrum {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // plain l2-orthonormal node samples
    int count_below = 0;                       // eigenvalues below threshold
    double threshold = 0.0;                    // eps0 * h
};

// Number of eigenvalues of M strictly below t: the structural zero mode plus
// the singular values of d below sqrt(t).
inline int eigenvalue_count_below(const DiscreteWitten& w, double t) {
    if (t <= 0.0) return 0;
    return 1 + gk_singular_count_below(w.gk_sequence(), w.rows(), std::sqrt(t));
}

// k smallest eigenvalues of M with high relative accuracy, eigenvectors by
// inverse iteration (the exact Gibbs kernel serves as the first vector).
inline Spectrum low_spectrum(const DiscreteWitten& w, int k, double eps0 = kDefaultEps0) {
    if (k < 1 || k > 20) throw ConfigError("low_spectrum: k must lie in [1, 20]");
    if (k > w.n()) throw ConfigError("low_spectrum: k exceeds matrix order");

    Spectrum sp;
    sp.threshold = eps0 * w.h;

    // d has full row rank, so its p singular values are exactly the nonzero
    // eigenvalues of M; the remaining eigenvalue is the structural zero of
    // the one-dimensional kernel (the discrete Gibbs state).
    const auto seq = w.gk_sequence();
    const int p = w.rows();
    sp.values.reserve(static_cast<std::size_t>(k));
    sp.values.push_back(0.0);
    for (int i = 1; i < k; ++i) {
        const double s = gk_singular_value(seq, p, i);
        sp.values.push_back(s * s);
    }
    sp.count_below = eigenvalue_count_below(w, sp.threshold);

    // Vectors: normalized Gibbs state first, then inverse iteration.
    std::vector<double> g = w.zero_mode();
    const double gn = norm2(g);
    for (auto& x : g) x /= gn;
    sp.vectors.push_back(g);

    const double res_tol = 1e-12 * std::max(w.m_norm_inf(), DBL_MIN);
    for (int i = 1; i < k; ++i) {
        auto v = tridiag_inverse_iteration(w.m_diag, w.m_off, sp.values[static_cast<std::size_t>(i)],
                                           sp.vectors, res_tol);
        sp.vectors.push_back(std::move(v));
    }
    return sp;
}

// Eigenvalues of the one-form operator M1 = d d^T through its own bidiagonal
// Cholesky factor, computed by a cancellation-free qd-style recurrence so
// that even exponentially small eigenvalues keep relative accuracy.  This is
// the independent route used to confirm the supersymmetric pairing with the
// spectrum of M.
inline std::vector<double> one_form_eigenvalues(const DiscreteWitten& w, int k) {
    const int p = w.rows();
    if (k < 1 || k > p) throw ConfigError("one_form_eigenvalues: bad count");

    std::vector<double> cdiag(static_cast<std::size_t>(p)), csub(static_cast<std::size_t>(p > 0 ? p - 1 : 0));
    double q = w.dlo[0] * w.dlo[0];
    for (int j = 0; j < p; ++j) {
        const double b2 = w.dhi[static_cast<std::size_t>(j)] * w.dhi[static_cast<std::size_t>(j)];
        const double c2 = q + b2;
        cdiag[static_cast<std::size_t>(j)] = std::sqrt(c2);
        if (j + 1 < p) {
            const double a_next = w.dlo[static_cast<std::size_t>(j + 1)];
            csub[static_cast<std::size_t>(j)] = w.dhi[static_cast<std::size_t>(j)] * std::fabs(a_next) /
                                                cdiag[static_cast<std::size_t>(j)];
            q = a_next * a_next * (q / c2);
        }
    }

    std::vector<double> seq;
    seq.reserve(static_cast<std::size_t>(2 * p - 1));
    for (int j = 0; j < p; ++j) {
        seq.push_back(cdiag[static_cast<std::size_t>(j)]);
        if (j + 1 < p) seq.push_back(csub[static_cast<std::size_t>(j)]);
    }

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) {
        const double s = gk_singular_value(seq, p, i);
        out.push_back(s * s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quasi-modes

enum class QuasiModeKind { ZeroForm, OneForm };

struct QuasiMode {
    QuasiModeKind kind = QuasiModeKind::ZeroForm;
    int index = 0;                 // well or saddle index, 0-based
    double h = 0.0;
    std::vector<double> vec;       // node samples (zero-form) or midpoint samples (one-form)
    double normalization = 0.0;    // c_n(h) or d_k(h)
    double cutoff = 0.0;           // eps_cut or delta0
};

// C-infinity transition built from exp(-1/t): 0 for t <= 0, 1 for t >= 1.
inline double smoothstep_bump(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

inline std::vector<double> trapezoid_weights(const Grid& g) {
    std::vector<double> w(static_cast<std::size_t>(g.n), g.dx());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

inline double l2_inner(const Grid& g, const std::vector<double>& u, const std::vector<double>& v) {
    const double dx = g.dx();
    double s = 0.5 * (u.front() * v.front() + u.back() * v.back());
    for (std::size_t j = 1; j + 1 < u.size(); ++j) s += u[j] * v[j];
    return s * dx;
}

inline double l2_norm(const Grid& g, const std::vector<double>& u) {
    return std::sqrt(l2_inner(g, u, u));
}

inline double mid_inner(const Grid& g, const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * v[j];
    return s * g.dx();
}

inline double default_eps_cut(const ExprAst& phi, const WellDecomposition& d, double delta0) {
    double eps = d.S / 8.0;
    for (const auto& s : d.saddles) {
        const double lvl = std::max(eval_value(phi, s.location - 0.4 * delta0),
                                    eval_value(phi, s.location + 0.4 * delta0));
        eps = std::min(eps, 0.95 * 0.5 * (d.sigma1 - lvl));
    }
    if (!(eps > 0.0)) throw NumericError("default_eps_cut: saddle geometry leaves no room for a cutoff");
    return eps;
}

inline double default_delta0(const WellDecomposition& d) {
    double cap = HUGE_VAL;
    const auto& s = d.saddles;
    for (std::size_t k = 0; k + 1 < s.size(); ++k)
        cap = std::min(cap, s[k + 1].location - s[k].location);
    if (!s.empty()) {
        cap = std::min(cap, s.front().location - d.wells.front().a);
        cap = std::min(cap, d.wells.back().b - s.back().location);
    }
    return 0.5 * cap;
}

// f_n = h^{-1/4} c_n(h) chi_n exp(-(phi - phi0)/h) on the nodes, unit L2 norm
// (trapezoid).  chi_n is 1 on {phi <= sigma1 - 2 eps} inside E_n and
// supported in {phi <= sigma1 - eps} inside E_n.
inline QuasiMode quasimode0(const ExprAst& phi, const WellDecomposition& d, const Grid& grid,
                            int well, double h, double eps_cut) {
    if (!d.has_saddles()) throw ConfigError("quasimode0: needs at least two wells");
    if (well < 0 || well >= d.well_count()) throw ConfigError("quasimode0: well index out of range");
    if (!(2.0 * eps_cut < d.S))
        throw ConfigError("quasimode0: cutoff plateau empty (eps_cut too large for the barrier)");

    const Interval E = d.wells[static_cast<std::size_t>(well)];
    const double plateau = d.sigma1 - 2.0 * eps_cut;
    const double support = d.sigma1 - eps_cut;

    QuasiMode q;
    q.kind = QuasiModeKind::ZeroForm;
    q.index = well;
    q.h = h;
    q.cutoff = eps_cut;
    q.vec.assign(static_cast<std::size_t>(grid.n), 0.0);

    bool plateau_hit = false;
    for (int j = 0; j < grid.n; ++j) {
        const double x = grid.node(j);
        if (!(x > E.a && x < E.b)) continue;
        const double lvl = eval_value(phi, x);
        double chi;
        if (lvl <= plateau) {
            chi = 1.0;
            plateau_hit = true;
        } else if (lvl >= support) {
            chi = 0.0;
        } else {
            chi = smoothstep_bump((support - lvl) / eps_cut);
        }
        q.vec[static_cast<std::size_t>(j)] = chi * std::exp(-(lvl - d.phi0) / h);
    }
    if (!plateau_hit)
        throw NumericError("quasimode0: no grid node on the cutoff plateau (grid too coarse?)");

    const double nrm = l2_norm(grid, q.vec);
    if (!(nrm > 0.0)) throw NumericError("quasimode0: vanishing quasi-mode");
    for (auto& v : q.vec) v /= nrm;
    q.normalization = std::pow(h, 0.25) / nrm;
    return q;
}

// f_k = h^{-1/4} d_k(h) theta_k exp((phi - sigma1)/h) on the midpoints,
// unit L2 norm.  theta_k is 1 on |x - s_k| <= delta0/2 and supported in
// |x - s_k| <= delta0.
inline QuasiMode quasimode1(const ExprAst& phi, const WellDecomposition& d, const Grid& grid,
                            int saddle, double h, double delta0) {
    if (!d.has_saddles()) throw ConfigError("quasimode1: no saddles");
    if (saddle < 0 || saddle >= static_cast<int>(d.saddles.size()))
        throw ConfigError("quasimode1: saddle index out of range");
    for (std::size_t k = 0; k + 1 < d.saddles.size(); ++k)
        if (d.saddles[k + 1].location - d.saddles[k].location <= 2.0 * delta0)
            throw ConfigError("quasimode1: overlapping theta supports (delta0 too large)");

    const double s = d.saddles[static_cast<std::size_t>(saddle)].location;

    QuasiMode q;
    q.kind = QuasiModeKind::OneForm;
    q.index = saddle;
    q.h = h;
    q.cutoff = delta0;
    q.vec.assign(static_cast<std::size_t>(grid.n - 1), 0.0);

    for (int j = 0; j < grid.n - 1; ++j) {
        const double x = grid.mid(j);
        const double r = std::fabs(x - s);
        if (r >= delta0) continue;
        const double theta = r <= 0.5 * delta0 ? 1.0 : smoothstep_bump((delta0 - r) / (0.5 * delta0));
        q.vec[static_cast<std::size_t>(j)] = theta * std::exp((eval_value(phi, x) - d.sigma1) / h);
    }

    const double nrm = std::sqrt(mid_inner(grid, q.vec, q.vec));
    if (!(nrm > 0.0)) throw NumericError("quasimode1: vanishing quasi-mode");
    for (auto& v : q.vec) v /= nrm;
    q.normalization = std::pow(h, 0.25) / nrm;
    return q;
}

// Interaction matrix: hatL_{ij} = <f_i^(1), d f_j^(0)> over the midpoints.
inline Mat hat_L(const DiscreteWitten& w, const std::vector<QuasiMode>& zero_forms,
                 const std::vector<QuasiMode>& one_forms) {
    const int N = static_cast<int>(zero_forms.size());
    const int K = static_cast<int>(one_forms.size());
    for (const auto& q : zero_forms)
        if (q.h != w.h || q.kind != QuasiModeKind::ZeroForm)
            throw ConfigError("hat_L: inconsistent zero-form quasimodes");
    for (const auto& q : one_forms)
        if (q.h != w.h || q.kind != QuasiModeKind::OneForm)
            throw ConfigError("hat_L: inconsistent one-form quasimodes");

    Mat L(K, N);
    for (int j = 0; j < N; ++j) {
        const auto df = w.apply_d(zero_forms[static_cast<std::size_t>(j)].vec);
        for (int i = 0; i < K; ++i)
            L.at(i, j) = mid_inner(w.grid, one_forms[static_cast<std::size_t>(i)].vec, df);
    }
    return L;
}

// ---------------------------------------------------------------------------
// Effective matrix

struct EffectiveMatrix {
    SymMatrix m_eff;                        // <e_n, M e_m> in the aligned basis
    SymMatrix a_num;                        // m_eff / (h e^{-2S/h})
    std::vector<double> projection_defect;  // ||Pi f_n - f_n|| per quasimode
};

// Project the zero-form quasimodes onto the span of the low eigenvectors,
// orthonormalize in index order, and read off the matrix of M in that basis.
// The quadratic form is evaluated through the factor (<d e_n, d e_m>), which
// is what keeps entries of size h e^{-2S/h} meaningful.
inline EffectiveMatrix effective_matrix(const DiscreteWitten& w, const Spectrum& sp,
                                        const std::vector<QuasiMode>& zero_forms, double S) {
    const int N = static_cast<int>(zero_forms.size());
    if (static_cast<int>(sp.vectors.size()) < N)
        throw ConfigError("effective_matrix: spectrum must contain at least N eigenpairs");

    const double sqdx = std::sqrt(w.grid.dx());
    EffectiveMatrix out;
    out.projection_defect.resize(static_cast<std::size_t>(N));

    std::vector<std::vector<double>> basis; // plain-normalized, orthonormal
    for (int nq = 0; nq < N; ++nq) {
        std::vector<double> f = zero_forms[static_cast<std::size_t>(nq)].vec;
        for (auto& x : f) x *= sqdx; // function samples -> plain unit vector

        std::vector<double> proj(f.size(), 0.0);
        for (int k = 0; k < N; ++k) {
            const auto& v = sp.vectors[static_cast<std::size_t>(k)];
            axpy(dot(v, f), v, proj);
        }
        {
            std::vector<double> defect = proj;
            axpy(-1.0, f, defect);
            out.projection_defect[static_cast<std::size_t>(nq)] = norm2(defect);
        }
        if (norm2(proj) < 0.5)
            throw NumericError("effective_matrix: quasimode " + std::to_string(nq + 1) +
                               " barely overlaps the low eigenspace (projection rank-deficient)");
        for (const auto& e : basis) axpy(-dot(e, proj), e, proj);
        const double nr = norm2(proj);
        if (nr < 1e-8)
            throw NumericError("effective_matrix: Gram-Schmidt breakdown at quasimode " +
                               std::to_string(nq + 1));
        for (auto& x : proj) x /= nr;
        basis.push_back(std::move(proj));
    }

    std::vector<std::vector<double>> dbasis;
    dbasis.reserve(static_cast<std::size_t>(N));
    for (const auto& e : basis) dbasis.push_back(w.apply_d(e));

    out.m_eff = SymMatrix(N);
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
            out.m_eff.set(i, j, dot(dbasis[static_cast<std::size_t>(i)], dbasis[static_cast<std::size_t>(j)]));

    const double nu_h = w.h * std::exp(-2.0 * S / w.h);
    out.a_num = SymMatrix(N);
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) out.a_num.set(i, j, out.m_eff.at(i, j) / nu_h);
    return out;
}

} // namespace ksw
