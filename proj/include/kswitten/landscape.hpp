#pragma once

// Critical-point analysis of the potential: locate and classify the minima
// and maxima, check the standing hypotheses (Morse, equal well depths, equal
// saddle heights, growth toward the domain ends), and decompose the sublevel
// set {phi < sigma_1} into wells E_n with the Hessian data mu_n, nu_k and the
// Arrhenius number S = sigma_1 - phi_0.

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "kswitten/errors.hpp"
#include "kswitten/expr.hpp"

namespace ksw {

struct Interval {
    double a = 0.0, b = 0.0;
    double length() const { return b - a; }
};

enum class CriticalKind { Minimum, Maximum };

struct CriticalPoint {
    double location = 0.0;
    double value = 0.0;             // phi at the point
    double second_derivative = 0.0;
    CriticalKind kind = CriticalKind::Minimum;
};

struct LandscapeTols {
    double newton_tol = 1e-12;
    double degeneracy_tol = 1e-8;
    double equal_height_tol = 1e-9;
    double merge_tol = 1e-6;
};

struct AssumptionReport {
    bool morse_ok = false;
    bool equal_minima_ok = false;
    bool equal_saddles_ok = false;
    bool growth_ok = false;
    std::vector<std::string> diagnostics;

    bool ok() const { return morse_ok && equal_minima_ok && equal_saddles_ok && growth_ok; }
};

struct WellDecomposition {
    std::vector<CriticalPoint> minima;   // sorted by location
    std::vector<CriticalPoint> saddles;  // the N-1 interior maxima
    std::vector<Interval> wells;         // E_n, pairwise disjoint, m_n in E_n
    double phi0 = 0.0;                   // global minimum value
    double sigma1 = std::numeric_limits<double>::infinity(); // common saddle value
    double S = std::numeric_limits<double>::infinity();      // sigma1 - phi0
    std::vector<double> mu;              // phi''(m_n) > 0
    std::vector<double> nu;              // -phi''(s_k) > 0

    int well_count() const { return static_cast<int>(minima.size()); }
    bool has_saddles() const { return !saddles.empty(); }
};

namespace detail {

inline std::string fmt_loc(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// Safeguarded Newton on phi' within a sign-change bracket.
inline double refine_critical_point(const ExprAst& phi, double lo, double hi,
                                    double newton_tol) {
    double flo = eval_d2(phi, lo).d1;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const Dual2 d = eval_d2(phi, x);
        if (!d.finite())
            throw NumericError("critical point refinement hit a non-finite value near x=" + fmt_loc(x));
        if (std::fabs(d.d1) <= newton_tol) return x;
        double step = d.d2 != 0.0 ? -d.d1 / d.d2 : 0.0;
        double xn = x + step;
        if (!(xn > lo && xn < hi) || step == 0.0)
            xn = 0.5 * (lo + hi); // fall back to bisection inside the bracket
        if ((d.d1 > 0.0) == (flo > 0.0)) lo = x; else hi = x;
        x = xn;
        if (hi - lo < 1e-300) break;
    }
    const Dual2 d = eval_d2(phi, x);
    if (std::fabs(d.d1) <= newton_tol * 1e3) return x;
    throw NumericError("Newton did not converge to a critical point near x=" + fmt_loc(x));
}

// Root of phi - level inside a bracket where phi - level changes sign.
inline double bisect_level(const ExprAst& phi, double lo, double hi, double level) {
    double flo = eval_value(phi, lo) - level;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = eval_value(phi, mid) - level;
        if ((f > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = f;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * (1.0 + std::fabs(lo) + std::fabs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Scan phi' for sign changes on a uniform grid over the domain, refine each
// by Newton, classify by phi''.  Returned points are sorted and alternate in
// kind.
inline std::vector<CriticalPoint> find_critical_points(const ExprAst& phi, Interval domain,
                                                       int n_scan = 2000,
                                                       double newton_tol = 1e-12,
                                                       double merge_tol = 1e-6) {
    if (n_scan < 100) throw ConfigError("find_critical_points: n_scan must be >= 100");
    if (!(domain.b > domain.a)) throw ConfigError("find_critical_points: empty domain");

    const double dx = domain.length() / n_scan;
    std::vector<CriticalPoint> cps;
    auto record = [&](double loc) {
        const Dual2 at = eval_d2(phi, loc);
        CriticalPoint cp;
        cp.location = loc;
        cp.value = at.v;
        cp.second_derivative = at.d2;
        cp.kind = at.d2 > 0.0 ? CriticalKind::Minimum : CriticalKind::Maximum;
        cps.push_back(cp);
    };

    double xprev = domain.a;
    double dprev = eval_d2(phi, xprev).d1;
    for (int i = 1; i <= n_scan; ++i) {
        const double x = domain.a + i * dx;
        const double d = eval_d2(phi, x).d1;
        if (!std::isfinite(d))
            throw NumericError("potential derivative non-finite at x=" + detail::fmt_loc(x));
        if (d == 0.0) {
            // Exact zero on a scan node is itself the crossing; flip the
            // carried sign so the next interval is not double-counted.
            if (dprev == 0.0)
                throw HypothesisError("phi' vanishes on consecutive scan nodes near x=" +
                                      detail::fmt_loc(x) + "; landscape is degenerate");
            record(x);
            xprev = x;
            dprev = -dprev;
            continue;
        }
        if (dprev != 0.0 && (d > 0.0) != (dprev > 0.0))
            record(detail::refine_critical_point(phi, xprev, x, newton_tol));
        xprev = x;
        dprev = d;
    }

    for (std::size_t i = 1; i < cps.size(); ++i) {
        if (cps[i].location - cps[i - 1].location < merge_tol)
            throw HypothesisError("two critical points merge near x=" +
                                  detail::fmt_loc(cps[i].location) + "; landscape is degenerate");
        if (cps[i].kind == cps[i - 1].kind)
            throw HypothesisError("critical point kinds fail to alternate near x=" +
                                  detail::fmt_loc(cps[i].location) +
                                  " (degenerate potential or scan grid too coarse)");
    }
    return cps;
}

inline AssumptionReport validate_assumptions(const ExprAst& phi,
                                             const std::vector<CriticalPoint>& cps,
                                             Interval domain,
                                             const LandscapeTols& tols = {}) {
    AssumptionReport rep;

    rep.morse_ok = true;
    for (const auto& cp : cps) {
        if (std::fabs(cp.second_derivative) <= tols.degeneracy_tol) {
            rep.morse_ok = false;
            rep.diagnostics.push_back("degenerate critical point at x=" +
                                      detail::fmt_loc(cp.location) + " (|phi''| = " +
                                      detail::fmt_loc(std::fabs(cp.second_derivative)) + ")");
        }
    }

    double phi0 = std::numeric_limits<double>::infinity();
    double sigma1 = -std::numeric_limits<double>::infinity();
    bool any_min = false, any_max = false;
    for (const auto& cp : cps) {
        if (cp.kind == CriticalKind::Minimum) {
            phi0 = std::min(phi0, cp.value);
            any_min = true;
        } else {
            sigma1 = std::max(sigma1, cp.value);
            any_max = true;
        }
    }

    rep.equal_minima_ok = true;
    if (any_min) {
        for (const auto& cp : cps) {
            if (cp.kind != CriticalKind::Minimum) continue;
            if (std::fabs(cp.value - phi0) > tols.equal_height_tol) {
                rep.equal_minima_ok = false;
                rep.diagnostics.push_back("well at x=" + detail::fmt_loc(cp.location) +
                                          " sits " + detail::fmt_loc(cp.value - phi0) +
                                          " above the deepest minimum");
            }
        }
    } else {
        rep.equal_minima_ok = false;
        rep.diagnostics.push_back("no minimum found in the domain");
    }

    rep.equal_saddles_ok = true;
    if (any_max) {
        for (const auto& cp : cps) {
            if (cp.kind != CriticalKind::Maximum) continue;
            if (std::fabs(cp.value - sigma1) > tols.equal_height_tol) {
                rep.equal_saddles_ok = false;
                rep.diagnostics.push_back("saddle at x=" + detail::fmt_loc(cp.location) +
                                          " sits " + detail::fmt_loc(sigma1 - cp.value) +
                                          " below the highest saddle");
            }
        }
    }

    // Sampled stand-in for confinement at infinity: phi' sign-definite and
    // phi above the saddle level toward both ends of the domain.
    rep.growth_ok = true;
    if (!cps.empty()) {
        const double left_cp = cps.front().location;
        const double right_cp = cps.back().location;
        const int samples = 32;
        for (int i = 1; i <= samples; ++i) {
            const double t = static_cast<double>(i) / (samples + 1);
            const double xl = left_cp + t * (domain.a - left_cp);
            const double xr = right_cp + t * (domain.b - right_cp);
            if (eval_d2(phi, xl).d1 >= 0.0) {
                rep.growth_ok = false;
                rep.diagnostics.push_back("phi fails to grow toward the left end near x=" +
                                          detail::fmt_loc(xl));
                break;
            }
            if (eval_d2(phi, xr).d1 <= 0.0) {
                rep.growth_ok = false;
                rep.diagnostics.push_back("phi fails to grow toward the right end near x=" +
                                          detail::fmt_loc(xr));
                break;
            }
        }
        if (rep.growth_ok && any_max) {
            if (eval_value(phi, domain.a) < sigma1 || eval_value(phi, domain.b) < sigma1) {
                rep.growth_ok = false;
                rep.diagnostics.push_back("phi stays below the saddle level at a domain end; "
                                          "enlarge the domain");
            }
        }
    } else {
        rep.growth_ok = false;
        rep.diagnostics.push_back("no critical points found in the domain");
    }

    return rep;
}

// Wells are the connected components of {phi < sigma_1}: interior boundaries
// are the saddles themselves, outer boundaries come from bisecting
// phi = sigma_1 beyond the extreme minima.
inline WellDecomposition decompose_wells(const ExprAst& phi,
                                         const std::vector<CriticalPoint>& cps,
                                         Interval domain) {
    WellDecomposition d;
    for (const auto& cp : cps) {
        if (cp.kind == CriticalKind::Minimum) d.minima.push_back(cp);
        else d.saddles.push_back(cp);
    }
    if (d.minima.empty()) throw HypothesisError("decompose_wells: no minima");

    d.phi0 = std::numeric_limits<double>::infinity();
    for (const auto& m : d.minima) d.phi0 = std::min(d.phi0, m.value);
    for (const auto& m : d.minima) d.mu.push_back(m.second_derivative);

    const int N = d.well_count();
    if (!d.has_saddles()) {
        if (N != 1) throw HypothesisError("multiple minima but no interior saddle");
        // Single well: no barrier, S reported as +infinity.
        d.wells.push_back({domain.a, domain.b});
        return d;
    }

    if (static_cast<int>(d.saddles.size()) != N - 1)
        throw HypothesisError("expected " + std::to_string(N - 1) + " saddles for " +
                              std::to_string(N) + " wells, found " +
                              std::to_string(d.saddles.size()));

    d.sigma1 = -std::numeric_limits<double>::infinity();
    for (const auto& s : d.saddles) {
        d.sigma1 = std::max(d.sigma1, s.value);
        d.nu.push_back(-s.second_derivative);
    }
    d.S = d.sigma1 - d.phi0;
    if (!(d.S > 0.0)) throw HypothesisError("nonpositive barrier: sigma1 <= phi0");

    if (eval_value(phi, domain.a) < d.sigma1 || eval_value(phi, domain.b) < d.sigma1)
        throw HypothesisError("wells are not contained in the domain (phi < sigma1 at an end)");
    const double left_outer = detail::bisect_level(phi, domain.a, d.minima.front().location, d.sigma1);
    const double right_outer = detail::bisect_level(phi, d.minima.back().location, domain.b, d.sigma1);

    for (int n = 0; n < N; ++n) {
        Interval E;
        E.a = n == 0 ? left_outer : d.saddles[static_cast<std::size_t>(n - 1)].location;
        E.b = n == N - 1 ? right_outer : d.saddles[static_cast<std::size_t>(n)].location;
        int inside = 0;
        for (const auto& m : d.minima)
            if (m.location > E.a && m.location < E.b) ++inside;
        if (inside != 1)
            throw HypothesisError("well " + std::to_string(n + 1) + " contains " +
                                  std::to_string(inside) + " minima; expected exactly one");
        d.wells.push_back(E);
    }
    return d;
}

} // namespace ksw
