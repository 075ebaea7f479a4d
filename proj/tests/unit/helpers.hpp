#pragma once

// Shared fixtures for the unit suite: canonical potentials, finite-difference
// oracles, and a least-squares slope fit used by the decay-rate checks.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "kswitten/expr.hpp"
#include "kswitten/landscape.hpp"

namespace ksw_test {

struct Landscape {
    ksw::ExprAst phi;
    ksw::Interval domain;
    std::vector<ksw::CriticalPoint> cps;
    ksw::WellDecomposition decomp;
};

inline Landscape make_landscape(const std::string& potential, double a, double b) {
    Landscape l;
    l.phi = ksw::parse_expr(potential);
    l.domain = {a, b};
    l.cps = ksw::find_critical_points(l.phi, l.domain);
    l.decomp = ksw::decompose_wells(l.phi, l.cps, l.domain);
    return l;
}

inline Landscape double_well() { return make_landscape("(x^2-1)^2", -2.5, 2.5); }
inline Landscape triple_well() { return make_landscape("x^2*(x^2-1)^2", -1.6, 1.6); }
inline Landscape single_well() { return make_landscape("x^2", -1.0, 1.0); }

// Central finite differences, the independent oracle for dual-number output.
inline double fd1(const ksw::ExprAst& f, double x, double step = 1e-5) {
    return (ksw::eval_value(f, x + step) - ksw::eval_value(f, x - step)) / (2.0 * step);
}

inline double fd2(const ksw::ExprAst& f, double x, double step = 1e-4) {
    return (ksw::eval_value(f, x + step) - 2.0 * ksw::eval_value(f, x) +
            ksw::eval_value(f, x - step)) /
           (step * step);
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Least-squares slope of log y against 1/h (positive = exponential decay).
inline double arrhenius_slope(const std::vector<double>& hs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double x = 1.0 / hs[i], y = std::log(ys[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace ksw_test
