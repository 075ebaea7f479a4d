#pragma once

// Dense and structured linear algebra used throughout: cyclic Jacobi for
// small dense symmetric matrices, implicit-shift QL for symmetric
// tridiagonals, Golub-Kahan bisection for bidiagonal singular values (high
// relative accuracy even for exponentially small values), and a shifted
// tridiagonal solver driving inverse iteration.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "kswitten/errors.hpp"

namespace ksw {

// Dense rectangular matrix, row-major.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

// Dense symmetric matrix.  Construction enforces symmetry; set() writes both
// triangles.
struct SymMatrix {
    int n = 0;
    std::vector<double> a;

    SymMatrix() = default;
    explicit SymMatrix(int order) : n(order), a(static_cast<std::size_t>(order) * order, 0.0) {}

    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
    void set(int i, int j, double v) {
        a[static_cast<std::size_t>(i) * n + j] = v;
        a[static_cast<std::size_t>(j) * n + i] = v;
    }

    double norm_inf() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += std::fabs(at(i, j));
            m = std::max(m, s);
        }
        return m;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += at(i, j) * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
        return y;
    }
};

inline Mat matmul(const Mat& A, const Mat& B) {
    Mat C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
        }
    return C;
}

inline Mat transpose(const Mat& A) {
    Mat T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
    return T;
}

// Eigenvalues ascending; vectors stored column-wise (vector k at
// vectors[j * n + k] for row j), orthonormal.
struct EigenSystem {
    int n = 0;
    std::vector<double> values;
    std::vector<double> vectors;

    double vec(int row, int k) const { return vectors[static_cast<std::size_t>(row) * n + k]; }
    std::vector<double> column(int k) const {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = vec(j, k);
        return v;
    }
};

namespace detail {

inline void sort_eigen(EigenSystem& es) {
    const int n = es.n;
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return es.values[static_cast<std::size_t>(a)] <
                                                es.values[static_cast<std::size_t>(b)]; });
    EigenSystem out;
    out.n = n;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        out.values[static_cast<std::size_t>(k)] = es.values[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        for (int j = 0; j < n; ++j)
            out.vectors[static_cast<std::size_t>(j) * n + k] = es.vec(j, idx[static_cast<std::size_t>(k)]);
    }
    es = std::move(out);
}

} // namespace detail

// Cyclic Jacobi rotations.  Backward stable and relatively accurate for the
// small dense symmetric matrices that appear here (reduced models, graph
// Laplacians, effective matrices); order stays well below a thousand.
inline EigenSystem jacobi_eigen(const SymMatrix& M, int max_sweeps = 64) {
    const int n = M.n;
    EigenSystem es;
    es.n = n;
    es.values.resize(static_cast<std::size_t>(n));
    es.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    if (n == 0) return es;

    std::vector<double> A = M.a;
    auto a = [&](int i, int j) -> double& { return A[static_cast<std::size_t>(i) * n + j]; };
    std::vector<double>& V = es.vectors;
    for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i) * n + i] = 1.0;

    double frob2 = 0.0;
    for (double x : A) frob2 += x * x;
    const double stop = 1e-30 * std::max(frob2, DBL_MIN);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off2 = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off2 += 2.0 * a(p, q) * a(p, q);
        if (off2 <= stop) {
            for (int i = 0; i < n; ++i) es.values[static_cast<std::size_t>(i)] = a(i, i);
            detail::sort_eigen(es);
            return es;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p), aqq = a(q, q);
                if (std::fabs(apq) < 1e-18 * (std::fabs(app) + std::fabs(aqq)) && sweep > 0) continue;
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V[static_cast<std::size_t>(k) * n + p];
                    const double vkq = V[static_cast<std::size_t>(k) * n + q];
                    V[static_cast<std::size_t>(k) * n + p] = c * vkp - s * vkq;
                    V[static_cast<std::size_t>(k) * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    throw NumericError("jacobi_eigen: no convergence after " + std::to_string(max_sweeps) + " sweeps");
}

// Implicit-shift QL for a symmetric tridiagonal (diag, off), with optional
// eigenvector accumulation.  Absolute-accuracy workhorse behind the full
// spectral propagator; exponentially small eigenvalues instead go through
// the bidiagonal bisection below.
inline EigenSystem tridiag_eigen(std::vector<double> diag, std::vector<double> off,
                                 bool want_vectors = true) {
    const int n = static_cast<int>(diag.size());
    EigenSystem es;
    es.n = n;
    if (n == 0) return es;
    off.resize(static_cast<std::size_t>(n), 0.0); // e[i] couples i and i+1; e[n-1] spare

    std::vector<double>& z = es.vectors;
    if (want_vectors) {
        z.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
    }

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        for (;;) {
            int m = l;
            for (; m < n - 1; ++m) {
                const double dd = std::fabs(diag[static_cast<std::size_t>(m)]) +
                                  std::fabs(diag[static_cast<std::size_t>(m + 1)]);
                if (std::fabs(off[static_cast<std::size_t>(m)]) <= DBL_EPSILON * dd) break;
            }
            if (m == l) break;
            if (++iter > 60)
                throw NumericError("tridiag_eigen: QL iteration cap reached");
            double g = (diag[static_cast<std::size_t>(l + 1)] - diag[static_cast<std::size_t>(l)]) /
                       (2.0 * off[static_cast<std::size_t>(l)]);
            double r = std::hypot(g, 1.0);
            g = diag[static_cast<std::size_t>(m)] - diag[static_cast<std::size_t>(l)] +
                off[static_cast<std::size_t>(l)] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
            double s = 1.0, c = 1.0, p = 0.0;
            for (int i = m - 1; i >= l; --i) {
                double f = s * off[static_cast<std::size_t>(i)];
                const double b = c * off[static_cast<std::size_t>(i)];
                r = std::hypot(f, g);
                off[static_cast<std::size_t>(i + 1)] = r;
                if (r == 0.0) {
                    diag[static_cast<std::size_t>(i + 1)] -= p;
                    off[static_cast<std::size_t>(m)] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[static_cast<std::size_t>(i + 1)] - p;
                r = (diag[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[static_cast<std::size_t>(i + 1)] = g + p;
                g = c * r - b;
                if (want_vectors) {
                    for (int k = 0; k < n; ++k) {
                        f = z[static_cast<std::size_t>(k) * n + i + 1];
                        z[static_cast<std::size_t>(k) * n + i + 1] = s * z[static_cast<std::size_t>(k) * n + i] + c * f;
                        z[static_cast<std::size_t>(k) * n + i] = c * z[static_cast<std::size_t>(k) * n + i] - s * f;
                    }
                }
            }
            if (r == 0.0 && m - 1 >= l) continue;
            diag[static_cast<std::size_t>(l)] -= p;
            off[static_cast<std::size_t>(l)] = g;
            off[static_cast<std::size_t>(m)] = 0.0;
        }
    }

    es.values = std::move(diag);
    if (!want_vectors) {
        std::sort(es.values.begin(), es.values.end());
        return es;
    }
    detail::sort_eigen(es);
    return es;
}

// ---------------------------------------------------------------------------
// Golub-Kahan bisection.
//
// For a bidiagonal factor given by its interleaved entry sequence c (diagonal
// and superdiagonal alternating), the zero-diagonal symmetric tridiagonal
// with off-diagonals c[0], c[1], ... has eigenvalues {+/- sigma_i} plus
// zeros, where sigma_i are the singular values.  Sturm counts on that matrix
// determine every sigma to full relative accuracy, which is what makes
// eigenvalues of size 1e-13 * ||M|| trustworthy.

// Number of eigenvalues of the zero-diagonal tridiagonal strictly below x.
inline int gk_count_below(const std::vector<double>& c, double x) {
    const double pivmin = DBL_MIN / DBL_EPSILON;
    double d = -x;
    int cnt = d < 0.0 ? 1 : 0;
    for (double ci : c) {
        if (std::fabs(d) < pivmin) d = -pivmin;
        d = -x - (ci * ci) / d;
        if (d < 0.0) ++cnt;
    }
    return cnt;
}

// Number of singular values strictly below s > 0, given the interleaved
// sequence and the total count of singular values it encodes.
inline int gk_singular_count_below(const std::vector<double>& c, int n_sigma, double s) {
    const int size = static_cast<int>(c.size()) + 1;
    return gk_count_below(c, s) - (size - n_sigma);
}

// k-th smallest singular value (1-based) by bisection: additive until the
// bracket detaches from zero, then multiplicative for full relative accuracy.
// Probing a point that coincides exactly with a sequence entry can hit an
// exact zero pivot mid-recurrence and corrupt the inertia by one, so the
// initial bracket is jittered off that resonance and the converged value is
// re-counted from both sides, retrying with a fresh jitter if it fails.
inline double gk_singular_value(const std::vector<double>& c, int n_sigma, int k) {
    double top = 0.0;
    for (double ci : c) top = std::max(top, std::fabs(ci));

    for (int attempt = 0; attempt < 4; ++attempt) {
        double hi = top * (2.0 + 1.37e-7 * (attempt + 1)) + DBL_MIN;
        double lo = 0.0;
        if (gk_singular_count_below(c, n_sigma, hi) < k)
            hi *= 2.0; // safety; Gershgorin already covers the spectrum
        for (int it = 0; it < 4000; ++it) {
            double mid;
            if (lo > 0.0) {
                if (hi - lo <= 8.0 * DBL_EPSILON * hi) break;
                mid = std::sqrt(lo) * std::sqrt(hi);
            } else {
                if (hi < 1e-290) break;
                mid = 0.5 * hi;
            }
            if (mid <= lo || mid >= hi) break;
            if (gk_singular_count_below(c, n_sigma, mid) >= k) hi = mid;
            else lo = mid;
        }
        const double s = 0.5 * (lo + hi);
        const double above = s + 4.0 * DBL_EPSILON * s + DBL_MIN;
        const double below = s - 4.0 * DBL_EPSILON * s;
        if (gk_singular_count_below(c, n_sigma, above) >= k &&
            (below <= 0.0 || gk_singular_count_below(c, n_sigma, below) <= k - 1))
            return s;
    }
    throw NumericError("gk_singular_value: bisection failed to certify singular value " +
                       std::to_string(k));
}

inline std::vector<double> gk_smallest_singular_values(const std::vector<double>& c,
                                                       int n_sigma, int k) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) out.push_back(gk_singular_value(c, n_sigma, i));
    return out;
}

// ---------------------------------------------------------------------------
// Shifted tridiagonal solve (LU with partial pivoting) and inverse iteration.

class TridiagShiftSolver {
public:
    // Factors T - shift*I where T = tridiag(off, diag, off).
    TridiagShiftSolver(const std::vector<double>& diag, const std::vector<double>& off,
                       double shift)
        : n_(static_cast<int>(diag.size())) {
        const std::size_t n = diag.size();
        u0_.resize(n);
        u1_.assign(n, 0.0);
        u2_.assign(n, 0.0);
        l_.assign(n, 0.0);
        swapped_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) u0_[i] = diag[i] - shift;
        std::vector<double> sub(n, 0.0), sup(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) sub[i + 1] = sup[i] = off[i];

        const double scale = [&] {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                m = std::max(m, std::fabs(u0_[i]) + std::fabs(sup[i]));
            return std::max(m, DBL_MIN);
        }();
        pivfloor_ = DBL_EPSILON * DBL_EPSILON * scale + DBL_MIN;

        for (std::size_t i = 0; i + 1 < n; ++i) {
            u1_[i] = sup[i];
            double below = sub[i + 1];
            if (std::fabs(below) > std::fabs(u0_[i])) {
                swapped_[i] = 1;
                std::swap(u0_[i], below);
                std::swap(u1_[i], u0_[i + 1]);
                u2_[i] = (i + 2 < n) ? sup[i + 1] : 0.0;
                if (i + 2 < n) sup[i + 1] = 0.0;
            }
            if (std::fabs(u0_[i]) < pivfloor_)
                u0_[i] = u0_[i] >= 0.0 ? pivfloor_ : -pivfloor_;
            const double m = below / u0_[i];
            l_[i] = m;
            u0_[i + 1] -= m * u1_[i];
            if (i + 2 < n) sup[i + 1] -= m * u2_[i];
        }
        if (std::fabs(u0_[n - 1]) < pivfloor_)
            u0_[n - 1] = u0_[n - 1] >= 0.0 ? pivfloor_ : -pivfloor_;
    }

    std::vector<double> solve(std::vector<double> b) const {
        const std::size_t n = b.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (swapped_[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= l_[i] * b[i];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b[ii];
            if (ii + 1 < n) s -= u1_[ii] * b[ii + 1];
            if (ii + 2 < n) s -= u2_[ii] * b[ii + 2];
            b[ii] = s / u0_[ii];
        }
        return b;
    }

private:
    int n_;
    double pivfloor_ = 0.0;
    std::vector<double> u0_, u1_, u2_, l_;
    std::vector<char> swapped_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline std::vector<double> tridiag_apply(const std::vector<double>& diag,
                                         const std::vector<double>& off,
                                         const std::vector<double>& x) {
    const std::size_t n = diag.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += off[i - 1] * x[i - 1];
        if (i + 1 < n) s += off[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

// Inverse iteration on tridiag(diag, off) at an accurately known shift,
// re-orthogonalized each pass against already computed vectors (the low
// cluster can be exponentially close in absolute terms).
inline std::vector<double> tridiag_inverse_iteration(
    const std::vector<double>& diag, const std::vector<double>& off, double shift,
    const std::vector<std::vector<double>>& orthogonal_to, double residual_tol) {
    const std::size_t n = diag.size();
    TridiagShiftSolver solver(diag, off, shift);

    std::vector<double> v(n);
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < n; ++i) {
        state ^= state << 13; state ^= state >> 7; state ^= state << 17;
        v[i] = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
    }

    double best_res = HUGE_VAL;
    std::vector<double> best = v;
    for (int it = 0; it < 30; ++it) {
        for (const auto& w : orthogonal_to) axpy(-dot(w, v), w, v);
        const double nv = norm2(v);
        if (nv == 0.0) throw NumericError("inverse iteration: orthogonalization annihilated iterate");
        for (auto& x : v) x /= nv;
        v = solver.solve(v);
        const double nv2 = norm2(v);
        for (auto& x : v) x /= nv2;
        for (const auto& w : orthogonal_to) axpy(-dot(w, v), w, v);
        const double nv3 = norm2(v);
        for (auto& x : v) x /= nv3;

        std::vector<double> r = tridiag_apply(diag, off, v);
        axpy(-shift, v, r);
        const double res = norm2(r);
        if (res < best_res) {
            best_res = res;
            best = v;
        }
        if (res <= residual_tol) return v;
    }
    if (best_res <= 100.0 * residual_tol) return best;
    throw NumericError("inverse iteration: residual " + std::to_string(best_res) +
                       " above tolerance " + std::to_string(residual_tol));
}

} // namespace ksw
