#pragma once

// Reduced finite-dimensional models of the metastable dynamics: the
// rectangular factor L0 and the symmetric matrix A0 = L0^T L0 / pi built
// from the Hessian data (mu, nu), the weighted graph Laplacian kappa * M_G
// for critical-point data supplied as a graph, and the reduced evolution
// alpha(tau) = exp(-tau A) beta through the spectral decomposition.

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kswitten/errors.hpp"
#include "kswitten/linalg.hpp"

namespace ksw {

// Rows k = 1..N-1:  (L0)_{k,k} = -(nu_k mu_k)^{1/4},
//                   (L0)_{k,k+1} = +(nu_k mu_{k+1})^{1/4}.
inline Mat build_L0(const std::vector<double>& mu, const std::vector<double>& nu) {
    const int N = static_cast<int>(mu.size());
    if (N < 1) throw ConfigError("build_L0: need at least one well");
    if (static_cast<int>(nu.size()) != N - 1)
        throw ConfigError("build_L0: size mismatch, |nu| must equal |mu| - 1");
    for (double m : mu)
        if (!(m > 0.0)) throw ConfigError("build_L0: non-positive Hessian datum in mu");
    for (double v : nu)
        if (!(v > 0.0)) throw ConfigError("build_L0: non-positive Hessian datum in nu");

    Mat L(N - 1, N);
    for (int k = 0; k < N - 1; ++k) {
        const double nuq = std::pow(nu[static_cast<std::size_t>(k)], 0.25);
        L.at(k, k) = -nuq * std::pow(mu[static_cast<std::size_t>(k)], 0.25);
        L.at(k, k + 1) = nuq * std::pow(mu[static_cast<std::size_t>(k + 1)], 0.25);
    }
    return L;
}

// Tridiagonal N x N matrix with
//   a_{ii}    = (1/pi) mu_i^{1/2} (nu_{i-1}^{1/2} + nu_i^{1/2}),  nu_0 = nu_N = 0,
//   a_{i,i+1} = -(1/pi) nu_i^{1/2} mu_i^{1/4} mu_{i+1}^{1/4}.
// Equals L0^T L0 / pi; built from the entrywise formula so the identity can
// be verified against the factor independently.
inline SymMatrix build_A0(const std::vector<double>& mu, const std::vector<double>& nu) {
    const int N = static_cast<int>(mu.size());
    if (N < 1) throw ConfigError("build_A0: need at least one well");
    if (static_cast<int>(nu.size()) != N - 1)
        throw ConfigError("build_A0: size mismatch, |nu| must equal |mu| - 1");
    for (double m : mu)
        if (!(m > 0.0)) throw ConfigError("build_A0: non-positive Hessian datum in mu");
    for (double v : nu)
        if (!(v > 0.0)) throw ConfigError("build_A0: non-positive Hessian datum in nu");

    const double inv_pi = 1.0 / M_PI;
    SymMatrix A(N);
    for (int i = 0; i < N; ++i) {
        const double nu_left = i > 0 ? nu[static_cast<std::size_t>(i - 1)] : 0.0;
        const double nu_right = i < N - 1 ? nu[static_cast<std::size_t>(i)] : 0.0;
        A.set(i, i, inv_pi * std::sqrt(mu[static_cast<std::size_t>(i)]) *
                        (std::sqrt(nu_left) + std::sqrt(nu_right)));
        if (i < N - 1) {
            A.set(i, i + 1, -inv_pi * std::sqrt(nu[static_cast<std::size_t>(i)]) *
                                std::pow(mu[static_cast<std::size_t>(i)], 0.25) *
                                std::pow(mu[static_cast<std::size_t>(i + 1)], 0.25));
        }
    }
    return A;
}

// Kernel direction of A0: components proportional to mu_n^{-1/4}; reduces to
// the constant vector when all mu_n coincide.
inline std::vector<double> a0_kernel_vector(const std::vector<double>& mu) {
    std::vector<double> v;
    v.reserve(mu.size());
    for (double m : mu) v.push_back(std::pow(m, -0.25));
    const double n = norm2(v);
    for (double& x : v) x /= n;
    return v;
}

// ---------------------------------------------------------------------------
// Graph mode: minima are vertices, index-1 saddles are edges.

struct GraphSpec {
    std::vector<std::string> vertices;
    std::vector<std::pair<int, int>> edges; // 0-based vertex indices
};

inline void validate_graph(const GraphSpec& g) {
    const int n = static_cast<int>(g.vertices.size());
    if (n == 0) throw ConfigError("graph: no vertices");
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(n),
                                        std::vector<char>(static_cast<std::size_t>(n), 0));
    for (const auto& [u, v] : g.edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw ConfigError("graph: edge endpoint out of range");
        if (u == v) throw ConfigError("graph: self-loop at vertex " + g.vertices[static_cast<std::size_t>(u)]);
        if (seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)])
            throw HypothesisError("graph: multiple edges between " +
                                  g.vertices[static_cast<std::size_t>(u)] + " and " +
                                  g.vertices[static_cast<std::size_t>(v)]);
        seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
        seen[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
    }
    // connectivity by breadth-first search
    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    std::vector<int> queue{0};
    visited[0] = 1;
    while (!queue.empty()) {
        const int u = queue.back();
        queue.pop_back();
        for (const auto& [a, b] : g.edges) {
            const int w = a == u ? b : (b == u ? a : -1);
            if (w >= 0 && !visited[static_cast<std::size_t>(w)]) {
                visited[static_cast<std::size_t>(w)] = 1;
                queue.push_back(w);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (!visited[static_cast<std::size_t>(i)])
            throw HypothesisError("graph is disconnected (vertex " +
                                  g.vertices[static_cast<std::size_t>(i)] + " unreachable)");
}

// kappa * (degree matrix - adjacency matrix).
inline SymMatrix graph_laplacian(const GraphSpec& g, double kappa) {
    validate_graph(g);
    const int n = static_cast<int>(g.vertices.size());
    SymMatrix M(n);
    for (const auto& [u, v] : g.edges) {
        M.set(u, u, M.at(u, u) + kappa);
        M.set(v, v, M.at(v, v) + kappa);
        M.set(u, v, -kappa);
    }
    return M;
}

// ---------------------------------------------------------------------------

inline EigenSystem sym_eigen(const SymMatrix& M) { return jacobi_eigen(M); }

// exp(-tau A) beta through the eigen-decomposition of the positive
// semi-definite A.  Decay is structural: every eigenvalue enters through
// exp(-tau lambda) with lambda clamped at the PSD tolerance.
inline std::vector<double> reduced_evolve(const EigenSystem& es, const SymMatrix& A,
                                          const std::vector<double>& beta, double tau) {
    const int N = es.n;
    if (static_cast<int>(beta.size()) != N)
        throw ConfigError("reduced_evolve: beta has wrong length");
    if (tau < 0.0) throw ConfigError("reduced_evolve: tau must be >= 0");
    const double scale = std::max(A.norm_inf(), DBL_MIN);
    if (es.values.front() < -1e-10 * scale)
        throw NumericError("reduced_evolve: matrix is not positive semi-definite");

    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (int k = 0; k < N; ++k) {
        double c = 0.0;
        for (int j = 0; j < N; ++j) c += es.vec(j, k) * beta[static_cast<std::size_t>(j)];
        const double lambda = std::max(es.values[static_cast<std::size_t>(k)], 0.0);
        const double decay = std::exp(-tau * lambda) * c;
        for (int j = 0; j < N; ++j) out[static_cast<std::size_t>(j)] += decay * es.vec(j, k);
    }
    return out;
}

inline std::vector<double> reduced_evolve(const SymMatrix& A, const std::vector<double>& beta,
                                          double tau) {
    return reduced_evolve(sym_eigen(A), A, beta, tau);
}

// Everything the 1-d reduction produces in one place.
struct ReducedModel {
    Mat L0;
    SymMatrix A0;
    EigenSystem eigen;
    std::vector<double> kernel_vector;
    double S = std::numeric_limits<double>::infinity();
    double kappa = std::numeric_limits<double>::quiet_NaN(); // sqrt(mu*nu) when Hessians all agree
};

inline ReducedModel build_reduced_model(const std::vector<double>& mu,
                                        const std::vector<double>& nu,
                                        double S = std::numeric_limits<double>::infinity()) {
    ReducedModel m;
    m.L0 = build_L0(mu, nu);
    m.A0 = build_A0(mu, nu);
    m.eigen = sym_eigen(m.A0);
    m.kernel_vector = a0_kernel_vector(mu);
    m.S = S;
    if (!mu.empty() && !nu.empty()) {
        bool equal = true;
        for (double x : mu) equal = equal && std::fabs(x - mu.front()) <= 1e-9 * std::fabs(mu.front());
        for (double x : nu) equal = equal && std::fabs(x - nu.front()) <= 1e-9 * std::fabs(nu.front());
        if (equal) m.kappa = std::sqrt(mu.front() * nu.front());
    }
    return m;
}

} // namespace ksw
