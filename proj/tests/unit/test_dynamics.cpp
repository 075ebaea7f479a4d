#include <doctest.h>

#include <cmath>
#include <vector>

#include "kswitten/dynamics.hpp"
#include "helpers.hpp"

using namespace ksw;

namespace {

struct Setup {
    ksw_test::Landscape l;
    Grid grid;
    HeatPropagator prop;
    std::vector<QuasiMode> psis;
};

Setup double_well_setup(double h, int n = 1201) {
    Setup s{ksw_test::double_well(), {}, {}, {}};
    s.grid = grid_from_interval(s.l.phi, s.l.decomp, -2.1, 2.1, n);
    s.prop = make_heat_propagator(assemble(s.l.phi, h, s.grid, s.l.decomp.phi0), s.l.decomp);
    s.psis = make_psi_family(s.l.phi, s.l.decomp, s.grid, h);
    return s;
}

} // namespace

TEST_CASE("prepare_initial: support, norm, distance to the cutoff quasimode") {
    const auto s = double_well_setup(0.1);
    const auto& E1 = s.l.decomp.wells[0];

    const auto u0 = prepare_initial(s.psis, {1.0, 0.0});
    for (int j = 0; j < s.grid.n; ++j) {
        const double x = s.grid.node(j);
        if (!(x > E1.a && x < E1.b)) CHECK(u0[static_cast<std::size_t>(j)] == 0.0);
    }

    const auto u = prepare_initial(s.psis, {0.6, -0.8});
    CHECK(l2_inner(s.grid, u, u) == doctest::Approx(1.0).epsilon(1e-10)); // |beta|^2 = 1

    // || psi_n - f_n^(0) || shrinks exponentially in 1/h
    const double delta0 = default_delta0(s.l.decomp);
    const double eps = default_eps_cut(s.l.phi, s.l.decomp, delta0);
    std::vector<double> hs{0.2, 0.15, 0.1}, dist;
    for (double h : hs) {
        const auto psi = make_psi(s.l.phi, s.l.decomp, s.grid, h, 0);
        const auto f = quasimode0(s.l.phi, s.l.decomp, s.grid, 0, h, eps);
        auto diff = psi.vec;
        axpy(-1.0, f.vec, diff);
        dist.push_back(l2_norm(s.grid, diff));
    }
    CHECK(ksw_test::arrhenius_slope(hs, dist) > 0.0);
    CHECK(dist.back() < 1e-3);
}

TEST_CASE("heat flow: identity at tau = 0 and stationary Gibbs mode") {
    const auto s = double_well_setup(0.12);
    const auto u0 = prepare_initial(s.psis, {1.0, 0.0});

    auto u = propagate_t(s.prop, u0, 0.0);
    axpy(-1.0, u0, u);
    CHECK(norm2(u) <= 1e-12 * norm2(u0));

    auto g = s.prop.w.zero_mode();
    const double gn = l2_norm(s.grid, g);
    for (auto& x : g) x /= gn;
    auto gt = propagate_t(s.prop, g, 3.0 / s.prop.nu_h);
    axpy(-1.0, g, gt);
    CHECK(l2_norm(s.grid, gt) <= 1e-12);
}

TEST_CASE("heat flow: conservation, monotone norm, bounded masses") {
    const auto s = double_well_setup(0.1);
    const auto u0 = prepare_initial(s.psis, {0.9, 0.3});
    const auto taus = make_tau_grid(25, 3.0);
    const auto evo = heat_evolve(s.prop, s.l.decomp, s.psis, u0, taus);

    double prev_norm = HUGE_VAL;
    for (std::size_t it = 0; it < taus.size(); ++it) {
        CHECK(std::fabs(evo.mass_total[it] / evo.mass_total[0] - 1.0) <= 1e-10);
        const double nrm = l2_norm(s.grid, evo.states[it]);
        CHECK(nrm <= prev_norm * (1.0 + 1e-12));
        prev_norm = nrm;
        const double total = evo.masses[it][0] + evo.masses[it][1];
        CHECK(evo.masses[it][0] >= 0.0);
        CHECK(evo.masses[it][1] >= 0.0);
        CHECK(total <= evo.mass_total[0] * (1.0 + 1e-6));
    }
}

TEST_CASE("heat flow: restarted evolution matches the direct semigroup") {
    const auto s = double_well_setup(0.15, 1001);
    const auto u0 = prepare_initial(s.psis, {1.0, 0.0});
    const auto ua = propagate_t(s.prop, u0, 0.7 / s.prop.nu_h);
    auto ub = propagate_t(s.prop, ua, 1.3 / s.prop.nu_h);
    const auto direct = propagate_t(s.prop, u0, 2.0 / s.prop.nu_h);
    axpy(-1.0, direct, ub);
    CHECK(norm2(ub) <= 1e-10 * norm2(u0));
}

TEST_CASE("heat flow: grid cap for dense diagonalization") {
    const auto l = ksw_test::double_well();
    const Grid g = grid_from_interval(l.phi, l.decomp, -2.1, 2.1, 4501);
    CHECK_THROWS_AS(make_heat_propagator(assemble(l.phi, 0.2, g, l.decomp.phi0), l.decomp),
                    ConfigError);
}

TEST_CASE("well masses: symmetry and near-total capture") {
    const auto s = double_well_setup(0.1);
    std::vector<double> gibbs(static_cast<std::size_t>(s.grid.n));
    for (int j = 0; j < s.grid.n; ++j)
        gibbs[static_cast<std::size_t>(j)] =
            std::exp(-2.0 * (s.prop.w.phi_node[static_cast<std::size_t>(j)] - s.l.decomp.phi0) / 0.1);
    const auto m = well_masses(gibbs, s.l.decomp, s.grid);
    CHECK(m[0] == doctest::Approx(m[1]).epsilon(1e-10));
    std::vector<double> ones(gibbs.size(), 1.0);
    const double total = l2_inner(s.grid, gibbs, ones);
    CHECK(m[0] + m[1] >= total * (1.0 - 1e-6)); // only exponentially small mass outside the wells
    CHECK(m[0] + m[1] <= total);
}

TEST_CASE("ks_solve: Gibbs density is stationary and mass is conserved") {
    const auto s = double_well_setup(0.1);
    const double h = s.prop.w.h;
    std::vector<double> rho0(static_cast<std::size_t>(s.grid.n));
    for (int j = 0; j < s.grid.n; ++j)
        rho0[static_cast<std::size_t>(j)] =
            std::exp(-2.0 * (s.prop.w.phi_node[static_cast<std::size_t>(j)] - s.l.decomp.phi0) / h);
    std::vector<double> ones(rho0.size(), 1.0);
    const double total = l2_inner(s.grid, rho0, ones);
    for (auto& v : rho0) v /= total;

    const double t1 = h * std::exp(2.0 * s.l.decomp.S / h); // tau = 1
    const auto ks = ks_solve(s.prop, s.l.decomp, rho0, {0.0, t1});
    for (std::size_t j = 0; j < rho0.size(); ++j)
        CHECK(std::fabs(ks.states[1][j] - rho0[j]) <= 1e-10);
    CHECK(std::fabs(ks.mass_total[1] / ks.mass_total[0] - 1.0) <= 1e-10);
}

TEST_CASE("ks_solve: double-well masses follow the reduced closed form") {
    const auto s = double_well_setup(0.1, 1401);
    const double h = 0.1;
    const double rate = 8.0 * std::sqrt(2.0) / M_PI;

    // rho0 = Psi(beta) turned into a density
    const auto u0 = prepare_initial(s.psis, {1.0, 0.0});
    const auto g = s.prop.w.zero_mode();
    std::vector<double> rho0(u0.size());
    for (std::size_t j = 0; j < u0.size(); ++j) rho0[j] = u0[j] * g[j];

    std::vector<double> phys;
    const std::vector<double> taus{0.0, 0.25, 0.5, 1.0, 2.0};
    for (double tau : taus) phys.push_back(h * std::exp(2.0 * s.l.decomp.S / h) * tau);
    const auto ks = ks_solve(s.prop, s.l.decomp, rho0, phys);
    for (std::size_t it = 0; it < taus.size(); ++it) {
        const double tot = ks.masses[it][0] + ks.masses[it][1];
        const double want = 0.5 * (1.0 + std::exp(-rate * taus[it]));
        CHECK(std::fabs(ks.masses[it][0] / tot - want) <= 0.01);
    }
}

TEST_CASE("ks_solve: overflow guard on a misconfigured domain") {
    const auto l = ksw_test::double_well();
    const Grid g = grid_from_interval(l.phi, l.decomp, -2.1, 2.1, 801);
    auto prop = make_heat_propagator(assemble(l.phi, 0.01, g, l.decomp.phi0), l.decomp);
    std::vector<double> rho0(static_cast<std::size_t>(g.n), 1.0);
    CHECK_THROWS_AS(ks_solve(prop, l.decomp, rho0, {0.0}), NumericError);
}

TEST_CASE("verify_theorem: errors shrink with h and masses track the prediction") {
    const auto l = ksw_test::double_well();
    const auto taus = make_tau_grid(12, 3.0);
    const auto rep = verify_theorem(l.phi, l.decomp, {1.0, 0.0}, {0.2, 0.1}, taus, -2.1, 2.1, 801);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.mu2 == doctest::Approx(8.0 * std::sqrt(2.0) / M_PI).epsilon(1e-9));
    CHECK(rep.rows[1].sup_l2_error < rep.rows[0].sup_l2_error);
    CHECK(rep.rows[1].sup_mass_error < rep.rows[0].sup_mass_error);
    CHECK(rep.rows[1].l1_error < rep.rows[0].l1_error);
    CHECK(rep.rows[1].sup_mass_error <= 0.01);
    CHECK(rep.fitted_l2_order > 0.7);
}

TEST_CASE("verify_theorem: kernel-direction data stays put on both sides") {
    const auto s = double_well_setup(0.1);
    const double b = 1.0 / std::sqrt(2.0);
    const auto u0 = prepare_initial(s.psis, {b, b});

    // alignment error = non-low content of u0
    auto perp = u0;
    const double sq = std::sqrt(s.grid.dx());
    for (auto& x : perp) x *= sq;
    for (const auto& v : s.prop.low.vectors) axpy(-dot(v, perp), v, perp);
    const double alignment = norm2(perp);

    double sup = 0.0;
    for (double tau : make_tau_grid(12, 3.0)) {
        auto u = propagate_t(s.prop, u0, tau / s.prop.nu_h);
        axpy(-1.0, u0, u);
        sup = std::max(sup, l2_norm(s.grid, u));
    }
    CHECK(sup <= 1.05 * alignment + 1e-12);
    CHECK(sup <= 1e-3);
}

TEST_CASE("long-time limit: masses equilibrate to the kernel projection") {
    const auto s = double_well_setup(0.12, 1001);
    const auto u0 = prepare_initial(s.psis, {1.0, 0.0});
    const auto evo = heat_evolve(s.prop, s.l.decomp, s.psis, u0, {0.0, 12.0});
    const double tot = evo.masses[1][0] + evo.masses[1][1];
    CHECK(evo.masses[1][0] / tot == doctest::Approx(0.5).epsilon(0.02));
    CHECK(evo.masses[1][1] / tot == doctest::Approx(0.5).epsilon(0.02));
}
