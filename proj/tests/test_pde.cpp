#include <doctest.h>

#include "gdro/catalog.hpp"
#include "gdro/lattice.hpp"
#include "gdro/pde.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace gdro;
using catalog::make_spec;

TEST_SUITE("pde") {

TEST_CASE("f_operator examples") {
    const auto heat = make_spec("h", 1, -1, 1, VolatilityBand(1, 1), "0", "-1", "1");
    CHECK(pde::f_operator(2, 0, 0, 0, 0, heat) == 1.0);
    const auto transport = make_spec("b", 1, -1, 1, VolatilityBand(1, 1), "0", "-1", "1", "0", "1", "1");
    CHECK(pde::f_operator(0, 3, 0, 0, 0, transport) == 3.0);
    const auto pass = make_spec("f", 1, -1, 1, VolatilityBand(1, 1), "0", "-1", "1", "y");
    CHECK(pde::f_operator(0, 0, 2, 0, 0, pass) == 2.0);
    // l enters G: sigma^2 d2u + 2 l du.
    const auto ql = make_spec("l", 1, -1, 1, VolatilityBand(1, 2), "0", "-1", "1", "0", "1", "0", "0.5");
    CHECK(pde::f_operator(0, 1, 0, 0, 0, ql) == doctest::Approx(0.5 * 4 * 1.0));
    CHECK(pde::f_operator(0, -1, 0, 0, 0, ql) == doctest::Approx(-0.5));
}

TEST_CASE("anchors") {
    for (auto [lo, hi, phi, expect] : {std::tuple{1.0, 1.0, "x*x", 1.0}, {1.0, 2.0, "x*x", 4.0}, {1.0, 2.0, "-x*x", -1.0}}) {
        const auto spec = make_spec("a", 1, -3, 3, VolatilityBand(lo, hi), phi, "-1e6", "1e6", "0", "1", "0", "0",
                                    BoundaryMode::curvature);
        const Grid g(spec, 100, 61);
        PenaltyParams p;
        const auto f = pde::solve_penalized_pde(spec, {g, p, 0});
        CHECK(f.u(0, 30) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("stability bound and sub-steps") {
    const auto spec = make_spec("s", 1, -3, 3, VolatilityBand(1, 2), "x*x", "-1e6", "1e6");
    const Grid g(spec, 400, 201);
    PenaltyParams p;
    const double number = pde::stability_number(spec, g, p, g.dt());
    CHECK(number == doctest::Approx(g.dt() * (4.0 / (g.dx() * g.dx()) + 5.0)));
    CHECK(pde::resolve_substeps(spec, {g, p, 0}) == static_cast<std::size_t>(std::ceil(number)));
    try {
        pde::solve(spec, {g, p, 1});
        FAIL("expected a stability error");
    } catch (const StabilityError& e) {
        CHECK(e.bound() == doctest::Approx(number));
    }
    CHECK_NOTHROW(pde::resolve_substeps(spec, {g, p, 12}));
}

TEST_CASE("upper penalty pins the solution") {
    const auto spec = make_spec("pin", 1, -1, 1, VolatilityBand(1, 1), "0", "-1e6", "0", "1");
    const Grid g(spec, 100, 21);
    PenaltyParams p;
    p.mode = PenaltyMode::nodewise_implicit;
    p.upper = ObstacleTreatment::penalty(1e6);
    const auto f = pde::solve_penalized_pde(spec, {g, p, 0});
    double viol = 0.0;
    for (double v : f.u.data()) viol = std::max(viol, v);
    CHECK(viol <= 10.0 * (1.0 / 1e6 + g.dt()));
    CHECK(viol > 0.0);
}

TEST_CASE("direct solver") {
    // Inactive obstacles: identical to the zero-penalty run.
    const auto free = make_spec("f", 1, -3, 3, VolatilityBand(0.5, 1), "sin(x)", "-1e6", "1e6", "0.3*cos(x)");
    const Grid g(free, 100, 61);
    PenaltyParams zero;
    const auto a = pde::solve_double_obstacle_direct(free, {g, zero, 0});
    const auto b = pde::solve_penalized_pde(free, {g, zero, 0});
    CHECK(a.u.data() == b.u.data());

    // Coinciding obstacles force the band.
    const auto pinch = make_spec("c", 1, -3, 3, VolatilityBand(1, 2), "0.3", "0.3", "0.3", "1");
    const auto c = pde::solve_double_obstacle_direct(pinch, {g, zero, 0});
    for (double v : c.u.data()) CHECK(v == 0.3);

    // Sandwich on the catalog double-obstacle problem.
    const auto sine = *catalog::lookup("double-obstacle-sine");
    const Grid gs(sine.spec, sine.n_t, sine.n_x);
    const auto s = pde::solve_double_obstacle_direct(sine.spec, {gs, sine.penalties, 0});
    const auto coef = sample_coefficients(sine.spec, gs);
    for (std::size_t q = 0; q < s.u.data().size(); ++q) {
        CHECK(s.u.data()[q] >= coef.lower.data()[q]);
        CHECK(s.u.data()[q] <= coef.upper.data()[q]);
    }
}

TEST_CASE("direct solution is the limit of the upper penalty ladder") {
    // phi exceeds h' near the edges, so the terminal slice is not sandwiched.
    const auto spec = make_spec("cap", 1, -3, 3, VolatilityBand(1, 2), "min(x*x, 1)", "-1e6", "0.8");
    const Grid g(spec, 100, 121);
    PenaltyParams p;
    p.mode = PenaltyMode::nodewise_implicit;
    const auto direct = pde::solve_double_obstacle_direct(spec, {g, p, 0});
    double prev = INFINITY;
    for (double n : {16.0, 64.0, 256.0, 1024.0}) {
        p.upper = ObstacleTreatment::penalty(n);
        const auto f = pde::solve_penalized_pde(spec, {g, p, 0});
        const double gap = f.u(0, 60) - direct.u(0, 60);
        CHECK(gap >= 0.0);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev <= 2.0 / 1024);
}

TEST_CASE("explicit step is monotone") {
    const auto spec = *catalog::lookup("double-obstacle-sine");
    const Grid g(spec.spec, spec.n_t, spec.n_x);
    PenaltyParams p;
    p.upper = ObstacleTreatment::penalty(10);
    p.lower = ObstacleTreatment::penalty(10);
    const std::size_t k = pde::resolve_substeps(spec.spec, {g, p, 0});
    const double dt = g.dt() / static_cast<double>(k);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> val(-1, 1), bump(0, 0.05);
    std::uniform_int_distribution<std::size_t> node(0, g.n_x() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> next(g.n_x());
        for (auto& v : next) v = 0.5 * std::sin(val(rng) * 3.0);
        const auto base = pde::explicit_step(spec.spec, g, p, next, 0.5, dt);
        auto raised = next;
        raised[node(rng)] += bump(rng);
        const auto up = pde::explicit_step(spec.spec, g, p, raised, 0.5, dt);
        for (std::size_t j = 0; j < g.n_x(); ++j) CHECK(up[j] >= base[j]);
    }
}

TEST_CASE("comparison in the terminal value") {
    const auto lo = make_spec("lo", 1, -3, 3, VolatilityBand(0.5, 1.5), "sin(x)", "-2", "2", "cos(x) - 0.2*y");
    auto hi = lo;
    hi.terminal = parse_expr("sin(x) + 0.1*pos(x)");
    const Grid g(lo, 100, 61);
    PenaltyParams p;
    p.upper = ObstacleTreatment::penalty(3);
    p.lower = ObstacleTreatment::penalty(3);
    const auto a = pde::solve(lo, {g, p, 0}), b = pde::solve(hi, {g, p, 0});
    for (std::size_t q = 0; q < a.u.data().size(); ++q) CHECK(b.u.data()[q] >= a.u.data()[q]);
}

TEST_CASE("degenerate band matches a hand-rolled linear stepper") {
    // u_t + 1/2 s^2 u_xx + b u_x = 0 with b > 0, forward difference for the
    // drift, constant continuation at the edges.
    const double s = 0.8, b = 0.3;
    const auto spec = make_spec("lin", 1, -2, 2, VolatilityBand(s, s), "sin(x)", "-1e6", "1e6", "0", "1", "0.3");
    const Grid g(spec, 200, 41);
    PenaltyParams p;
    p.kappa_f = 0.0;
    const auto f = pde::solve(spec, {g, p, 0});
    REQUIRE(f.diagnostics.substeps == 1);
    std::vector<double> u(g.n_x());
    for (std::size_t j = 0; j < g.n_x(); ++j) u[j] = std::sin(g.x(j));
    const double dt = g.dt(), dx = g.dx();
    for (std::size_t i = g.n_t(); i-- > 0;) {
        std::vector<double> v(u.size());
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double l = u[j == 0 ? 0 : j - 1], r = u[j + 1 == u.size() ? j : j + 1];
            v[j] = u[j] + dt * (0.5 * s * s * (r - 2 * u[j] + l) / (dx * dx) + b * (r - u[j]) / dx);
        }
        u = v;
        for (std::size_t j = 0; j < u.size(); ++j) CHECK(f.u(i, j) == doctest::Approx(u[j]).epsilon(1e-13));
    }
}

TEST_CASE("residual examples") {
    // Exact solution of the G-heat equation with band (1,1):
    // u = sin(x) exp(-(T - t)/2). Quadratic data give a zero residual, so the
    // refinement rate is measured on this one instead.
    const auto spec = make_spec("heat", 1, -3, 3, VolatilityBand(1, 1), "sin(x)", "-1e6", "1e6");
    auto residual = [&](const Grid& g) {
        GridFunction u(g.n_t() + 1, g.n_x());
        for (std::size_t i = 0; i <= g.n_t(); ++i)
            for (std::size_t j = 0; j < g.n_x(); ++j) u(i, j) = std::sin(g.x(j)) * std::exp(-(1.0 - g.t(i)) / 2);
        return pde::complementarity_residual(u, spec, g).interior_sup;
    };
    const Grid g(spec, 100, 61);
    const double coarse = residual(g), fine = residual(g.refined());
    CHECK(coarse <= 1.0 * (g.dt() + g.dx() * g.dx()));
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));

    // x^2 + (T - t) is reproduced exactly by the difference quotients.
    const auto quad = make_spec("q", 1, -3, 3, VolatilityBand(1, 1), "x*x", "-1e6", "1e6");
    GridFunction q(g.n_t() + 1, g.n_x());
    for (std::size_t i = 0; i <= g.n_t(); ++i)
        for (std::size_t j = 0; j < g.n_x(); ++j) q(i, j) = g.x(j) * g.x(j) + (1.0 - g.t(i));
    CHECK(pde::complementarity_residual(q, quad, g).interior_sup <= 1e-10);

    // u = h' = 0, f = 1: upper obstacle active, r = max(0, min(u - h, -1)) = 0.
    const auto pinned = make_spec("p", 1, -1, 1, VolatilityBand(1, 1), "0", "-1", "0", "1");
    const Grid gp(pinned, 10, 11);
    const auto r = pde::complementarity_residual(GridFunction(11, 11, 0.0), pinned, gp);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 1; j < 10; ++j) CHECK(r.r(i, j) == 0.0);
    CHECK(std::isnan(r.r(10, 5)));
    CHECK(std::isnan(r.r(3, 0)));

    // Below the lower obstacle: r < 0.
    const auto below = make_spec("b", 1, -1, 1, VolatilityBand(1, 1), "0", "0.5", "1");
    const auto rb = pde::complementarity_residual(GridFunction(11, 11, 0.0), below, gp);
    CHECK(rb.r(2, 5) < 0.0);
}

TEST_CASE("lattice and pde agree on the degenerate heat case") {
    const auto spec = make_spec("h", 1, -3, 3, VolatilityBand(1, 1), "sin(x)", "-1e6", "1e6");
    const Grid g(spec, 400, 201);
    PenaltyParams p;
    const auto a = lattice::sweep(spec, g, p), b = pde::solve(spec, {g, p, 0});
    double gap = 0.0;
    for (std::size_t j = 60; j <= 140; ++j) gap = std::max(gap, std::abs(a.u(0, j) - b.u(0, j)));
    CHECK(gap <= 10.0 * (g.dt() + g.dx() * g.dx()));
}

TEST_CASE("pde threads do not change the field") {
    const auto s = *catalog::lookup("gheat-convex");
    const Grid g(s.spec, 100, 61);
    const auto a = pde::solve(s.spec, {g, s.penalties, 0}, Execution{1});
    const auto b = pde::solve(s.spec, {g, s.penalties, 0}, Execution{8});
    CHECK(a.u.data() == b.u.data());
}

}  // TEST_SUITE
