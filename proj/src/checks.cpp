#include "gdro/checks.hpp"

#include "gdro/convergence.hpp"
#include "gdro/expr.hpp"
#include "gdro/lattice.hpp"
#include "gdro/pde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>

namespace gdro::checks {

namespace {

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool decreased(double coarse, double fine, double factor = 1.0) {
    if (coarse <= kRoundoffFloor && fine <= kRoundoffFloor) return true;
    return factor > 1.0 ? fine * factor <= coarse : fine < coarse;
}

const char* floor_note(double coarse, double fine) {
    return coarse <= kRoundoffFloor && fine <= kRoundoffFloor ? " [both at roundoff floor]" : "";
}

}  // namespace

std::size_t nearest_node(const Grid& grid, double x) {
    const double pos = std::round((x - grid.x_min()) / grid.dx());
    return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(grid.n_x() - 1)));
}

ProblemSpec shift_lower(const ProblemSpec& spec, double eps) {
    ProblemSpec out = spec;
    char lit[64];
    std::snprintf(lit, sizeof lit, "%.17g", eps);
    out.lower = parse_expr(spec.lower.to_string() + " + " + lit);
    return out;
}

CheckResult anchor(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& p,
                   double x0, double expected, double tol, Solvers solvers, double max_seconds,
                   const Execution& exec) {
    CheckResult r{name, true, "", 0.0};
    const std::size_t j = nearest_node(grid, x0);
    Stopwatch total;
    auto one = [&](const char* label, auto&& solve) {
        Stopwatch w;
        const SolutionField f = solve();
        const double s = w.seconds();
        const double err = std::abs(f.u(0, j) - expected);
        r.passed = r.passed && err <= tol && s < max_seconds;
        r.detail += format("%s%s u=%.10f err=%.2e (tol %.0e) %.2fs", r.detail.empty() ? "" : "; ", label, f.u(0, j),
                           err, tol, s);
    };
    if (solvers != Solvers::pde) one("lattice", [&] { return lattice::sweep(spec, grid, p, exec); });
    if (solvers != Solvers::lattice)
        one("pde", [&] { return pde::solve(spec, pde::PdeSchemeParams{grid, p, 0}, exec); });
    r.seconds = total.seconds();
    return r;
}

CheckResult cross_budget(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& p,
                         const Execution& exec) {
    Stopwatch w;
    const auto cv = convergence::cross_validate(spec, grid, p, exec);
    const double budget = 5.0 * (grid.dt() + grid.dx() * grid.dx());
    return {name, cv.cross_gap <= budget, format("cross_gap=%.3e budget=%.3e", cv.cross_gap, budget), w.seconds()};
}

CheckResult cross_refinement(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                             const PenaltyParams& p, const Execution& exec) {
    Stopwatch w;
    const double coarse = convergence::cross_validate(spec, grid, p, exec).cross_gap;
    const double fine = convergence::cross_validate(spec, grid.refined(), p, exec).cross_gap;
    return {name, decreased(coarse, fine), format("cross_gap %.3e -> %.3e%s", coarse, fine, floor_note(coarse, fine)),
            w.seconds()};
}

CheckResult residual_refinement(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                                const PenaltyParams& p, const Execution& exec) {
    Stopwatch w;
    auto sup = [&](const Grid& g) {
        const SolutionField f = pde::solve_double_obstacle_direct(spec, pde::PdeSchemeParams{g, p, 0}, exec);
        return pde::complementarity_residual(f, spec, g).interior_sup;
    };
    const double coarse = sup(grid), fine = sup(grid.refined());
    return {name, decreased(coarse, fine, 2.0),
            format("interior sup residual %.3e -> %.3e (ratio %.2f, need >= 2)%s", coarse, fine,
                   fine > 0.0 ? coarse / fine : INFINITY, floor_note(coarse, fine)),
            w.seconds()};
}

LadderChecks ladder(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                    const std::vector<double>& n_list, const PenaltyParams& base, double max_seconds,
                    const Execution& exec) {
    Stopwatch w;
    const auto rep = convergence::monotone_ladder(spec, grid, n_list, base, {}, exec);
    const double s = w.seconds();
    const double mono = rep.max_mono_violation();
    LadderChecks out;
    out.monotone = {name + " monotone ladder", mono <= 1e-9,
                    format("%zu rungs, max mono_violation=%.3e", rep.rungs.size(), mono), s};
    const double decades = rep.upper_violation_decades();
    const bool ok = rep.rate_slope && *rep.rate_slope <= -0.8 && decades >= 2.0 && s < max_seconds;
    out.rate = {name + " penalty rate", ok,
                format("rate_slope=%s decades=%.2f %.2fs",
                       rep.rate_slope ? format("%.3f", *rep.rate_slope).c_str() : "n/a", decades, s),
                s};
    return out;
}

CheckResult orderings(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                      const std::vector<double>& n_list, const std::vector<double>& m_list,
                      const PenaltyParams& base, const Execution& exec) {
    Stopwatch w;
    const auto table = lattice::double_ladder(spec, grid, n_list, m_list, base, exec);
    for (const auto& row : table.cells)
        for (const auto& c : row)
            if (c.error) return {name, false, "cell (" + format("%g,%g", c.n, c.m) + ") failed: " + *c.error, w.seconds()};
    double dominance = 0.0;
    for (std::size_t a = 0; a < n_list.size(); ++a) {
        const SolutionField refl = lattice::reflected_sweep(spec, grid, n_list[a], base, exec);
        for (std::size_t b = 0; b < m_list.size(); ++b) {
            const auto& u = table.fields[a * m_list.size() + b].data();
            for (std::size_t q = 0; q < u.size(); ++q) dominance = std::max(dominance, u[q] - refl.u.data()[q]);
        }
    }
    const double gn = table.max_gap_in_n(), gm = table.max_gap_in_m();
    return {name, gn <= 1e-9 && gm <= 1e-9 && dominance <= 1e-9,
            format("%zux%zu table: sup increase in n=%.2e, sup decrease in m=%.2e, reflected dominance gap=%.2e",
                   n_list.size(), m_list.size(), gn, gm, dominance),
            w.seconds()};
}

CheckResult skorohod(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& base,
                     const std::vector<double>& m_list, const Execution& exec) {
    Stopwatch w;
    PenaltyParams refl = base;
    refl.lower = ObstacleTreatment::project();
    const double reflected = convergence::asc_residuals(lattice::sweep(spec, grid, refl, exec), spec, grid).asc_plus;
    bool ok = reflected == 0.0;
    std::string detail = format("reflected asc_plus=%.3e; m-ladder", reflected);
    double prev = 0.0, prev_m = 0.0;
    for (std::size_t k = 0; k < m_list.size(); ++k) {
        PenaltyParams p = base;
        p.lower = ObstacleTreatment::penalty(m_list[k]);
        const double a = convergence::asc_residuals(lattice::sweep(spec, grid, p, exec), spec, grid).asc_plus;
        detail += format(" m=%g:%.3e", m_list[k], a);
        if (k > 0) {
            const double decades = std::log10(m_list[k] / prev_m);
            ok = ok && a * std::pow(2.0, decades) <= prev;
        }
        prev = a;
        prev_m = m_list[k];
    }
    return {name, ok, detail, w.seconds()};
}

CheckResult stability_trend(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                            const PenaltyParams& p, const std::vector<double>& epsilon_list,
                            const Execution& exec) {
    Stopwatch w;
    std::vector<double> gaps;
    std::string detail = "output_gap";
    for (double eps : epsilon_list) {
        gaps.push_back(convergence::stability_probe(spec, shift_lower(spec, eps), grid, p, exec).output_gap);
        detail += format(" eps=%g:%.3e", eps, gaps.back());
    }
    bool ok = !gaps.empty();
    for (std::size_t k = 1; k < gaps.size(); ++k) ok = ok && gaps[k] < gaps[k - 1];
    if (ok) ok = gaps.back() <= 0.1 * gaps.front();
    return {name, ok, detail, w.seconds()};
}

CheckResult oracle(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& p,
                   double x0, double reference, const Execution& exec) {
    Stopwatch w;
    const SolutionField f = lattice::sweep(spec, grid, p, exec);
    const double u = f.u(0, nearest_node(grid, x0));
    const double err = std::abs(u - reference);
    return {name, err <= 2.0 * grid.dx(),
            format("lattice u=%.8f oracle=%.8f err=%.2e (tol 2dx=%.2e)", u, reference, err, 2.0 * grid.dx()),
            w.seconds()};
}

std::vector<CheckResult> for_catalog_entry(const std::string& name, const catalog::Entry& entry, const Grid& grid,
                                           const PenaltyParams& p, Solvers solvers, const Execution& exec) {
    std::vector<CheckResult> out;
    const ProblemSpec& spec = entry.spec;
    if (name == "gheat-convex" || name == "gheat-concave") {
        const double expected = name == "gheat-convex" ? 4.0 : -1.0;
        out.push_back(anchor(name + " anchor", spec, grid, p, 0.0, expected, 2e-2, solvers, 10.0, exec));
        if (solvers == Solvers::both) out.push_back(cross_budget(name + " cross_gap budget", spec, grid, p, exec));
    }
    if (solvers == Solvers::both) out.push_back(cross_refinement(name + " cross_gap refinement", spec, grid, p, exec));
    out.push_back(residual_refinement(name + " residual refinement", spec, grid, p, exec));
    if (!entry.n_list.empty()) {
        auto l = ladder(name, spec, grid, entry.n_list, p, 60.0, exec);
        out.push_back(l.monotone);
        out.push_back(l.rate);
    }
    if (name == "double-obstacle-sine") {
        PenaltyParams base = p;
        base.mode = PenaltyMode::nodewise_implicit;
        const std::vector<double> table{1, 10, 100, 1000};
        out.push_back(orderings(name + " double-index orderings", spec, grid, table, table, base, exec));
        out.push_back(stability_trend(name + " stability trend", spec, grid, p, entry.epsilon_list, exec));
    }
    if (name == "american-put-analog") {
        out.push_back(skorohod(name + " skorohod/asc", spec, grid, p, entry.m_list, exec));
    }
    return out;
}

}  // namespace gdro::checks
