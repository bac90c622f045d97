#include "gdro/pde.hpp"

#include "gdro/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gdro::pde {

double f_operator(double d2u, double du, double u, double x, double t, const ProblemSpec& spec) {
    const auto tx = Bindings::tx(t, x);
    const double s = spec.diffusion(tx);
    const double h = s * s * d2u + 2.0 * spec.qv_drift(tx) * du;
    return g_eval(h, spec.band) + spec.drift(tx) * du + spec.generator(Bindings::txyz(t, x, u, s * du));
}

namespace {

struct RowCoefficients {
    std::vector<double> drift, qv_drift, diffusion, lower, upper;
};

RowCoefficients sample_row(const ProblemSpec& spec, const Grid& grid, double t) {
    const std::size_t nx = grid.n_x();
    RowCoefficients c{std::vector<double>(nx), std::vector<double>(nx), std::vector<double>(nx),
                      std::vector<double>(nx), std::vector<double>(nx)};
    for (std::size_t j = 0; j < nx; ++j) {
        const auto tx = Bindings::tx(t, grid.x(j));
        c.drift[j] = spec.drift(tx);
        c.qv_drift[j] = spec.qv_drift(tx);
        c.diffusion[j] = spec.diffusion(tx);
        c.lower[j] = spec.lower(tx);
        c.upper[j] = spec.upper(tx);
    }
    return c;
}

struct StepOutput {
    std::span<double> u, a_plus, a_minus, k_defect;
    std::span<std::uint8_t> choice;
};

// u(t) from u(t + dt): upwinded drift per volatility branch, central second
// difference, ghost values from the boundary continuation.
void step(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalty, const RowCoefficients& c,
          std::span<const double> next, double t, double dt, bool accumulate, const StepOutput& out,
          const Execution& exec) {
    const double dx = grid.dx();
    const bool f_uses_y = spec.generator.depends_on(Var::y);
    parallel_for(grid.n_x(), exec, [&](std::size_t jj) {
        const long j = static_cast<long>(jj);
        const double left = extended_node(next, j - 1, spec.boundary);
        const double mid = next[jj];
        const double right = extended_node(next, j + 1, spec.boundary);
        const double d2 = (right - 2.0 * mid + left) / (dx * dx);
        const double d_fwd = (right - mid) / dx, d_bwd = (mid - left) / dx;
        const double s = c.diffusion[jj];
        double branch[2];
        for (int e = 0; e < 2; ++e) {
            const double sig = spec.band.endpoint(e);
            const double drift = c.drift[jj] + c.qv_drift[jj] * sig * sig;
            branch[e] = 0.5 * sig * sig * s * s * d2 + drift * (drift >= 0.0 ? d_fwd : d_bwd);
        }
        const std::uint8_t pick = branch[1] > branch[0] ? 1 : 0;
        const double x = grid.x(jj);
        const double z = s * (right - left) / (2.0 * dx);
        auto f = [&](double y) { return spec.generator(Bindings::txyz(t, x, y, z)); };
        const NodeUpdate upd =
            penalty_update(mid + dt * branch[pick], mid, dt, c.lower[jj], c.upper[jj], penalty, f, f_uses_y);
        out.u[jj] = upd.value;
        const double defect = dt * (branch[1 - pick] - branch[pick]);
        if (accumulate) {
            out.a_plus[jj] += upd.a_plus;
            out.a_minus[jj] += upd.a_minus;
            out.k_defect[jj] += defect;
        } else {
            out.a_plus[jj] = upd.a_plus;
            out.a_minus[jj] = upd.a_minus;
            out.k_defect[jj] = defect;
        }
        out.choice[jj] = pick;
    });
}

}  // namespace

double stability_number(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalty, double dt) {
    const CoefficientTable coef = sample_coefficients(spec, grid);
    const CoefficientBounds bounds = coefficient_bounds(coef, spec.band);
    const double dx = grid.dx();
    const double sh = spec.band.high();
    double rate = sh * sh * bounds.max_diffusion * bounds.max_diffusion / (dx * dx) + bounds.max_drift / dx +
                  penalty.kappa_f;
    if (penalty.mode == PenaltyMode::explicit_step) rate += penalty.explicit_penalty_rate();
    return dt * rate;
}

std::size_t resolve_substeps(const ProblemSpec& spec, const PdeSchemeParams& params) {
    const double dt = params.grid.dt();
    const double number = stability_number(spec, params.grid, params.penalty, dt);
    if (params.substeps > 0) {
        const double per_step = number / static_cast<double>(params.substeps);
        if (per_step > 1.0) {
            std::ostringstream os;
            os << "explicit pde step unstable: stability number " << per_step << " > 1 with "
               << params.substeps << " sub-steps (need " << std::ceil(number) << ")";
            throw StabilityError(os.str(), per_step);
        }
        return params.substeps;
    }
    std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(number)));
    while (number / static_cast<double>(k) > 1.0) ++k;
    return k;
}

SolutionField solve(const ProblemSpec& spec, const PdeSchemeParams& params, const Execution& exec) {
    const Grid& grid = params.grid;
    const std::size_t k = resolve_substeps(spec, params);
    const double dt = grid.dt() / static_cast<double>(k);
    check_penalty_step(params.penalty, dt);
    const std::size_t nt = grid.n_t(), nx = grid.n_x();

    SolutionField field(nt + 1, nx);
    field.diagnostics.substeps = k;
    for (std::size_t j = 0; j < nx; ++j)
        field.u(nt, j) = spec.terminal(Bindings::tx(grid.horizon(), grid.x(j)));

    std::vector<double> work(nx), scratch(nx);
    std::vector<double> diffusion_row(nx);
    for (std::size_t i = nt; i-- > 0;) {
        std::copy(field.u.row(i + 1).begin(), field.u.row(i + 1).end(), work.begin());
        const StepOutput out{field.u.row(i), field.a_plus.row(i), field.a_minus.row(i), field.k_defect.row(i),
                             std::span<std::uint8_t>(field.sigma_choice.data() + i * nx, nx)};
        for (std::size_t s = 0; s < k; ++s) {
            // Sub-step s lands on t_{i+1} - (s + 1) dt; the last one on t_i.
            const double t = s + 1 == k ? grid.t(i) : grid.t(i + 1) - static_cast<double>(s + 1) * dt;
            const RowCoefficients c = sample_row(spec, grid, t);
            const StepOutput sub{std::span<double>(scratch), out.a_plus, out.a_minus, out.k_defect, out.choice};
            step(spec, grid, params.penalty, c, work, t, dt, s > 0, sub, exec);
            std::swap(work, scratch);
        }
        std::copy(work.begin(), work.end(), field.u.row(i).begin());
    }
    for (std::size_t i = 0; i <= nt; ++i) {
        for (std::size_t j = 0; j < nx; ++j)
            diffusion_row[j] = spec.diffusion(Bindings::tx(grid.t(i), grid.x(j)));
        central_z(field.u.row(i), diffusion_row, grid.dx(), field.z.row(i));
    }
    return field;
}

SolutionField solve_penalized_pde(const ProblemSpec& spec, const PdeSchemeParams& params, const Execution& exec) {
    if (params.penalty.upper.projection || params.penalty.lower.projection)
        throw std::invalid_argument("solve_penalized_pde requires finite penalty intensities for both obstacles");
    return solve(spec, params, exec);
}

SolutionField solve_double_obstacle_direct(const ProblemSpec& spec, const PdeSchemeParams& params,
                                           const Execution& exec) {
    PdeSchemeParams p = params;
    p.penalty.upper = ObstacleTreatment::project();
    p.penalty.lower = ObstacleTreatment::project();
    return solve(spec, p, exec);
}

std::vector<double> explicit_step(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalty,
                                  std::span<const double> next, double t, double dt) {
    const std::size_t nx = grid.n_x();
    std::vector<double> u(nx), ap(nx), am(nx), kd(nx);
    std::vector<std::uint8_t> ch(nx);
    const RowCoefficients c = sample_row(spec, grid, t - dt);
    step(spec, grid, penalty, c, next, t - dt, dt, false, StepOutput{u, ap, am, kd, ch}, Execution{});
    return u;
}

ResidualGrid complementarity_residual(const GridFunction& u, const ProblemSpec& spec, const Grid& grid) {
    const std::size_t nt = grid.n_t(), nx = grid.n_x();
    const double dt = grid.dt(), dx = grid.dx();
    ResidualGrid out{GridFunction(nt + 1, nx, std::numeric_limits<double>::quiet_NaN()),
                     std::vector<std::uint8_t>((nt + 1) * nx, 0), 0.0};
    const CoefficientBounds bounds = coefficient_bounds(sample_coefficients(spec, grid), spec.band);
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = grid.t(i);
        const double cone = contaminated_cone(bounds, spec.band, grid.horizon() - t, dx);
        for (std::size_t j = 1; j + 1 < nx; ++j) {
            const double x = grid.x(j);
            const double v = u(i, j);
            const double d2 = (u(i, j + 1) - 2.0 * v + u(i, j - 1)) / (dx * dx);
            const double d1 = (u(i, j + 1) - u(i, j - 1)) / (2.0 * dx);
            const double dtu = (u(i + 1, j) - v) / dt;
            const auto tx = Bindings::tx(t, x);
            const double r =
                std::max(v - spec.upper(tx), std::min(v - spec.lower(tx), -dtu - f_operator(d2, d1, v, x, t, spec)));
            out.r(i, j) = r;
            if (x - grid.x_min() > cone && grid.x_max() - x > cone) {
                out.counted[i * nx + j] = 1;
                out.interior_sup = std::max(out.interior_sup, std::abs(r));
            }
        }
    }
    return out;
}

}  // namespace gdro::pde
