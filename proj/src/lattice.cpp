#include "gdro/lattice.hpp"

#include "gdro/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gdro::lattice {

namespace {

// Variance about `center` of the two-probe law c +- s after linear
// interpolation onto the (unbounded) uniform node lattice.
double spread_variance(double center, double s, const Grid& grid) {
    auto interp_sq = [&](double p) {
        const double pos = (p - grid.x_min()) / grid.dx();
        const double base = std::floor(pos);
        const double w = pos - base;
        const double left = grid.x_min() + base * grid.dx() - center;
        const double right = left + grid.dx();
        return (1.0 - w) * left * left + w * right * right;
    };
    return 0.5 * (interp_sq(center + s) + interp_sq(center - s));
}

}  // namespace

ProbeOffset matched_probe_offset(double center, double variance, const Grid& grid) {
    const double dx = grid.dx();
    if (!(variance >= 0.0) || !std::isfinite(variance))
        throw std::invalid_argument("probe variance must be finite and non-negative");
    double v_prev = spread_variance(center, 0.0, grid);
    if (v_prev >= variance) return {0.0, v_prev > variance};

    // The spread variance is piecewise linear and non-decreasing in s with
    // kinks where either probe crosses a node; walk the kinks, then solve the
    // linear piece that brackets the target.
    const double pos = (center - grid.x_min()) / dx;
    const double frac = pos - std::floor(pos);
    double next_up = (1.0 - frac) * dx;
    double next_down = frac > 0.0 ? frac * dx : dx;
    double s_prev = 0.0;
    for (;;) {
        const double s_next = std::min(next_up, next_down);
        const double v_next = spread_variance(center, s_next, grid);
        if (v_next >= variance) {
            const double s = s_prev + (variance - v_prev) * (s_next - s_prev) / (v_next - v_prev);
            return {std::clamp(s, s_prev, s_next), false};
        }
        if (next_up <= s_next) next_up += dx;
        if (next_down <= s_next) next_down += dx;
        s_prev = s_next;
        v_prev = v_next;
    }
}

GExpectation conditional_g_expectation(std::span<const double> next_slice, double x, const NodeDynamics& dyn,
                                       const VolatilityBand& band, const Grid& grid, BoundaryMode mode) {
    GExpectation out;
    const double dt = grid.dt();
    const double lo = grid.x_min(), hi = grid.x_max();
    const int count = band.degenerate() ? 1 : 2;
    for (int e = 0; e < count; ++e) {
        const double sigma = band.endpoint(e);
        const double center = x + (dyn.drift + dyn.qv_drift * sigma * sigma) * dt;
        const double spread = sigma * dyn.diffusion;
        const ProbeOffset probe = matched_probe_offset(center, spread * spread * dt, grid);
        const double up = center + probe.offset, down = center - probe.offset;
        out.candidates[e] = 0.5 * (interpolate(next_slice, grid, up, mode) + interpolate(next_slice, grid, down, mode));
        out.left_domain = out.left_domain || up > hi || down < lo;
        out.variance_floor = out.variance_floor || probe.floor_hit;
    }
    if (count == 1) out.candidates[1] = out.candidates[0];
    // Ties resolve to sigma_low.
    out.sigma_choice = out.candidates[1] > out.candidates[0] ? 1 : 0;
    out.value = out.candidates[out.sigma_choice];
    out.defects = {out.candidates[0] - out.value, out.candidates[1] - out.value};
    return out;
}

GExpectation conditional_g_expectation(std::span<const double> next_slice, double t, double x,
                                       const ProblemSpec& spec, const Grid& grid) {
    const auto tx = Bindings::tx(t, x);
    const NodeDynamics dyn{spec.drift(tx), spec.qv_drift(tx), spec.diffusion(tx)};
    return conditional_g_expectation(next_slice, x, dyn, spec.band, grid, spec.boundary);
}

SolutionField sweep(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalties,
                    const Execution& exec) {
    check_penalty_step(penalties, grid.dt());
    const CoefficientTable coef = sample_coefficients(spec, grid);
    const std::size_t nt = grid.n_t(), nx = grid.n_x();
    const double dt = grid.dt();
    const bool f_uses_y = spec.generator.depends_on(Var::y);

    SolutionField field(nt + 1, nx);
    std::copy(coef.terminal.begin(), coef.terminal.end(), field.u.row(nt).begin());
    central_z(field.u.row(nt), coef.diffusion.row(nt), grid.dx(), field.z.row(nt));

    std::vector<std::uint8_t> left(nx), floor_hit(nx);
    for (std::size_t step = nt; step-- > 0;) {
        const std::size_t i = step;
        const double t = grid.t(i);
        const auto next = field.u.row(i + 1);
        const auto z_next = field.z.row(i + 1);
        auto row_u = field.u.row(i);
        parallel_for(nx, exec, [&](std::size_t j) {
            const double x = grid.x(j);
            const NodeDynamics dyn{coef.drift(i, j), coef.qv_drift(i, j), coef.diffusion(i, j)};
            const GExpectation ce = conditional_g_expectation(next, x, dyn, spec.band, grid, spec.boundary);
            const double zt = z_next[j];
            auto f = [&](double y) { return spec.generator(Bindings::txyz(t, x, y, zt)); };
            const NodeUpdate upd = penalty_update(ce.value, ce.value, dt, coef.lower(i, j), coef.upper(i, j),
                                                  penalties, f, f_uses_y);
            row_u[j] = upd.value;
            field.a_plus(i, j) = upd.a_plus;
            field.a_minus(i, j) = upd.a_minus;
            field.k_defect(i, j) = std::min(ce.defects[0], ce.defects[1]);
            field.sigma_choice[i * nx + j] = ce.sigma_choice;
            left[j] = ce.left_domain;
            floor_hit[j] = ce.variance_floor;
        });
        central_z(field.u.row(i), coef.diffusion.row(i), grid.dx(), field.z.row(i));
        for (std::size_t j = 0; j < nx; ++j) {
            field.diagnostics.probes_outside += left[j];
            field.diagnostics.variance_floor_hits += floor_hit[j];
        }
    }
    return field;
}

SolutionField penalized_sweep(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalties,
                              const Execution& exec) {
    if (penalties.upper.projection || penalties.lower.projection)
        throw std::invalid_argument("penalized_sweep requires finite penalty intensities for both obstacles");
    return sweep(spec, grid, penalties, exec);
}

SolutionField reflected_sweep(const ProblemSpec& spec, const Grid& grid, double n_upper,
                              const PenaltyParams& base, const Execution& exec) {
    PenaltyParams p = base;
    p.upper = ObstacleTreatment::penalty(n_upper);
    p.lower = ObstacleTreatment::project();
    return sweep(spec, grid, p, exec);
}

double LadderTable::max_gap_in_n() const {
    double g = 0.0;
    for (const auto& row : cells)
        for (const auto& c : row) g = std::max(g, c.gap_in_n);
    return g;
}

double LadderTable::max_gap_in_m() const {
    double g = 0.0;
    for (const auto& row : cells)
        for (const auto& c : row) g = std::max(g, c.gap_in_m);
    return g;
}

namespace {

double sup_positive_difference(const GridFunction& a, const GridFunction& b) {
    double g = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) g = std::max(g, a.data()[k] - b.data()[k]);
    return g;
}

}  // namespace

LadderTable double_ladder(const ProblemSpec& spec, const Grid& grid, const std::vector<double>& n_list,
                          const std::vector<double>& m_list, const PenaltyParams& base, const Execution& exec) {
    if (!std::is_sorted(n_list.begin(), n_list.end()) || !std::is_sorted(m_list.begin(), m_list.end()))
        throw std::invalid_argument("ladder intensity lists must be sorted ascending");
    LadderTable table{n_list, m_list, {}, {}};
    if (n_list.empty() || m_list.empty()) return table;
    const CoefficientTable coef = sample_coefficients(spec, grid);

    table.cells.assign(n_list.size(), std::vector<LadderCell>(m_list.size()));
    table.fields.resize(n_list.size() * m_list.size());
    for (std::size_t a = 0; a < n_list.size(); ++a)
        for (std::size_t b = 0; b < m_list.size(); ++b) {
            LadderCell& cell = table.cells[a][b];
            cell.n = n_list[a];
            cell.m = m_list[b];
            PenaltyParams p = base;
            p.upper = ObstacleTreatment::penalty(cell.n);
            p.lower = ObstacleTreatment::penalty(cell.m);
            GridFunction& u = table.fields[a * m_list.size() + b];
            try {
                u = penalized_sweep(spec, grid, p, exec).u;
            } catch (const std::exception& e) {
                cell.error = e.what();
                continue;
            }
            for (std::size_t k = 0; k < u.data().size(); ++k) {
                cell.sup_lower_violation =
                    std::max(cell.sup_lower_violation, negative_part(u.data()[k] - coef.lower.data()[k]));
                cell.sup_upper_violation =
                    std::max(cell.sup_upper_violation, positive_part(u.data()[k] - coef.upper.data()[k]));
            }
            if (a > 0 && !table.cells[a - 1][b].error)
                cell.gap_in_n = sup_positive_difference(u, table.fields[(a - 1) * m_list.size() + b]);
            if (b > 0 && !table.cells[a][b - 1].error)
                cell.gap_in_m = sup_positive_difference(table.fields[a * m_list.size() + b - 1], u);
        }
    return table;
}

}  // namespace gdro::lattice

