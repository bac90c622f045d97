#include "gdro/convergence.hpp"

#include "gdro/lattice.hpp"
#include "gdro/pde.hpp"
#include "gdro/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gdro::convergence {

double ConvergenceReport::max_mono_violation() const {
    double v = 0.0;
    for (const auto& r : rungs) v = std::max(v, r.mono_violation);
    return v;
}

double ConvergenceReport::upper_violation_decades() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rungs)
        if (r.sup_upper_violation > 0.0) {
            lo = std::min(lo, r.sup_upper_violation);
            hi = std::max(hi, r.sup_upper_violation);
        }
    return hi > 0.0 ? std::log10(hi / lo) : 0.0;
}

std::optional<double> fit_log_slope(std::span<const double> x, std::span<const double> y, double floor) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
        if (!(y[k] > floor) || !(x[k] > 0.0)) continue;
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 2) return std::nullopt;
    const double c = static_cast<double>(count);
    const double denom = c * sxx - sx * sx;
    if (denom <= 0.0) return std::nullopt;
    return (c * sxy - sx * sy) / denom;
}

AscResiduals asc_residuals(const SolutionField& field, const ProblemSpec& spec, const Grid& grid) {
    const CoefficientTable coef = sample_coefficients(spec, grid);
    AscResiduals out;
    double total_plus = 0.0, total_minus = 0.0;
    for (std::size_t j = 0; j < grid.n_x(); ++j) {
        double col_plus = 0.0, col_minus = 0.0;
        for (std::size_t i = 0; i < grid.n_t(); ++i) {
            col_plus += (field.u(i, j) - coef.lower(i, j)) * field.a_plus(i, j);
            col_minus += (coef.upper(i, j) - field.u(i, j)) * field.a_minus(i, j);
        }
        out.asc_plus = std::max(out.asc_plus, std::abs(col_plus));
        out.asc_minus = std::max(out.asc_minus, std::abs(col_minus));
        total_plus += col_plus;
        total_minus += col_minus;
    }
    out.global_plus = std::abs(total_plus);
    out.global_minus = std::abs(total_minus);
    return out;
}

double interior_gap(const GridFunction& a, const GridFunction& b, const ProblemSpec& spec, const Grid& grid,
                    std::size_t* counted) {
    const CoefficientBounds bounds = coefficient_bounds(sample_coefficients(spec, grid), spec.band);
    double gap = 0.0;
    std::size_t nodes = 0;
    for (std::size_t i = 0; i < grid.n_t(); ++i) {
        const double cone = contaminated_cone(bounds, spec.band, grid.horizon() - grid.t(i), grid.dx());
        for (std::size_t j = 0; j < grid.n_x(); ++j) {
            const double x = grid.x(j);
            if (x - grid.x_min() <= cone || grid.x_max() - x <= cone) continue;
            gap = std::max(gap, std::abs(a(i, j) - b(i, j)));
            ++nodes;
        }
    }
    if (counted) *counted = nodes;
    return gap;
}

CrossValidation cross_validate(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalties,
                               const Execution& exec) {
    const SolutionField lat = lattice::sweep(spec, grid, penalties, exec);
    const SolutionField pd = pde::solve(spec, pde::PdeSchemeParams{grid, penalties, 0}, exec);
    CrossValidation out;
    out.cross_gap = interior_gap(pd.u, lat.u, spec, grid, &out.nodes);
    out.pde_substeps = pd.diagnostics.substeps;
    return out;
}

ConvergenceReport monotone_ladder(const ProblemSpec& spec, const Grid& grid, const std::vector<double>& n_list,
                                  const PenaltyParams& base, const LadderOptions& options, const Execution& exec) {
    for (std::size_t k = 1; k < n_list.size(); ++k)
        if (!(n_list[k] > n_list[k - 1])) throw std::invalid_argument("ladder intensities must be strictly increasing");

    const CoefficientTable coef = sample_coefficients(spec, grid);
    ConvergenceReport report;
    std::vector<SolutionField> fields;
    fields.reserve(n_list.size());
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        PenaltyParams p = base;
        p.upper = ObstacleTreatment::penalty(n_list[k]);
        p.lower = ObstacleTreatment::project();
        fields.push_back(lattice::sweep(spec, grid, p, exec));
        const SolutionField& f = fields.back();

        RungRecord rec;
        rec.n = n_list[k];
        const auto& u = f.u.data();
        // Obstacle violations over t < T: the penalty cannot act on the terminal slice.
        const std::size_t interior = grid.n_t() * grid.n_x();
        for (std::size_t q = 0; q < interior; ++q) {
            rec.sup_upper_violation = std::max(rec.sup_upper_violation, positive_part(u[q] - coef.upper.data()[q]));
            rec.sup_lower_violation = std::max(rec.sup_lower_violation, negative_part(u[q] - coef.lower.data()[q]));
        }
        if (k > 0) {
            const auto& prev = fields[k - 1].u.data();
            for (std::size_t q = 0; q < u.size(); ++q)
                rec.mono_violation = std::max(rec.mono_violation, positive_part(u[q] - prev[q]));
        }
        const AscResiduals asc = asc_residuals(f, spec, grid);
        rec.asc_plus = asc.asc_plus;
        rec.asc_minus = asc.asc_minus;
        rec.asc_plus_global = asc.global_plus;
        rec.asc_minus_global = asc.global_minus;
        if (options.cross_validate) {
            const SolutionField pd = pde::solve(spec, pde::PdeSchemeParams{grid, p, 0}, exec);
            rec.cross_gap = interior_gap(pd.u, f.u, spec, grid);
        }
        report.rungs.push_back(rec);
    }
    if (!fields.empty()) {
        const GridFunction& z_limit = fields.back().z;
        for (std::size_t k = 0; k < fields.size(); ++k)
            report.rungs[k].z_gap = interior_gap(fields[k].z, z_limit, spec, grid);
    }

    std::vector<double> ns, vs;
    for (const auto& r : report.rungs) {
        ns.push_back(r.n);
        vs.push_back(r.sup_upper_violation);
    }
    report.rate_slope = fit_log_slope(ns, vs, 10.0 * std::numeric_limits<double>::epsilon());
    return report;
}

StabilityProbe stability_probe(const ProblemSpec& spec1, const ProblemSpec& spec2, const Grid& grid,
                               const PenaltyParams& penalties, const Execution& exec) {
    StabilityProbe out;
    const SolutionField a = lattice::sweep(spec1, grid, penalties, exec);
    const SolutionField b = lattice::sweep(spec2, grid, penalties, exec);
    for (std::size_t q = 0; q < a.u.data().size(); ++q)
        out.output_gap = std::max(out.output_gap, std::abs(a.u.data()[q] - b.u.data()[q]));

    static constexpr double samples[] = {-1.0, 0.0, 1.0};
    for (std::size_t i = 0; i <= grid.n_t(); ++i)
        for (std::size_t j = 0; j < grid.n_x(); ++j) {
            const double t = grid.t(i), x = grid.x(j);
            const auto tx = Bindings::tx(t, x);
            out.lower_gap = std::max(out.lower_gap, std::abs(spec1.lower(tx) - spec2.lower(tx)));
            out.upper_gap = std::max(out.upper_gap, std::abs(spec1.upper(tx) - spec2.upper(tx)));
            if (i == grid.n_t())
                out.terminal_gap = std::max(out.terminal_gap, std::abs(spec1.terminal(tx) - spec2.terminal(tx)));
            for (double y : samples)
                for (double z : samples) {
                    const auto b4 = Bindings::txyz(t, x, y, z);
                    out.generator_gap = std::max(out.generator_gap, std::abs(spec1.generator(b4) - spec2.generator(b4)));
                }
        }
    out.input_gap = std::max({out.terminal_gap, out.lower_gap, out.upper_gap, out.generator_gap});
    return out;
}

}  // namespace gdro::convergence
