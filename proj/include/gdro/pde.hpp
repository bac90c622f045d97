#ifndef GDRO_PDE_HPP
#define GDRO_PDE_HPP

#include "gdro/field.hpp"
#include "gdro/gcore.hpp"
#include "gdro/parallel.hpp"

#include <cstddef>
#include <vector>

namespace gdro::pde {

struct PdeSchemeParams {
    Grid grid;
    PenaltyParams penalty;
    /// Explicit sub-steps per grid step; 0 picks the smallest count meeting
    /// the stability bound. Output is stored on the grid's time levels only.
    std::size_t substeps = 0;
};

/// F(D^2u, Du, u, x, t) = G(sigma^2 D^2u + 2 l Du) + b Du + f(t, x, u, sigma Du).
double f_operator(double d2u, double du, double u, double x, double t, const ProblemSpec& spec);

/// Left-hand side of the stability bound for one explicit step of size dt:
///   dt (sigma_high^2 max sigma^2 / dx^2 + max|b + l sigma_e^2| / dx + kappa_f + n + m)
/// with projected obstacles contributing nothing and nodewise-implicit
/// penalties excluded.
double stability_number(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalty, double dt);

/// Sub-steps used for these parameters; throws StabilityError when an
/// explicitly requested count violates the bound.
std::size_t resolve_substeps(const ProblemSpec& spec, const PdeSchemeParams& params);

/// Generic explicit backward scheme; each obstacle penalised or projected
/// according to params.penalty.
SolutionField solve(const ProblemSpec& spec, const PdeSchemeParams& params, const Execution& exec = {});

/// Both obstacles penalised with finite intensities.
SolutionField solve_penalized_pde(const ProblemSpec& spec, const PdeSchemeParams& params,
                                  const Execution& exec = {});

/// Explicit step followed by u := min(h', max(h, u)). Penalty fields of
/// params are ignored apart from mode and kappa_f.
SolutionField solve_double_obstacle_direct(const ProblemSpec& spec, const PdeSchemeParams& params,
                                           const Execution& exec = {});

struct ResidualGrid {
    /// r(t_i, x_j) for i < n_t and interior j; NaN elsewhere.
    GridFunction r;
    /// true where the node is outside the boundary cone and counted in the sup.
    std::vector<std::uint8_t> counted;
    double interior_sup = 0.0;
};

/// max(u - h', min(u - h, -d_t u - F)) with a forward time difference and
/// central space differences, F evaluated on the node's own time level.
ResidualGrid complementarity_residual(const GridFunction& u, const ProblemSpec& spec, const Grid& grid);

inline ResidualGrid complementarity_residual(const SolutionField& field, const ProblemSpec& spec,
                                             const Grid& grid) {
    return complementarity_residual(field.u, spec, grid);
}

/// One explicit step applied to `next` (diagnostic hook for monotonicity
/// checks): returns the slice at time t - dt given the slice at t.
std::vector<double> explicit_step(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalty,
                                  std::span<const double> next, double t, double dt);

}  // namespace gdro::pde

#endif  // GDRO_PDE_HPP
