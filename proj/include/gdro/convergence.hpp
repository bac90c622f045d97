#ifndef GDRO_CONVERGENCE_HPP
#define GDRO_CONVERGENCE_HPP

#include "gdro/field.hpp"
#include "gdro/gcore.hpp"
#include "gdro/parallel.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gdro::convergence {

/// One ladder rung. `m` is empty when the lower obstacle is projected.
struct RungRecord {
    double n = 0.0;
    std::optional<double> m;
    double sup_upper_violation = 0.0;  ///< sup (u - h')^+ over t < T
    double sup_lower_violation = 0.0;  ///< sup (u - h)^- over t < T
    double mono_violation = 0.0;       ///< sup (u_k - u_{k-1})^+, zero on the first rung
    double asc_plus = 0.0;
    double asc_minus = 0.0;
    double asc_plus_global = 0.0;
    double asc_minus_global = 0.0;
    std::optional<double> cross_gap;   ///< set when the ladder also ran the pde solver
    std::optional<double> z_gap;       ///< interior sup |z_n - z_finest|
};

struct ConvergenceReport {
    std::vector<RungRecord> rungs;
    std::optional<double> rate_slope;  ///< empty when fewer than two rungs clear the floor
    double rate_exponent_target = 1.0;

    double max_mono_violation() const;
    /// log10(max / min) of the positive upper violations.
    double upper_violation_decades() const;
};

struct LadderOptions {
    bool cross_validate = false;
};

/// reflected_sweep for each n (strictly increasing). Mode and kappa_f come
/// from `base`.
ConvergenceReport monotone_ladder(const ProblemSpec& spec, const Grid& grid, const std::vector<double>& n_list,
                                  const PenaltyParams& base = {}, const LadderOptions& options = {},
                                  const Execution& exec = {});

/// Least-squares slope of log y against log x over points with y > floor.
std::optional<double> fit_log_slope(std::span<const double> x, std::span<const double> y, double floor);

struct AscResiduals {
    double asc_plus = 0.0;    ///< sup over x of |sum_t (u - h) da^+|
    double asc_minus = 0.0;   ///< sup over x of |sum_t (h' - u) da^-|
    double global_plus = 0.0;   ///< |sum over all nodes|
    double global_minus = 0.0;
};

AscResiduals asc_residuals(const SolutionField& field, const ProblemSpec& spec, const Grid& grid);

struct StabilityProbe {
    double output_gap = 0.0;  ///< sup |u1 - u2| over all nodes
    double input_gap = 0.0;   ///< max of the component gaps below
    double terminal_gap = 0.0;
    double lower_gap = 0.0;
    double upper_gap = 0.0;
    double generator_gap = 0.0;
};

/// Matched lattice sweeps of two problems on the same grid.
StabilityProbe stability_probe(const ProblemSpec& spec1, const ProblemSpec& spec2, const Grid& grid,
                               const PenaltyParams& penalties, const Execution& exec = {});

struct CrossValidation {
    double cross_gap = 0.0;  ///< sup |u_pde - u_lattice| over the uncontaminated interior, t < T
    std::size_t nodes = 0;   ///< nodes counted
    std::size_t pde_substeps = 1;
};

/// Both solvers under identical penalty parameters.
CrossValidation cross_validate(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalties,
                               const Execution& exec = {});

/// sup over t < T and the uncontaminated interior of |a - b|.
double interior_gap(const GridFunction& a, const GridFunction& b, const ProblemSpec& spec, const Grid& grid,
                    std::size_t* counted = nullptr);

}  // namespace gdro::convergence

#endif  // GDRO_CONVERGENCE_HPP
