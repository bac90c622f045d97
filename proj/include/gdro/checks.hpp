#ifndef GDRO_CHECKS_HPP
#define GDRO_CHECKS_HPP

#include "gdro/catalog.hpp"
#include "gdro/gcore.hpp"
#include "gdro/parallel.hpp"

#include <string>
#include <vector>

namespace gdro::checks {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Values at or below this are treated as roundoff when asking whether a
/// quantity decreased under refinement.
inline constexpr double kRoundoffFloor = 1e-9;

enum class Solvers { pde, lattice, both };

/// |u(0, x0) - expected| <= tol for each requested solver, each run under
/// `max_seconds`.
CheckResult anchor(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& p,
                   double x0, double expected, double tol, Solvers solvers, double max_seconds,
                   const Execution& exec = {});

/// cross_gap <= 5 (dt + dx^2).
CheckResult cross_budget(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& p,
                         const Execution& exec = {});

/// cross_gap on grid.refined() below cross_gap on grid (or both at roundoff).
CheckResult cross_refinement(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                             const PenaltyParams& p, const Execution& exec = {});

/// Residual of the direct double-obstacle pde solution drops by >= 2 under
/// refinement (or both at roundoff).
CheckResult residual_refinement(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                                const PenaltyParams& p, const Execution& exec = {});

/// Monotone ladder: mono_violation <= 1e-9 on every rung, and the rate fit.
struct LadderChecks {
    CheckResult monotone;
    CheckResult rate;
};
LadderChecks ladder(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                    const std::vector<double>& n_list, const PenaltyParams& base, double max_seconds,
                    const Execution& exec = {});

/// Pointwise orderings over the (n, m) table and dominance of the reflected
/// sweep over every m at each n.
CheckResult orderings(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                      const std::vector<double>& n_list, const std::vector<double>& m_list,
                      const PenaltyParams& base, const Execution& exec = {});

/// asc_plus of the reflected sweep is exactly zero and the penalized m-ladder
/// halves asc_plus (at least) per decade of m.
CheckResult skorohod(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& base,
                     const std::vector<double>& m_list, const Execution& exec = {});

/// h + eps perturbations: output_gap strictly decreasing along the list and
/// the last at most a tenth of the first.
CheckResult stability_trend(const std::string& name, const ProblemSpec& spec, const Grid& grid,
                            const PenaltyParams& p, const std::vector<double>& epsilon_list,
                            const Execution& exec = {});

/// Lattice u(0, x0) within 2 dx of a reference value.
CheckResult oracle(const std::string& name, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& p,
                   double x0, double reference, const Execution& exec = {});

/// Checks applicable to a catalog entry, on its own grid.
std::vector<CheckResult> for_catalog_entry(const std::string& name, const catalog::Entry& entry, const Grid& grid,
                                           const PenaltyParams& p, Solvers solvers, const Execution& exec = {});

/// Copy of `spec` with `eps` added to the lower obstacle.
ProblemSpec shift_lower(const ProblemSpec& spec, double eps);

/// Nearest grid index to x.
std::size_t nearest_node(const Grid& grid, double x);

}  // namespace gdro::checks

#endif  // GDRO_CHECKS_HPP
