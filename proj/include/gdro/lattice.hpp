#ifndef GDRO_LATTICE_HPP
#define GDRO_LATTICE_HPP

#include "gdro/field.hpp"
#include "gdro/gcore.hpp"
#include "gdro/parallel.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gdro::lattice {

/// Coefficients of the forward dynamics frozen at one node.
struct NodeDynamics {
    double drift = 0.0;      ///< b(t,x)
    double qv_drift = 0.0;   ///< l(t,x)
    double diffusion = 0.0;  ///< sigma(t,x)
};

struct GExpectation {
    double value = 0.0;
    std::uint8_t sigma_choice = 0;        ///< 0 = sigma_low, 1 = sigma_high
    std::array<double, 2> defects{};      ///< E_sigma - max, per endpoint
    std::array<double, 2> candidates{};   ///< E_sigma
    bool left_domain = false;             ///< some probe fell outside [x_min, x_max]
    bool variance_floor = false;          ///< interpolation alone exceeded the target variance
};

/// Offset s >= 0 such that the two probes c +- s, spread onto the grid by
/// linear interpolation, have variance exactly `variance` about c. Falls back
/// to s = 0 (flagged) when interpolating at c alone already exceeds it.
struct ProbeOffset {
    double offset = 0.0;
    bool floor_hit = false;
};
ProbeOffset matched_probe_offset(double center, double variance, const Grid& grid);

/// One-step adversarial expectation of the next slice from node x at time t:
/// max over sigma in {low, high} of the symmetric two-probe average around
/// c = x + (b + l sigma^2) dt with variance (sigma * diffusion)^2 dt.
GExpectation conditional_g_expectation(std::span<const double> next_slice, double x, const NodeDynamics& dyn,
                                       const VolatilityBand& band, const Grid& grid, BoundaryMode mode);

/// Convenience overload evaluating b, l, sigma from the problem at (t, x).
GExpectation conditional_g_expectation(std::span<const double> next_slice, double t, double x,
                                       const ProblemSpec& spec, const Grid& grid);

/// Backward induction with any combination of penalty / projection per
/// obstacle. Throws StabilityError when the pointwise update is not monotone.
SolutionField sweep(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalties,
                    const Execution& exec = {});

/// Both obstacles penalised (finite n, m).
SolutionField penalized_sweep(const ProblemSpec& spec, const Grid& grid, const PenaltyParams& penalties,
                              const Execution& exec = {});

/// Lower obstacle enforced by projection, upper penalised with intensity n.
/// Mode and kappa_f are taken from `base`.
SolutionField reflected_sweep(const ProblemSpec& spec, const Grid& grid, double n_upper,
                              const PenaltyParams& base = {}, const Execution& exec = {});

struct LadderCell {
    double n = 0.0;
    double m = 0.0;
    std::optional<std::string> error;
    double sup_lower_violation = 0.0;  ///< sup (u - h)^-
    double sup_upper_violation = 0.0;  ///< sup (u - h')^+
    double gap_in_n = 0.0;  ///< sup (u^{n_k,m} - u^{n_{k-1},m})^+, zero on the first rung
    double gap_in_m = 0.0;  ///< sup (u^{n,m_{k-1}} - u^{n,m_k})^+, zero on the first rung
};

struct LadderTable {
    std::vector<double> n_list;
    std::vector<double> m_list;
    std::vector<std::vector<LadderCell>> cells;  ///< cells[n index][m index]
    std::vector<GridFunction> fields;            ///< u per cell, row-major over (n, m); empty on error
    double max_gap_in_n() const;
    double max_gap_in_m() const;
};

/// penalized_sweep over every (n, m) pair. Lists must be ascending.
LadderTable double_ladder(const ProblemSpec& spec, const Grid& grid, const std::vector<double>& n_list,
                          const std::vector<double>& m_list, const PenaltyParams& base = {},
                          const Execution& exec = {});

}  // namespace gdro::lattice

#endif  // GDRO_LATTICE_HPP
