#ifndef GDRO_FIELD_HPP
#define GDRO_FIELD_HPP

#include "gdro/gcore.hpp"

#include <cstdint>
#include <vector>

namespace gdro {

/// Output of a backward sweep on a Grid. Row i holds time t_i; row n_t is the
/// terminal slice.
struct SolutionField {
    SolutionField() = default;
    SolutionField(std::size_t rows, std::size_t cols)
        : u(rows, cols), z(rows, cols), a_plus(rows, cols), a_minus(rows, cols), k_defect(rows, cols),
          sigma_choice(rows * cols, 0) {}

    GridFunction u;
    GridFunction z;         ///< sigma(t,x) * central difference of u
    GridFunction a_plus;    ///< increment of the lower pushing process on (t_i, t_{i+1}]
    GridFunction a_minus;   ///< increment of the upper pushing process
    GridFunction k_defect;  ///< expectation loss of the non-selected volatility (<= 0)
    std::vector<std::uint8_t> sigma_choice;  ///< 0 = sigma_low, 1 = sigma_high

    std::uint8_t choice(std::size_t i, std::size_t j) const { return sigma_choice[i * u.cols() + j]; }

    struct Diagnostics {
        std::size_t probes_outside = 0;    ///< lattice probes that left the domain
        std::size_t variance_floor_hits = 0;  ///< nodes where interpolation variance exceeded the target
        std::size_t substeps = 1;          ///< pde sub-steps per grid step
    } diagnostics;

    std::size_t rows() const { return u.rows(); }
    std::size_t cols() const { return u.cols(); }
};

/// z_j = sigma_j * (u_{j+1} - u_{j-1}) / (2 dx), one-sided at the edges.
void central_z(std::span<const double> u, std::span<const double> sigma, double dx, std::span<double> z);

}  // namespace gdro

#endif  // GDRO_FIELD_HPP
