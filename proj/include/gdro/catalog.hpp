#ifndef GDRO_CATALOG_HPP
#define GDRO_CATALOG_HPP

#include "gdro/gcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gdro::catalog {

/// A built-in problem with the grid, penalties and ladders used by the
/// acceptance runs.
struct Entry {
    ProblemSpec spec;
    std::size_t n_t = 0;
    std::size_t n_x = 0;
    PenaltyParams penalties;
    double x0 = 0.0;                 ///< reporting point
    std::vector<double> n_list;      ///< upper ladder (reflected sweeps)
    std::vector<double> m_list;      ///< lower ladder (penalized sweeps)
    std::vector<double> epsilon_list;
};

std::vector<std::string> names();

/// std::nullopt for unknown names.
std::optional<Entry> lookup(const std::string& name);

/// Shared builder: constant coefficients b, l, sigma as given, obstacles and
/// data as expression strings.
ProblemSpec make_spec(std::string name, double horizon, double x_min, double x_max, VolatilityBand band,
                      const std::string& terminal, const std::string& lower, const std::string& upper,
                      const std::string& generator = "0", const std::string& diffusion = "1",
                      const std::string& drift = "0", const std::string& qv_drift = "0",
                      BoundaryMode boundary = BoundaryMode::constant);

}  // namespace gdro::catalog

#endif  // GDRO_CATALOG_HPP
