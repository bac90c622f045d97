#include "gdro/field.hpp"

namespace gdro {

void central_z(std::span<const double> u, std::span<const double> sigma, double dx, std::span<double> z) {
    const std::size_t n = u.size();
    z[0] = sigma[0] * (u[1] - u[0]) / dx;
    for (std::size_t j = 1; j + 1 < n; ++j) z[j] = sigma[j] * (u[j + 1] - u[j - 1]) / (2.0 * dx);
    z[n - 1] = sigma[n - 1] * (u[n - 1] - u[n - 2]) / dx;
}

}  // namespace gdro
