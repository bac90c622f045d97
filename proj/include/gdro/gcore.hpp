#ifndef GDRO_GCORE_HPP
#define GDRO_GCORE_HPP

#include "gdro/expr.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdro {

/// Volatility uncertainty interval [sigma_low, sigma_high], 0 < low <= high.
class VolatilityBand {
public:
    VolatilityBand(double sigma_low, double sigma_high);
    double low() const { return low_; }
    double high() const { return high_; }
    bool degenerate() const { return low_ == high_; }
    /// Endpoint by control index: 0 = low, 1 = high.
    double endpoint(int index) const { return index == 0 ? low_ : high_; }

private:
    double low_;
    double high_;
};

/// G(a) = 1/2 (sigma_high^2 a^+ - sigma_low^2 a^-).
double g_eval(double a, const VolatilityBand& band);

/// How grid functions are continued past [x_min, x_max].
enum class BoundaryMode {
    constant,   ///< repeat the edge value; monotone
    curvature,  ///< quadratic through the last three nodes; exact on quadratics, not monotone
};

std::string to_string(BoundaryMode m);
BoundaryMode boundary_mode_from_string(const std::string& s);

struct ProblemSpec {
    std::string name;
    double horizon = 1.0;
    double x_min = -1.0;
    double x_max = 1.0;
    VolatilityBand band{1.0, 1.0};
    Expression drift;        ///< b(t,x)
    Expression qv_drift;     ///< l(t,x), coefficient of d<B>
    Expression diffusion;    ///< sigma(t,x)
    Expression generator;    ///< f(t,x,y,z)
    Expression terminal;     ///< phi(x)
    Expression lower;        ///< h(t,x)
    Expression upper;        ///< h'(t,x)
    BoundaryMode boundary = BoundaryMode::constant;
};

/// Uniform space-time grid on [0,T] x [x_min, x_max].
class Grid {
public:
    Grid(double horizon, double x_min, double x_max, std::size_t n_t, std::size_t n_x);
    Grid(const ProblemSpec& spec, std::size_t n_t, std::size_t n_x)
        : Grid(spec.horizon, spec.x_min, spec.x_max, n_t, n_x) {}

    std::size_t n_t() const { return n_t_; }
    std::size_t n_x() const { return n_x_; }
    double horizon() const { return horizon_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double dt() const { return dt_; }
    double dx() const { return dx_; }
    double t(std::size_t i) const { return static_cast<double>(i) * dt_; }
    double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx_; }

    /// Same domain, dx halved and dt quartered.
    Grid refined() const { return Grid(horizon_, x_min_, x_max_, 4 * n_t_, 2 * (n_x_ - 1) + 1); }

private:
    double horizon_, x_min_, x_max_;
    std::size_t n_t_, n_x_;
    double dt_, dx_;
};

/// Treatment of one obstacle: a penalty with finite intensity, or exact
/// projection onto the constraint.
struct ObstacleTreatment {
    bool projection = false;
    double intensity = 0.0;

    static ObstacleTreatment penalty(double intensity) { return {false, intensity}; }
    static ObstacleTreatment project() { return {true, 0.0}; }
    bool active() const { return projection || intensity > 0.0; }
};

enum class PenaltyMode { explicit_step, nodewise_implicit };

std::string to_string(PenaltyMode m);
PenaltyMode penalty_mode_from_string(const std::string& s);

struct PenaltyParams {
    ObstacleTreatment upper;  ///< n: pushes the solution below h'
    ObstacleTreatment lower;  ///< m: pushes the solution above h
    PenaltyMode mode = PenaltyMode::explicit_step;
    double kappa_f = 5.0;     ///< configured Lipschitz bound of f in (y, z)

    /// Sum of the finite penalty intensities that enter an explicit step.
    double explicit_penalty_rate() const;
};

/// Numerical-stability rejection (CLI exit code 3).
class StabilityError : public std::runtime_error {
public:
    StabilityError(const std::string& what, double bound) : std::runtime_error(what), bound_(bound) {}
    /// The computed left-hand side of the violated bound (must be <= 1).
    double bound() const noexcept { return bound_; }

private:
    double bound_;
};

/// Throws StabilityError unless the pointwise penalty update is monotone on
/// this time step: dt (n + m + kappa_f) <= 1 (explicit) or dt kappa_f < 1
/// (nodewise-implicit).
void check_penalty_step(const PenaltyParams& p, double dt);

/// Problem data violating the standing assumptions (CLI exit code 2).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Violation {
    enum class Kind { obstacle_crossing, terminal_sandwich, negative_diffusion, evaluation_error };
    Kind kind;
    std::size_t i = 0;  ///< time index
    std::size_t j = 0;  ///< space index
    double t = 0.0;
    double x = 0.0;
    std::string message;
};

std::string to_string(Violation::Kind k);

struct ValidationReport {
    std::vector<Violation> violations;  ///< first violation per kind, in scan order
    double lipschitz_y = 0.0;           ///< sampled sup |df/dy|
    double lipschitz_z = 0.0;           ///< sampled sup |df/dz|
    bool kappa_exceeded = false;        ///< sampled quotients exceed kappa_f

    bool passed() const { return violations.empty(); }
    const Violation* first() const { return violations.empty() ? nullptr : &violations.front(); }
};

ValidationReport validate_problem(const ProblemSpec& spec, const Grid& grid, double kappa_f = 5.0);

/// Row-major (n_t + 1) x n_x array of doubles.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// b, l, sigma, h, h' sampled on every grid node (f depends on the solution
/// and is evaluated on the fly).
struct CoefficientTable {
    GridFunction drift, qv_drift, diffusion, lower, upper;
    std::vector<double> terminal;  ///< phi(x_j)
};

CoefficientTable sample_coefficients(const ProblemSpec& spec, const Grid& grid);

/// Value of the slice continued to the (possibly out-of-range) node index k.
double extended_node(std::span<const double> slice, long k, BoundaryMode mode);

/// Linear interpolation of the extended slice at x.
double interpolate(std::span<const double> slice, const Grid& grid, double x, BoundaryMode mode);

/// Largest |drift| any control can produce: max |b + l sigma^2| over nodes and
/// both endpoints, and max |sigma| over nodes.
struct CoefficientBounds {
    double max_drift = 0.0;
    double max_diffusion = 0.0;
};
CoefficientBounds coefficient_bounds(const CoefficientTable& c, const VolatilityBand& band);

/// Half-width of the band next to each edge of the domain whose values at
/// time t are influenced by the boundary continuation.
double contaminated_cone(const CoefficientBounds& bounds, const VolatilityBand& band, double time_to_go,
                         double dx);

}  // namespace gdro

#endif  // GDRO_GCORE_HPP
