#include "gdro/gcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gdro {

VolatilityBand::VolatilityBand(double sigma_low, double sigma_high) : low_(sigma_low), high_(sigma_high) {
    if (!(sigma_low > 0.0) || !(sigma_high >= sigma_low) || !std::isfinite(sigma_high))
        throw std::invalid_argument("volatility band requires 0 < sigma_low <= sigma_high");
}

double g_eval(double a, const VolatilityBand& band) {
    const double pos = std::max(a, 0.0);
    const double neg = std::max(-a, 0.0);
    return 0.5 * (band.high() * band.high() * pos - band.low() * band.low() * neg);
}

std::string to_string(BoundaryMode m) {
    return m == BoundaryMode::constant ? "constant-extrapolation" : "curvature-extrapolation";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
    if (s == "constant-extrapolation" || s == "constant") return BoundaryMode::constant;
    if (s == "curvature-extrapolation" || s == "curvature") return BoundaryMode::curvature;
    throw std::invalid_argument("unknown boundary mode '" + s +
                                "' (expected constant-extrapolation or curvature-extrapolation)");
}

Grid::Grid(double horizon, double x_min, double x_max, std::size_t n_t, std::size_t n_x)
    : horizon_(horizon), x_min_(x_min), x_max_(x_max), n_t_(n_t), n_x_(n_x) {
    if (!(horizon > 0.0)) throw std::invalid_argument("grid horizon must be positive");
    if (!(x_min < x_max)) throw std::invalid_argument("grid requires x_min < x_max");
    if (n_t < 1) throw std::invalid_argument("grid requires n_t >= 1");
    if (n_x < 3) throw std::invalid_argument("grid requires n_x >= 3");
    dt_ = horizon / static_cast<double>(n_t);
    dx_ = (x_max - x_min) / static_cast<double>(n_x - 1);
}

std::string to_string(PenaltyMode m) {
    return m == PenaltyMode::explicit_step ? "explicit" : "nodewise-implicit";
}

PenaltyMode penalty_mode_from_string(const std::string& s) {
    if (s == "explicit") return PenaltyMode::explicit_step;
    if (s == "nodewise-implicit") return PenaltyMode::nodewise_implicit;
    throw std::invalid_argument("unknown penalty mode '" + s + "' (expected explicit or nodewise-implicit)");
}

double PenaltyParams::explicit_penalty_rate() const {
    return (upper.projection ? 0.0 : upper.intensity) + (lower.projection ? 0.0 : lower.intensity);
}

void check_penalty_step(const PenaltyParams& p, double dt) {
    if (p.upper.intensity < 0.0 || p.lower.intensity < 0.0)
        throw std::invalid_argument("penalty intensities must be non-negative");
    if (p.mode == PenaltyMode::explicit_step) {
        const double bound = dt * (p.explicit_penalty_rate() + p.kappa_f);
        if (bound > 1.0) {
            std::ostringstream os;
            os << "explicit penalty step not monotone: dt*(n + m + kappa_f) = " << bound << " > 1";
            throw StabilityError(os.str(), bound);
        }
    } else {
        const double bound = dt * p.kappa_f;
        if (bound >= 1.0) {
            std::ostringstream os;
            os << "nodewise-implicit step has no unique root: dt*kappa_f = " << bound << " >= 1";
            throw StabilityError(os.str(), bound);
        }
    }
}

std::string to_string(Violation::Kind k) {
    switch (k) {
        case Violation::Kind::obstacle_crossing: return "obstacle-crossing";
        case Violation::Kind::terminal_sandwich: return "terminal-sandwich";
        case Violation::Kind::negative_diffusion: return "negative-diffusion";
        case Violation::Kind::evaluation_error: return "evaluation-error";
    }
    return "unknown";
}

namespace {

void record(ValidationReport& rep, Violation::Kind kind, std::size_t i, std::size_t j, const Grid& g,
            std::string msg) {
    for (const auto& v : rep.violations)
        if (v.kind == kind) return;
    rep.violations.push_back({kind, i, j, g.t(i), g.x(j), std::move(msg)});
}

std::string node_text(const Grid& g, std::size_t i, std::size_t j) {
    std::ostringstream os;
    os.precision(17);
    os << "(t=" << g.t(i) << ", x=" << g.x(j) << ")";
    return os.str();
}

}  // namespace

ValidationReport validate_problem(const ProblemSpec& spec, const Grid& grid, double kappa_f) {
    ValidationReport rep;
    const std::size_t last = grid.n_t();
    for (std::size_t i = 0; i <= last; ++i) {
        const double t = grid.t(i);
        for (std::size_t j = 0; j < grid.n_x(); ++j) {
            const double x = grid.x(j);
            try {
                const auto tx = Bindings::tx(t, x);
                const double h = spec.lower(tx);
                const double hp = spec.upper(tx);
                const double s = spec.diffusion(tx);
                spec.drift(tx);
                spec.qv_drift(tx);
                spec.generator(Bindings::txyz(t, x, 0.0, 0.0));
                if (!(h <= hp))
                    record(rep, Violation::Kind::obstacle_crossing, i, j, grid,
                           "lower obstacle exceeds upper obstacle at " + node_text(grid, i, j));
                if (s < 0.0)
                    record(rep, Violation::Kind::negative_diffusion, i, j, grid,
                           "negative diffusion at " + node_text(grid, i, j));
                if (i == last) {
                    const double phi = spec.terminal(tx);
                    if (!(h <= phi && phi <= hp))
                        record(rep, Violation::Kind::terminal_sandwich, i, j, grid,
                               "terminal value outside [h(T,x), h'(T,x)] at " + node_text(grid, i, j));
                }
            } catch (const EvalError& e) {
                record(rep, Violation::Kind::evaluation_error, i, j, grid,
                       std::string(e.what()) + " at " + node_text(grid, i, j));
            }
        }
    }

    // Sampled difference quotients of f in y and z on a sub-lattice of nodes.
    static constexpr double samples[] = {-4.0, -1.0, -0.25, 0.0, 0.5, 2.0};
    const std::size_t stride_t = std::max<std::size_t>(1, grid.n_t() / 8);
    const std::size_t stride_x = std::max<std::size_t>(1, grid.n_x() / 8);
    try {
        for (std::size_t i = 0; i <= last; i += stride_t)
            for (std::size_t j = 0; j < grid.n_x(); j += stride_x)
                for (std::size_t a = 0; a + 1 < std::size(samples); ++a) {
                    const double t = grid.t(i), x = grid.x(j);
                    const double y0 = samples[a], y1 = samples[a + 1];
                    const double fy = std::abs(spec.generator(Bindings::txyz(t, x, y1, 0.0)) -
                                               spec.generator(Bindings::txyz(t, x, y0, 0.0)));
                    const double fz = std::abs(spec.generator(Bindings::txyz(t, x, 0.0, y1)) -
                                               spec.generator(Bindings::txyz(t, x, 0.0, y0)));
                    rep.lipschitz_y = std::max(rep.lipschitz_y, fy / (y1 - y0));
                    rep.lipschitz_z = std::max(rep.lipschitz_z, fz / (y1 - y0));
                }
    } catch (const EvalError& e) {
        record(rep, Violation::Kind::evaluation_error, 0, 0, grid,
               std::string("generator: ") + e.what());
    }
    rep.kappa_exceeded = rep.lipschitz_y + rep.lipschitz_z > kappa_f;
    return rep;
}

CoefficientTable sample_coefficients(const ProblemSpec& spec, const Grid& grid) {
    const std::size_t rows = grid.n_t() + 1, cols = grid.n_x();
    CoefficientTable c{GridFunction(rows, cols), GridFunction(rows, cols), GridFunction(rows, cols),
                       GridFunction(rows, cols), GridFunction(rows, cols), std::vector<double>(cols)};
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const auto tx = Bindings::tx(grid.t(i), grid.x(j));
            c.drift(i, j) = spec.drift(tx);
            c.qv_drift(i, j) = spec.qv_drift(tx);
            c.diffusion(i, j) = spec.diffusion(tx);
            c.lower(i, j) = spec.lower(tx);
            c.upper(i, j) = spec.upper(tx);
        }
    for (std::size_t j = 0; j < cols; ++j)
        c.terminal[j] = spec.terminal(Bindings::tx(grid.horizon(), grid.x(j)));
    return c;
}

double extended_node(std::span<const double> slice, long k, BoundaryMode mode) {
    const long n = static_cast<long>(slice.size());
    if (k >= 0 && k < n) return slice[static_cast<std::size_t>(k)];
    if (mode == BoundaryMode::constant) return k < 0 ? slice.front() : slice.back();
    // Newton form of the quadratic through the three edge nodes.
    if (k >= n) {
        const double u0 = slice[n - 1], u1 = slice[n - 2], u2 = slice[n - 3];
        const double s = static_cast<double>(k - (n - 1));
        return u0 + s * (u0 - u1) + 0.5 * s * (s + 1.0) * (u0 - 2.0 * u1 + u2);
    }
    const double u0 = slice[0], u1 = slice[1], u2 = slice[2];
    const double s = static_cast<double>(-k);
    return u0 + s * (u0 - u1) + 0.5 * s * (s + 1.0) * (u0 - 2.0 * u1 + u2);
}

double interpolate(std::span<const double> slice, const Grid& grid, double x, BoundaryMode mode) {
    const double pos = (x - grid.x_min()) / grid.dx();
    const double base = std::floor(pos);
    const double w = pos - base;
    const long k = static_cast<long>(base);
    const double left = extended_node(slice, k, mode);
    if (w == 0.0) return left;
    return left + w * (extended_node(slice, k + 1, mode) - left);
}

CoefficientBounds coefficient_bounds(const CoefficientTable& c, const VolatilityBand& band) {
    CoefficientBounds out;
    const auto& b = c.drift.data();
    const auto& l = c.qv_drift.data();
    const auto& s = c.diffusion.data();
    for (std::size_t k = 0; k < b.size(); ++k) {
        for (int e = 0; e < 2; ++e) {
            const double sig = band.endpoint(e);
            out.max_drift = std::max(out.max_drift, std::abs(b[k] + l[k] * sig * sig));
        }
        out.max_diffusion = std::max(out.max_diffusion, std::abs(s[k]));
    }
    return out;
}

double contaminated_cone(const CoefficientBounds& bounds, const VolatilityBand& band, double time_to_go,
                         double dx) {
    const double tau = std::max(time_to_go, 0.0);
    return band.high() * bounds.max_diffusion * std::sqrt(tau) + bounds.max_drift * tau + dx;
}

}  // namespace gdro
