#include "gdro/catalog.hpp"

#include "gdro/expr.hpp"

namespace gdro::catalog {

namespace {

const std::vector<double> kGeometric{4, 8, 16, 32, 64, 128, 256, 512};

Entry gheat(const char* name, const char* phi) {
    Entry e;
    e.spec = make_spec(name, 1.0, -3.0, 3.0, VolatilityBand(1.0, 2.0), phi, "-1e6", "1e6", "0", "1", "0", "0",
                       BoundaryMode::curvature);
    e.n_t = 400;
    e.n_x = 201;
    e.penalties.upper = ObstacleTreatment::penalty(0.0);
    e.penalties.lower = ObstacleTreatment::penalty(0.0);
    return e;
}

// Discounted so the exercise region is non-empty.
Entry american_put() {
    Entry e;
    e.spec = make_spec("american-put-analog", 1.0, 0.0, 2.0, VolatilityBand(0.4, 0.4), "max(1 - x, 0)",
                       "max(1 - x, 0)", "1e6", "-0.1*y", "1", "0", "0", BoundaryMode::curvature);
    e.n_t = 400;
    e.n_x = 201;
    e.x0 = 1.0;
    e.penalties.upper = ObstacleTreatment::penalty(0.0);
    e.penalties.lower = ObstacleTreatment::project();
    e.penalties.mode = PenaltyMode::nodewise_implicit;
    e.m_list = {10, 100, 1000};
    e.epsilon_list = {0.1, 0.01, 0.001};
    return e;
}

Entry double_obstacle_sine() {
    Entry e;
    e.spec = make_spec("double-obstacle-sine", 1.0, -3.0, 3.0, VolatilityBand(0.5, 1.0), "0.5*sin(x)",
                       "0.5*sin(x) - 0.25", "0.5*sin(x) + 0.25", "3*cos(x)");
    e.n_t = 200;
    e.n_x = 121;
    e.penalties.upper = ObstacleTreatment::project();
    e.penalties.lower = ObstacleTreatment::project();
    e.penalties.mode = PenaltyMode::nodewise_implicit;
    e.n_list = kGeometric;
    e.m_list = {1, 10, 100, 1000};
    e.epsilon_list = {0.1, 0.01, 0.001};
    return e;
}

Entry coinciding() {
    Entry e;
    e.spec = make_spec("coinciding-obstacles", 1.0, -3.0, 3.0, VolatilityBand(1.0, 2.0), "0.3", "0.3", "0.3", "1");
    e.n_t = 200;
    e.n_x = 121;
    e.penalties.upper = ObstacleTreatment::project();
    e.penalties.lower = ObstacleTreatment::project();
    return e;
}

}  // namespace

ProblemSpec make_spec(std::string name, double horizon, double x_min, double x_max, VolatilityBand band,
                      const std::string& terminal, const std::string& lower, const std::string& upper,
                      const std::string& generator, const std::string& diffusion, const std::string& drift,
                      const std::string& qv_drift, BoundaryMode boundary) {
    ProblemSpec s;
    s.name = std::move(name);
    s.horizon = horizon;
    s.x_min = x_min;
    s.x_max = x_max;
    s.band = band;
    s.drift = parse_expr(drift);
    s.qv_drift = parse_expr(qv_drift);
    s.diffusion = parse_expr(diffusion);
    s.generator = parse_expr(generator);
    s.terminal = parse_expr(terminal);
    s.lower = parse_expr(lower);
    s.upper = parse_expr(upper);
    s.boundary = boundary;
    return s;
}

std::vector<std::string> names() {
    return {"gheat-convex", "gheat-concave", "american-put-analog", "double-obstacle-sine", "coinciding-obstacles"};
}

std::optional<Entry> lookup(const std::string& name) {
    if (name == "gheat-convex") return gheat("gheat-convex", "x*x");
    if (name == "gheat-concave") return gheat("gheat-concave", "-x*x");
    if (name == "american-put-analog") return american_put();
    if (name == "double-obstacle-sine") return double_obstacle_sine();
    if (name == "coinciding-obstacles") return coinciding();
    return std::nullopt;
}

}  // namespace gdro::catalog
