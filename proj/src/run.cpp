#include "gdro/run.hpp"

#include "gdro/checks.hpp"
#include "gdro/convergence.hpp"
#include "gdro/lattice.hpp"
#include "gdro/pde.hpp"
#include "gdro/penalty.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>

namespace gdro {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_csv(const fs::path& path, const char* header) {
    File f(std::fopen(path.string().c_str(), "w"));
    if (!f) throw std::runtime_error("cannot write " + path.string());
    std::fprintf(f.get(), "%s\n", header);
    return f;
}

// Empty cell for missing values, "inf" for projected obstacles.
std::string cell(std::optional<double> v) {
    if (!v) return "";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

double intensity(const ObstacleTreatment& t) {
    return t.projection ? std::numeric_limits<double>::infinity() : t.intensity;
}

ordered_json treatment_json(const ObstacleTreatment& t) {
    return t.projection ? ordered_json("projection") : ordered_json(t.intensity);
}

ordered_json optional_json(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

void write_field(const fs::path& path, const SolutionField& f, const Grid& grid) {
    File out = open_csv(path, "t,x,u,z,a_plus,a_minus,k_defect,sigma_choice");
    for (std::size_t i = 0; i <= grid.n_t(); ++i)
        for (std::size_t j = 0; j < grid.n_x(); ++j)
            std::fprintf(out.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", grid.t(i), grid.x(j), f.u(i, j),
                         f.z(i, j), f.a_plus(i, j), f.a_minus(i, j), f.k_defect(i, j),
                         static_cast<int>(f.choice(i, j)));
}

void write_residual(const fs::path& path, const pde::ResidualGrid& r, const Grid& grid) {
    File out = open_csv(path, "t,x,r");
    for (std::size_t i = 0; i <= grid.n_t(); ++i)
        for (std::size_t j = 0; j < grid.n_x(); ++j)
            if (!std::isnan(r.r(i, j)))
                std::fprintf(out.get(), "%.17g,%.17g,%.17g\n", grid.t(i), grid.x(j), r.r(i, j));
}

struct ReportRow {
    double n = 0.0;
    std::optional<double> m;
    double sup_upper = 0.0, sup_lower = 0.0, mono = 0.0, asc_plus = 0.0, asc_minus = 0.0;
    std::optional<double> cross_gap;
};

ReportRow row_from(const SolutionField& f, const ProblemSpec& spec, const Grid& grid, const PenaltyParams& p) {
    const CoefficientTable coef = sample_coefficients(spec, grid);
    ReportRow r;
    r.n = intensity(p.upper);
    r.m = intensity(p.lower);
    for (std::size_t q = 0; q < f.u.data().size(); ++q) {
        r.sup_upper = std::max(r.sup_upper, positive_part(f.u.data()[q] - coef.upper.data()[q]));
        r.sup_lower = std::max(r.sup_lower, negative_part(f.u.data()[q] - coef.lower.data()[q]));
    }
    const auto asc = convergence::asc_residuals(f, spec, grid);
    r.asc_plus = asc.asc_plus;
    r.asc_minus = asc.asc_minus;
    return r;
}

void diag_line(std::ostream& diag, const std::string& level, const std::string& event, const std::string& rest) {
    diag << "gdro level=" << level << " event=" << event << (rest.empty() ? "" : " ") << rest << '\n';
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

int run(const config::RunConfig& cfg, const RunOptions& options, std::ostream& diag) {
    const ProblemSpec& spec = cfg.problem;
    const config::Method method = options.method.value_or(cfg.method);
    const fs::path out_dir = options.output_dir.value_or(cfg.output_dir);
    const Execution& exec = options.exec;
    const PenaltyParams& pen = cfg.penalties;
    const Grid grid = cfg.grid();
    const bool want_lattice = method != config::Method::pde, want_pde = method != config::Method::lattice;

    const ValidationReport vr = validate_problem(spec, grid, pen.kappa_f);
    if (!vr.passed()) {
        for (const auto& v : vr.violations) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "kind=%s i=%zu j=%zu t=%.17g x=%.17g", to_string(v.kind).c_str(), v.i, v.j,
                          v.t, v.x);
            diag_line(diag, "error", "validation", std::string(buf) + " message=" + quoted(v.message));
        }
        return exit_validation;
    }
    if (vr.kappa_exceeded) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "lipschitz_y=%.6g lipschitz_z=%.6g kappa_f=%.6g", vr.lipschitz_y,
                      vr.lipschitz_z, pen.kappa_f);
        diag_line(diag, "warning", "kappa_exceeded", buf);
    }

    ordered_json report;
    report["problem"] = spec.name;
    report["catalog"] = cfg.catalog_name ? ordered_json(*cfg.catalog_name) : ordered_json(nullptr);
    report["grid"] = {{"n_t", grid.n_t()}, {"n_x", grid.n_x()}, {"dt", grid.dt()}, {"dx", grid.dx()}};
    report["method"] = config::to_string(method);
    report["penalties"] = {{"upper", treatment_json(pen.upper)},
                           {"lower", treatment_json(pen.lower)},
                           {"mode", to_string(pen.mode)},
                           {"kappa_f", pen.kappa_f}};
    report["x0"] = cfg.x0;

    std::optional<SolutionField> lat, pd;
    std::vector<ReportRow> rows;
    std::optional<convergence::ConvergenceReport> ladder_report;
    try {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) {
            diag_line(diag, "error", "io", "message=" + quoted("cannot create " + out_dir.string()));
            return exit_usage;
        }
        const std::size_t j0 = checks::nearest_node(grid, cfg.x0);
        if (want_lattice) {
            lat = lattice::sweep(spec, grid, pen, exec);
            report["lattice"] = {{"u0", lat->u(0, j0)},
                                 {"probes_outside", lat->diagnostics.probes_outside},
                                 {"variance_floor_hits", lat->diagnostics.variance_floor_hits}};
        }
        if (want_pde) {
            pd = pde::solve(spec, pde::PdeSchemeParams{grid, pen, cfg.substeps}, exec);
            report["pde"] = {{"u0", pd->u(0, j0)}, {"substeps", pd->diagnostics.substeps}};
        }

        const SolutionField& primary = lat ? *lat : *pd;
        ReportRow base = row_from(primary, spec, grid, pen);
        if (lat && pd) {
            base.cross_gap = convergence::interior_gap(pd->u, lat->u, spec, grid);
            report["cross_gap"] = *base.cross_gap;
        }
        rows.push_back(base);

        const pde::ResidualGrid residual = pde::complementarity_residual(primary, spec, grid);
        report["residual_interior_sup"] = residual.interior_sup;

        if (cfg.ladders && !cfg.ladders->n_list.empty()) {
            ladder_report = convergence::monotone_ladder(spec, grid, cfg.ladders->n_list, pen, {}, exec);
            for (const auto& r : ladder_report->rungs)
                rows.push_back({r.n, std::numeric_limits<double>::infinity(), r.sup_upper_violation,
                                r.sup_lower_violation, r.mono_violation, r.asc_plus, r.asc_minus, r.cross_gap});
            ordered_json rungs = ordered_json::array();
            for (const auto& r : ladder_report->rungs)
                rungs.push_back({{"n", r.n},
                                 {"sup_upper_violation", r.sup_upper_violation},
                                 {"mono_violation", r.mono_violation},
                                 {"asc_plus_global", r.asc_plus_global},
                                 {"asc_minus_global", r.asc_minus_global},
                                 {"z_gap", optional_json(r.z_gap)}});
            report["ladder"] = {{"rate_slope", optional_json(ladder_report->rate_slope)},
                                {"rate_exponent_target", ladder_report->rate_exponent_target},
                                {"upper_violation_decades", ladder_report->upper_violation_decades()},
                                {"rungs", rungs}};
        }
        if (cfg.ladders && !cfg.ladders->m_list.empty()) {
            PenaltyParams base_p = pen;
            if (!cfg.ladders->n_list.empty()) {
                const auto table = lattice::double_ladder(spec, grid, cfg.ladders->n_list, cfg.ladders->m_list,
                                                          base_p, exec);
                for (std::size_t a = 0; a < table.n_list.size(); ++a)
                    for (std::size_t b = 0; b < table.m_list.size(); ++b) {
                        const auto& c = table.cells[a][b];
                        if (c.error) {
                            diag_line(diag, "warning", "ladder_cell",
                                      "n=" + cell(c.n) + " m=" + cell(c.m) + " message=" + quoted(*c.error));
                            continue;
                        }
                        SolutionField f(grid.n_t() + 1, grid.n_x());
                        PenaltyParams p = base_p;
                        p.upper = ObstacleTreatment::penalty(c.n);
                        p.lower = ObstacleTreatment::penalty(c.m);
                        ReportRow r = row_from(lattice::penalized_sweep(spec, grid, p, exec), spec, grid, p);
                        r.mono = std::max(c.gap_in_n, c.gap_in_m);
                        rows.push_back(r);
                    }
            } else {
                std::optional<SolutionField> prev;
                for (double m : cfg.ladders->m_list) {
                    PenaltyParams p = base_p;
                    p.lower = ObstacleTreatment::penalty(m);
                    SolutionField f = lattice::sweep(spec, grid, p, exec);
                    ReportRow r = row_from(f, spec, grid, p);
                    if (prev)
                        for (std::size_t q = 0; q < f.u.data().size(); ++q)
                            r.mono = std::max(r.mono, positive_part(prev->u.data()[q] - f.u.data()[q]));
                    rows.push_back(r);
                    prev = std::move(f);
                }
            }
        }
        if (cfg.ladders && !cfg.ladders->epsilon_list.empty()) {
            ordered_json probes = ordered_json::array();
            for (double eps : cfg.ladders->epsilon_list) {
                const auto sp = convergence::stability_probe(spec, checks::shift_lower(spec, eps), grid, pen, exec);
                probes.push_back({{"epsilon", eps}, {"output_gap", sp.output_gap}, {"input_gap", sp.input_gap}});
            }
            report["stability_probe"] = probes;
        }

        if (cfg.emit.field) {
            if (lat) write_field(out_dir / "field_lattice.csv", *lat, grid);
            if (pd) write_field(out_dir / "field_pde.csv", *pd, grid);
        }
        if (cfg.emit.residual) write_residual(out_dir / "residual.csv", residual, grid);
        if (cfg.emit.report) {
            const std::string slope = ladder_report ? cell(ladder_report->rate_slope) : std::string();
            File out = open_csv(out_dir / "report.csv",
                                "n,m,sup_upper_violation,sup_lower_violation,mono_violation,asc_plus,asc_minus,"
                                "cross_gap,rate_slope");
            for (const auto& r : rows)
                std::fprintf(out.get(), "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%s\n", cell(r.n).c_str(),
                             cell(r.m).c_str(), r.sup_upper, r.sup_lower, r.mono, r.asc_plus, r.asc_minus,
                             cell(r.cross_gap).c_str(), slope.c_str());
        }
    } catch (const StabilityError& e) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "bound=%.17g", e.bound());
        diag_line(diag, "error", "stability", std::string(buf) + " message=" + quoted(e.what()));
        return exit_stability;
    }

    int status = exit_ok;
    if (options.assert_checks) {
        const checks::Solvers solvers = method == config::Method::both      ? checks::Solvers::both
                                         : method == config::Method::lattice ? checks::Solvers::lattice
                                                                             : checks::Solvers::pde;
        std::vector<checks::CheckResult> results;
        if (cfg.catalog_name) {
            catalog::Entry entry = *catalog::lookup(*cfg.catalog_name);
            entry.spec = spec;
            if (cfg.ladders) {
                entry.n_list = cfg.ladders->n_list;
                entry.m_list = cfg.ladders->m_list;
                entry.epsilon_list = cfg.ladders->epsilon_list;
            }
            results = checks::for_catalog_entry(*cfg.catalog_name, entry, grid, pen, solvers, exec);
        } else {
            double kd = 0.0;
            for (const SolutionField* f : {lat ? &*lat : nullptr, pd ? &*pd : nullptr})
                if (f)
                    for (double v : f->k_defect.data()) kd = std::max(kd, v);
            results.push_back({"k_defect non-positive", kd <= 0.0, "max k_defect=" + cell(kd), 0.0});
            if (ladder_report)
                results.push_back({"monotone ladder", ladder_report->max_mono_violation() <= 1e-9,
                                   "max mono_violation=" + cell(ladder_report->max_mono_violation()), 0.0});
            if (solvers == checks::Solvers::both)
                results.push_back(checks::cross_refinement("cross_gap refinement", spec, grid, pen, exec));
        }
        ordered_json arr = ordered_json::array();
        for (const auto& r : results) {
            diag_line(diag, r.passed ? "info" : "error", "check",
                      std::string("status=") + (r.passed ? "PASS" : "FAIL") + " name=" + quoted(r.name) +
                          " detail=" + quoted(r.detail));
            arr.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
            if (!r.passed) status = exit_assertion;
        }
        report["checks"] = arr;
    }
    if (cfg.emit.report) {
        std::ofstream(out_dir / "report.json") << report.dump(2) << '\n';
    }
    return status;
}

}  // namespace gdro
