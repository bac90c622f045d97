#include "gdro/config.hpp"

#include "gdro/expr.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace gdro::config {

using nlohmann::json;

std::string to_string(Method m) {
    switch (m) {
        case Method::pde: return "pde";
        case Method::lattice: return "lattice";
        case Method::both: return "both";
    }
    return "both";
}

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

const json& require(const json& obj, const std::string& key, const std::string& at) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(at + "/" + key, "required field is missing");
    return *it;
}

double number(const json& v, const std::string& at) {
    if (!v.is_number()) throw ConfigError(at, "expected a number");
    return v.get<double>();
}

std::size_t count(const json& v, const std::string& at, std::size_t min) {
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
        throw ConfigError(at, "expected an integer >= " + std::to_string(min));
    return v.get<std::size_t>();
}

Expression expression(const json& obj, const std::string& key, const std::string& at, const char* fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (!fallback) throw ConfigError(at + "/" + key, "required field is missing");
        return parse_expr(fallback);
    }
    const std::string ptr = at + "/" + key;
    if (it->is_number()) {
        std::ostringstream os;
        os.precision(17);
        os << it->get<double>();
        return parse_expr(os.str());
    }
    if (!it->is_string()) throw ConfigError(ptr, "expected an expression string");
    try {
        return parse_expr(it->get<std::string>());
    } catch (const ParseError& e) {
        throw ConfigError(ptr, e.what());
    }
}

ProblemSpec inline_problem(const json& p) {
    const std::string at = "/problem";
    if (!p.is_object()) throw ConfigError(at, "expected a catalog name or an object");
    ProblemSpec s;
    s.name = p.value("name", std::string("inline"));
    s.horizon = number(require(p, "horizon", at), at + "/horizon");
    s.x_min = number(require(p, "x_min", at), at + "/x_min");
    s.x_max = number(require(p, "x_max", at), at + "/x_max");
    if (!(s.horizon > 0.0)) throw ConfigError(at + "/horizon", "must be positive");
    if (!(s.x_max > s.x_min)) throw ConfigError(at + "/x_max", "must exceed x_min");
    const json& band = require(p, "band", at);
    if (!band.is_object()) throw ConfigError(at + "/band", "expected {low, high}");
    try {
        s.band = VolatilityBand(number(require(band, "low", at + "/band"), at + "/band/low"),
                                number(require(band, "high", at + "/band"), at + "/band/high"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(at + "/band", e.what());
    }
    s.drift = expression(p, "drift", at, "0");
    s.qv_drift = expression(p, "qv_drift", at, "0");
    s.diffusion = expression(p, "diffusion", at, "1");
    s.generator = expression(p, "generator", at, "0");
    s.terminal = expression(p, "terminal", at, nullptr);
    s.lower = expression(p, "lower", at, nullptr);
    s.upper = expression(p, "upper", at, nullptr);
    if (auto it = p.find("boundary"); it != p.end()) {
        if (!it->is_string()) throw ConfigError(at + "/boundary", "expected a string");
        try {
            s.boundary = boundary_mode_from_string(it->get<std::string>());
        } catch (const std::invalid_argument&) {
            throw ConfigError(at + "/boundary", "expected one of {" + to_string(BoundaryMode::constant) + ", " +
                                                    to_string(BoundaryMode::curvature) + "}");
        }
    }
    return s;
}

ObstacleTreatment treatment(const json& v, const std::string& at) {
    if (v.is_string() && v.get<std::string>() == "projection") return ObstacleTreatment::project();
    if (v.is_number() && v.get<double>() >= 0.0) return ObstacleTreatment::penalty(v.get<double>());
    throw ConfigError(at, "expected a non-negative intensity or \"projection\"");
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& at) {
    std::vector<double> out;
    auto it = obj.find(key);
    if (it == obj.end()) return out;
    const std::string ptr = at + "/" + key;
    if (!it->is_array()) throw ConfigError(ptr, "expected an array of numbers");
    for (std::size_t k = 0; k < it->size(); ++k) out.push_back(number((*it)[k], ptr + "/" + std::to_string(k)));
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "config must be a single JSON object");

    RunConfig cfg;
    const json& problem = require(doc, "problem", "");
    std::optional<catalog::Entry> entry;
    if (problem.is_string()) {
        entry = catalog::lookup(problem.get<std::string>());
        if (!entry)
            throw ConfigError("/problem", "unknown catalog name \"" + problem.get<std::string>() +
                                              "\"; valid names: " + join(catalog::names()));
        cfg.problem = entry->spec;
        cfg.catalog_name = problem.get<std::string>();
        cfg.penalties = entry->penalties;
        cfg.x0 = entry->x0;
        if (!entry->n_list.empty() || !entry->m_list.empty() || !entry->epsilon_list.empty())
            cfg.ladders = Ladders{entry->n_list, entry->m_list, entry->epsilon_list};
    } else {
        cfg.problem = inline_problem(problem);
        cfg.x0 = 0.5 * (cfg.problem.x_min + cfg.problem.x_max);
    }

    const json& grid = require(doc, "grid", "");
    if (!grid.is_object()) throw ConfigError("/grid", "expected {n_t, n_x}");
    cfg.n_t = count(require(grid, "n_t", "/grid"), "/grid/n_t", 1);
    cfg.n_x = count(require(grid, "n_x", "/grid"), "/grid/n_x", 3);
    if (auto it = grid.find("substeps"); it != grid.end()) cfg.substeps = count(*it, "/grid/substeps", 0);

    if (auto it = doc.find("method"); it != doc.end()) {
        const std::string m = it->is_string() ? it->get<std::string>() : "";
        if (m == "pde") cfg.method = Method::pde;
        else if (m == "lattice") cfg.method = Method::lattice;
        else if (m == "both") cfg.method = Method::both;
        else throw ConfigError("/method", "expected one of {pde, lattice, both}");
    }

    if (auto it = doc.find("penalties"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("/penalties", "expected an object");
        if (auto u = it->find("upper"); u != it->end()) cfg.penalties.upper = treatment(*u, "/penalties/upper");
        if (auto l = it->find("lower"); l != it->end()) cfg.penalties.lower = treatment(*l, "/penalties/lower");
        if (auto m = it->find("mode"); m != it->end()) {
            try {
                cfg.penalties.mode = penalty_mode_from_string(m->is_string() ? m->get<std::string>() : "");
            } catch (const std::invalid_argument&) {
                throw ConfigError("/penalties/mode", "expected one of {explicit, nodewise-implicit}");
            }
        }
        if (auto k = it->find("kappa_f"); k != it->end()) {
            cfg.penalties.kappa_f = number(*k, "/penalties/kappa_f");
            if (cfg.penalties.kappa_f < 0.0) throw ConfigError("/penalties/kappa_f", "must be non-negative");
        }
    }

    if (auto it = doc.find("ladders"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("/ladders", "expected an object");
        Ladders l{number_list(*it, "n_list", "/ladders"), number_list(*it, "m_list", "/ladders"),
                  number_list(*it, "epsilon_list", "/ladders")};
        cfg.ladders = l;
    }

    if (auto it = doc.find("x0"); it != doc.end()) cfg.x0 = number(*it, "/x0");
    if (auto it = doc.find("output_dir"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("/output_dir", "expected a path string");
        cfg.output_dir = it->get<std::string>();
    }
    if (auto it = doc.find("emit"); it != doc.end()) {
        if (!it->is_array()) throw ConfigError("/emit", "expected an array");
        cfg.emit = Emit{false, false, false};
        for (std::size_t k = 0; k < it->size(); ++k) {
            const json& v = (*it)[k];
            const std::string s = v.is_string() ? v.get<std::string>() : "";
            if (s == "field") cfg.emit.field = true;
            else if (s == "report") cfg.emit.report = true;
            else if (s == "residual") cfg.emit.residual = true;
            else throw ConfigError("/emit/" + std::to_string(k), "expected one of {field, report, residual}");
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace gdro::config
