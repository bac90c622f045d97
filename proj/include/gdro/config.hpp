#ifndef GDRO_CONFIG_HPP
#define GDRO_CONFIG_HPP

#include "gdro/catalog.hpp"
#include "gdro/gcore.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdro::config {

enum class Method { pde, lattice, both };

std::string to_string(Method m);

struct Ladders {
    std::vector<double> n_list;
    std::vector<double> m_list;
    std::vector<double> epsilon_list;
};

struct Emit {
    bool field = true;
    bool report = true;
    bool residual = true;
};

struct RunConfig {
    ProblemSpec problem;
    std::optional<std::string> catalog_name;  ///< set when the problem came from the catalog
    std::size_t n_t = 0;
    std::size_t n_x = 0;
    std::size_t substeps = 0;  ///< pde sub-steps per grid step, 0 = automatic
    Method method = Method::both;
    PenaltyParams penalties;
    std::optional<Ladders> ladders;
    std::filesystem::path output_dir = "out";
    Emit emit;
    double x0 = 0.0;  ///< reporting point for u(0, x0)

    Grid grid() const { return Grid(problem, n_t, n_x); }
};

/// Schema violation; `pointer` is a JSON pointer into the config document.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace gdro::config

#endif  // GDRO_CONFIG_HPP
