/**
 * @file cli.hpp
 * @brief Run configuration, pipelines and report emission behind the command line tool.
 *
 * Configuration is a flat JSON object; see README for the key list.
 */
#pragma once

#include "pnpsteric/errors.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pnpsteric::cli {

enum class Mode { Branches, Critical, Solve, Current, Sweep };
enum class Species { Two, Three, Four };
enum class Format { Csv, Json };

struct RunConfig {
    Mode mode = Mode::Critical;
    Species species = Species::Two;

    double g = 0.0, z = 0.0, q = 1.0;
    std::optional<double> z3, rho0;
    std::optional<double> g_tilde, z_tilde, q_tilde;

    std::optional<double> epsilon;
    double eta = 0.0;
    std::optional<double> phi0_left, phi0_right;
    std::optional<long long> n_nodes;
    std::string branch = "A";

    std::optional<double> x1, x2;
    std::vector<double> d; ///< filled to the species count with 1.0
    double charge_scale = 1.0;

    std::optional<double> sigma_max;
    long long sigma_points = 200;

    std::string sweep_parameter;
    std::vector<double> sweep_values;
    std::optional<Mode> sweep_mode;

    Format format = Format::Csv;
    std::string out = "-";

    nlohmann::ordered_json source; ///< document as given (after flag overrides)
};

/// Failure inside a pipeline stage; maps to exit status 3.
class RunFailure : public Error {
public:
    RunFailure(std::string operation, const std::string& what)
        : Error("error in " + operation + ": " + what), operation_(std::move(operation)) {}
    const std::string& operation() const { return operation_; }

private:
    std::string operation_;
};

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Parse a JSON document. Throws ConfigError.
RunConfig parse_config(const std::string& text);
/// Validate an already parsed object. Throws ConfigError.
RunConfig config_from_json(const nlohmann::ordered_json& doc);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

using Scalar = std::variant<double, std::string>;

struct RunReport {
    nlohmann::ordered_json config;
    std::vector<std::pair<std::string, Scalar>> results;
    std::vector<Table> tables;
    std::vector<std::string> warnings;
    int exit_status = 0;
};

RunReport run(const RunConfig& cfg);

/// One report per sweep value, in sweep order.
std::vector<RunReport> run_sweep(const RunConfig& cfg);

/// Configuration for one sweep point.
RunConfig sweep_point(const RunConfig& cfg, double value);

std::string format_number(double v);
std::string to_csv(const RunReport& rep);
nlohmann::ordered_json to_json(const RunReport& rep);
std::string emit(const RunReport& rep, Format f);

/// File stem for a sweep point, e.g. "run_z=25".
std::string sweep_stem(const std::string& stem, const std::string& parameter, double value);

} // namespace pnpsteric::cli
