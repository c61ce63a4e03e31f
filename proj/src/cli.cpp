#include "pnpsteric/cli.hpp"

#include "pnpsteric/excess_current.hpp"

#include <charconv>
#include <cmath>
#include <future>
#include <set>
#include <sstream>

namespace pnpsteric::cli {

using json = nlohmann::ordered_json;

namespace {

const std::set<std::string>& numeric_keys() {
    static const std::set<std::string> keys{
        "g",       "z",        "q",          "z3",         "rho0", "g_tilde", "z_tilde",
        "q_tilde", "epsilon",  "eta",        "phi0_left",  "phi0_right", "x1", "x2",
        "d1",      "d2",       "d3",         "d4",         "charge_scale", "sigma_max"};
    return keys;
}

const std::set<std::string>& other_keys() {
    static const std::set<std::string> keys{"mode",  "species",         "n_nodes",
                                            "branch", "sigma_points",   "sweep_parameter",
                                            "sweep_values", "sweep_mode", "format", "out"};
    return keys;
}

std::optional<double> number(const json& doc, const std::string& key) {
    if (!doc.contains(key)) return std::nullopt;
    const json& v = doc.at(key);
    if (!v.is_number()) throw ConfigError("field '" + key + "': expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("field '" + key + "': must be finite");
    return x;
}

std::optional<long long> integer(const json& doc, const std::string& key) {
    if (!doc.contains(key)) return std::nullopt;
    const json& v = doc.at(key);
    if (!v.is_number_integer()) throw ConfigError("field '" + key + "': expected an integer");
    return v.get<long long>();
}

std::optional<std::string> text(const json& doc, const std::string& key) {
    if (!doc.contains(key)) return std::nullopt;
    const json& v = doc.at(key);
    if (!v.is_string()) throw ConfigError("field '" + key + "': expected a string");
    return v.get<std::string>();
}

std::size_t species_count(Species s) {
    switch (s) {
    case Species::Two: return 2;
    case Species::Three: return 3;
    case Species::Four: return 4;
    }
    return 0;
}

template <class F>
auto stage(const std::string& operation, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const RunFailure&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw RunFailure(operation, e.what());
    }
}

Branch branch_label(const RunConfig& cfg) { return cfg.branch == "A" ? Branch::A : Branch::B; }

ThreeSpeciesConfig three_config(const RunConfig& cfg) {
    return {TwoSpeciesParams(cfg.g, cfg.z, cfg.q), *cfg.z3, *cfg.rho0};
}

FourSpeciesConfig four_config(const RunConfig& cfg) {
    return {TwoSpeciesParams(cfg.g, cfg.z, cfg.q),
            TwoSpeciesParams(*cfg.g_tilde, *cfg.z_tilde, cfg.q_tilde.value_or(1.0)), *cfg.rho0};
}

void add_critical(RunReport& rep, const TwoSpeciesParams& p, const std::string& suffix) {
    CriticalSet cs = stage("critical", [&] { return critical_set(p); });
    rep.results.emplace_back("sigma_z" + suffix, cs.sigma_z);
    rep.results.emplace_back("g_c" + suffix, cs.g_c);
    if (cs.sigma_c) {
        rep.results.emplace_back("sigma_c" + suffix, *cs.sigma_c);
        rep.results.emplace_back("phi_Ac" + suffix, *cs.phi_Ac);
    }
}

Table branch_table(const RunConfig& cfg, const TwoSpeciesParams& p, const std::string& name) {
    return stage("branches", [&] {
        double sz = sigma_z(p);
        double smax = cfg.sigma_max.value_or(sz + 50.0 / std::max(1.0, p.k()));
        if (!(smax > sz))
            throw DomainError("sigma_max must exceed sigma_z = " + format_number(sz));
        Table t{name, {"sigma", "c1", "c2", "phi_A", "phi_B"}, {}};
        const long long m = cfg.sigma_points;
        for (long long i = 0; i < m; ++i) {
            double s = sz + (smax - sz) * static_cast<double>(i) / static_cast<double>(m - 1);
            auto c = concentrations(s, p, Branch::A);
            t.rows.push_back({s, c.c1, c.c2, phi_on_branch(s, p, Branch::A),
                              phi_on_branch(s, p, Branch::B)});
        }
        return t;
    });
}

void add_roots(RunReport& rep, const RunConfig& cfg) {
    for (Branch b : {Branch::A, Branch::B}) {
        try {
            RhsFunction f = cfg.species == Species::Three
                                ? ThreeSpeciesModel(three_config(cfg)).assemble(b)
                                : FourSpeciesModel(four_config(cfg)).assemble(b);
            rep.results.emplace_back("root_" + to_string(b), *f.root());
        } catch (const NoIntersectionError& e) {
            rep.warnings.push_back(e.what());
        } catch (const SubcriticalError& e) {
            rep.warnings.push_back(e.what());
        }
    }
}

struct Solved {
    BvpSolution sol;
    double root;
};

template <class Model>
Solved solve_branch(const RunConfig& cfg, const Model& model) {
    const Branch label = branch_label(cfg);
    RhsFunction rhs = stage("assemble", [&] { return model.assemble(label); });
    const double c = *rhs.root();
    RobinBC bc{cfg.phi0_left.value_or(c), cfg.phi0_right.value_or(c), cfg.eta};
    std::optional<std::size_t> n;
    if (cfg.n_nodes) n = static_cast<std::size_t>(*cfg.n_nodes);
    BvpSolution sol = stage("solve", [&] { return solve(BvpProblem{*cfg.epsilon, rhs, bc, n}); });
    return {std::move(sol), c};
}

template <class Model>
void fill_solve(RunReport& rep, const RunConfig& cfg, const Model& model, bool with_current) {
    const Branch label = branch_label(cfg);
    Solved s = solve_branch(cfg, model);
    rep.results.emplace_back("branch", to_string(label));
    rep.results.emplace_back("root", s.root);
    rep.results.emplace_back("residual_norm", s.sol.residual_norm);
    rep.results.emplace_back("iterations", static_cast<double>(s.sol.iterations));
    rep.results.emplace_back("n_nodes", static_cast<double>(s.sol.values.size()));
    if (s.sol.classification)
        rep.results.emplace_back("classification", to_string(*s.sol.classification));

    if (!with_current) {
        Table t{"profile", {"x", "phi"}, {}};
        const std::size_t N = species_count(cfg.species);
        for (std::size_t i = 1; i <= N; ++i) t.columns.push_back("c" + std::to_string(i));
        stage("solve", [&] {
            for (std::size_t j = 0; j < s.sol.values.size(); ++j) {
                auto c = model.concentrations(s.sol.values[j], label);
                std::vector<double> row{s.sol.nodes[j], s.sol.values[j]};
                row.insert(row.end(), c.begin(), c.end());
                t.rows.push_back(std::move(row));
            }
            return 0;
        });
        rep.tables.push_back(std::move(t));
        return;
    }

    DiffusionSet diff{cfg.d, cfg.charge_scale};
    CurrentReport cr = stage("current", [&] {
        return current_report(s.sol, model, diff, label, *cfg.x1, *cfg.x2);
    });
    rep.results.emplace_back("x1", cr.x1);
    rep.results.emplace_back("x2", cr.x2);
    rep.results.emplace_back("integral_x", cr.integral_x);
    rep.results.emplace_back("integral_sigma", cr.integral_sigma);
    for (auto& w : cr.warnings) rep.warnings.push_back(w);
    Table t{"current", {"x", "phi", "I_ex"}, {}};
    for (std::size_t j = 0; j < cr.pointwise.x.size(); ++j)
        t.rows.push_back({cr.pointwise.x[j], cr.pointwise.phi[j], cr.pointwise.current[j]});
    rep.tables.push_back(std::move(t));
}

RunReport run_single(const RunConfig& cfg) {
    RunReport rep;
    rep.config = cfg.source;
    switch (cfg.mode) {
    case Mode::Critical:
        add_critical(rep, TwoSpeciesParams(cfg.g, cfg.z, cfg.q), "");
        if (cfg.species == Species::Four)
            add_critical(rep, TwoSpeciesParams(*cfg.g_tilde, *cfg.z_tilde, cfg.q_tilde.value_or(1)),
                         "_34");
        if (cfg.species != Species::Two) add_roots(rep, cfg);
        break;
    case Mode::Branches:
        rep.tables.push_back(branch_table(cfg, TwoSpeciesParams(cfg.g, cfg.z, cfg.q), "branches"));
        if (cfg.species == Species::Four)
            rep.tables.push_back(branch_table(
                cfg, TwoSpeciesParams(*cfg.g_tilde, *cfg.z_tilde, cfg.q_tilde.value_or(1)),
                "branches_34"));
        break;
    case Mode::Solve:
    case Mode::Current: {
        const bool cur = cfg.mode == Mode::Current;
        if (cfg.species == Species::Three) {
            ThreeSpeciesModel m = stage("assemble", [&] { return ThreeSpeciesModel(three_config(cfg)); });
            fill_solve(rep, cfg, m, cur);
        } else {
            FourSpeciesModel m = stage("assemble", [&] { return FourSpeciesModel(four_config(cfg)); });
            fill_solve(rep, cfg, m, cur);
        }
        break;
    }
    case Mode::Sweep:
        throw ConfigError("sweep cannot be nested");
    }
    return rep;
}

} // namespace

std::string to_string(Mode m) {
    switch (m) {
    case Mode::Branches: return "branches";
    case Mode::Critical: return "critical";
    case Mode::Solve: return "solve";
    case Mode::Current: return "current";
    case Mode::Sweep: return "sweep";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    for (Mode m : {Mode::Branches, Mode::Critical, Mode::Solve, Mode::Current, Mode::Sweep})
        if (to_string(m) == s) return m;
    throw ConfigError("field 'mode': unknown mode '" + s + "'");
}

RunConfig parse_config(const std::string& src) {
    json doc;
    try {
        doc = json::parse(src);
    } catch (const json::parse_error& e) {
        std::string t = src;
        if (t.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("mode required");
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(doc);
}

RunConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!numeric_keys().count(it.key()) && !other_keys().count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "'");

    RunConfig cfg;
    cfg.source = doc;
    auto mode = text(doc, "mode");
    if (!mode) throw ConfigError("mode required");
    cfg.mode = parse_mode(*mode);

    cfg.g = number(doc, "g").value_or(0.0);
    cfg.z = number(doc, "z").value_or(0.0);
    cfg.q = number(doc, "q").value_or(1.0);
    cfg.z3 = number(doc, "z3");
    cfg.rho0 = number(doc, "rho0");
    cfg.g_tilde = number(doc, "g_tilde");
    cfg.z_tilde = number(doc, "z_tilde");
    cfg.q_tilde = number(doc, "q_tilde");
    cfg.epsilon = number(doc, "epsilon");
    cfg.eta = number(doc, "eta").value_or(0.0);
    cfg.phi0_left = number(doc, "phi0_left");
    cfg.phi0_right = number(doc, "phi0_right");
    cfg.n_nodes = integer(doc, "n_nodes");
    cfg.x1 = number(doc, "x1");
    cfg.x2 = number(doc, "x2");
    cfg.charge_scale = number(doc, "charge_scale").value_or(1.0);
    cfg.sigma_max = number(doc, "sigma_max");
    cfg.sigma_points = integer(doc, "sigma_points").value_or(200);
    cfg.branch = text(doc, "branch").value_or("A");
    cfg.out = text(doc, "out").value_or("-");

    std::string fmt_name = text(doc, "format").value_or("csv");
    if (fmt_name == "csv")
        cfg.format = Format::Csv;
    else if (fmt_name == "json")
        cfg.format = Format::Json;
    else
        throw ConfigError("field 'format': expected 'csv' or 'json'");

    if (auto s = text(doc, "species")) {
        if (*s == "two") cfg.species = Species::Two;
        else if (*s == "three") cfg.species = Species::Three;
        else if (*s == "four") cfg.species = Species::Four;
        else throw ConfigError("field 'species': expected two, three or four");
    } else if (cfg.g_tilde || cfg.z_tilde || cfg.q_tilde) {
        cfg.species = Species::Four;
    } else if (cfg.z3 || cfg.rho0) {
        cfg.species = Species::Three;
    } else if (cfg.mode == Mode::Solve || cfg.mode == Mode::Current) {
        cfg.species = Species::Three;
    }

    const std::size_t N = species_count(cfg.species);
    cfg.d.assign(std::max<std::size_t>(N, 2), 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        auto v = number(doc, "d" + std::to_string(i + 1));
        if (!v) continue;
        if (i >= N) throw ConfigError("field 'd" + std::to_string(i + 1) + "': only " +
                                      std::to_string(N) + " species configured");
        if (!(*v > 0.0)) throw ConfigError("field 'd" + std::to_string(i + 1) + "': must be > 0");
        cfg.d[i] = *v;
    }
    if (!(cfg.charge_scale > 0.0)) throw ConfigError("field 'charge_scale': must be > 0");

    if (cfg.mode != Mode::Sweep) {
        if (!doc.contains("g") || !doc.contains("z")) throw ConfigError("fields 'g' and 'z' required");
        if (cfg.g < 0.0) throw ConfigError("field 'g': must be >= 0");
        if (cfg.z < 0.0) throw ConfigError("field 'z': must be >= 0");
        if (cfg.q < 1.0) throw ConfigError("field 'q': must be >= 1");
        if (cfg.branch != "A" && cfg.branch != "B")
            throw ConfigError("field 'branch': expected 'A' or 'B'");
        if (cfg.sigma_points < 2) throw ConfigError("field 'sigma_points': must be >= 2");

        if (cfg.species == Species::Three) {
            if (!cfg.z3) throw ConfigError("field 'z3' required for three species");
            if (!(*cfg.z3 > 0.0)) throw ConfigError("field 'z3': must be > 0");
            if (!cfg.rho0) throw ConfigError("field 'rho0' required for three species");
            if (!(*cfg.rho0 > 0.0))
                throw ConfigError("field 'rho0': must be > 0 for three species "
                                  "(bulk roots on both branches need a positive permanent charge)");
        }
        if (cfg.species == Species::Four) {
            if (!cfg.g_tilde || !cfg.z_tilde)
                throw ConfigError("fields 'g_tilde' and 'z_tilde' required for four species");
            if (*cfg.g_tilde < 0.0 || *cfg.z_tilde < 0.0)
                throw ConfigError("fields 'g_tilde', 'z_tilde': must be >= 0");
            if (cfg.q_tilde && *cfg.q_tilde < 1.0) throw ConfigError("field 'q_tilde': must be >= 1");
            if (!cfg.rho0) throw ConfigError("field 'rho0' required for four species");
            if (*cfg.rho0 == 0.0) throw ConfigError("field 'rho0': must be nonzero for four species");
        }

        if (cfg.mode == Mode::Solve || cfg.mode == Mode::Current) {
            if (cfg.species == Species::Two)
                throw ConfigError("mode '" + to_string(cfg.mode) + "' needs three or four species");
            if (!cfg.epsilon) throw ConfigError("field 'epsilon' required");
            if (!(*cfg.epsilon > 0.0)) throw ConfigError("field 'epsilon': must be > 0");
            if (cfg.eta < 0.0) throw ConfigError("field 'eta': must be >= 0");
            if (cfg.n_nodes && *cfg.n_nodes < 5) throw ConfigError("field 'n_nodes': must be >= 5");
        }
        if (cfg.mode == Mode::Current) {
            if (!cfg.x1 || !cfg.x2) throw ConfigError("fields 'x1' and 'x2' required");
            if (!(*cfg.x1 > -1.0 && *cfg.x2 < 1.0 && *cfg.x1 <= *cfg.x2))
                throw ConfigError("fields 'x1', 'x2': need -1 < x1 <= x2 < 1");
        }
        return cfg;
    }

    // sweep
    auto param = text(doc, "sweep_parameter");
    if (!param) throw ConfigError("field 'sweep_parameter' required");
    if (!numeric_keys().count(*param))
        throw ConfigError("field 'sweep_parameter': '" + *param + "' is not a numeric field");
    cfg.sweep_parameter = *param;
    if (!doc.contains("sweep_values") || !doc.at("sweep_values").is_array() ||
        doc.at("sweep_values").empty())
        throw ConfigError("field 'sweep_values': expected a non-empty array of numbers");
    for (const auto& v : doc.at("sweep_values")) {
        if (!v.is_number()) throw ConfigError("field 'sweep_values': expected numbers");
        double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError("field 'sweep_values': must be finite");
        cfg.sweep_values.push_back(x);
    }
    auto sm = text(doc, "sweep_mode");
    if (!sm) throw ConfigError("field 'sweep_mode' required");
    cfg.sweep_mode = parse_mode(*sm);
    if (*cfg.sweep_mode == Mode::Sweep) throw ConfigError("field 'sweep_mode': cannot be sweep");
    for (double v : cfg.sweep_values) sweep_point(cfg, v);
    return cfg;
}

RunConfig sweep_point(const RunConfig& cfg, double value) {
    json doc = cfg.source;
    doc[cfg.sweep_parameter] = value;
    doc["mode"] = to_string(*cfg.sweep_mode);
    doc.erase("sweep_parameter");
    doc.erase("sweep_values");
    doc.erase("sweep_mode");
    return config_from_json(doc);
}

std::vector<RunReport> run_sweep(const RunConfig& cfg) {
    std::vector<std::future<RunReport>> jobs;
    for (double v : cfg.sweep_values) {
        RunConfig point = sweep_point(cfg, v);
        jobs.push_back(std::async(std::launch::async, [point] { return run_single(point); }));
    }
    std::vector<RunReport> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

RunReport run(const RunConfig& cfg) {
    if (cfg.mode != Mode::Sweep) return run_single(cfg);
    RunReport rep;
    rep.config = cfg.source;
    auto points = run_sweep(cfg);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::string tag = cfg.sweep_parameter + "=" + format_number(cfg.sweep_values[i]) + "/";
        for (auto& [k, v] : points[i].results) rep.results.emplace_back(tag + k, v);
        for (auto& t : points[i].tables) {
            Table c = t;
            c.name = tag + t.name;
            rep.tables.push_back(std::move(c));
        }
        for (auto& w : points[i].warnings) rep.warnings.push_back(tag + w);
    }
    return rep;
}

std::string format_number(double v) {
    if (!std::isfinite(v)) throw RunFailure("emit", "non-finite value in output");
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

namespace {

std::string shortest(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_block(std::ostringstream& os, const std::string& name,
                 const std::vector<std::string>& cols,
                 const std::vector<std::vector<std::string>>& rows) {
    os << "# " << name << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
}

} // namespace

std::string sweep_stem(const std::string& stem, const std::string& parameter, double value) {
    return stem + "_" + parameter + "=" + shortest(value);
}

std::string to_csv(const RunReport& rep) {
    std::ostringstream os;
    bool first = true;
    if (!rep.results.empty()) {
        std::vector<std::string> cols, row;
        for (const auto& [k, v] : rep.results) {
            cols.push_back(k);
            row.push_back(std::holds_alternative<double>(v) ? format_number(std::get<double>(v))
                                                            : std::get<std::string>(v));
        }
        write_block(os, "results", cols, {row});
        first = false;
    }
    for (const auto& t : rep.tables) {
        if (!first) os << '\n';
        first = false;
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : t.rows) {
            if (r.size() != t.columns.size())
                throw RunFailure("emit", "table '" + t.name + "' is not rectangular");
            std::vector<std::string> s;
            for (double v : r) s.push_back(format_number(v));
            rows.push_back(std::move(s));
        }
        write_block(os, t.name, t.columns, rows);
    }
    return os.str();
}

json to_json(const RunReport& rep) {
    json results = json::object();
    for (const auto& [k, v] : rep.results) {
        if (std::holds_alternative<double>(v)) {
            double x = std::get<double>(v);
            format_number(x); // finiteness check
            results[k] = x;
        } else {
            results[k] = std::get<std::string>(v);
        }
    }
    json tables = json::object();
    for (const auto& t : rep.tables) {
        json rows = json::array();
        for (const auto& r : t.rows) {
            for (double x : r) format_number(x);
            rows.push_back(r);
        }
        tables[t.name] = json{{"columns", t.columns}, {"rows", rows}};
    }
    json out{{"config", rep.config}, {"results", results}};
    if (!rep.tables.empty()) out["tables"] = tables;
    out["warnings"] = rep.warnings;
    return out;
}

std::string emit(const RunReport& rep, Format f) {
    if (f == Format::Json) return to_json(rep).dump(2) + "\n";
    return to_csv(rep);
}

} // namespace pnpsteric::cli
