// Command line front end: pnpsteric <branches|critical|solve|current|sweep> [options]

#include "pnpsteric/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pnpsteric::cli;

namespace {

constexpr const char* kOutDirEnv = "PNPSTERIC_OUTPUT_DIR";

struct Flags {
    std::string config_path;
    std::map<std::string, double> numbers;
    std::map<std::string, std::string> strings;
    long long n_nodes = 0;
    long long sigma_points = 0;
    std::vector<double> sweep_values;
};

const std::vector<std::pair<std::string, std::string>> kNumberFlags = {
    {"g", "--g"},
    {"z", "--z"},
    {"q", "--q"},
    {"z3", "--z3"},
    {"rho0", "--rho0"},
    {"g_tilde", "--g-tilde"},
    {"z_tilde", "--z-tilde"},
    {"q_tilde", "--q-tilde"},
    {"epsilon", "--epsilon"},
    {"eta", "--eta"},
    {"phi0_left", "--phi0-left"},
    {"phi0_right", "--phi0-right"},
    {"x1", "--x1"},
    {"x2", "--x2"},
    {"d1", "--d1"},
    {"d2", "--d2"},
    {"d3", "--d3"},
    {"d4", "--d4"},
    {"charge_scale", "--charge-scale"},
    {"sigma_max", "--sigma-max"},
};

const std::vector<std::pair<std::string, std::string>> kStringFlags = {
    {"species", "--species"},
    {"branch", "--branch"},
    {"format", "--format"},
    {"out", "--out"},
    {"sweep_parameter", "--sweep-parameter"},
    {"sweep_mode", "--sweep-mode"},
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("-c,--config", f.config_path, "JSON configuration file");
    for (const auto& [key, flag] : kNumberFlags) sub->add_option(flag, f.numbers[key]);
    for (const auto& [key, flag] : kStringFlags) sub->add_option(flag, f.strings[key]);
    sub->add_option("--n-nodes", f.n_nodes);
    sub->add_option("--sigma-points", f.sigma_points);
    sub->add_option("--sweep-values", f.sweep_values)->delimiter(',');
}

json merged_document(CLI::App* sub, const Flags& f) {
    json doc = json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw pnpsteric::ConfigError("cannot open config file '" + f.config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            doc = json::parse(ss.str());
        } catch (const json::parse_error& e) {
            throw pnpsteric::ConfigError(f.config_path + ": " + e.what());
        }
        if (!doc.is_object()) throw pnpsteric::ConfigError("config must be a JSON object");
    }
    doc["mode"] = sub->get_name();
    for (const auto& [key, flag] : kNumberFlags)
        if (sub->count(flag)) doc[key] = f.numbers.at(key);
    for (const auto& [key, flag] : kStringFlags)
        if (sub->count(flag)) doc[key] = f.strings.at(key);
    if (sub->count("--n-nodes")) doc["n_nodes"] = f.n_nodes;
    if (sub->count("--sigma-points")) doc["sigma_points"] = f.sigma_points;
    if (sub->count("--sweep-values")) doc["sweep_values"] = f.sweep_values;
    return doc;
}

fs::path resolve(const std::string& out) {
    fs::path p(out);
    const char* dir = std::getenv(kOutDirEnv);
    if (p.is_relative() && dir && *dir) p = fs::path(dir) / p;
    return p;
}

void write_file(const fs::path& p, const std::string& body) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw pnpsteric::cli::RunFailure("emit", "cannot write '" + p.string() + "'");
    out << body;
}

void write_sweep(const RunConfig& cfg) {
    fs::path base = cfg.out == "-" ? resolve("sweep") : resolve(cfg.out);
    fs::path dir = base.has_parent_path() ? base.parent_path() : fs::path(".");
    std::string stem = base.stem().string();
    const std::string ext = cfg.format == Format::Json ? ".json" : ".csv";

    auto reports = run_sweep(cfg);
    json manifest{{"parameter", cfg.sweep_parameter},
                  {"mode", to_string(*cfg.sweep_mode)},
                  {"points", json::array()}};
    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::string name = sweep_stem(stem, cfg.sweep_parameter, cfg.sweep_values[i]) + ext;
        write_file(dir / name, emit(reports[i], cfg.format));
        manifest["points"].push_back(json{{"index", i}, {"value", cfg.sweep_values[i]}, {"file", name}});
    }
    write_file(dir / (stem + "_manifest.json"), manifest.dump(2) + "\n");
    std::cout << (dir / (stem + "_manifest.json")).string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PNP-steric branch, boundary value and excess current tool"};
    app.require_subcommand(1);
    Flags flags;
    std::vector<CLI::App*> subs;
    for (const char* name : {"branches", "critical", "solve", "current", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        add_flags(sub, flags);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* sub = nullptr;
    for (auto* s : subs)
        if (s->parsed()) sub = s;

    try {
        RunConfig cfg = config_from_json(merged_document(sub, flags));
        if (cfg.mode == Mode::Sweep) {
            write_sweep(cfg);
            return 0;
        }
        RunReport rep = run(cfg);
        std::string body = emit(rep, cfg.format);
        if (cfg.out == "-")
            std::cout << body;
        else
            write_file(resolve(cfg.out), body);
        for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
        return 0;
    } catch (const pnpsteric::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pnpsteric::cli::RunFailure& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error in run: " << e.what() << "\n";
        return 3;
    }
}
