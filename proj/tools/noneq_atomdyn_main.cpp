// noneq-atomdyn: transition rates, steady states and dynamics of two- and
// three-level emitters near a slab held out of thermal equilibrium.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "noneq/sweep.hpp"

namespace {

using namespace noneq;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_path;
    std::string format = "csv";
    int jobs = -1;  // -1: unset, fall back to env then config
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_input) {
    if (needs_input) {
        cmd->add_option("--config", o.config_path, "path to a key-value config file");
        cmd->add_option("--preset", o.preset, "named built-in configuration (fig2, fig5, ...)");
    }
    cmd->add_option("--out", o.out_path, "output path (default: stdout)");
    cmd->add_option("--jobs", o.jobs, "worker threads (env NONEQ_ATOMDYN_JOBS as fallback)");
    cmd->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

int resolve_jobs(const CommonOpts& o, const sweep::SweepConfig& cfg) {
    if (o.jobs >= 0) return o.jobs;
    if (const char* env = std::getenv("NONEQ_ATOMDYN_JOBS")) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            throw ConfigError("NONEQ_ATOMDYN_JOBS is not an integer");
        }
    }
    return cfg.jobs;
}

sweep::SweepConfig load_config(const CommonOpts& o, std::string* preset_command = nullptr) {
    if (!o.config_path.empty() && !o.preset.empty())
        throw ConfigError("--config and --preset are mutually exclusive");
    sweep::RawConfig raw;
    if (!o.preset.empty()) {
        const auto& table = sweep::presets();
        auto it = table.find(o.preset);
        if (it == table.end()) throw ConfigError("unknown preset '" + o.preset + "'");
        raw = sweep::parse_config_text(it->second.config);
        if (preset_command) *preset_command = it->second.command;
    } else if (!o.config_path.empty()) {
        raw = sweep::parse_config_file(o.config_path);
    } else {
        throw ConfigError("one of --config or --preset is required");
    }
    return sweep::make_sweep_config(raw);
}

int emit(const sweep::Table& table, const CommonOpts& o) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!o.out_path.empty()) {
        file.open(o.out_path);
        if (!file) {
            std::cerr << "error: cannot open output file '" << o.out_path << "'\n";
            return 2;
        }
        out = &file;
    }
    if (o.format == "json")
        sweep::write_json(table, *out);
    else
        sweep::write_csv(table, *out);
    std::size_t failed = 0;
    for (bool ok : table.row_ok)
        if (!ok) ++failed;
    if (failed > 0)
        std::cerr << "warning: " << failed << "/" << table.rows.size()
                  << " rows failed (see status column)\n";
    return table.exit_code();
}

int run_table_command(const std::string& command, const CommonOpts& o) {
    auto cfg = load_config(o);
    cfg.jobs = resolve_jobs(o, cfg);
    sweep::Table table;
    if (command == "rates")
        table = sweep::cmd_rates(cfg);
    else if (command == "steady")
        table = sweep::cmd_steady(cfg);
    else if (command == "dynamics")
        table = sweep::cmd_dynamics(cfg, std::cerr);
    else
        table = sweep::cmd_sweep(cfg);
    return emit(table, o);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dissipative atomic dynamics near a slab out of thermal equilibrium"};
    app.require_subcommand(1);

    CommonOpts rates_o, steady_o, dyn_o, sweep_o, fig_o, val_o;
    auto* c_rates = app.add_subcommand("rates", "transition rates over a parameter grid");
    add_common(c_rates, rates_o, true);
    auto* c_steady = app.add_subcommand("steady", "steady states over a parameter grid");
    add_common(c_steady, steady_o, true);
    auto* c_dyn = app.add_subcommand("dynamics", "time evolution at one parameter point");
    add_common(c_dyn, dyn_o, true);
    auto* c_sweep = app.add_subcommand("sweep", "rates and steady states in one table");
    add_common(c_sweep, sweep_o, true);
    auto* c_fig = app.add_subcommand("figure", "run a named preset configuration");
    add_common(c_fig, fig_o, true);
    auto* c_val = app.add_subcommand("validate", "run the built-in physics self-checks");
    add_common(c_val, val_o, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_val->parsed()) {
            std::ofstream file;
            std::ostream* out = &std::cout;
            if (!val_o.out_path.empty()) {
                file.open(val_o.out_path);
                if (!file) {
                    std::cerr << "error: cannot open output file '" << val_o.out_path << "'\n";
                    return 2;
                }
                out = &file;
            }
            return sweep::cmd_validate(*out);
        }
        if (c_fig->parsed()) {
            if (fig_o.preset.empty()) throw ConfigError("figure requires --preset");
            std::string command;
            auto cfg = load_config(fig_o, &command);
            cfg.jobs = resolve_jobs(fig_o, cfg);
            sweep::Table table;
            if (command == "rates")
                table = sweep::cmd_rates(cfg);
            else if (command == "steady")
                table = sweep::cmd_steady(cfg);
            else
                table = sweep::cmd_sweep(cfg);
            return emit(table, fig_o);
        }
        if (c_rates->parsed()) return run_table_command("rates", rates_o);
        if (c_steady->parsed()) return run_table_command("steady", steady_o);
        if (c_dyn->parsed()) return run_table_command("dynamics", dyn_o);
        if (c_sweep->parsed()) return run_table_command("sweep", sweep_o);
    } catch (const noneq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
