#include "gfmsim/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gfmsim/config.hpp"
#include "gfmsim/runner.hpp"

namespace gfmsim::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBlowUp = 3;

struct ScenarioArgs {
    std::string preset;
    std::string scenario_file;
    std::vector<std::string> sets;
    std::string out_dir = ".";
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& args) {
    cmd->add_option("--preset", args.preset, "Built-in scenario name");
    cmd->add_option("--scenario", args.scenario_file, "Path to a scenario file");
    cmd->add_option("--set", args.sets, "Override a config value, section.key=value");
    cmd->add_option("--out", args.out_dir, "Output directory");
}

std::vector<ConfigOverride> parse_sets(const std::vector<std::string>& sets) {
    std::vector<ConfigOverride> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--set expects section.key=value, got '" + s + "'");
        }
        out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    return out;
}

ScenarioConfig load_scenario(const ScenarioArgs& args,
                             const std::vector<ConfigOverride>& extra = {}) {
    if (args.preset.empty() == args.scenario_file.empty()) {
        throw ConfigError("exactly one of --preset or --scenario is required");
    }
    auto overrides = parse_sets(args.sets);
    overrides.insert(overrides.end(), extra.begin(), extra.end());
    if (!args.preset.empty()) {
        return load_preset(args.preset, overrides);
    }
    return load_config_file(args.scenario_file, overrides);
}

std::string output_path(const ScenarioArgs& args, const std::string& file) {
    std::filesystem::create_directories(args.out_dir);
    return (std::filesystem::path(args.out_dir) / file).string();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void print_metrics(const ScenarioConfig& cfg, const Metrics& m) {
    std::cout << "scenario: " << cfg.name << "  strategy: " << strategy_name(cfg.strategy) << "\n";
    std::cout << "  peak_i          " << fmt(m.peak_i) << " pu\n";
    std::cout << "  time_above_imax " << fmt(m.time_above_imax * 1e3) << " ms\n";
    std::cout << "  settle_time     " << (m.settled ? fmt(m.settle_time) + " s" : "not settled")
              << "\n";
    std::cout << "  final_p         " << fmt(m.final_p) << " pu\n";
    std::cout << "  final_q         " << fmt(m.final_q) << " pu\n";
    if (m.blow_up) {
        std::cout << "  blow_up         yes\n";
    }
}

int run_one(const ScenarioConfig& cfg, const ScenarioArgs& args, bool print) {
    const SimResult result = run_simulation(cfg);
    const std::string stem = cfg.name + "_" + strategy_name(cfg.strategy);
    write_csv(result, output_path(args, stem + ".csv"));
    write_metrics(result.metrics, output_path(args, stem + "_metrics.json"));
    if (print) {
        print_metrics(cfg, result.metrics);
    }
    if (!result.error.empty()) {
        std::cerr << "error: " << result.error << " (partial output retained)\n";
        return kExitBlowUp;
    }
    return kExitOk;
}

int cmd_run(const ScenarioArgs& args, const std::string& strategy) {
    std::vector<ConfigOverride> extra;
    if (!strategy.empty()) {
        extra.push_back({"limiter.strategy", strategy});
    }
    const ScenarioConfig cfg = load_scenario(args, extra);
    return run_one(cfg, args, true);
}

int cmd_compare(const ScenarioArgs& args, const std::string& strategies_csv, bool machine) {
    std::vector<std::string> strategies;
    std::string token;
    std::istringstream iss(strategies_csv);
    while (std::getline(iss, token, ',')) {
        if (!token.empty()) {
            strategies.push_back(token);
        }
    }
    if (strategies.size() < 2) {
        throw ConfigError("compare needs at least two strategies (--strategy tva,vav,htva)");
    }

    int exit_code = kExitOk;
    std::vector<std::pair<std::string, Metrics>> rows;
    for (const auto& name : strategies) {
        const ScenarioConfig cfg = load_scenario(args, {{"limiter.strategy", name}});
        const SimResult result = run_simulation(cfg);
        const std::string stem = cfg.name + "_" + strategy_name(cfg.strategy);
        write_csv(result, output_path(args, stem + ".csv"));
        write_metrics(result.metrics, output_path(args, stem + "_metrics.json"));
        if (!result.error.empty()) {
            std::cerr << "error (" << name << "): " << result.error << "\n";
            exit_code = kExitBlowUp;
        }
        rows.emplace_back(name, result.metrics);
    }

    if (machine) {
        std::cout << "strategy,peak_i,time_above_imax,settle_time,settled,final_p,final_q,blow_up\n";
        for (const auto& [name, m] : rows) {
            std::cout << name << "," << fmt(m.peak_i) << "," << fmt(m.time_above_imax) << ","
                      << fmt(m.settle_time) << "," << (m.settled ? 1 : 0) << "," << fmt(m.final_p)
                      << "," << fmt(m.final_q) << "," << (m.blow_up ? 1 : 0) << "\n";
        }
    } else {
        std::printf("%-8s %12s %18s %14s %10s %10s\n", "strategy", "peak_i [pu]", "t>imax [ms]",
                    "settle [s]", "final_p", "final_q");
        for (const auto& [name, m] : rows) {
            std::printf("%-8s %12s %18s %14s %10s %10s\n", name.c_str(), fmt(m.peak_i).c_str(),
                        fmt(m.time_above_imax * 1e3).c_str(),
                        m.settled ? fmt(m.settle_time).c_str() : "-", fmt(m.final_p).c_str(),
                        fmt(m.final_q).c_str());
        }
    }
    return exit_code;
}

int cmd_oracle(const std::vector<double>& dvs, double i_max, double i_th, double v_n,
               bool machine) {
    if (dvs.empty()) {
        throw ConfigError("oracle needs at least one --dv value");
    }
    LimiterParams params;
    params.i_max = i_max;
    params.i_th = i_th;
    params.v_n = v_n;
    params.validate();
    for (double dv : dvs) {
        if (dv < 0.0) {
            throw ConfigError("--dv must be >= 0");
        }
    }
    if (machine) {
        std::cout << "dv,qss_tva,qss_vav\n";
    }
    for (double dv : dvs) {
        const auto tva = qss_current_tva(dv, params);
        const double vav = qss_current_vav(dv, params);
        if (machine) {
            std::cout << fmt(dv) << "," << (tva ? fmt(*tva) : "nan") << "," << fmt(vav) << "\n";
        } else {
            std::cout << "dv = " << fmt(dv) << " pu:  tva -> "
                      << (tva ? fmt(*tva) + " pu" : "below threshold") << ",  vav -> " << fmt(vav)
                      << " pu (when active)\n";
        }
    }
    return kExitOk;
}

int cmd_sweep(const ScenarioArgs& args, const std::string& key, const std::string& values_csv,
              const std::string& strategy, bool machine) {
    if (key.empty()) {
        throw ConfigError("sweep needs --key section.key");
    }
    std::vector<double> values;
    std::string token;
    std::istringstream iss(values_csv);
    while (std::getline(iss, token, ',')) {
        if (token.empty()) {
            continue;
        }
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size()) {
            throw ConfigError("sweep --values expects numbers, got '" + token + "'");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw ConfigError("sweep needs a non-empty --values list");
    }

    int exit_code = kExitOk;
    std::string sweep_csv = "value,peak_i,time_above_imax,settle_time,settled,final_p,final_q,blow_up\n";
    if (machine) {
        std::cout << sweep_csv;
    } else {
        std::printf("%12s %12s %18s %14s %10s\n", key.c_str(), "peak_i [pu]", "t>imax [ms]",
                    "settle [s]", "final_p");
    }
    for (double v : values) {
        char vbuf[40];
        std::snprintf(vbuf, sizeof(vbuf), "%.17g", v);
        std::vector<ConfigOverride> extra = {{key, vbuf}};
        if (!strategy.empty()) {
            extra.push_back({"limiter.strategy", strategy});
        }
        const ScenarioConfig cfg = load_scenario(args, extra);
        const SimResult result = run_simulation(cfg);
        if (!result.error.empty()) {
            std::cerr << "error (" << key << "=" << fmt(v) << "): " << result.error << "\n";
            exit_code = kExitBlowUp;
        }
        const Metrics& m = result.metrics;
        char row[256];
        std::snprintf(row, sizeof(row), "%s,%s,%s,%s,%d,%s,%s,%d\n", fmt(v).c_str(),
                      fmt(m.peak_i).c_str(), fmt(m.time_above_imax).c_str(),
                      fmt(m.settle_time).c_str(), m.settled ? 1 : 0, fmt(m.final_p).c_str(),
                      fmt(m.final_q).c_str(), m.blow_up ? 1 : 0);
        sweep_csv += row;
        if (machine) {
            std::cout << row;
        } else {
            std::printf("%12s %12s %18s %14s %10s\n", fmt(v).c_str(), fmt(m.peak_i).c_str(),
                        fmt(m.time_above_imax * 1e3).c_str(),
                        m.settled ? fmt(m.settle_time).c_str() : "-", fmt(m.final_p).c_str());
        }
    }
    if (args.out_dir != ".") {
        std::ofstream out(output_path(args, "sweep.csv"), std::ios::binary);
        out << sweep_csv;
    }
    return exit_code;
}

int cmd_presets(const std::string& dump_name) {
    if (dump_name.empty()) {
        for (const auto& name : preset_names()) {
            std::cout << name << "\n";
        }
        return kExitOk;
    }
    std::cout << dump_config(load_preset(dump_name));
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"gfmsim - grid-forming inverter fault-current-limiting simulator"};
    app.require_subcommand(1);

    ScenarioArgs run_args;
    std::string run_strategy;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario and write CSV + metrics");
    add_scenario_options(run_cmd, run_args);
    run_cmd->add_option("--strategy", run_strategy, "Limiter strategy (tva, vav, htva)");

    ScenarioArgs cmp_args;
    std::string cmp_strategies;
    bool cmp_machine = false;
    auto* cmp_cmd = app.add_subcommand("compare", "Run several strategies on one scenario");
    add_scenario_options(cmp_cmd, cmp_args);
    cmp_cmd->add_option("--strategy", cmp_strategies, "Comma-separated strategies (>= 2)");
    cmp_cmd->add_flag("--csv", cmp_machine, "Machine-readable output");

    std::vector<double> oracle_dvs;
    double oracle_imax = 1.2;
    double oracle_ith = 1.0;
    double oracle_vn = 1.0;
    bool oracle_machine = false;
    auto* oracle_cmd =
        app.add_subcommand("oracle", "Print quasi-steady-state limited currents for given dv");
    oracle_cmd->add_option("--dv", oracle_dvs, "Driving voltage magnitude(s), pu");
    oracle_cmd->add_option("--i-max", oracle_imax, "Maximum current, pu");
    oracle_cmd->add_option("--i-th", oracle_ith, "Threshold current, pu");
    oracle_cmd->add_option("--v-n", oracle_vn, "Nominal voltage, pu");
    oracle_cmd->add_flag("--csv", oracle_machine, "Machine-readable output");

    ScenarioArgs sweep_args;
    std::string sweep_key;
    std::string sweep_values;
    std::string sweep_strategy;
    bool sweep_machine = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario across a swept config value");
    add_scenario_options(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--key", sweep_key, "Config key to sweep, e.g. events.event1.arg");
    sweep_cmd->add_option("--values", sweep_values, "Comma-separated numeric values");
    sweep_cmd->add_option("--strategy", sweep_strategy, "Limiter strategy (tva, vav, htva)");
    sweep_cmd->add_flag("--csv", sweep_machine, "Machine-readable output");

    std::string dump_name;
    auto* presets_cmd = app.add_subcommand("presets", "List built-in presets");
    presets_cmd->add_option("--dump", dump_name, "Print the resolved config of a preset");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(run_args, run_strategy);
        }
        if (cmp_cmd->parsed()) {
            return cmd_compare(cmp_args, cmp_strategies, cmp_machine);
        }
        if (oracle_cmd->parsed()) {
            return cmd_oracle(oracle_dvs, oracle_imax, oracle_ith, oracle_vn, oracle_machine);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_args, sweep_key, sweep_values, sweep_strategy, sweep_machine);
        }
        if (presets_cmd->parsed()) {
            return cmd_presets(dump_name);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitBlowUp;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args);
}

} // namespace gfmsim::cli
