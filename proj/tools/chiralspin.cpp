// chiralspin command-line driver.
//
//   chiralspin couplings --material alpha-SiO2 --l 1e-6 --w 1e-7 --h 1e-7 --delta 1e4
//   chiralspin simulate configs/simulate_forward.json [--set key=value ...]
//   chiralspin experiment transfer_asymmetry configs/transfer.json
//   chiralspin run configs/chain.json
//   chiralspin validate
//
// Exit codes: 0 ok, 2 bad input, 3 integration/fit failure or failed invariant, 4 I/O.
// Diagnostics go to stderr as "LEVEL key=value ..." lines.

#include "chiralspin/config.hpp"
#include "chiralspin/report.hpp"
#include "chiralspin/validate.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>

using namespace chiralspin;

namespace {

enum Exit { ok = 0, bad_input = 2, run_failure = 3, io_failure = 4 };

std::string quoted(const std::string& v) {
    if (!v.empty() && v.find_first_of(" \t\"=") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

void log(const char* level, std::initializer_list<std::pair<std::string, std::string>> kv) {
    std::string line = level;
    for (const auto& [k, v] : kv) line += " " + k + "=" + quoted(v);
    std::cerr << line << '\n';
}

std::size_t thread_count() {
    const char* env = std::getenv("CHIRALSPIN_THREADS");
    if (!env || !*env) return 1;
    std::size_t n = 0;
    const auto [p, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec != std::errc{} || *p != '\0' || n < 1 || n > 256)
        throw ConfigError("CHIRALSPIN_THREADS must be an integer in 1..256");
    return n;
}

int emit(ExperimentReport& r, const std::string& dir, bool json_out, bool csv_out) {
    const auto files = emit_report(r, dir, json_out, csv_out);
    for (const auto& f : files) log("INFO", {{"event", "wrote"}, {"file", (std::filesystem::path(dir) / f).string()}});
    for (const auto& [k, v] : r.pass_flags)
        if (!v) log("WARN", {{"event", "flag_failed"}, {"flag", k}});
    return ok;
}

int run_config(RunConfig cfg, const std::optional<std::string>& out_dir) {
    if (out_dir) cfg.output.directory = *out_dir;
    const auto threads = thread_count();
    log("INFO", {{"event", "start"}, {"experiment", cfg.experiment}, {"threads", std::to_string(threads)}});
    const auto t0 = std::chrono::steady_clock::now();
    auto report = run_experiment(cfg, threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log("INFO", {{"event", "done"}, {"experiment", cfg.experiment}, {"seconds", std::to_string(secs)},
                 {"all_pass", report.all_pass() ? "true" : "false"}});
    return emit(report, cfg.output.directory, cfg.output.wants("json"), cfg.output.wants("csv"));
}

RunConfig load_with(const std::string& path, const std::vector<std::string>& sets) {
    return apply_overrides(load_config(path), sets);
}

void print_table(const materials::CouplingBudget& b) {
    std::printf("material %s  spin %s  delta %.6g Hz  spin frequency %.6g Hz\n", b.material.c_str(),
                std::string(materials::to_string(b.spin_kind)).c_str(), b.delta_hz, b.spin_frequency_hz);
    std::printf("%-10s %-9s %-16s %14s %14s %14s  %s\n", "mode", "phonon", "spin-spin", "g_hz", "detuning_hz",
                "gamma_hz", "flags");
    for (const auto& row : b.rows) {
        std::string flags;
        for (const auto& f : row.flags) flags += (flags.empty() ? "" : ",") + f;
        std::printf("%-10s %-9s %-16s %14.6g %14.6g %14.6g  %s\n", row.mode.c_str(), row.spin_phonon.c_str(),
                    row.spin_spin.c_str(), row.g_hz, row.detuning_hz, row.gamma_hz, flags.c_str());
    }
    std::printf("gamma/gamma' = %.6g\n", b.non_reciprocity());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chiralspin: chiral-phonon mediated spin-spin interaction simulator"};
    app.require_subcommand(1);

    std::string material = "alpha-SiO2", kind = "electron";
    double l = 1e-6, w = 1e-7, h = 1e-7, delta = 1e4;
    int mode_index = 1;
    std::optional<double> drive_u, g_prime;
    std::optional<std::string> couplings_out;
    auto* couplings = app.add_subcommand("couplings", "print the four-row coupling budget");
    couplings->set_help_flag("--help", "print this help message and exit");
    couplings->add_option("--material", material, "material name from the built-in table")->capture_default_str();
    couplings->add_option("--kind", kind, "electron or nuclear")->capture_default_str();
    couplings->add_option("--l", l, "length along the chiral axis, m")->capture_default_str();
    couplings->add_option("--w", w, "width, m")->capture_default_str();
    couplings->add_option("--h", h, "height, m")->capture_default_str();
    couplings->add_option("--delta", delta, "spin detuning above the (+k_z,+L) mode, Hz")->capture_default_str();
    couplings->add_option("--n", mode_index, "longitudinal mode index")->capture_default_str();
    couplings->add_option("--drive-u", drive_u, "driven strain amplitude replacing the zero-point strain");
    couplings->add_option("--g-prime", g_prime, "coupling of the (-k_z,+L) mode, Hz");
    couplings->add_option("--out", couplings_out, "also write a report directory");

    std::string sim_path;
    std::vector<std::string> sim_sets;
    std::optional<std::string> sim_out;
    auto* simulate_cmd = app.add_subcommand("simulate", "integrate a configured model");
    simulate_cmd->add_option("config", sim_path, "config file (experiment.name = simulate)")->required();
    simulate_cmd->add_option("--set", sim_sets, "override key.path=value");
    simulate_cmd->add_option("--out", sim_out, "output directory");

    std::string exp_name, exp_path;
    std::vector<std::string> exp_sets;
    std::optional<std::string> exp_out;
    auto* experiment_cmd = app.add_subcommand("experiment", "run a named experiment");
    experiment_cmd->add_option("name", exp_name, "experiment name")->required();
    experiment_cmd->add_option("config", exp_path, "config file")->required();
    experiment_cmd->add_option("--set", exp_sets, "override key.path=value");
    experiment_cmd->add_option("--out", exp_out, "output directory");

    std::string run_path;
    std::vector<std::string> run_sets;
    std::optional<std::string> run_out;
    auto* run_cmd = app.add_subcommand("run", "run whatever experiment the config names");
    run_cmd->add_option("config", run_path, "config file")->required();
    run_cmd->add_option("--set", run_sets, "override key.path=value");
    run_cmd->add_option("--out", run_out, "output directory");

    std::optional<std::string> validate_out;
    auto* validate_cmd = app.add_subcommand("validate", "run the invariant suite");
    validate_cmd->add_option("--out", validate_out, "also write a report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : bad_input;
    }

    try {
        if (*couplings) {
            materials::BudgetOptions o;
            o.n = mode_index;
            o.drive_u = drive_u;
            o.g_prime_hz = g_prime;
            const auto mat = materials::lookup_material(material);
            const materials::ResonatorGeometry geom{l, w, h};
            const auto spin_kind = materials::parse_spin_kind(kind);
            print_table(materials::coupling_table(mat, geom, spin_kind, delta, o));
            if (couplings_out) {
                auto r = coupling_budget(mat, geom, spin_kind, delta, o);
                return emit(r, *couplings_out, true, true);
            }
            return ok;
        }
        if (*simulate_cmd) {
            auto cfg = load_with(sim_path, sim_sets);
            if (cfg.experiment != "simulate")
                throw ConfigError("simulate needs a config with experiment.name = simulate (got '" + cfg.experiment + "')");
            return run_config(cfg, sim_out);
        }
        if (*experiment_cmd) {
            auto cfg = load_with(exp_path, exp_sets);
            if (cfg.experiment != exp_name)
                throw ConfigError("config names experiment '" + cfg.experiment + "', not '" + exp_name + "'");
            return run_config(cfg, exp_out);
        }
        if (*run_cmd) return run_config(load_with(run_path, run_sets), run_out);
        if (*validate_cmd) {
            auto r = validate_invariants();
            for (const auto& [k, v] : r.pass_flags) std::printf("%s %s\n", v ? "PASS" : "FAIL", k.c_str());
            if (validate_out) emit(r, *validate_out, true, false);
            if (!r.all_pass()) {
                for (const auto& [k, v] : r.pass_flags)
                    if (!v) log("ERROR", {{"event", "invariant_failed"}, {"invariant", k}});
                return run_failure;
            }
            return ok;
        }
    } catch (const ConfigError& e) {
        log("ERROR", {{"kind", "config"}, {"message", e.what()}});
        return bad_input;
    } catch (const IntegrationError& e) {
        log("ERROR", {{"kind", "integration"}, {"invariant", "trace_drift"}, {"message", e.what()}});
        return run_failure;
    } catch (const FitError& e) {
        log("ERROR", {{"kind", "fit"}, {"message", e.what()}});
        return run_failure;
    } catch (const ConvergenceError& e) {
        log("ERROR", {{"kind", "convergence"}, {"message", e.what()}});
        return run_failure;
    } catch (const DomainError& e) {
        log("ERROR", {{"kind", "domain"}, {"message", e.what()}});
        return bad_input;
    } catch (const IoError& e) {
        log("ERROR", {{"kind", "io"}, {"message", e.what()}});
        return io_failure;
    } catch (const std::exception& e) {
        log("ERROR", {{"kind", "internal"}, {"message", e.what()}});
        return run_failure;
    }
    return ok;
}
