// uimart: simulate, construct, diagnose and certify uniformly integrable
// martingales outside H^1.

#include <cstdint>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uimart/config.hpp"
#include "uimart/errors.hpp"
#include "uimart/report.hpp"
#include "uimart/verify.hpp"

namespace {

struct Overrides {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out;
    std::optional<std::string> model;
    std::optional<unsigned> workers;
    bool quick = false;
    bool dump_paths = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_model) {
    cmd->add_option("--config", o.config_file, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed (u64)");
    cmd->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
    cmd->add_flag("--quick", o.quick, "10^4 paths and widened tolerances");
    if (with_model) {
        cmd->add_option("--model", o.model, "inverse-bessel | double-or-nothing");
    }
}

// Flags win over the config file, which wins over the defaults.
uimart::ExperimentConfig resolve(const Overrides& o, uimart::ExperimentConfig base) {
    uimart::ExperimentConfig c = o.config_file.empty() ? base : uimart::load_config(o.config_file);
    if (o.quick) {
        c.quick = true;
        c.n_paths = 10'000;
    }
    if (o.model) {
        try {
            c.model = uimart::parse_model_tag(*o.model);
        } catch (const uimart::InvalidArgument& e) {
            throw uimart::ConfigError("model", e.what());
        }
    }
    if (o.seed) c.master_seed = *o.seed;
    if (o.paths) c.n_paths = *o.paths;
    if (o.out) c.output_dir = *o.out;
    if (o.workers) c.workers = *o.workers;
    if (o.dump_paths) c.dump_paths = true;
    uimart::validate(c);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uimart: uniformly integrable martingales that are not in H^1"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("uimart ") + "0.1.0");

    Overrides sim_o, con_o, diag_o, ver_o;

    auto* sim = app.add_subcommand("simulate", "simulate raw paths and write per-path summaries");
    add_common(sim, sim_o, true);
    sim->add_flag("--dump-paths", sim_o.dump_paths, "also write every path value (large)");

    auto* con = app.add_subcommand("construct", "stop paths at an independent threshold Y");
    add_common(con, con_o, true);

    auto* diag = app.add_subcommand("diagnose", "tail, series and uniform-integrability tables");
    add_common(diag, diag_o, true);

    auto* ver = app.add_subcommand("verify", "run the acceptance battery");
    add_common(ver, ver_o, false);
    std::string fault;
    ver->add_option("--inject-fault", fault, "mutation test")
        ->check(CLI::IsMember({"c0"}))
        ->group("");
    bool skip_repro = false;
    ver->add_flag("--skip-reproducibility", skip_repro, "skip the worker-count rerun check");

    auto* ora = app.add_subcommand("oracle", "print exact values");
    std::string model, query;
    std::vector<std::string> args;
    ora->add_option("model", model, "inverse-bessel | double-or-nothing")->required();
    ora->add_option("query", query,
                    "sup_tail | c | y_pmf | stopped_tail | divergence_bound | enumeration")
        ->required();
    ora->add_option("args", args, "query argument");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) {
            uimart::cmd_simulate(resolve(sim_o, {}), std::cerr);
        } else if (con->parsed()) {
            uimart::cmd_construct(resolve(con_o, {}), std::cerr);
        } else if (diag->parsed()) {
            uimart::cmd_diagnose(resolve(diag_o, {}), std::cerr);
        } else if (ver->parsed()) {
            uimart::VerifyOptions opt;
            opt.config = resolve(ver_o, uimart::default_verify_config(ver_o.quick));
            if (fault == "c0") opt.faulty_c0 = std::numbers::e;
            opt.check_reproducibility = !skip_repro;
            return uimart::cmd_verify(opt, std::cout, std::cerr);
        } else if (ora->parsed()) {
            uimart::cmd_oracle(model, query, args, std::cout);
        }
    } catch (const uimart::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const uimart::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const uimart::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
