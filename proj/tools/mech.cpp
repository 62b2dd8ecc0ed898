// mech: deterministic driver for dataset generation, mechanism design,
// evaluation, convergence sweeps, and smoothness verification. One JSON config
// per run; flags only override config fields.
//
// Exit codes: 0 success (verify: all checks passed), 1 usage or config error,
// 2 data error or failed verification, 3 degenerate model.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stratmech/stratmech.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> m;
    std::optional<double> sigma;
    std::optional<double> eps;
    std::optional<double> c;
    std::optional<std::string> method;
    std::optional<std::string> output_dir;
};

void apply(const Overrides& ov, stratmech::RunConfig& cfg) {
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.m) cfg.m = *ov.m;
    if (ov.sigma) cfg.smoothing.sigma = *ov.sigma;
    if (ov.eps) {
        cfg.design.eps = *ov.eps;
        cfg.sweep.eps = *ov.eps;
    }
    if (ov.c) cfg.cost_c = *ov.c;
    if (ov.method) {
        cfg.design.method = *ov.method;
        cfg.sweep.method = *ov.method;
    }
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"welfare-maximizing evaluation mechanism toolkit"};
    app.require_subcommand(1);

    std::string config_path, dataset_path, mechanism_path;
    Overrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", ov.seed, "override master seed");
        sub->add_option("--out", ov.output_dir, "override output directory");
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a dataset (CSV + provenance sidecar)");
    add_common(gen);
    gen->add_option("--m", ov.m, "override sample count");
    gen->add_option("--sigma", ov.sigma, "override smoothing sigma");

    CLI::App* design = app.add_subcommand("design", "design a mechanism for a dataset");
    add_common(design);
    design->add_option("--dataset", dataset_path, "dataset CSV")->required();
    design->add_option("--method", ov.method, "override design method");
    design->add_option("--eps", ov.eps, "override approximation eps");
    design->add_option("--sigma", ov.sigma, "override smoothing sigma");
    design->add_option("--c", ov.c, "override cost c");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a mechanism on a dataset");
    add_common(eval);
    eval->add_option("--mechanism", mechanism_path, "mechanism JSON")->required();
    eval->add_option("--dataset", dataset_path, "dataset CSV")->required();
    eval->add_option("--c", ov.c, "override cost c");

    CLI::App* sweep = app.add_subcommand("sweep", "sample-complexity convergence sweep");
    add_common(sweep);
    sweep->add_option("--method", ov.method, "override sweep design method");
    sweep->add_option("--eps", ov.eps, "override approximation eps");

    CLI::App* verify = app.add_subcommand("verify", "smoothness and consistency checks");
    add_common(verify);
    verify->add_option("--dataset", dataset_path, "dataset CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        stratmech::RunConfig cfg = stratmech::load_config(config_path);
        apply(ov, cfg);
        if (gen->parsed()) {
            stratmech::cmd_gen(cfg);
        } else if (design->parsed()) {
            stratmech::cmd_design(cfg, dataset_path);
        } else if (eval->parsed()) {
            stratmech::cmd_eval(cfg, mechanism_path, dataset_path);
        } else if (sweep->parsed()) {
            stratmech::cmd_sweep(cfg);
        } else if (verify->parsed()) {
            if (!stratmech::cmd_verify(cfg, dataset_path)) {
                std::cerr << "verify: checks failed (see verify.json)\n";
                return 2;
            }
        }
    } catch (const stratmech::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const stratmech::degenerate_error& e) {
        std::cerr << "degenerate model: " << e.what() << '\n';
        return 3;
    } catch (const stratmech::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
