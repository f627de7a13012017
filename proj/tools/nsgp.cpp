// nsgp: interpretability-aware multi-objective symbolic regression driver.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nsgp/commands.hpp"
#include "nsgp/error.hpp"
#include "nsgp/parallel.hpp"

namespace {

std::size_t resolve_workers(const CLI::Option* flag, std::size_t value)
{
    return flag->count() > 0 ? std::max<std::size_t>(1, value) : nsgp::workers_from_env();
}

} // namespace

int main(int argc, char** argv)
{
    using namespace nsgp;

    CLI::App app{"Bi-objective genetic programming for symbolic regression with a learned interpretability objective"};
    app.require_subcommand(1);

    // train-phi
    cli::TrainPhiOptions train;
    std::size_t train_workers = 1;
    auto* train_cmd = app.add_subcommand("train-phi", "Fit the interpretability model from survey data");
    train_cmd->add_option("input", train.input, "Survey answers CSV or merged samples CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train.out, "Coefficients JSON to write")->required();
    train_cmd->add_option("--seed", train.seed, "Base seed for the SGD folds");
    auto* train_workers_opt = train_cmd->add_option("--workers", train_workers, "Worker threads (default: NSGP_WORKERS or 1)");

    // evolve
    std::string profile = "full";
    std::string mode = "phi";
    cli::ExperimentConfig exp;
    std::size_t pop = 0, gens = 0, runs = 0, evo_workers = 1;
    std::vector<int> taus;
    std::string out_dir = "runs";
    auto* evolve_cmd = app.add_subcommand("evolve", "Run NSGP experiments and write run artifacts");
    evolve_cmd->add_option("--dataset", exp.dataset, "CSV path (last column = target) or synthetic benchmark name")->required();
    evolve_cmd->add_option("--mode", mode, "Interpretability objective")->check(CLI::IsMember({"phi", "size"}));
    evolve_cmd->add_option("--profile", profile, "Default settings: full (1000 x 100, 50 runs) or desk (500 x 50, 10 runs)")->check(CLI::IsMember({"full", "desk"}));
    auto* pop_opt = evolve_cmd->add_option("--pop", pop, "Population size (even)");
    auto* gens_opt = evolve_cmd->add_option("--gens", gens, "Generations");
    auto* runs_opt = evolve_cmd->add_option("--runs", runs, "Independent runs");
    evolve_cmd->add_option("--seed", exp.base_seed, "Seed of the first run; run r uses seed + r");
    auto* tau_opt = evolve_cmd->add_option("--tau", taus, "Trade-off percentiles to report")->delimiter(',');
    evolve_cmd->add_option("--coeffs", exp.coeffs_path, "Coefficients JSON from train-phi")->check(CLI::ExistingFile);
    auto* evo_workers_opt = evolve_cmd->add_option("--workers", evo_workers, "Worker threads (default: NSGP_WORKERS or 1)");
    evolve_cmd->add_option("--out", out_dir, "Output root directory");

    // compare
    std::string dir_a, dir_b, report_out;
    std::vector<int> cmp_taus{5, 25, 50};
    auto* compare_cmd = app.add_subcommand("compare", "Paired comparison of two run directories");
    compare_cmd->add_option("dir_phi", dir_a, "Run directory of the first variant (e.g. runs/nguyen7/phi)")->required();
    compare_cmd->add_option("dir_size", dir_b, "Run directory of the second variant (e.g. runs/nguyen7/size)")->required();
    compare_cmd->add_option("--tau", cmp_taus, "Trade-off percentiles")->delimiter(',');
    compare_cmd->add_option("--out", report_out, "Report JSON to write");

    // gen-data
    std::string gen_name;
    std::uint64_t gen_seed = cli::kSyntheticDataSeed;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic benchmark dataset as CSV");
    gen_cmd->add_option("--dataset", gen_name, "nguyen7, keijzer6, pagie1, vladislavleva4 or korns12")->required();
    gen_cmd->add_option("--seed", gen_seed, "Sampling seed");
    gen_cmd->add_option("--out", gen_out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            train.workers = resolve_workers(train_workers_opt, train_workers);
            cli::cmd_train_phi(train, std::cout);
        } else if (*evolve_cmd) {
            const auto base = profile == "desk" ? cli::ExperimentConfig::desk_profile() : cli::ExperimentConfig{};
            exp.mode = parse_interp_mode(mode);
            exp.pop_size = pop_opt->count() ? pop : base.pop_size;
            exp.generations = gens_opt->count() ? gens : base.generations;
            exp.n_runs = runs_opt->count() ? runs : base.n_runs;
            exp.taus = tau_opt->count() ? taus : base.taus;
            exp.workers = resolve_workers(evo_workers_opt, evo_workers);
            exp.out_dir = out_dir;
            cli::cmd_evolve(exp, std::cout);
        } else if (*compare_cmd) {
            const auto report = cli::cmd_compare(dir_a, dir_b, cmp_taus);
            cli::print_compare_table(report, std::cout);
            if (!report_out.empty()) {
                std::ofstream f(report_out);
                if (!f) throw DataError("cannot write '" + report_out + "'");
                f << cli::compare_report_json(report) << '\n';
            }
        } else if (*gen_cmd) {
            cli::cmd_gen_data(gen_name, gen_seed, gen_out);
        }
    } catch (const nsgp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
