#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsgp/data.hpp"
#include "nsgp/moea.hpp"
#include "nsgp/phi_trainer.hpp"
#include "nsgp/stats.hpp"

namespace nsgp::cli {

// Seed used for the shipped synthetic benchmark files.
inline constexpr std::uint64_t kSyntheticDataSeed = 2021;

struct TrainPhiOptions {
    std::string input; // answers CSV or merged samples CSV
    std::string out;   // coefficients JSON
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

struct TrainPhiResult {
    std::vector<SurveySample> samples;
    std::vector<double> weights;
    CrossValidationReport report;
};

TrainPhiResult cmd_train_phi(const TrainPhiOptions& options, std::ostream& log);

struct ExperimentConfig {
    std::string dataset; // CSV path or synthetic benchmark name
    InterpMode mode = InterpMode::Phi;
    std::size_t pop_size = 1000;
    std::size_t generations = 100;
    std::size_t n_runs = 50;
    std::uint64_t base_seed = 1;
    std::vector<int> taus{5, 25, 50};
    std::string coeffs_path; // empty: published coefficients
    std::size_t workers = 1;
    std::filesystem::path out_dir = "runs";

    // Reduced settings that run in seconds per seed.
    static ExperimentConfig desk_profile();

    void validate() const;
};

// Synthetic name -> generated benchmark, anything else -> CSV path.
Dataset resolve_dataset(const std::string& source);

struct TauSelection {
    int tau = 0;
    FrontMember member;
};

struct RunSummary {
    std::uint64_t seed = 0;
    std::filesystem::path dir;
    FrontRecord front;
    std::vector<TauSelection> selections;
    std::vector<GenerationStats> trace;
};

// One run per seed base_seed + r, each written to
// <out_dir>/<dataset>/<mode>/<seed>/{front.csv,trace.csv,config.json}.
// The observer, when given, is shared by all runs and must be thread-safe if
// workers > 1.
std::vector<RunSummary> cmd_evolve(const ExperimentConfig& config, std::ostream& log, const EvolutionObserver* observer = nullptr);

struct GroupMedians {
    double train_nmse = 0.0;
    double test_nmse = 0.0;
    double phi = 0.0; // phi objective
    double l = 0.0;
    double front_size = 0.0;
};

struct TauComparison {
    int tau = 0;
    GroupMedians a;
    GroupMedians b;
    double p_train = 1.0;
    double p_test = 1.0;
    bool reject_train = false; // after Holm correction across the tau list
    bool reject_test = false;
};

struct CompareReport {
    std::string dir_a;
    std::string dir_b;
    std::string mode_a;
    std::string mode_b;
    std::vector<std::uint64_t> seeds;
    std::vector<TauComparison> rows;
};

// Pairs runs by seed directory name. Throws ConfigError when the seed sets
// differ.
CompareReport cmd_compare(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b, const std::vector<int>& taus, double alpha = 0.05);

std::string compare_report_json(const CompareReport& report);
void print_compare_table(const CompareReport& report, std::ostream& out);

// Writes a synthetic benchmark CSV.
void cmd_gen_data(const std::string& name, std::uint64_t seed, const std::filesystem::path& out);

} // namespace nsgp::cli
