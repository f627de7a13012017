#include "nsgp/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include <json.hpp>

#include "nsgp/csv.hpp"
#include "nsgp/error.hpp"
#include "nsgp/parallel.hpp"

namespace nsgp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// train-phi

TrainPhiResult cmd_train_phi(const TrainPhiOptions& options, std::ostream& log)
{
    TrainPhiResult result;
    result.samples = load_survey(options.input);
    if (result.samples.size() < 3) {
        throw DataError("'" + options.input + "' yields " + std::to_string(result.samples.size()) + " merged samples; at least 3 are needed");
    }
    std::vector<double> labels;
    for (const auto& s : result.samples) labels.push_back(s.label);
    result.weights = bin_weights(labels);

    const auto grid = default_grid();
    result.report = loo_cross_validate(result.samples, result.weights, grid, options.seed, options.workers);
    const auto& r = result.report;
    const auto& m = r.averaged;

    json out;
    out["intercept"] = m.intercept;
    out["w_l"] = m.slopes[0];
    out["w_no"] = m.slopes[1];
    out["w_nao"] = m.slopes[2];
    out["w_naoc"] = m.slopes[3];
    out["cv_r2_train"] = r.r2_train;
    out["cv_r2_test"] = r.r2_test;
    out["cv_mae"] = r.mae;
    if (!options.out.empty()) {
        std::ofstream f(options.out);
        if (!f) {
            throw DataError("cannot write '" + options.out + "'");
        }
        f << out.dump(2) << '\n';
    }

    log << "samples: " << result.samples.size() << '\n'
        << "best alpha=" << r.best.alpha << " l1_ratio=" << r.best.l1_ratio << '\n'
        << std::fixed << std::setprecision(3) << "LOO weighted R2 train=" << r.r2_train << " test=" << r.r2_test << " MAE=" << r.mae << '\n'
        << std::setprecision(2) << "phi = " << m.intercept << " + (" << m.slopes[0] << ") l + (" << m.slopes[1] << ") n_o + (" << m.slopes[2] << ") n_nao + ("
        << m.slopes[3] << ") n_naoc\n";
    log.unsetf(std::ios::floatfield);
    return result;
}

// ---------------------------------------------------------------------------
// evolve

ExperimentConfig ExperimentConfig::desk_profile()
{
    ExperimentConfig c;
    c.pop_size = 500;
    c.generations = 50;
    c.n_runs = 10;
    return c;
}

void ExperimentConfig::validate() const
{
    if (dataset.empty()) {
        throw ConfigError("no dataset given");
    }
    if (n_runs == 0) {
        throw ConfigError("n_runs must be at least 1");
    }
    if (pop_size == 0 || pop_size % 2 != 0) {
        throw ConfigError("population size must be positive and even");
    }
    for (int t : taus) {
        if (t < 1 || t > 100) {
            throw ConfigError("tau must be in 1..100, got " + std::to_string(t));
        }
    }
}

Dataset resolve_dataset(const std::string& source)
{
    if (is_synthetic_name(source)) {
        Rng rng(kSyntheticDataSeed);
        return generate_synthetic(source, rng);
    }
    return load_csv(source);
}

namespace {

void write_trace_csv(const std::vector<GenerationStats>& trace, const fs::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << "generation,best_err,median_err,front0_size\n";
    for (const auto& g : trace) {
        out << g.generation << ',' << csv::format_double(g.best_err) << ',' << csv::format_double(g.median_err) << ',' << g.front0_size << '\n';
    }
}

json phi_json(const PhiCoefficients& c)
{
    return {{"intercept", c.intercept}, {"w_l", c.w_l}, {"w_no", c.w_no}, {"w_nao", c.w_nao}, {"w_naoc", c.w_naoc}};
}

} // namespace

std::vector<RunSummary> cmd_evolve(const ExperimentConfig& config, std::ostream& log, const EvolutionObserver* observer)
{
    config.validate();
    const Dataset data = resolve_dataset(config.dataset);
    if (data.rows() < kMinRows) {
        throw DataError("dataset '" + data.name + "' has " + std::to_string(data.rows()) + " rows; at least " + std::to_string(kMinRows) + " are needed");
    }
    ObjectiveContext objectives;
    objectives.mode = config.mode;
    if (!config.coeffs_path.empty()) {
        objectives.phi = load_phi_coefficients(config.coeffs_path);
    }

    const std::size_t budget = std::max<std::size_t>(1, config.workers);
    const std::size_t run_workers = std::min(budget, config.n_runs);
    const std::size_t eval_workers = std::max<std::size_t>(1, budget / run_workers);

    std::vector<RunSummary> runs(config.n_runs);
    parallel_for(config.n_runs, run_workers, [&](std::size_t r) {
        const std::uint64_t seed = config.base_seed + r;
        const SplitIndices idx = split(data.rows(), seed);
        const StandardizedDataset std_data = standardize(data, idx.train);
        const Dataset train = std_data.data.subset(idx.train);
        const Dataset val = std_data.data.subset(idx.val);
        const Dataset test = std_data.data.subset(idx.test);
        if (!(variance(train.y) > 0.0)) {
            throw DataError("run seed " + std::to_string(seed) + ": training target is constant");
        }

        EvolutionConfig ec;
        ec.pop_size = config.pop_size;
        ec.generations = config.generations;
        ec.objectives = objectives;
        ec.seed = seed;
        ec.workers = eval_workers;
        EvolutionResult evo = evolve(ec, train, observer);

        RunSummary& s = runs[r];
        s.seed = seed;
        s.front = validation_front(evo.population, {train, val, test}, objectives);
        s.front.source_run = seed;
        for (int tau : config.taus) s.selections.push_back({tau, select_tau(s.front, tau)});
        s.trace = std::move(evo.trace);

        s.dir = config.out_dir / data.name / std::string(to_string(config.mode)) / std::to_string(seed);
        fs::create_directories(s.dir);
        write_front_csv(s.front, (s.dir / "front.csv").string());
        write_trace_csv(s.trace, s.dir / "trace.csv");
        json cfg;
        cfg["dataset"] = data.name;
        cfg["mode"] = std::string(to_string(config.mode));
        cfg["pop_size"] = ec.pop_size;
        cfg["generations"] = ec.generations;
        cfg["crossover_prob"] = ec.crossover_prob;
        cfg["tournament_size"] = ec.tournament_size;
        cfg["init_depth"] = {ec.min_init_depth, ec.max_init_depth};
        cfg["max_tree_size"] = kMaxTreeSize;
        cfg["epsilon"] = objectives.eps.epsilon;
        cfg["seed"] = seed;
        cfg["base_seed"] = config.base_seed;
        cfg["run_index"] = r;
        cfg["split_sizes"] = {idx.train.size(), idx.val.size(), idx.test.size()};
        cfg["taus"] = config.taus;
        cfg["phi_coefficients"] = phi_json(objectives.phi);
        std::ofstream(s.dir / "config.json") << cfg.dump(2) << '\n';
    });

    for (const auto& s : runs) {
        log << "seed " << s.seed << ": |F|=" << s.front.members.size();
        for (const auto& sel : s.selections) {
            log << "  tau=" << sel.tau << " train=" << csv::format_double(sel.member.err_train) << " test=" << csv::format_double(sel.member.err_test);
        }
        log << "  -> " << s.dir.string() << '\n';
    }
    return runs;
}

// ---------------------------------------------------------------------------
// compare

namespace {

struct RunGroup {
    std::string mode;
    std::map<std::uint64_t, FrontRecord> fronts;
};

RunGroup read_group(const fs::path& dir)
{
    if (!fs::is_directory(dir)) {
        throw ConfigError("'" + dir.string() + "' is not a directory");
    }
    RunGroup g;
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory() && fs::exists(e.path() / "front.csv")) entries.push_back(e.path());
    }
    if (entries.empty()) {
        throw ConfigError("'" + dir.string() + "' contains no run directories");
    }
    for (const auto& p : entries) {
        const std::string name = p.filename().string();
        std::uint64_t seed = 0;
        auto res = std::from_chars(name.data(), name.data() + name.size(), seed);
        if (res.ec != std::errc{} || res.ptr != name.data() + name.size()) {
            throw ConfigError("run directory '" + p.string() + "' is not named by seed");
        }
        std::string mode = "phi";
        if (std::ifstream cfg(p / "config.json"); cfg) {
            mode = json::parse(cfg).value("mode", "phi");
        }
        if (g.mode.empty()) g.mode = mode;
        if (g.mode != mode) {
            throw ConfigError("'" + dir.string() + "' mixes modes " + g.mode + " and " + mode);
        }
        g.fronts.emplace(seed, read_front_csv((p / "front.csv").string(), parse_interp_mode(mode)));
    }
    return g;
}

GroupMedians medians_at(const std::vector<const FrontRecord*>& fronts, int tau, std::vector<double>& train, std::vector<double>& test)
{
    std::vector<double> phi;
    std::vector<double> l;
    std::vector<double> size;
    train.clear();
    test.clear();
    for (const FrontRecord* f : fronts) {
        const FrontMember& m = select_tau(*f, tau);
        train.push_back(m.err_train);
        test.push_back(m.err_test);
        phi.push_back(m.phi_objective);
        l.push_back(m.features.l);
        size.push_back(static_cast<double>(f->members.size()));
    }
    return {median(train), median(test), median(phi), median(l), median(size)};
}

} // namespace

CompareReport cmd_compare(const fs::path& dir_a, const fs::path& dir_b, const std::vector<int>& taus, double alpha)
{
    const RunGroup a = read_group(dir_a);
    const RunGroup b = read_group(dir_b);
    std::vector<std::uint64_t> seeds_a;
    std::vector<std::uint64_t> seeds_b;
    for (const auto& [s, _] : a.fronts) seeds_a.push_back(s);
    for (const auto& [s, _] : b.fronts) seeds_b.push_back(s);
    if (seeds_a != seeds_b) {
        throw ConfigError("run seeds of '" + dir_a.string() + "' and '" + dir_b.string() + "' do not pair up");
    }

    CompareReport report;
    report.dir_a = dir_a.string();
    report.dir_b = dir_b.string();
    report.mode_a = a.mode;
    report.mode_b = b.mode;
    report.seeds = seeds_a;

    std::vector<const FrontRecord*> fa;
    std::vector<const FrontRecord*> fb;
    for (auto s : seeds_a) {
        fa.push_back(&a.fronts.at(s));
        fb.push_back(&b.fronts.at(s));
    }
    std::vector<double> p_train;
    std::vector<double> p_test;
    for (int tau : taus) {
        TauComparison row;
        row.tau = tau;
        std::vector<double> tr_a, te_a, tr_b, te_b;
        row.a = medians_at(fa, tau, tr_a, te_a);
        row.b = medians_at(fb, tau, tr_b, te_b);
        row.p_train = wilcoxon_signed_rank(tr_a, tr_b);
        row.p_test = wilcoxon_signed_rank(te_a, te_b);
        p_train.push_back(row.p_train);
        p_test.push_back(row.p_test);
        report.rows.push_back(row);
    }
    const auto rej_train = holm_bonferroni(p_train, alpha);
    const auto rej_test = holm_bonferroni(p_test, alpha);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        report.rows[i].reject_train = rej_train[i];
        report.rows[i].reject_test = rej_test[i];
    }
    return report;
}

namespace {

json medians_json(const GroupMedians& m)
{
    return {{"train_nmse", m.train_nmse}, {"test_nmse", m.test_nmse}, {"phi", m.phi}, {"l", m.l}, {"front_size", m.front_size}};
}

// Which side is significantly lower, if any.
std::string winner(bool reject, double a, double b)
{
    if (!reject || a == b) return "none";
    return a < b ? "a" : "b";
}

} // namespace

std::string compare_report_json(const CompareReport& report)
{
    json j;
    j["a"] = {{"dir", report.dir_a}, {"mode", report.mode_a}};
    j["b"] = {{"dir", report.dir_b}, {"mode", report.mode_b}};
    j["seeds"] = report.seeds;
    j["rows"] = json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"tau", r.tau},
                             {"a", medians_json(r.a)},
                             {"b", medians_json(r.b)},
                             {"p_train", r.p_train},
                             {"p_test", r.p_test},
                             {"reject_train", r.reject_train},
                             {"reject_test", r.reject_test},
                             {"lower_train", winner(r.reject_train, r.a.train_nmse, r.b.train_nmse)},
                             {"lower_test", winner(r.reject_test, r.a.test_nmse, r.b.test_nmse)}});
    }
    return j.dump(2);
}

void print_compare_table(const CompareReport& report, std::ostream& out)
{
    out << "a = " << report.dir_a << " (" << report.mode_a << "), b = " << report.dir_b << " (" << report.mode_b << "), " << report.seeds.size() << " paired runs\n";
    out << std::setw(4) << "tau" << " |" << std::setw(8) << "trainA" << std::setw(8) << "testA" << std::setw(6) << "phiA" << std::setw(5) << "lA" << std::setw(5) << "|F|A"
        << " |" << std::setw(8) << "trainB" << std::setw(8) << "testB" << std::setw(6) << "phiB" << std::setw(5) << "lB" << std::setw(5) << "|F|B" << " |"
        << std::setw(8) << "p_train" << std::setw(8) << "p_test" << '\n';
    out << std::fixed;
    for (const auto& r : report.rows) {
        auto mark = [](bool reject, double self, double other) { return reject && self < other ? "*" : " "; };
        out << std::setw(4) << r.tau << " |" << std::setprecision(3) << std::setw(7) << r.a.train_nmse << mark(r.reject_train, r.a.train_nmse, r.b.train_nmse)
            << std::setw(7) << r.a.test_nmse << mark(r.reject_test, r.a.test_nmse, r.b.test_nmse) << std::setprecision(1) << std::setw(6) << r.a.phi
            << std::setprecision(0) << std::setw(5) << r.a.l << std::setw(5) << r.a.front_size << " |" << std::setprecision(3) << std::setw(7) << r.b.train_nmse
            << mark(r.reject_train, r.b.train_nmse, r.a.train_nmse) << std::setw(7) << r.b.test_nmse << mark(r.reject_test, r.b.test_nmse, r.a.test_nmse)
            << std::setprecision(1) << std::setw(6) << r.b.phi << std::setprecision(0) << std::setw(5) << r.b.l << std::setw(5) << r.b.front_size << " |"
            << std::setprecision(3) << std::setw(8) << r.p_train << std::setw(8) << r.p_test << '\n';
    }
    out.unsetf(std::ios::floatfield);
    out << "* significantly lower after Holm-Bonferroni correction\n";
}

// ---------------------------------------------------------------------------
// gen-data

void cmd_gen_data(const std::string& name, std::uint64_t seed, const fs::path& out)
{
    Rng rng(seed);
    const Dataset data = generate_synthetic(name, rng);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_csv(data, out.string());
}

} // namespace nsgp::cli
