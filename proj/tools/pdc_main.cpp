#include "pdc/analyze.hpp"
#include "pdc/identities.hpp"
#include "pdc/simbench.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

std::string to_text(double v) {
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

struct SimulateArgs {
    std::string scenario;
    int setting = 1;
    int reps = 1000;
    long n = 1000;
    long N = 5000;
    double alpha = 0.1;
    std::uint64_t seed = 1;
    double eps = 0.0;
    double beta1 = 9.0;
    std::string grid;
    int threads = 1;
    std::string out;
};

struct AnalyzeArgs {
    std::string labeled;
    std::string unlabeled;
    std::string response;
    std::string pred;
    std::string target = "linear";
    double alpha = 0.1;
    std::string out;
    bool add_intercept = false;
};

std::string natural_param(int setting) {
    switch (setting) {
        case 1:
            return "eps";
        case 2:
            return "n";
        case 3:
            return "N";
        default:
            return "beta1";
    }
}

int run_simulate(const SimulateArgs& a) {
    using namespace pdc::sim;
    SimConfig cfg;
    cfg.setting.id = a.setting;
    cfg.setting.epsilon = a.eps;
    cfg.setting.validate();
    if (!a.scenario.empty()) {
        const std::string expected = cfg.setting.scenario() == Scenario::mean ? "mean" : "linear";
        if (a.scenario != expected) {
            throw pdc::InvalidArgument("setting " + std::to_string(a.setting) + " belongs to the " + expected +
                                       " scenario");
        }
    }
    cfg.beta[0] = a.beta1;
    cfg.n = a.n;
    cfg.N = a.N;
    cfg.reps = a.reps;
    cfg.alpha = a.alpha;
    cfg.seed = a.seed;
    cfg.threads = a.threads;

    GridSpec grid;
    if (a.grid.empty()) {
        grid.param = natural_param(a.setting);
        grid.values = {grid.param == "eps" ? a.eps : grid.param == "n" ? static_cast<double>(a.n)
                                                : grid.param == "N"    ? static_cast<double>(a.N)
                                                                       : a.beta1};
    } else if (a.grid == "default") {
        grid = default_grid(a.setting);
    } else {
        grid = parse_grid(a.grid);
    }

    const std::vector<GridCell> cells = run_grid(cfg, grid);
    const std::map<std::string, std::string> echo = {
        {"command", "simulate"},
        {"setting", std::to_string(a.setting)},
        {"scenario", cfg.setting.scenario() == Scenario::mean ? "mean" : "linear"},
        {"reps", std::to_string(a.reps)},
        {"n", std::to_string(a.n)},
        {"N", std::to_string(a.N)},
        {"alpha", to_text(a.alpha)},
        {"seed", std::to_string(a.seed)},
        {"eps", to_text(a.eps)},
        {"beta1", to_text(a.beta1)},
        {"grid", a.grid.empty() ? "none" : a.grid},
    };
    if (a.out.empty()) {
        write_sim_csv(std::cout, cells, echo);
        return 0;
    }
    std::ofstream out(a.out);
    if (!out) {
        throw pdc::InvalidArgument("cannot write " + a.out);
    }
    write_sim_csv(out, cells, echo);
    for (const auto& cell : cells) {
        std::cout << cell.param << " = " << to_text(cell.value) << "  (truth " << to_text(cell.report.truth) << ")\n";
        for (const auto& row : cell.report.rows) {
            std::cout << "  " << std::left << std::setw(16) << row.method << std::right << " coverage "
                      << std::fixed << std::setprecision(3) << row.coverage << "  WR " << row.mean_wr
                      << std::defaultfloat;
            if (row.failures > 0) std::cout << "  failures " << row.failures;
            std::cout << '\n';
        }
    }
    return 0;
}

int run_analyze(const AnalyzeArgs& a) {
    pdc::AnalyzeConfig cfg;
    cfg.response = a.response;
    std::stringstream ss(a.pred);
    for (std::string col; std::getline(ss, col, ',');) {
        if (!col.empty()) cfg.predictions.push_back(col);
    }
    cfg.target = pdc::parse_target(a.target);
    cfg.alpha = a.alpha;
    cfg.add_intercept = a.add_intercept;

    const pdc::CsvTable labeled = pdc::read_csv_file(a.labeled);
    const pdc::CsvTable unlabeled = pdc::read_csv_file(a.unlabeled);
    const pdc::AnalyzeResult result = pdc::analyze_tables(labeled, unlabeled, cfg);
    pdc::print_analyze_table(std::cout, result);
    for (const auto& row : result.rows) {
        if (!row.error.empty()) std::cerr << row.method << " failed: " << row.error << '\n';
    }
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) {
            throw pdc::InvalidArgument("cannot write " + a.out);
        }
        pdc::write_analyze_csv(out, result,
                               {{"command", "analyze"},
                                {"labeled", a.labeled},
                                {"unlabeled", a.unlabeled},
                                {"response", a.response},
                                {"pred", a.pred},
                                {"target", a.target},
                                {"alpha", to_text(a.alpha)},
                                {"add_intercept", a.add_intercept ? "true" : "false"}});
    }
    return 0;
}

int run_selftest() {
    int failed = 0;
    for (const auto& check : pdc::run_identity_suite()) {
        std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << '\n';
        failed += check.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prediction de-correlated inference"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage and width-ratio study");
    simulate->add_option("--scenario", sim.scenario, "mean or linear (checked against --setting)")
        ->check(CLI::IsMember({"mean", "linear"}));
    simulate->add_option("--setting", sim.setting, "predictive-model setting")->check(CLI::Range(1, 6));
    simulate->add_option("--reps", sim.reps, "replications per grid cell")->check(CLI::PositiveNumber);
    simulate->add_option("--n", sim.n, "labeled sample size");
    simulate->add_option("--N", sim.N, "unlabeled sample size");
    simulate->add_option("--alpha", sim.alpha, "1 - confidence level");
    simulate->add_option("--seed", sim.seed, "base seed; replication i uses seed + i");
    simulate->add_option("--eps", sim.eps, "noise scale for Setting 1");
    simulate->add_option("--beta1", sim.beta1, "first coefficient of beta");
    simulate->add_option("--grid", sim.grid, "name=a,b,c | name=start:stop:step | default");
    simulate->add_option("--threads", sim.threads, "worker threads")->check(CLI::PositiveNumber);
    simulate->add_option("--out", sim.out, "output CSV (stdout when omitted)");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Fit all methods to a labeled/unlabeled CSV pair");
    analyze->add_option("--labeled", an.labeled, "labeled CSV")->required();
    analyze->add_option("--unlabeled", an.unlabeled, "unlabeled CSV")->required();
    analyze->add_option("--response", an.response, "response column")->required();
    analyze->add_option("--pred", an.pred, "prediction column(s): COL or COL1,COL2")->required();
    analyze->add_option("--target", an.target, "mean, linear or logistic")
        ->check(CLI::IsMember({"mean", "linear", "logistic"}));
    analyze->add_option("--alpha", an.alpha, "1 - confidence level");
    analyze->add_option("--out", an.out, "output CSV");
    analyze->add_flag("--add-intercept", an.add_intercept, "prepend an Intercept column");

    app.add_subcommand("selftest", "Run the exact-identity suite");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*simulate) return run_simulate(sim);
        if (*analyze) return run_analyze(an);
        return run_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
