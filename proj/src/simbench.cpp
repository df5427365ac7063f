#include "pdc/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

namespace pdc::sim {

namespace {

constexpr Index kFeatures = 4;

Rng stream(std::uint64_t seed, std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    return Rng(seq);
}

double dot_squares(const Beta& beta, const double* x, std::size_t from = 0) {
    double acc = 0.0;
    for (std::size_t j = from; j < beta.size(); ++j) acc += beta[j] * x[j] * x[j];
    return acc;
}

double dot_linear(const Beta& beta, const double* x, std::size_t from = 0) {
    double acc = 0.0;
    for (std::size_t j = from; j < beta.size(); ++j) acc += beta[j] * x[j];
    return acc;
}

// Applies `fn` to every row of x (copied into a contiguous buffer).
template <class Fn>
Vector map_rows(const Matrix& x, Fn fn) {
    if (x.cols() != kFeatures) {
        throw InvalidArgument("setting model expects 4 features");
    }
    Vector out(x.rows());
    std::array<double, kFeatures> row{};
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < kFeatures; ++j) row[static_cast<std::size_t>(j)] = x(i, j);
        out[i] = fn(row.data());
    }
    return out;
}

Matrix normal_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) x(i, j) = normal(rng);
    }
    return x;
}

LabeledDataset auxiliary_dataset(int which, const Beta& beta, Index size, Rng& rng) {
    Matrix x = normal_matrix(size, kFeatures, rng);
    Vector y(size);
    std::lognormal_distribution<double> lognormal(0.0, 1.0);
    std::student_t_distribution<double> student(3.0);
    for (Index i = 0; i < size; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < kFeatures; ++j) {
            const double v = x(i, j);
            const double b = beta[static_cast<std::size_t>(j)];
            acc += which == 1 ? b * v + b * v * v * v + b * std::exp(v) : b * v * v;
        }
        y[i] = acc + (which == 1 ? lognormal(rng) : student(rng));
    }
    return LabeledDataset(std::move(x), std::move(y));
}

MethodOutcome fit_method(const std::string& method, const std::vector<PdcProblem>& problems,
                         const std::optional<PdcProblem>& combined, const Population& pop,
                         const EstimatingFunction& spec, Scenario scenario, const Theta& sup, double alpha) {
    const OneStepOptions opts{sup};
    PdcConfig pdc_config;
    pdc_config.variance_at = sup;

    auto need = [&](std::size_t k) -> const PdcProblem& {
        if (problems.size() <= k) {
            throw InvalidArgument("method " + method + " needs predictive model " + std::to_string(k + 1));
        }
        return problems[k];
    };

    PdcFit fit = [&]() -> PdcFit {
        if (method == "supervised") {
            return supervised_one_step(pop.labeled, spec, sup, opts);
        }
        if (method == "pdc") {
            pdc_config.method_label = "pdc";
            return pdc_one_step(combined ? *combined : need(0), sup, pdc_config);
        }
        if (method == "pdc_1" || method == "pdc_2") {
            pdc_config.method_label = method;
            return pdc_one_step(need(method == "pdc_1" ? 0 : 1), sup, pdc_config);
        }
        if (method == "ppi") {
            return ppi_one_step(need(0), sup, opts);
        }
        if (method == "ppi_pp") {
            return ppi_pp_one_step(need(0), sup, opts);
        }
        if (method == "semi_supervised") {
            const BasisKind basis = scenario == Scenario::mean ? BasisKind::linear : BasisKind::quadratic;
            return semi_supervised_one_step(pop.labeled, pop.unlabeled, spec, basis, sup, opts);
        }
        throw InvalidArgument("unknown method: " + method);
    }();

    MethodOutcome out;
    out.method = method;
    Vector contrast = Vector::Zero(spec.dim);
    contrast[0] = 1.0;
    out.estimate = fit.theta_hat[0];
    out.ci = confidence_interval(fit, contrast, alpha);
    return out;
}

}  // namespace

double dgp_response(const Beta& beta, const double* x, double zeta) {
    double acc = 1.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        acc += beta[j] * x[j] + beta[j] * (x[j] * x[j] - 1.0);
    }
    return acc + zeta;
}

Population generate_population(const DgpSpec& dgp) {
    if (dgp.n < 2 || dgp.N < 0) {
        throw InvalidArgument("generate_population: need n >= 2 and N >= 0");
    }
    Rng rng = stream(dgp.seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(dgp.n, kFeatures);
    Vector y(dgp.n);
    std::array<double, kFeatures> row{};
    for (Index i = 0; i < dgp.n; ++i) {
        for (Index j = 0; j < kFeatures; ++j) {
            row[static_cast<std::size_t>(j)] = normal(rng);
            x(i, j) = row[static_cast<std::size_t>(j)];
        }
        y[i] = dgp_response(dgp.beta, row.data(), normal(rng));
    }
    Matrix xu = normal_matrix(dgp.N, kFeatures, rng);
    return Population{LabeledDataset(std::move(x), std::move(y)), UnlabeledDataset(std::move(xu))};
}

void SettingSpec::validate() const {
    if (id < 1 || id > 6) {
        throw InvalidArgument("setting must be in 1..6");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw InvalidArgument("epsilon must be finite and nonnegative");
    }
}

std::vector<PredictiveModel> setting_models(const SettingSpec& setting, const Beta& beta,
                                            const SettingModelOptions& options) {
    setting.validate();
    std::vector<PredictiveModel> out;
    switch (setting.id) {
        case 1:
        case 2:
        case 3: {
            const double eps = setting.id == 1 ? setting.epsilon : 0.5;
            PredictiveModel model;
            model.deterministic = eps == 0.0;
            model.predict = [beta, eps](const Matrix& x, Rng& noise) {
                std::normal_distribution<double> normal(0.0, 1.0);
                return map_rows(x, [&](const double* row) {
                    const double scale = eps == 0.0 ? 1.0 : 1.0 + eps * normal(noise);
                    return scale * dot_squares(beta, row);
                });
            };
            out.push_back(std::move(model));
            break;
        }
        case 4: {
            PredictiveModel model;
            model.predict = [beta](const Matrix& x, Rng&) {
                return map_rows(x, [&](const double* row) {
                    return dot_linear(beta, row, 1) + dot_squares(beta, row, 1);
                });
            };
            out.push_back(std::move(model));
            break;
        }
        case 5: {
            PredictiveModel model;
            model.predict = [beta](const Matrix& x, Rng&) {
                return map_rows(x, [&](const double* row) { return dot_squares(beta, row); });
            };
            out.push_back(std::move(model));
            break;
        }
        case 6: {
            Rng rng = stream(options.seed, 6);
            for (int which = 1; which <= 2; ++which) {
                const LabeledDataset aux = auxiliary_dataset(which, beta, options.aux_size, rng);
                ForestParams params = options.forest;
                params.seed = options.seed * 31 + static_cast<std::uint64_t>(which);
                out.push_back(forest_train(aux, params));
            }
            break;
        }
        default:
            break;
    }
    return out;
}

TruthEstimate linear_truth_oracle(const Beta& beta, Index draws, std::uint64_t seed) {
    if (draws < 10) {
        throw InvalidArgument("linear_truth_oracle: too few draws");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Matrix4d gram = Eigen::Matrix4d::Zero();
    Eigen::Vector4d cross = Eigen::Vector4d::Zero();
    auto pass = [&](auto&& visit) {
        Rng rng = stream(seed, 7);
        Eigen::Vector4d x;
        for (Index i = 0; i < draws; ++i) {
            for (int j = 0; j < 4; ++j) x[j] = normal(rng);
            const double y = dgp_response(beta, x.data(), normal(rng));
            visit(x, y);
        }
    };
    pass([&](const Eigen::Vector4d& x, double y) {
        gram.noalias() += x * x.transpose();
        cross.noalias() += y * x;
    });
    const Eigen::Vector4d theta = gram.ldlt().solve(cross);
    Eigen::Matrix4d meat = Eigen::Matrix4d::Zero();
    pass([&](const Eigen::Vector4d& x, double y) {
        const double r = y - x.dot(theta);
        meat.noalias() += (r * r) * (x * x.transpose());
    });
    const Eigen::Matrix4d bread = gram.inverse();
    const Eigen::Matrix4d cov = bread * meat * bread;
    return TruthEstimate{theta, cov.diagonal().cwiseSqrt()};
}

double scenario_truth(Scenario scenario, const Beta& beta) {
    if (scenario == Scenario::mean) {
        return 1.0;
    }
    static std::mutex mutex;
    static std::map<Beta, double> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(beta);
    if (it == cache.end()) {
        it = cache.emplace(beta, linear_truth_oracle(beta).theta[0]).first;
    }
    return it->second;
}

std::vector<std::string> default_methods(const SettingSpec& setting) {
    switch (setting.id) {
        case 1:
        case 2:
        case 3:
            return {"supervised", "pdc", "ppi", "semi_supervised"};
        case 4:
        case 5:
            return {"supervised", "pdc", "ppi_pp", "ppi", "semi_supervised"};
        default:
            return {"supervised", "pdc_1", "pdc_2", "pdc", "semi_supervised"};
    }
}

std::vector<MethodOutcome> run_replication(const SettingSpec& setting, const DgpSpec& dgp,
                                           std::span<const PredictiveModel> models,
                                           std::span<const std::string> methods, double truth, double alpha) {
    setting.validate();
    const Population pop = generate_population(dgp);
    const Scenario scenario = setting.scenario();
    const EstimatingFunction spec = scenario == Scenario::mean ? mean_spec() : linear_spec(kFeatures);

    std::vector<MethodOutcome> out;
    out.reserve(methods.size());
    std::optional<Theta> sup;
    std::vector<PdcProblem> problems;
    std::optional<PdcProblem> combined;
    std::string setup_error;
    try {
        sup = supervised_fit(pop.labeled, spec);
        Rng noise = stream(dgp.seed, 1);
        std::vector<PredictiveScore> scores;
        for (const auto& model : models) {
            scores.push_back(score_from_model(spec, model));
            problems.push_back(PdcProblem::bind(pop.labeled, pop.unlabeled, spec, scores.back(), noise));
        }
        if (problems.size() == 2) {
            const PredictiveScore both = concat_scores(scores[0], scores[1]);
            Matrix lab(pop.labeled.size(), 2);
            lab << problems[0].f_labeled().predictions(), problems[1].f_labeled().predictions();
            Matrix unlab(pop.unlabeled.size(), 2);
            unlab << problems[0].f_unlabeled().predictions(), problems[1].f_unlabeled().predictions();
            combined.emplace(pop.labeled, spec, BoundScore(both, pop.labeled.x(), std::move(lab)),
                             BoundScore(both, pop.unlabeled.x(), std::move(unlab)));
        }
    } catch (const std::exception& e) {
        setup_error = e.what();
    }

    for (const auto& method : methods) {
        MethodOutcome outcome;
        outcome.method = method;
        if (!setup_error.empty()) {
            outcome.failed = true;
            outcome.error = setup_error;
            out.push_back(std::move(outcome));
            continue;
        }
        try {
            outcome = fit_method(method, problems, combined, pop, spec, scenario, *sup, alpha);
            outcome.covered = outcome.ci.contains(truth);
        } catch (const std::exception& e) {
            outcome.failed = true;
            outcome.error = e.what();
        }
        out.push_back(std::move(outcome));
    }
    return out;
}

const MethodSummary& SimReport::row(const std::string& method) const {
    for (const auto& r : rows) {
        if (r.method == method) return r;
    }
    throw InvalidArgument("report has no row for method " + method);
}

SimReport monte_carlo(const SimConfig& config) {
    config.setting.validate();
    if (config.reps < 1) {
        throw InvalidArgument("monte_carlo: reps must be at least 1");
    }
    std::vector<std::string> methods = config.methods.empty() ? default_methods(config.setting) : config.methods;
    if (std::find(methods.begin(), methods.end(), "supervised") == methods.end()) {
        methods.insert(methods.begin(), "supervised");
    }
    const auto sup_index = static_cast<std::size_t>(
        std::find(methods.begin(), methods.end(), "supervised") - methods.begin());

    SettingModelOptions model_options;
    model_options.seed = config.seed ^ 0x5e771a6ULL;
    model_options.aux_size = config.aux_size;
    model_options.forest = config.forest;
    const std::vector<PredictiveModel> models = setting_models(config.setting, config.beta, model_options);
    const double truth = scenario_truth(config.setting.scenario(), config.beta);

    std::vector<std::vector<MethodOutcome>> outcomes(static_cast<std::size_t>(config.reps));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < config.reps; i = next.fetch_add(1)) {
            DgpSpec dgp{config.beta, config.n, config.N, config.seed + static_cast<std::uint64_t>(i)};
            outcomes[static_cast<std::size_t>(i)] =
                run_replication(config.setting, dgp, models, methods, truth, config.alpha);
        }
    };
    const int threads = std::max(1, std::min(config.threads, config.reps));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SimReport report;
    report.config = config;
    report.config.methods = methods;
    report.truth = truth;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        MethodSummary summary;
        summary.method = methods[m];
        int covered = 0;
        int ratio_count = 0;
        double ratio_sum = 0.0;
        for (const auto& rep : outcomes) {
            const MethodOutcome& o = rep[m];
            if (o.failed) {
                ++summary.failures;
                continue;
            }
            ++summary.reps;
            covered += o.covered ? 1 : 0;
            const MethodOutcome& base = rep[sup_index];
            if (!base.failed && base.ci.width() > 0.0) {
                ratio_sum += o.ci.width() / base.ci.width();
                ++ratio_count;
            }
        }
        summary.coverage = summary.reps > 0 ? static_cast<double>(covered) / summary.reps : std::nan("");
        summary.mean_wr = ratio_count > 0 ? ratio_sum / ratio_count : std::nan("");
        report.rows.push_back(std::move(summary));
    }
    return report;
}

GridSpec parse_grid(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw InvalidArgument("grid must look like name=a,b,c or name=start:stop:step");
    }
    GridSpec grid;
    grid.param = text.substr(0, eq);
    if (grid.param != "eps" && grid.param != "n" && grid.param != "N" && grid.param != "beta1") {
        throw InvalidArgument("grid parameter must be one of eps, n, N, beta1");
    }
    const std::string body = text.substr(eq + 1);
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) {
            throw InvalidArgument("grid: not a number: '" + s + "'");
        }
        return v;
    };
    if (body.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(number(item));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
            throw InvalidArgument("grid range must be start:stop:step with step > 0");
        }
        for (int i = 0;; ++i) {
            const double v = parts[0] + i * parts[2];
            if (v > parts[1] + 1e-9 * parts[2]) break;
            grid.values.push_back(v);
        }
    } else {
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) grid.values.push_back(number(item));
    }
    if (grid.values.empty()) {
        throw InvalidArgument("grid has no values");
    }
    return grid;
}

GridSpec default_grid(int setting) {
    switch (setting) {
        case 1:
            return parse_grid("eps=0:2:0.2");
        case 2:
            return parse_grid("n=500:5500:500");
        case 3:
            return parse_grid("N=2000:22000:2000");
        default:
            return parse_grid("beta1=0:10:1");
    }
}

SimConfig apply_grid_value(const SimConfig& base, const std::string& param, double value) {
    SimConfig cfg = base;
    if (param == "eps") {
        cfg.setting.epsilon = value;
    } else if (param == "n") {
        cfg.n = static_cast<Index>(std::llround(value));
    } else if (param == "N") {
        cfg.N = static_cast<Index>(std::llround(value));
    } else if (param == "beta1") {
        cfg.beta[0] = value;
    } else {
        throw InvalidArgument("unknown grid parameter " + param);
    }
    return cfg;
}

std::vector<GridCell> run_grid(const SimConfig& base, const GridSpec& grid) {
    std::vector<GridCell> cells;
    for (double v : grid.values) {
        cells.push_back(GridCell{grid.param, v, monte_carlo(apply_grid_value(base, grid.param, v))});
    }
    return cells;
}

void write_sim_csv(std::ostream& out, const std::vector<GridCell>& cells,
                   const std::map<std::string, std::string>& echo) {
    for (const auto& [key, value] : echo) {
        out << "# " << key << '=' << value << '\n';
    }
    out << "setting,param_name,param_value,method,coverage,mean_wr,reps,seed\n";
    std::ostringstream line;
    line << std::setprecision(10);
    for (const auto& cell : cells) {
        for (const auto& row : cell.report.rows) {
            line.str("");
            line << cell.report.config.setting.id << ',' << cell.param << ',' << cell.value << ',' << row.method
                 << ',' << row.coverage << ',' << row.mean_wr << ',' << row.reps << ',' << cell.report.config.seed
                 << '\n';
            out << line.str();
        }
    }
}

}  // namespace pdc::sim
