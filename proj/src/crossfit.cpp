#include "pdc/crossfit.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace pdc {

namespace {

std::vector<int> balanced_assignment(Index count, int k, Rng& rng) {
    std::vector<Index> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> out(static_cast<std::size_t>(count));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        out[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return out;
}

std::vector<Index> members(const std::vector<int>& assignment, int j, bool inside) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if ((assignment[i] == j) == inside) out.push_back(static_cast<Index>(i));
    }
    return out;
}

}  // namespace

std::vector<Index> FoldPlan::labeled_fold(int j) const {
    return members(labeled_assignment, j, true);
}

std::vector<Index> FoldPlan::labeled_complement(int j) const {
    return members(labeled_assignment, j, false);
}

std::vector<Index> FoldPlan::unlabeled_fold(int j) const {
    return members(unlabeled_assignment, j, true);
}

FoldPlan split_folds(Index n, Index N, int k, std::uint64_t seed) {
    if (k < 2) {
        throw InvalidArgument("split_folds: need at least 2 folds");
    }
    if (n < 2 * static_cast<Index>(k)) {
        throw InsufficientData("split_folds: need n >= 2K labeled rows");
    }
    if (N < 0) {
        throw InvalidArgument("split_folds: negative unlabeled count");
    }
    Rng rng(seed);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.labeled_assignment = balanced_assignment(n, k, rng);
    plan.unlabeled_assignment = balanced_assignment(N, k, rng);
    return plan;
}

Trainer fixed_trainer(PredictiveModel model, Theta init) {
    return [model = std::move(model), init = std::move(init)](const LabeledDataset&) {
        return FoldModel{model, init};
    };
}

Trainer forest_trainer(EstimatingFunction spec, ForestParams params) {
    return [spec = std::move(spec), params](const LabeledDataset& training) {
        return FoldModel{forest_train(training, params), supervised_fit(training, spec)};
    };
}

CrossfitFit crossfit_pdc(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                         const EstimatingFunction& spec, const Trainer& trainer, const CrossfitConfig& config) {
    ScoreTrainer wrapped = [&](const LabeledDataset& training) {
        FoldModel fm = trainer(training);
        return FoldScore{score_from_model(spec, std::move(fm.model)), std::move(fm.init)};
    };
    return crossfit_pdc_scores(labeled, unlabeled, spec, wrapped, config);
}

CrossfitFit crossfit_pdc_scores(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                                const EstimatingFunction& spec, const ScoreTrainer& trainer,
                                const CrossfitConfig& config) {
    const Index n = labeled.size();
    const Index N = unlabeled.size();
    const double gamma = config.gamma ? *config.gamma : gamma_default(n, N);
    FoldPlan plan = config.plan ? *config.plan : split_folds(n, N, config.k, config.seed);
    if (plan.labeled_assignment.size() != static_cast<std::size_t>(n) ||
        plan.unlabeled_assignment.size() != static_cast<std::size_t>(N)) {
        throw InvalidArgument("crossfit_pdc: fold plan does not match the data");
    }
    if (gamma != 0.0 && N < plan.k) {
        throw InsufficientData("crossfit_pdc: every fold needs unlabeled rows when gamma != 0");
    }

    const Theta theta_sup = supervised_fit(labeled, spec);
    const Matrix h = estimate_H(labeled, spec, theta_sup);

    Rng noise(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<PdcProblem> problems;
    std::vector<FoldResult> folds;
    problems.reserve(static_cast<std::size_t>(plan.k));
    Vector total = Vector::Zero(spec.dim);

    for (int j = 0; j < plan.k; ++j) {
        const std::vector<Index> train_rows = plan.labeled_complement(j);
        const std::vector<Index> lab_rows = plan.labeled_fold(j);
        const std::vector<Index> unlab_rows = plan.unlabeled_fold(j);
        try {
            FoldScore trained = trainer(labeled.subset(train_rows));
            problems.push_back(PdcProblem::bind(labeled.subset(lab_rows), unlabeled.subset(unlab_rows), spec,
                                                trained.score, noise));
            Vector score = s_hat(problems.back(), trained.init, gamma);
            Vector estimate = trained.init.values() - solve_general(h, score).col(0);
            total += estimate;
            folds.push_back(FoldResult{std::move(trained.init), std::move(score), std::move(estimate)});
        } catch (const SingularCovariance& e) {
            throw SingularCovariance("fold " + std::to_string(j) + ": " + e.what());
        }
    }
    Theta aggregate(total / static_cast<double>(plan.k));

    // Pooled plug-in variance: each labeled row scored with its own fold's f.
    const Matrix s = spec.rows(labeled.y(), labeled.x(), aggregate.values());
    Matrix f(n, problems.front().dim_q());
    for (int j = 0; j < plan.k; ++j) {
        const Matrix fold_f = problems[static_cast<std::size_t>(j)].f_labeled().rows(aggregate);
        const std::vector<Index> lab_rows = plan.labeled_fold(j);
        for (std::size_t i = 0; i < lab_rows.size(); ++i) {
            f.row(lab_rows[i]) = fold_f.row(static_cast<Index>(i));
        }
    }
    Matrix gamma_hat = sample_cov(s);
    if (gamma != 0.0) {
        const double eta = static_cast<double>(N) / static_cast<double>(n + N);
        const double coefficient = gamma * (gamma / eta + 2.0);
        if (coefficient != 0.0) {
            require_variation(f, "f");
            const Matrix c_sf = sample_cov(s, f);
            const Matrix p = c_sf * solve_spd(sample_cov(f), c_sf.transpose());
            gamma_hat += coefficient * 0.5 * (p + p.transpose());
        }
    }

    PdcFit fit{std::move(aggregate), gamma, asymptotic_cov(h, gamma_hat), n, N, config.method_label};
    return CrossfitFit{std::move(fit), std::move(plan), std::move(folds)};
}

}  // namespace pdc
