#pragma once

#include "pdc/decorrelated.hpp"
#include "pdc/forest.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdc {

/// Random balanced assignment of labeled and unlabeled rows to K folds.
/// Fold sizes differ by at most one.
struct FoldPlan {
    int k = 0;
    std::vector<int> labeled_assignment;
    std::vector<int> unlabeled_assignment;
    std::uint64_t seed = 0;

    std::vector<Index> labeled_fold(int j) const;
    std::vector<Index> labeled_complement(int j) const;
    std::vector<Index> unlabeled_fold(int j) const;
};

FoldPlan split_folds(Index n, Index N, int k, std::uint64_t seed);

/// What a trainer hands back for one fold: the out-of-fold model and an
/// initial estimate, both fitted on the labeled rows outside that fold.
struct FoldModel {
    PredictiveModel model;
    Theta init;
};
using Trainer = std::function<FoldModel(const LabeledDataset& training)>;

/// Variant for trainers that produce the predictive score directly.
struct FoldScore {
    PredictiveScore score;
    Theta init;
};
using ScoreTrainer = std::function<FoldScore(const LabeledDataset& training)>;

/// Ignores the training rows; always returns `model` and `init`.
Trainer fixed_trainer(PredictiveModel model, Theta init);

/// Forest fitted to (x, y) of the training rows; init is the supervised fit
/// on the same rows.
Trainer forest_trainer(EstimatingFunction spec, ForestParams params = {});

struct CrossfitConfig {
    int k = 5;
    /// Empty means -N/(n+N).
    std::optional<double> gamma;
    std::uint64_t seed = 0;
    /// Use this assignment instead of split_folds(n, N, k, seed).
    std::optional<FoldPlan> plan;
    std::string method_label = "crossfit_pdc";
};

struct FoldResult {
    Theta init;
    Vector s_hat;
    Vector estimate;
};

struct CrossfitFit {
    PdcFit fit;
    FoldPlan plan;
    std::vector<FoldResult> folds;
};

/// K-fold cross-fitted PDC estimator: the average over folds of
/// theta^(-j) - H^{-1} S^(j), where S^(j) is the PDC score on fold j's
/// labeled and unlabeled rows with the model trained off fold j. H is
/// estimated once on all labeled rows at the full supervised fit; v_hat uses
/// the pooled out-of-fold scores at the aggregate estimate.
CrossfitFit crossfit_pdc(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                         const EstimatingFunction& spec, const Trainer& trainer, const CrossfitConfig& config = {});

CrossfitFit crossfit_pdc_scores(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                                const EstimatingFunction& spec, const ScoreTrainer& trainer,
                                const CrossfitConfig& config = {});

}  // namespace pdc
