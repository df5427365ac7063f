#pragma once

#include "pdc/core.hpp"
#include "pdc/estimating.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace pdc {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 10;
    Index min_leaf = 5;
    /// Candidate split thresholds per feature, taken at quantiles of the
    /// tree's training sample (midpoints between neighbouring values).
    int max_thresholds = 32;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Bagged axis-aligned regression trees, split by variance reduction.
class RegressionForest {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<Node>;

    RegressionForest(std::vector<Tree> trees, Index n_features);

    double predict(const double* x) const;
    Vector predict(const Matrix& x) const;

    std::size_t size() const { return trees_.size(); }
    Index n_features() const { return n_features_; }

private:
    std::vector<Tree> trees_;
    Index n_features_;
};

RegressionForest forest_fit(const LabeledDataset& data, const ForestParams& params = {});

/// forest_fit wrapped as a deterministic predictive model.
PredictiveModel forest_train(const LabeledDataset& data, const ForestParams& params = {});

}  // namespace pdc
