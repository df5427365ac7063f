#include "pdc/forest.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>

namespace pdc {

namespace {

struct TrainingSample {
    std::vector<double> y;
    // bins[j][i]: bin of sample i on feature j; x <= thresholds[j][k] iff bin <= k.
    std::vector<std::vector<std::uint8_t>> bins;
    std::vector<std::vector<double>> thresholds;
};

std::vector<double> candidate_thresholds(std::vector<double> values, int max_thresholds) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    std::vector<double> out;
    for (int k = 1; k <= max_thresholds; ++k) {
        const std::size_t pos = static_cast<std::size_t>(
            (static_cast<double>(k) * static_cast<double>(m)) / static_cast<double>(max_thresholds + 1) + 0.5);
        if (pos == 0 || pos >= m) {
            continue;
        }
        if (values[pos - 1] < values[pos]) {
            out.push_back(0.5 * (values[pos - 1] + values[pos]));
        }
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

class TreeBuilder {
public:
    TreeBuilder(const TrainingSample& sample, const ForestParams& params) : sample_(sample), params_(params) {}

    RegressionForest::Tree build() {
        std::vector<std::size_t> rows(sample_.y.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        grow(rows, 0, rows.size(), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, int depth) {
        const int id = static_cast<int>(tree_.size());
        tree_.emplace_back();

        const std::size_t count = end - begin;
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) sum += sample_.y[rows[i]];
        tree_[id].value = sum / static_cast<double>(count);

        const auto min_leaf = static_cast<std::size_t>(std::max<Index>(1, params_.min_leaf));
        if (depth >= params_.max_depth || count < 2 * min_leaf) {
            return id;
        }

        const double parent = sum * sum / static_cast<double>(count);
        double best_gain = 1e-12 * std::max(1.0, std::abs(parent));
        int best_feature = -1;
        std::size_t best_bin = 0;

        for (std::size_t j = 0; j < sample_.bins.size(); ++j) {
            const auto& thr = sample_.thresholds[j];
            if (thr.empty()) continue;
            const std::size_t n_bins = thr.size() + 1;
            hist_count_.assign(n_bins, 0);
            hist_sum_.assign(n_bins, 0.0);
            const auto& bins = sample_.bins[j];
            for (std::size_t i = begin; i < end; ++i) {
                const std::size_t r = rows[i];
                ++hist_count_[bins[r]];
                hist_sum_[bins[r]] += sample_.y[r];
            }
            std::size_t left_count = 0;
            double left_sum = 0.0;
            for (std::size_t k = 0; k + 1 < n_bins; ++k) {
                left_count += hist_count_[k];
                left_sum += hist_sum_[k];
                const std::size_t right_count = count - left_count;
                if (left_count < min_leaf) continue;
                if (right_count < min_leaf) break;
                const double right_sum = sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                                    right_sum * right_sum / static_cast<double>(right_count) - parent;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(j);
                    best_bin = k;
                }
            }
        }
        if (best_feature < 0) {
            return id;
        }

        const auto& bins = sample_.bins[static_cast<std::size_t>(best_feature)];
        const auto mid = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                               rows.begin() + static_cast<std::ptrdiff_t>(end),
                                               [&](std::size_t r) { return bins[r] <= best_bin; });
        const auto split = static_cast<std::size_t>(mid - rows.begin());

        tree_[id].feature = best_feature;
        tree_[id].threshold = sample_.thresholds[static_cast<std::size_t>(best_feature)][best_bin];
        const int left = grow(rows, begin, split, depth + 1);
        const int right = grow(rows, split, end, depth + 1);
        tree_[id].left = left;
        tree_[id].right = right;
        return id;
    }

    const TrainingSample& sample_;
    const ForestParams& params_;
    RegressionForest::Tree tree_;
    std::vector<std::size_t> hist_count_;
    std::vector<double> hist_sum_;
};

RegressionForest::Tree fit_tree(const LabeledDataset& data, const ForestParams& params, std::uint64_t tree_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(tree_index)};
    Rng rng(seq);
    const auto n = static_cast<std::size_t>(data.size());

    std::vector<std::size_t> picks(n);
    if (params.bootstrap) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (auto& p : picks) p = pick(rng);
    } else {
        for (std::size_t i = 0; i < n; ++i) picks[i] = i;
    }

    TrainingSample sample;
    sample.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) sample.y[i] = data.y()[static_cast<Index>(picks[i])];

    const auto p = static_cast<std::size_t>(data.dim());
    sample.bins.assign(p, std::vector<std::uint8_t>(n, 0));
    sample.thresholds.resize(p);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = data.x()(static_cast<Index>(picks[i]), static_cast<Index>(j));
        }
        sample.thresholds[j] = candidate_thresholds(column, params.max_thresholds);
        const auto& thr = sample.thresholds[j];
        for (std::size_t i = 0; i < n; ++i) {
            sample.bins[j][i] =
                static_cast<std::uint8_t>(std::lower_bound(thr.begin(), thr.end(), column[i]) - thr.begin());
        }
    }
    return TreeBuilder(sample, params).build();
}

}  // namespace

RegressionForest::RegressionForest(std::vector<Tree> trees, Index n_features)
    : trees_(std::move(trees)), n_features_(n_features) {
    if (trees_.empty()) {
        throw InvalidArgument("forest needs at least one tree");
    }
}

double RegressionForest::predict(const double* x) const {
    double total = 0.0;
    for (const auto& tree : trees_) {
        int node = 0;
        while (tree[static_cast<std::size_t>(node)].feature >= 0) {
            const Node& nd = tree[static_cast<std::size_t>(node)];
            node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        total += tree[static_cast<std::size_t>(node)].value;
    }
    return total / static_cast<double>(trees_.size());
}

Vector RegressionForest::predict(const Matrix& x) const {
    if (x.cols() != n_features_) {
        throw InvalidArgument("forest: feature count mismatch");
    }
    Vector out(x.rows());
    std::vector<double> row(static_cast<std::size_t>(n_features_));
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < n_features_; ++j) row[static_cast<std::size_t>(j)] = x(i, j);
        out[i] = predict(row.data());
    }
    return out;
}

RegressionForest forest_fit(const LabeledDataset& data, const ForestParams& params) {
    if (params.n_trees < 1 || params.max_depth < 0 || params.max_thresholds < 1 || params.max_thresholds > 254) {
        throw InvalidArgument("forest_fit: invalid parameters");
    }
    std::vector<RegressionForest::Tree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        trees.push_back(fit_tree(data, params, static_cast<std::uint64_t>(t)));
    }
    return RegressionForest(std::move(trees), data.dim());
}

PredictiveModel forest_train(const LabeledDataset& data, const ForestParams& params) {
    auto forest = std::make_shared<const RegressionForest>(forest_fit(data, params));
    PredictiveModel model;
    model.deterministic = true;
    model.predict = [forest](const Matrix& x, Rng&) -> Vector { return forest->predict(x); };
    return model;
}

}  // namespace pdc
