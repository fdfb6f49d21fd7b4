#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ctxsense/common.hpp"

namespace ctxsense {

// CART-style binary classification tree: greedy Gini splits, thresholds at
// midpoints of sorted unique feature values, leaves store class frequencies.
// Training is deterministic for a fixed dataset ordering; impurity ties keep
// the first (lowest feature index, lowest threshold) candidate.

struct TreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::vector<double> distribution;  // leaves only; sums to 1
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes;  // node 0 is the root
    std::size_t num_classes = 0;
    std::size_t num_features = 0;
};

struct TreeOptions {
    std::size_t max_depth = 12;
    std::size_t min_leaf = 1;
};

namespace detail {

inline double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double weighted_impurity = 0.0;
};

inline SplitChoice best_split(const std::vector<std::vector<double>>& x,
                              const std::vector<int>& y,
                              const std::vector<std::size_t>& idx,
                              std::size_t num_classes, std::size_t min_leaf) {
    SplitChoice best;
    const std::size_t n = idx.size();
    const std::size_t d = x[idx[0]].size();

    std::vector<std::pair<double, int>> column(n);
    for (std::size_t feat = 0; feat < d; ++feat) {
        for (std::size_t k = 0; k < n; ++k)
            column[k] = {x[idx[k]][feat], y[idx[k]]};
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::vector<std::size_t> left_counts(num_classes, 0);
        std::vector<std::size_t> right_counts(num_classes, 0);
        for (std::size_t k = 0; k < n; ++k)
            ++right_counts[static_cast<std::size_t>(column[k].second)];

        for (std::size_t k = 0; k + 1 < n; ++k) {
            const auto cls = static_cast<std::size_t>(column[k].second);
            ++left_counts[cls];
            --right_counts[cls];
            if (column[k].first == column[k + 1].first) continue;  // no boundary here
            const std::size_t n_left = k + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double impurity =
                (static_cast<double>(n_left) * gini(left_counts, n_left) +
                 static_cast<double>(n_right) * gini(right_counts, n_right)) /
                static_cast<double>(n);
            if (!best.found || impurity < best.weighted_impurity - 1e-15) {
                best.found = true;
                best.feature = feat;
                best.threshold = 0.5 * (column[k].first + column[k + 1].first);
                best.weighted_impurity = impurity;
            }
        }
    }
    return best;
}

inline std::size_t grow_tree(DecisionTreeModel& model,
                             const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y,
                             const std::vector<std::size_t>& idx, std::size_t depth,
                             const TreeOptions& opt) {
    std::vector<std::size_t> counts(model.num_classes, 0);
    for (std::size_t i : idx) ++counts[static_cast<std::size_t>(y[i])];

    auto make_leaf = [&]() {
        TreeNode node;
        node.leaf = true;
        node.distribution.resize(model.num_classes);
        for (std::size_t c = 0; c < model.num_classes; ++c)
            node.distribution[c] =
                static_cast<double>(counts[c]) / static_cast<double>(idx.size());
        model.nodes.push_back(std::move(node));
        return model.nodes.size() - 1;
    };

    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= opt.max_depth || idx.size() < 2 * opt.min_leaf)
        return make_leaf();

    const SplitChoice split = best_split(x, y, idx, model.num_classes, opt.min_leaf);
    if (!split.found || split.weighted_impurity >= gini(counts, idx.size()) - 1e-15)
        return make_leaf();

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx)
        (x[i][split.feature] < split.threshold ? left_idx : right_idx).push_back(i);

    const std::size_t self = model.nodes.size();
    model.nodes.emplace_back();
    model.nodes[self].leaf = false;
    model.nodes[self].feature = split.feature;
    model.nodes[self].threshold = split.threshold;
    const std::size_t left = grow_tree(model, x, y, left_idx, depth + 1, opt);
    const std::size_t right = grow_tree(model, x, y, right_idx, depth + 1, opt);
    model.nodes[self].left = left;
    model.nodes[self].right = right;
    return self;
}

}  // namespace detail

inline DecisionTreeModel train_tree(const std::vector<std::vector<double>>& x,
                                    const std::vector<int>& y, std::size_t num_classes,
                                    const TreeOptions& opt = {}) {
    if (x.empty() || x.size() != y.size())
        throw precondition_error("train_tree: bad training set");
    if (num_classes < 2) throw precondition_error("train_tree: need >= 2 classes");
    for (int label : y)
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
            throw precondition_error("train_tree: label out of range");

    DecisionTreeModel model;
    model.num_classes = num_classes;
    model.num_features = x[0].size();
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    detail::grow_tree(model, x, y, idx, 0, opt);
    return model;
}

// Leaf class-frequency distribution, for soft routing downstream.
inline std::vector<double> tree_classify(const DecisionTreeModel& m,
                                         const std::vector<double>& x) {
    if (m.nodes.empty()) throw model_error("tree_classify: empty model");
    if (x.size() != m.num_features) throw schema_error("tree_classify: schema mismatch");
    std::size_t at = 0;
    while (!m.nodes[at].leaf)
        at = x[m.nodes[at].feature] < m.nodes[at].threshold ? m.nodes[at].left
                                                            : m.nodes[at].right;
    return m.nodes[at].distribution;
}

}  // namespace ctxsense
