#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rptrees/forest.hpp"

namespace rpt {

// Bijection between forest nodes and columns of the lifted indicator space.
struct IndicatorSpace {
    std::vector<index_t> tree_offsets;  // column of node 0 of each tree
    index_t total_nodes = 0;

    index_t column(index_t tree, index_t node) const { return tree_offsets[tree] + node; }
    std::pair<index_t, index_t> node(index_t column) const;
};

IndicatorSpace indicator_space(const Forest& forest);

// Lifted design: entry (i, j) = 1 iff sample i traverses node j (every node
// on its root-to-leaf path, root included).
CscMatrix lift(const Forest& forest, const DenseMatrix& X);

struct StagewiseStep {
    index_t column;
    double increment;  // +/- epsilon
};

struct StagewisePath {
    double epsilon = 0.0;
    std::vector<StagewiseStep> steps;

    // Coefficients after the first `n_steps` steps.
    std::vector<double> beta_at(index_t n_steps, index_t n_columns) const;
    double t_end() const { return epsilon * static_cast<double>(steps.size()); }
};

// Incremental forward stagewise on standardized columns against a centered
// response. Stops at max_steps, at negligible correlation, or when the best
// admissible step would increase the residual sum of squares. Monotone mode
// never lets a coefficient change sign.
StagewisePath forward_stagewise(const CscMatrix& Z, const std::vector<double>& y,
                                double epsilon, index_t max_steps, bool monotone = true);

struct ColumnStandardizer {
    std::vector<double> mean, scale;
    std::vector<std::uint8_t> constant;  // constant columns are excluded
};

ColumnStandardizer standardize_columns(const CscMatrix& Z);

// A forest whose surviving nodes carry additive weights; a test node was
// deleted (collapsed into a leaf) when no strict descendant carried a
// nonzero weight.
struct CompressedNode {
    index_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    index_t left = -1;
    index_t right = -1;
    double weight = 0.0;  // folded beta_j / sigma_j
};

struct CompressedForest {
    std::vector<std::vector<CompressedNode>> trees;
    double intercept = 0.0;  // folds the response mean and column offsets
    Task task = Task::Regression;
    index_t p = 0;

    index_t n_test_nodes() const;
};

using ForestBuilder = std::function<Forest(const Dataset&)>;

struct CvSelection {
    double t_star = 0.0;
    std::vector<double> mean_loss_per_t;  // indexed by step count
};

CvSelection select_t_cv(const ForestBuilder& builder, const Dataset& ds, double epsilon,
                        index_t folds = 10, index_t max_steps = 1000,
                        std::uint64_t seed = 0);

CompressedForest compress(const Forest& forest, const Dataset& ds, double t_star,
                          double epsilon, index_t max_steps = 1000);

// Direct construction from per-node weights over raw (unstandardized)
// indicators; used to reproduce a forest exactly from its own leaf weights.
CompressedForest compress_from_weights(const Forest& forest, const std::vector<double>& beta,
                                       double beta0);

DenseMatrix predict_compressed(const CompressedForest& model, const DenseMatrix& X);

index_t node_count(const Forest& forest);
index_t node_count(const CompressedForest& model);

}  // namespace rpt
