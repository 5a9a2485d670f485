#pragma once

#include <optional>
#include <vector>

#include "rptrees/datasets.hpp"
#include "rptrees/projections.hpp"
#include "rptrees/tree.hpp"

namespace rpt {

struct ForestProjection {
    ProjectionKind kind;
    index_t q = 1;
    bool shared = false;  // one phi for all trees vs one per tree
};

struct ForestParams {
    index_t n_trees = 100;
    GrowthParams tree_params;
    bool bootstrap = false;
    std::optional<ForestProjection> projection;
    std::uint64_t seed = 0;
};

// All leaf values live in the original d-dimensional output space whatever
// the projection dimension used during growth.
struct Forest {
    std::vector<Tree> trees;
    Task task = Task::Regression;
    ForestParams params;

    index_t d() const { return trees.empty() ? 0 : trees.front().d; }
    index_t n_test_nodes() const;
};

Forest fit_forest(const Dataset& ds, const ForestParams& params);

// Mean of member predictions (soft voting for classification tasks).
DenseMatrix predict_forest(const Forest& forest, const DenseMatrix& X);
DenseMatrix predict_forest(const Forest& forest, const CsrMatrix& X);

std::vector<index_t> bootstrap_indices(index_t n, std::uint64_t forest_seed, index_t tree_index);
// Complement of the bootstrap support for each tree.
std::vector<std::vector<index_t>> oob_indices(index_t n, std::uint64_t forest_seed,
                                              index_t n_trees);

}  // namespace rpt
