#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rptrees/matrix.hpp"
#include "rptrees/rng.hpp"

namespace rpt {

enum class ImpurityKind { Gini, Entropy, Variance };
enum class SplitterKind { Exhaustive, RandomThreshold };

struct GrowthParams {
    index_t max_depth = -1;           // -1 = unlimited
    index_t min_samples_split = 2;    // nodes smaller than this become leaves
    index_t max_leaves = -1;          // -1 = unlimited; >= 2 switches to best-first growth
    index_t features_per_split = -1;  // k features drawn per node; -1 = all
    SplitterKind splitter = SplitterKind::Exhaustive;
    ImpurityKind impurity = ImpurityKind::Variance;
    std::uint64_t seed = 0;
};

// Test nodes route x[feature] <= threshold to the left child. Leaves carry a
// d-dimensional output vector: per-output means for variance-grown trees,
// per-output positive-class probabilities for gini/entropy-grown trees.
struct TreeNode {
    index_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    index_t left = -1;
    index_t right = -1;
    double weighted_impurity_decrease = 0.0;  // (n_t / n) * dI at test nodes
    index_t n_samples = 0;
    std::vector<double> value;  // leaf prediction

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at index 0
    index_t d = 0;
    index_t p = 0;

    index_t n_test_nodes() const;
    index_t n_leaves() const;
    index_t max_depth() const;
    index_t leaf_for_row(const DenseMatrix& X, index_t i) const;

    bool operator==(const Tree& other) const;
};

// Sufficient statistics of a node's outputs. For variance trees `sum` holds
// per-output sums and `sumsq` the total sum of squares; for gini/entropy
// trees `sum` holds per-output positive counts (y > 0) and `sumsq` is unused.
struct NodeStats {
    double n = 0.0;
    std::vector<double> sum;
    double sumsq = 0.0;
};

NodeStats make_stats(index_t d);
void stats_add_row(NodeStats& s, const DenseMatrix& Y, index_t row, ImpurityKind kind);
NodeStats stats_sub(const NodeStats& a, const NodeStats& b);
double impurity_from_stats(const NodeStats& s, ImpurityKind kind);
std::vector<double> leaf_value_from_stats(const NodeStats& s);

// Standalone impurity on a set of output rows; gini/entropy handle arbitrary
// discrete class values through per-output frequency counts.
double impurity(const DenseMatrix& values, ImpurityKind kind);
double impurity_reduction(const DenseMatrix& parent, const DenseMatrix& left,
                          const DenseMatrix& right, ImpurityKind kind);

std::vector<double> label_leaf(const DenseMatrix& Y, const std::vector<index_t>& rows,
                               ImpurityKind kind);

// Sample ids of live nodes are held as contiguous slices of `order`;
// mapping[order[i]] == i at all times.
struct NodePartition {
    std::vector<index_t> order;
    std::vector<index_t> mapping;

    explicit NodePartition(index_t n);
    void swap_positions(index_t p1, index_t p2);
    void check(index_t start, index_t end) const;
};

struct ExtractResult {
    std::vector<double> neg;  // values < 0 in encounter order (ascending row id)
    std::vector<double> pos;  // values > 0 in encounter order
    index_t n_neg = 0;
    index_t n_pos = 0;
};

// Reorders order[start:end) into [negatives | zeros | positives]; after the
// call neg[i] belongs to order[start + i] and pos[i] to order[end - 1 - i].
ExtractResult extract_nnz_mapping(const CscMatrix& X, index_t j, NodePartition& part,
                                  index_t start, index_t end);
ExtractResult extract_nnz_bsearch(const CscMatrix& X, index_t j, NodePartition& part,
                                  index_t start, index_t end);
// Hybrid: repeated binary search when the node is small relative to the
// column ((end-start) * ln(nnz_j) < 0.1 * nnz_j), full column scan through
// the mapping otherwise.
ExtractResult extract_nnz(const CscMatrix& X, index_t j, NodePartition& part,
                          index_t start, index_t end);

struct SplitRecord {
    index_t feature = -1;
    double threshold = 0.0;
    double delta_impurity = 0.0;
    index_t n_left = 0;
    NodeStats left_stats;
};

std::optional<SplitRecord> find_best_split_dense(const DenseMatrix& X, const DenseMatrix& Y,
                                                 const std::vector<index_t>& node_samples,
                                                 const GrowthParams& params, Rng& rng);
std::optional<SplitRecord> find_best_split_sparse(const CscMatrix& X, const DenseMatrix& Y,
                                                  NodePartition& part, index_t start,
                                                  index_t end, const GrowthParams& params,
                                                  Rng& rng);

Tree grow(const DenseMatrix& X, const DenseMatrix& Y, const GrowthParams& params);
Tree grow(const CscMatrix& X, const DenseMatrix& Y, const GrowthParams& params);

// Replaces every leaf value by the mean of Y_original over the training rows
// routed to it; the structure is untouched.
Tree relabel_leaves(const Tree& tree, const DenseMatrix& X, const DenseMatrix& Y_original);
Tree relabel_leaves(const Tree& tree, const CsrMatrix& X, const DenseMatrix& Y_original);

DenseMatrix predict_dense(const Tree& tree, const DenseMatrix& X);
// CSR prediction materializes per-row lookups in nz_mask/nz_value scratch
// arrays stamped with the row id; the matrix is never densified.
DenseMatrix predict_csr(const Tree& tree, const CsrMatrix& X);

std::vector<double> mdi_importances(const Tree& tree);

}  // namespace rpt
