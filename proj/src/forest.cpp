#include "rptrees/forest.hpp"

#include <algorithm>
#include <numeric>

namespace rpt {

namespace {
constexpr std::uint64_t kBootTag = 0x626f6f74;  // "boot"
constexpr std::uint64_t kProjTag = 0x70726f6a;  // "proj"
constexpr std::uint64_t kTreeTag = 0x74726565;  // "tree"
}  // namespace

index_t Forest::n_test_nodes() const {
    index_t c = 0;
    for (const auto& t : trees) c += t.n_test_nodes();
    return c;
}

std::vector<index_t> bootstrap_indices(index_t n, std::uint64_t forest_seed, index_t tree_index) {
    Rng rng(mix_seed(mix_seed(forest_seed, tree_index), kBootTag));
    std::vector<index_t> out(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) out[i] = rng.uniform_int(n);
    return out;
}

std::vector<std::vector<index_t>> oob_indices(index_t n, std::uint64_t forest_seed,
                                              index_t n_trees) {
    std::vector<std::vector<index_t>> out(static_cast<std::size_t>(n_trees));
    std::vector<std::uint8_t> in_bag(static_cast<std::size_t>(n));
    for (index_t m = 0; m < n_trees; ++m) {
        std::fill(in_bag.begin(), in_bag.end(), 0);
        for (index_t id : bootstrap_indices(n, forest_seed, m)) in_bag[id] = 1;
        for (index_t i = 0; i < n; ++i)
            if (!in_bag[i]) out[m].push_back(i);
    }
    return out;
}

Forest fit_forest(const Dataset& ds, const ForestParams& params) {
    if (ds.n() == 0) throw EmptyDataset("fit_forest on an empty dataset");
    Forest forest;
    forest.task = ds.task;
    forest.params = params;
    forest.trees.reserve(static_cast<std::size_t>(params.n_trees));

    std::optional<ProjectionMatrix> shared_phi;
    if (params.projection && params.projection->shared) {
        Rng rng(mix_seed(params.seed, kProjTag));
        shared_phi = sample_projection(params.projection->kind, params.projection->q, ds.d(), rng);
    }

    for (index_t m = 0; m < params.n_trees; ++m) {
        const std::uint64_t tree_seed = mix_seed(params.seed, m);

        Dataset bag;
        const Dataset* train = &ds;
        if (params.bootstrap) {
            bag = take_samples(ds, bootstrap_indices(ds.n(), params.seed, m));
            train = &bag;
        }

        GrowthParams tp = params.tree_params;
        tp.seed = mix_seed(tree_seed, kTreeTag);

        Tree tree;
        if (params.projection) {
            ProjectionMatrix phi;
            if (params.projection->shared) {
                phi = *shared_phi;
            } else {
                Rng rng(mix_seed(tree_seed, kProjTag));
                phi = sample_projection(params.projection->kind, params.projection->q, ds.d(), rng);
            }
            const DenseMatrix Yp = project(phi, train->Y);
            tp.impurity = ImpurityKind::Variance;  // projected targets are continuous
            if (train->sparse()) {
                tree = grow(train->csc_x(), Yp, tp);
                tree = relabel_leaves(tree, csc_to_csr(train->csc_x()), train->Y);
            } else {
                tree = grow(train->dense_x(), Yp, tp);
                tree = relabel_leaves(tree, train->dense_x(), train->Y);
            }
        } else {
            if (train->sparse())
                tree = grow(train->csc_x(), train->Y, tp);
            else
                tree = grow(train->dense_x(), train->Y, tp);
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

namespace {
template <typename X>
DenseMatrix predict_mean(const Forest& forest, const X& x, index_t n_rows) {
    if (forest.trees.empty()) throw EmptyDataset("predict on an empty forest");
    DenseMatrix acc(n_rows, forest.d());
    for (const auto& tree : forest.trees) {
        DenseMatrix pred;
        if constexpr (std::is_same_v<X, DenseMatrix>)
            pred = predict_dense(tree, x);
        else
            pred = predict_csr(tree, x);
        for (std::size_t i = 0; i < acc.values().size(); ++i)
            acc.values()[i] += pred.values()[i];
    }
    const double scale = 1.0 / static_cast<double>(forest.trees.size());
    for (double& v : acc.values()) v *= scale;
    return acc;
}
}  // namespace

DenseMatrix predict_forest(const Forest& forest, const DenseMatrix& X) {
    return predict_mean(forest, X, X.n_rows());
}

DenseMatrix predict_forest(const Forest& forest, const CsrMatrix& X) {
    return predict_mean(forest, X, X.n_rows);
}

}  // namespace rpt
