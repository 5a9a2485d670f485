#include "rptrees/compression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rpt {

std::pair<index_t, index_t> IndicatorSpace::node(index_t column) const {
    const auto it = std::upper_bound(tree_offsets.begin(), tree_offsets.end(), column);
    const index_t tree = static_cast<index_t>(it - tree_offsets.begin()) - 1;
    return {tree, column - tree_offsets[tree]};
}

IndicatorSpace indicator_space(const Forest& forest) {
    IndicatorSpace space;
    index_t offset = 0;
    for (const auto& tree : forest.trees) {
        space.tree_offsets.push_back(offset);
        offset += static_cast<index_t>(tree.nodes.size());
    }
    space.total_nodes = offset;
    return space;
}

CscMatrix lift(const Forest& forest, const DenseMatrix& X) {
    const IndicatorSpace space = indicator_space(forest);
    const index_t n = X.n_rows();
    // Column-wise fill: record per (column, row) pairs then assemble.
    std::vector<std::vector<index_t>> col_rows(static_cast<std::size_t>(space.total_nodes));
    for (index_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < forest.trees.size(); ++m) {
            const Tree& tree = forest.trees[m];
            if (X.n_cols() < tree.p) throw ShapeError("lift: input has too few columns");
            index_t t = 0;
            for (;;) {
                col_rows[space.column(static_cast<index_t>(m), t)].push_back(i);
                if (tree.nodes[t].is_leaf()) break;
                t = X(i, tree.nodes[t].feature) <= tree.nodes[t].threshold ? tree.nodes[t].left
                                                                           : tree.nodes[t].right;
            }
        }
    }
    CscMatrix Z;
    Z.n_rows = n;
    Z.n_cols = space.total_nodes;
    Z.indptr.assign(static_cast<std::size_t>(space.total_nodes) + 1, 0);
    for (index_t j = 0; j < space.total_nodes; ++j) {
        for (index_t i : col_rows[j]) {
            Z.indices.push_back(i);
            Z.data.push_back(1.0);
        }
        Z.indptr[j + 1] = Z.nnz();
    }
    return Z;
}

std::vector<double> StagewisePath::beta_at(index_t n_steps, index_t n_columns) const {
    std::vector<double> beta(static_cast<std::size_t>(n_columns), 0.0);
    const index_t limit = std::min<index_t>(n_steps, static_cast<index_t>(steps.size()));
    for (index_t s = 0; s < limit; ++s) beta[steps[s].column] += steps[s].increment;
    return beta;
}

ColumnStandardizer standardize_columns(const CscMatrix& Z) {
    const index_t n = Z.n_rows, q = Z.n_cols;
    ColumnStandardizer st;
    st.mean.resize(static_cast<std::size_t>(q));
    st.scale.assign(static_cast<std::size_t>(q), 1.0);
    st.constant.assign(static_cast<std::size_t>(q), 0);
    for (index_t j = 0; j < q; ++j) {
        double s = 0.0, ss = 0.0;
        for (index_t k = Z.indptr[j]; k < Z.indptr[j + 1]; ++k) {
            s += Z.data[k];
            ss += Z.data[k] * Z.data[k];
        }
        const double mean = s / static_cast<double>(n);
        const double var = ss / static_cast<double>(n) - mean * mean;
        st.mean[j] = mean;
        if (var > 1e-15)
            st.scale[j] = std::sqrt(var);
        else
            st.constant[j] = 1;
    }
    return st;
}

StagewisePath forward_stagewise(const CscMatrix& Z, const std::vector<double>& y,
                                double epsilon, index_t max_steps, bool monotone) {
    if (epsilon <= 0.0) throw InvalidStep("stagewise step size must be positive");
    const index_t n = Z.n_rows, q = Z.n_cols;
    if (static_cast<index_t>(y.size()) != n) throw ShapeError("forward_stagewise: y length");

    const ColumnStandardizer st = standardize_columns(Z);
    // ||z_j||^2 = n for every standardized non-constant column.
    const double znorm2 = static_cast<double>(n);

    std::vector<double> residual = y;
    std::vector<double> beta(static_cast<std::size_t>(q), 0.0);
    StagewisePath path;
    path.epsilon = epsilon;

    for (index_t step = 0; step < max_steps; ++step) {
        double r_sum = 0.0;
        for (double r : residual) r_sum += r;

        index_t best_j = -1;
        double best_abs = 0.0, best_corr = 0.0;
        for (index_t j = 0; j < q; ++j) {
            if (st.constant[j]) continue;
            double dot = 0.0;
            for (index_t k = Z.indptr[j]; k < Z.indptr[j + 1]; ++k)
                dot += Z.data[k] * residual[Z.indices[k]];
            const double corr = (dot - st.mean[j] * r_sum) / st.scale[j];
            if (monotone && beta[j] != 0.0 && corr * beta[j] < 0.0) continue;
            if (corr != 0.0 && std::abs(corr) > best_abs) {
                best_abs = std::abs(corr);
                best_corr = corr;
                best_j = j;
            }
        }
        if (best_j < 0 || best_abs < 1e-12) break;
        // A step decreases the RSS by 2 eps |c| - eps^2 ||z||^2; stop once
        // the best admissible step can no longer decrease it.
        if (2.0 * best_abs <= epsilon * znorm2) break;

        const double sign = best_corr > 0.0 ? 1.0 : -1.0;
        beta[best_j] += sign * epsilon;
        path.steps.push_back({best_j, sign * epsilon});
        const double scale = sign * epsilon / st.scale[best_j];
        // r -= eps * sign * (raw_j - mean_j) / sigma_j
        for (double& r : residual) r += scale * st.mean[best_j];
        for (index_t k = Z.indptr[best_j]; k < Z.indptr[best_j + 1]; ++k)
            residual[Z.indices[k]] -= scale * Z.data[k];
    }
    return path;
}

index_t CompressedForest::n_test_nodes() const {
    index_t c = 0;
    for (const auto& tree : trees)
        for (const auto& node : tree) c += node.feature >= 0;
    return c;
}

namespace {

struct FoldedWeights {
    std::vector<double> node_weight;  // over flat columns, beta_j / sigma_j
    double intercept = 0.0;
};

// Collapse standardization into per-node additive weights:
//   y(x) = y_mean + sum_j beta_j (z_j(x) - mu_j) / sigma_j
//        = [y_mean - sum_j beta_j mu_j / sigma_j] + sum_{j visited} beta_j / sigma_j
FoldedWeights fold_weights(const std::vector<double>& beta, const ColumnStandardizer& st,
                           double y_mean) {
    FoldedWeights out;
    out.node_weight.assign(beta.size(), 0.0);
    out.intercept = y_mean;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (beta[j] == 0.0 || st.constant[j]) continue;
        out.node_weight[j] = beta[j] / st.scale[j];
        out.intercept -= beta[j] * st.mean[j] / st.scale[j];
    }
    return out;
}

CompressedForest build_compressed(const Forest& forest, const std::vector<double>& node_weight,
                                  double intercept) {
    const IndicatorSpace space = indicator_space(forest);
    CompressedForest out;
    out.intercept = intercept;
    out.task = forest.task;
    out.p = forest.trees.empty() ? 0 : forest.trees.front().p;

    for (std::size_t m = 0; m < forest.trees.size(); ++m) {
        const Tree& tree = forest.trees[m];
        const index_t base = space.tree_offsets[m];
        // keep[t]: some strict descendant of t carries a nonzero weight.
        std::vector<std::uint8_t> keep(tree.nodes.size(), 0);
        for (index_t t = static_cast<index_t>(tree.nodes.size()) - 1; t >= 0; --t) {
            const auto& node = tree.nodes[t];
            if (node.is_leaf()) continue;
            const auto live = [&](index_t c) {
                return keep[c] || node_weight[base + c] != 0.0;
            };
            keep[t] = live(node.left) || live(node.right);
        }
        std::vector<CompressedNode> nodes;
        // Rebuild reachable structure; pruned test nodes become leaves.
        std::vector<std::pair<index_t, index_t>> stack;  // (old id, new parent slot)
        auto emit = [&](index_t old_id) {
            CompressedNode cn;
            cn.weight = node_weight[base + old_id];
            const auto& node = tree.nodes[old_id];
            if (!node.is_leaf() && keep[old_id]) {
                cn.feature = node.feature;
                cn.threshold = node.threshold;
            }
            nodes.push_back(cn);
            return static_cast<index_t>(nodes.size()) - 1;
        };
        struct Frame {
            index_t old_id;
            index_t new_id;
        };
        std::vector<Frame> work;
        work.push_back({0, emit(0)});
        while (!work.empty()) {
            const Frame fr = work.back();
            work.pop_back();
            const auto& node = tree.nodes[fr.old_id];
            if (node.is_leaf() || !keep[fr.old_id]) continue;
            const index_t left_new = emit(node.left);
            const index_t right_new = emit(node.right);
            nodes[fr.new_id].left = left_new;
            nodes[fr.new_id].right = right_new;
            work.push_back({node.left, left_new});
            work.push_back({node.right, right_new});
        }
        out.trees.push_back(std::move(nodes));
    }
    return out;
}

DenseMatrix dense_inputs(const Dataset& ds) {
    return ds.sparse() ? densify(ds.csc_x()) : ds.dense_x();
}

std::vector<double> center_y(const Dataset& ds, double& y_mean) {
    if (ds.d() != 1) throw Unsupported("forest compression expects a single output");
    std::vector<double> y(static_cast<std::size_t>(ds.n()));
    double s = 0.0;
    for (index_t i = 0; i < ds.n(); ++i) s += ds.Y(i, 0);
    y_mean = s / static_cast<double>(ds.n());
    for (index_t i = 0; i < ds.n(); ++i) y[i] = ds.Y(i, 0) - y_mean;
    return y;
}

}  // namespace

CvSelection select_t_cv(const ForestBuilder& builder, const Dataset& ds, double epsilon,
                        index_t folds, index_t max_steps, std::uint64_t seed) {
    if (epsilon <= 0.0) throw InvalidStep("step size must be positive");
    const index_t n = ds.n();
    if (folds > n) throw InvalidFolds("more folds than samples");
    if (folds < 2) throw InvalidFolds("need at least two folds");

    Rng rng(seed);
    std::vector<index_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (index_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(i + 1)]);

    std::vector<double> loss_sum(static_cast<std::size_t>(max_steps) + 1, 0.0);
    for (index_t fold = 0; fold < folds; ++fold) {
        std::vector<index_t> train_ids, val_ids;
        for (index_t i = 0; i < n; ++i)
            (i % folds == fold ? val_ids : train_ids).push_back(order[i]);
        std::sort(train_ids.begin(), train_ids.end());
        std::sort(val_ids.begin(), val_ids.end());
        const Dataset train = take_samples(ds, train_ids);
        const Dataset val = take_samples(ds, val_ids);

        const Forest forest = builder(train);
        const CscMatrix Z = lift(forest, dense_inputs(train));
        const ColumnStandardizer st = standardize_columns(Z);
        double y_mean = 0.0;
        const std::vector<double> y = center_y(train, y_mean);
        const StagewisePath path = forward_stagewise(Z, y, epsilon, max_steps);

        // Validation score, updated incrementally along the path.
        const CscMatrix Zv = lift(forest, dense_inputs(val));
        std::vector<double> score(static_cast<std::size_t>(val.n()), y_mean);
        auto record = [&](index_t step) {
            double loss = 0.0;
            for (index_t i = 0; i < val.n(); ++i) {
                if (ds.task == Task::Regression) {
                    const double r = val.Y(i, 0) - score[i];
                    loss += r * r;
                } else {
                    const double pred = score[i] > 0.0 ? 1.0 : -1.0;
                    loss += pred != val.Y(i, 0) ? 1.0 : 0.0;
                }
            }
            loss_sum[step] += loss / static_cast<double>(val.n());
        };
        record(0);
        for (index_t s = 0; s < max_steps; ++s) {
            if (s < static_cast<index_t>(path.steps.size())) {
                const auto& stp = path.steps[s];
                const double scale = stp.increment / st.scale[stp.column];
                for (double& v : score) v -= scale * st.mean[stp.column];
                for (index_t k = Zv.indptr[stp.column]; k < Zv.indptr[stp.column + 1]; ++k)
                    score[Zv.indices[k]] += scale * Zv.data[k];
            }
            record(s + 1);
        }
    }

    CvSelection sel;
    sel.mean_loss_per_t.resize(loss_sum.size());
    for (std::size_t s = 0; s < loss_sum.size(); ++s)
        sel.mean_loss_per_t[s] = loss_sum[s] / static_cast<double>(folds);
    index_t best = 0;
    for (index_t s = 1; s <= max_steps; ++s)
        if (sel.mean_loss_per_t[s] < sel.mean_loss_per_t[best]) best = s;  // ties: smallest t
    sel.t_star = epsilon * static_cast<double>(best);
    return sel;
}

CompressedForest compress(const Forest& forest, const Dataset& ds, double t_star,
                          double epsilon, index_t max_steps) {
    if (epsilon <= 0.0) throw InvalidStep("step size must be positive");
    const auto want_steps = static_cast<index_t>(std::llround(t_star / epsilon));
    if (want_steps < 0 || want_steps > max_steps)
        throw InvalidT("t_star outside the computed path range");

    const CscMatrix Z = lift(forest, dense_inputs(ds));
    const ColumnStandardizer st = standardize_columns(Z);
    double y_mean = 0.0;
    const std::vector<double> y = center_y(ds, y_mean);
    const StagewisePath path = forward_stagewise(Z, y, epsilon, want_steps);
    // The path may stop early on its own; t_star is then clamped to its end.
    const std::vector<double> beta =
        path.beta_at(static_cast<index_t>(path.steps.size()), Z.n_cols);
    const FoldedWeights folded = fold_weights(beta, st, y_mean);
    return build_compressed(forest, folded.node_weight, folded.intercept);
}

CompressedForest compress_from_weights(const Forest& forest, const std::vector<double>& beta,
                                       double beta0) {
    const IndicatorSpace space = indicator_space(forest);
    if (static_cast<index_t>(beta.size()) != space.total_nodes)
        throw ShapeError("compress_from_weights: beta length != node count");
    return build_compressed(forest, beta, beta0);
}

DenseMatrix predict_compressed(const CompressedForest& model, const DenseMatrix& X) {
    if (X.n_cols() < model.p) throw ShapeError("predict_compressed: too few columns");
    DenseMatrix out(X.n_rows(), 1);
    for (index_t i = 0; i < X.n_rows(); ++i) {
        double score = model.intercept;
        for (const auto& tree : model.trees) {
            index_t t = 0;
            for (;;) {
                score += tree[t].weight;
                if (tree[t].feature < 0) break;
                t = X(i, tree[t].feature) <= tree[t].threshold ? tree[t].left : tree[t].right;
            }
        }
        out(i, 0) = model.task == Task::Regression ? score : (score > 0.0 ? 1.0 : -1.0);
    }
    return out;
}

index_t node_count(const Forest& forest) { return forest.n_test_nodes(); }
index_t node_count(const CompressedForest& model) { return model.n_test_nodes(); }

}  // namespace rpt
