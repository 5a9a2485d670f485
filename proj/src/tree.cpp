#include "rptrees/tree.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <queue>

#include "rptrees/error.hpp"

namespace rpt {

index_t Tree::n_test_nodes() const {
    index_t c = 0;
    for (const auto& n : nodes) c += !n.is_leaf();
    return c;
}

index_t Tree::n_leaves() const {
    index_t c = 0;
    for (const auto& n : nodes) c += n.is_leaf();
    return c;
}

index_t Tree::max_depth() const {
    if (nodes.empty()) return 0;
    std::vector<index_t> depth(nodes.size(), 0);
    index_t out = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) {
            depth[nodes[i].left] = depth[i] + 1;
            depth[nodes[i].right] = depth[i] + 1;
        }
        out = std::max(out, depth[i]);
    }
    return out;
}

index_t Tree::leaf_for_row(const DenseMatrix& X, index_t i) const {
    index_t t = 0;
    while (!nodes[t].is_leaf())
        t = X(i, nodes[t].feature) <= nodes[t].threshold ? nodes[t].left : nodes[t].right;
    return t;
}

bool Tree::operator==(const Tree& other) const {
    if (d != other.d || p != other.p || nodes.size() != other.nodes.size()) return false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& a = nodes[i];
        const auto& b = other.nodes[i];
        if (a.feature != b.feature || a.left != b.left || a.right != b.right) return false;
        if (!a.is_leaf() && a.threshold != b.threshold) return false;
        if (a.value != b.value) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Node statistics

NodeStats make_stats(index_t d) {
    NodeStats s;
    s.sum.assign(static_cast<std::size_t>(d), 0.0);
    return s;
}

void stats_add_row(NodeStats& s, const DenseMatrix& Y, index_t row, ImpurityKind kind) {
    s.n += 1.0;
    if (kind == ImpurityKind::Variance) {
        for (index_t j = 0; j < Y.n_cols(); ++j) {
            const double v = Y(row, j);
            s.sum[j] += v;
            s.sumsq += v * v;
        }
    } else {
        for (index_t j = 0; j < Y.n_cols(); ++j) s.sum[j] += Y(row, j) > 0.0 ? 1.0 : 0.0;
    }
}

NodeStats stats_sub(const NodeStats& a, const NodeStats& b) {
    NodeStats out;
    out.n = a.n - b.n;
    out.sumsq = a.sumsq - b.sumsq;
    out.sum.resize(a.sum.size());
    for (std::size_t j = 0; j < a.sum.size(); ++j) out.sum[j] = a.sum[j] - b.sum[j];
    return out;
}

namespace {
double entropy_term(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }
}  // namespace

double impurity_from_stats(const NodeStats& s, ImpurityKind kind) {
    const double n = s.n;
    if (n <= 0.0) throw EmptyPartition("impurity of an empty node");
    double out = 0.0;
    switch (kind) {
        case ImpurityKind::Variance: {
            double mean_sq = 0.0;
            for (double v : s.sum) {
                const double m = v / n;
                mean_sq += m * m;
            }
            out = s.sumsq / n - mean_sq;
            break;
        }
        case ImpurityKind::Gini: {
            for (double c : s.sum) {
                const double p = c / n;
                out += 2.0 * p * (1.0 - p);
            }
            break;
        }
        case ImpurityKind::Entropy: {
            for (double c : s.sum) {
                const double p = c / n;
                out += entropy_term(p) + entropy_term(1.0 - p);
            }
            break;
        }
    }
    return out > 0.0 ? out : 0.0;
}

std::vector<double> leaf_value_from_stats(const NodeStats& s) {
    std::vector<double> out(s.sum.size());
    for (std::size_t j = 0; j < s.sum.size(); ++j) out[j] = s.sum[j] / s.n;
    return out;
}

// ---------------------------------------------------------------------------
// Standalone impurity on explicit row sets (gini/entropy accept arbitrary
// discrete class values here)

double impurity(const DenseMatrix& values, ImpurityKind kind) {
    const index_t n = values.n_rows(), d = values.n_cols();
    if (n == 0) throw EmptyPartition("impurity of an empty set");
    if (kind == ImpurityKind::Variance) {
        double out = 0.0;
        for (index_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (index_t i = 0; i < n; ++i) mean += values(i, j);
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (index_t i = 0; i < n; ++i) {
                const double c = values(i, j) - mean;
                ss += c * c;
            }
            out += ss / static_cast<double>(n);
        }
        return out;
    }
    double out = 0.0;
    for (index_t j = 0; j < d; ++j) {
        std::map<double, index_t> freq;
        for (index_t i = 0; i < n; ++i) ++freq[values(i, j)];
        for (const auto& [cls, count] : freq) {
            const double p = static_cast<double>(count) / static_cast<double>(n);
            out += kind == ImpurityKind::Gini ? p * (1.0 - p) : entropy_term(p);
        }
    }
    return out;
}

double impurity_reduction(const DenseMatrix& parent, const DenseMatrix& left,
                          const DenseMatrix& right, ImpurityKind kind) {
    if (left.n_rows() == 0 || right.n_rows() == 0)
        throw InvalidSplit("impurity_reduction with an empty child");
    if (left.n_rows() + right.n_rows() != parent.n_rows())
        throw InvalidSplit("children do not partition the parent");
    const double n = static_cast<double>(parent.n_rows());
    return impurity(parent, kind) -
           static_cast<double>(left.n_rows()) / n * impurity(left, kind) -
           static_cast<double>(right.n_rows()) / n * impurity(right, kind);
}

std::vector<double> label_leaf(const DenseMatrix& Y, const std::vector<index_t>& rows,
                               ImpurityKind kind) {
    if (rows.empty()) throw EmptyPartition("label_leaf on an empty set");
    NodeStats s = make_stats(Y.n_cols());
    for (index_t r : rows) stats_add_row(s, Y, r, kind);
    return leaf_value_from_stats(s);
}

// ---------------------------------------------------------------------------
// Partition bookkeeping

NodePartition::NodePartition(index_t n) {
    order.resize(static_cast<std::size_t>(n));
    mapping.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::iota(mapping.begin(), mapping.end(), 0);
}

void NodePartition::swap_positions(index_t p1, index_t p2) {
    std::swap(order[p1], order[p2]);
    mapping[order[p1]] = p1;
    mapping[order[p2]] = p2;
    assert(mapping[order[p1]] == p1 && mapping[order[p2]] == p2);
}

void NodePartition::check(index_t start, index_t end) const {
    for (index_t i = start; i < end; ++i) {
        if (mapping[order[i]] != i) throw Error("partition mapping invariant violated");
    }
}

// ---------------------------------------------------------------------------
// Nonzero extraction (CSC)

ExtractResult extract_nnz_mapping(const CscMatrix& X, index_t j, NodePartition& part,
                                  index_t start, index_t end) {
    ExtractResult out;
    index_t start_p = end;    // front of the positive block (grows downward)
    index_t end_n = start;    // past-the-end of the negative block
    for (index_t k = X.indptr[j]; k < X.indptr[j + 1]; ++k) {
        const index_t sample = X.indices[k];
        const index_t pos = part.mapping[sample];
        if (pos < start || pos >= end) continue;
        const double value = X.data[k];
        if (value > 0.0) {
            out.pos.push_back(value);
            --start_p;
            part.swap_positions(pos, start_p);
        } else {
            out.neg.push_back(value);
            part.swap_positions(pos, end_n);
            ++end_n;
        }
    }
    out.n_neg = end_n - start;
    out.n_pos = end - start_p;
    return out;
}

ExtractResult extract_nnz_bsearch(const CscMatrix& X, index_t j, NodePartition& part,
                                  index_t start, index_t end) {
    ExtractResult out;
    index_t start_p = end;
    index_t end_n = start;
    std::vector<index_t> sorted_ids(part.order.begin() + start, part.order.begin() + end);
    std::sort(sorted_ids.begin(), sorted_ids.end());

    const index_t col_begin = X.indptr[j];
    const index_t col_end = X.indptr[j + 1];
    index_t lo = col_begin;  // the column's row indices are sorted, so the
                             // search window only moves forward
    for (index_t sample : sorted_ids) {
        const auto it = std::lower_bound(X.indices.begin() + lo, X.indices.begin() + col_end,
                                         sample);
        lo = static_cast<index_t>(it - X.indices.begin());
        if (lo == col_end) break;
        if (*it != sample) continue;  // -1 ("not found") in the scalar contract
        const double value = X.data[lo];
        const index_t pos = part.mapping[sample];
        if (value > 0.0) {
            out.pos.push_back(value);
            --start_p;
            part.swap_positions(pos, start_p);
        } else {
            out.neg.push_back(value);
            part.swap_positions(pos, end_n);
            ++end_n;
        }
    }
    out.n_neg = end_n - start;
    out.n_pos = end - start_p;
    return out;
}

ExtractResult extract_nnz(const CscMatrix& X, index_t j, NodePartition& part, index_t start,
                          index_t end) {
    const index_t n_nz = X.col_nnz(j);
    if (n_nz == 0) return {};
    // Repeated binary search costs O(|node| log nnz), the mapping scan
    // O(nnz); pick whichever is cheaper (0.1 is an empirical constant).
    const double node_size = static_cast<double>(end - start);
    if (node_size * std::log(static_cast<double>(n_nz)) < 0.1 * static_cast<double>(n_nz))
        return extract_nnz_bsearch(X, j, part, start, end);
    return extract_nnz_mapping(X, j, part, start, end);
}

// ---------------------------------------------------------------------------
// Split search. Dense and sparse columns are reduced to the same canonical
// view: nonzero (value, id) pairs sorted by (value, id) plus a zero count.
// Candidate evaluation then runs on identical floating-point sequences for
// both input layouts, which is what makes CSC growth bit-equal to dense
// growth.

namespace {

using ValueId = std::pair<double, index_t>;

struct ColumnView {
    std::vector<ValueId> neg;
    std::vector<ValueId> pos;
    index_t n_zero = 0;

    index_t n_total() const {
        return static_cast<index_t>(neg.size() + pos.size()) + n_zero;
    }
    double min_value() const {
        if (!neg.empty()) return neg.front().first;
        if (n_zero > 0) return 0.0;
        return pos.front().first;
    }
    double max_value() const {
        if (!pos.empty()) return pos.back().first;
        if (n_zero > 0) return 0.0;
        return neg.back().first;
    }
    bool constant() const {
        index_t groups = 0;
        double first = 0.0, last = 0.0;
        if (!neg.empty()) ++groups;
        if (n_zero > 0) ++groups;
        if (!pos.empty()) ++groups;
        if (groups != 1) return groups == 0;
        if (n_zero > 0) return true;
        const auto& v = neg.empty() ? pos : neg;
        first = v.front().first;
        last = v.back().first;
        return first == last;
    }
};

void sort_pairs(std::vector<ValueId>& v) {
    std::sort(v.begin(), v.end());
}

ColumnView column_view_dense(const DenseMatrix& X, index_t j, const std::vector<index_t>& order,
                             index_t start, index_t end) {
    ColumnView view;
    for (index_t i = start; i < end; ++i) {
        const index_t id = order[i];
        const double v = X(id, j);
        if (v < 0.0)
            view.neg.emplace_back(v, id);
        else if (v > 0.0)
            view.pos.emplace_back(v, id);
        else
            ++view.n_zero;
    }
    sort_pairs(view.neg);
    sort_pairs(view.pos);
    return view;
}

ColumnView column_view_sparse(const CscMatrix& X, index_t j, NodePartition& part, index_t start,
                              index_t end) {
    const ExtractResult ex = extract_nnz(X, j, part, start, end);
    ColumnView view;
    view.neg.reserve(ex.neg.size());
    for (std::size_t i = 0; i < ex.neg.size(); ++i)
        view.neg.emplace_back(ex.neg[i], part.order[start + static_cast<index_t>(i)]);
    view.pos.reserve(ex.pos.size());
    for (std::size_t i = 0; i < ex.pos.size(); ++i)
        view.pos.emplace_back(ex.pos[i], part.order[end - 1 - static_cast<index_t>(i)]);
    view.n_zero = (end - start) - ex.n_neg - ex.n_pos;
    sort_pairs(view.neg);
    sort_pairs(view.pos);
    return view;
}

// Midpoint of two consecutive distinct values, nudged down if rounding lands
// on the upper value so that `x <= tau` keeps the lower group on the left.
double midpoint(double lo, double hi) {
    double mid = lo + 0.5 * (hi - lo);
    if (mid >= hi) mid = lo;
    return mid;
}

struct ColumnSplit {
    double threshold = 0.0;
    double delta_impurity = 0.0;
    index_t n_left = 0;
    NodeStats left_stats;
};

struct SweepContext {
    const DenseMatrix& Y;
    ImpurityKind kind;
    const NodeStats& parent;
    double parent_impurity;
};

double candidate_delta(const SweepContext& ctx, const NodeStats& left) {
    const NodeStats right = stats_sub(ctx.parent, left);
    const double n = ctx.parent.n;
    return ctx.parent_impurity - left.n / n * impurity_from_stats(left, ctx.kind) -
           right.n / n * impurity_from_stats(right, ctx.kind);
}

void consider(const SweepContext& ctx, double threshold, const NodeStats& left,
              std::optional<ColumnSplit>& best) {
    if (left.n <= 0.0 || left.n >= ctx.parent.n) return;
    const double delta = candidate_delta(ctx, left);
    if (delta <= 0.0) return;
    if (!best || delta > best->delta_impurity) {
        best = ColumnSplit{threshold, delta, static_cast<index_t>(left.n), left};
    }
}

NodeStats pos_total_stats(const SweepContext& ctx, const std::vector<ValueId>& pos) {
    NodeStats s = make_stats(ctx.Y.n_cols());
    for (const auto& [v, id] : pos) stats_add_row(s, ctx.Y, id, ctx.kind);
    return s;
}

std::optional<ColumnSplit> exhaustive_column_split(const SweepContext& ctx,
                                                   const ColumnView& view) {
    std::optional<ColumnSplit> best;
    NodeStats cum = make_stats(ctx.Y.n_cols());

    for (std::size_t r = 0; r < view.neg.size(); ++r) {
        stats_add_row(cum, ctx.Y, view.neg[r].second, ctx.kind);
        if (r + 1 < view.neg.size() && view.neg[r + 1].first != view.neg[r].first)
            consider(ctx, midpoint(view.neg[r].first, view.neg[r + 1].first), cum, best);
    }
    if (!view.neg.empty()) {
        const double next = view.n_zero > 0 ? 0.0
                            : (!view.pos.empty() ? view.pos.front().first : view.neg.back().first);
        if (next != view.neg.back().first)
            consider(ctx, midpoint(view.neg.back().first, next), cum, best);
    }
    if (view.n_zero > 0) {
        // Everything up to and including the zero block, via subtraction so
        // the zero block itself never needs to be walked.
        cum = stats_sub(ctx.parent, pos_total_stats(ctx, view.pos));
        if (!view.pos.empty())
            consider(ctx, midpoint(0.0, view.pos.front().first), cum, best);
    }
    for (std::size_t r = 0; r < view.pos.size(); ++r) {
        stats_add_row(cum, ctx.Y, view.pos[r].second, ctx.kind);
        if (r + 1 < view.pos.size() && view.pos[r + 1].first != view.pos[r].first)
            consider(ctx, midpoint(view.pos[r].first, view.pos[r + 1].first), cum, best);
    }
    return best;
}

std::optional<ColumnSplit> random_threshold_column_split(const SweepContext& ctx,
                                                         const ColumnView& view, double tau) {
    NodeStats cum = make_stats(ctx.Y.n_cols());
    if (tau < 0.0) {
        for (const auto& [v, id] : view.neg) {
            if (v > tau) break;
            stats_add_row(cum, ctx.Y, id, ctx.kind);
        }
    } else {
        cum = stats_sub(ctx.parent, pos_total_stats(ctx, view.pos));
        for (const auto& [v, id] : view.pos) {
            if (v > tau) break;
            stats_add_row(cum, ctx.Y, id, ctx.kind);
        }
    }
    std::optional<ColumnSplit> best;
    consider(ctx, tau, cum, best);
    return best;
}

// One stream per (tree seed, node id): dense and sparse growers consume
// randomness identically, and parallel builds stay reproducible.
constexpr std::uint64_t kNodeStreamTag = 0x6e6f6465;  // "node"

struct SplitSearch {
    const DenseMatrix* dense = nullptr;
    const CscMatrix* csc = nullptr;
    const DenseMatrix& Y;
    const GrowthParams& params;

    index_t p() const { return dense ? dense->n_cols() : csc->n_cols; }

    std::optional<SplitRecord> best_split(NodePartition& part, index_t start, index_t end,
                                          const NodeStats& stats, double node_impurity,
                                          Rng& rng, std::vector<std::uint8_t>* const_mask) const {
        const index_t n_features = p();
        index_t k = params.features_per_split < 0 ? n_features
                                                  : std::min(params.features_per_split, n_features);
        // Partial Fisher-Yates draw of k features without replacement.
        std::vector<index_t> pool(static_cast<std::size_t>(n_features));
        std::iota(pool.begin(), pool.end(), 0);
        for (index_t i = 0; i < k; ++i)
            std::swap(pool[i], pool[i + rng.uniform_int(n_features - i)]);

        const SweepContext ctx{Y, params.impurity, stats, node_impurity};
        std::optional<SplitRecord> best;
        for (index_t fi = 0; fi < k; ++fi) {
            const index_t f = pool[fi];
            if (const_mask && (*const_mask)[f]) continue;
            const ColumnView view = dense
                                        ? column_view_dense(*dense, f, part.order, start, end)
                                        : column_view_sparse(*csc, f, part, start, end);
            if (view.constant()) {
                if (const_mask) (*const_mask)[f] = 1;
                continue;
            }
            std::optional<ColumnSplit> cand;
            if (params.splitter == SplitterKind::Exhaustive) {
                cand = exhaustive_column_split(ctx, view);
            } else {
                const double lo = view.min_value();
                const double hi = view.max_value();
                double tau = rng.uniform(lo, hi);
                if (tau >= hi) tau = std::nextafter(hi, lo);
                cand = random_threshold_column_split(ctx, view, tau);
            }
            if (cand && (!best || cand->delta_impurity > best->delta_impurity)) {
                best = SplitRecord{f, cand->threshold, cand->delta_impurity, cand->n_left,
                                   std::move(cand->left_stats)};
            }
        }
        return best;
    }

    // Rearranges order[start:end) into [left | right] for the chosen split.
    index_t apply_split(NodePartition& part, index_t start, index_t end,
                        const SplitRecord& split) const {
        std::vector<index_t> left, right;
        left.reserve(static_cast<std::size_t>(split.n_left));
        if (dense) {
            for (index_t i = start; i < end; ++i) {
                const index_t id = part.order[i];
                ((*dense)(id, split.feature) <= split.threshold ? left : right).push_back(id);
            }
        } else {
            const ExtractResult ex = extract_nnz(*csc, split.feature, part, start, end);
            const index_t zero_begin = start + ex.n_neg;
            const index_t zero_end = end - ex.n_pos;
            auto route = [&](index_t pos_in_order, double value) {
                (value <= split.threshold ? left : right).push_back(part.order[pos_in_order]);
            };
            for (index_t i = 0; i < ex.n_neg; ++i) route(start + i, ex.neg[i]);
            for (index_t i = zero_begin; i < zero_end; ++i) route(i, 0.0);
            for (index_t i = 0; i < ex.n_pos; ++i) route(end - 1 - i, ex.pos[i]);
        }
        if (static_cast<index_t>(left.size()) != split.n_left)
            throw Error("split application disagrees with the split record");
        index_t w = start;
        for (index_t id : left) {
            part.order[w] = id;
            part.mapping[id] = w;
            ++w;
        }
        for (index_t id : right) {
            part.order[w] = id;
            part.mapping[id] = w;
            ++w;
        }
        return start + split.n_left;
    }
};

struct PendingNode {
    index_t node_id = 0;
    index_t start = 0, end = 0;
    index_t depth = 0;
    NodeStats stats;
    double node_impurity = 0.0;
    std::vector<std::uint8_t> const_mask;
    std::optional<SplitRecord> split;  // best-first mode only
    double priority = 0.0;
    index_t seq = 0;
};

Tree grow_impl(const SplitSearch& search, const GrowthParams& params) {
    const index_t n = search.Y.n_rows();
    if (n == 0) throw EmptyDataset("grow on an empty dataset");

    Tree tree;
    tree.d = search.Y.n_cols();
    tree.p = search.p();
    NodePartition part(n);

    NodeStats root_stats = make_stats(tree.d);
    for (index_t i = 0; i < n; ++i) stats_add_row(root_stats, search.Y, i, params.impurity);

    const index_t min_split = std::max<index_t>(2, params.min_samples_split);
    const bool best_first = params.max_leaves >= 2;
    const double n_total = static_cast<double>(n);

    auto make_node = [&]() {
        tree.nodes.emplace_back();
        return static_cast<index_t>(tree.nodes.size()) - 1;
    };
    // Leaf values are recomputed in ascending sample-id order rather than
    // taken from the carried sweep statistics: relabelling with the growth
    // targets is then bit-exactly idempotent, and dense and CSC growth agree
    // on leaf values whatever partition order they produced.
    auto finalize_leaf = [&](index_t node_id, const PendingNode& nd) {
        std::vector<index_t> ids(part.order.begin() + nd.start, part.order.begin() + nd.end);
        std::sort(ids.begin(), ids.end());
        NodeStats stats = make_stats(tree.d);
        for (index_t id : ids) stats_add_row(stats, search.Y, id, params.impurity);
        tree.nodes[node_id].feature = -1;
        tree.nodes[node_id].n_samples = static_cast<index_t>(stats.n);
        tree.nodes[node_id].value = leaf_value_from_stats(stats);
    };
    auto splittable = [&](const PendingNode& nd) {
        if (nd.end - nd.start < min_split) return false;
        if (params.max_depth >= 0 && nd.depth >= params.max_depth) return false;
        return nd.node_impurity > 0.0;
    };
    auto node_rng = [&](index_t node_id) {
        return Rng(mix_seed(mix_seed(params.seed, kNodeStreamTag), node_id));
    };

    if (!best_first) {
        std::deque<PendingNode> queue;
        {
            PendingNode root;
            root.node_id = make_node();
            root.start = 0;
            root.end = n;
            root.stats = root_stats;
            root.node_impurity = impurity_from_stats(root_stats, params.impurity);
            root.const_mask.assign(static_cast<std::size_t>(tree.p), 0);
            queue.push_back(std::move(root));
        }
        while (!queue.empty()) {
            PendingNode nd = std::move(queue.front());
            queue.pop_front();
            std::optional<SplitRecord> split;
            if (splittable(nd)) {
                Rng rng = node_rng(nd.node_id);
                split = search.best_split(part, nd.start, nd.end, nd.stats, nd.node_impurity,
                                          rng, &nd.const_mask);
            }
            if (!split) {
                finalize_leaf(nd.node_id, nd);
                continue;
            }
            const index_t mid = search.apply_split(part, nd.start, nd.end, *split);
            auto& node = tree.nodes[nd.node_id];
            node.feature = split->feature;
            node.threshold = split->threshold;
            node.n_samples = static_cast<index_t>(nd.stats.n);
            node.weighted_impurity_decrease = nd.stats.n / n_total * split->delta_impurity;

            PendingNode left, right;
            left.node_id = make_node();
            right.node_id = make_node();
            tree.nodes[nd.node_id].left = left.node_id;
            tree.nodes[nd.node_id].right = right.node_id;
            left.start = nd.start;
            left.end = mid;
            right.start = mid;
            right.end = nd.end;
            left.depth = right.depth = nd.depth + 1;
            left.stats = split->left_stats;
            right.stats = stats_sub(nd.stats, split->left_stats);
            left.node_impurity = impurity_from_stats(left.stats, params.impurity);
            right.node_impurity = impurity_from_stats(right.stats, params.impurity);
            left.const_mask = nd.const_mask;
            right.const_mask = std::move(nd.const_mask);
            queue.push_back(std::move(left));
            queue.push_back(std::move(right));
        }
        return tree;
    }

    // Best-first growth: nodes are expanded in order of global impurity
    // decrease until the leaf budget is exhausted.
    auto cmp = [](const PendingNode& a, const PendingNode& b) {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.seq > b.seq;  // FIFO among ties
    };
    std::priority_queue<PendingNode, std::vector<PendingNode>, decltype(cmp)> heap(cmp);
    index_t seq_counter = 0;

    auto prepare = [&](PendingNode&& nd) {
        if (splittable(nd)) {
            Rng rng = node_rng(nd.node_id);
            nd.split = search.best_split(part, nd.start, nd.end, nd.stats, nd.node_impurity,
                                         rng, &nd.const_mask);
        }
        if (!nd.split) {
            finalize_leaf(nd.node_id, nd);
            return;
        }
        nd.priority = nd.stats.n / n_total * nd.split->delta_impurity;
        nd.seq = seq_counter++;
        heap.push(std::move(nd));
    };

    {
        PendingNode root;
        root.node_id = make_node();
        root.start = 0;
        root.end = n;
        root.stats = root_stats;
        root.node_impurity = impurity_from_stats(root_stats, params.impurity);
        root.const_mask.assign(static_cast<std::size_t>(tree.p), 0);
        prepare(std::move(root));
    }

    index_t splits_left = params.max_leaves - 1;
    while (!heap.empty()) {
        PendingNode nd = std::move(const_cast<PendingNode&>(heap.top()));
        heap.pop();
        if (splits_left <= 0) {
            finalize_leaf(nd.node_id, nd);
            continue;
        }
        --splits_left;
        const SplitRecord& split = *nd.split;
        const index_t mid = search.apply_split(part, nd.start, nd.end, split);
        auto& node = tree.nodes[nd.node_id];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.n_samples = static_cast<index_t>(nd.stats.n);
        node.weighted_impurity_decrease = nd.stats.n / n_total * split.delta_impurity;

        PendingNode left, right;
        left.node_id = make_node();
        right.node_id = make_node();
        tree.nodes[nd.node_id].left = left.node_id;
        tree.nodes[nd.node_id].right = right.node_id;
        left.start = nd.start;
        left.end = mid;
        right.start = mid;
        right.end = nd.end;
        left.depth = right.depth = nd.depth + 1;
        left.stats = split.left_stats;
        right.stats = stats_sub(nd.stats, split.left_stats);
        left.node_impurity = impurity_from_stats(left.stats, params.impurity);
        right.node_impurity = impurity_from_stats(right.stats, params.impurity);
        left.const_mask = nd.const_mask;
        right.const_mask = std::move(nd.const_mask);
        prepare(std::move(left));
        prepare(std::move(right));
    }
    return tree;
}

}  // namespace

std::optional<SplitRecord> find_best_split_dense(const DenseMatrix& X, const DenseMatrix& Y,
                                                 const std::vector<index_t>& node_samples,
                                                 const GrowthParams& params, Rng& rng) {
    NodePartition part(X.n_rows());
    // Move the node's samples into a contiguous prefix.
    for (index_t i = 0; i < static_cast<index_t>(node_samples.size()); ++i)
        part.swap_positions(i, part.mapping[node_samples[i]]);
    NodeStats stats = make_stats(Y.n_cols());
    for (index_t id : node_samples) stats_add_row(stats, Y, id, params.impurity);
    SplitSearch search{&X, nullptr, Y, params};
    return search.best_split(part, 0, static_cast<index_t>(node_samples.size()), stats,
                             impurity_from_stats(stats, params.impurity), rng, nullptr);
}

std::optional<SplitRecord> find_best_split_sparse(const CscMatrix& X, const DenseMatrix& Y,
                                                  NodePartition& part, index_t start,
                                                  index_t end, const GrowthParams& params,
                                                  Rng& rng) {
    NodeStats stats = make_stats(Y.n_cols());
    for (index_t i = start; i < end; ++i) stats_add_row(stats, Y, part.order[i], params.impurity);
    SplitSearch search{nullptr, &X, Y, params};
    return search.best_split(part, start, end, stats,
                             impurity_from_stats(stats, params.impurity), rng, nullptr);
}

Tree grow(const DenseMatrix& X, const DenseMatrix& Y, const GrowthParams& params) {
    if (X.n_rows() != Y.n_rows()) throw ShapeError("grow: X and Y row counts differ");
    SplitSearch search{&X, nullptr, Y, params};
    return grow_impl(search, params);
}

Tree grow(const CscMatrix& X, const DenseMatrix& Y, const GrowthParams& params) {
    if (X.n_rows != Y.n_rows()) throw ShapeError("grow: X and Y row counts differ");
    SplitSearch search{nullptr, &X, Y, params};
    return grow_impl(search, params);
}

Tree relabel_leaves(const Tree& tree, const DenseMatrix& X, const DenseMatrix& Y_original) {
    Tree out = tree;
    out.d = Y_original.n_cols();
    const index_t n = X.n_rows();
    if (n != Y_original.n_rows()) throw ShapeError("relabel: X and Y row counts differ");
    std::vector<NodeStats> stats(out.nodes.size(), make_stats(out.d));
    for (index_t i = 0; i < n; ++i) {
        const index_t leaf = tree.leaf_for_row(X, i);
        stats_add_row(stats[leaf], Y_original, i, ImpurityKind::Variance);
    }
    for (std::size_t t = 0; t < out.nodes.size(); ++t) {
        if (!out.nodes[t].is_leaf()) {
            out.nodes[t].value.clear();
            continue;
        }
        if (stats[t].n <= 0.0) throw RelabelError("leaf reached by no relabelling sample");
        out.nodes[t].value = leaf_value_from_stats(stats[t]);
        out.nodes[t].n_samples = static_cast<index_t>(stats[t].n);
    }
    return out;
}

Tree relabel_leaves(const Tree& tree, const CsrMatrix& X, const DenseMatrix& Y_original) {
    Tree out = tree;
    out.d = Y_original.n_cols();
    if (X.n_rows != Y_original.n_rows()) throw ShapeError("relabel: X and Y row counts differ");
    std::vector<NodeStats> stats(out.nodes.size(), make_stats(out.d));
    std::vector<index_t> nz_mask(static_cast<std::size_t>(X.n_cols), -1);
    std::vector<double> nz_value(static_cast<std::size_t>(X.n_cols), 0.0);
    for (index_t i = 0; i < X.n_rows; ++i) {
        for (index_t k = X.indptr[i]; k < X.indptr[i + 1]; ++k) {
            nz_mask[X.indices[k]] = i;
            nz_value[X.indices[k]] = X.data[k];
        }
        index_t t = 0;
        while (!tree.nodes[t].is_leaf()) {
            const index_t f = tree.nodes[t].feature;
            const double v = nz_mask[f] == i ? nz_value[f] : 0.0;
            t = v <= tree.nodes[t].threshold ? tree.nodes[t].left : tree.nodes[t].right;
        }
        stats_add_row(stats[t], Y_original, i, ImpurityKind::Variance);
    }
    for (std::size_t t = 0; t < out.nodes.size(); ++t) {
        if (!out.nodes[t].is_leaf()) {
            out.nodes[t].value.clear();
            continue;
        }
        if (stats[t].n <= 0.0) throw RelabelError("leaf reached by no relabelling sample");
        out.nodes[t].value = leaf_value_from_stats(stats[t]);
        out.nodes[t].n_samples = static_cast<index_t>(stats[t].n);
    }
    return out;
}

DenseMatrix predict_dense(const Tree& tree, const DenseMatrix& X) {
    if (X.n_cols() < tree.p) throw ShapeError("predict: fewer input columns than tree features");
    DenseMatrix out(X.n_rows(), tree.d);
    for (index_t i = 0; i < X.n_rows(); ++i) {
        const index_t leaf = tree.leaf_for_row(X, i);
        for (index_t j = 0; j < tree.d; ++j) out(i, j) = tree.nodes[leaf].value[j];
    }
    return out;
}

DenseMatrix predict_csr(const Tree& tree, const CsrMatrix& X) {
    if (X.n_cols < tree.p) throw ShapeError("predict: fewer input columns than tree features");
    DenseMatrix out(X.n_rows, tree.d);
    // Row-id stamps avoid clearing the scratch arrays between rows.
    std::vector<index_t> nz_mask(static_cast<std::size_t>(X.n_cols), -1);
    std::vector<double> nz_value(static_cast<std::size_t>(X.n_cols), 0.0);
    for (index_t i = 0; i < X.n_rows; ++i) {
        for (index_t k = X.indptr[i]; k < X.indptr[i + 1]; ++k) {
            nz_mask[X.indices[k]] = i;
            nz_value[X.indices[k]] = X.data[k];
        }
        index_t t = 0;
        while (!tree.nodes[t].is_leaf()) {
            const index_t f = tree.nodes[t].feature;
            const double v = nz_mask[f] == i ? nz_value[f] : 0.0;
            t = v <= tree.nodes[t].threshold ? tree.nodes[t].left : tree.nodes[t].right;
        }
        for (index_t j = 0; j < tree.d; ++j) out(i, j) = tree.nodes[t].value[j];
    }
    return out;
}

std::vector<double> mdi_importances(const Tree& tree) {
    std::vector<double> out(static_cast<std::size_t>(tree.p), 0.0);
    double total = 0.0;
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) continue;
        out[node.feature] += node.weighted_impurity_decrease;
        total += node.weighted_impurity_decrease;
    }
    if (total > 0.0)
        for (double& v : out) v /= total;
    return out;
}

}  // namespace rpt
