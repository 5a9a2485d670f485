#include "rptrees/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rpt {

ProjectionMatrix sample_projection(ProjectionKind kind, index_t q, index_t d, Rng& rng) {
    if (q < 1) throw InvalidProjection("projection dimension q must be >= 1");
    ProjectionMatrix out;
    out.kind = kind;
    out.q = q;
    out.d = d;
    switch (kind.variant) {
        case ProjectionVariant::Gaussian: {
            out.dense = DenseMatrix(q, d);
            const double sd = 1.0 / std::sqrt(static_cast<double>(q));
            for (index_t i = 0; i < q; ++i)
                for (index_t j = 0; j < d; ++j) out.dense(i, j) = sd * rng.normal();
            break;
        }
        case ProjectionVariant::Rademacher: {
            if (kind.s < 1.0) throw InvalidProjection("rademacher sparsity s must be >= 1");
            out.dense = DenseMatrix(q, d);
            const double mag = std::sqrt(kind.s / static_cast<double>(q));
            const double p_nonzero = 1.0 / kind.s;
            for (index_t i = 0; i < q; ++i)
                for (index_t j = 0; j < d; ++j) {
                    const double u = rng.uniform01();
                    if (u < 0.5 * p_nonzero)
                        out.dense(i, j) = mag;
                    else if (u < p_nonzero)
                        out.dense(i, j) = -mag;
                }
            break;
        }
        case ProjectionVariant::OutputSubsample: {
            if (q > d) throw InvalidProjection("subsample projection requires q <= d");
            // q distinct identity rows, uniform without replacement.
            std::vector<index_t> pool(d);
            std::iota(pool.begin(), pool.end(), 0);
            for (index_t i = 0; i < q; ++i)
                std::swap(pool[i], pool[i + rng.uniform_int(d - i)]);
            out.rows.assign(pool.begin(), pool.begin() + q);
            break;
        }
    }
    return out;
}

DenseMatrix project(const ProjectionMatrix& phi, const DenseMatrix& Y) {
    if (Y.n_cols() != phi.d) throw ShapeError("project: Y.n_cols must equal phi.d");
    const index_t n = Y.n_rows();
    DenseMatrix out(n, phi.q);
    if (phi.is_subsample()) {
        for (index_t i = 0; i < n; ++i)
            for (index_t r = 0; r < phi.q; ++r) out(i, r) = Y(i, phi.rows[r]);
        return out;
    }
    for (index_t i = 0; i < n; ++i)
        for (index_t r = 0; r < phi.q; ++r) {
            double acc = 0.0;
            for (index_t j = 0; j < phi.d; ++j) acc += phi.dense(r, j) * Y(i, j);
            out(i, r) = acc;
        }
    return out;
}

index_t jl_min_dimension(double epsilon, index_t n) {
    const double q = 8.0 / (epsilon * epsilon) * std::log(static_cast<double>(n));
    return std::max<index_t>(1, static_cast<index_t>(std::ceil(q)));
}

DistortionStats distortion_stats(const DenseMatrix& Y, const ProjectionMatrix& phi,
                                 index_t sample_pairs, Rng& rng) {
    const index_t n = Y.n_rows();
    const DenseMatrix P = project(phi, Y);
    DistortionStats stats;
    double total = 0.0;
    for (index_t k = 0; k < sample_pairs; ++k) {
        const index_t i = rng.uniform_int(n);
        index_t j = rng.uniform_int(n - 1);
        if (j >= i) ++j;
        double d_orig = 0.0;
        for (index_t c = 0; c < Y.n_cols(); ++c) {
            const double diff = Y(i, c) - Y(j, c);
            d_orig += diff * diff;
        }
        if (d_orig == 0.0) continue;
        double d_proj = 0.0;
        for (index_t c = 0; c < P.n_cols(); ++c) {
            const double diff = P(i, c) - P(j, c);
            d_proj += diff * diff;
        }
        const double distortion = std::abs(d_proj / d_orig - 1.0);
        total += distortion;
        stats.max = std::max(stats.max, distortion);
        ++stats.pairs_used;
    }
    stats.mean = stats.pairs_used > 0 ? total / static_cast<double>(stats.pairs_used) : 0.0;
    return stats;
}

double total_variance(const DenseMatrix& Y) {
    const index_t n = Y.n_rows(), d = Y.n_cols();
    double out = 0.0;
    for (index_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (index_t i = 0; i < n; ++i) mean += Y(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (index_t i = 0; i < n; ++i) {
            const double c = Y(i, j) - mean;
            ss += c * c;
        }
        out += ss / static_cast<double>(n);
    }
    return out;
}

double total_variance_pairwise(const DenseMatrix& Y) {
    const index_t n = Y.n_rows(), d = Y.n_cols();
    double acc = 0.0;
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < n; ++j) {
            double dist = 0.0;
            for (index_t c = 0; c < d; ++c) {
                const double diff = Y(i, c) - Y(j, c);
                dist += diff * diff;
            }
            acc += dist;
        }
    return acc / (2.0 * static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace rpt
