#pragma once

#include <cstdint>
#include <vector>

#include "rptrees/matrix.hpp"
#include "rptrees/rng.hpp"

namespace rpt {

enum class ProjectionVariant { Gaussian, Rademacher, OutputSubsample };

struct ProjectionKind {
    ProjectionVariant variant = ProjectionVariant::Gaussian;
    // Sparsity control for the Rademacher family: s = 1 is the dense +/-1
    // scheme, s = 3 the Achlioptas scheme, s = sqrt(d) the sparse scheme.
    double s = 1.0;

    static ProjectionKind gaussian() { return {ProjectionVariant::Gaussian, 1.0}; }
    static ProjectionKind rademacher(double s) { return {ProjectionVariant::Rademacher, s}; }
    static ProjectionKind subsample() { return {ProjectionVariant::OutputSubsample, 1.0}; }
};

// A q x d random projection of the output space. Subsample projections are
// stored as the chosen identity rows, everything else as a dense matrix.
struct ProjectionMatrix {
    ProjectionKind kind;
    index_t q = 0;
    index_t d = 0;
    DenseMatrix dense;                // q x d unless subsample
    std::vector<index_t> rows;        // subsample only: chosen output indices

    bool is_subsample() const { return kind.variant == ProjectionVariant::OutputSubsample; }
};

ProjectionMatrix sample_projection(ProjectionKind kind, index_t q, index_t d, Rng& rng);

// Row i of the result is phi * y^i.
DenseMatrix project(const ProjectionMatrix& phi, const DenseMatrix& Y);

// Smallest q with q >= 8 eps^-2 ln n, clamped to >= 1.
index_t jl_min_dimension(double epsilon, index_t n);

struct DistortionStats {
    double mean = 0.0;
    double max = 0.0;
    index_t pairs_used = 0;
};

// Relative squared-distance distortion |d_proj/d_orig - 1| over randomly
// sampled pairs; zero-distance pairs are skipped.
DistortionStats distortion_stats(const DenseMatrix& Y, const ProjectionMatrix& phi,
                                 index_t sample_pairs, Rng& rng);

// Trace of the covariance (variance summed over dimensions).
double total_variance(const DenseMatrix& Y);
// Same quantity through the pairwise-distance identity (1/2n^2) sum ||yi-yj||^2.
double total_variance_pairwise(const DenseMatrix& Y);

}  // namespace rpt
