#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rptrees/datasets.hpp"
#include "rptrees/projections.hpp"
#include "rptrees/tree.hpp"

namespace rpt {

enum class LossKind { Square, Absolute, Logistic, L2Multi, L1Multi, LogisticMulti };

struct Loss {
    LossKind kind = LossKind::Square;
    index_t d = 1;
};

bool loss_is_logistic(LossKind k);

// Total loss over the sample; multi-output kinds sum over outputs.
double loss_value(const Loss& loss, const DenseMatrix& Y, const DenseMatrix& F);
// d(loss)/d(prediction), one row per sample.
DenseMatrix loss_gradient(const Loss& loss, const DenseMatrix& Y, const DenseMatrix& F);
// Per-output constant minimizer; absent logistic classes are clamped to a
// count of 0.5 to keep the log-odds finite.
std::vector<double> constant_minimizer(const Loss& loss, const DenseMatrix& Y);

enum class GBMode { SingleTarget, MultiOutput, Rpo, RelabelRpo };

struct GBStage {
    Tree tree;                 // weak model: d-output (mo / relabel-rpo) or 1-output
    std::vector<double> rho;   // length d, pre-learning-rate step vector
    // Projection metadata (prediction never needs it; rho is refit in the
    // original space): chosen output ids for subsample projections, or the
    // dense q x d matrix flattened row-major.
    std::vector<index_t> subsampled;
    std::vector<double> phi;
    index_t phi_q = 0;
};

struct GBModel {
    std::vector<double> rho0;  // initial constant, length d
    std::vector<GBStage> stages;
    double mu = 1.0;
    Loss loss;
    GBMode mode = GBMode::SingleTarget;
    index_t d = 1;
};

struct BoostParams {
    index_t n_stages = 100;
    double mu = 0.1;
    Loss loss;
    GrowthParams weak;  // weak trees always grow with variance impurity
    ProjectionKind projection = ProjectionKind::subsample();
    index_t q = 1;  // relabel-rpo only; rpo forces q = 1
    std::uint64_t seed = 0;
};

// Single-target gradient boosting. With d > 1 one weak model is fitted per
// stage in a round-robin sweep over the outputs.
GBModel fit_gb(const Dataset& ds, const BoostParams& params);
// One multi-output tree per stage on the full gradient matrix.
GBModel fit_gbmort(const Dataset& ds, const BoostParams& params);
// One single-output tree per stage on a random 1 x d projection of the
// gradients; rho couples the shared weak model to every output.
GBModel fit_gbrt_rpo(const Dataset& ds, const BoostParams& params);
// Tree grown on a q x d projection of the gradients, leaves relabelled with
// the unprojected mean gradients before the rho optimization.
GBModel fit_gbrt_relabel_rpo(const Dataset& ds, const BoostParams& params);

enum class RhoMode { PerOutput, Broadcast };

// Independent per-output step lengths: closed form for square losses,
// bracketed scalar minimization otherwise. `weak_outputs` is n x d for
// PerOutput and n x 1 for Broadcast.
std::vector<double> line_search_rho(const Loss& loss, const DenseMatrix& Y,
                                    const DenseMatrix& F_prev, const DenseMatrix& weak_outputs,
                                    RhoMode mode);

DenseMatrix predict_gb(const GBModel& model, const DenseMatrix& X);
// Training loss replayed along the additive expansion; index 0 is the
// constant model.
std::vector<double> staged_training_loss(const GBModel& model, const Dataset& ds);

// Minimizes a scalar convex function by golden-section with parabolic
// acceleration, bracket expanded geometrically from [-1, 1].
double minimize_scalar(const std::function<double(double)>& f, double tol = 1e-8,
                       int max_iter = 100);

}  // namespace rpt
