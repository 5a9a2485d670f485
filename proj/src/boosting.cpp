#include "rptrees/boosting.hpp"

#include <algorithm>
#include <cmath>

namespace rpt {

bool loss_is_logistic(LossKind k) {
    return k == LossKind::Logistic || k == LossKind::LogisticMulti;
}

namespace {

bool loss_is_square(LossKind k) { return k == LossKind::Square || k == LossKind::L2Multi; }
bool loss_is_absolute(LossKind k) { return k == LossKind::Absolute || k == LossKind::L1Multi; }

// log(1 + exp(-2 y y')) without overflow.
double logistic_value(double y, double f) {
    const double t = 2.0 * y * f;
    return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// d/df log(1 + exp(-2 y f)) = -2y / (1 + exp(2 y f))
double logistic_grad(double y, double f) {
    const double t = 2.0 * y * f;
    if (t > 0.0) {
        const double e = std::exp(-t);
        return -2.0 * y * e / (1.0 + e);
    }
    return -2.0 * y / (1.0 + std::exp(t));
}

double scalar_loss(LossKind kind, double y, double f) {
    if (loss_is_square(kind)) {
        const double r = y - f;
        return 0.5 * r * r;
    }
    if (loss_is_absolute(kind)) return std::abs(y - f);
    return logistic_value(y, f);
}

double scalar_grad(LossKind kind, double y, double f) {
    if (loss_is_square(kind)) return -(y - f);
    if (loss_is_absolute(kind)) {
        const double r = y - f;
        return r > 0.0 ? -1.0 : (r < 0.0 ? 1.0 : 0.0);
    }
    return logistic_grad(y, f);
}

void check_targets(const Loss& loss, const DenseMatrix& Y) {
    if (!loss_is_logistic(loss.kind)) return;
    for (double v : Y.values())
        if (v != 1.0 && v != -1.0)
            throw InvalidTarget("logistic losses require targets in {-1, +1}");
}

}  // namespace

double loss_value(const Loss& loss, const DenseMatrix& Y, const DenseMatrix& F) {
    if (Y.n_rows() != F.n_rows() || Y.n_cols() != F.n_cols())
        throw ShapeError("loss_value: shape mismatch");
    check_targets(loss, Y);
    double total = 0.0;
    for (index_t i = 0; i < Y.n_rows(); ++i)
        for (index_t j = 0; j < Y.n_cols(); ++j)
            total += scalar_loss(loss.kind, Y(i, j), F(i, j));
    return total;
}

DenseMatrix loss_gradient(const Loss& loss, const DenseMatrix& Y, const DenseMatrix& F) {
    if (Y.n_rows() != F.n_rows() || Y.n_cols() != F.n_cols())
        throw ShapeError("loss_gradient: shape mismatch");
    check_targets(loss, Y);
    DenseMatrix G(Y.n_rows(), Y.n_cols());
    for (index_t i = 0; i < Y.n_rows(); ++i)
        for (index_t j = 0; j < Y.n_cols(); ++j)
            G(i, j) = scalar_grad(loss.kind, Y(i, j), F(i, j));
    return G;
}

std::vector<double> constant_minimizer(const Loss& loss, const DenseMatrix& Y) {
    check_targets(loss, Y);
    const index_t n = Y.n_rows(), d = Y.n_cols();
    if (n == 0) throw EmptyDataset("constant_minimizer on an empty sample");
    std::vector<double> out(static_cast<std::size_t>(d));
    for (index_t j = 0; j < d; ++j) {
        if (loss_is_square(loss.kind)) {
            double s = 0.0;
            for (index_t i = 0; i < n; ++i) s += Y(i, j);
            out[j] = s / static_cast<double>(n);
        } else if (loss_is_absolute(loss.kind)) {
            std::vector<double> col(static_cast<std::size_t>(n));
            for (index_t i = 0; i < n; ++i) col[i] = Y(i, j);
            std::sort(col.begin(), col.end());
            out[j] = n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
        } else {
            double n_pos = 0.0, n_neg = 0.0;
            for (index_t i = 0; i < n; ++i) (Y(i, j) > 0.0 ? n_pos : n_neg) += 1.0;
            // Additive smoothing keeps the log-odds finite with an absent class.
            n_pos = std::max(n_pos, 0.5);
            n_neg = std::max(n_neg, 0.5);
            out[j] = std::log(n_pos / n_neg);
        }
    }
    return out;
}

double minimize_scalar(const std::function<double(double)>& f, double tol, int max_iter) {
    constexpr double kCap = 1e6;
    double a = -1.0, b = 1.0, x = 0.0;
    double fa = f(a), fb = f(b), fx = f(x);
    // Expand the bracket geometrically until the best point is interior.
    while (fx > fa || fx > fb) {
        if (fa < fb) {
            if (a <= -kCap) return a;
            b = x;
            fb = fx;
            x = a;
            fx = fa;
            a = std::max(2.0 * a, -kCap);
            fa = f(a);
        } else {
            if (b >= kCap) return b;
            a = x;
            fa = fx;
            x = b;
            fx = fb;
            b = std::min(2.0 * b, kCap);
            fb = f(b);
        }
    }

    // Brent: golden-section with parabolic acceleration.
    constexpr double kGold = 0.3819660112501051;
    double w = x, v = x, fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double xm = 0.5 * (a + b);
        const double tol1 = tol * std::abs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
        bool golden = true;
        if (std::abs(e) > tol1) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double etemp = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = x < xm ? tol1 : -tol1;
                golden = false;
            }
        }
        if (golden) {
            e = x >= xm ? a - x : b - x;
            d = kGold * e;
        }
        const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u >= x)
                a = x;
            else
                b = x;
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return x;
}

namespace {

// Step length for one output given a direction vector; falls back to 0
// whenever the step would not decrease that output's loss.
double rho_for_output(const Loss& loss, const DenseMatrix& Y, const DenseMatrix& F_prev,
                      index_t j, const DenseMatrix& weak, index_t weak_col) {
    const index_t n = Y.n_rows();
    if (loss_is_square(loss.kind)) {
        // Least-squares minimizer: sum(r * g) / sum(g^2).
        double num = 0.0, den = 0.0;
        for (index_t i = 0; i < n; ++i) {
            const double g = weak(i, weak_col);
            num += (Y(i, j) - F_prev(i, j)) * g;
            den += g * g;
        }
        return den > 0.0 ? num / den : 0.0;
    }
    auto objective = [&](double rho) {
        double total = 0.0;
        for (index_t i = 0; i < n; ++i)
            total += scalar_loss(loss.kind, Y(i, j), F_prev(i, j) + rho * weak(i, weak_col));
        return total;
    };
    const double rho = minimize_scalar(objective);
    return objective(rho) <= objective(0.0) ? rho : 0.0;
}

}  // namespace

std::vector<double> line_search_rho(const Loss& loss, const DenseMatrix& Y,
                                    const DenseMatrix& F_prev, const DenseMatrix& weak_outputs,
                                    RhoMode mode) {
    const index_t d = Y.n_cols();
    if (mode == RhoMode::PerOutput && weak_outputs.n_cols() != d)
        throw ShapeError("line_search_rho: per-output mode needs d weak columns");
    if (mode == RhoMode::Broadcast && weak_outputs.n_cols() != 1)
        throw ShapeError("line_search_rho: broadcast mode needs one weak column");
    std::vector<double> rho(static_cast<std::size_t>(d));
    for (index_t j = 0; j < d; ++j)
        rho[j] = rho_for_output(loss, Y, F_prev, j, weak_outputs,
                                mode == RhoMode::Broadcast ? 0 : j);
    return rho;
}

namespace {

constexpr std::uint64_t kTreeTag = 0x74726565;
constexpr std::uint64_t kProjTag = 0x70726f6a;

struct FitContext {
    const Dataset& ds;
    const BoostParams& params;
    std::optional<CsrMatrix> csr;  // train-time CSR view for weak predictions

    explicit FitContext(const Dataset& d_, const BoostParams& p_) : ds(d_), params(p_) {
        if (ds.sparse()) csr = csc_to_csr(ds.csc_x());
    }

    Tree grow_weak(const DenseMatrix& target, std::uint64_t stage_seed) const {
        GrowthParams weak = params.weak;
        weak.impurity = ImpurityKind::Variance;
        weak.seed = mix_seed(stage_seed, kTreeTag);
        return ds.sparse() ? grow(ds.csc_x(), target, weak) : grow(ds.dense_x(), target, weak);
    }

    DenseMatrix predict_weak(const Tree& tree) const {
        return ds.sparse() ? predict_csr(tree, *csr) : predict_dense(tree, ds.dense_x());
    }

    Tree relabel(const Tree& tree, const DenseMatrix& R) const {
        return ds.sparse() ? relabel_leaves(tree, *csr, R) : relabel_leaves(tree, ds.dense_x(), R);
    }
};

DenseMatrix negate(const DenseMatrix& G) {
    DenseMatrix R(G.n_rows(), G.n_cols());
    for (std::size_t i = 0; i < G.values().size(); ++i) R.values()[i] = -G.values()[i];
    return R;
}

GBModel init_model(const Dataset& ds, const BoostParams& params, GBMode mode) {
    if (ds.n() == 0) throw EmptyDataset("boosting fit on an empty dataset");
    GBModel model;
    model.mu = params.mu;
    model.loss = params.loss;
    model.loss.d = ds.d();
    model.mode = mode;
    model.d = ds.d();
    model.rho0 = constant_minimizer(model.loss, ds.Y);
    return model;
}

DenseMatrix constant_prediction(const std::vector<double>& rho0, index_t n) {
    DenseMatrix F(n, static_cast<index_t>(rho0.size()));
    for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < F.n_cols(); ++j) F(i, j) = rho0[j];
    return F;
}

void apply_stage(DenseMatrix& F, const GBStage& stage, const DenseMatrix& weak, double mu) {
    const bool broadcast = weak.n_cols() == 1;
    for (index_t i = 0; i < F.n_rows(); ++i)
        for (index_t j = 0; j < F.n_cols(); ++j)
            F(i, j) += mu * stage.rho[j] * weak(i, broadcast ? 0 : j);
}

}  // namespace

GBModel fit_gb(const Dataset& ds, const BoostParams& params) {
    GBModel model = init_model(ds, params, GBMode::SingleTarget);
    FitContext ctx(ds, params);
    DenseMatrix F = constant_prediction(model.rho0, ds.n());
    const index_t d = ds.d();
    for (index_t m = 0; m < params.n_stages; ++m) {
        const std::uint64_t stage_seed = mix_seed(params.seed, m + 1);
        const index_t j = m % d;  // round-robin over outputs
        const DenseMatrix G = loss_gradient(model.loss, ds.Y, F);
        DenseMatrix target(ds.n(), 1);
        for (index_t i = 0; i < ds.n(); ++i) target(i, 0) = -G(i, j);
        GBStage stage;
        stage.tree = ctx.grow_weak(target, stage_seed);
        const DenseMatrix weak = ctx.predict_weak(stage.tree);
        stage.rho.assign(static_cast<std::size_t>(d), 0.0);
        stage.rho[j] = rho_for_output(model.loss, ds.Y, F, j, weak, 0);
        for (index_t i = 0; i < ds.n(); ++i) F(i, j) += params.mu * stage.rho[j] * weak(i, 0);
        model.stages.push_back(std::move(stage));
    }
    return model;
}

GBModel fit_gbmort(const Dataset& ds, const BoostParams& params) {
    GBModel model = init_model(ds, params, GBMode::MultiOutput);
    FitContext ctx(ds, params);
    DenseMatrix F = constant_prediction(model.rho0, ds.n());
    for (index_t m = 0; m < params.n_stages; ++m) {
        const std::uint64_t stage_seed = mix_seed(params.seed, m + 1);
        const DenseMatrix R = negate(loss_gradient(model.loss, ds.Y, F));
        GBStage stage;
        stage.tree = ctx.grow_weak(R, stage_seed);
        const DenseMatrix weak = ctx.predict_weak(stage.tree);
        stage.rho = line_search_rho(model.loss, ds.Y, F, weak, RhoMode::PerOutput);
        apply_stage(F, stage, weak, params.mu);
        model.stages.push_back(std::move(stage));
    }
    return model;
}

GBModel fit_gbrt_rpo(const Dataset& ds, const BoostParams& params) {
    GBModel model = init_model(ds, params, GBMode::Rpo);
    FitContext ctx(ds, params);
    DenseMatrix F = constant_prediction(model.rho0, ds.n());
    for (index_t m = 0; m < params.n_stages; ++m) {
        const std::uint64_t stage_seed = mix_seed(params.seed, m + 1);
        Rng proj_rng(mix_seed(stage_seed, kProjTag));
        const ProjectionMatrix phi =
            sample_projection(params.projection, 1, ds.d(), proj_rng);
        const DenseMatrix R = negate(loss_gradient(model.loss, ds.Y, F));
        const DenseMatrix target = project(phi, R);
        GBStage stage;
        stage.tree = ctx.grow_weak(target, stage_seed);
        if (phi.is_subsample()) {
            stage.subsampled = phi.rows;
        } else {
            stage.phi = phi.dense.values();
            stage.phi_q = 1;
        }
        const DenseMatrix weak = ctx.predict_weak(stage.tree);
        stage.rho = line_search_rho(model.loss, ds.Y, F, weak, RhoMode::Broadcast);
        apply_stage(F, stage, weak, params.mu);
        model.stages.push_back(std::move(stage));
    }
    return model;
}

GBModel fit_gbrt_relabel_rpo(const Dataset& ds, const BoostParams& params) {
    GBModel model = init_model(ds, params, GBMode::RelabelRpo);
    FitContext ctx(ds, params);
    DenseMatrix F = constant_prediction(model.rho0, ds.n());
    for (index_t m = 0; m < params.n_stages; ++m) {
        const std::uint64_t stage_seed = mix_seed(params.seed, m + 1);
        Rng proj_rng(mix_seed(stage_seed, kProjTag));
        const ProjectionMatrix phi =
            sample_projection(params.projection, params.q, ds.d(), proj_rng);
        const DenseMatrix R = negate(loss_gradient(model.loss, ds.Y, F));
        const DenseMatrix target = project(phi, R);
        GBStage stage;
        stage.tree = ctx.relabel(ctx.grow_weak(target, stage_seed), R);
        if (phi.is_subsample()) {
            stage.subsampled = phi.rows;
        } else {
            stage.phi = phi.dense.values();
            stage.phi_q = params.q;
        }
        const DenseMatrix weak = ctx.predict_weak(stage.tree);
        stage.rho = line_search_rho(model.loss, ds.Y, F, weak, RhoMode::PerOutput);
        apply_stage(F, stage, weak, params.mu);
        model.stages.push_back(std::move(stage));
    }
    return model;
}

DenseMatrix predict_gb(const GBModel& model, const DenseMatrix& X) {
    DenseMatrix F = constant_prediction(model.rho0, X.n_rows());
    for (const auto& stage : model.stages)
        apply_stage(F, stage, predict_dense(stage.tree, X), model.mu);
    return F;
}

std::vector<double> staged_training_loss(const GBModel& model, const Dataset& ds) {
    const DenseMatrix X = ds.sparse() ? densify(ds.csc_x()) : ds.dense_x();
    DenseMatrix F = constant_prediction(model.rho0, ds.n());
    std::vector<double> losses;
    losses.push_back(loss_value(model.loss, ds.Y, F));
    for (const auto& stage : model.stages) {
        apply_stage(F, stage, predict_dense(stage.tree, X), model.mu);
        losses.push_back(loss_value(model.loss, ds.Y, F));
    }
    return losses;
}

}  // namespace rpt
