#include "rptrees/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rptrees/error.hpp"

namespace rpt {

namespace {
void check_shapes(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
        throw ShapeError("metric inputs must have equal shapes");
}
}  // namespace

Confusion confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) throw ShapeError("confusion: length mismatch");
    Confusion c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] > 0)
            (y_pred[i] > 0 ? c.tp : c.fn) += 1;
        else
            (y_pred[i] > 0 ? c.fp : c.tn) += 1;
    }
    return c;
}

namespace {
double safe_ratio(index_t num, index_t den, bool& degenerate) {
    if (den == 0) {
        degenerate = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

BinaryMetrics binary_metrics(const Confusion& c) {
    BinaryMetrics m;
    const index_t n = c.tp + c.tn + c.fp + c.fn;
    m.accuracy = safe_ratio(c.tp + c.tn, n, m.degenerate);
    m.error_rate = 1.0 - m.accuracy;
    m.tpr = safe_ratio(c.tp, c.tp + c.fn, m.degenerate);
    m.tnr = safe_ratio(c.tn, c.tn + c.fp, m.degenerate);
    m.fnr = 1.0 - m.tpr;
    m.fpr = 1.0 - m.tnr;
    m.precision = safe_ratio(c.tp, c.tp + c.fp, m.degenerate);
    m.balanced_accuracy = 0.5 * (m.tpr + m.tnr);
    m.f1 = (m.precision + m.tpr) > 0.0 ? 2.0 * m.precision * m.tpr / (m.precision + m.tpr) : 0.0;
    return m;
}

double subset_accuracy(const DenseMatrix& Y, const DenseMatrix& Yhat) {
    check_shapes(Y, Yhat);
    index_t hits = 0;
    for (index_t i = 0; i < Y.n_rows(); ++i) {
        bool equal = true;
        for (index_t j = 0; j < Y.n_cols(); ++j)
            if ((Y(i, j) != 0.0) != (Yhat(i, j) != 0.0)) {
                equal = false;
                break;
            }
        hits += equal;
    }
    return static_cast<double>(hits) / static_cast<double>(Y.n_rows());
}

double hamming_loss(const DenseMatrix& Y, const DenseMatrix& Yhat) {
    check_shapes(Y, Yhat);
    index_t diff = 0;
    for (index_t i = 0; i < Y.n_rows(); ++i)
        for (index_t j = 0; j < Y.n_cols(); ++j)
            diff += (Y(i, j) != 0.0) != (Yhat(i, j) != 0.0);
    return static_cast<double>(diff) /
           (static_cast<double>(Y.n_rows()) * static_cast<double>(Y.n_cols()));
}

double jaccard(const DenseMatrix& Y, const DenseMatrix& Yhat) {
    check_shapes(Y, Yhat);
    double total = 0.0;
    for (index_t i = 0; i < Y.n_rows(); ++i) {
        index_t inter = 0, uni = 0;
        for (index_t j = 0; j < Y.n_cols(); ++j) {
            const bool a = Y(i, j) != 0.0, b = Yhat(i, j) != 0.0;
            inter += a && b;
            uni += a || b;
        }
        total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return total / static_cast<double>(Y.n_rows());
}

double one_error(const DenseMatrix& Y, const DenseMatrix& F) {
    check_shapes(Y, F);
    index_t errors = 0;
    for (index_t i = 0; i < Y.n_rows(); ++i) {
        index_t best = 0;
        for (index_t j = 1; j < Y.n_cols(); ++j)
            if (F(i, j) > F(i, best)) best = j;  // ties: lowest index
        errors += Y(i, best) == 0.0;
    }
    return static_cast<double>(errors) / static_cast<double>(Y.n_rows());
}

double coverage_error(const DenseMatrix& Y, const DenseMatrix& F) {
    check_shapes(Y, F);
    double total = 0.0;
    for (index_t i = 0; i < Y.n_rows(); ++i) {
        index_t worst = 0;
        for (index_t j = 0; j < Y.n_cols(); ++j) {
            if (Y(i, j) == 0.0) continue;
            index_t rank = 0;
            for (index_t k = 0; k < Y.n_cols(); ++k) rank += F(i, k) >= F(i, j);
            worst = std::max(worst, rank);
        }
        total += static_cast<double>(worst);
    }
    return total / static_cast<double>(Y.n_rows());
}

double ranking_loss(const DenseMatrix& Y, const DenseMatrix& F) {
    check_shapes(Y, F);
    double total = 0.0;
    index_t used = 0;
    for (index_t i = 0; i < Y.n_rows(); ++i) {
        index_t n_pos = 0;
        for (index_t j = 0; j < Y.n_cols(); ++j) n_pos += Y(i, j) != 0.0;
        const index_t n_neg = Y.n_cols() - n_pos;
        if (n_pos == 0 || n_neg == 0) continue;  // undefined denominator
        index_t wrong = 0;
        for (index_t k = 0; k < Y.n_cols(); ++k) {
            if (Y(i, k) == 0.0) continue;
            for (index_t l = 0; l < Y.n_cols(); ++l) {
                if (Y(i, l) != 0.0) continue;
                wrong += F(i, k) < F(i, l);
            }
        }
        total += static_cast<double>(wrong) /
                 (static_cast<double>(n_pos) * static_cast<double>(n_neg));
        ++used;
    }
    return used > 0 ? total / static_cast<double>(used) : 0.0;
}

LrapResult lrap(const DenseMatrix& Y, const DenseMatrix& F) {
    check_shapes(Y, F);
    LrapResult out;
    double total = 0.0;
    index_t used = 0;
    for (index_t i = 0; i < Y.n_rows(); ++i) {
        index_t n_pos = 0;
        for (index_t j = 0; j < Y.n_cols(); ++j) n_pos += Y(i, j) != 0.0;
        if (n_pos == 0) {
            ++out.skipped_samples;
            continue;
        }
        double sample = 0.0;
        for (index_t j = 0; j < Y.n_cols(); ++j) {
            if (Y(i, j) == 0.0) continue;
            index_t true_higher = 0, all_higher = 0;
            for (index_t k = 0; k < Y.n_cols(); ++k) {
                if (F(i, k) >= F(i, j)) {
                    ++all_higher;
                    true_higher += Y(i, k) != 0.0;
                }
            }
            sample += static_cast<double>(true_higher) / static_cast<double>(all_higher);
        }
        total += sample / static_cast<double>(n_pos);
        ++used;
    }
    out.value = used > 0 ? total / static_cast<double>(used) : 0.0;
    return out;
}

DenseMatrix threshold_scores(const DenseMatrix& F, double tau) {
    DenseMatrix out(F.n_rows(), F.n_cols());
    for (index_t i = 0; i < F.n_rows(); ++i)
        for (index_t j = 0; j < F.n_cols(); ++j) out(i, j) = F(i, j) > tau ? 1.0 : 0.0;
    return out;
}

double f1_of(const Confusion& c) { return binary_metrics(c).f1; }
double accuracy_of(const Confusion& c) { return binary_metrics(c).accuracy; }
double precision_of(const Confusion& c) { return binary_metrics(c).precision; }
double recall_of(const Confusion& c) { return binary_metrics(c).tpr; }

double averaged_metric(const DenseMatrix& Y, const DenseMatrix& Yhat, BinaryMetricFn metric,
                       AverageMode mode) {
    check_shapes(Y, Yhat);
    auto cell = [](double v) { return v != 0.0 ? 1 : 0; };
    switch (mode) {
        case AverageMode::Macro: {
            double total = 0.0;
            for (index_t j = 0; j < Y.n_cols(); ++j) {
                Confusion c;
                for (index_t i = 0; i < Y.n_rows(); ++i) {
                    if (cell(Y(i, j)))
                        (cell(Yhat(i, j)) ? c.tp : c.fn) += 1;
                    else
                        (cell(Yhat(i, j)) ? c.fp : c.tn) += 1;
                }
                total += metric(c);
            }
            return total / static_cast<double>(Y.n_cols());
        }
        case AverageMode::Micro: {
            Confusion c;
            for (index_t i = 0; i < Y.n_rows(); ++i)
                for (index_t j = 0; j < Y.n_cols(); ++j) {
                    if (cell(Y(i, j)))
                        (cell(Yhat(i, j)) ? c.tp : c.fn) += 1;
                    else
                        (cell(Yhat(i, j)) ? c.fp : c.tn) += 1;
                }
            return metric(c);
        }
        case AverageMode::Samples: {
            double total = 0.0;
            for (index_t i = 0; i < Y.n_rows(); ++i) {
                Confusion c;
                for (index_t j = 0; j < Y.n_cols(); ++j) {
                    if (cell(Y(i, j)))
                        (cell(Yhat(i, j)) ? c.tp : c.fn) += 1;
                    else
                        (cell(Yhat(i, j)) ? c.fp : c.tn) += 1;
                }
                total += metric(c);
            }
            return total / static_cast<double>(Y.n_rows());
        }
    }
    return 0.0;
}

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw ShapeError("roc_auc: length mismatch");
    index_t n_pos = 0, n_neg = 0;
    for (int y : y_true) (y > 0 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) throw EmptyPartition("roc_auc needs both classes");
    double wins = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] <= 0) continue;
        for (std::size_t j = 0; j < y_true.size(); ++j) {
            if (y_true[j] > 0) continue;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

RegressionMetrics regression_metrics(const DenseMatrix& Y, const DenseMatrix& Yhat) {
    check_shapes(Y, Yhat);
    const index_t n = Y.n_rows(), d = Y.n_cols();
    RegressionMetrics m;
    double total_sq = 0.0, total_abs = 0.0;
    double total_var = 0.0;  // sum over columns of residual variance around the mean
    double macro_sum = 0.0;
    index_t macro_cols = 0;
    double first_r2 = 0.0;
    for (index_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (index_t i = 0; i < n; ++i) mean += Y(i, j);
        mean /= static_cast<double>(n);
        double sse = 0.0, sae = 0.0, sst = 0.0;
        for (index_t i = 0; i < n; ++i) {
            const double r = Y(i, j) - Yhat(i, j);
            sse += r * r;
            sae += std::abs(r);
            const double c = Y(i, j) - mean;
            sst += c * c;
        }
        total_sq += sse;
        total_abs += sae;
        total_var += sst;
        if (sst > 0.0) {
            const double r2 = 1.0 - sse / sst;
            macro_sum += r2;
            ++macro_cols;
            if (j == 0) first_r2 = r2;
        } else {
            ++m.excluded_columns;
        }
    }
    const double nd = static_cast<double>(n) * static_cast<double>(d);
    m.mse = total_sq / nd;
    m.mae = total_abs / nd;
    m.r2 = d == 1 ? first_r2 : 0.0;
    m.macro_r2 = macro_cols > 0 ? macro_sum / static_cast<double>(macro_cols) : 0.0;
    m.variance_r2 = total_var > 0.0 ? 1.0 - total_sq / total_var : 0.0;
    return m;
}

}  // namespace rpt
