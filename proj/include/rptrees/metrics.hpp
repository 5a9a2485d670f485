#pragma once

#include <vector>

#include "rptrees/matrix.hpp"

namespace rpt {

struct Confusion {
    index_t tp = 0, tn = 0, fp = 0, fn = 0;
};

Confusion confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

struct BinaryMetrics {
    double error_rate = 0.0;
    double accuracy = 0.0;
    double tpr = 0.0;  // sensitivity / recall
    double tnr = 0.0;  // specificity
    double fnr = 0.0;
    double fpr = 0.0;
    double precision = 0.0;
    double balanced_accuracy = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // a 0/0 convention fired somewhere
};

BinaryMetrics binary_metrics(const Confusion& c);

// Multi-label set metrics; Y and Yhat hold {0,1} entries.
double subset_accuracy(const DenseMatrix& Y, const DenseMatrix& Yhat);
double hamming_loss(const DenseMatrix& Y, const DenseMatrix& Yhat);
// Jaccard similarity averaged over samples, J(empty, empty) = 1.
double jaccard(const DenseMatrix& Y, const DenseMatrix& Yhat);

// Ranking metrics take a real score matrix F; argmax and rank ties break
// toward the lowest label index.
double one_error(const DenseMatrix& Y, const DenseMatrix& F);
double coverage_error(const DenseMatrix& Y, const DenseMatrix& F);
// Samples with no positive or no negative labels are skipped.
double ranking_loss(const DenseMatrix& Y, const DenseMatrix& F);

struct LrapResult {
    double value = 0.0;
    index_t skipped_samples = 0;  // samples with no positive label
};
LrapResult lrap(const DenseMatrix& Y, const DenseMatrix& F);

// Strict-greater 0.5 thresholding of a score matrix.
DenseMatrix threshold_scores(const DenseMatrix& F, double tau = 0.5);

enum class AverageMode { Macro, Micro, Samples };
using BinaryMetricFn = double (*)(const Confusion&);

double averaged_metric(const DenseMatrix& Y, const DenseMatrix& Yhat, BinaryMetricFn metric,
                       AverageMode mode);

double f1_of(const Confusion& c);
double accuracy_of(const Confusion& c);
double precision_of(const Confusion& c);
double recall_of(const Confusion& c);

// Rank statistic with ties counted one half.
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

struct RegressionMetrics {
    double mse = 0.0;       // normalized by n*d
    double mae = 0.0;       // normalized by n*d
    double r2 = 0.0;        // single output only
    double macro_r2 = 0.0;  // constant-true columns excluded
    double variance_r2 = 0.0;
    index_t excluded_columns = 0;
};

RegressionMetrics regression_metrics(const DenseMatrix& Y, const DenseMatrix& Yhat);

}  // namespace rpt
