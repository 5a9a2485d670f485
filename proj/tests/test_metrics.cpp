#include <doctest.h>

#include <cmath>
#include <rptrees/metrics.hpp>
#include <rptrees/rng.hpp>

using namespace rpt;

namespace {

// The two-sample, five-label worked example: ground truth and scores.
DenseMatrix worked_y() {
    DenseMatrix Y(2, 5);
    Y(0, 0) = 1;
    Y(0, 2) = 1;
    Y(1, 0) = 1;
    return Y;
}

DenseMatrix worked_f() {
    DenseMatrix F(2, 5);
    const double row0[5] = {0.75, 0.6, 0.1, 0.8, 0.15};
    const double row1[5] = {0.25, 0.8, 0.1, 0.15, 0.3};
    for (index_t j = 0; j < 5; ++j) {
        F(0, j) = row0[j];
        F(1, j) = row1[j];
    }
    return F;
}

}  // namespace

TEST_CASE("worked example: set metrics at the 0.5 threshold") {
    const DenseMatrix Y = worked_y();
    const DenseMatrix Yhat = threshold_scores(worked_f(), 0.5);
    CHECK(Yhat(0, 0) == 1.0);  // strict-greater keeps 0.6 and 0.8, drops 0.5-ties
    CHECK(Yhat(0, 2) == 0.0);
    CHECK(subset_accuracy(Y, Yhat) == 0.0);
    CHECK(hamming_loss(Y, Yhat) == doctest::Approx(0.5));
    CHECK(jaccard(Y, Yhat) == doctest::Approx(0.125));

    CHECK(subset_accuracy(Y, Y) == 1.0);
    CHECK(hamming_loss(Y, Y) == 0.0);
    CHECK(jaccard(Y, Y) == 1.0);
}

TEST_CASE("worked example: ranking metrics") {
    const DenseMatrix Y = worked_y();
    const DenseMatrix F = worked_f();
    CHECK(coverage_error(Y, F) == doctest::Approx(4.0));
    CHECK(ranking_loss(Y, F) == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
    CHECK(lrap(Y, F).value == doctest::Approx(47.0 / 120.0).epsilon(1e-12));
    // Both samples' top-scored label (index 3 resp. 1) is negative; the
    // definition bounds the metric by 1.
    CHECK(one_error(Y, F) == 1.0);
}

TEST_CASE("lrap: perfect ranking and all-equal scores") {
    DenseMatrix Y(1, 4);
    Y(0, 1) = 1;
    Y(0, 2) = 1;
    DenseMatrix F(1, 4);
    F(0, 1) = 0.9;
    F(0, 2) = 0.8;
    F(0, 0) = 0.2;
    F(0, 3) = 0.1;
    CHECK(lrap(Y, F).value == 1.0);

    // k true labels of d with all-equal scores give k/d; enumeration: every
    // label ranks all d labels at or above it.
    DenseMatrix G(1, 4);
    for (index_t j = 0; j < 4; ++j) G(0, j) = 0.3;
    CHECK(lrap(Y, G).value == doctest::Approx(2.0 / 4.0));

    DenseMatrix Yempty(1, 4);
    const LrapResult r = lrap(Yempty, G);
    CHECK(r.skipped_samples == 1);
}

TEST_CASE("binary metrics from a confusion matrix") {
    {  // perfect classifier
        const BinaryMetrics m = binary_metrics(Confusion{5, 5, 0, 0});
        CHECK(m.accuracy == 1.0);
        CHECK(m.f1 == 1.0);
    }
    {  // all-positive predictor on balanced data
        const BinaryMetrics m = binary_metrics(Confusion{5, 0, 5, 0});
        CHECK(m.tpr == 1.0);
        CHECK(m.tnr == 0.0);
        CHECK(m.balanced_accuracy == doctest::Approx(0.5));
    }
    {
        const BinaryMetrics m = binary_metrics(Confusion{1, 1, 1, 1});
        CHECK(m.precision == doctest::Approx(0.5));
        CHECK(m.tpr == doctest::Approx(0.5));
        CHECK(m.f1 == doctest::Approx(0.5));
    }
    {  // degenerate denominators flag and return zero
        const BinaryMetrics m = binary_metrics(Confusion{0, 4, 0, 0});
        CHECK(m.precision == 0.0);
        CHECK(m.degenerate);
    }
}

TEST_CASE("averaged metrics") {
    const DenseMatrix Y = worked_y();
    const DenseMatrix Yhat = threshold_scores(worked_f(), 0.5);

    SUBCASE("d=1 reduces every mode to the plain metric") {
        DenseMatrix y1(4, 1), p1(4, 1);
        y1(0, 0) = 1;
        y1(2, 0) = 1;
        p1(0, 0) = 1;
        p1(1, 0) = 1;
        const double macro = averaged_metric(y1, p1, f1_of, AverageMode::Macro);
        const double micro = averaged_metric(y1, p1, f1_of, AverageMode::Micro);
        Confusion c;
        c.tp = 1;
        c.fp = 1;
        c.fn = 1;
        c.tn = 1;
        CHECK(macro == doctest::Approx(f1_of(c)));
        CHECK(micro == doctest::Approx(f1_of(c)));
    }

    SUBCASE("macro-F1 equals the mean of per-label F1 (enumeration oracle)") {
        double expected = 0.0;
        for (index_t j = 0; j < 5; ++j) {
            Confusion c;
            for (index_t i = 0; i < 2; ++i) {
                if (Y(i, j) != 0.0)
                    (Yhat(i, j) != 0.0 ? c.tp : c.fn) += 1;
                else
                    (Yhat(i, j) != 0.0 ? c.fp : c.tn) += 1;
            }
            expected += f1_of(c);
        }
        expected /= 5.0;
        CHECK(averaged_metric(Y, Yhat, f1_of, AverageMode::Macro) == doctest::Approx(expected));
    }

    SUBCASE("micro-accuracy is one minus hamming loss") {
        CHECK(averaged_metric(Y, Yhat, accuracy_of, AverageMode::Micro) ==
              doctest::Approx(1.0 - hamming_loss(Y, Yhat)));
    }
}

TEST_CASE("roc_auc tie and order conventions") {
    CHECK(roc_auc({1, 1, 0, 0}, {0.9, 0.8, 0.2, 0.1}) == 1.0);
    CHECK(roc_auc({1, 1, 0, 0}, {0.1, 0.2, 0.8, 0.9}) == 0.0);
    CHECK(roc_auc({1, 0, 1, 0}, {0.5, 0.5, 0.5, 0.5}) == doctest::Approx(0.5));
}

TEST_CASE("ranking metrics are invariant under strictly monotone score transforms") {
    Rng rng(99);
    for (int rep = 0; rep < 20; ++rep) {
        DenseMatrix Y(6, 5), F(6, 5);
        for (index_t i = 0; i < 6; ++i)
            for (index_t j = 0; j < 5; ++j) {
                Y(i, j) = rng.uniform01() < 0.4 ? 1.0 : 0.0;
                F(i, j) = rng.normal();
            }
        DenseMatrix G(6, 5);
        for (index_t i = 0; i < 6; ++i)
            for (index_t j = 0; j < 5; ++j) G(i, j) = std::tanh(F(i, j)) * 3.0 + 7.0;
        CHECK(lrap(Y, F).value == doctest::Approx(lrap(Y, G).value).epsilon(1e-12));
        CHECK(ranking_loss(Y, F) == doctest::Approx(ranking_loss(Y, G)).epsilon(1e-12));
        CHECK(one_error(Y, F) == one_error(Y, G));
        CHECK(coverage_error(Y, F) == coverage_error(Y, G));
    }
}

TEST_CASE("metric ranges") {
    Rng rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        DenseMatrix Y(5, 4), F(5, 4);
        index_t total_pos = 0;
        for (index_t i = 0; i < 5; ++i)
            for (index_t j = 0; j < 4; ++j) {
                Y(i, j) = rng.uniform01() < 0.5 ? 1.0 : 0.0;
                total_pos += Y(i, j) != 0.0;
                F(i, j) = rng.normal();
            }
        const DenseMatrix Yhat = threshold_scores(F, 0.0);
        for (double v : {hamming_loss(Y, Yhat), jaccard(Y, Yhat), lrap(Y, F).value,
                         ranking_loss(Y, F)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        // Per-sample coverage is at least that sample's positive count, so
        // the mean is bounded below by the mean positive count.
        CHECK(coverage_error(Y, F) >= static_cast<double>(total_pos) / 5.0);
        CHECK(coverage_error(Y, F) <= 4.0);
    }
}

TEST_CASE("regression metrics") {
    DenseMatrix Y(4, 1), P(4, 1);
    for (index_t i = 0; i < 4; ++i) {
        Y(i, 0) = static_cast<double>(i);
        P(i, 0) = static_cast<double>(i);
    }
    const RegressionMetrics perfect = regression_metrics(Y, P);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.macro_r2 == 1.0);
    CHECK(perfect.r2 == 1.0);

    DenseMatrix mean_pred(4, 1);
    for (index_t i = 0; i < 4; ++i) mean_pred(i, 0) = 1.5;
    CHECK(regression_metrics(Y, mean_pred).macro_r2 == doctest::Approx(0.0));

    SUBCASE("variance_r2 equals the variance-weighted macro average") {
        Rng rng(17);
        DenseMatrix Ym(30, 3), Pm(30, 3);
        for (index_t i = 0; i < 30; ++i) {
            Ym(i, 0) = rng.normal();
            Ym(i, 1) = 5.0 * rng.normal();
            Ym(i, 2) = 0.3 * rng.normal() + 2.0;
            for (index_t j = 0; j < 3; ++j) Pm(i, j) = Ym(i, j) + 0.5 * rng.normal();
        }
        // Direct-formula oracle: per-column r2 weighted by column variance.
        double total_var = 0.0;
        double weighted = 0.0;
        for (index_t j = 0; j < 3; ++j) {
            double mean = 0.0;
            for (index_t i = 0; i < 30; ++i) mean += Ym(i, j);
            mean /= 30.0;
            double sst = 0.0, sse = 0.0;
            for (index_t i = 0; i < 30; ++i) {
                sst += (Ym(i, j) - mean) * (Ym(i, j) - mean);
                sse += (Ym(i, j) - Pm(i, j)) * (Ym(i, j) - Pm(i, j));
            }
            total_var += sst;
            weighted += sst * (1.0 - sse / sst);
        }
        weighted /= total_var;
        CHECK(regression_metrics(Ym, Pm).variance_r2 ==
              doctest::Approx(weighted).epsilon(1e-10));
    }

    SUBCASE("constant-true columns are excluded from macro_r2 with a flag") {
        DenseMatrix Yc(4, 2), Pc(4, 2);
        for (index_t i = 0; i < 4; ++i) {
            Yc(i, 0) = static_cast<double>(i);
            Pc(i, 0) = static_cast<double>(i);
            Yc(i, 1) = 3.0;
            Pc(i, 1) = 3.0;
        }
        const RegressionMetrics m = regression_metrics(Yc, Pc);
        CHECK(m.excluded_columns == 1);
        CHECK(m.macro_r2 == 1.0);
    }

    SUBCASE("equal column variances make variance_r2 and macro_r2 coincide") {
        Rng rng(23);
        DenseMatrix Ym(50, 2), Pm(50, 2);
        for (index_t i = 0; i < 50; ++i) {
            Ym(i, 0) = i < 25 ? -1.0 : 1.0;
            Ym(i, 1) = i % 2 == 0 ? -1.0 : 1.0;
            Pm(i, 0) = Ym(i, 0) * 0.8;
            Pm(i, 1) = Ym(i, 1) * 0.3;
        }
        const RegressionMetrics m = regression_metrics(Ym, Pm);
        CHECK(m.variance_r2 == doctest::Approx(m.macro_r2).epsilon(1e-12));
    }
}

TEST_CASE("shape errors") {
    DenseMatrix a(2, 3), b(3, 2);
    CHECK_THROWS_AS((void)hamming_loss(a, b), ShapeError);
    CHECK_THROWS_AS((void)lrap(a, b), ShapeError);
}
