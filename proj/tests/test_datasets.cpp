#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <rptrees/datasets.hpp>
#include <rptrees/tree.hpp>

using namespace rpt;

namespace {

double column_mean(const DenseMatrix& m, index_t j) {
    double s = 0.0;
    for (index_t i = 0; i < m.n_rows(); ++i) s += m(i, j);
    return s / static_cast<double>(m.n_rows());
}

double column_var(const DenseMatrix& m, index_t j) {
    const double mu = column_mean(m, j);
    double s = 0.0;
    for (index_t i = 0; i < m.n_rows(); ++i) s += (m(i, j) - mu) * (m(i, j) - mu);
    return s / static_cast<double>(m.n_rows());
}

double column_corr(const DenseMatrix& m, index_t a, index_t b) {
    const double ma = column_mean(m, a), mb = column_mean(m, b);
    double num = 0.0, va = 0.0, vb = 0.0;
    for (index_t i = 0; i < m.n_rows(); ++i) {
        num += (m(i, a) - ma) * (m(i, b) - mb);
        va += (m(i, a) - ma) * (m(i, a) - ma);
        vb += (m(i, b) - mb) * (m(i, b) - mb);
    }
    return num / std::sqrt(va * vb);
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("friedman1 target function values") {
    // Direct evaluation at x = (0.5, ..., 0.5).
    const double half[5] = {0.5, 0.5, 0.5, 0.5, 0.5};
    const double expected = 10.0 * std::sin(std::numbers::pi / 4.0) + 0.0 + 5.0 + 2.5;
    CHECK(friedman1_f(half) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(friedman1_f(half) == doctest::Approx(14.5710678118654755).epsilon(1e-10));

    const double zeros[5] = {0, 0, 0, 0, 0};
    CHECK(friedman1_f(zeros) == doctest::Approx(5.0));  // only the quadratic term survives

    // Appendix-style coefficient is available as an override.
    CHECK(friedman1_f(half, 6.0) == doctest::Approx(expected + 0.5));
}

TEST_CASE("gen_friedman1 basics") {
    CHECK_THROWS_AS((void)gen_friedman1(0, 1.0, 0), EmptyDataset);
    const Dataset ds = gen_friedman1(50, 0.0, 7);
    CHECK(ds.p() == 10);
    CHECK(ds.d() == 1);
    // Noise-free targets reproduce the formula exactly.
    for (index_t i = 0; i < ds.n(); ++i) {
        double row[5];
        for (index_t j = 0; j < 5; ++j) row[j] = ds.dense_x()(i, j);
        CHECK(ds.Y(i, 0) == doctest::Approx(friedman1_f(row)).epsilon(1e-12));
    }
}

TEST_CASE("gen_friedman1: sample mean matches the analytic mean (Monte-Carlo)") {
    const index_t n = 100000;
    const Dataset ds = gen_friedman1(n, 1.0, 123);
    // Analytic mean under U(0,1) inputs via 2-d quadrature for the sin term:
    // E[10 sin(pi x1 x2)] + 20/12 + 10/2 + 5/2.
    const index_t grid = 400;
    double sin_term = 0.0;
    for (index_t a = 0; a < grid; ++a)
        for (index_t b = 0; b < grid; ++b) {
            const double u = (static_cast<double>(a) + 0.5) / grid;
            const double v = (static_cast<double>(b) + 0.5) / grid;
            sin_term += std::sin(std::numbers::pi * u * v);
        }
    sin_term *= 10.0 / static_cast<double>(grid * grid);
    const double analytic_mean = sin_term + 20.0 / 12.0 + 5.0 + 2.5;
    // 3 sigma of the sample mean is well under 0.1 here.
    const double sd_mean = std::sqrt(column_var(ds.Y, 0) / static_cast<double>(n));
    CHECK(std::abs(column_mean(ds.Y, 0) - analytic_mean) < 3.0 * sd_mean + 1e-6);
}

TEST_CASE("gen_friedman1_chain structure") {
    const index_t n = 100000, d = 6;
    const Dataset ds = gen_friedman1_chain(n, d, 5);
    CHECK(ds.p() == 5);
    CHECK(ds.d() == d);
    // Var(y_j - y_{j-1}) is the unit step noise.
    for (index_t j = 1; j < d; ++j) {
        DenseMatrix diff(n, 1);
        for (index_t i = 0; i < n; ++i) diff(i, 0) = ds.Y(i, j) - ds.Y(i, j - 1);
        CHECK(column_var(diff, 0) == doctest::Approx(1.0).epsilon(0.05));
    }
    // Cov(y_1, y_d) equals Var(y_1): the appended noises are independent.
    const double m1 = column_mean(ds.Y, 0), md = column_mean(ds.Y, d - 1);
    double cov = 0.0;
    for (index_t i = 0; i < n; ++i) cov += (ds.Y(i, 0) - m1) * (ds.Y(i, d - 1) - md);
    cov /= static_cast<double>(n);
    CHECK(cov == doctest::Approx(column_var(ds.Y, 0)).epsilon(0.05));
    // Variance grows monotonically along the chain (up to Monte-Carlo slack).
    for (index_t j = 1; j < d; ++j)
        CHECK(column_var(ds.Y, j) > column_var(ds.Y, j - 1) - 0.1);
}

TEST_CASE("d = 1 variants coincide distributionally") {
    // chain(d=1), group(d=1) and ind(d=1) are all one noisy target on
    // gaussian inputs; their draw orders differ, so compare moments.
    const index_t n = 100000;
    const Dataset chain = gen_friedman1_chain(n, 1, 71);
    const Dataset group = gen_friedman1_group(n, 1, 72);
    const Dataset ind = gen_friedman1_ind(n, 1, 73);
    Friedman1Options gauss;
    gauss.input_law = InputLaw::StandardNormal;
    const Dataset plain = gen_friedman1(n, 1.0, 74, gauss);
    const double m_ref = column_mean(plain.Y, 0), v_ref = column_var(plain.Y, 0);
    for (const Dataset* ds : {&chain, &group, &ind}) {
        CHECK(ds->d() == 1);
        CHECK(column_mean(ds->Y, 0) == doctest::Approx(m_ref).epsilon(0.02));
        CHECK(column_var(ds->Y, 0) == doctest::Approx(v_ref).epsilon(0.05));
    }
    CHECK(ind.p() == 5);
}

TEST_CASE("gen_friedman1_group structure") {
    const index_t n = 100000, d = 5;
    const Dataset ds = gen_friedman1_group(n, d, 11);
    // Mean over outputs has variance Var(f) + 1/d.
    DenseMatrix avg(n, 1);
    for (index_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < d; ++j) s += ds.Y(i, j);
        avg(i, 0) = s / static_cast<double>(d);
    }
    const double var_f = column_var(ds.Y, 0) - 1.0;  // each output is f + unit noise
    CHECK(column_var(avg, 0) ==
          doctest::Approx(var_f + 1.0 / static_cast<double>(d)).epsilon(0.05));
    // All output pairs share the same correlation.
    const double c01 = column_corr(ds.Y, 0, 1);
    for (index_t a = 0; a < d; ++a)
        for (index_t b = a + 1; b < d; ++b)
            CHECK(column_corr(ds.Y, a, b) == doctest::Approx(c01).epsilon(0.05));
}

TEST_CASE("gen_friedman1_ind structure") {
    const index_t n = 100000, d = 4;
    const Dataset ds = gen_friedman1_ind(n, d, 13);
    CHECK(ds.p() == 5 * d);
    for (index_t a = 0; a < d; ++a)
        for (index_t b = a + 1; b < d; ++b)
            CHECK(std::abs(column_corr(ds.Y, a, b)) < 0.05);
}

TEST_CASE("friedman1_ind: out-of-block features carry no importance") {
    const Dataset ds = gen_friedman1_ind(400, 3, 17);
    // Fit a tree on output 0 alone; MDI outside features [0, 5) stays small.
    DenseMatrix y0(ds.n(), 1);
    for (index_t i = 0; i < ds.n(); ++i) y0(i, 0) = ds.Y(i, 0);
    GrowthParams params;
    params.impurity = ImpurityKind::Variance;
    params.min_samples_split = 10;
    params.seed = 3;
    const Tree tree = grow(ds.dense_x(), y0, params);
    const std::vector<double> mdi = mdi_importances(tree);
    double out_of_block = 0.0;
    for (index_t j = 5; j < ds.p(); ++j) out_of_block += mdi[j];
    CHECK(out_of_block < 0.05);
}

TEST_CASE("gen_twonorm") {
    const Dataset ds = gen_twonorm(100000, 21);
    CHECK(ds.p() == 20);
    CHECK(ds.task == Task::BinaryClassification);
    const double a = 2.0 / std::sqrt(20.0);
    CHECK(a == doctest::Approx(0.4472135954999579));
    index_t n_pos = 0;
    for (index_t i = 0; i < ds.n(); ++i) n_pos += ds.Y(i, 0) > 0;
    CHECK(n_pos == 50000);
    // The symmetric Bayes rule is sign(sum_j x_j); its error is
    // Phi(-a sqrt(20)) = Phi(-2) ~ 0.0228.
    index_t errors = 0;
    for (index_t i = 0; i < ds.n(); ++i) {
        double s = 0.0;
        for (index_t j = 0; j < 20; ++j) s += ds.dense_x()(i, j);
        const double pred = s > 0.0 ? 1.0 : -1.0;
        errors += pred != ds.Y(i, 0);
    }
    const double bayes = 0.5 * std::erfc(2.0 / std::sqrt(2.0));
    CHECK(std::abs(static_cast<double>(errors) / static_cast<double>(ds.n()) - bayes) < 0.005);
}

TEST_CASE("gen_random_sparse_regression") {
    SUBCASE("density 1 is fully dense") {
        const Dataset ds = gen_random_sparse_regression(50, 20, 1.0, 3);
        CHECK(density(ds.csc_x()) == 1.0);
    }
    SUBCASE("realized density tracks the target within 5% relative") {
        const Dataset ds = gen_random_sparse_regression(100000, 100, 0.01, 9);
        CHECK(density(ds.csc_x()) == doctest::Approx(0.01).epsilon(0.05));
    }
    SUBCASE("benchmark configuration shape") {
        const Dataset ds = gen_random_sparse_regression(10000, 1000, 1e-3, 1);
        CHECK(ds.n() == 10000);
        CHECK(ds.p() == 1000);
        CHECK(density(ds.csc_x()) == doctest::Approx(1e-3).epsilon(0.2));
        for (index_t i = 0; i < ds.n(); ++i) {
            CHECK(ds.Y(i, 0) >= 0.0);
            CHECK(ds.Y(i, 0) <= 1.0);
        }
    }
}

TEST_CASE("generators are deterministic in the seed") {
    const Dataset a = gen_friedman1(100, 1.0, 42);
    const Dataset b = gen_friedman1(100, 1.0, 42);
    CHECK(a.dense_x() == b.dense_x());
    CHECK(a.Y == b.Y);
    const Dataset c = gen_random_sparse_regression(200, 30, 0.1, 8);
    const Dataset d = gen_random_sparse_regression(200, 30, 0.1, 8);
    CHECK(c.csc_x().indices == d.csc_x().indices);
    CHECK(c.csc_x().data == d.csc_x().data);
}

TEST_CASE("train_test_split") {
    const Dataset ds = gen_friedman1(10, 1.0, 4);
    SplitSpec spec;
    spec.train_fraction = 0.5;
    spec.seed = 1;
    auto [train, test] = train_test_split(ds, spec);
    CHECK(train.n() == 5);
    CHECK(test.n() == 5);

    auto [train2, test2] = train_test_split(ds, spec);
    CHECK(train.dense_x() == train2.dense_x());  // same seed, same split
    CHECK(test.Y == test2.Y);

    SUBCASE("stratified split keeps class counts") {
        // 8 positive / 2 negative, fraction 0.5 -> 4 + 1 in each half.
        DenseMatrix X(10, 2), Y(10, 1);
        for (index_t i = 0; i < 10; ++i) {
            X(i, 0) = static_cast<double>(i);
            Y(i, 0) = i < 8 ? 1.0 : -1.0;
        }
        const Dataset binary{X, Y, Task::BinaryClassification};
        SplitSpec strat;
        strat.train_fraction = 0.5;
        strat.stratified = true;
        strat.seed = 2;
        auto [btrain, btest] = train_test_split(binary, strat);
        index_t train_pos = 0, test_pos = 0;
        for (index_t i = 0; i < btrain.n(); ++i) train_pos += btrain.Y(i, 0) > 0;
        for (index_t i = 0; i < btest.n(); ++i) test_pos += btest.Y(i, 0) > 0;
        CHECK(btrain.n() == 5);
        CHECK(train_pos == 4);
        CHECK(test_pos == 4);
    }
}

TEST_CASE("standardize") {
    DenseMatrix X(2, 2), Y(2, 1);
    X(0, 0) = 1.0;
    X(1, 0) = 3.0;
    X(0, 1) = 5.0;  // constant column
    X(1, 1) = 5.0;
    Y(0, 0) = 2.0;
    Y(1, 0) = 4.0;
    const Dataset ds{X, Y, Task::Regression};
    auto [scaled, rec] = standardize(ds);
    CHECK(scaled.dense_x()(0, 0) == doctest::Approx(-1.0));  // mean 2, population sd 1
    CHECK(scaled.dense_x()(1, 0) == doctest::Approx(1.0));
    CHECK(scaled.dense_x()(0, 1) == 0.0);  // constant column centered, scale 1
    CHECK(rec.x_scale[1] == 1.0);

    SUBCASE("train statistics apply consistently to new data") {
        DenseMatrix Xt(1, 2), Yt(1, 1);
        Xt(0, 0) = 2.0;
        Xt(0, 1) = 6.0;
        Yt(0, 0) = 3.0;
        const Dataset test{Xt, Yt, Task::Regression};
        const Dataset scaled_test = apply_standardize(test, rec);
        CHECK(scaled_test.dense_x()(0, 0) == doctest::Approx(0.0));  // (2 - 2) / 1
        CHECK(scaled_test.dense_x()(0, 1) == doctest::Approx(1.0));  // (6 - 5) / 1
    }
}

TEST_CASE("svmlight parsing") {
    TempFile file("rptrees_svml_test.txt");
    {
        std::ofstream out(file.path);
        out << "# comment line\n";
        out << "1 3:2.5 7:1\n";
        out << "\n";
        out << "-1 1:0.5\n";
    }
    const Dataset ds = load_svmlight(file.path, Task::BinaryClassification);
    CHECK(ds.n() == 2);
    CHECK(ds.p() == 7);
    const DenseMatrix X = densify(ds.csc_x());
    CHECK(X(0, 2) == 2.5);  // 1-based on disk -> 0-based in memory
    CHECK(X(0, 6) == 1.0);
    CHECK(X(1, 0) == 0.5);
    CHECK(ds.Y(0, 0) == 1.0);
    CHECK(ds.Y(1, 0) == -1.0);
}

TEST_CASE("svmlight errors") {
    TempFile file("rptrees_svml_bad.txt");
    {
        std::ofstream out(file.path);
        out << "1 3:2.5 2:1\n";  // non-increasing feature index
    }
    try {
        (void)load_svmlight(file.path);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line_no == 1);
    }

    TempFile empty("rptrees_svml_empty.txt");
    { std::ofstream out(empty.path); }
    CHECK_THROWS_AS((void)load_svmlight(empty.path), EmptyDataset);
}

TEST_CASE("svmlight multilabel roundtrip on random sparse datasets") {
    Rng rng(77);
    for (int rep = 0; rep < 5; ++rep) {
        const index_t n = 20, p = 15, d = 6;
        std::vector<Triplet> trips;
        // Pin the last feature so dimensions roundtrip, then fill the rest.
        trips.emplace_back(0, p - 1, 1.0);
        for (index_t i = 0; i < n; ++i)
            for (index_t j = 0; j < p; ++j)
                if (!(i == 0 && j == p - 1) && rng.uniform01() < 0.2)
                    trips.emplace_back(i, j, rng.normal());
        DenseMatrix Y(n, d);
        for (index_t i = 0; i < n; ++i)
            for (index_t j = 0; j < d; ++j) Y(i, j) = rng.uniform01() < 0.3 ? 1.0 : 0.0;
        Y(0, d - 1) = 1.0;
        Dataset ds;
        ds.task = Task::Multilabel;
        ds.X = csc_from_triplets(trips, n, p);
        ds.Y = Y;

        TempFile file("rptrees_svml_roundtrip.txt");
        save_svmlight(ds, file.path);
        const Dataset back = load_svmlight(file.path, Task::Multilabel);
        CHECK(back.n() == n);
        CHECK(back.p() == p);
        CHECK(back.d() == d);
        CHECK(densify(back.csc_x()) == densify(ds.csc_x()));
        CHECK(back.Y == ds.Y);
    }
}

TEST_CASE("csv load with target schema") {
    TempFile file("rptrees_csv_test.csv");
    {
        std::ofstream out(file.path);
        out << "x0,x1,y0\n";
        out << "1.0,2.0,3.0\n";
        out << "4.0,5.0,6.0\n";
    }
    CsvSchema schema;
    schema.target_columns = {"y0"};
    const Dataset ds = load_csv(file.path, schema);
    CHECK(ds.n() == 2);
    CHECK(ds.p() == 2);
    CHECK(ds.Y(1, 0) == 6.0);
    CHECK(ds.dense_x()(1, 1) == 5.0);

    TempFile round("rptrees_csv_roundtrip.csv");
    save_csv(ds, round.path);
    const Dataset back = load_csv(round.path, schema);
    CHECK(back.dense_x() == ds.dense_x());
    CHECK(back.Y == ds.Y);
}
