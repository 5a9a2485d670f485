#include "rptrees/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>

#include "rptrees/metrics.hpp"

namespace rpt {

Dataset SyntheticSpec::generate(std::uint64_t seed) const {
    if (kind == "friedman1") return gen_friedman1(n, noise_sd, seed, friedman);
    if (kind == "friedman1-chain") return gen_friedman1_chain(n, d, seed);
    if (kind == "friedman1-group") return gen_friedman1_group(n, d, seed);
    if (kind == "friedman1-ind") return gen_friedman1_ind(n, d, seed);
    if (kind == "twonorm") return gen_twonorm(n, seed);
    if (kind == "sparse-regression") return gen_random_sparse_regression(n, p, density, seed);
    throw Error("unknown generator '" + kind + "'");
}

DenseMatrix SyntheticSpec::bayes(const DenseMatrix& X) const {
    if (!has_bayes()) throw Unsupported("no closed-form target for '" + kind + "'");
    DenseMatrix out(X.n_rows(), 1);
    for (index_t i = 0; i < X.n_rows(); ++i) {
        double row[5] = {X(i, 0), X(i, 1), X(i, 2), X(i, 3), X(i, 4)};
        out(i, 0) = friedman1_f(row, friedman.x5_coeff);
    }
    return out;
}

SyntheticSpec synthetic_from_json(const json& j) {
    SyntheticSpec s;
    s.kind = j.value("kind", "friedman1");
    s.n = j.value("n", index_t{300});
    s.d = j.value("d", index_t{1});
    s.noise_sd = j.value("noise_sd", 1.0);
    s.p = j.value("p", index_t{1000});
    s.density = j.value("density", 1e-3);
    if (j.value("input_law", "uniform") == "normal")
        s.friedman.input_law = InputLaw::StandardNormal;
    s.friedman.x5_coeff = j.value("x5_coeff", 5.0);
    return s;
}

json to_json(const SyntheticSpec& s) {
    json j;
    j["kind"] = s.kind;
    j["n"] = s.n;
    j["d"] = s.d;
    j["noise_sd"] = s.noise_sd;
    j["p"] = s.p;
    j["density"] = s.density;
    j["input_law"] = s.friedman.input_law == InputLaw::Uniform01 ? "uniform" : "normal";
    j["x5_coeff"] = s.friedman.x5_coeff;
    return j;
}

LearnerSpec learner_from_json(const json& j) {
    LearnerSpec s;
    s.family = j.value("family", "forest");
    s.params = j.value("params", json::object());
    return s;
}

json to_json(const LearnerSpec& s) {
    json j;
    j["family"] = s.family;
    j["params"] = s.params;
    return j;
}

Predictor fit_predictor(const LearnerSpec& spec, const Dataset& train, std::uint64_t seed) {
    if (spec.family == "tree") {
        GrowthParams p = growth_params_from_json(spec.params);
        p.seed = seed;
        auto tree = std::make_shared<Tree>(train.sparse() ? grow(train.csc_x(), train.Y, p)
                                                          : grow(train.dense_x(), train.Y, p));
        return [tree](const DenseMatrix& X) { return predict_dense(*tree, X); };
    }
    if (spec.family == "forest") {
        ForestParams p = forest_params_from_json(spec.params);
        p.seed = seed;
        auto forest = std::make_shared<Forest>(fit_forest(train, p));
        return [forest](const DenseMatrix& X) { return predict_forest(*forest, X); };
    }
    BoostParams p = boost_params_from_json(spec.params);
    p.seed = seed;
    std::shared_ptr<GBModel> model;
    if (spec.family == "gb")
        model = std::make_shared<GBModel>(fit_gb(train, p));
    else if (spec.family == "gb-mo")
        model = std::make_shared<GBModel>(fit_gbmort(train, p));
    else if (spec.family == "gb-rpo")
        model = std::make_shared<GBModel>(fit_gbrt_rpo(train, p));
    else if (spec.family == "gb-relabel-rpo")
        model = std::make_shared<GBModel>(fit_gbrt_relabel_rpo(train, p));
    else
        throw Error("unknown learner family '" + spec.family + "'");
    return [model](const DenseMatrix& X) { return predict_gb(*model, X); };
}

BVReport bias_variance_decompose(const SyntheticSpec& generator, const LearnerSpec& learner,
                                 index_t n_ls_draws, index_t n_algo_draws, index_t n_test,
                                 std::uint64_t seed) {
    if (!generator.has_bayes())
        throw Unsupported("bias-variance decomposition needs a generator with a known target");
    if (n_ls_draws < 2 || n_algo_draws < 1) throw Error("need >= 2 LS draws and >= 1 algo draw");

    // Fixed test input grid shared by every fit (a variance-reduction choice
    // for the estimator itself).
    SyntheticSpec test_spec = generator;
    test_spec.n = n_test;
    const Dataset test = test_spec.generate(mix_seed(seed, 0x74657374));
    const DenseMatrix& X_test = test.dense_x();
    const DenseMatrix f_true = generator.bayes(X_test);

    const double n_ls = static_cast<double>(n_ls_draws);
    const double n_algo = static_cast<double>(n_algo_draws);

    std::vector<std::vector<std::vector<double>>> preds(
        static_cast<std::size_t>(n_ls_draws),
        std::vector<std::vector<double>>(static_cast<std::size_t>(n_algo_draws)));
    for (index_t ls = 0; ls < n_ls_draws; ++ls) {
        const Dataset train = generator.generate(mix_seed(seed, 1000 + ls));
        for (index_t a = 0; a < n_algo_draws; ++a) {
            const Predictor predict =
                fit_predictor(learner, train, mix_seed(mix_seed(seed, ls), a));
            const DenseMatrix P = predict(X_test);
            preds[ls][a].resize(static_cast<std::size_t>(n_test));
            for (index_t i = 0; i < n_test; ++i) preds[ls][a][i] = P(i, 0);
        }
    }

    BVReport report;
    report.residual_error = generator.noise_variance();
    report.n_ls_draws = n_ls_draws;
    report.n_test = n_test;

    double bias_acc = 0.0, var_ls_acc = 0.0, var_algo_acc = 0.0, var_total_acc = 0.0;
    for (index_t i = 0; i < n_test; ++i) {
        double grand = 0.0;
        std::vector<double> ls_mean(static_cast<std::size_t>(n_ls_draws), 0.0);
        for (index_t ls = 0; ls < n_ls_draws; ++ls) {
            for (index_t a = 0; a < n_algo_draws; ++a) ls_mean[ls] += preds[ls][a][i];
            ls_mean[ls] /= n_algo;
            grand += ls_mean[ls];
        }
        grand /= n_ls;

        double v_ls = 0.0;
        for (index_t ls = 0; ls < n_ls_draws; ++ls) {
            const double c = ls_mean[ls] - grand;
            v_ls += c * c;
        }
        v_ls /= n_ls;

        double v_algo = 0.0, v_total = 0.0;
        for (index_t ls = 0; ls < n_ls_draws; ++ls) {
            for (index_t a = 0; a < n_algo_draws; ++a) {
                const double ca = preds[ls][a][i] - ls_mean[ls];
                v_algo += ca * ca;
                const double ct = preds[ls][a][i] - grand;
                v_total += ct * ct;
            }
        }
        v_algo /= n_ls * n_algo;
        v_total /= n_ls * n_algo;

        const double cb = grand - f_true(i, 0);
        bias_acc += cb * cb;
        var_ls_acc += v_ls;
        var_algo_acc += v_algo;
        var_total_acc += v_total;
    }
    const double nt = static_cast<double>(n_test);
    report.bias_sq = bias_acc / nt;
    report.var_ls = var_ls_acc / nt;
    report.var_algo = var_algo_acc / nt;
    report.var_total = var_total_acc / nt;
    return report;
}

double named_metric(const std::string& name, Task task, const DenseMatrix& Y,
                    const DenseMatrix& F) {
    if (name == "mse" || name == "mae" || name == "r2" || name == "macro_r2" ||
        name == "variance_r2") {
        const RegressionMetrics m = regression_metrics(Y, F);
        if (name == "mse") return m.mse;
        if (name == "mae") return m.mae;
        if (name == "r2") return m.r2;
        if (name == "macro_r2") return m.macro_r2;
        return m.variance_r2;
    }
    if (name == "lrap") return lrap(Y, F).value;
    if (name == "ranking_loss") return ranking_loss(Y, F);
    if (name == "coverage_error") return coverage_error(Y, F);
    if (name == "one_error") return one_error(Y, F);
    if (name == "hamming" || name == "subset_accuracy" || name == "jaccard") {
        const DenseMatrix Yhat = threshold_scores(F, 0.5);
        if (name == "hamming") return hamming_loss(Y, Yhat);
        if (name == "subset_accuracy") return subset_accuracy(Y, Yhat);
        return jaccard(Y, Yhat);
    }
    if (name == "error_rate" || name == "accuracy") {
        // Probability-style scores (all inside [0, 1]) threshold at 1/2,
        // margin-style scores at 0; labels are +/-1.
        bool prob_style = true;
        for (index_t i = 0; i < Y.n_rows() && prob_style; ++i)
            prob_style = F(i, 0) >= 0.0 && F(i, 0) <= 1.0;
        const double tau = prob_style ? 0.5 : 0.0;
        index_t errors = 0;
        for (index_t i = 0; i < Y.n_rows(); ++i) {
            const double pred = F(i, 0) > tau ? 1.0 : -1.0;
            errors += pred != Y(i, 0);
        }
        const double er = static_cast<double>(errors) / static_cast<double>(Y.n_rows());
        return name == "error_rate" ? er : 1.0 - er;
    }
    throw Error("unknown metric '" + name + "'");
}

GridResult grid_search(const Dataset& ds, const std::vector<LearnerSpec>& grid,
                       double validation_fraction, std::uint64_t seed) {
    if (grid.empty()) throw Error("grid_search with an empty grid");
    SplitSpec split;
    split.train_fraction = 1.0 - validation_fraction;
    split.seed = mix_seed(seed, 0x67726964);
    auto [train, val] = train_test_split(ds, split);

    GridResult out;
    double best_loss = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const Predictor predict = fit_predictor(grid[g], train, mix_seed(seed, g));
        const DenseMatrix F = predict(val.sparse() ? densify(val.csc_x()) : val.dense_x());
        const double loss = ds.task == Task::Regression
                                ? named_metric("mse", ds.task, val.Y, F)
                                : named_metric("error_rate", ds.task, val.Y, F);
        out.table.emplace_back(to_json(grid[g]), loss);
        if (g == 0 || loss < best_loss) {  // ties keep the first grid entry
            best_loss = loss;
            out.best_index = static_cast<index_t>(g);
        }
    }
    out.best = grid[out.best_index];
    return out;
}

BenchResult bench_split(index_t n, index_t p, double density, const std::string& tree_kind,
                        index_t repeats, std::uint64_t seed) {
    const Dataset ds = gen_random_sparse_regression(n, p, density, seed);
    const CscMatrix& csc = ds.csc_x();
    const DenseMatrix row_major = densify(csc, Layout::RowMajor);
    const DenseMatrix col_major = densify(csc, Layout::ColMajor);

    GrowthParams params;
    params.impurity = ImpurityKind::Variance;
    params.seed = mix_seed(seed, 0x666974);
    if (tree_kind == "stump") {
        params.max_depth = 1;
    } else if (tree_kind != "full") {
        throw Error("tree_kind must be 'stump' or 'full'");
    }

    const Tree t_row = grow(row_major, ds.Y, params);
    const Tree t_col = grow(col_major, ds.Y, params);
    const Tree t_csc = grow(csc, ds.Y, params);
    BenchResult result;
    result.n = n;
    result.p = p;
    result.density = density;
    result.trees_identical = t_row == t_col && t_col == t_csc;
    if (!result.trees_identical) throw Error("layouts grew different trees; timing aborted");

    auto time_median = [&](auto&& fit) {
        std::vector<double> times;
        fit();  // warm-up
        for (index_t r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            fit();
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        return times[times.size() / 2];
    };

    result.median_seconds["row-major"] =
        time_median([&] { (void)grow(row_major, ds.Y, params); });
    result.median_seconds["col-major"] =
        time_median([&] { (void)grow(col_major, ds.Y, params); });
    result.median_seconds["csc"] = time_median([&] { (void)grow(csc, ds.Y, params); });
    return result;
}

Dataset dataset_from_config(const json& dataset_cfg, std::uint64_t seed) {
    if (dataset_cfg.contains("generator")) {
        const SyntheticSpec spec = synthetic_from_json(dataset_cfg.at("generator"));
        return spec.generate(seed);
    }
    if (dataset_cfg.contains("path")) {
        const std::string path = dataset_cfg.at("path").get<std::string>();
        const std::string format = dataset_cfg.value("format", "svmlight");
        Task task = Task::Regression;
        const std::string task_name = dataset_cfg.value("task", "regression");
        if (task_name == "binary") task = Task::BinaryClassification;
        if (task_name == "multilabel") task = Task::Multilabel;
        if (format == "svmlight") return load_svmlight(path, task);
        if (format == "csv") {
            CsvSchema schema;
            schema.task = task;
            schema.target_columns =
                dataset_cfg.value("targets", std::vector<std::string>{"y0"});
            return load_csv(path, schema);
        }
        throw Error("unknown dataset format '" + format + "'");
    }
    throw Error("dataset config needs 'generator' or 'path'");
}

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.name = j.value("name", "experiment");
    cfg.dataset = j.at("dataset");
    cfg.split = j.value("split", json::object());
    cfg.learner = learner_from_json(j.at("learner"));
    cfg.metrics = j.value("metrics", std::vector<std::string>{"mse"});
    cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{0});
    if (cfg.seeds.empty()) throw Error("experiment needs at least one seed");
    return cfg;
}

ExperimentResults run_experiment(const ExperimentConfig& config) {
    ExperimentResults results;
    results.name = config.name;
    std::map<std::string, std::vector<double>> values;
    for (const std::uint64_t seed : config.seeds) {
        const Dataset full = dataset_from_config(config.dataset, seed);
        Dataset train = full, test = full;
        if (!config.split.empty()) {
            SplitSpec split;
            split.train_fraction = config.split.value("train_fraction", 0.5);
            split.stratified = config.split.value("stratified", false);
            split.seed = mix_seed(seed, 0x73706c69);
            std::tie(train, test) = train_test_split(full, split);
        }
        const Predictor predict = fit_predictor(config.learner, train, seed);
        const DenseMatrix F = predict(test.sparse() ? densify(test.csc_x()) : test.dense_x());
        for (const auto& metric : config.metrics) {
            const double value = named_metric(metric, full.task, test.Y, F);
            results.rows.emplace_back(seed, metric, value);
            values[metric].push_back(value);
        }
    }
    for (const auto& [metric, vals] : values) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        const double sd =
            vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
        results.summary[metric] = {mean, sd};
    }
    return results;
}

void export_csv(const ExperimentResults& results, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "experiment,seed,metric,value\n";
    char buf[64];
    for (const auto& [seed, metric, value] : results.rows) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        out << results.name << ',' << seed << ',' << metric << ',' << buf << '\n';
    }
}

void export_json(const ExperimentResults& results, const std::string& path) {
    json j;
    j["format"] = "rptrees.results";
    j["version"] = 1;
    j["experiment"] = results.name;
    json rows = json::array();
    for (const auto& [seed, metric, value] : results.rows) {
        json r;
        r["seed"] = seed;
        r["metric"] = metric;
        r["value"] = value;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    json summary = json::object();
    for (const auto& [metric, ms] : results.summary) {
        summary[metric] = {{"mean", ms.first}, {"std", ms.second}};
    }
    j["summary"] = std::move(summary);
    save_json(j, path);
}

ExperimentResults results_from_json(const json& j) {
    if (j.value("format", "") != "rptrees.results") throw Error("not a results container");
    ExperimentResults results;
    results.name = j.value("experiment", "");
    for (const auto& r : j.at("rows"))
        results.rows.emplace_back(r.at("seed").get<std::uint64_t>(),
                                  r.at("metric").get<std::string>(),
                                  r.at("value").get<double>());
    if (j.contains("summary"))
        for (const auto& [metric, ms] : j.at("summary").items())
            results.summary[metric] = {ms.at("mean").get<double>(), ms.at("std").get<double>()};
    return results;
}

}  // namespace rpt
