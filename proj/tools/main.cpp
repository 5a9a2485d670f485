#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rptrees/harness.hpp"
#include "rptrees/metrics.hpp"

namespace {

using rpt::json;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    return rpt::load_json(path);
}

void write_predictions_csv(const rpt::DenseMatrix& F, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw rpt::Error("cannot open " + path + " for writing");
    for (rpt::index_t j = 0; j < F.n_cols(); ++j)
        out << "y" << j << (j + 1 < F.n_cols() ? "," : "");
    out << '\n';
    char buf[64];
    for (rpt::index_t i = 0; i < F.n_rows(); ++i) {
        for (rpt::index_t j = 0; j < F.n_cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", F(i, j));
            out << buf << (j + 1 < F.n_cols() ? "," : "");
        }
        out << '\n';
    }
}

rpt::DenseMatrix dense_inputs(const rpt::Dataset& ds) {
    return ds.sparse() ? rpt::densify(ds.csc_x()) : ds.dense_x();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree ensembles with random output projections, sparse-aware splitting, "
                 "and L1 forest compression"};
    app.require_subcommand(1);

    std::string config_path, out_path = "out", format = "csv", model_path, data_path;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON config file")->capture_default_str();
    app.add_option("--seed", seed, "base random seed")->capture_default_str();
    app.add_option("--out", out_path, "output path (or prefix)")->capture_default_str();
    app.add_option("--format", format, "results format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    auto* gen = app.add_subcommand("gen", "write a synthetic dataset to disk");
    auto* fit = app.add_subcommand("fit", "fit a learner and save the model");
    auto* predict = app.add_subcommand("predict", "predict a dataset with a saved model");
    predict->add_option("--model", model_path, "model container")->required();
    predict->add_option("--data", data_path, "dataset file (svmlight or csv)");
    auto* eval = app.add_subcommand("eval", "fit, predict and report metrics");
    auto* compress_cmd = app.add_subcommand("compress", "L1-compress a fitted forest");
    auto* bvdecomp = app.add_subcommand("bvdecomp", "bias-variance decomposition");
    auto* bench = app.add_subcommand("bench", "compare split-search input layouts");
    auto* grid = app.add_subcommand("grid", "exhaustive grid search");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(config_path);

        if (gen->parsed()) {
            const rpt::SyntheticSpec spec =
                rpt::synthetic_from_json(cfg.value("generator", json::object()));
            const rpt::Dataset ds = spec.generate(seed);
            const std::string file_format = cfg.value("file_format", "svmlight");
            if (file_format == "svmlight")
                rpt::save_svmlight(ds, out_path);
            else
                rpt::save_csv(ds, out_path);
            std::cout << "wrote " << ds.n() << " samples to " << out_path << "\n";
        } else if (fit->parsed()) {
            const rpt::Dataset train = rpt::dataset_from_config(cfg.at("dataset"), seed);
            const rpt::LearnerSpec learner = rpt::learner_from_json(cfg.at("learner"));
            json model;
            if (learner.family == "forest") {
                rpt::ForestParams p = rpt::forest_params_from_json(learner.params);
                p.seed = seed;
                model = rpt::to_json(rpt::fit_forest(train, p));
            } else if (learner.family == "tree") {
                rpt::GrowthParams p = rpt::growth_params_from_json(learner.params);
                p.seed = seed;
                model = rpt::to_json(train.sparse() ? rpt::grow(train.csc_x(), train.Y, p)
                                                    : rpt::grow(train.dense_x(), train.Y, p));
            } else {
                rpt::BoostParams p = rpt::boost_params_from_json(learner.params);
                p.seed = seed;
                if (learner.family == "gb")
                    model = rpt::to_json(rpt::fit_gb(train, p));
                else if (learner.family == "gb-mo")
                    model = rpt::to_json(rpt::fit_gbmort(train, p));
                else if (learner.family == "gb-rpo")
                    model = rpt::to_json(rpt::fit_gbrt_rpo(train, p));
                else if (learner.family == "gb-relabel-rpo")
                    model = rpt::to_json(rpt::fit_gbrt_relabel_rpo(train, p));
                else
                    throw rpt::Error("unknown learner family '" + learner.family + "'");
            }
            rpt::save_json(model, out_path);
            std::cout << "model written to " << out_path << "\n";
        } else if (predict->parsed()) {
            const json model_json = rpt::load_json(model_path);
            json data_cfg = cfg.value("dataset", json::object());
            if (!data_path.empty()) data_cfg["path"] = data_path;
            const rpt::Dataset ds = rpt::dataset_from_config(data_cfg, seed);
            const rpt::DenseMatrix X = dense_inputs(ds);
            rpt::DenseMatrix F;
            switch (rpt::model_kind(model_json)) {
                case rpt::ModelKind::Tree:
                    F = rpt::predict_dense(rpt::tree_from_json(model_json), X);
                    break;
                case rpt::ModelKind::Forest:
                    F = rpt::predict_forest(rpt::forest_from_json(model_json), X);
                    break;
                case rpt::ModelKind::GB:
                    F = rpt::predict_gb(rpt::gb_model_from_json(model_json), X);
                    break;
                case rpt::ModelKind::Compressed:
                    F = rpt::predict_compressed(rpt::compressed_from_json(model_json), X);
                    break;
            }
            write_predictions_csv(F, out_path);
            std::cout << "predictions written to " << out_path << "\n";
        } else if (eval->parsed()) {
            const rpt::ExperimentConfig exp = rpt::experiment_from_json(cfg);
            const rpt::ExperimentResults results = rpt::run_experiment(exp);
            if (format == "csv")
                rpt::export_csv(results, out_path);
            else
                rpt::export_json(results, out_path);
            for (const auto& [metric, ms] : results.summary)
                std::cout << metric << ": " << ms.first << " +/- " << ms.second << "\n";
        } else if (compress_cmd->parsed()) {
            const rpt::Dataset train = rpt::dataset_from_config(cfg.at("dataset"), seed);
            rpt::ForestParams fp =
                rpt::forest_params_from_json(cfg.value("forest", json::object()));
            fp.seed = seed;
            const double epsilon = cfg.value("epsilon", 0.01);
            const rpt::index_t folds = cfg.value("folds", rpt::index_t{10});
            const rpt::index_t max_steps = cfg.value("max_steps", rpt::index_t{1000});
            const auto builder = [&](const rpt::Dataset& d) { return rpt::fit_forest(d, fp); };
            const rpt::CvSelection sel =
                rpt::select_t_cv(builder, train, epsilon, folds, max_steps, seed);
            const rpt::Forest forest = rpt::fit_forest(train, fp);
            const rpt::CompressedForest compressed =
                rpt::compress(forest, train, sel.t_star, epsilon, max_steps);
            rpt::save_json(rpt::to_json(compressed), out_path);
            std::cout << "t* = " << sel.t_star << ", test nodes " << rpt::node_count(forest)
                      << " -> " << rpt::node_count(compressed) << ", model written to "
                      << out_path << "\n";
        } else if (bvdecomp->parsed()) {
            const rpt::SyntheticSpec spec = rpt::synthetic_from_json(cfg.at("generator"));
            const rpt::LearnerSpec learner = rpt::learner_from_json(cfg.at("learner"));
            const rpt::BVReport report = rpt::bias_variance_decompose(
                spec, learner, cfg.value("n_ls_draws", rpt::index_t{50}),
                cfg.value("n_algo_draws", rpt::index_t{2}),
                cfg.value("n_test", rpt::index_t{1000}), seed);
            json j;
            j["residual_error"] = report.residual_error;
            j["bias_sq"] = report.bias_sq;
            j["var_total"] = report.var_total;
            j["var_ls"] = report.var_ls;
            j["var_algo"] = report.var_algo;
            rpt::save_json(j, out_path);
            std::cout << "bias^2 " << report.bias_sq << ", var " << report.var_total
                      << " (LS " << report.var_ls << " + algo " << report.var_algo << ")\n";
        } else if (bench->parsed()) {
            const rpt::BenchResult result = rpt::bench_split(
                cfg.value("n", rpt::index_t{10000}), cfg.value("p", rpt::index_t{1000}),
                cfg.value("density", 1e-3), cfg.value("tree", "stump"),
                cfg.value("repeats", rpt::index_t{5}), seed);
            json j;
            j["n"] = result.n;
            j["p"] = result.p;
            j["density"] = result.density;
            j["trees_identical"] = result.trees_identical;
            for (const auto& [layout, secs] : result.median_seconds) j["seconds"][layout] = secs;
            rpt::save_json(j, out_path);
            for (const auto& [layout, secs] : result.median_seconds)
                std::cout << layout << ": " << secs << " s\n";
        } else if (grid->parsed()) {
            const rpt::Dataset ds = rpt::dataset_from_config(cfg.at("dataset"), seed);
            std::vector<rpt::LearnerSpec> specs;
            for (const auto& gj : cfg.at("grid")) specs.push_back(rpt::learner_from_json(gj));
            const rpt::GridResult result =
                rpt::grid_search(ds, specs, cfg.value("validation_fraction", 0.2), seed);
            json j;
            j["best_index"] = result.best_index;
            j["best"] = rpt::to_json(result.best);
            json table = json::array();
            for (const auto& [params, loss] : result.table)
                table.push_back({{"params", params}, {"loss", loss}});
            j["table"] = std::move(table);
            rpt::save_json(j, out_path);
            std::cout << "best grid entry: " << result.best_index << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
