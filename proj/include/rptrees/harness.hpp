#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rptrees/boosting.hpp"
#include "rptrees/compression.hpp"
#include "rptrees/datasets.hpp"
#include "rptrees/forest.hpp"
#include "rptrees/serialize.hpp"

namespace rpt {

// Synthetic sources with a known target function, so bias terms are
// computable in the bias-variance harness.
struct SyntheticSpec {
    std::string kind = "friedman1";  // friedman1 | friedman1-chain | friedman1-group |
                                     // friedman1-ind | twonorm | sparse-regression
    index_t n = 300;
    index_t d = 1;
    double noise_sd = 1.0;      // friedman1 only
    index_t p = 1000;           // sparse-regression only
    double density = 1e-3;      // sparse-regression only
    Friedman1Options friedman;  // friedman1 only

    Dataset generate(std::uint64_t seed) const;
    bool has_bayes() const { return kind == "friedman1"; }
    DenseMatrix bayes(const DenseMatrix& X) const;
    double noise_variance() const { return noise_sd * noise_sd; }
};

SyntheticSpec synthetic_from_json(const json& j);
json to_json(const SyntheticSpec& s);

// A learner is any of the library's fit procedures plus its parameters.
struct LearnerSpec {
    std::string family = "forest";  // tree | forest | gb | gb-mo | gb-rpo | gb-relabel-rpo
    json params;                    // family-specific parameter block
};

LearnerSpec learner_from_json(const json& j);
json to_json(const LearnerSpec& s);

using Predictor = std::function<DenseMatrix(const DenseMatrix&)>;

// Fits the learner with its seed overridden by `seed`.
Predictor fit_predictor(const LearnerSpec& spec, const Dataset& train, std::uint64_t seed);

struct BVReport {
    double residual_error = 0.0;
    double bias_sq = 0.0;
    double var_total = 0.0;
    double var_ls = 0.0;
    double var_algo = 0.0;
    index_t n_ls_draws = 0;
    index_t n_test = 0;
};

// Monte-Carlo estimate of the learning-set / algorithm variance split on a
// fixed test input grid.
BVReport bias_variance_decompose(const SyntheticSpec& generator, const LearnerSpec& learner,
                                 index_t n_ls_draws, index_t n_algo_draws, index_t n_test,
                                 std::uint64_t seed);

struct GridResult {
    index_t best_index = 0;
    LearnerSpec best;
    std::vector<std::pair<json, double>> table;  // (params, validation loss)
};

// Exhaustive search; validation loss is MSE in regression and error rate in
// classification. Ties resolve to the first grid entry.
GridResult grid_search(const Dataset& ds, const std::vector<LearnerSpec>& grid,
                       double validation_fraction, std::uint64_t seed);

struct BenchResult {
    std::map<std::string, double> median_seconds;  // row-major | col-major | csc
    bool trees_identical = false;
    index_t n = 0, p = 0;
    double density = 0.0;
};

// Fits the same tree from three input layouts, asserts the grown trees are
// identical, then reports median wall time over `repeats` (first warm-up run
// discarded).
BenchResult bench_split(index_t n, index_t p, double density, const std::string& tree_kind,
                        index_t repeats, std::uint64_t seed);

struct ExperimentConfig {
    std::string name = "experiment";
    json dataset;   // {"generator": {...}} or {"path": ..., "format": ..., "task": ...}
    json split;     // optional train/test split block
    LearnerSpec learner;
    std::vector<std::string> metrics;
    std::vector<std::uint64_t> seeds;
};

ExperimentConfig experiment_from_json(const json& j);

struct ExperimentResults {
    std::string name;
    // rows: (seed, metric, value)
    std::vector<std::tuple<std::uint64_t, std::string, double>> rows;
    std::map<std::string, std::pair<double, double>> summary;  // metric -> (mean, std)
};

ExperimentResults run_experiment(const ExperimentConfig& config);

// CSV header: experiment,seed,metric,value
void export_csv(const ExperimentResults& results, const std::string& path);
void export_json(const ExperimentResults& results, const std::string& path);
ExperimentResults results_from_json(const json& j);

double named_metric(const std::string& name, Task task, const DenseMatrix& Y,
                    const DenseMatrix& F);

Dataset dataset_from_config(const json& dataset_cfg, std::uint64_t seed);

}  // namespace rpt
