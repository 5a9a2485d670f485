#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <rptrees/boosting.hpp>
#include <rptrees/compression.hpp>
#include <rptrees/datasets.hpp>
#include <rptrees/forest.hpp>
#include <rptrees/harness.hpp>
#include <rptrees/metrics.hpp>
#include <rptrees/projections.hpp>
#include <rptrees/serialize.hpp>

namespace py = pybind11;
using namespace rpt;

namespace {

DenseMatrix dense_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
    DenseMatrix out(a.shape(0), a.shape(1));
    std::copy(a.data(), a.data() + a.size(), out.values().begin());
    return out;
}

py::array_t<double> numpy_from_dense(const DenseMatrix& m) {
    const DenseMatrix rm = m.with_layout(Layout::RowMajor);
    py::array_t<double> out({m.n_rows(), m.n_cols()});
    std::copy(rm.values().begin(), rm.values().end(), out.mutable_data());
    return out;
}

CscMatrix csc_from_parts(index_t n_rows, index_t n_cols, std::vector<index_t> indptr,
                         std::vector<index_t> indices, std::vector<double> data) {
    CscMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.indptr = std::move(indptr);
    m.indices = std::move(indices);
    m.data = std::move(data);
    check_csc(m);
    return m;
}

Dataset make_dataset(const py::object& X, const py::array_t<double>& Y, const std::string& task) {
    Dataset ds;
    if (py::isinstance<CscMatrix>(X))
        ds.X = X.cast<CscMatrix>();
    else
        ds.X = dense_from_numpy(X.cast<py::array_t<double>>());
    ds.Y = dense_from_numpy(Y);
    if (task == "regression")
        ds.task = Task::Regression;
    else if (task == "binary")
        ds.task = Task::BinaryClassification;
    else if (task == "multilabel")
        ds.task = Task::Multilabel;
    else
        throw Error("unknown task '" + task + "'");
    return ds;
}

GrowthParams growth_from_kwargs(index_t max_depth, index_t min_samples_split, index_t max_leaves,
                                index_t features_per_split, const std::string& splitter,
                                const std::string& impurity, std::uint64_t seed) {
    GrowthParams p;
    p.max_depth = max_depth;
    p.min_samples_split = min_samples_split;
    p.max_leaves = max_leaves;
    p.features_per_split = features_per_split;
    p.splitter = splitter == "random-threshold" ? SplitterKind::RandomThreshold
                                                : SplitterKind::Exhaustive;
    if (impurity == "gini")
        p.impurity = ImpurityKind::Gini;
    else if (impurity == "entropy")
        p.impurity = ImpurityKind::Entropy;
    else
        p.impurity = ImpurityKind::Variance;
    p.seed = seed;
    return p;
}

ProjectionKind projection_from_name(const std::string& name, double s) {
    if (name == "gaussian") return ProjectionKind::gaussian();
    if (name == "rademacher") return ProjectionKind::rademacher(s);
    if (name == "subsample") return ProjectionKind::subsample();
    throw Error("unknown projection '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_rptrees, m) {
    m.doc() = "tree ensembles with random output projections, sparse-aware split search, "
              "and L1 forest compression";

    py::register_exception<Error>(m, "RptreesError");

    py::class_<CscMatrix>(m, "CscMatrix")
        .def(py::init(&csc_from_parts), py::arg("n_rows"), py::arg("n_cols"), py::arg("indptr"),
             py::arg("indices"), py::arg("data"))
        .def_readonly("n_rows", &CscMatrix::n_rows)
        .def_readonly("n_cols", &CscMatrix::n_cols)
        .def_readonly("indptr", &CscMatrix::indptr)
        .def_readonly("indices", &CscMatrix::indices)
        .def_readonly("data", &CscMatrix::data)
        .def("nnz", &CscMatrix::nnz)
        .def("density", [](const CscMatrix& mat) { return density(mat); })
        .def("toarray", [](const CscMatrix& mat) { return numpy_from_dense(densify(mat)); });

    m.def("csc_from_dense",
          [](const py::array_t<double>& a) { return sparsify(dense_from_numpy(a)); });

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("X"), py::arg("Y"), py::arg("task") = "regression")
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("p", &Dataset::p)
        .def_property_readonly("d", &Dataset::d)
        .def_property_readonly("sparse", &Dataset::sparse)
        .def_property_readonly("X", [](const Dataset& ds) -> py::object {
            if (ds.sparse()) return py::cast(ds.csc_x());
            return numpy_from_dense(ds.dense_x());
        })
        .def_property_readonly("Y", [](const Dataset& ds) { return numpy_from_dense(ds.Y); });

    m.def("gen_friedman1",
          [](index_t n, double noise_sd, std::uint64_t seed, const std::string& input_law,
             double x5_coeff) {
              Friedman1Options opts;
              opts.input_law = input_law == "normal" ? InputLaw::StandardNormal
                                                     : InputLaw::Uniform01;
              opts.x5_coeff = x5_coeff;
              return gen_friedman1(n, noise_sd, seed, opts);
          },
          py::arg("n"), py::arg("noise_sd") = 1.0, py::arg("seed") = 0,
          py::arg("input_law") = "uniform", py::arg("x5_coeff") = 5.0);
    m.def("gen_friedman1_chain", &gen_friedman1_chain, py::arg("n"), py::arg("d"),
          py::arg("seed") = 0);
    m.def("gen_friedman1_group", &gen_friedman1_group, py::arg("n"), py::arg("d"),
          py::arg("seed") = 0);
    m.def("gen_friedman1_ind", &gen_friedman1_ind, py::arg("n"), py::arg("d"),
          py::arg("seed") = 0);
    m.def("gen_twonorm", &gen_twonorm, py::arg("n"), py::arg("seed") = 0);
    m.def("gen_random_sparse_regression", &gen_random_sparse_regression, py::arg("n"),
          py::arg("p"), py::arg("density"), py::arg("seed") = 0);
    m.def("load_svmlight",
          [](const std::string& path, const std::string& task) {
              Task t = Task::Regression;
              if (task == "binary") t = Task::BinaryClassification;
              if (task == "multilabel") t = Task::Multilabel;
              return load_svmlight(path, t);
          },
          py::arg("path"), py::arg("task") = "regression");
    m.def("save_svmlight", &save_svmlight, py::arg("dataset"), py::arg("path"));

    py::class_<Tree>(m, "Tree")
        .def_property_readonly("n_nodes", [](const Tree& t) { return t.nodes.size(); })
        .def("n_test_nodes", &Tree::n_test_nodes)
        .def("n_leaves", &Tree::n_leaves)
        .def("max_depth", &Tree::max_depth)
        .def("predict",
             [](const Tree& t, const py::array_t<double>& X) {
                 return numpy_from_dense(predict_dense(t, dense_from_numpy(X)));
             })
        .def("predict_csr",
             [](const Tree& t, const CscMatrix& X) {
                 return numpy_from_dense(predict_csr(t, csc_to_csr(X)));
             })
        .def("mdi_importances", &mdi_importances)
        .def("to_json", [](const Tree& t) { return to_json(t).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return tree_from_json(json::parse(s)); })
        .def("__eq__", [](const Tree& a, const Tree& b) { return a == b; });

    m.def("grow_tree",
          [](const Dataset& ds, index_t max_depth, index_t min_samples_split, index_t max_leaves,
             index_t features_per_split, const std::string& splitter, const std::string& impurity,
             std::uint64_t seed) {
              const GrowthParams p = growth_from_kwargs(max_depth, min_samples_split, max_leaves,
                                                        features_per_split, splitter, impurity,
                                                        seed);
              return ds.sparse() ? grow(ds.csc_x(), ds.Y, p) : grow(ds.dense_x(), ds.Y, p);
          },
          py::arg("dataset"), py::arg("max_depth") = -1, py::arg("min_samples_split") = 2,
          py::arg("max_leaves") = -1, py::arg("features_per_split") = -1,
          py::arg("splitter") = "exhaustive", py::arg("impurity") = "variance",
          py::arg("seed") = 0);

    py::class_<Forest>(m, "Forest")
        .def_property_readonly("n_trees", [](const Forest& f) { return f.trees.size(); })
        .def("n_test_nodes", &Forest::n_test_nodes)
        .def("predict",
             [](const Forest& f, const py::array_t<double>& X) {
                 return numpy_from_dense(predict_forest(f, dense_from_numpy(X)));
             })
        .def("to_json", [](const Forest& f) { return to_json(f).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return forest_from_json(json::parse(s)); });

    m.def("fit_forest",
          [](const Dataset& ds, index_t n_trees, bool bootstrap, index_t max_depth,
             index_t min_samples_split, index_t features_per_split, const std::string& splitter,
             const std::string& impurity, const std::string& projection, index_t q, double s,
             bool shared, std::uint64_t seed) {
              ForestParams p;
              p.n_trees = n_trees;
              p.bootstrap = bootstrap;
              p.tree_params = growth_from_kwargs(max_depth, min_samples_split, -1,
                                                 features_per_split, splitter, impurity, 0);
              if (!projection.empty()) {
                  ForestProjection proj;
                  proj.kind = projection_from_name(projection, s);
                  proj.q = q;
                  proj.shared = shared;
                  p.projection = proj;
              }
              p.seed = seed;
              return fit_forest(ds, p);
          },
          py::arg("dataset"), py::arg("n_trees") = 100, py::arg("bootstrap") = false,
          py::arg("max_depth") = -1, py::arg("min_samples_split") = 2,
          py::arg("features_per_split") = -1, py::arg("splitter") = "exhaustive",
          py::arg("impurity") = "variance", py::arg("projection") = "", py::arg("q") = 1,
          py::arg("s") = 1.0, py::arg("shared") = false, py::arg("seed") = 0);

    py::class_<GBModel>(m, "GBModel")
        .def_property_readonly("n_stages", [](const GBModel& g) { return g.stages.size(); })
        .def_property_readonly("rho0", [](const GBModel& g) { return g.rho0; })
        .def("stage_rho", [](const GBModel& g, std::size_t i) { return g.stages.at(i).rho; })
        .def("predict",
             [](const GBModel& g, const py::array_t<double>& X) {
                 return numpy_from_dense(predict_gb(g, dense_from_numpy(X)));
             })
        .def("staged_training_loss",
             [](const GBModel& g, const Dataset& ds) { return staged_training_loss(g, ds); })
        .def("to_json", [](const GBModel& g) { return to_json(g).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return gb_model_from_json(json::parse(s)); });

    auto boost_params = [](index_t n_stages, double mu, const std::string& loss,
                           index_t max_leaves, index_t features_per_split,
                           const std::string& projection, index_t q, double s,
                           std::uint64_t seed) {
        BoostParams p;
        p.n_stages = n_stages;
        p.mu = mu;
        p.loss.kind = [&] {
            if (loss == "square") return LossKind::Square;
            if (loss == "absolute") return LossKind::Absolute;
            if (loss == "logistic") return LossKind::Logistic;
            if (loss == "l2-multi") return LossKind::L2Multi;
            if (loss == "l1-multi") return LossKind::L1Multi;
            if (loss == "logistic-multi") return LossKind::LogisticMulti;
            throw Error("unknown loss '" + loss + "'");
        }();
        p.weak.max_leaves = max_leaves;
        p.weak.features_per_split = features_per_split;
        p.projection = projection_from_name(projection, s);
        p.q = q;
        p.seed = seed;
        return p;
    };

    const auto boost_args = [](auto fn) { return fn; };
    (void)boost_args;

    m.def("fit_gb",
          [boost_params](const Dataset& ds, index_t n_stages, double mu, const std::string& loss,
                         index_t max_leaves, index_t features_per_split, std::uint64_t seed) {
              return fit_gb(ds, boost_params(n_stages, mu, loss, max_leaves, features_per_split,
                                             "subsample", 1, 1.0, seed));
          },
          py::arg("dataset"), py::arg("n_stages") = 100, py::arg("mu") = 0.1,
          py::arg("loss") = "square", py::arg("max_leaves") = 2,
          py::arg("features_per_split") = -1, py::arg("seed") = 0);
    m.def("fit_gbmort",
          [boost_params](const Dataset& ds, index_t n_stages, double mu, const std::string& loss,
                         index_t max_leaves, index_t features_per_split, std::uint64_t seed) {
              return fit_gbmort(ds, boost_params(n_stages, mu, loss, max_leaves,
                                                 features_per_split, "subsample", 1, 1.0, seed));
          },
          py::arg("dataset"), py::arg("n_stages") = 100, py::arg("mu") = 0.1,
          py::arg("loss") = "l2-multi", py::arg("max_leaves") = 2,
          py::arg("features_per_split") = -1, py::arg("seed") = 0);
    m.def("fit_gbrt_rpo",
          [boost_params](const Dataset& ds, index_t n_stages, double mu, const std::string& loss,
                         index_t max_leaves, index_t features_per_split,
                         const std::string& projection, double s, std::uint64_t seed) {
              return fit_gbrt_rpo(ds, boost_params(n_stages, mu, loss, max_leaves,
                                                   features_per_split, projection, 1, s, seed));
          },
          py::arg("dataset"), py::arg("n_stages") = 100, py::arg("mu") = 0.1,
          py::arg("loss") = "l2-multi", py::arg("max_leaves") = 2,
          py::arg("features_per_split") = -1, py::arg("projection") = "subsample",
          py::arg("s") = 1.0, py::arg("seed") = 0);
    m.def("fit_gbrt_relabel_rpo",
          [boost_params](const Dataset& ds, index_t n_stages, double mu, const std::string& loss,
                         index_t max_leaves, index_t features_per_split,
                         const std::string& projection, index_t q, double s, std::uint64_t seed) {
              return fit_gbrt_relabel_rpo(
                  ds, boost_params(n_stages, mu, loss, max_leaves, features_per_split, projection,
                                   q, s, seed));
          },
          py::arg("dataset"), py::arg("n_stages") = 100, py::arg("mu") = 0.1,
          py::arg("loss") = "l2-multi", py::arg("max_leaves") = 2,
          py::arg("features_per_split") = -1, py::arg("projection") = "subsample",
          py::arg("q") = 1, py::arg("s") = 1.0, py::arg("seed") = 0);

    // Projections
    m.def("sample_projection",
          [](const std::string& kind, index_t q, index_t d, double s, std::uint64_t seed) {
              Rng rng(seed);
              const ProjectionMatrix phi = sample_projection(projection_from_name(kind, s), q, d,
                                                             rng);
              if (phi.is_subsample()) {
                  DenseMatrix dense(q, d);
                  for (index_t r = 0; r < q; ++r) dense(r, phi.rows[r]) = 1.0;
                  return numpy_from_dense(dense);
              }
              return numpy_from_dense(phi.dense);
          },
          py::arg("kind"), py::arg("q"), py::arg("d"), py::arg("s") = 1.0, py::arg("seed") = 0);
    m.def("jl_min_dimension", &jl_min_dimension, py::arg("epsilon"), py::arg("n"));

    // Metrics
    m.def("subset_accuracy", [](const py::array_t<double>& Y, const py::array_t<double>& Yh) {
        return subset_accuracy(dense_from_numpy(Y), dense_from_numpy(Yh));
    });
    m.def("hamming_loss", [](const py::array_t<double>& Y, const py::array_t<double>& Yh) {
        return hamming_loss(dense_from_numpy(Y), dense_from_numpy(Yh));
    });
    m.def("jaccard", [](const py::array_t<double>& Y, const py::array_t<double>& Yh) {
        return jaccard(dense_from_numpy(Y), dense_from_numpy(Yh));
    });
    m.def("one_error", [](const py::array_t<double>& Y, const py::array_t<double>& F) {
        return one_error(dense_from_numpy(Y), dense_from_numpy(F));
    });
    m.def("coverage_error", [](const py::array_t<double>& Y, const py::array_t<double>& F) {
        return coverage_error(dense_from_numpy(Y), dense_from_numpy(F));
    });
    m.def("ranking_loss", [](const py::array_t<double>& Y, const py::array_t<double>& F) {
        return ranking_loss(dense_from_numpy(Y), dense_from_numpy(F));
    });
    m.def("lrap", [](const py::array_t<double>& Y, const py::array_t<double>& F) {
        return lrap(dense_from_numpy(Y), dense_from_numpy(F)).value;
    });
    m.def("roc_auc", &roc_auc, py::arg("y_true"), py::arg("scores"));
    m.def("regression_metrics", [](const py::array_t<double>& Y, const py::array_t<double>& Yh) {
        const RegressionMetrics r = regression_metrics(dense_from_numpy(Y), dense_from_numpy(Yh));
        py::dict out;
        out["mse"] = r.mse;
        out["mae"] = r.mae;
        out["r2"] = r.r2;
        out["macro_r2"] = r.macro_r2;
        out["variance_r2"] = r.variance_r2;
        return out;
    });

    // Compression
    py::class_<CompressedForest>(m, "CompressedForest")
        .def("n_test_nodes", &CompressedForest::n_test_nodes)
        .def("predict",
             [](const CompressedForest& c, const py::array_t<double>& X) {
                 return numpy_from_dense(predict_compressed(c, dense_from_numpy(X)));
             })
        .def("to_json", [](const CompressedForest& c) { return to_json(c).dump(); })
        .def_static("from_json",
                    [](const std::string& s) { return compressed_from_json(json::parse(s)); });

    m.def("lift", [](const Forest& f, const py::array_t<double>& X) {
        return lift(f, dense_from_numpy(X));
    });
    m.def("compress",
          [](const Forest& f, const Dataset& ds, double t_star, double epsilon,
             index_t max_steps) { return compress(f, ds, t_star, epsilon, max_steps); },
          py::arg("forest"), py::arg("dataset"), py::arg("t_star"), py::arg("epsilon") = 0.01,
          py::arg("max_steps") = 1000);
    m.def("select_t_cv",
          [](const Dataset& ds, index_t n_trees, index_t features_per_split, double epsilon,
             index_t folds, index_t max_steps, std::uint64_t seed) {
              ForestParams fp;
              fp.n_trees = n_trees;
              fp.tree_params.splitter = SplitterKind::RandomThreshold;
              fp.tree_params.features_per_split = features_per_split;
              fp.seed = mix_seed(seed, 0x6574);
              const auto builder = [&fp](const Dataset& d) { return fit_forest(d, fp); };
              return select_t_cv(builder, ds, epsilon, folds, max_steps, seed).t_star;
          },
          py::arg("dataset"), py::arg("n_trees") = 100, py::arg("features_per_split") = -1,
          py::arg("epsilon") = 0.01, py::arg("folds") = 10, py::arg("max_steps") = 1000,
          py::arg("seed") = 0);
}
