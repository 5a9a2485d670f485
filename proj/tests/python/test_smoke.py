"""Smoke tests for the python bindings: each major operation is driven once
end to end and checked against easy invariants."""

import numpy as np
import pytest

import rptrees as rt


def test_generators_and_dataset_shapes():
    ds = rt.gen_friedman1(50, noise_sd=1.0, seed=3)
    assert ds.n == 50
    assert ds.p == 10
    assert ds.d == 1
    assert not ds.sparse
    assert ds.X.shape == (50, 10)

    chain = rt.gen_friedman1_chain(40, 6, seed=1)
    assert chain.Y.shape == (40, 6)

    sparse = rt.gen_random_sparse_regression(200, 30, 0.1, seed=2)
    assert sparse.sparse
    assert sparse.X.nnz() > 0
    assert abs(sparse.X.density() - 0.1) < 0.05


def test_csc_roundtrip():
    rng = np.random.default_rng(7)
    dense = np.where(rng.random((20, 8)) < 0.3, rng.normal(size=(20, 8)), 0.0)
    csc = rt.csc_from_dense(dense)
    np.testing.assert_array_equal(csc.toarray(), dense)


def test_tree_grow_predict_and_importances():
    ds = rt.gen_friedman1(200, noise_sd=0.0, seed=5)
    tree = rt.grow_tree(ds, seed=1)
    pred = tree.predict(ds.X)
    np.testing.assert_allclose(pred[:, 0], ds.Y[:, 0], atol=1e-10)

    # Fully grown trees memorize; importances are read off a tree whose
    # splits stay statistically meaningful.
    chunky = rt.grow_tree(ds, min_samples_split=20, seed=1)
    mdi = chunky.mdi_importances()
    assert len(mdi) == 10
    assert sum(mdi) == pytest.approx(1.0)
    # Irrelevant inputs x6..x10 carry little importance on noise-free data.
    assert sum(mdi[5:]) < 0.1


def test_sparse_dense_growth_equivalence():
    ds = rt.gen_random_sparse_regression(150, 20, 0.2, seed=11)
    dense = rt.Dataset(ds.X.toarray(), ds.Y, task="regression")
    t_sparse = rt.grow_tree(ds, seed=4)
    t_dense = rt.grow_tree(dense, seed=4)
    assert t_sparse == t_dense


def test_forest_fit_predict_and_serialization():
    ds = rt.gen_friedman1(150, noise_sd=1.0, seed=9)
    forest = rt.fit_forest(ds, n_trees=20, bootstrap=True, features_per_split=3, seed=2)
    pred = forest.predict(ds.X)
    assert pred.shape == (150, 1)
    again = rt.Forest.from_json(forest.to_json())
    np.testing.assert_array_equal(again.predict(ds.X), pred)


def test_forest_with_output_projection():
    ds = rt.gen_friedman1_group(120, 8, seed=13)
    forest = rt.fit_forest(ds, n_trees=10, projection="gaussian", q=3, seed=5)
    assert forest.predict(ds.X).shape == (120, 8)  # leaves live in the original space


def test_boosting_variants_and_staged_loss():
    ds = rt.gen_friedman1_group(120, 4, seed=17)
    models = [
        rt.fit_gb(ds, n_stages=40, mu=0.5, seed=1),
        rt.fit_gbmort(ds, n_stages=40, mu=0.5, seed=1),
        rt.fit_gbrt_rpo(ds, n_stages=40, mu=0.5, seed=1),
        rt.fit_gbrt_relabel_rpo(ds, n_stages=40, mu=0.5, projection="gaussian", q=2, seed=1),
    ]
    for model in models:
        losses = model.staged_training_loss(ds)
        assert len(losses) == 41
        assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))
        assert model.predict(ds.X).shape == (120, 4)


def test_projections_and_jl_dimension():
    assert rt.jl_min_dimension(0.429, 100) == 201
    phi = rt.sample_projection("gaussian", 5, 40, seed=3)
    assert phi.shape == (5, 40)
    sub = rt.sample_projection("subsample", 4, 10, seed=3)
    assert sub.sum() == pytest.approx(4.0)  # four identity rows


def test_metrics_worked_example():
    y = np.array([[1, 0, 1, 0, 0], [1, 0, 0, 0, 0]], dtype=float)
    f = np.array([[0.75, 0.6, 0.1, 0.8, 0.15], [0.25, 0.8, 0.1, 0.15, 0.3]])
    yhat = (f > 0.5).astype(float)
    assert rt.subset_accuracy(y, yhat) == 0.0
    assert rt.hamming_loss(y, yhat) == pytest.approx(0.5)
    assert rt.jaccard(y, yhat) == pytest.approx(0.125)
    assert rt.coverage_error(y, f) == pytest.approx(4.0)
    assert rt.ranking_loss(y, f) == pytest.approx(7 / 12)
    assert rt.lrap(y, f) == pytest.approx(47 / 120)
    assert rt.one_error(y, f) == 1.0


def test_compression_pipeline():
    ds = rt.gen_friedman1(200, noise_sd=1.0, seed=23)
    forest = rt.fit_forest(ds, n_trees=30, splitter="random-threshold", seed=7)
    lifted = rt.lift(forest, ds.X)
    assert lifted.n_rows == 200

    compressed = rt.compress(forest, ds, t_star=1.0, epsilon=0.01, max_steps=200)
    assert compressed.n_test_nodes() <= forest.n_test_nodes()
    pred = compressed.predict(ds.X)
    assert pred.shape == (200, 1)
    again = rt.CompressedForest.from_json(compressed.to_json())
    np.testing.assert_array_equal(again.predict(ds.X), pred)


def test_svmlight_io(tmp_path):
    ds = rt.gen_random_sparse_regression(30, 12, 0.4, seed=29)
    path = str(tmp_path / "data.svm")
    rt.save_svmlight(ds, path)
    back = rt.load_svmlight(path, task="regression")
    assert back.n == 30
    np.testing.assert_array_equal(back.X.toarray(), ds.X.toarray())
    np.testing.assert_array_equal(back.Y, ds.Y)
