"""End-to-end checks of the python bindings against known values."""

import json
import math

import numpy as np
import pytest

import scenematch as sm

CONFIG = json.dumps(
    {"d": 8, "K": 2, "batch_size": 4, "epochs": 2, "seed": 3, "val_fraction": 0.25}
)


@pytest.fixture(scope="module")
def dataset():
    return sm.synth_dataset(seed=5, pairs=8, n=3, m=3, d=8)


@pytest.fixture(scope="module")
def trained(dataset):
    return sm.train(CONFIG, dataset)


def test_matmul_matches_numpy():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 6))
    b = rng.standard_normal((6, 3))
    got = sm.matmul(a, b)
    assert got.shape == (4, 3)
    np.testing.assert_allclose(got, a @ b, rtol=1e-12, atol=1e-14)


def test_row_softmax_normalizes():
    rng = np.random.default_rng(1)
    x = rng.uniform(-50.0, 50.0, size=(5, 7))
    s = sm.row_softmax(x)
    assert (s >= 0.0).all()
    np.testing.assert_allclose(s.sum(axis=1), np.ones(5), rtol=0, atol=1e-12)


def test_masked_softmax_respects_the_mask():
    x = np.zeros((1, 3))
    mask = np.array([[1.0, 0.0, 1.0]])
    s = sm.masked_row_softmax(x, mask)
    assert s[0, 1] == 0.0
    assert s[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_two_way_softmax_sums_to_exactly_one():
    w_obj, w_ra = sm.two_way_softmax(5.0, 0.0)
    assert w_obj + w_ra == 1.0
    assert w_obj == pytest.approx(math.exp(5.0) / (math.exp(5.0) + 1.0), rel=1e-12)


def test_activations():
    x = np.array([[-1.0, 0.0, 2.0]])
    np.testing.assert_allclose(sm.leaky_relu(x), [[-0.2, 0.0, 2.0]], rtol=0, atol=0)
    np.testing.assert_allclose(
        sm.elu(x), [[math.exp(-1.0) - 1.0, 0.0, 2.0]], rtol=1e-15, atol=0
    )


def test_mean_row_cosine():
    a = np.array([[3.0, 4.0]])
    assert sm.mean_row_cosine(a, a) == pytest.approx(1.0, abs=1e-15)
    assert sm.mean_row_cosine(a, 2.5 * a) == pytest.approx(1.0, abs=1e-15)


def test_triplet_loss_values():
    satisfied = np.eye(3) + 0.01
    assert sm.triplet_loss(satisfied, 0.2) == 0.0
    grid = np.array([[0.5, 0.6], [0.6, 0.5]])
    assert sm.triplet_loss(grid, 0.2) == pytest.approx(1.2, rel=1e-14)


def test_mining_picks_hardest_off_diagonal():
    grid = np.array([[9.0, 0.2, 0.3], [0.1, 9.0, 0.4], [0.6, 0.5, 9.0]])
    text_for_row, image_for_col = sm.mine_hard_negatives(grid)
    assert text_for_row == [2, 2, 0]
    assert image_for_col == [2, 2, 1]


def test_ranking_and_recall():
    grid = np.array([[0.9, 0.1], [0.8, 0.2]])
    ranks = sm.rank_rows(grid)
    assert ranks == [[0, 1], [0, 1]]
    assert sm.recall_at_k(ranks, [0, 1], 1) == 50.0
    assert sm.recall_at_k(ranks, [0, 1], 2) == 100.0


def test_rsum_reference_rows_are_exact():
    assert sm.rsum([81.5, 97.6, 98.4, 58.2, 82.5, 91.8]) == 510.0
    assert sm.rsum([81.1, 96.9, 99.0, 63.1, 90.2, 97.1]) == 527.4


def test_synth_dataset_shape(dataset):
    doc = json.loads(dataset)
    assert doc["dimension"] == 8
    assert len(doc["records"]) == 8
    first = doc["records"][0]
    assert {"pair_id", "image", "text"} <= set(first)


def test_train_logs_and_checkpoint(dataset, trained):
    checkpoint, lines = trained
    assert len(lines) == 2
    for line in lines:
        assert len(line.split("\t")) == 6
    # a fresh run of the same seeded inputs reproduces the checkpoint verbatim
    again, _ = sm.train(CONFIG, dataset)
    assert again == checkpoint


def test_evaluate_reports_six_recalls(dataset, trained):
    checkpoint, _ = trained
    rep = sm.evaluate(checkpoint, dataset)
    assert set(rep) == {"image_as_query", "text_as_query", "rsum"}
    six = list(rep["image_as_query"]) + list(rep["text_as_query"])
    assert all(0.0 <= r <= 100.0 for r in six)
    assert rep["rsum"] == pytest.approx(sum(six), rel=1e-12)
    # the local term shifts the score mix when enabled
    assert isinstance(sm.evaluate(checkpoint, dataset, delta=0.0)["rsum"], float)


def test_fusion_ratios_start_at_the_configured_logits(dataset):
    checkpoint, _ = sm.train(
        json.dumps({"d": 8, "K": 2, "batch_size": 4, "epochs": 0}), dataset
    )
    ri, rt = sm.fusion_ratios(checkpoint)
    want = math.exp(5.0) / (math.exp(5.0) + 1.0)
    assert ri == pytest.approx(want, rel=1e-12)
    assert rt == pytest.approx(want, rel=1e-12)


def test_pair_score_exposes_the_grid(dataset, trained):
    checkpoint, _ = trained
    doc = json.loads(dataset)
    ids = [r["pair_id"] for r in doc["records"][:2]]
    out = sm.pair_score(checkpoint, dataset, ids[0], ids[1])
    assert set(out) == {"score", "global", "local", "grid"}
    assert np.asarray(out["grid"]).shape == (3, 3)
    assert out["score"] == pytest.approx(
        out["global"] + 0.3 * out["local"], rel=1e-12
    )
    with pytest.raises(ValueError):
        sm.pair_score(checkpoint, dataset, "nope", ids[1])


def test_gradcheck_passes():
    rep = sm.gradcheck(seed=7)
    assert rep["pass"] is True
    assert rep["max_rel_err"] < 1e-5
    assert rep["attempts"] >= 1
    assert rep["summary"]
