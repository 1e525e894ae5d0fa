import json
import math
import pathlib
import subprocess
import sys

import numpy as np
import pytest

import tvsvm

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "tests" / "fixtures"


def test_families_and_records():
    families = tvsvm.kernel_families()
    assert len(families) == 12
    k = tvsvm.KernelSpec("Gaussian beta=0.5")
    assert k.family == "Gaussian"
    assert tvsvm.KernelSpec(k.to_record()) == k
    with pytest.raises(tvsvm.InvalidArgument):
        tvsvm.KernelSpec("Gaussian beta=-1")


def test_kernel_values_match_numpy():
    rng = np.random.default_rng(0)
    x, z = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    gauss = tvsvm.KernelSpec("Gaussian beta=0.7")
    assert tvsvm.kernel_forward(gauss, x, z) == pytest.approx(math.exp(-0.7 * np.sum((x - z) ** 2)), rel=1e-14)
    for family in ["Linear", "Gaussian", "Cauchy", "Tanh", "Power"]:
        k = tvsvm.KernelSpec(family)
        assert abs(tvsvm.neural_forward(k, x, z) - tvsvm.kernel_forward(k, x, z)) <= 1e-9


def test_simplex_weights_columns_sum_to_one():
    w = tvsvm.simplex_weights(np.array([[0.3, -2.0], [1.0, 4.0], [-5.0, 0.0]]))
    assert np.allclose(w.sum(axis=0), 1.0, atol=1e-15)
    assert (w > 0).all()


def test_train_predict_and_round_trip(tmp_path):
    X, y = tvsvm.make_xor_gaussians(200, 0.15, 3)
    config = tvsvm.TrainConfig()
    config.kernels = "Gaussian beta=2,Linear"
    config.num_support = 8
    config.epochs = 60
    config.seed = 5
    model, report = tvsvm.train(X, y, config)
    assert not report["diverged"]
    assert len(report["epochs"]) == 60
    assert model.accuracy(X, y) > 0.9
    assert set(np.unique(model.predict(X))) <= {-1, 1}

    path = tmp_path / "model.json"
    model.save(path)
    again = tvsvm.Model.load(path)
    assert np.array_equal(again.decision(X), model.decision(X))
    assert json.loads(model.to_json())["format"]


def test_cpd_check_verdicts():
    pts = np.random.default_rng(1).uniform(0, 1, (8, 2))
    assert tvsvm.cpd_check(tvsvm.KernelSpec("Gaussian"), pts)["passed"]
    mq = tvsvm.cpd_check(tvsvm.KernelSpec("MultiQuadratic"), pts)
    assert not mq["passed"]
    assert abs(sum(mq["witness_coefficients"])) < 1e-9
    assert mq["witness_form"] < 0


def test_gradcheck_smoothed():
    r = tvsvm.gradcheck("Laplacian beta=1,Power p=0.7", mkl_layers=2, seed=4)
    assert r["passed"], r


def test_descriptor_shape():
    frames = [np.arange(8, dtype=float).reshape(4, 2) + t for t in range(6)]
    d = tvsvm.video_descriptor(frames, 4)
    assert d.shape == (4 * 2 * 4,)
    assert tvsvm.temporal_chunking(np.arange(1.0, 9.0).reshape(8, 1), 4).ravel() == pytest.approx([1.5, 3.5, 5.5, 7.5])


def test_errors_map_to_exceptions():
    X = np.zeros((3, 2))
    with pytest.raises(tvsvm.DataError):
        tvsvm.train(X, np.array([1, 1, 2, 2]))


def test_sbu_converter(tmp_path):
    out = tmp_path / "sbu.json"
    subprocess.run(
        [sys.executable, str(ROOT / "tools" / "sbu_to_json.py"), str(FIXTURES / "sbu_raw"), "--out", str(out)],
        check=True,
    )
    videos = json.loads(out.read_text())["videos"]
    assert len(videos) == 2
    assert sorted(v["label"] for v in videos) == [2, 5]
    assert all(len(frame) == 30 and all(len(j) == 3 for j in frame) for v in videos for frame in v["frames"])
    assert sorted(len(v["frames"]) for v in videos) == [6, 9]
