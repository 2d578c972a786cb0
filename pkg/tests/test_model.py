import numpy as np
import pytest

from fmgad.inject import synthetic_benchmark
from fmgad.metrics import make_few_shot_split
from fmgad.model import (TrainConfig, anomaly_scores, highpass_trace, init_params, joint_loss, train)
from fmgad.reconstruct import ReconConfig
from fmgad.sampler import SamplerConfig
from benchruns import bench_run

SMALL = dict(hidden=16, batch_size=64, score_rounds=2, recon=ReconConfig(M=2, high_depth=2))


@pytest.fixture(scope="module")
def bench():
    data = synthetic_benchmark(seed=0, n=150, total=20)
    fewshot, _ = make_few_shot_split(data.labels, 5, 0)
    return data, fewshot


def test_joint_loss():
    assert joint_loss(1.0, 2.0, 0.5) == 2.0
    assert joint_loss(1.5, 7.0, 0.0) == 1.5
    assert TrainConfig().psi == 0.5
    with pytest.raises(ValueError):
        joint_loss(1.0, 1.0, -0.1)


def test_config_round_trip_and_validation():
    cfg = TrainConfig(epochs=3, sampler=SamplerConfig(K=4), recon=ReconConfig(M=3))
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg
    assert TrainConfig.from_dict(cfg.to_dict()).fingerprint() == cfg.fingerprint()
    assert cfg.fingerprint() != TrainConfig(epochs=4).fingerprint()
    for bad in (dict(alpha=1.0), dict(gamma=0.0), dict(psi=-1), dict(batch_size=1), dict(epochs=0)):
        with pytest.raises(ValueError):
            TrainConfig(**bad)
    with pytest.raises(ValueError):
        TrainConfig.from_dict({"nope": 1})


def test_training_is_deterministic(bench):
    data, fs = bench
    cfg = TrainConfig(epochs=2, **SMALL)
    p1, h1 = train(data, fs, cfg)
    p2, h2 = train(data, fs, cfg)
    assert h1 == h2
    assert all(np.array_equal(p1.arrays[k], p2.arrays[k]) for k in p1.arrays)


def test_psi_zero_matches_contrast_only(bench):
    data, fs = bench
    _, h = train(data, fs, TrainConfig(epochs=2, psi=0.0, **SMALL))
    assert all(r["loss"] == r["con"] and r["rec"] == 0.0 for r in h)
    # with psi=0 the reconstruction settings must not leak into the contrast run
    other = dict(SMALL, recon=ReconConfig(M=4, high_depth=3, epsilon=0.7))
    _, h2 = train(data, fs, TrainConfig(epochs=2, psi=0.0, **other))
    assert [r["con"] for r in h] == [r["con"] for r in h2]


def test_empty_fewshot_rejected(bench):
    data, _ = bench
    with pytest.raises(ValueError):
        train(data, [], TrainConfig(epochs=1, **SMALL))


def test_loss_decreases_over_training():
    data = synthetic_benchmark(seed=1, n=300, total=30, clique_size=5)
    fs, _ = make_few_shot_split(data.labels, 5, 1)
    _, h = train(data, fs, TrainConfig(epochs=100, hidden=32))
    assert h[-1]["loss"] < 0.9 * h[0]["loss"]


def test_zero_discriminator_gives_half(bench):
    data, fs = bench
    cfg = TrainConfig(**SMALL)
    params = init_params(data.features.shape[1], cfg)
    params.arrays["w_s"][:] = 0
    rep = anomaly_scores(params, data, fs, cfg)
    assert np.all(rep.contrast == 0.5)
    # the ranking is then the reconstruction ranking
    assert np.array_equal(np.argsort(rep.scores, kind="stable"), np.argsort(rep.recon, kind="stable"))


def test_perfect_constant_reconstruction_ties():
    data = synthetic_benchmark(seed=2, n=100, total=10)
    data.features[:] = 1.0
    fs, _ = make_few_shot_split(data.labels, 3, 0)
    cfg = TrainConfig(**SMALL)
    params = init_params(data.features.shape[1], cfg)
    for k in params.names("mlp_w"):
        params.arrays[k][:] = 0
    params.arrays["mlp_b"][:] = 1.0
    params.arrays["w_s"][:] = 0
    rep = anomaly_scores(params, data, fs, cfg)
    assert np.all(rep.recon == 0) and np.unique(rep.scores).size == 1


def test_score_ranges_and_errors(bench):
    data, fs = bench
    cfg = TrainConfig(epochs=1, **SMALL)
    params, _ = train(data, fs, cfg)
    rep = anomaly_scores(params, data, fs, cfg)
    for v in (rep.scores, rep.contrast, rep.recon):
        assert v.shape == (data.n,) and v.min() >= 0 and v.max() <= 1
    assert rep.recon.min() == 0 and rep.recon.max() == 1
    np.testing.assert_allclose(rep.scores, 0.5 * rep.contrast + 0.5 * rep.recon)
    with pytest.raises(ValueError):
        anomaly_scores(params, data, fs, cfg, rounds=0)
    again = anomaly_scores(params, data, fs, cfg)
    assert np.array_equal(rep.scores, again.scores)


def test_more_rounds_reduce_score_spread(bench):
    data, fs = bench
    cfg = TrainConfig(epochs=2, **SMALL)
    params, _ = train(data, fs, cfg)
    spread = {}
    for r in (1, 16):
        runs = np.array([anomaly_scores(params, data, fs, cfg, rounds=r, seed=s).scores for s in range(10)])
        spread[r] = runs.std(axis=0).mean()
    assert spread[16] < spread[1]


def test_highpass_trace(bench):
    data, fs = bench
    cfg = TrainConfig(**SMALL)
    trace = highpass_trace(init_params(data.features.shape[1], cfg), data, fs, cfg)
    assert len(trace) == cfg.recon.high_depth
    assert highpass_trace(init_params(data.features.shape[1], cfg), data, fs,
                          TrainConfig(psi=0.0, **SMALL)) == []


def test_feature_dimension_mismatch(bench):
    data, fs = bench
    cfg = TrainConfig(**SMALL)
    params = init_params(5, cfg)
    with pytest.raises(ValueError):
        anomaly_scores(params, data, fs, cfg)


def test_planted_anomalies_rank_in_top_decile():
    # 500-node benchmark, 50 planted anomalies, default config, 3 seeds
    hits = []
    for seed in range(3):
        r = bench_run(seed)
        top = np.argsort(-r["scores"], kind="stable")[: r["scores"].size // 10]
        hits.append(r["labels"][top].sum() / r["labels"].sum())
    assert min(hits) >= 0.8, f"fraction of planted anomalies in the top 10%: {hits}"
