"""Exit criteria for the toolkit, one test per criterion.

Each test records a PASS/FAIL line that is printed in the "acceptance
criteria" section at the end of the pytest run.
"""

import time

import numpy as np
import pytest

from keyframe_dpc.cli import main
from keyframe_dpc.errors import DegenerateInputError
from keyframe_dpc.dpc import DpcConfig, compute_distances, decision_graph, select_centers
from keyframe_dpc.features import FeatureMatrix
from keyframe_dpc.fusion import compression_ratio, compute_fusion_weights
from keyframe_dpc.lstm import classify_video, lstm_step, random_params, zero_params
from keyframe_dpc.tsdpc import extract_key_frames, segment_video

import oracles
from acceptance_report import record
from conftest import planted_blobs


def _timed(fn):
    start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - start


# 1 ------------------------------------------------------------------------

def test_criterion_1_compression_ratio():
    hmdb = compression_ratio(108256, 634552) * 100
    ucf = compression_ratio(213120, 2485519) * 100
    ok = abs(hmdb - 82.94) <= 0.01 and abs(ucf - 91.43) <= 0.01
    record(1, "compression ratio reproduction", ok,
           f"HMDB51 {hmdb:.4f}% (82.94), UCF101 {ucf:.4f}% (91.43), tol 0.01 pp")
    assert ok


# 2 ------------------------------------------------------------------------

def test_criterion_2_fusion_weights():
    def body():
        w = compute_fusion_weights([79.63, 84.94, 83.63]).w
        rng = np.random.default_rng(2)
        misses = 0
        for _ in range(1000):
            rates = rng.uniform(0, 100, rng.integers(1, 7)).tolist()
            fw = compute_fusion_weights(rates)
            if fw.w[int(np.argmin(rates))] != 1:
                misses += 1
        return w, misses

    (w, misses), elapsed = _timed(body)
    ok = w == (1, 3, 3) and misses == 0 and elapsed < 1.0
    record(2, "fusion pipeline on paper rates", ok,
           f"w={list(w)}, min-rate weight != 1 in {misses}/1000, {elapsed:.3f}s (< 1s)")
    assert ok


# 3 ------------------------------------------------------------------------

def _compare_with_reference(x, kernel, metric, n_c):
    config = DpcConfig(kernel=kernel, metric=metric, n_c_override=n_c)
    ref = oracles.dpc(x.tolist(), kernel=kernel, metric=metric, n_c=n_c)
    if ref is None:
        with pytest.raises(DegenerateInputError):
            decision_graph(x, config)
        return
    g = decision_graph(x, config)
    if kernel == "gaussian":
        np.testing.assert_allclose(g.rho, ref["rho"], rtol=1e-12, atol=0)
        np.testing.assert_allclose(g.gamma, ref["gamma"], rtol=1e-12, atol=0)
    else:
        assert g.rho.tolist() == ref["rho"]
        assert g.gamma.tolist() == ref["gamma"]
    assert g.delta.tolist() == ref["delta"]
    assert g.nhd.tolist() == ref["nhd"]
    assert select_centers(g, n_c) == ref["centers"]
    sq = compute_distances(x, metric).square()
    assert sq.tolist() == oracles.pairwise(x.tolist(), metric)


def test_criterion_3_dpc_oracle_equivalence():
    rng = np.random.default_rng(3)
    combos = [(k, m) for k in ("gaussian", "cutoff") for m in ("euclidean", "cosine")]
    failures = []

    def body():
        for trial in range(200):
            n = int(rng.integers(1, 61))
            d = int(rng.integers(1, 9))
            kernel, metric = combos[trial % 4]
            x = rng.normal(size=(n, d))
            n_c = None if trial % 3 else int(rng.integers(1, n + 1))
            try:
                _compare_with_reference(x, kernel, metric, n_c)
            except AssertionError as exc:
                failures.append((trial, n, d, kernel, metric, str(exc)[:200]))

    _, elapsed = _timed(body)
    ok = not failures and elapsed < 30
    record(3, "DPC oracle equivalence", ok,
           f"{200 - len(failures)}/200 point sets match, {elapsed:.1f}s (< 30s)")
    assert not failures, failures[:3]
    assert elapsed < 30


# 4 ------------------------------------------------------------------------

def test_criterion_4_planted_clusters():
    results = {}

    def body():
        for c in (2, 3, 4):
            hits = 0
            for seed in range(100):
                rng = np.random.default_rng(1000 * c + seed)
                sizes = rng.integers(10, 21, c)
                x, labels = planted_blobs(rng, c, per_blob=sizes, dim=4, spread=0.1, separation=10.0)
                spec = segment_video(len(x), 1)
                kfs, _ = extract_key_frames(FeatureMatrix(x), spec, DpcConfig(n_c_override=c))
                picked = sorted(labels[list(kfs.indices)].tolist())
                hits += picked == list(range(c))
            results[c] = hits

    _, elapsed = _timed(body)
    ok = all(h >= 95 for h in results.values()) and elapsed < 30
    record(4, "planted-cluster recovery", ok,
           ", ".join(f"C={c}: {h}/100" for c, h in results.items()) + f" (>= 95), {elapsed:.1f}s")
    assert ok


# 5 ------------------------------------------------------------------------

def _fixtures():
    rng = np.random.default_rng(5)
    out = {
        "single": np.zeros((1, 3)),
        "pair": np.array([[0.0], [1.0]]),
        "constant": np.ones((12, 4)),
        "duplicates": np.repeat(rng.normal(size=(4, 3)), 5, axis=0),
        "ramp": np.arange(40.0)[:, None],
        "blobs": planted_blobs(rng, 3, per_blob=12)[0],
        "integer-grid": rng.integers(0, 3, (30, 2)).astype(float),
    }
    for seed in range(60):
        r = np.random.default_rng(seed)
        out[f"random-{seed}"] = r.normal(size=(int(r.integers(1, 80)), int(r.integers(1, 6))))
    return out


def test_criterion_5_temporal_coverage():
    bad = []

    def body():
        for name, x in _fixtures().items():
            for k in (1, 2, 3, 5):
                for kernel in ("gaussian", "cutoff"):
                    spec = segment_video(len(x), k)
                    kfs, _ = extract_key_frames(FeatureMatrix(x), spec, DpcConfig(kernel=kernel))
                    segs_ok = len(kfs.segments) == spec.k and all(
                        s.n_c >= 1 and any(s.start <= i < s.end for i in s.indices)
                        for s in kfs.segments)
                    inc = all(a < b for a, b in zip(kfs.indices, kfs.indices[1:]))
                    if not (segs_ok and inc):
                        bad.append((name, k, kernel))

    _, elapsed = _timed(body)
    ok = not bad and elapsed < 10
    record(5, "temporal-coverage invariant", ok,
           f"{len(_fixtures())} fixtures x K in {{1,2,3,5}} x 2 kernels, {len(bad)} violations, "
           f"{elapsed:.1f}s (< 10s)")
    assert ok, bad[:5]


# 6 ------------------------------------------------------------------------

STATED_ZERO_STEP_H = 0.122355


def test_criterion_6_lstm_numeric_checks():
    start = time.perf_counter()
    p = zero_params(1, 1, 2, num_layers=1)
    h, _ = lstm_step(np.zeros(1), np.zeros(1), np.zeros(1), p)
    zero_ok = abs(h[0] - STATED_ZERO_STEP_H) <= 1e-9

    sat = zero_params(2, 3, 2, num_layers=1)
    sat.layers[0].b_f[:] = 50.0
    sat.layers[0].b_i[:] = -50.0
    c_prev = np.array([0.7, -1.3, 2.2])
    _, c = lstm_step(np.zeros(2), np.zeros(3), c_prev, sat)
    sat_ok = bool(np.all(np.abs(c - c_prev) <= 1e-9))

    rng = np.random.default_rng(6)
    sums_ok = True
    for seed in range(50):
        params = random_params(5, 4, 6, num_layers=3, seed=seed,
                               block_input=("sigmoid", "tanh")[seed % 2])
        fm = FeatureMatrix(rng.normal(size=(20, 5)) * 3)
        idx = sorted(rng.choice(20, size=int(rng.integers(1, 8)), replace=False).tolist())
        for zero_state in (False, True):
            pred = classify_video(idx, fm, params, zero_state=zero_state)
            rows = np.vstack([pred.rows, pred.video_prediction])
            sums_ok &= bool(np.all(np.abs(rows.sum(axis=1) - 1) <= 1e-9))
            sums_ok &= bool(np.all((rows >= 0) & (rows <= 1)))
    elapsed = time.perf_counter() - start

    ok = zero_ok and sat_ok and sums_ok and elapsed < 5
    detail = (f"zero-step h={h[0]:.10f} vs stated {STATED_ZERO_STEP_H} "
              f"({'ok' if zero_ok else 'MISMATCH: the six equations give 0.5*tanh(0.25)=0.1224593312'}); "
              f"saturation {'ok' if sat_ok else 'FAIL'}; distributions {'ok' if sums_ok else 'FAIL'}; "
              f"{elapsed:.2f}s (< 5s)")
    record(6, "LSTM numeric checks", ok, detail)
    assert sat_ok and sums_ok and elapsed < 5
    assert zero_ok, detail


# 7 ------------------------------------------------------------------------

def test_criterion_7_determinism(tmp_path):
    rng = np.random.default_rng(7)
    fixtures = [rng.normal(size=(n, 6)) for n in (15, 64, 200)]
    fixtures.append(planted_blobs(rng, 4, per_blob=25)[0])
    mismatches = 0

    def body():
        nonlocal mismatches
        for fx in fixtures:
            fm = FeatureMatrix(fx)
            spec = segment_video(fm.n, 5)
            for kernel in ("gaussian", "cutoff"):
                config = DpcConfig(kernel=kernel)
                ref = extract_key_frames(fm, spec, config, workers=1)[0].to_json().encode()
                for _ in range(5):
                    for workers in (1, 4):
                        got = extract_key_frames(fm, spec, config, workers=workers)[0].to_json().encode()
                        mismatches += got != ref
            # and through the command line, single vs multi-threaded
            feats = tmp_path / "f.csv"
            np.savetxt(feats, fx, delimiter=",", fmt="%.17g")
            outs = set()
            for n in range(5):
                for jobs in (1, 4):
                    out = tmp_path / f"kf_{n}_{jobs}.json"
                    assert main(["extract", "--features", str(feats), "--k", "5",
                                 "--jobs", str(jobs), "--out", str(out)]) == 0
                    outs.add(out.read_bytes())
            mismatches += len(outs) - 1

    _, elapsed = _timed(body)
    ok = mismatches == 0 and elapsed < 30
    record(7, "determinism", ok,
           f"{mismatches} byte differences over 5 runs x {{1, 4}} threads, {elapsed:.1f}s (< 30s)")
    assert ok


# 8 ------------------------------------------------------------------------

def test_criterion_8_not_reproducible_at_desk_scale():
    record(8, "dataset-scale accuracy, timing and GFLOPs", True,
           "not reproducible without HMDB51/UCF101, pretrained CNNs and optical flow; "
           "replaced by criteria 1-7", status="N/A")
    pytest.skip("dataset-scale results are out of scope by design")
