import math

import numpy as np
import pytest

from zapvss.config import ALGORITHMS, ConfigError, ExperimentConfig, load_config, parse_config
from zapvss.harness import (
    CLAMP_DB,
    DivergenceError,
    RunTrace,
    aggregate_runs,
    build_signals,
    emit_csv,
    misalignment_db,
    ratio_to_db,
    run_scenario,
    run_seeds,
    run_single,
    samples_to_threshold,
    steady_state,
)

SMALL = dict(L=32, n_samples=2000, switch_at=1000, active_taps=4, runs=3, mu=0.01, beta=10.0,
             kappa_fixed_l1=1e-4, kappa_fixed_l0=1e-5, kappa0_you_l1=1e-3, kappa0_you_l0=1e-4,
             conv_short=16, conv_long=128, gamma_vss1_l1=1e-3, gamma_vss1_l0=1e-5,
             gamma_vss2_l1=1e-2, gamma_vss2_l0=1e-3)


def small(**kw):
    return ExperimentConfig(**{**SMALL, **kw})


# metrics

def test_misalignment_examples():
    h = np.array([1.0, 0.0, 0.0, 0.0])
    assert misalignment_db(h, np.zeros(4)) == 0.0
    assert misalignment_db(h, h) == CLAMP_DB
    # ||h-w||/||h|| = 0.1 in the norm convention
    assert misalignment_db(h, np.array([0.9, 0, 0, 0])) == pytest.approx(-10.0, abs=1e-9)
    assert misalignment_db(h, np.array([0.9, 0, 0, 0]), "squared") == pytest.approx(-20.0, abs=1e-9)


def test_misalignment_errors():
    with pytest.raises(ValueError):
        misalignment_db(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        misalignment_db(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        ratio_to_db(0.5, "decibel")


def test_ratio_to_db_clamps():
    out = ratio_to_db(np.array([0.0, 1e-30, 1.0]))
    assert out.tolist() == [CLAMP_DB, CLAMP_DB, 0.0]
    assert ratio_to_db(1e-30, "squared") == -120.0


def test_steady_state_and_threshold():
    v = np.arange(100, dtype=float)
    assert steady_state(v, 0, 100) == pytest.approx(94.5)
    assert steady_state(v, 50, 60) == 59.0
    down = -np.arange(50, dtype=float)
    assert samples_to_threshold(down, -20.0) == 20
    assert samples_to_threshold(down, -20.0, 30) == 0
    assert samples_to_threshold(down, -100.0) is None


# configuration

def test_shipped_config_loads():
    c = load_config("reference.cfg")
    assert c.L == 512 and c.n_samples == 10000 and c.switch_at == 5000
    assert c.algorithms == ALGORITHMS
    assert c.mu * c.L == pytest.approx(0.7)


def test_parse_config_types_and_comments():
    c = parse_config("L = 64  # taps\nn_samples=500\nswitch_at = 0\nactive_taps = 3\n"
                     "seed = 0x10\nsnr_db = inf\nalgorithms = lms, zap_fixed_l1\n")
    assert (c.L, c.n_samples, c.seed) == (64, 500, 16)
    assert math.isinf(c.snr_db)
    assert c.algorithms == ("LMS", "ZAP_FIXED_L1")


@pytest.mark.parametrize("text, needle", [
    ("L = 64\nwidth = 3\n", "unknown key 'width'"),
    ("L = 64\nL = 32\n", "duplicate key"),
    ("L 64\n", "expected 'key = value'"),
    ("L = sixty\n", "bad value for L"),
    ("algorithms = LMS, NLMS\n", "unknown algorithms"),
])
def test_parse_config_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(text, "x.cfg")


def test_validation_reports_all_problems():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig(L=1, runs=0, mu=-1.0)
    msg = str(exc.value)
    assert "L must" in msg and "runs must" in msg and "mu must" in msg


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")


# seeds and signals

def test_run_seeds_distinct():
    seeds = [s for r in range(50) for s in run_seeds(2**64 - 3, r).values()]
    assert len(set(seeds)) == len(seeds)
    assert all(0 <= s < 2**64 for s in seeds)


def test_all_algorithms_see_identical_signals():
    c = small()
    a = build_signals(c, 1)
    b = build_signals(c.replace(algorithms=("LMS",)), 1)
    for u, v in zip(a, b):
        assert u.tobytes() == v.tobytes()
    other = build_signals(c, 2)
    assert a[0].tobytes() != other[0].tobytes()


def test_per_segment_snr():
    c = small(n_samples=20000, switch_at=10000, scenario="SPARSE_SWITCH_DISPERSIVE")
    x, d, h_pre, h_post = build_signals(c, 0)
    s = c.switch_at
    for seg, h in ((slice(0, s), h_pre), (slice(s, None), h_post)):
        y = np.convolve(x, h)[: x.size][seg]
        v = d[seg] - y
        assert 10 * np.log10(np.mean(y**2) / np.mean(v**2)) == pytest.approx(30.0, abs=1e-6)


def test_dispersive_scenario_channel():
    _, _, h_pre, h_post = build_signals(small(scenario="SPARSE_SWITCH_DISPERSIVE"), 0)
    assert np.count_nonzero(h_pre) == 4
    assert np.count_nonzero(h_post) == h_post.size


# execution

def test_run_single_order_and_shapes():
    traces = run_single(small(), 0)
    assert [t.algorithm for t in traces] == sorted(ALGORITHMS)
    for t in traces:
        assert t.misalign_db.shape == t.kappa.shape == (2000,)
        assert np.isfinite(t.misalign_db).all()


def test_switch_causes_jump():
    c = small(algorithms="LMS")
    t = run_single(c, 0)[0]
    assert t.misalign_db[c.switch_at] - t.misalign_db[c.switch_at - 1] > 10.0


def test_noiseless_lms_monotone():
    c = small(snr_db=math.inf, switch_at=0, algorithms="LMS", n_samples=3000)
    t = run_single(c, 0)[0]
    # ||h - w|| cannot grow when mu * ||x||^2 <= 2; below -100 dB rounding dominates
    above = t.misalign_db[t.misalign_db > -100.0]
    assert above.size > 100
    assert np.all(np.diff(above) <= 1e-9)
    assert t.misalign_db[-1] < -100.0


def test_divergence_raises():
    with pytest.raises(DivergenceError) as exc:
        run_single(small(mu=1.0, algorithms="LMS"), 0)
    assert exc.value.algorithm == "LMS" and exc.value.run_id == 0
    assert exc.value.sample > 0


def test_scenario_is_deterministic(tmp_path):
    c = small(runs=2)
    paths = []
    for name in ("a", "b"):
        paths.append(emit_csv(run_scenario(c), tmp_path / name, c.n_samples, c.switch_at))
    for pa, pb in zip(*paths):
        assert pa.read_bytes() == pb.read_bytes()


def test_parallel_matches_serial():
    c = small(runs=3, algorithms="LMS,ZAP_VSS2_L1")
    serial = run_scenario(c, workers=1)
    parallel = run_scenario(c, workers=2)
    assert [(t.run_id, t.algorithm) for t in serial] == [(t.run_id, t.algorithm) for t in parallel]
    for a, b in zip(serial, parallel):
        assert a.misalign_db.tobytes() == b.misalign_db.tobytes()
        assert a.kappa.tobytes() == b.kappa.tobytes()


def test_aggregate_single_run_is_identity():
    t = RunTrace(0, "LMS", np.array([-1.0, -2.0]), np.array([0.0, 0.5]))
    avg = aggregate_runs([t])["LMS"]
    assert avg.runs == 1
    assert avg.misalign_db.tobytes() == t.misalign_db.tobytes()
    assert avg.kappa.tobytes() == t.kappa.tobytes()


def test_aggregate_mean_of_db():
    ts = [RunTrace(r, "X", np.array([v]), np.array([k])) for r, v, k in
          ((0, -10.0, 1.0), (1, -30.0, 3.0))]
    avg = aggregate_runs(ts)["X"]
    assert avg.misalign_db.tolist() == [-20.0]
    assert avg.kappa.tolist() == [2.0]


def test_averaging_ten_runs_reduces_variance_tenfold():
    c = small(runs=200, algorithms="LMS", switch_at=0, n_samples=1000)
    single = np.array([t.misalign_db[900:].mean() for t in run_scenario(c)])
    groups = single.reshape(20, 10).mean(axis=1)
    ratio = np.var(single, ddof=1) / np.var(groups, ddof=1)
    assert 4.0 < ratio < 25.0


# CSV output

def test_csv_header_only(tmp_path):
    tp, sp = emit_csv([], tmp_path)
    assert tp.read_bytes() == b"run_id,algorithm,sample,misalign_db,kappa\n"
    assert sp.read_bytes() == b"algorithm,segment,misalign_db,kappa\n"


def test_csv_single_record(tmp_path):
    t = RunTrace(3, "ZAP_FIXED_L0", np.array([-12.5]), np.array([1e-6]))
    tp, sp = emit_csv([t], tmp_path)
    lines = tp.read_text().splitlines()
    assert lines[1] == "3,ZAP_FIXED_L0,0,-12.5,1e-06"
    assert sp.read_text().splitlines()[1] == "ZAP_FIXED_L0,post,-12.5,1e-06"


def test_csv_roundtrip(tmp_path):
    c = small(runs=2, algorithms="LMS,ZAP_YOU_L0")
    traces = run_scenario(c)
    tp, sp = emit_csv(traces, tmp_path, c.n_samples, c.switch_at)
    data = np.genfromtxt(tp, delimiter=",", names=True, dtype=None, encoding="utf-8")
    assert data.size == 2 * 2 * c.n_samples
    first = data[data["algorithm"] == "LMS"][: c.n_samples]
    np.testing.assert_allclose(first["misalign_db"], traces[0].misalign_db, rtol=1e-8)
    assert len(sp.read_text().splitlines()) == 1 + 2 * 2


def test_csv_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="cannot write"):
        emit_csv([], blocker / "sub")
