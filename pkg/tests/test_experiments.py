import csv
import io
import json
import math

import numpy as np
import pytest

from sparsedft import experiments as ex
from sparsedft.experiments import ConfigError, ExperimentConfig, preset, run


def _small(name, **over):
    data = preset(name).as_dict()
    data.update(over)
    return ExperimentConfig.from_dict(data)


def test_presets_validate():
    for name in ex.PRESETS:
        assert preset(name).experiment in ex.EXPERIMENTS
    with pytest.raises(ConfigError):
        preset("nope")


@pytest.mark.parametrize(
    "over, fragment",
    [
        ({"trials": 0}, "trials"),
        ({"m_list": [300]}, "m_list"),
        ({"k_sparsity": 5}, "amplitudes"),
        ({"epsilon": 0.0}, "epsilon"),
        ({"experiment": "bogus"}, "experiment"),
        ({"noise_variances": [-1.0]}, "noise_variances"),
    ],
)
def test_config_errors_name_the_field(over, fragment):
    with pytest.raises(ConfigError, match=fragment):
        _small("fig3", **over)


def test_from_dict_unknown_and_missing_keys():
    data = preset("fig3").as_dict()
    with pytest.raises(ConfigError, match="unknown config keys: colour"):
        ExperimentConfig.from_dict({**data, "colour": 1})
    del data["n_len"]
    with pytest.raises(ConfigError, match="missing config keys: n_len"):
        ExperimentConfig.from_dict(data)


def test_map_trials_order_independent_of_workers():
    f = lambda t: t * t
    assert ex.map_trials(f, 500, workers=4) == ex.map_trials(f, 500, workers=1) == [t * t for t in range(500)]


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv(ex.THREADS_ENV, "3")
    assert ex.worker_count() == 3
    monkeypatch.setenv(ex.THREADS_ENV, "0")
    assert ex.worker_count() >= 1
    monkeypatch.setenv(ex.THREADS_ENV, "x")
    with pytest.raises(ConfigError):
        ex.worker_count()


@pytest.mark.parametrize(
    "name, over",
    [
        ("fig3", {"trials": 300}),
        ("table1", {"trials": 20, "m_list": [128, 224]}),
        ("nonsparse", {"trials": 4}),
        ("example16", {}),
    ],
)
def test_determinism_across_worker_counts(name, over):
    cfg = _small(name, **over)
    a = run(cfg, workers=1).to_json(include_wall_time=False)
    b = run(cfg, workers=4).to_json(include_wall_time=False)
    assert a == b
    assert '"wall_time"' not in a


def test_seed_changes_payload():
    a = run(_small("fig3", trials=100, master_seed=1), workers=1).payload()
    b = run(_small("fig3", trials=100, master_seed=2), workers=1).payload()
    assert a["cells"] != b["cells"]


def test_trial_independence_pooled_halves():
    # two runs with disjoint seeds pooled against a single run of the same size
    n = 4000
    full = run(_small("fig3", trials=n, master_seed=10), workers=1).cells["M=16/noise"]["var"]
    h1 = run(_small("fig3", trials=n // 2, master_seed=11), workers=1).cells["M=16/noise"]["var"]
    h2 = run(_small("fig3", trials=n // 2, master_seed=12), workers=1).cells["M=16/noise"]["var"]
    theory = preset("fig3")
    var = ex.analysis.missing_noise_variance(theory.amplitudes, 128, 16)
    # the variance estimate has relative standard error about sqrt(2/n) for a Gaussian-like value
    se = var * math.sqrt(2 / n)
    assert abs(0.5 * (h1 + h2) - full) < 5 * se * math.sqrt(1.5)


def test_histogram_report_shapes():
    rep = run(_small("fig3", trials=200, bins=10), workers=1)
    assert set(rep.cells) == {"M=16/noise", "M=16/component_1", "M=16/component_2", "M=16/component_3"}
    rows = list(csv.DictReader(io.StringIO(rep.histogram_csv())))
    assert len(rows) == 40 and set(rows[0]) == {"bin_lo", "bin_hi", "count", "class"}
    assert all(sum(int(r["count"]) for r in rows if r["class"] == c) == 200 for c in {r["class"] for r in rows})
    flat = list(csv.reader(io.StringIO(rep.to_csv())))
    assert flat[0] == ["experiment", "cell", "metric", "value"]
    assert all(row[0] == "histogram" for row in flat[1:])


def test_snr_table_noise_free_is_exact():
    rep = run(_small("table1", trials=10, m_list=[128], snr_in_db=None, noise_variances=[0.0]), workers=1)
    cell = rep.cells["M=128"]
    assert cell["snr_stat_db"] == math.inf and cell["exact_rate"] == 1.0
    payload = json.loads(rep.to_json())
    assert payload["cells"]["M=128"]["snr_stat_db"] == "inf"


def test_theory_values_recomputed_from_analysis():
    rep = run(_small("nonsparse", trials=3), workers=1)
    X = np.zeros(257, dtype=complex)
    X[: 255] = 257 * np.asarray(preset("nonsparse").amplitudes)
    for sigma2 in (0.0, 2.0):
        for m in (192, 128):
            want = ex.analysis.nonsparse_error_theory(X, 4, m, sigma2).snr_db
            assert rep.cells[f"sigma2={sigma2:g}/M={m}"]["snr_theory_db"] == pytest.approx(want, rel=1e-12)


def test_recovery_examples():
    r16 = ex.run_recovery_example("example16")
    assert r16.details["support"] == [1, 6, 7]
    assert r16.cells["example16"]["relative_error"] <= 1e-10
    r7 = ex.run_recovery_example(_small("example16", threshold=7.0))
    assert r7.details["support"] == [1, 6, 7, 12, 14, 15]
    assert r7.cells["example16"]["extra_max_abs"] <= 1e-10
    r64 = ex.run_recovery_example("iterative64")
    assert r64.cells["iterative64"]["converged"] == 1
    assert r64.cells["iterative64"]["support_size"] == 5


def test_summary_lines_four_decimals():
    lines = ex.run_recovery_example("example16").summary_lines()
    assert lines and "residual_ratio=" in lines[0]
