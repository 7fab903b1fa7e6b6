"""Seeded Monte Carlo studies comparing the closed-form theory with statistics.

Four studies, selected by ``ExperimentConfig.experiment``:

``histogram``
    zero-filled DFT values at component and noise-only bins over random
    masks and frequencies, against the missing-sample variance formula.
``snr_table``
    output SNR of iterative reconstruction with additive noise, swept over M.
``nonsparse``
    K-sparse reconstruction of a signal with a geometric amplitude tail,
    against the nonsparse error theorem.
``recovery_example``
    the two worked examples (``example16``, ``iterative64``).

Trial ``t`` of cell ``c`` always draws from ``trial_rng(master_seed, t, c)``,
and per-trial results are stored by index before any reduction, so the
report does not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import analysis
from .fileio import dumps_json, fmt
from .recovery import (
    RecoveryError,
    SupportSelection,
    ranked_bins,
    recover_iterative,
    recover_one_step,
)
from .linalg import SingularSystemError
from .signals import (
    ComponentSpec,
    SamplingMask,
    apply_mask,
    complex_noise,
    geometric_tail_amplitudes,
    random_mask,
    synthesize_sparse_signal,
    trial_rng,
)
from .transform import full_dft, initial_estimate

EXPERIMENTS = ("histogram", "snr_table", "nonsparse", "recovery_example")
THREADS_ENV = "SPARSEDFT_THREADS"
# relative error energy below this counts as exact recovery (round-off only)
EXACT_RTOL = 1e-20


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    n_len: int
    m_list: list
    k_sparsity: int
    trials: int
    master_seed: int
    amplitudes: list = field(default_factory=list)
    frequencies: Optional[list] = None
    noise_variances: list = field(default_factory=lambda: [0.0])
    snr_in_db: Optional[float] = None
    epsilon: float = 1e-5
    threshold: Optional[float] = None
    method: str = "iterative"
    bins: int = 60
    example: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.m_list, int):
            self.m_list = [self.m_list]
        if isinstance(self.noise_variances, (int, float)):
            self.noise_variances = [float(self.noise_variances)]
        self.validate()

    def validate(self) -> None:
        errors = []
        if self.experiment not in EXPERIMENTS:
            errors.append(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            errors.append(f"trials must be an integer >= 1, got {self.trials!r}")
        if not isinstance(self.n_len, int) or self.n_len < 1:
            errors.append(f"n_len must be an integer >= 1, got {self.n_len!r}")
        elif not self.m_list or any(not isinstance(m, int) or not 1 <= m <= self.n_len for m in self.m_list):
            errors.append(f"m_list entries must be integers in [1, {self.n_len}], got {self.m_list!r}")
        if not isinstance(self.k_sparsity, int) or self.k_sparsity < 1:
            errors.append(f"k_sparsity must be an integer >= 1, got {self.k_sparsity!r}")
        elif self.m_list and all(isinstance(m, int) for m in self.m_list) and self.k_sparsity > min(self.m_list):
            errors.append("k_sparsity must not exceed the smallest m in m_list")
        if any(v < 0 for v in self.noise_variances):
            errors.append("noise_variances must be >= 0")
        if not self.epsilon > 0:
            errors.append("epsilon must be > 0")
        if self.method not in ("iterative", "onestep"):
            errors.append(f"method must be 'iterative' or 'onestep', got {self.method!r}")
        if self.bins < 1:
            errors.append("bins must be >= 1")
        if self.experiment in ("histogram", "snr_table") and not self.amplitudes:
            errors.append("amplitudes must be a nonempty list")
        if self.experiment in ("histogram", "snr_table") and self.amplitudes and len(self.amplitudes) != self.k_sparsity:
            errors.append("k_sparsity must equal the number of amplitudes")
        if self.frequencies is not None and len(self.frequencies) != len(self.amplitudes):
            errors.append("frequencies and amplitudes must have equal lengths")
        if self.experiment == "snr_table" and self.snr_in_db is not None and self.noise_variances not in ([], [0.0]):
            errors.append("give either snr_in_db or noise_variances, not both")
        if self.experiment == "recovery_example" and self.example not in ("example16", "iterative64"):
            errors.append("recovery_example needs example = 'example16' or 'iterative64'")
        if errors:
            raise ConfigError("; ".join(errors))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        missing = sorted(
            f.name
            for f in dataclasses.fields(cls)
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING and f.name not in data
        )
        if missing:
            raise ConfigError(f"missing config keys: {', '.join(missing)}")
        return cls(**data)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def preset(name: str) -> ExperimentConfig:
    """Configurations of the studies reported alongside the theory."""
    presets = {
        "fig3": dict(
            experiment="histogram", n_len=128, m_list=[16], k_sparsity=3,
            amplitudes=[1.0, 0.5, 0.25], trials=100_000, master_seed=0,
        ),
        "table1": dict(
            experiment="snr_table", n_len=257, m_list=[128, 160, 192, 224], k_sparsity=4,
            amplitudes=[1.0, 0.75, 0.5, 0.67], frequencies=[58, 117, 21, 45],
            snr_in_db=3.54, trials=1000, master_seed=0,
        ),
        "nonsparse": dict(
            experiment="nonsparse", n_len=257, m_list=[192, 128], k_sparsity=4,
            amplitudes=geometric_tail_amplitudes().tolist(), noise_variances=[0.0, 2.0],
            trials=100, master_seed=0,
        ),
        "example16": dict(
            experiment="recovery_example", example="example16", n_len=16, m_list=[12],
            k_sparsity=3, threshold=11.0, method="onestep", trials=1, master_seed=0,
        ),
        "iterative64": dict(
            experiment="recovery_example", example="iterative64", n_len=64, m_list=[16],
            k_sparsity=5, method="iterative", trials=1, master_seed=0,
        ),
    }
    if name not in presets:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(presets)}")
    return ExperimentConfig(**presets[name])


PRESETS = ("fig3", "table1", "nonsparse", "example16", "iterative64")


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    cells: dict
    trials: int
    seed: int
    details: dict = field(default_factory=dict)
    histograms: list = field(default_factory=list)
    wall_time: float = 0.0

    def payload(self) -> dict:
        """Everything except wall time; byte-stable for a given config."""
        return {
            "experiment": self.experiment,
            "config": self.config,
            "cells": self.cells,
            "trials": self.trials,
            "seed": self.seed,
            "details": self.details,
        }

    def to_json(self, include_wall_time: bool = True) -> str:
        data = self.payload()
        if include_wall_time:
            data["wall_time"] = self.wall_time
        return dumps_json(data)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "cell", "metric", "value"])
        for cell, metrics in self.cells.items():
            for metric, value in metrics.items():
                w.writerow([self.experiment, cell, metric, fmt(value)])
        return buf.getvalue()

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count", "class"])
        for row in self.histograms:
            w.writerow([fmt(row["bin_lo"]), fmt(row["bin_hi"]), int(row["count"]), row["class"]])
        return buf.getvalue()

    def summary_lines(self) -> list[str]:
        lines = []
        for cell, metrics in self.cells.items():
            parts = [f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in metrics.items()]
            lines.append(f"{self.experiment:<16} {cell:<14} " + " ".join(parts))
        return lines


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0")
    return n if n > 0 else min(8, os.cpu_count() or 1)


def map_trials(fn: Callable[[int], object], trials: int, workers: Optional[int] = None) -> list:
    """``[fn(0), ..., fn(trials-1)]``, evaluated on a thread pool."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or trials < 64:
        return [fn(t) for t in range(trials)]
    size = max(1, trials // (workers * 4))
    chunks = [range(s, min(s + size, trials)) for s in range(0, trials, size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda r: [fn(t) for t in r], chunks)
        return [res for part in parts for res in part]


def _db(num: float, den: float) -> float:
    if den == 0:
        return math.inf if num > 0 else 0.0
    if num == 0:
        return -math.inf
    return 10.0 * math.log10(num / den)


def _moments(values: np.ndarray) -> dict:
    mean = complex(np.mean(values))
    dev = values - mean
    re = values.real
    sd = re.std()
    out = {
        "mean_re": mean.real,
        "mean_im": mean.imag,
        "var": float(np.mean(np.abs(dev) ** 2)),
        "var_re": float(np.var(re)),
        "var_im": float(np.var(values.imag)),
    }
    if sd > 0:
        z = (re - re.mean()) / sd
        out["skew_re"] = float(np.mean(z**3))
        out["kurtosis_re"] = float(np.mean(z**4))
    else:
        out["skew_re"] = 0.0
        out["kurtosis_re"] = 0.0
    return out


def _rel(emp: float, theory: float) -> float:
    return abs(emp - theory) / abs(theory) if theory != 0 else abs(emp)


def run_histogram_study(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Zero-filled DFT values at component bins and at one random noise-only bin per trial."""
    if config.experiment != "histogram":
        raise ConfigError("config is not a histogram study")
    start = time.perf_counter()
    n_len, k = config.n_len, config.k_sparsity
    amps = np.asarray(config.amplitudes, dtype=float)
    cells, hist, details = {}, [], {}
    for c, m in enumerate(config.m_list):

        def trial(t, m=m, c=c):
            rng = trial_rng(config.master_seed, t, c)
            freqs = (
                np.asarray(config.frequencies) if config.frequencies is not None
                else rng.choice(n_len, size=k, replace=False)
            )
            mask = random_mask(n_len, m, rng)
            others = np.setdiff1d(np.arange(n_len), freqs)
            probe = others[rng.integers(others.size)] if others.size else freqs[0]
            x = synthesize_sparse_signal([ComponentSpec(int(f), a) for f, a in zip(freqs, amps)], n_len)
            vals = initial_estimate(apply_mask(x, mask), mask, [*freqs, probe])
            return vals[:k], vals[k]

        results = map_trials(trial, config.trials, workers)
        comp = np.array([r[0] for r in results])
        noise = np.array([r[1] for r in results])
        model = analysis.missing_noise_model(amps, n_len, m)
        tag = f"M={m}"
        stats = _moments(noise)
        stats.update(theory_mean=0.0, theory_var=model.var_noise_bin, var_rel_err=_rel(stats["var"], model.var_noise_bin))
        cells[f"{tag}/noise"] = stats
        classes = {"noise": noise.real}
        for p in range(k):
            st = _moments(comp[:, p])
            st.update(
                theory_mean=model.mean_at_component[p],
                mean_rel_err=_rel(st["mean_re"], model.mean_at_component[p]),
                theory_var=model.var_component_bin[p],
                var_rel_err=_rel(st["var"], model.var_component_bin[p]),
            )
            cells[f"{tag}/component_{p + 1}"] = st
            classes[f"component_{p + 1}"] = comp[:, p].real
        lo = min(v.min() for v in classes.values())
        hi = max(v.max() for v in classes.values())
        if hi - lo < 1e-9:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, config.bins + 1)
        for name, values in classes.items():
            counts, _ = np.histogram(values, bins=edges)
            for i, cnt in enumerate(counts):
                hist.append({"bin_lo": edges[i], "bin_hi": edges[i + 1], "count": int(cnt), "class": f"{tag}/{name}"})
        details[tag] = model.as_dict()
    return ExperimentReport(
        "histogram", config.as_dict(), cells, config.trials, config.master_seed,
        details=details, histograms=hist, wall_time=time.perf_counter() - start,
    )


def _recover(config: ExperimentConfig, y: np.ndarray, mask: SamplingMask):
    if config.method == "onestep":
        return recover_one_step(y, mask, SupportSelection.top_k(config.k_sparsity), config.epsilon)
    return recover_iterative(y, mask, epsilon=config.epsilon, max_iter=config.k_sparsity)


def run_snr_table_study(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Measured vs predicted output SNR of sparse reconstruction for each M.

    Energies are pooled over trials before taking decibels. A trial whose
    recovered support differs from the true one counts as a failure but its
    error still enters the pooled SNR.
    """
    if config.experiment != "snr_table":
        raise ConfigError("config is not an snr_table study")
    start = time.perf_counter()
    n_len, k = config.n_len, config.k_sparsity
    amps = np.asarray(config.amplitudes, dtype=complex)
    if config.snr_in_db is not None:
        sigma2 = float(np.sum(np.abs(amps) ** 2)) * 10 ** (-config.snr_in_db / 10)
    else:
        sigma2 = float(config.noise_variances[0])
    cells = {}
    for c, m in enumerate(config.m_list):

        def trial(t, m=m, c=c):
            rng = trial_rng(config.master_seed, t, c)
            freqs = (
                np.asarray(config.frequencies) if config.frequencies is not None
                else rng.choice(n_len, size=k, replace=False)
            )
            clean = synthesize_sparse_signal([ComponentSpec(int(f), a) for f, a in zip(freqs, amps)], n_len)
            eps = complex_noise(n_len, sigma2, rng)
            mask = random_mask(n_len, m, rng)
            y = apply_mask(clean + eps, mask)
            X = full_dft(clean)
            try:
                res = _recover(config, y, mask)
                est, found = res.spectrum, sorted(res.support) == sorted(int(f) for f in freqs)
            except (RecoveryError, SingularSystemError):
                est, found = np.zeros(n_len, dtype=complex), False
            sig = float(np.sum(np.abs(X) ** 2))
            err = float(np.sum(np.abs(X - est) ** 2))
            if err <= EXACT_RTOL * sig:
                err = 0.0
            return float(np.sum(np.abs(clean) ** 2)), float(np.sum(np.abs(eps) ** 2)), sig, err, found

        res = map_trials(trial, config.trials, workers)
        ex, ee, sig, err, found = (np.array(col) for col in zip(*res))
        snr_i = _db(ex.sum(), ee.sum())
        snr_t = analysis.snr_output_theory(snr_i, k, m) if math.isfinite(snr_i) else math.inf
        snr_s = _db(sig.sum(), err.sum())
        cells[f"M={m}"] = {
            "m_avail": m,
            "noise_variance": sigma2,
            "snr_in_db": snr_i,
            "snr_theory_db": snr_t,
            "snr_stat_db": snr_s,
            "deviation_db": snr_s - snr_t if math.isfinite(snr_s) and math.isfinite(snr_t) else 0.0,
            "snr_in_mean_trial_db": float(np.mean([_db(a, b) for a, b in zip(ex, ee)])),
            "exact_rate": float(np.mean(err == 0.0)),
            "failure_rate": float(1.0 - np.mean(found)),
        }
    return ExperimentReport(
        "snr_table", config.as_dict(), cells, config.trials, config.master_seed,
        wall_time=time.perf_counter() - start,
    )


def run_nonsparse_study(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """K-sparse reconstruction of a nonsparse signal, for every (noise, M) pair.

    The statistical SNR is measured on the true K largest coefficients with
    energies pooled over trials. ``snr_stat_db`` uses the trials in which
    exactly those K bins were detected; ``snr_stat_all_db`` keeps every
    trial, a missed bin contributing its full magnitude to the error.
    """
    if config.experiment != "nonsparse":
        raise ConfigError("config is not a nonsparse study")
    start = time.perf_counter()
    n_len, k = config.n_len, config.k_sparsity
    amps = np.asarray(config.amplitudes, dtype=complex)
    if amps.size > n_len:
        raise ConfigError("more amplitudes than frequency bins")
    cells = {}
    cell_id = 0
    for sigma2 in config.noise_variances:
        for m in config.m_list:

            def trial(t, m=m, sigma2=sigma2, c=cell_id):
                rng = trial_rng(config.master_seed, t, c)
                freqs = (
                    np.asarray(config.frequencies) if config.frequencies is not None
                    else rng.choice(n_len, size=amps.size, replace=False)
                )
                clean = synthesize_sparse_signal([ComponentSpec(int(f), a) for f, a in zip(freqs, amps)], n_len)
                X = full_dft(clean)
                noisy = clean + complex_noise(n_len, sigma2, rng) if sigma2 > 0 else clean
                mask = random_mask(n_len, m, rng)
                top = ranked_bins(X)[:k]
                try:
                    res = _recover(config, apply_mask(noisy, mask), mask)
                    est, found = res.spectrum, set(res.support) == set(top.tolist())
                except (RecoveryError, SingularSystemError):
                    est, found = np.zeros(n_len, dtype=complex), False
                theory = analysis.nonsparse_error_theory(X, k, m, sigma2)
                sig = float(np.sum(np.abs(X[top]) ** 2))
                err = float(np.sum(np.abs(X[top] - est[top]) ** 2))
                return sig, err, theory.top_energy, theory.missing_term, theory.noise_term, float(found)

            res = np.array(map_trials(trial, config.trials, workers))
            sig, err, top_e, miss, noise, found = res.T
            hit = found > 0
            cells[f"sigma2={sigma2:g}/M={m}"] = {
                "m_avail": m,
                "noise_variance": float(sigma2),
                # the theorem presumes the K largest bins were detected
                "snr_stat_db": _db(sig[hit].sum(), err[hit].sum()) if hit.any() else -math.inf,
                "snr_stat_all_db": _db(sig.sum(), err.sum()),
                "snr_theory_db": _db(top_e.sum(), miss.sum() + noise.sum()),
                "delta_snr_theory_db": _db(miss.sum(), miss.sum() + noise.sum()),
                "snr_stat_mean_trial_db": float(np.mean([_db(a, b) for a, b in zip(sig, err)])),
                "detection_failure_rate": float(1.0 - hit.mean()),
            }
            cell_id += 1
    return ExperimentReport(
        "nonsparse", config.as_dict(), cells, config.trials, config.master_seed,
        wall_time=time.perf_counter() - start,
    )


def example16_signal() -> tuple[np.ndarray, SamplingMask]:
    """16-sample, three-component signal with samples 2, 4, 11, 14 missing."""
    comps = [
        ComponentSpec(1, 1.2 * np.exp(1j * np.pi / 4)),
        ComponentSpec(7, 1.5 * np.exp(-1j * np.pi / 3)),
        ComponentSpec(6, 1.7),
    ]
    return synthesize_sparse_signal(comps, 16), SamplingMask.from_missing([2, 4, 11, 14], 16)


def iterative64_signal(mask_seed: int = 0) -> tuple[np.ndarray, SamplingMask]:
    """Two real sinusoids plus an offset, N=64, with 16 random samples available."""
    n = np.arange(64)
    x = np.sin(12 * np.pi * n / 64 + np.pi / 4) + 0.7 * np.cos(40 * np.pi * n / 64 + np.pi / 3) - 0.4
    return x.astype(complex), random_mask(64, 16, mask_seed)


def run_recovery_example(name_or_config, workers: Optional[int] = None) -> ExperimentReport:
    """Run one worked example end to end and compare against the full-data DFT."""
    config = preset(name_or_config) if isinstance(name_or_config, str) else name_or_config
    if config.experiment != "recovery_example":
        raise ConfigError("config is not a recovery_example")
    start = time.perf_counter()
    if config.example == "example16":
        x, mask = example16_signal()
        result = recover_one_step(
            apply_mask(x, mask), mask, SupportSelection.threshold(config.threshold or 11.0), config.epsilon
        )
    else:
        x, mask = iterative64_signal(config.master_seed)
        result = recover_iterative(apply_mask(x, mask), mask, epsilon=config.epsilon)
    X = full_dft(x)
    true_support = np.flatnonzero(np.abs(X) > 1e-9 * np.abs(X).max())
    off = np.setdiff1d(result.support, true_support)
    cells = {
        config.example: {
            "support_size": len(result.support),
            "iterations": result.iterations,
            "residual_ratio": result.residual_ratio,
            "converged": int(result.converged),
            "max_abs_error": float(np.max(np.abs(result.spectrum - X))),
            "relative_error": float(np.linalg.norm(result.spectrum - X) / np.linalg.norm(X)),
            "extra_max_abs": float(np.max(np.abs(result.spectrum[off]))) if off.size else 0.0,
        }
    }
    details = {
        "support": result.support,
        "detection_order": result.detection_order,
        "mask": mask.indices.tolist(),
        "coefficients_re": result.spectrum[result.support].real.tolist(),
        "coefficients_im": result.spectrum[result.support].imag.tolist(),
        "residual_trace": result.residual_trace,
    }
    return ExperimentReport(
        "recovery_example", config.as_dict(), cells, 1, config.master_seed,
        details=details, wall_time=time.perf_counter() - start,
    )


def run(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    runner = {
        "histogram": run_histogram_study,
        "snr_table": run_snr_table_study,
        "nonsparse": run_nonsparse_study,
        "recovery_example": run_recovery_example,
    }[config.experiment]
    return runner(config, workers)
