import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsedft.linalg import numeric_rank
from sparsedft.recovery import (
    EmptySupportError,
    InstanceTooLargeError,
    OversizedSupportError,
    SupportSelection,
    ranked_bins,
    recover_exhaustive,
    recover_iterative,
    recover_known_support,
    recover_one_step,
    residual_ratio,
)
from sparsedft.signals import ComponentSpec, SamplingMask, apply_mask, random_mask, synthesize_sparse_signal
from sparsedft.transform import full_dft, initial_estimate, partial_matrix


def _instance(rng, n_len, k, m):
    freqs = rng.choice(n_len, size=k, replace=False)
    amps = rng.uniform(0.5, 1.5, k) * np.exp(2j * np.pi * rng.random(k))
    x = synthesize_sparse_signal([ComponentSpec(int(f), a) for f, a in zip(freqs, amps)], n_len)
    mask = random_mask(n_len, m, rng)
    return x, mask, sorted(int(f) for f in freqs)


def test_example16_initial_estimate_magnitudes(example16):
    # zero-filled DFT peaks and the three strongest spurious bins
    x, mask = example16
    mag = np.abs(initial_estimate(apply_mask(x, mask), mask))
    assert sorted(ranked_bins(mag)[:3].tolist()) == [1, 6, 7]
    assert np.round(mag[[12, 14, 15]], 2).tolist() == [7.2, 7.58, 7.17]


def test_example16_threshold_11(example16):
    x, mask = example16
    res = recover_one_step(apply_mask(x, mask), mask, SupportSelection.threshold(11))
    assert res.support == [1, 6, 7]
    assert res.converged
    np.testing.assert_allclose(res.spectrum, full_dft(x), atol=1e-10)


def test_example16_threshold_7_extra_bins_vanish(example16):
    x, mask = example16
    res = recover_one_step(apply_mask(x, mask), mask, SupportSelection.threshold(7))
    assert res.support == [1, 6, 7, 12, 14, 15]
    assert np.max(np.abs(res.spectrum[[12, 14, 15]])) <= 1e-10
    np.testing.assert_allclose(res.spectrum, full_dft(x), atol=1e-10)


def test_example16_exhaustive(example16):
    x, mask = example16
    res = recover_exhaustive(apply_mask(x, mask), mask, 3)
    assert res.support == [1, 6, 7]
    assert res.residual_ratio < 1e-20


def test_iterative64(iterative64):
    x, mask = iterative64
    res = recover_iterative(apply_mask(x, mask), mask)
    assert res.converged and len(res.support) == 5
    assert res.support == [0, 6, 20, 44, 58]
    np.testing.assert_allclose(res.spectrum, full_dft(x), atol=1e-8)


def test_selection_validation():
    with pytest.raises(ValueError):
        SupportSelection.top_k(0)
    with pytest.raises(ValueError):
        SupportSelection.threshold(-1)
    with pytest.raises(ValueError):
        SupportSelection("nope", 1)


def test_empty_and_oversized_selection(example16):
    x, mask = example16
    y = apply_mask(x, mask)
    with pytest.raises(EmptySupportError):
        recover_one_step(y, mask, SupportSelection.threshold(1e6))
    with pytest.raises(OversizedSupportError):
        recover_one_step(y, mask, SupportSelection.threshold(1e-9))
    with pytest.raises(OversizedSupportError):
        recover_known_support(y, mask, range(13))


def test_top_m_fits_exactly():
    # M bins for M samples interpolate the data, so the residual is vacuous.
    # N prime keeps every square partial DFT block invertible.
    x = synthesize_sparse_signal([ComponentSpec(2, 1.0), ComponentSpec(9, 0.5j)], 17)
    mask = random_mask(17, 6, 3)
    res = recover_one_step(apply_mask(x, mask), mask, SupportSelection.top_m())
    assert len(res.support) == 6 and res.residual_ratio < 1e-20


def test_ranked_bins_tie_break():
    assert ranked_bins(np.array([1.0, 3.0, 3.0, 2.0])).tolist() == [1, 2, 3, 0]


def test_exhaustive_guard_and_zero_energy():
    mask = random_mask(64, 32, 0)
    with pytest.raises(InstanceTooLargeError):
        recover_exhaustive(np.ones(32), mask, 6)
    with pytest.raises(ValueError):
        recover_exhaustive(np.zeros(32), mask, 1)
    with pytest.raises(ValueError):
        recover_iterative(np.zeros(32), mask)


def test_exhaustive_lexicographic_tie():
    # samples {0, 2} of N=4 cannot tell bin k from bin k+2
    mask = SamplingMask.from_indices([0, 2], 4)
    x = synthesize_sparse_signal([ComponentSpec(3, 1.0)], 4)
    res = recover_exhaustive(apply_mask(x, mask), mask, 1)
    assert res.support == [1]


def test_iterative_stalls_without_new_bins():
    mask = SamplingMask.from_indices([0, 1], 8)
    y = np.array([1.0, 0.3 + 2j])
    res = recover_iterative(y, mask, max_iter=1)
    assert res.iterations == 1 and not res.converged


def test_exactness_known_support_500_instances():
    rng = np.random.default_rng(11)
    done = 0
    while done < 500:
        n_len = int(rng.integers(2, 65))
        m = int(rng.integers(1, n_len + 1))
        k = int(rng.integers(1, m + 1))
        x, mask, supp = _instance(rng, n_len, k, m)
        if numeric_rank(partial_matrix(mask, supp).entries) < k:
            continue
        X = recover_known_support(apply_mask(x, mask), mask, supp)
        np.testing.assert_allclose(X, full_dft(x), atol=1e-9 * max(1.0, n_len))
        done += 1


@settings(max_examples=80, deadline=None)
@given(st.integers(4, 48), st.data())
def test_superset_safety(n_len, data):
    m = data.draw(st.integers(2, n_len))
    k = data.draw(st.integers(1, min(3, m - 1)))
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    x, mask, supp = _instance(rng, n_len, k, m)
    extra_n = data.draw(st.integers(0, m - k))
    others = np.setdiff1d(np.arange(n_len), supp)
    extra = rng.choice(others, size=min(extra_n, others.size), replace=False).tolist()
    full = supp + extra
    if numeric_rank(partial_matrix(mask, full).entries) < len(full):
        return
    X = recover_known_support(apply_mask(x, mask), mask, full)
    ref = full_dft(x)
    assert np.max(np.abs(X[supp] - ref[supp])) <= 1e-9 * n_len
    if extra:
        assert np.max(np.abs(X[extra])) <= 1e-9 * n_len


@settings(max_examples=80, deadline=None)
@given(st.integers(8, 64), st.data())
def test_iterative_residual_monotone(n_len, data):
    m = data.draw(st.integers(2, n_len))
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    x, mask, _ = _instance(rng, n_len, data.draw(st.integers(1, 6)), m)
    y = apply_mask(x, mask) + 0.05 * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    trace = recover_iterative(y, mask).residual_trace
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
    assert all(r >= 0 for r in trace)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([8, 12, 16, 20, 24, 28, 32]), st.integers(1, 2), st.integers(0, 10**6))
def test_one_step_agrees_with_oracle_when_both_exact(n_len, k, seed):
    rng = np.random.default_rng(seed)
    x, mask, _ = _instance(rng, n_len, k, n_len // 2)
    y = apply_mask(x, mask)
    ex = recover_exhaustive(y, mask, k)
    one = recover_one_step(y, mask, SupportSelection.top_k(k))
    if ex.residual_ratio <= 1e-10 and one.residual_ratio <= 1e-10:
        np.testing.assert_allclose(one.spectrum, ex.spectrum, atol=1e-8)


def test_residual_ratio_bounds(example16):
    x, mask = example16
    y = apply_mask(x, mask)
    assert residual_ratio(y, mask, np.zeros(16)) == pytest.approx(1.0)
    assert residual_ratio(y, mask, full_dft(x)) < 1e-28


def test_summary_is_plain_python(example16):
    x, mask = example16
    s = recover_one_step(apply_mask(x, mask), mask, SupportSelection.top_k(3)).summary()
    assert s["support"] == [1, 6, 7] and isinstance(s["support"][0], int)
    assert s["method"] == "onestep:top_k"
