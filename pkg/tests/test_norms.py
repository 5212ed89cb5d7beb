"""Sobolev and dyadic-block norms: hand oracles and structural laws."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_modes
from ostrovsky.norms import (
    DEFAULT_P,
    DEFAULT_S,
    besov_l1,
    besov_sup,
    block_count,
    block_norms_bulk,
    dyadic_profile,
    sobolev_norm,
)
from ostrovsky.spectral import l2_norm, make_state, zero_state

coefficient_lists = st.lists(
    st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=20,
)


def test_default_parameters_are_in_the_supported_regime():
    assert DEFAULT_S * DEFAULT_P < -1


def test_block_count_values():
    assert block_count(0) == 0
    assert block_count(1) == 1
    assert block_count(2) == 2
    assert block_count(3) == 2
    assert block_count(4) == 3
    assert block_count(64) == 7


def test_block_layout_respects_dyadic_boundaries():
    # Unit mass on mode 4 lands in block j=2 and nowhere else (s=0, p=2).
    profile = dyadic_profile(make_state([0.0, 0.0, 0.0, 1.0]), 0.0, 2.0)
    assert profile.block_norms == (0.0, 0.0, pytest.approx(np.sqrt(2.0)))


def test_besov_hand_example():
    # Flat spectrum on 1 <= |n| <= 4 at s=0, p=2: block masses are
    # 2·1, 2·2, 2·1, so the sup block norm is exactly 2.
    flat = make_state([1.0, 1.0, 1.0, 1.0])
    assert besov_sup(flat, 0.0, 2.0) == 2.0
    assert besov_l1(flat, 0.0, 2.0) == pytest.approx(2.0 + 2.0 * np.sqrt(2.0), rel=1e-14)


def test_sobolev_zero_order_equals_l2():
    state = make_state(random_modes(24, 5))
    assert sobolev_norm(state, 0.0) == pytest.approx(l2_norm(state), rel=1e-13)
    assert sobolev_norm(make_state([1.0]), 0.0) == pytest.approx(
        np.sqrt(4.0 * np.pi), abs=1e-12
    )


def test_sobolev_weights_single_mode():
    # Unit mass on mode n: H^s norm is sqrt(4π)·<n>^s with <n> = sqrt(1+n²).
    for n in (1, 2, 5):
        modes = np.zeros(n, dtype=complex)
        modes[n - 1] = 1.0
        expected = np.sqrt(4.0 * np.pi) * (1.0 + n * n) ** (0.25)
        assert sobolev_norm(make_state(modes), 0.5) == pytest.approx(expected, rel=1e-13)


def test_profile_accepts_raw_arrays_and_states():
    modes = random_modes(10, 9)
    via_state = dyadic_profile(make_state(modes))
    via_array = dyadic_profile(modes)
    assert via_state.block_norms == via_array.block_norms


def test_profile_rejects_bad_p():
    with pytest.raises(ValueError, match="p"):
        dyadic_profile(make_state([1.0]), 0.0, 1.0)
    with pytest.raises(ValueError, match="p"):
        block_norms_bulk(np.ones((2, 4), dtype=complex), 0.0, 0.5)


def test_empty_spectrum_norms_are_zero():
    empty = zero_state(0)
    assert besov_sup(empty) == 0.0
    assert besov_l1(empty) == 0.0
    assert sobolev_norm(empty, -0.5) == 0.0
    assert dyadic_profile(empty).block_norms == ()


@given(coefficient_lists)
def test_parseval_block_partition(coeffs):
    # At s=0, p=2 the squared block norms partition 2·Σ|a_n|² exactly.
    state = make_state(coeffs)
    profile = dyadic_profile(state, 0.0, 2.0)
    total = sum(b**2 for b in profile.block_norms)
    direct = 2.0 * sum(abs(c) ** 2 for c in coeffs)
    assert total == pytest.approx(direct, rel=1e-12, abs=1e-12)


@given(coefficient_lists, st.floats(min_value=0.1, max_value=4.0))
def test_norms_are_positively_homogeneous(coeffs, scale):
    state = make_state(coeffs)
    scaled = make_state(np.asarray(coeffs) * scale)
    assert besov_sup(scaled) == pytest.approx(
        scale * besov_sup(state), rel=1e-10, abs=1e-12
    )
    assert besov_l1(scaled) == pytest.approx(
        scale * besov_l1(state), rel=1e-10, abs=1e-12
    )
    assert sobolev_norm(scaled, -0.3) == pytest.approx(
        scale * sobolev_norm(state, -0.3), rel=1e-10, abs=1e-12
    )


@given(coefficient_lists)
def test_sup_and_l1_norm_ordering(coeffs):
    state = make_state(coeffs)
    sup = besov_sup(state)
    l1 = besov_l1(state)
    blocks = block_count(len(coeffs))
    assert sup <= l1 + 1e-12
    assert l1 <= blocks * sup + 1e-12


def test_bulk_block_norms_match_per_spectrum_profile():
    matrix = np.stack([random_modes(13, seed) for seed in range(6)])
    bulk = block_norms_bulk(matrix, DEFAULT_S, DEFAULT_P)
    assert bulk.shape == (6, block_count(13))
    for row in range(6):
        profile = dyadic_profile(matrix[row])
        assert np.allclose(bulk[row], profile.block_norms, rtol=1e-13)
