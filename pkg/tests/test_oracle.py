import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grovercavity.oracle import (
    FullState,
    full_chi,
    full_rotation,
    lift,
    popcounts,
    project,
    verify_protocol,
    verify_sequence,
)
from grovercavity.planner import GHZ, Dicke, Rotate, Scatter, plan
from grovercavity.symspace import SymmetricState, css_state, dicke


def random_full(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return FullState(n, v / np.linalg.norm(v))


def permute_qubits(f, perm):
    psi = f.amps.reshape((2,) * f.n_qubits)
    return FullState(f.n_qubits, np.transpose(psi, perm).reshape(-1))


@pytest.mark.parametrize("n,phi", [(3, 0.6), (6, 1.9), (9, math.pi / 2)])
def test_rotation_sector_weights(n, phi):
    f = full_rotation(FullState.ground(n), phi)
    w = popcounts(n)
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    for m in range(n + 1):
        expected = math.comb(n, m) * c ** (2 * (n - m)) * s ** (2 * m)
        assert np.sum(np.abs(f.amps[w == m]) ** 2) == pytest.approx(expected, abs=1e-14)


def test_rotation_identity_and_norm():
    f = random_full(7, 0)
    np.testing.assert_allclose(full_rotation(f, 0.0).amps, f.amps, atol=1e-15)
    assert np.linalg.norm(full_rotation(f, 2.3).amps) == pytest.approx(1.0, abs=1e-12)


def test_rotation_is_a_product_state():
    f = full_rotation(FullState.ground(3), 0.8)
    single = np.array([math.cos(0.4), math.sin(0.4)])
    ref = np.kron(np.kron(single, single), single)
    np.testing.assert_allclose(f.amps.real, ref, atol=1e-15)


def test_chi_two_qubits():
    f = FullState(2, np.full(4, 0.5))
    np.testing.assert_array_equal(full_chi(f, 1).amps, [0.5, -0.5, -0.5, 0.5])


def test_chi_involution_and_permutation_invariance():
    f = random_full(5, 1)
    np.testing.assert_array_equal(full_chi(full_chi(f, 2), 2).amps, f.amps)
    for perm in list(permutations(range(5)))[::17]:
        a = full_chi(permute_qubits(f, perm), 2).amps
        b = permute_qubits(full_chi(f, 2), perm).amps
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("n", [4, 7, 10])
def test_chi_spectrum(n):
    for m in range(n + 1):
        diag = full_chi(FullState(n, np.ones(2**n)), m).amps.real
        assert set(np.unique(diag)) <= {-1.0, 1.0}
        assert int(np.sum(diag == -1.0)) == math.comb(n, m)


def test_lift_w_state():
    f = lift(dicke(3, 1))
    expected = np.zeros(8)
    expected[[1, 2, 4]] = 1 / math.sqrt(3)
    np.testing.assert_allclose(f.amps, expected, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 10_000))
def test_lift_project_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    s = SymmetricState(n, v / np.linalg.norm(v))
    back, res = project(lift(s))
    np.testing.assert_allclose(back.amps, s.amps, atol=1e-12)
    assert res < 1e-12


def test_project_reports_asymmetric_part():
    f = FullState(2, np.array([0, 1, -1, 0]) / math.sqrt(2))  # singlet
    sym, res = project(f)
    assert sym.norm < 1e-15
    assert res == pytest.approx(1.0)


def test_lift_matches_css():
    np.testing.assert_allclose(
        lift(css_state(6, 1.2)).amps, full_rotation(FullState.ground(6), 1.2).amps, atol=1e-14
    )


def test_size_limits():
    with pytest.raises(ValueError):
        FullState.ground(13)
    with pytest.raises(ValueError):
        FullState(3, np.ones(4))


def test_dicke_and_ghz_plans():
    dev, res = verify_sequence(6, plan(6, Dicke(3)).all_pulses())
    assert dev < 1e-10 and res < 1e-12
    assert verify_protocol(plan(6, GHZ())) < 1e-10


def test_all_small_plans():
    for n in range(2, 11):
        for m in range(n + 1):
            assert verify_protocol(plan(n, Dicke(m))) < 1e-10
        if n % 2 == 0:
            assert verify_protocol(plan(n, GHZ())) < 1e-10


def test_random_sequences_n8():
    rng = np.random.default_rng(2024)
    worst = worst_res = 0.0
    for _ in range(100):
        pulses = [
            Rotate(float(rng.uniform(-2 * math.pi, 2 * math.pi))) if rng.random() < 0.5 else Scatter(int(rng.integers(0, 9)))
            for _ in range(int(rng.integers(1, 16)))
        ]
        dev, res = verify_sequence(8, pulses)
        worst, worst_res = max(worst, dev), max(worst_res, res)
    assert worst < 1e-10
    assert worst_res < 1e-12
