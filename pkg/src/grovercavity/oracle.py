"""Brute-force 2^N state-vector reference for the symmetric-subspace simulator.

Basis index b encodes qubit j in bit j; qubit value 1 means the atom is in |1>.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import comb

from .planner import ProtocolPlan, Rotate, Scatter
from .symspace import SymmetricState, apply_rotation, dicke, phase_flip

MAX_QUBITS = 12


@dataclass(frozen=True, eq=False)
class FullState:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"full-space oracle supports 1..{MAX_QUBITS} qubits")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError("amplitude vector has the wrong length")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def ground(cls, n: int) -> "FullState":
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = 1.0
        return cls(n, amps)


@lru_cache(maxsize=None)
def popcounts(n: int) -> np.ndarray:
    b = np.arange(2**n)
    out = np.zeros(2**n, dtype=int)
    for j in range(n):
        out += (b >> j) & 1
    out.setflags(write=False)
    return out


def single_qubit_rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, -s], [s, c]])


def full_rotation(f: FullState, phi: float) -> FullState:
    """Same y-rotation applied to every qubit."""
    n = f.n_qubits
    u = single_qubit_rotation(phi)
    psi = f.amps.reshape((2,) * n)
    # axis 0 of the reshaped array is the most significant bit, i.e. qubit n-1
    for ax in range(n):
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [ax])), 0, ax)
    return FullState(n, psi.reshape(-1))


def full_chi(f: FullState, m: int) -> FullState:
    """Sign flip on every basis state with exactly m qubits in |1>."""
    if not 0 <= m <= f.n_qubits:
        raise ValueError(f"m={m} outside 0..{f.n_qubits}")
    sign = np.where(popcounts(f.n_qubits) == m, -1.0, 1.0)
    return FullState(f.n_qubits, f.amps * sign)


def lift(s: SymmetricState) -> FullState:
    n = s.n_qubits
    w = popcounts(n)
    norms = np.sqrt(comb(n, np.arange(n + 1)))
    return FullState(n, s.amps[w] / norms[w])


def project(f: FullState) -> tuple[SymmetricState, float]:
    """Dicke components of f and the norm of what lies outside the symmetric sector."""
    n = f.n_qubits
    w = popcounts(n)
    norms = np.sqrt(comb(n, np.arange(n + 1)))
    amps = np.bincount(w, weights=f.amps.real, minlength=n + 1) + 1j * np.bincount(
        w, weights=f.amps.imag, minlength=n + 1
    )
    amps = amps / norms
    sym = SymmetricState(n, amps)
    residual = f.amps - lift(sym).amps
    return sym, float(np.linalg.norm(residual))


def verify_sequence(n: int, pulses) -> tuple[float, float]:
    """Run pulses from |0...0> in both pictures.

    Returns (max state distance, max residual norm) over all intermediate states.
    """
    s = dicke(n, 0)
    f = FullState.ground(n)
    dev = res = 0.0
    for p in pulses:
        if isinstance(p, Rotate):
            s, f = apply_rotation(s, p.angle), full_rotation(f, p.angle)
        elif isinstance(p, Scatter):
            s, f = phase_flip(s, p.m), full_chi(f, p.m)
        else:
            raise TypeError(f"unknown pulse {p!r}")
        proj, r = project(f)
        dev = max(dev, float(np.linalg.norm(proj.amps - s.amps)))
        res = max(res, r)
    return dev, res


def verify_protocol(plan: ProtocolPlan) -> float:
    """Largest deviation between the full-space and symmetric-subspace runs of a plan."""
    dev, _ = verify_sequence(plan.n_qubits, plan.all_pulses())
    return dev
