"""Rotation angles, Grover step counts and pulse sequences for Dicke and GHZ targets.

Grover with initial overlap sin(theta/2) lands exactly on the target after k
steps when (2k+1) theta/2 = pi/2.  The planner picks the smallest such k for
which some rotation angle reaches overlap sin(pi/(2(2k+1))), then solves for
that angle on the branch below the overlap maximum.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .symspace import log_binom

BISECT_WIDTH = 1e-14


class InfeasibleError(ValueError):
    """No rotation angle gives an exact hit with the requested step count."""


@dataclass(frozen=True)
class Rotate:
    angle: float

    def to_dict(self):
        return {"type": "rotate", "angle": self.angle}


@dataclass(frozen=True)
class Scatter:
    m: int  # photon tuned to the Dicke-m resonance, omega_0 + m * Omega

    def to_dict(self):
        return {"type": "scatter", "m": self.m}


Pulse = Union[Rotate, Scatter]


@dataclass(frozen=True)
class Dicke:
    m: int

    def __str__(self):
        return f"dicke:{self.m}"


@dataclass(frozen=True)
class GHZ:
    def __str__(self):
        return "ghz"


@dataclass(frozen=True)
class ProtocolPlan:
    """Pulse sequence for one Grover preparation.

    ``pulses`` starts with the rotation that produces the Grover initial state
    from ``prep``'s output (|0...0> when ``prep`` is None), followed by k
    Grover steps.  GHZ plans carry the Dicke-N/2 preparation as ``prep``.
    """

    n_qubits: int
    target: Union[Dicke, GHZ]
    k: int
    phi: float
    theta: float
    pulses: tuple
    prep: "ProtocolPlan | None" = None
    ghz_sign: int = 1
    step_len: int = field(default=4)

    def all_pulses(self) -> list:
        head = self.prep.all_pulses() if self.prep is not None else []
        return head + list(self.pulses)

    def scatter_count(self) -> int:
        return sum(isinstance(p, Scatter) for p in self.pulses)

    def to_dict(self) -> dict:
        d = {
            "n_qubits": self.n_qubits,
            "target": str(self.target),
            "k": self.k,
            "phi": self.phi,
            "theta": self.theta,
            "pulses": [p.to_dict() for p in self.pulses],
        }
        if isinstance(self.target, GHZ):
            d["ghz_sign"] = self.ghz_sign
            d["prep"] = self.prep.to_dict()
        return d

    def to_json(self) -> str:
        # repr-precision floats; json uses repr for float
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolPlan":
        pulses = []
        for p in d["pulses"]:
            if p["type"] == "rotate":
                pulses.append(Rotate(float(p["angle"])))
            elif p["type"] == "scatter":
                pulses.append(Scatter(int(p["m"])))
            else:
                raise ValueError(f"unknown pulse type {p['type']!r}")
        tgt = d["target"]
        if tgt == "ghz":
            target, step_len, prep = GHZ(), 5, cls.from_dict(d["prep"])
        elif tgt.startswith("dicke:"):
            target, step_len, prep = Dicke(int(tgt.split(":")[1])), 4, None
        else:
            raise ValueError(f"unknown target {tgt!r}")
        return cls(
            n_qubits=int(d["n_qubits"]),
            target=target,
            k=int(d["k"]),
            phi=float(d["phi"]),
            theta=float(d["theta"]),
            pulses=tuple(pulses),
            prep=prep,
            ghz_sign=int(d.get("ghz_sign", 1)),
            step_len=step_len,
        )


def _check_dicke_args(n, m):
    if n < 1:
        raise ValueError("need at least one qubit")
    if not 0 <= m <= n:
        raise ValueError(f"Dicke index m={m} outside 0..{n}")


def _log_dicke_overlap(n, m, phi):
    # evaluated on the side where cos/sin are not tiny
    phi = np.asarray(phi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lc = np.log(np.cos(phi / 2))
        ls = np.log(np.sin(phi / 2))
        out = 0.5 * log_binom(n, m)
        out = out + np.where(n - m == 0, 0.0, (n - m) * lc)
        out = out + np.where(m == 0, 0.0, m * ls)
    return out


def dicke_overlap(n: int, m: int, phi: float) -> float:
    """Amplitude of |m> in the product state rotated by phi, for phi in [0, pi]."""
    _check_dicke_args(n, m)
    if not -1e-12 <= phi <= math.pi + 1e-12:
        raise ValueError(f"phi={phi} outside [0, pi]")
    phi = min(max(phi, 0.0), math.pi)
    if 2 * m > n:
        # mirror: |m> at phi has the same weight as |N-m> at pi - phi
        return float(np.exp(_log_dicke_overlap(n, n - m, math.pi - phi)))
    return float(np.exp(_log_dicke_overlap(n, m, phi)))


def optimal_phi(n: int, m: int) -> float:
    """Angle maximizing the Dicke-m overlap: tan^2(phi/2) = m / (N - m)."""
    _check_dicke_args(n, m)
    if m == 0:
        return 0.0
    if m == n:
        return math.pi
    return 2.0 * math.atan(math.sqrt(m / (n - m)))


def max_dicke_overlap(n: int, m: int) -> float:
    return dicke_overlap(n, m, optimal_phi(n, m))


def hit_overlap(k: int) -> float:
    """Initial overlap that reaches the target exactly after k steps."""
    return math.sin(math.pi / (2 * (2 * k + 1)))


def min_steps_for_overlap(a: float) -> int:
    """Smallest k with sin(pi / (2(2k+1))) <= a."""
    if a >= 1.0 - 1e-15:
        return 0
    if a <= 0.0:
        raise InfeasibleError("zero overlap cannot be amplified")
    k = max(int(math.ceil((math.pi / (2 * math.asin(a)) - 1) / 2)) - 1, 0)
    while hit_overlap(k) > a:
        k += 1
    return k


def min_steps_dicke(n: int, m: int) -> int:
    return min_steps_for_overlap(max_dicke_overlap(n, m))


def _bisect(f, lo: float, hi: float, width: float = BISECT_WIDTH) -> float:
    """Root of increasing f on [lo, hi] with f(lo) <= 0 <= f(hi)."""
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_phi_dicke(n: int, m: int, k: int) -> float:
    """Rotation angle on [0, optimal_phi] whose overlap is exactly sin(pi/(2(2k+1)))."""
    _check_dicke_args(n, m)
    kmin = min_steps_dicke(n, m)
    if k < kmin:
        raise InfeasibleError(f"k={k} below the minimum {kmin} for N={n}, m={m}")
    top = optimal_phi(n, m)
    if k == 0:
        return top
    a = hit_overlap(k)
    # rising branch of the overlap; compare in log space for N ~ 500
    la = math.log(a)
    return _bisect(lambda p: float(_log_dicke_overlap_any(n, m, p)) - la, 0.0, top)


def _log_dicke_overlap_any(n, m, phi):
    if 2 * m > n:
        return _log_dicke_overlap(n, n - m, math.pi - phi)
    return _log_dicke_overlap(n, m, phi)


def ghz_amplitudes(n: int, phi: float) -> tuple[float, float]:
    """(<0|, <N|) components of R(-phi)|N/2>, from the closed-form edge rows."""
    if n % 2:
        raise InfeasibleError("GHZ requires even N")
    h = n // 2
    # <0|R(-phi)|h> = sqrt(C) cos^h sin^h ; <N|R(-phi)|h> = sqrt(C) cos^h (-sin)^h
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    if c == 0.0 or s == 0.0:
        return 0.0, 0.0
    logmag = 0.5 * float(log_binom(n, h)) + h * (math.log(abs(c)) + math.log(abs(s)))
    mag = math.exp(logmag) if logmag > -690 else 0.0
    a0 = math.copysign(1.0, c * s) ** h * mag
    return a0, (-1.0) ** h * a0


def ghz_sign(n: int) -> int:
    """Relative sign of the GHZ state reached from the rotated |N/2>: (-1)^(N/2)."""
    if n % 2:
        raise InfeasibleError("GHZ requires even N")
    return -1 if (n // 2) % 2 else 1


def ghz_overlap(n: int, phi: float) -> float:
    a0, an = ghz_amplitudes(n, phi)
    s = ghz_sign(n)
    return abs(a0 + s * an) / math.sqrt(2)


def ghz_antisymmetric_overlap(n: int, phi: float) -> float:
    a0, an = ghz_amplitudes(n, phi)
    return abs(a0 - ghz_sign(n) * an) / math.sqrt(2)


def _log_ghz_overlap(n, phi):
    h = n // 2
    return (
        0.5 * math.log(2.0)
        + 0.5 * float(log_binom(n, h))
        + h * (math.log(math.cos(phi / 2)) + math.log(math.sin(phi / 2)))
    )


def min_steps_ghz(n: int) -> int:
    return min_steps_for_overlap(ghz_overlap(n, math.pi / 2))


def solve_phi_ghz(n: int, k: int) -> float:
    kmin = min_steps_ghz(n)
    if k < kmin:
        raise InfeasibleError(f"k={k} below the minimum {kmin} for GHZ with N={n}")
    la = math.log(hit_overlap(k))
    return _bisect(lambda p: _log_ghz_overlap(n, p) - la, 1e-300, math.pi / 2)


def estimate_steps(m: float) -> float:
    """Closed-form step estimate for small m, 1.24 m^(1/4) - 1/2."""
    return 1.24 * m**0.25 - 0.5


def estimate_steps_half(n: float) -> float:
    """Closed-form step estimate for m = N/2, 0.88 N^(1/4) - 1/2."""
    return 0.88 * n**0.25 - 0.5


def min_steps_table(n: int) -> np.ndarray:
    """min_steps_dicke(n, m) for every m, vectorized."""
    m = np.arange(n + 1)
    phi = np.array([optimal_phi(n, int(j)) for j in m])
    half = 2 * m <= n
    lo = np.where(half, _log_dicke_overlap(n, m, phi), _log_dicke_overlap(n, n - m, np.pi - phi))
    a = np.exp(lo)
    return np.array([min_steps_for_overlap(float(x)) for x in a], dtype=int)


def contour_table(n_max: int, n_min: int = 3) -> list[tuple[int, int, int]]:
    rows = []
    for n in range(n_min, n_max + 1):
        ks = min_steps_table(n)
        rows.extend((n, m, int(ks[m])) for m in range(n + 1))
    return rows


def contour_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "m", "k"])
    w.writerows(rows)
    return buf.getvalue()


def _dicke_plan(n: int, m: int, k: int | None) -> ProtocolPlan:
    k = min_steps_dicke(n, m) if k is None else k
    phi = solve_phi_dicke(n, m, k)
    theta = 2.0 * math.asin(min(dicke_overlap(n, m, phi), 1.0))
    pulses = [Rotate(phi)]
    for _ in range(k):
        pulses += [Scatter(m), Rotate(-phi), Scatter(0), Rotate(phi)]
    return ProtocolPlan(n, Dicke(m), k, phi, theta, tuple(pulses), step_len=4)


def _ghz_plan(n: int, k: int | None) -> ProtocolPlan:
    if n % 2:
        raise InfeasibleError("GHZ requires even N")
    prep = _dicke_plan(n, n // 2, None)
    k = min_steps_ghz(n) if k is None else k
    phi = solve_phi_ghz(n, k)
    theta = 2.0 * math.asin(min(ghz_overlap(n, phi), 1.0))
    pulses = [Rotate(-phi)]
    for _ in range(k):
        pulses += [Scatter(n), Scatter(0), Rotate(phi), Scatter(n // 2), Rotate(-phi)]
    return ProtocolPlan(
        n, GHZ(), k, phi, theta, tuple(pulses), prep=prep, ghz_sign=ghz_sign(n), step_len=5
    )


def plan(n: int, target: Union[Dicke, GHZ], k_override: int | None = None) -> ProtocolPlan:
    if isinstance(target, GHZ):
        return _ghz_plan(n, k_override)
    _check_dicke_args(n, target.m)
    return _dicke_plan(n, target.m, k_override)
