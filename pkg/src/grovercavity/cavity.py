"""Single-photon reflection off the atom-cavity system and its action on the atoms.

Rates are in units of the cavity linewidth kappa by convention.  Frequencies
are measured from the bare cavity resonance omega_0.

The reflection amplitude uses the dispersive (adiabatically eliminated)
single-sided cavity response with n atoms in |1>:

    r_n(w) = 1 - kappa / (-i (w - n*Omega) + kappa/2 + n*gamma*g^2 / (2 Delta^2))

with Omega = g^2/Delta.  On resonance with no atoms r = -1, far off resonance
r -> +1, and each coupled atom shifts the resonance by Omega and adds a
spontaneous-emission loss rate gamma (g/Delta)^2.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .symspace import SymDensityMatrix

N_NODES = 63
CONVERGENCE_TOL = 1e-10
DISPERSIVE_RATIO = 5.0


class DispersiveWarning(UserWarning):
    pass


class QuadratureError(ArithmeticError):
    pass


class DegenerateTraceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CavityParams:
    g: float
    kappa: float
    gamma: float
    delta: float

    def __post_init__(self):
        if not (self.g > 0 and self.kappa > 0):
            raise ValueError("g and kappa must be positive")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative (0 disables atomic loss)")
        if self.delta == 0 or not math.isfinite(self.delta):
            raise ValueError("detuning must be finite and non-zero")

    @property
    def omega_shift(self) -> float:
        return self.g**2 / self.delta

    @property
    def cooperativity(self) -> float:
        if self.gamma == 0:
            return math.inf
        return self.g**2 / (self.kappa * self.gamma)

    @property
    def resolution(self) -> float:
        return self.omega_shift / self.kappa

    @property
    def loss_rate(self) -> float:
        """Per-atom spontaneous emission rate gamma (g/Delta)^2."""
        return self.gamma * (self.g / self.delta) ** 2

    @property
    def dispersive(self) -> bool:
        return abs(self.delta) >= DISPERSIVE_RATIO * self.g

    def with_delta(self, delta: float) -> "CavityParams":
        return CavityParams(self.g, self.kappa, self.gamma, delta)

    @classmethod
    def from_cooperativity(cls, c: float, delta: float, kappa: float = 1.0, gamma: float = 1.0):
        return cls(math.sqrt(c * kappa * gamma), kappa, gamma, delta)

    def check_dispersive(self):
        if not self.dispersive:
            warnings.warn(
                f"|Delta|={abs(self.delta):.3g} < {DISPERSIVE_RATIO:g} g = "
                f"{DISPERSIVE_RATIO * self.g:.3g}; dispersive picture is marginal",
                DispersiveWarning,
                stacklevel=2,
            )


@dataclass(frozen=True)
class Wavepacket:
    """Gaussian spectral density exp(-(w - center)^2 / 2 sigma^2) / (sqrt(2 pi) sigma)."""

    sigma: float
    center: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("wavepacket bandwidth must be positive")


@dataclass(frozen=True, eq=False)
class ScatterKernel:
    """K[n, l] = integral |Phi(w)|^2 r_n(w) conj(r_l(w)) dw."""

    n_qubits: int
    K: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "l", "re", "im"])
        for n in range(self.K.shape[0]):
            for l in range(self.K.shape[1]):
                z = self.K[n, l]
                w.writerow([n, l, format(z.real, ".17g"), format(z.imag, ".17g")])
        return buf.getvalue()


def reflection_amplitude(p: CavityParams, n_coupled, omega):
    """r_n(omega); broadcasts over n_coupled and omega."""
    n = np.asarray(n_coupled, dtype=float)
    if np.any(n < 0):
        raise ValueError("number of coupled atoms must be non-negative")
    w = np.asarray(omega, dtype=float)
    denom = -1j * (w - n * p.omega_shift) + 0.5 * p.kappa + 0.5 * n * p.loss_rate
    return 1.0 - p.kappa / denom


def _kernel_nodes(p: CavityParams, wp: Wavepacket, n: int, nodes: int) -> np.ndarray:
    x, w = np.polynomial.hermite.hermgauss(nodes)
    omega = wp.center + math.sqrt(2.0) * wp.sigma * x
    r = reflection_amplitude(p, np.arange(n + 1)[:, None], omega[None, :])
    return (r * (w / math.sqrt(math.pi))) @ r.conj().T


def scatter_kernel(p: CavityParams, wp: Wavepacket, n: int, nodes: int = N_NODES) -> ScatterKernel:
    """Wavepacket-averaged reflection products by Gauss-Hermite quadrature.

    The node count is doubled once as a convergence guard.
    """
    k1 = _kernel_nodes(p, wp, n, nodes)
    k2 = _kernel_nodes(p, wp, n, 2 * nodes)
    err = float(np.abs(k1 - k2).max())
    if err >= CONVERGENCE_TOL:
        raise QuadratureError(
            f"kernel not converged: {nodes} vs {2 * nodes} nodes differ by {err:.3e} "
            f"(sigma={wp.sigma}, center={wp.center}, kappa={p.kappa})"
        )
    k2 = 0.5 * (k2 + k2.conj().T)
    return ScatterKernel(n, k2)


@lru_cache(maxsize=4096)
def kernel_for_pulse(p: CavityParams, sigma: float, n: int, m: int) -> ScatterKernel:
    """Kernel of a photon centred on the Dicke-m resonance, m * Omega."""
    return scatter_kernel(p, Wavepacket(sigma, m * p.omega_shift), n)


def ideal_kernel(n: int, m: int) -> ScatterKernel:
    """Perfect chi_m: r_m = -1, every other r_n = +1."""
    r = np.ones(n + 1)
    r[m] = -1.0
    return ScatterKernel(n, np.outer(r, r).astype(complex))


def apply_scatter(rho: SymDensityMatrix, k: ScatterKernel) -> SymDensityMatrix:
    """Trace out the reflected photon: rho[n, l] -> rho[n, l] K[n, l]."""
    if rho.n_qubits != k.n_qubits:
        raise ValueError(f"qubit number mismatch: {rho.n_qubits} vs {k.n_qubits}")
    return SymDensityMatrix(rho.n_qubits, rho.mat * k.K)


def herald(rho: SymDensityMatrix) -> tuple[SymDensityMatrix, float]:
    """Condition on the photon coming back; returns the normalized state and its probability."""
    tr = rho.trace
    if tr < 1e-15:
        raise DegenerateTraceError(f"heralding probability {tr:.3e} is zero")
    return SymDensityMatrix(rho.n_qubits, rho.mat / tr), min(tr, 1.0)


def optimal_detuning_guess(g: float, kappa: float, gamma: float, m: int) -> float:
    """Detuning with resolution d = (C / max(m, 1))^(1/4), balancing 1/d^2 against m d^2 / C."""
    c = g**2 / (kappa * gamma)
    d = (c / max(m, 1)) ** 0.25
    return g**2 / (kappa * d)
