"""Pure states, collective rotations and phase oracles on the symmetric subspace.

A state of N qubits that is invariant under qubit permutations lives in the
(N+1)-dimensional span of the Dicke states |m>, where m counts the qubits in
|1>.  Everything here works on length N+1 amplitude vectors.

Rotation convention: the single-qubit rotation is

    R(phi)|0> = cos(phi/2)|0> + sin(phi/2)|1>
    R(phi)|1> = -sin(phi/2)|0> + cos(phi/2)|1>

so that R(phi)^{(x)N} |0...0> is the product state with all-positive binomial
amplitudes.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

NORM_TOL = 1e-10
_TINY = 1e-300
_LOG_TINY = np.log(_TINY)
_NEAR_AXIS = 1e-6


@dataclass(frozen=True, eq=False)
class SymmetricState:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (self.n_qubits + 1,):
            raise ValueError(
                f"expected {self.n_qubits + 1} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def overlap(self, other: "SymmetricState") -> complex:
        """<self|other>."""
        _check_same_n(self, other)
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "SymmetricState") -> float:
        return abs(self.overlap(other)) ** 2

    def __neg__(self):
        return SymmetricState(self.n_qubits, -self.amps)


@dataclass(frozen=True, eq=False)
class SymDensityMatrix:
    """Density matrix in the Dicke basis; trace may drop below one after lossy maps."""

    n_qubits: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        d = self.n_qubits + 1
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_state(cls, s: SymmetricState) -> "SymDensityMatrix":
        return cls(s.n_qubits, np.outer(s.amps, s.amps.conj()))

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def expectation(self, s: SymmetricState) -> float:
        """<s|rho|s>, real part."""
        return float(np.real(np.vdot(s.amps, self.mat @ s.amps)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))[0])


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    n_qubits: int
    angle: float
    mat: np.ndarray


@dataclass(frozen=True, eq=False)
class QGrid:
    theta_samples: np.ndarray
    phi_samples: np.ndarray
    values: np.ndarray

    def to_csv(self) -> str:
        """CSV with header ``beta,phi_az,q``; beta varies slowest."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["beta", "phi_az", "q"])
        for i, beta in enumerate(self.theta_samples):
            for j, az in enumerate(self.phi_samples):
                w.writerow([_fmt(beta), _fmt(az), _fmt(self.values[i, j])])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _check_same_n(a, b):
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit number mismatch: {a.n_qubits} vs {b.n_qubits}")


def _check_index(n: int, m: int):
    if not 0 <= m <= n:
        raise ValueError(f"Dicke index m={m} outside 0..{n}")


def log_binom(n: int, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def _signed_log(x: float) -> tuple[float, float]:
    if x == 0.0:
        return -np.inf, 0.0
    return float(np.log(abs(x))), float(np.sign(x))


def _exp_flush(logmag: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(np.where(logmag < _LOG_TINY, -np.inf, logmag))


def binomial_amplitudes(n: int, phi: float) -> np.ndarray:
    """sqrt(C(n,m)) cos^{n-m}(phi/2) sin^m(phi/2) for m = 0..n, signs included."""
    m = np.arange(n + 1)
    lc, sc = _signed_log(np.cos(phi / 2))
    ls, ss = _signed_log(np.sin(phi / 2))
    with np.errstate(invalid="ignore"):
        # 0 * -inf -> nan; those entries are exact zeros or ones
        logmag = 0.5 * log_binom(n, m) + np.where(n - m == 0, 0.0, (n - m) * lc)
        logmag = logmag + np.where(m == 0, 0.0, m * ls)
    sign = np.where((n - m) % 2 == 1, sc, 1.0) * np.where(m % 2 == 1, ss, 1.0)
    return sign * _exp_flush(logmag)


def dicke(n: int, m: int) -> SymmetricState:
    _check_index(n, m)
    amps = np.zeros(n + 1, dtype=complex)
    amps[m] = 1.0
    return SymmetricState(n, amps)


def css_state(n: int, phi: float) -> SymmetricState:
    """Product state [cos(phi/2)|0> + sin(phi/2)|1>]^{(x)N} in the Dicke basis."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return SymmetricState(n, binomial_amplitudes(n, phi))


def ghz_state(n: int, sign: int = 1) -> SymmetricState:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = np.zeros(n + 1, dtype=complex)
    amps[0] += 1 / np.sqrt(2)
    amps[n] += sign / np.sqrt(2)
    return SymmetricState(n, amps)


def _half_turns(n: int, j: int) -> np.ndarray:
    """R(j*pi): a 2*pi turn is (-1)^N, a single pi turn maps |m> to (-1)^m |N-m>."""
    sign = (-1.0) ** (n * (j // 2))
    if j % 2 == 0:
        return sign * np.eye(n + 1)
    m = np.arange(n + 1)
    mat = np.zeros((n + 1, n + 1))
    mat[n - m, m] = sign * (-1.0) ** m
    return mat


def _grow(first_sign, first_log, diag, mu, back, ahead) -> np.ndarray:
    """Run the row recurrence from a known first row, all columns at once.

    Row r satisfies back[r] x[r-1] + (diag[r] - mu) x[r] ... = ahead[r] x[r+1]
    (signs folded in).  Mantissas are renormalized every step and the running
    log-scale is added back at the end.
    """
    size = diag.size
    mant = np.zeros((size, size))
    logs = np.zeros((size, size))
    prev = np.zeros(size)
    cur = np.asarray(first_sign, dtype=float)
    scale = np.asarray(first_log, dtype=float).copy()
    mant[0], logs[0] = cur, scale
    for r in range(size - 1):
        nxt = ((diag[r] - mu) * cur - back[r] * prev) / ahead[r]
        prev, cur = cur, nxt
        big = np.maximum(np.abs(prev), np.abs(cur))
        big = np.where(big > 0, big, 1.0)
        prev, cur = prev / big, cur / big
        scale = scale + np.log(big)
        mant[r + 1], logs[r + 1] = cur, scale
    out = np.sign(mant) * _exp_flush(np.log(np.abs(mant) + 1e-320) + logs)
    out[mant == 0] = 0.0
    return out


def _wigner_columns(n: int, phi: float) -> np.ndarray:
    """Rotation matrix via the three-term recurrence in the row index.

    Column m of R(phi) is the eigenvector of cos(phi) J_z - sin(phi) J_x with
    eigenvalue m - N/2.  Rows 0 and N are known in closed form, so each column
    is grown from row 0 downward and from row N upward (each direction is the
    growing solution on its own side of the column's peak) and the two halves
    are joined near the peak.  Values are carried as mantissa times exp(scale)
    so tails far below the double range are flushed to zero instead of
    breaking the recurrence.
    """
    size = n + 1
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    cphi, sphi = np.cos(phi), np.sin(phi)
    cols = np.arange(size)
    mu = cols - n / 2.0
    lb = 0.5 * log_binom(n, cols)

    # <0|R|m> = sqrt(C(N,m)) c^(N-m) (-s)^m ;  <N|R|m> = sqrt(C(N,m)) c^m s^(N-m)
    lc, sc = np.log(abs(c)), np.sign(c)
    ls, ss = np.log(abs(s)), np.sign(s)
    top_log = lb + (n - cols) * lc + cols * ls
    top_sign = sc ** (n - cols) * (-ss) ** cols
    bot_log = lb + cols * lc + (n - cols) * ls
    bot_sign = sc**cols * ss ** (n - cols)

    k = np.arange(n)
    beta = 0.5 * np.sqrt((k + 1.0) * (n - k))  # coupling between rows k, k+1
    diag = cphi * (np.arange(size) - n / 2.0)

    zero = np.zeros(1)
    link = np.concatenate([zero, sphi * beta, zero])  # link[r] couples rows r-1, r
    fwd = _grow(top_sign, top_log, diag, mu, link[:-1], link[1:])
    bwd = _grow(bot_sign, bot_log, diag[::-1], mu, link[1:][::-1], link[:-1][::-1])
    bwd = bwd[::-1]

    # join at the centre of the column's J_z distribution
    centre = np.clip(np.rint(n / 2.0 + mu * cphi), 0, n).astype(int)
    rows = np.arange(size)[:, None]
    return np.where(rows <= centre[None, :], fwd, bwd)


@lru_cache(maxsize=256)
def _rotation_cached(n: int, phi: float) -> np.ndarray:
    if abs(np.sin(phi)) < _NEAR_AXIS:
        # the recurrence divides by sin(phi); near multiples of pi split off the
        # small remainder and exponentiate the generator directly
        j = round(phi / np.pi)
        rest = phi - j * np.pi
        mat = _half_turns(n, j)
        if rest != 0.0:
            mat = mat @ expm(rest * jy_generator(n))
    else:
        mat = _wigner_columns(n, phi)
    mat.setflags(write=False)
    return mat


def rotation_matrix(n: int, phi: float) -> RotationMatrix:
    """Collective y-rotation R(phi)^{(x)N} restricted to the Dicke basis."""
    if n < 1:
        raise ValueError("need at least one qubit")
    phi = float(phi)
    return RotationMatrix(n, phi, _rotation_cached(n, phi))


def jy_generator(n: int) -> np.ndarray:
    """Real antisymmetric A with R(phi) = expm(phi * A), i.e. A = -i J_y."""
    k = np.arange(n)
    b = 0.5 * np.sqrt((k + 1.0) * (n - k))
    return np.diag(b, -1) - np.diag(b, 1)


def apply_rotation(s: SymmetricState, phi: float) -> SymmetricState:
    r = rotation_matrix(s.n_qubits, phi).mat
    return SymmetricState(s.n_qubits, r @ s.amps)


def rotate_density(rho: SymDensityMatrix, phi: float) -> SymDensityMatrix:
    r = rotation_matrix(rho.n_qubits, phi).mat
    return SymDensityMatrix(rho.n_qubits, r @ rho.mat @ r.T)


def phase_flip(s: SymmetricState, m: int) -> SymmetricState:
    """Ideal oracle chi_m: sign flip on the Dicke-m component."""
    _check_index(s.n_qubits, m)
    amps = s.amps.copy()
    amps[m] = -amps[m]
    return SymmetricState(s.n_qubits, amps)


def reflection_about(s: SymmetricState, a: SymmetricState) -> SymmetricState:
    """(1 - 2|a><a|) s."""
    _check_same_n(s, a)
    if abs(a.norm - 1.0) > NORM_TOL:
        raise ValueError(f"reflection axis must be normalized, |a| = {a.norm}")
    return SymmetricState(s.n_qubits, s.amps - 2 * np.vdot(a.amps, s.amps) * a.amps)


def coherent_amplitudes(n: int, beta: np.ndarray, phi_az: np.ndarray) -> np.ndarray:
    """CSS(beta, phi_az) amplitudes, shape beta.shape + (n+1,)."""
    beta = np.asarray(beta, dtype=float)
    m = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        lc = np.log(np.abs(np.cos(beta / 2)))[..., None]
        ls = np.log(np.abs(np.sin(beta / 2)))[..., None]
    with np.errstate(invalid="ignore"):
        logmag = 0.5 * log_binom(n, m) + np.where(n - m == 0, 0.0, (n - m) * lc)
        logmag = logmag + np.where(m == 0, 0.0, m * ls)
    sign = np.where((n - m) % 2 == 1, np.sign(np.cos(beta / 2))[..., None], 1.0)
    sign = sign * np.where(m % 2 == 1, np.sign(np.sin(beta / 2))[..., None], 1.0)
    phase = np.exp(1j * np.multiply.outer(np.asarray(phi_az, dtype=float), m))
    return sign * _exp_flush(logmag) * phase


def husimi_q(s: SymmetricState, betas, phis) -> QGrid:
    """Husimi Q on a (beta, phi_az) product grid, normalized to a unit maximum."""
    betas = np.asarray(betas, dtype=float).ravel()
    phis = np.asarray(phis, dtype=float).ravel()
    if betas.size == 0 or phis.size == 0:
        raise ValueError("empty angle grid")
    if abs(s.norm - 1.0) > NORM_TOL:
        raise ValueError("state must be normalized")
    bb, pp = np.meshgrid(betas, phis, indexing="ij")
    css = coherent_amplitudes(s.n_qubits, bb, pp)
    q = np.abs(css.conj() @ s.amps) ** 2
    peak = q.max()
    if peak <= 0:
        raise ValueError("Q function vanishes on the whole grid")
    return QGrid(betas, phis, q / peak)
