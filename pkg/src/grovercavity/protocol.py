"""Ideal and noisy execution of Grover preparation plans, detuning optimization and sweeps."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import planner
from .cavity import (
    CavityParams,
    DegenerateTraceError,
    ScatterKernel,
    apply_scatter,
    kernel_for_pulse,
    optimal_detuning_guess,
    reflection_amplitude,
    scatter_kernel,
    Wavepacket,
)
from .planner import GHZ, Dicke, ProtocolPlan, Rotate, Scatter
from .symspace import (
    SymDensityMatrix,
    SymmetricState,
    apply_rotation,
    dicke,
    ghz_state,
    phase_flip,
    rotate_density,
)

PSD_FLOOR = -1e-10
K_EXTRA = 3
GRID_POINTS = 48
SEARCH_SPAN = 8.0


class PlanError(ValueError):
    pass


@dataclass
class RunResult:
    fidelity: float
    success_prob: float
    k_used: int
    phi_used: float
    delta_used: float | None
    amp_trajectory: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepTable:
    axis_name: str
    axis: list
    results: list

    def __post_init__(self):
        if len(self.axis) != len(self.results):
            raise ValueError("axis and results differ in length")
        if any(b <= a for a, b in zip(self.axis, self.axis[1:])):
            raise ValueError("sweep axis must be strictly increasing")

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.results])

    @property
    def infidelities(self) -> np.ndarray:
        return 1.0 - self.fidelities

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["axis", "fidelity", "success_prob", "infidelity", "k", "delta"])
        for x, r in zip(self.axis, self.results):
            w.writerow(
                [
                    _fmt(x),
                    _fmt(r.fidelity),
                    _fmt(r.success_prob),
                    _fmt(1.0 - r.fidelity),
                    r.k_used,
                    "" if r.delta_used is None else _fmt(r.delta_used),
                ]
            )
        return buf.getvalue()


def _fmt(x) -> str:
    return format(float(x), ".17g")


def target_state(plan: ProtocolPlan) -> SymmetricState:
    if isinstance(plan.target, GHZ):
        return ghz_state(plan.n_qubits, plan.ghz_sign)
    return dicke(plan.n_qubits, plan.target.m)


def _expected_step(plan: ProtocolPlan) -> list:
    n, phi = plan.n_qubits, plan.phi
    if isinstance(plan.target, GHZ):
        return [Scatter(n), Scatter(0), Rotate(phi), Scatter(n // 2), Rotate(-phi)]
    return [Scatter(plan.target.m), Rotate(-phi), Scatter(0), Rotate(phi)]


def validate_plan(plan: ProtocolPlan):
    """Structural check: leading rotation followed by k identical Grover steps."""
    pulses = list(plan.pulses)
    step = _expected_step(plan)
    if len(pulses) != 1 + plan.k * len(step):
        raise PlanError(
            f"expected {1 + plan.k * len(step)} pulses for k={plan.k}, got {len(pulses)}"
        )
    if not isinstance(pulses[0], Rotate):
        raise PlanError("plan must start with a rotation")
    for j in range(plan.k):
        got = pulses[1 + j * len(step) : 1 + (j + 1) * len(step)]
        for a, b in zip(got, step):
            same = type(a) is type(b) and (
                a.m == b.m if isinstance(a, Scatter) else math.isclose(a.angle, b.angle)
            )
            if not same:
                raise PlanError(f"Grover step {j} does not match the expected pulse pattern")
    for p in pulses:
        if isinstance(p, Scatter) and not 0 <= p.m <= plan.n_qubits:
            raise PlanError(f"scatter index {p.m} outside 0..{plan.n_qubits}")
    if isinstance(plan.target, GHZ):
        if plan.prep is None:
            raise PlanError("GHZ plan needs its Dicke preparation stage")
        validate_plan(plan.prep)


def _run(plan, x, rotate, scatter, amp):
    """Walk the pulse list; returns the final carrier and per-step target amplitudes."""
    validate_plan(plan)
    if plan.prep is not None:
        x, _ = _run(plan.prep, x, rotate, scatter, amp)
    target = target_state(plan)
    pulses = list(plan.pulses)
    traj = []
    step = len(_expected_step(plan))
    for i, p in enumerate(pulses):
        x = rotate(x, p.angle) if isinstance(p, Rotate) else scatter(x, p.m)
        if i % step == 0:
            traj.append(amp(x, target))
    return x, traj


def run_ideal(plan: ProtocolPlan) -> RunResult:
    """Exact pure-state execution; trajectory holds |<target|psi>| after each Grover step."""
    start = dicke(plan.n_qubits, 0)
    final, traj = _run(
        plan,
        start,
        apply_rotation,
        phase_flip,
        lambda s, t: abs(t.overlap(s)),
    )
    fid = abs(target_state(plan).overlap(final)) ** 2
    return RunResult(fid, 1.0, plan.k, plan.phi, None, traj)


KernelFn = Callable[[int, int], ScatterKernel]


def run_noisy(
    plan: ProtocolPlan,
    p: CavityParams | None,
    sigma: float,
    heralded: bool = False,
    kernel: KernelFn | None = None,
    check_psd: bool = False,
) -> RunResult:
    """Density-matrix execution with one scatter kernel per photon.

    Unheralded fidelity is <target|rho|target> of the unnormalized state;
    heralded fidelity divides by the trace, which is also the success
    probability.  ``kernel(n, m)`` overrides the physical kernels.
    """
    n = plan.n_qubits
    if kernel is None:
        if p is None:
            raise ValueError("cavity parameters required without a kernel override")
        kernel = partial(kernel_for_pulse, p, sigma)

    def scatter(rho, m):
        out = apply_scatter(rho, kernel(n, m))
        if check_psd and out.min_eigenvalue() < PSD_FLOOR:
            raise ArithmeticError(f"density matrix lost positivity after scatter({m})")
        return out

    def amp(rho, t):
        pop = rho.expectation(t)
        if heralded:
            pop = pop / rho.trace
        return math.sqrt(max(pop, 0.0))

    rho0 = SymDensityMatrix.from_state(dicke(n, 0))
    rho, traj = _run(plan, rho0, rotate_density, scatter, amp)
    tr = rho.trace
    fid = rho.expectation(target_state(plan))
    if heralded:
        if tr < 1e-15:
            raise DegenerateTraceError("no photon survives the protocol")
        fid /= tr
    return RunResult(
        fid,
        min(tr, 1.0) if heralded else 1.0,
        plan.k,
        plan.phi,
        None if p is None else p.delta,
        traj,
    )


def _golden(f, a: float, b: float, tol: float = 1e-4, maxiter: int = 60):
    """Golden-section minimum of f on [a, b]; returns (x, f(x))."""
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def _seed_m(n: int, target) -> int:
    return n // 2 if isinstance(target, GHZ) else target.m


def _k_candidates(n: int, target, k_extra: int):
    kmin = planner.min_steps_ghz(n) if isinstance(target, GHZ) else planner.min_steps_dicke(n, target.m)
    if isinstance(target, Dicke) and target.m in (0, n):
        return [kmin]
    return list(range(kmin, kmin + k_extra + 1))


def optimize(
    n: int,
    target,
    p_base: CavityParams,
    sigma: float,
    heralded: bool = False,
    k_extra: int = K_EXTRA,
    grid_points: int = GRID_POINTS,
    span: float = SEARCH_SPAN,
    delta_bounds: tuple[float, float] | None = None,
) -> RunResult:
    """Best fidelity over detuning and step count.

    Detuning: log-spaced grid over [seed/span, seed*span] around the analytic
    seed, then golden-section refinement between the best grid point's
    neighbours.  Step count: every k from the minimum up to k_extra above it.
    """
    seed = optimal_detuning_guess(p_base.g, p_base.kappa, p_base.gamma, _seed_m(n, target))
    lo, hi = delta_bounds if delta_bounds else (seed / span, seed * span)
    grid = np.geomspace(lo, hi, grid_points)
    best = None
    for k in _k_candidates(n, target, k_extra):
        pl = planner.plan(n, target, k)

        def loss(logd):
            return -run_noisy(pl, p_base.with_delta(math.exp(logd)), sigma, heralded).fidelity

        lg = np.log(grid)
        vals = [loss(x) for x in lg]
        i = int(np.argmin(vals))
        a, b = lg[max(i - 1, 0)], lg[min(i + 1, len(lg) - 1)]
        x, fx = _golden(loss, a, b)
        if vals[i] < fx:
            x = lg[i]
        res = run_noisy(pl, p_base.with_delta(math.exp(x)), sigma, heralded)
        if best is None or res.fidelity > best.fidelity:
            best = res
    if best is None:
        raise planner.InfeasibleError("no feasible step count")
    return best


def _pool_map(fn, items, jobs: int | None):
    items = list(items)
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _coop_point(c, n, target, sigma, heralded, kappa, gamma):
    p = CavityParams.from_cooperativity(c, delta=1.0, kappa=kappa, gamma=gamma)
    return optimize(n, target, p, sigma, heralded)


def sweep_cooperativity(
    n: int,
    m: int,
    c_list: Sequence[float],
    sigma: float,
    heralded: bool = False,
    kappa: float = 1.0,
    gamma: float = 1.0,
    jobs: int | None = 1,
) -> SweepTable:
    """Optimized fidelity versus C, with C set through g at fixed kappa, gamma."""
    fn = partial(_coop_point, n=n, target=Dicke(m), sigma=sigma, heralded=heralded, kappa=kappa, gamma=gamma)
    return SweepTable("C", list(c_list), _pool_map(fn, c_list, jobs))


def _qubit_point(n, m, p, sigma, heralded):
    return optimize(n, Dicke(m), p, sigma, heralded)


def sweep_qubits(
    m: int,
    n_list: Sequence[int],
    p: CavityParams,
    sigma: float,
    heralded: bool = False,
    jobs: int | None = 1,
) -> SweepTable:
    fn = partial(_qubit_point, m=m, p=p, sigma=sigma, heralded=heralded)
    return SweepTable("N", list(n_list), _pool_map(fn, n_list, jobs))


def single_chi_fidelity(
    p: CavityParams, sigma: float, s: SymmetricState, m: int, heralded: bool = False
) -> RunResult:
    """Fidelity of one noisy chi_m on the pure input s against the ideal sign flip."""
    rho = apply_scatter(SymDensityMatrix.from_state(s), kernel_for_pulse(p, sigma, s.n_qubits, m))
    ideal = phase_flip(s, m)
    f = rho.expectation(ideal)
    tr = rho.trace
    if heralded:
        f /= tr
    return RunResult(f, tr if heralded else 1.0, 0, 0.0, p.delta, [])


def chi0_probe_state(n: int) -> SymmetricState:
    """Input for the chi_0 probe: the product state chi_0 acts on in the W-state protocol."""
    from .symspace import css_state

    return css_state(n, planner.solve_phi_dicke(n, 1, 1))


def _chi0_point(c, n, sigma, kappa, gamma, grid_points):
    p = CavityParams.from_cooperativity(c, delta=1.0, kappa=kappa, gamma=gamma)
    s = chi0_probe_state(n)
    lo = 5.0 * p.g  # dispersive edge
    grid = np.geomspace(lo, lo * 1e3, grid_points)
    res = [single_chi_fidelity(p.with_delta(d), sigma, s, 0) for d in grid]
    return max(res, key=lambda r: r.fidelity)


def sweep_chi0(
    n: int,
    c_list: Sequence[float],
    sigma: float,
    kappa: float = 1.0,
    gamma: float = 1.0,
    grid_points: int = 48,
    jobs: int | None = 1,
) -> SweepTable:
    """Single chi_0 infidelity versus C, detuning optimized within the dispersive regime."""
    fn = partial(_chi0_point, n=n, sigma=sigma, kappa=kappa, gamma=gamma, grid_points=grid_points)
    return SweepTable("C", list(c_list), _pool_map(fn, c_list, jobs))


def wavepacket_infidelity(p: CavityParams, sigma: float, s: SymmetricState, m: int) -> float:
    """Infidelity of a finite-bandwidth chi_m relative to a monochromatic photon at m*Omega.

    Isolates the bandwidth error: resolution and loss errors are common to both.
    """
    n = s.n_qubits
    center = m * p.omega_shift
    r0 = reflection_amplitude(p, np.arange(n + 1), center)
    mono = r0 * s.amps
    mono = mono / np.linalg.norm(mono)
    k = scatter_kernel(p, Wavepacket(sigma, center), n)
    rho = apply_scatter(SymDensityMatrix.from_state(s), k)
    return 1.0 - rho.expectation(SymmetricState(n, mono)) / rho.trace


def sweep_sigma(
    p: CavityParams, s: SymmetricState, m: int, sigmas: Sequence[float]
) -> SweepTable:
    results = []
    for sg in sigmas:
        f = 1.0 - wavepacket_infidelity(p, sg, s, m)
        results.append(RunResult(f, 1.0, 0, 0.0, p.delta, []))
    return SweepTable("sigma", list(sigmas), results)


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    r2: float


def fit_exponent(table_or_x, y=None) -> ExponentFit:
    """Least squares of log(1 - F) against log(axis)."""
    if y is None:
        x = np.asarray(table_or_x.axis, dtype=float)
        y = table_or_x.infidelities
    else:
        x = np.asarray(table_or_x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive axis and infidelity values")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(ly) == 0:
        return ExponentFit(0.0, float(ly[0]), 1.0)
    fit = stats.linregress(lx, ly)
    return ExponentFit(float(fit.slope), float(fit.intercept), float(fit.rvalue**2))
