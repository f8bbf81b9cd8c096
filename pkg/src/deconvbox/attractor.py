"""Absorbing-ball and dissipativity diagnostics for the model trajectories.

The solver's energy balance implies, via Poincare and Young inequalities,
a family of a priori estimates for the evolved field:

* a decay envelope for the energy,
    ||w(t)||^2 <= ||w0||^2 exp(-nu lam1 t) + rho0^2 (1 - exp(-nu lam1 t)),
  with rho0 = ||f|| / (nu lam1);
* an entry time into the slack ball B(0, rho0') for data in B(0, R),
    T0 = (1 / (nu lam1)) ln(R^2 / (rho0'^2 - rho0^2));
* a windowed bound on the enstrophy integral after absorption,
    int_t^{t+r} ||w||_1^2 ds <= (r / (nu^2 lam1)) ||f||^2 + rho0'^2 / nu;
* a uniform Gronwall bound (k1 / r + k3) exp(k2) for the eventual
  H1 level, whose k2 constant is not available in closed form and is
  therefore back-solved empirically from the data.

Everything here either evaluates those formulas or probes them against
computed trajectories.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import FieldSpec, SolverConfig, generate_ic
from .deconv import FilterParams
from .solver import (
    BlowUpError,
    ModelParams,
    Trajectory,
    initial_state,
    simulate,
)
from .spectral import make_grid, smallest_eigenvalue, sobolev_norm


def rho0(nu: float, lambda1: float, f_norm: float) -> float:
    """Asymptotic energy radius ||f|| / (nu * lambda1)."""
    if not nu > 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    if not lambda1 > 0.0:
        raise ValueError(f"lambda1 must be positive, got {lambda1}")
    if f_norm < 0.0:
        raise ValueError(f"f_norm must be nonnegative, got {f_norm}")
    return f_norm / (nu * lambda1)


@dataclass(frozen=True)
class AbsorbingParams:
    """Constants entering the absorbing-ball estimates.

    rho0_prime (slack radius > rho0) and R (initial ball radius) are only
    needed by the entry-time and window bounds and may be left unset for
    pure envelope evaluations.
    """

    nu: float
    lambda1: float
    f_norm: float
    rho0_prime: float | None = None
    R: float | None = None

    def __post_init__(self) -> None:
        rho = rho0(self.nu, self.lambda1, self.f_norm)  # validates nu, lambda1
        if self.rho0_prime is not None and not self.rho0_prime > rho:
            raise ValueError(
                f"rho0_prime must exceed rho0 = {rho}, got {self.rho0_prime}"
            )
        if self.R is not None and not self.R > 0.0:
            raise ValueError(f"R must be positive, got {self.R}")

    @property
    def rho0(self) -> float:
        return rho0(self.nu, self.lambda1, self.f_norm)


def absorbing_bound(t: float, w0_norm2: float, params: AbsorbingParams) -> float:
    """Energy decay envelope at time t for data with ||w0||^2 = w0_norm2."""
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    decay = math.exp(-params.nu * params.lambda1 * t)
    return w0_norm2 * decay + params.rho0**2 * (1.0 - decay)


def absorbing_time(params: AbsorbingParams) -> float:
    """Entry time T0 of B(0, R) data into the slack ball B(0, rho0').

    Returns 0 when R^2 <= rho0'^2 - rho0^2 (the data already sit inside).
    """
    if params.rho0_prime is None or params.R is None:
        raise ValueError("absorbing_time needs rho0_prime and R")
    gap = params.rho0_prime**2 - params.rho0**2
    if params.R**2 <= gap:
        return 0.0
    return math.log(params.R**2 / gap) / (params.nu * params.lambda1)


def uniform_gronwall(k1: float, k2: float, k3: float, r: float) -> float:
    """Uniform Gronwall bound (k1 / r + k3) * exp(k2)."""
    if not r > 0.0:
        raise ValueError(f"window length r must be positive, got {r}")
    for name, v in (("k1", k1), ("k2", k2), ("k3", k3)):
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"{name} must be a finite nonnegative number, got {v}")
    return (k1 / r + k3) * math.exp(k2)


@dataclass(frozen=True)
class GronwallConstants:
    """Window length r and the three windowed-integral constants."""

    r: float
    k1: float
    k2: float
    k3: float

    def __post_init__(self) -> None:
        uniform_gronwall(self.k1, self.k2, self.k3, self.r)  # validates

    def bound(self) -> float:
        return uniform_gronwall(self.k1, self.k2, self.k3, self.r)


@dataclass(frozen=True)
class WindowAverage:
    integral: float
    bound: float
    satisfied: bool


def _window_integral(traj: Trajectory, values: np.ndarray, t: float, r: float) -> float:
    """Trapezoid integral of a sampled column over [t, t + r]."""
    if not r > 0.0:
        raise ValueError(f"window length r must be positive, got {r}")
    t_end = t + r
    if t < traj.t[0] - 1e-12 or t_end > traj.t[-1] + 1e-12:
        raise ValueError(
            f"window [{t}, {t_end}] not covered by trajectory "
            f"[{traj.t[0]}, {traj.t[-1]}]"
        )
    inside = (traj.t > t) & (traj.t < t_end)
    ts = np.concatenate(([t], traj.t[inside], [t_end]))
    vals = np.concatenate(
        (
            [np.interp(t, traj.t, values)],
            values[inside],
            [np.interp(t_end, traj.t, values)],
        )
    )
    return float(np.trapezoid(vals, ts))


def h1_time_average(
    traj: Trajectory, t: float, r: float, params: AbsorbingParams, tol: float = 0.0
) -> WindowAverage:
    """Windowed enstrophy integral against its a priori bound.

    Integrates ||w(s)||_1^2 over [t, t + r] by the trapezoid rule on the
    sampled trajectory and compares with
    (r / (nu^2 lam1)) ||f||^2 + rho0'^2 / nu. The bound is meaningful for
    t past the absorbing time; the caller is responsible for that.
    """
    if params.rho0_prime is None:
        raise ValueError("h1_time_average needs rho0_prime")
    integral = _window_integral(traj, traj.h1_sq, t, r)
    bound = (r / (params.nu**2 * params.lambda1)) * params.f_norm**2 + (
        params.rho0_prime**2 / params.nu
    )
    return WindowAverage(
        integral=integral, bound=bound, satisfied=integral <= bound * (1.0 + tol)
    )


@dataclass(frozen=True)
class H1Report:
    """Boundedness diagnostics for the eventual H1 level of a trajectory."""

    t_threshold: float  # T0 + r measured from the trajectory start
    window_length: float
    k1: float
    k3: float
    sup_h1_sq: float
    window_max: np.ndarray
    nonincreasing: bool
    bounded: bool
    k2_empirical: float

    def gronwall_bound(self, k2: float) -> float:
        return uniform_gronwall(self.k1, k2, self.k3, self.window_length)


def h1_absorbing_report(
    traj: Trajectory,
    params: AbsorbingParams,
    r: float,
    slack: float = 0.01,
) -> H1Report:
    """Assess the eventual H1 level of a trajectory past absorption.

    Computes the Gronwall inputs k1 = r ||f||^2 / (nu^2 lam1) + rho0'^2/nu
    and k3 = (2 r / nu) ||f||^2 from the model constants, verifies that
    sup_{t >= T0 + r} ||w(t)||_1^2 is finite and that the successive
    window maxima have stabilized (nonincreasing over the trailing half of
    the windows, within `slack` relative), and back-solves the empirical
    k2 that would make the Gronwall bound (k1/r + k3) exp(k2) tight.
    Equilibration toward a forced steady level counts as transient, which
    is why only the trailing windows enter the monotonicity check.
    """
    if not r > 0.0:
        raise ValueError(f"window length r must be positive, got {r}")
    t0 = absorbing_time(params)
    t_start = traj.t[0] + t0 + r
    if traj.t[-1] < t_start + r:
        raise ValueError(
            f"trajectory ends at t = {traj.t[-1]}, too short for a window past "
            f"t = {t_start}"
        )
    k1 = (r / (params.nu**2 * params.lambda1)) * params.f_norm**2 + (
        params.rho0_prime**2 / params.nu
    )
    k3 = (2.0 * r / params.nu) * params.f_norm**2

    tail = traj.t >= t_start - 1e-12
    sup_h1 = float(traj.h1_sq[tail].max())

    maxima = []
    a = t_start
    while a + r <= traj.t[-1] + 1e-12:
        sel = (traj.t >= a - 1e-12) & (traj.t <= a + r + 1e-12)
        maxima.append(float(traj.h1_sq[sel].max()))
        a += r
    window_max = np.asarray(maxima)
    tail = window_max[len(window_max) // 2 :]
    nonincreasing = bool(np.all(tail[1:] <= tail[:-1] * (1.0 + slack)))

    base = k1 / r + k3
    with np.errstate(divide="ignore"):
        k2_emp = float(np.log(sup_h1 / base)) if base > 0.0 else math.inf

    return H1Report(
        t_threshold=t_start,
        window_length=r,
        k1=k1,
        k3=k3,
        sup_h1_sq=sup_h1,
        window_max=window_max,
        nonincreasing=nonincreasing,
        bounded=math.isfinite(sup_h1),
        k2_empirical=k2_emp,
    )


@dataclass(frozen=True)
class ProbeMember:
    index: int
    seed: int
    w0_norm: float
    entry_time: float | None
    stayed_inside: bool
    bound_ok: bool
    max_bound_ratio: float
    blow_up_time: float | None
    trajectory: Trajectory | None


@dataclass(frozen=True)
class ProbeReport:
    R: float
    rho0: float
    rho0_prime: float
    T0: float
    horizon: float
    epsilon: float
    members: tuple
    passed: bool


def _worker_count() -> int:
    raw = os.environ.get("DECONV_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ensemble_absorb_probe(
    R: float,
    rho0_prime: float,
    ensemble_size: int,
    template: SolverConfig,
    epsilon: float = 0.05,
    bound_tolerance: float = 0.01,
    base_seed: int = 2024,
    targets=None,
    keep_trajectories: bool = True,
) -> ProbeReport:
    """Run an ensemble from B(0, R) and check absorption into B(0, rho0').

    Members start from the template's initial-condition family (random
    spectra get per-member seeds; a single-mode template is reused as a
    fixed shape) rescaled so that ||H_N u0|| spans (0, R], run to 2 T0,
    and are judged on (a) entering
    the slack ball no later than T0 (1 + epsilon), (b) never leaving it
    afterwards, and (c) staying below the per-member decay envelope within
    `bound_tolerance`. Members run independently; DECONV_THREADS sets the
    worker count and never changes results. A blown-up member is recorded
    with its failure time and fails the probe.
    """
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be at least 1")
    grid = make_grid(template.K, template.dealias)
    filters = FilterParams(template.delta, template.order)
    forcing = None
    if template.forcing.kind != "zero":
        forcing = generate_ic(template.forcing, grid, filters)
    f_norm = sobolev_norm(forcing, 0.0) if forcing is not None else 0.0
    params = AbsorbingParams(
        nu=template.nu,
        lambda1=smallest_eigenvalue(grid),
        f_norm=f_norm,
        rho0_prime=rho0_prime,
        R=R,
    )
    t0 = absorbing_time(params)
    horizon = max(2.0 * t0, 10.0 * template.dt)
    model = ModelParams(nu=template.nu, filters=filters, forcing=forcing)

    if targets is None:
        targets = [R * (i + 1) / ensemble_size for i in range(ensemble_size)]
    elif len(targets) != ensemble_size:
        raise ValueError("targets must have one entry per member")

    def run_member(i: int) -> ProbeMember:
        seed = base_seed + i
        if template.ic.kind == "single_mode":
            spec = template.ic  # same shape for all members, rescaled below
        elif template.ic.kind == "random_spectrum":
            spec = replace(template.ic, seed=seed, target_norm=1.0)
        else:
            spec = FieldSpec(kind="random_spectrum", seed=seed, target_norm=1.0)
        u0 = generate_ic(spec, grid, filters)
        hn_norm = sobolev_norm(filters.apply(u0), 0.0)
        state0 = initial_state(u0 * (targets[i] / hn_norm), model)
        w0_norm = sobolev_norm(state0.w, 0.0)
        member_config = replace(template, T=horizon)
        try:
            traj = simulate(member_config, initial=state0)
        except BlowUpError as err:
            return ProbeMember(
                index=i,
                seed=seed,
                w0_norm=w0_norm,
                entry_time=None,
                stayed_inside=False,
                bound_ok=False,
                max_bound_ratio=math.inf,
                blow_up_time=err.t_last,
                trajectory=err.trajectory if keep_trajectories else None,
            )
        inside = traj.h0_sq < rho0_prime**2
        entry_idx = int(np.argmax(inside)) if inside.any() else None
        entry_time = None if entry_idx is None else float(traj.t[entry_idx])
        stayed = bool(inside[entry_idx:].all()) if entry_idx is not None else False
        ratios = traj.h0_sq / traj.absorb_bound
        max_ratio = float(ratios.max())
        return ProbeMember(
            index=i,
            seed=seed,
            w0_norm=w0_norm,
            entry_time=entry_time,
            stayed_inside=stayed,
            bound_ok=max_ratio <= 1.0 + bound_tolerance,
            max_bound_ratio=max_ratio,
            blow_up_time=None,
            trajectory=traj if keep_trajectories else None,
        )

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            members = tuple(pool.map(run_member, range(ensemble_size)))
    else:
        members = tuple(run_member(i) for i in range(ensemble_size))

    passed = all(
        m.blow_up_time is None
        and m.entry_time is not None
        and m.entry_time <= t0 * (1.0 + epsilon)
        and m.stayed_inside
        for m in members
    )
    return ProbeReport(
        R=R,
        rho0=params.rho0,
        rho0_prime=rho0_prime,
        T0=t0,
        horizon=horizon,
        epsilon=epsilon,
        members=members,
        passed=passed,
    )


__all__ = [
    "AbsorbingParams",
    "GronwallConstants",
    "WindowAverage",
    "H1Report",
    "ProbeMember",
    "ProbeReport",
    "rho0",
    "absorbing_bound",
    "absorbing_time",
    "uniform_gronwall",
    "h1_time_average",
    "h1_absorbing_report",
    "ensemble_absorb_probe",
]
