"""Self-contained property checks for the spectral and filter operators.

Backs the `verify-operators` CLI subcommand: every check builds its own
random data from a fixed seed, measures a defect, and compares it against
the documented tolerance. All checks are pure and side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deconv import (
    g_symbol,
    helmholtz_filter,
    hn_symbol,
    smoothing_bound,
    smoothing_constant,
    truncation_hn,
    van_cittert_apply,
)
from .spectral import (
    SpectralVectorField,
    inner_product,
    leray_project,
    make_grid,
    scale_modes,
    sobolev_norm,
    stokes_apply,
    trilinear_b,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_raw(grid, rng) -> SpectralVectorField:
    """Random retained-lattice field, not divergence-free."""
    shape = (3,) + grid.spectral_shape
    coeff = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    K = grid.K
    flip = (-np.arange(K)) % K
    plane = coeff[:, :, :, 0]
    coeff[:, :, :, 0] = 0.5 * (plane + np.conj(plane[:, flip][:, :, flip]))
    coeff *= grid.mask
    coeff[:, 0, 0, 0] = 0.0
    return SpectralVectorField(grid, coeff)


def operator_checks(K: int = 16, seed: int = 0) -> list[CheckResult]:
    grid = make_grid(K)
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []

    def record(name: str, defect: float, tol: float) -> None:
        results.append(
            CheckResult(name, defect <= tol, f"defect {defect:.3e} vs tol {tol:.1e}")
        )

    a = _random_raw(grid, rng)
    b = _random_raw(grid, rng)
    u = leray_project(_random_raw(grid, rng))
    w = leray_project(_random_raw(grid, rng))
    v = _random_raw(grid, rng)

    pa = leray_project(a)
    ppa = leray_project(pa)
    record(
        "leray projection idempotent",
        sobolev_norm(ppa - pa, 0.0) / max(sobolev_norm(a, 0.0), 1e-300),
        1e-12,
    )
    lhs = inner_product(pa, b)
    rhs_ = inner_product(a, leray_project(b))
    record(
        "leray projection self-adjoint",
        abs(lhs - rhs_) / max(abs(lhs), abs(rhs_), 1e-300),
        1e-12,
    )
    div = np.abs(
        grid.kx * pa.coeff[0] + grid.ky * pa.coeff[1] + grid.kz * pa.coeff[2]
    ).max()
    scale = np.abs(np.sqrt(grid.ksq) * np.abs(pa.coeff).max(axis=0)).max()
    record("projected field divergence-free per mode", div / max(scale, 1e-300), 1e-13)

    plain = float(((np.abs(a.coeff) ** 2).sum(axis=0) * grid.mult).sum())
    record(
        "H0 norm equals plain coefficient sum",
        abs(sobolev_norm(a, 0.0) ** 2 - plain) / max(plain, 1e-300),
        1e-13,
    )
    grad_sq = 0.0
    for ki in grid.kvec:
        grad = SpectralVectorField(grid, (1j * ki) * a.coeff)
        grad_sq += sobolev_norm(grad, 0.0) ** 2
    record(
        "H1 norm equals gradient norm",
        abs(sobolev_norm(a, 1.0) ** 2 - grad_sq) / max(grad_sq, 1e-300),
        1e-12,
    )
    record(
        "H2 norm equals Stokes image norm",
        abs(sobolev_norm(a, 2.0) - sobolev_norm(stokes_apply(a), 0.0))
        / max(sobolev_norm(a, 2.0), 1e-300),
        1e-12,
    )

    cancel = abs(trilinear_b(u, w, w))
    record(
        "trilinear form b(u, w, w) cancels",
        cancel / max(sobolev_norm(u, 0.0) * sobolev_norm(w, 1.0) * sobolev_norm(w, 0.0), 1e-300),
        1e-12,
    )
    anti = abs(trilinear_b(u, v, w) + trilinear_b(u, w, v))
    scale3 = sobolev_norm(u, 0.0) * (
        sobolev_norm(v, 1.0) * sobolev_norm(w, 0.0)
        + sobolev_norm(w, 1.0) * sobolev_norm(v, 0.0)
    )
    record("trilinear form antisymmetric in last slots", anti / max(scale3, 1e-300), 1e-12)

    delta, order = 0.7, 3
    filtered = helmholtz_filter(w, delta)
    resid = (
        delta**2 * stokes_apply(filtered).coeff + filtered.coeff - w.coeff
    )
    record(
        "helmholtz filter residual per mode",
        float(np.abs(resid).max()) / max(float(np.abs(w.coeff).max()), 1e-300),
        1e-14,
    )

    ksel = grid.ksq[grid.mask]
    g = g_symbol(ksel, delta)
    ok_range = bool(np.all(g > 0.0) and np.all(g <= 1.0))
    worst = 0.0
    prev = g
    for n in range(0, 8):
        hn = hn_symbol(ksel, delta, n)
        ok_range &= bool(np.all(hn > 0.0) and np.all(hn <= 1.0))
        if n > 0:
            worst = max(worst, float((prev - hn).max()))
        prev = hn
    results.append(
        CheckResult(
            "symbols in (0, 1] and nondecreasing in N",
            ok_range and worst <= 1e-15,
            f"range ok: {ok_range}, worst monotonicity defect {worst:.3e}",
        )
    )

    ident = np.abs(
        (1.0 - hn_symbol(ksel, delta, order))
        - (delta**2 * ksel / (1.0 + delta**2 * ksel)) ** (order + 1)
    ).max()
    record("closed-form truncation identity", float(ident), 1e-15)

    rel = 0.0
    for n in (0, 1, 5, 20):
        series = van_cittert_apply(w, delta, n)
        closed = truncation_hn(w, delta, n)
        rel = max(
            rel,
            sobolev_norm(series - closed, 0.0) / max(sobolev_norm(closed, 0.0), 1e-300),
        )
    record("series deconvolution matches closed form", rel, 1e-12)

    hw = truncation_hn(w, delta, order)
    comm = 0.0
    for op in (
        lambda f: helmholtz_filter(f, delta),
        stokes_apply,
        leray_project,
    ):
        d = truncation_hn(op(w), delta, order) - op(hw)
        comm = max(comm, sobolev_norm(d, 0.0) / max(sobolev_norm(hw, 0.0), 1e-300))
    record("truncation commutes with filter, Laplacian, projection", comm, 1e-14)

    contr = 0.0
    for s in (0.0, 1.0, 2.0):
        ns, nw = sobolev_norm(hw, s), sobolev_norm(w, s)
        contr = max(contr, (ns - nw) / max(nw, 1e-300))
    record("truncation contracts every Sobolev norm", max(contr, 0.0), 1e-12)

    measured = smoothing_constant(delta, order, grid)
    bound = smoothing_bound(delta, order)
    results.append(
        CheckResult(
            "smoothing constant below admissible bound",
            measured <= bound,
            f"measured {measured:.6f} vs (N+1)/delta^2 = {bound:.6f}",
        )
    )
    smooth = 0.0
    for s in (0.0, 1.0):
        lhs_n = sobolev_norm(hw, s + 2.0)
        smooth = max(smooth, lhs_n - bound * sobolev_norm(w, s))
    record("two-derivative smoothing inequality", max(smooth, 0.0), 1e-12)

    return results


def run_operator_checks(K: int = 16, seed: int = 0) -> bool:
    """Print one pass/fail line per invariant; True when all pass."""
    results = operator_checks(K=K, seed=seed)
    all_ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  {res.name}  ({res.detail})")
        all_ok &= res.passed
    print(f"{sum(r.passed for r in results)}/{len(results)} operator checks passed")
    return all_ok


__all__ = ["CheckResult", "operator_checks", "run_operator_checks"]
