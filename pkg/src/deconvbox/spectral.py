"""Fourier-side representation of periodic, zero-mean vector fields.

Everything lives on the 2*pi-periodic box, discretized with K collocation
points per axis. Fields are stored as half-spectrum (rfft layout) complex
arrays of shape (3, K, K, K//2 + 1), so conjugate symmetry (real-valued
fields) is structural. Sums over the wavenumber lattice always mean the
full integer lattice: stored entries with 0 < k3 < K/2 stand for a
conjugate pair and carry weight 2 in every quadratic sum.

Conventions used throughout the package:

* coefficients are "mathematical": w(x) = sum_k what(k) exp(i k.x), i.e.
  forward transforms divide by K**3;
* integrals over the box carry the normalized measure dx / (2*pi)**3, so
  that the discrete Parseval identity reads mean_x |w(x)|^2 =
  sum_k |what(k)|^2 and Sobolev norms are plain coefficient sums
  ||w||_s^2 = sum_k |k|^(2s) |what(k)|^2;
* the k = 0 (mean) mode is pinned to zero;
* Nyquist planes |k_i| = K/2 are excluded from the logical lattice so it
  is closed under k -> -k.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

DEALIAS_RULES = ("two_thirds", "none")

SobolevIndex = float


@dataclass(frozen=True, eq=False)
class WaveGrid:
    """Truncated integer wavenumber lattice for the 2*pi-periodic box.

    Attributes
    ----------
    K : int
        Collocation points per axis (even, >= 4).
    dealias_rule : str
        'two_thirds' keeps |k_i| <= K//3; 'none' keeps everything except
        the Nyquist planes.
    kx, ky, kz : ndarray
        Signed integer wavenumbers, shaped for broadcasting against the
        spectral layout (K,1,1), (1,K,1), (1,1,K//2+1).
    ksq : ndarray
        |k|^2 per stored mode, shape (K, K, K//2+1).
    mask : ndarray of bool
        True where the mode is retained by the dealias rule.
    mult : ndarray
        Lattice multiplicity of each stored mode (2 for interior k3
        columns that stand for a conjugate pair, else 1).
    """

    K: int
    dealias_rule: str
    kx: np.ndarray
    ky: np.ndarray
    kz: np.ndarray
    ksq: np.ndarray
    mask: np.ndarray
    mult: np.ndarray

    @property
    def shape(self) -> tuple[int, int, int]:
        """Real-space quadrature shape (K, K, K)."""
        return (self.K, self.K, self.K)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.K, self.K, self.K // 2 + 1)

    @property
    def n_points(self) -> int:
        """Logical mode count / real-space quadrature size, K**3."""
        return self.K**3

    @property
    def kvec(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.kx, self.ky, self.kz)


def make_grid(K: int, dealias_rule: str = "two_thirds") -> WaveGrid:
    """Build the wavenumber lattice and dealias mask for resolution K.

    The lattice covers |k_i| <= K/2 - 1 (Nyquist planes are dropped so the
    lattice is closed under negation). Under the 2/3 rule the mask keeps
    |k_i| <= K//3 in every axis, which makes pseudo-spectral quadratic
    products Galerkin-equivalent.
    """
    if not isinstance(K, (int, np.integer)):
        raise ValueError(f"K must be an integer, got {K!r}")
    if K < 4:
        raise ValueError(f"K must be at least 4, got {K}")
    if K % 2 != 0:
        raise ValueError(f"K must be even, got {K}")
    if dealias_rule not in DEALIAS_RULES:
        raise ValueError(
            f"dealias_rule must be one of {DEALIAS_RULES}, got {dealias_rule!r}"
        )

    half = K // 2 + 1
    k_line = (np.fft.fftfreq(K) * K).astype(np.int64)  # [0,1,...,K/2-1,-K/2,...,-1]
    kx = k_line.reshape(K, 1, 1)
    ky = k_line.reshape(1, K, 1)
    kz = np.arange(half, dtype=np.int64).reshape(1, 1, half)

    ksq = (kx.astype(np.float64)) ** 2 + (ky.astype(np.float64)) ** 2 + (
        kz.astype(np.float64)
    ) ** 2

    if dealias_rule == "two_thirds":
        cut = K // 3
    else:
        cut = K // 2 - 1
    mask = (np.abs(kx) <= cut) & (np.abs(ky) <= cut) & (np.abs(kz) <= cut)

    mult = np.ones((K, K, half), dtype=np.float64)
    mult[:, :, 1 : K // 2] = 2.0

    for arr in (kx, ky, kz, ksq, mask, mult):
        arr.setflags(write=False)

    return WaveGrid(
        K=int(K),
        dealias_rule=dealias_rule,
        kx=kx,
        ky=ky,
        kz=kz,
        ksq=ksq,
        mask=mask,
        mult=mult,
    )


@dataclass(eq=False)
class SpectralVectorField:
    """Half-spectrum coefficients of a real, zero-mean 3D vector field.

    coeff has shape (3, K, K, K//2+1), complex128. Conjugate symmetry is
    carried by the storage layout; constructors keep the k3 = 0 plane
    Hermitian so that round trips through physical space are exact.
    """

    grid: WaveGrid
    coeff: np.ndarray

    def __post_init__(self) -> None:
        expected = (3,) + self.grid.spectral_shape
        if self.coeff.shape != expected:
            raise ValueError(
                f"coefficient array has shape {self.coeff.shape}, expected {expected}"
            )
        if self.coeff.dtype != np.complex128:
            self.coeff = self.coeff.astype(np.complex128)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, grid: WaveGrid) -> "SpectralVectorField":
        return cls(grid, np.zeros((3,) + grid.spectral_shape, dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid: WaveGrid, modes: dict) -> "SpectralVectorField":
        """Build a real field from a few prescribed lattice modes.

        `modes` maps integer wavevectors (k1, k2, k3) to 3-component
        amplitudes; the conjugate mode at -k is filled automatically so the
        field is real. Pass one representative per conjugate pair.
        """
        out = cls.zeros(grid)
        K = grid.K
        lim = K // 2 - 1
        for k, amp in modes.items():
            k1, k2, k3 = (int(v) for v in k)
            a = np.asarray(amp, dtype=np.complex128)
            if a.shape != (3,):
                raise ValueError(f"amplitude for mode {k} must have 3 components")
            if k1 == 0 and k2 == 0 and k3 == 0:
                raise ValueError("the k = 0 mode is pinned to zero (zero mean)")
            if max(abs(k1), abs(k2), abs(k3)) > lim:
                raise ValueError(f"mode {k} is outside the lattice |k_i| <= {lim}")
            if k3 < 0:
                k1, k2, k3 = -k1, -k2, -k3
                a = np.conj(a)
            i1, i2 = k1 % K, k2 % K
            if not grid.mask[i1, i2, k3]:
                raise ValueError(f"mode {k} is removed by the dealias mask")
            out.coeff[:, i1, i2, k3] = a
            if k3 == 0:
                out.coeff[:, (-k1) % K, (-k2) % K, 0] = np.conj(a)
        return out

    @classmethod
    def from_physical(cls, grid: WaveGrid, values: np.ndarray) -> "SpectralVectorField":
        """Transform real-space samples (3, K, K, K) to a retained-lattice field.

        Content outside the dealias mask is discarded and the mean is
        removed, so the result always satisfies the field invariants.
        """
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (3,) + grid.shape:
            raise ValueError(
                f"physical array has shape {values.shape}, expected {(3,) + grid.shape}"
            )
        coeff = np.fft.rfftn(values, axes=(1, 2, 3)) / grid.n_points
        coeff *= grid.mask
        coeff[:, 0, 0, 0] = 0.0
        return cls(grid, coeff)

    # -- basic arithmetic ---------------------------------------------------

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coeff.copy())

    def __add__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        _require_same_grid(self, other)
        return SpectralVectorField(self.grid, self.coeff + other.coeff)

    def __sub__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        _require_same_grid(self, other)
        return SpectralVectorField(self.grid, self.coeff - other.coeff)

    def __mul__(self, scalar: float) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coeff * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, -self.coeff)

    # -- transforms ----------------------------------------------------------

    def to_physical(self) -> np.ndarray:
        """Evaluate the field on the K^3 collocation grid (real array)."""
        return np.fft.irfftn(self.coeff, s=self.grid.shape, axes=(1, 2, 3)) * (
            self.grid.n_points
        )


def _require_same_grid(a: SpectralVectorField, b: SpectralVectorField) -> None:
    if a.grid is not b.grid and (
        a.grid.K != b.grid.K or a.grid.dealias_rule != b.grid.dealias_rule
    ):
        raise ValueError("fields live on different grids")


def scale_modes(w: SpectralVectorField, factor: np.ndarray) -> SpectralVectorField:
    """Multiply every mode by a real, |k|-dependent factor array (K,K,K//2+1)."""
    return SpectralVectorField(w.grid, w.coeff * factor)


# -- norms and inner products --------------------------------------------------


def sobolev_norm(w: SpectralVectorField, s: SobolevIndex) -> float:
    """H_s norm (sum_k |k|^(2s) |what(k)|^2)^(1/2) over the nonzero lattice."""
    grid = w.grid
    amp2 = np.real(w.coeff * np.conj(w.coeff)).sum(axis=0)
    amp2 = amp2 * grid.mult
    if s == 0:
        amp2[0, 0, 0] = 0.0
        total = amp2.sum()
    elif s > 0:
        total = (amp2 * grid.ksq**s).sum()
    else:
        kern = np.where(grid.ksq > 0.0, grid.ksq, 1.0) ** s
        amp2[0, 0, 0] = 0.0
        total = (amp2 * kern).sum()
    return float(np.sqrt(total))


def inner_product(u: SpectralVectorField, v: SpectralVectorField) -> float:
    """Volume-normalized L2 inner product, sum_k Re(uhat(k) . conj(vhat(k)))."""
    _require_same_grid(u, v)
    dots = np.real(u.coeff * np.conj(v.coeff)).sum(axis=0)
    return float((dots * u.grid.mult).sum())


def divergence_error(w: SpectralVectorField) -> float:
    """max_k |k . what(k)| relative to the H_1 scale of the field."""
    grid = w.grid
    dot = (
        grid.kx * w.coeff[0] + grid.ky * w.coeff[1] + grid.kz * w.coeff[2]
    )
    worst = float(np.abs(dot).max())
    scale = sobolev_norm(w, 1.0)
    if scale == 0.0:
        return worst
    return worst / scale


# -- operators ------------------------------------------------------------------


def leray_project(w_raw: SpectralVectorField) -> SpectralVectorField:
    """Helmholtz-Leray projection onto divergence-free fields.

    Per mode: what -> what - k (k . what) / |k|^2; the k = 0 mode is left
    untouched (it is zero for valid fields). Idempotent and self-adjoint.
    """
    grid = w_raw.grid
    ksq_safe = np.where(grid.ksq > 0.0, grid.ksq, 1.0)
    dot = (
        grid.kx * w_raw.coeff[0]
        + grid.ky * w_raw.coeff[1]
        + grid.kz * w_raw.coeff[2]
    ) / ksq_safe
    out = np.empty_like(w_raw.coeff)
    out[0] = w_raw.coeff[0] - grid.kx * dot
    out[1] = w_raw.coeff[1] - grid.ky * dot
    out[2] = w_raw.coeff[2] - grid.kz * dot
    return SpectralVectorField(grid, out)


def stokes_apply(w: SpectralVectorField) -> SpectralVectorField:
    """Stokes operator on the periodic box: what(k) -> |k|^2 what(k)."""
    return SpectralVectorField(w.grid, w.coeff * w.grid.ksq)


def smallest_eigenvalue(grid: WaveGrid) -> float:
    """Smallest |k|^2 over retained nonzero modes (1 on any standard grid)."""
    vals = grid.ksq[grid.mask & (grid.ksq > 0.0)]
    if vals.size == 0:
        raise ValueError("degenerate grid: no retained nonzero modes")
    return float(vals.min())


def _dealiased_physical_factors(
    u: SpectralVectorField, v: SpectralVectorField
) -> tuple[np.ndarray, np.ndarray]:
    """Collocation values of u and of grad v, both mask-truncated.

    Returns (u_phys (3,K,K,K), dv_phys (3,3,K,K,K)) with dv_phys[i, j]
    holding d v_j / d x_i. A single batched inverse transform keeps the
    hot path cheap.
    """
    grid = u.grid
    K = grid.K
    uc = u.coeff * grid.mask
    vc = v.coeff * grid.mask
    stack = np.empty((12,) + grid.spectral_shape, dtype=np.complex128)
    stack[0:3] = uc
    kvec = grid.kvec
    for i in range(3):
        stack[3 + 3 * i : 6 + 3 * i] = (1j * kvec[i]) * vc
    phys = np.fft.irfftn(stack, s=grid.shape, axes=(1, 2, 3)) * grid.n_points
    u_phys = phys[0:3]
    dv_phys = phys[3:12].reshape(3, 3, K, K, K)
    return u_phys, dv_phys


def trilinear_b(
    u: SpectralVectorField, v: SpectralVectorField, w: SpectralVectorField
) -> float:
    """Trilinear convection form b(u, v, w) = sum_ij int u_i d_i v_j w_j dx.

    Evaluated pseudo-spectrally with mask-truncated (dealiased) inputs, so
    it is Galerkin-equivalent and b(u, w, w) vanishes to round-off for
    divergence-free u. The integral carries the normalized box measure,
    matching the coefficient-sum norm convention.
    """
    _require_same_grid(u, v)
    _require_same_grid(u, w)
    grid = u.grid
    u_phys, dv_phys = _dealiased_physical_factors(u, v)
    w_phys = np.fft.irfftn(
        w.coeff * grid.mask, s=grid.shape, axes=(1, 2, 3)
    ) * grid.n_points
    integrand = np.einsum("ixyz,ijxyz,jxyz->xyz", u_phys, dv_phys, w_phys)
    return float(integrand.mean())


def nonlinear_term(
    u: SpectralVectorField, w: SpectralVectorField, grid: WaveGrid | None = None
) -> SpectralVectorField:
    """Leray-projected, dealiased convective term P_L[(u . grad) w].

    The advecting field u should be divergence-free; the result is
    divergence-free and zero-mean by construction.
    """
    if grid is None:
        grid = u.grid
    _require_same_grid(u, w)
    u_phys, dw_phys = _dealiased_physical_factors(u, w)
    conv = np.einsum("ixyz,ijxyz->jxyz", u_phys, dw_phys)
    chat = np.fft.rfftn(conv, axes=(1, 2, 3)) / grid.n_points
    chat *= grid.mask
    chat[:, 0, 0, 0] = 0.0
    return leray_project(SpectralVectorField(grid, chat))


__all__ = [
    "DEALIAS_RULES",
    "SobolevIndex",
    "WaveGrid",
    "SpectralVectorField",
    "make_grid",
    "scale_modes",
    "sobolev_norm",
    "inner_product",
    "divergence_error",
    "leray_project",
    "stokes_apply",
    "smallest_eigenvalue",
    "trilinear_b",
    "nonlinear_term",
]
