"""Persistence: CSV time series and binary state snapshots.

Time series use the fixed column layout below with shortest round-trip
decimal floats, so read(write(traj)) reproduces the trajectory exactly.
Snapshots are little-endian binary: a fixed header followed by the full
stored half-spectrum in a canonical mode ordering (lexicographic over the
signed wavevector (k1, k2, k3)), independent of the in-memory layout.
Round trips are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .deconv import FilterParams
from .solver import ModelParams, SolverState, Trajectory, make_state
from .spectral import SpectralVectorField, WaveGrid, make_grid

TIMESERIES_COLUMNS = (
    "t",
    "h0_sq",
    "h1_sq",
    "aw_sq",
    "dissipation_integral",
    "work_integral",
    "energy_residual",
    "absorb_bound",
)
TIMESERIES_HEADER = ",".join(TIMESERIES_COLUMNS)

SNAPSHOT_MAGIC = b"DCNVSNAP"
SNAPSHOT_VERSION = 1
_HEADER_STRUCT = struct.Struct("<8sIIIddd")  # magic, version, K, N, t, nu, delta


def write_timeseries(traj: Trajectory, path) -> None:
    """Write a trajectory as CSV with exact (shortest-repr) float encoding."""
    cols = traj.columns()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TIMESERIES_HEADER + "\n")
        for i in range(len(traj)):
            fh.write(",".join(repr(float(cols[name][i])) for name in TIMESERIES_COLUMNS))
            fh.write("\n")


def read_timeseries(path) -> Trajectory:
    """Read a trajectory CSV; malformed rows report their line number."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError("empty time series file")
    if lines[0] != TIMESERIES_HEADER:
        raise ValueError(
            f"line 1: expected header {TIMESERIES_HEADER!r}, got {lines[0]!r}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(TIMESERIES_COLUMNS):
            raise ValueError(
                f"line {lineno}: expected {len(TIMESERIES_COLUMNS)} columns, "
                f"got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as err:
            raise ValueError(f"line {lineno}: {err}") from None
    data = np.array(rows, dtype=np.float64).reshape(-1, len(TIMESERIES_COLUMNS))
    return Trajectory(*(data[:, j] for j in range(len(TIMESERIES_COLUMNS))))


@dataclass(frozen=True)
class SnapshotMeta:
    version: int
    K: int
    order: int
    t: float
    nu: float
    delta: float


@lru_cache(maxsize=8)
def _canonical_order(K: int) -> tuple[np.ndarray, np.ndarray]:
    """Permutation taking flattened rfft-layout modes to (k1,k2,k3)-lex order."""
    half = K // 2 + 1
    k_line = (np.fft.fftfreq(K) * K).astype(np.int64)
    k1 = np.broadcast_to(k_line.reshape(K, 1, 1), (K, K, half)).ravel()
    k2 = np.broadcast_to(k_line.reshape(1, K, 1), (K, K, half)).ravel()
    k3 = np.broadcast_to(np.arange(half).reshape(1, 1, half), (K, K, half)).ravel()
    order = np.lexsort((k3, k2, k1))  # last key is primary
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.size)
    return order, inverse


def write_snapshot(state: SolverState, params: ModelParams, path) -> None:
    """Write the full state (half-spectrum) in the canonical mode ordering."""
    grid = state.w.grid
    order, _ = _canonical_order(grid.K)
    header = _HEADER_STRUCT.pack(
        SNAPSHOT_MAGIC,
        SNAPSHOT_VERSION,
        grid.K,
        params.filters.order,
        state.t,
        params.nu,
        params.filters.delta,
    )
    payload = state.w.coeff.reshape(3, -1).T[order]  # (n_modes, 3), canonical order
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(payload, dtype="<c16").tobytes())


def read_snapshot_meta(path) -> SnapshotMeta:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER_STRUCT.size)
    if len(header) < _HEADER_STRUCT.size:
        raise ValueError("snapshot file is truncated (incomplete header)")
    magic, version, K, order, t, nu, delta = _HEADER_STRUCT.unpack(header)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"not a snapshot file (magic {magic!r})")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    return SnapshotMeta(version=version, K=K, order=order, t=t, nu=nu, delta=delta)


def read_snapshot(
    path, grid: WaveGrid | None = None, params: ModelParams | None = None
) -> SolverState:
    """Read a snapshot back into a SolverState.

    A provided grid must match the stored resolution (rejected with both K
    values otherwise); without one, a default two-thirds grid at the stored
    K is built. The truncation cache uses `params` when given, else the
    stored filter parameters.
    """
    meta = read_snapshot_meta(path)
    if grid is None:
        grid = make_grid(meta.K, "two_thirds")
    elif grid.K != meta.K:
        raise ValueError(
            f"snapshot resolution K = {meta.K} does not match the requested "
            f"grid K = {grid.K}"
        )
    n_modes = grid.K * grid.K * (grid.K // 2 + 1)
    expected = n_modes * 3 * 16
    with open(path, "rb") as fh:
        fh.seek(_HEADER_STRUCT.size)
        blob = fh.read()
    if len(blob) < expected:
        raise ValueError(
            f"snapshot payload is truncated ({len(blob)} bytes, expected {expected})"
        )
    _, inverse = _canonical_order(grid.K)
    payload = np.frombuffer(blob[:expected], dtype="<c16").reshape(n_modes, 3)
    coeff = np.ascontiguousarray(
        payload[inverse].T.reshape((3,) + grid.spectral_shape)
    ).astype(np.complex128)
    w = SpectralVectorField(grid, coeff)
    if params is None:
        params = ModelParams(nu=meta.nu, filters=FilterParams(meta.delta, meta.order))
    return make_state(meta.t, w, params)


__all__ = [
    "TIMESERIES_COLUMNS",
    "TIMESERIES_HEADER",
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
    "SnapshotMeta",
    "write_timeseries",
    "read_timeseries",
    "write_snapshot",
    "read_snapshot",
    "read_snapshot_meta",
]
