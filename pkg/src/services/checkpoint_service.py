"""
Checkpoint service - binary snapshot files.

Layout: the 8-byte magic, a packed little-endian header, then the samples as
interleaved float64 (re, im) pairs in row-major order.
"""

from pathlib import Path
from typing import List, Union

import numpy as np
from loguru import logger

from ..consts import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from ..models.evolution_models import CheckpointData, EvolutionSnapshot, EvolutionState
from ..models.spectral_models import ComplexField, Grid, Space

HEADER_DTYPE = np.dtype([
    ('version', '<u4'),
    ('dim', 'u1'),
    ('points', '<u4'),
    ('half_length', '<f8'),
    ('t', '<f8'),
    ('dt', '<f8'),
    ('mass', '<f8'),
    ('alpha', '<f8'),
    ('gamma', '<f8'),
    ('lam', 'i1'),
])

PathLike = Union[str, Path]


def encode_checkpoint(data: CheckpointData) -> bytes:
    grid = data.grid
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header[0] = (
        CHECKPOINT_VERSION, grid.dim, grid.points_per_axis, grid.half_length,
        data.t, data.dt, data.mass, data.alpha, data.gamma, data.lam,
    )
    samples = np.ascontiguousarray(data.values, dtype='<c16')
    return CHECKPOINT_MAGIC + header.tobytes() + samples.tobytes()


def decode_checkpoint(payload: bytes) -> CheckpointData:
    magic_size = len(CHECKPOINT_MAGIC)
    if payload[:magic_size] != CHECKPOINT_MAGIC:
        raise ValueError("not a checkpoint file: bad magic")
    if len(payload) < magic_size + HEADER_DTYPE.itemsize:
        raise ValueError("checkpoint header truncated")
    header = np.frombuffer(payload, dtype=HEADER_DTYPE, count=1, offset=magic_size)[0]
    if int(header['version']) != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {int(header['version'])}")
    grid = Grid(int(header['dim']), int(header['points']), float(header['half_length']))
    offset = magic_size + HEADER_DTYPE.itemsize
    expected = offset + grid.size * 16
    if len(payload) != expected:
        raise ValueError(f"checkpoint payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype='<c16', count=grid.size, offset=offset)
    return CheckpointData(
        grid=grid,
        values=values.astype(np.complex128).reshape(grid.shape),
        t=float(header['t']),
        dt=float(header['dt']),
        mass=float(header['mass']),
        alpha=float(header['alpha']),
        gamma=float(header['gamma']),
        lam=int(header['lam']),
    )


def save_checkpoint(path: PathLike, data: CheckpointData) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(data))
    logger.info(f"Wrote checkpoint {path} (t={data.t:.6g})")
    return path


def load_checkpoint(path: PathLike) -> CheckpointData:
    data = decode_checkpoint(Path(path).read_bytes())
    logger.debug(f"Loaded checkpoint {path}: n={data.grid.dim}, N={data.grid.points_per_axis}, t={data.t}")
    return data


def checkpoint_from_state(state: EvolutionState) -> CheckpointData:
    return CheckpointData(
        grid=state.grid,
        values=state.u.values,
        t=state.t,
        dt=state.dt,
        mass=state.dispersion.mass,
        alpha=state.dispersion.exponent,
        gamma=state.kernel.spec.gamma,
        lam=state.kernel.spec.lam,
    )


def checkpoint_from_field(
    u: ComplexField, mass: float, alpha: float, gamma: float, lam: int, t: float = 0.0, dt: float = 0.0
) -> CheckpointData:
    """Checkpoint for a bare field, e.g. a ground state (t = 0)."""
    if u.space != Space.PHYSICAL:
        raise TypeError("checkpoints store physical-space fields")
    return CheckpointData(
        grid=u.grid, values=u.values, t=t, dt=dt, mass=mass, alpha=alpha, gamma=gamma, lam=lam
    )


class CheckpointWriter:
    """evolve() observer that writes a checkpoint every interval time units.

    Checkpoints land on observation times, so interval should be a multiple
    of the observer cadence.
    """

    def __init__(
        self, directory: PathLike, interval: float, mass: float, alpha: float, gamma: float, lam: int,
        start: float = 0.0,
    ):
        if not interval > 0:
            raise ValueError(f"checkpoint interval must be positive, got {interval}")
        self.directory = Path(directory)
        self.interval = float(interval)
        self.mass = mass
        self.alpha = alpha
        self.gamma = gamma
        self.lam = lam
        self.next_time = start + self.interval
        self.paths: List[Path] = []

    def __call__(self, snapshot: EvolutionSnapshot) -> None:
        slack = 1e-9 * max(snapshot.dt, 1e-300)
        if snapshot.t < self.next_time - slack:
            return
        data = CheckpointData(
            grid=snapshot.grid, values=np.array(snapshot.values), t=snapshot.t, dt=snapshot.dt,
            mass=self.mass, alpha=self.alpha, gamma=self.gamma, lam=self.lam,
        )
        self.paths.append(save_checkpoint(self.directory / f"t_{snapshot.t:.9f}.chk", data))
        while self.next_time <= snapshot.t + slack:
            self.next_time += self.interval
