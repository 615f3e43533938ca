"""
Squared-norm shells of Z^2 \\ 0 and Z^3 \\ 0.

counts[k] = r_d(k) = #{n in Z^d, n != 0 : |n|^2 = k}. Index 0 is kept (always 0)
so that counts[k] addresses shell k directly.

Binary cache layout (little-endian):
    8s  magic      b"LATSHELL"
    u32 version    1
    u32 dimension  2 or 3
    u64 max_norm_sq K
    u32 counts[K]  r_d(1), ..., r_d(K)
"""

import math
import struct
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

from latmon.core.config import settings
from latmon.core.exceptions import CapacityError, DomainError, LatmonError
from latmon.core.logging import logger

MAGIC = b"LATSHELL"
CACHE_VERSION = 1
_HEADER = struct.Struct("<8sIIQ")

# Hard caps independent of the memory budget
MAX_NORM_SQ = {2: 1_000_000_000, 3: 100_000_000}
# Peak bytes per shell during construction: int64 counts, the int64 bincount
# result and the uint32 copy; 3D adds the int64 planar table and its shifted doubles
_BYTES_PER_SHELL = {2: 20, 3: 36}
# Lattice points handed to one bincount call
_CHUNK_POINTS = 1 << 22


@dataclass(frozen=True, eq=False)
class ShellTable:
    """Immutable representation counts r_d(k) for k <= max_norm_sq."""

    dimension: int
    max_norm_sq: int
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.counts.shape != (self.max_norm_sq + 1,):
            raise DomainError(
                "counts must have max_norm_sq + 1 entries",
                {"shape": self.counts.shape, "max_norm_sq": self.max_norm_sq},
            )
        self.counts.flags.writeable = False

    def r(self, k: int) -> int:
        if not 0 <= k <= self.max_norm_sq:
            raise DomainError("shell index outside the table", {"k": k, "max_norm_sq": self.max_norm_sq})
        return int(self.counts[k])

    @cached_property
    def cumulative(self) -> np.ndarray:
        """N(k) = number of nonzero lattice points with |n|^2 <= k."""
        out = np.cumsum(self.counts, dtype=np.int64)
        out.flags.writeable = False
        return out


def _check_capacity(dimension: int, max_norm_sq: int) -> None:
    if dimension not in (2, 3):
        raise DomainError("shell tables exist for dimension 2 and 3 only", {"dimension": dimension})
    if int(max_norm_sq) != max_norm_sq or max_norm_sq < 1:
        raise DomainError("max_norm_sq must be a positive integer", {"max_norm_sq": max_norm_sq})
    if max_norm_sq > MAX_NORM_SQ[dimension]:
        raise CapacityError(
            f"max_norm_sq above the hard cap for dimension {dimension}",
            {"max_norm_sq": max_norm_sq, "cap": MAX_NORM_SQ[dimension]},
        )
    needed = (max_norm_sq + 1) * _BYTES_PER_SHELL[dimension]
    if needed > settings.SHELL_MEMORY_BUDGET_BYTES:
        raise CapacityError(
            "shell table would exceed the memory budget",
            {"bytes": needed, "budget": settings.SHELL_MEMORY_BUDGET_BYTES},
        )


def _planar_counts(max_norm_sq: int, include_origin: bool) -> np.ndarray:
    """r_2 by bucket counting over the quadrant n1 >= 1, n2 >= 0 (times 4 by rotation)."""
    counts = np.zeros(max_norm_sq + 1, dtype=np.int64)
    radius = math.isqrt(max_norm_sq)
    rows = []
    batched = 0

    def flush():
        if rows:
            norms = np.concatenate(rows)
            counts[:] += np.bincount(norms, minlength=max_norm_sq + 1)
            rows.clear()

    for n1 in range(1, radius + 1):
        n1_sq = n1 * n1
        n2 = np.arange(0, math.isqrt(max_norm_sq - n1_sq) + 1, dtype=np.int64)
        rows.append(n1_sq + n2 * n2)
        batched += n2.size
        if batched >= _CHUNK_POINTS:
            flush()
            batched = 0
    flush()

    counts *= 4
    if include_origin:
        counts[0] = 1
    return counts


def build_shell_table(dimension: int, max_norm_sq: int) -> ShellTable:
    """
    Count lattice points shell by shell.

    Args:
        dimension: 2 or 3
        max_norm_sq: largest squared norm K to tabulate

    Returns:
        ShellTable with exact r_d(k) for 1 <= k <= K

    Raises:
        CapacityError: the table would exceed the memory budget or the hard cap
    """
    _check_capacity(dimension, max_norm_sq)
    logger.info("Building %dD shell table up to |n|^2 = %d", dimension, max_norm_sq)

    if dimension == 2:
        counts = _planar_counts(max_norm_sq, include_origin=False)
    else:
        # r_3(k) = sum over n3 of r_2(k - n3^2), the origin of the plane included
        planar = _planar_counts(max_norm_sq, include_origin=True)
        counts = planar.copy()
        for n3 in range(1, math.isqrt(max_norm_sq) + 1):
            shift = n3 * n3
            counts[shift:] += 2 * planar[: max_norm_sq + 1 - shift]
        counts[0] = 0

    return ShellTable(dimension=dimension, max_norm_sq=max_norm_sq, counts=counts.astype(np.uint32))


@lru_cache(maxsize=8)
def get_shell_table(dimension: int, max_norm_sq: int) -> ShellTable:
    """Process-local registry of built tables."""
    return build_shell_table(dimension, max_norm_sq)


def save_shell_table(table: ShellTable, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, CACHE_VERSION, table.dimension, table.max_norm_sq))
        fh.write(table.counts[1:].astype("<u4").tobytes())
    logger.info("Saved %dD shell table (K=%d) to %s", table.dimension, table.max_norm_sq, path)
    return path


def load_shell_table(path: Union[str, Path]) -> ShellTable:
    """
    Read a table written by save_shell_table.

    Raises:
        LatmonError: the file is not a shell-table cache or is truncated
    """
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise LatmonError("shell cache header truncated", {"path": str(path)})
        magic, version, dimension, max_norm_sq = _HEADER.unpack(header)
        if magic != MAGIC or version != CACHE_VERSION:
            raise LatmonError("not a shell cache file", {"path": str(path), "version": version})
        body = np.frombuffer(fh.read(), dtype="<u4")
    if body.size != max_norm_sq:
        raise LatmonError("shell cache body truncated", {"path": str(path), "expected": max_norm_sq, "found": body.size})

    counts = np.zeros(max_norm_sq + 1, dtype=np.uint32)
    counts[1:] = body
    return ShellTable(dimension=int(dimension), max_norm_sq=int(max_norm_sq), counts=counts)


def cache_path(cache_dir: Union[str, Path], dimension: int, max_norm_sq: int) -> Path:
    return Path(cache_dir) / f"shells_d{dimension}_k{max_norm_sq}.bin"


def cached_shell_table(
    dimension: int,
    max_norm_sq: int,
    cache_dir: Optional[Union[str, Path]] = None,
) -> ShellTable:
    """Registry lookup backed by the optional binary cache directory."""
    cache_dir = cache_dir if cache_dir is not None else settings.CACHE_DIR
    if cache_dir is None:
        return get_shell_table(dimension, max_norm_sq)

    path = cache_path(cache_dir, dimension, max_norm_sq)
    if path.exists():
        try:
            table = load_shell_table(path)
            if table.dimension == dimension and table.max_norm_sq == max_norm_sq:
                logger.info("Loaded shell table from %s", path)
                return table
        except LatmonError as e:
            logger.warning("Ignoring unreadable shell cache %s: %s", path, e.message)

    table = get_shell_table(dimension, max_norm_sq)
    save_shell_table(table, path)
    return table


def lattice_count(table: ShellTable, x) -> np.ndarray:
    """N(x) = number of nonzero lattice points with |n|^2 <= x (x <= max_norm_sq)."""
    idx = np.floor(np.asarray(x, dtype=float)).astype(np.int64)
    if np.any(idx < 0) or np.any(idx > table.max_norm_sq):
        raise DomainError("lattice_count argument outside the table", {"max_norm_sq": table.max_norm_sq})
    return table.cumulative[idx]


def ball_volume(dimension: int, x):
    """Volume of the ball of squared radius x."""
    x = np.asarray(x, dtype=float)
    if dimension == 2:
        return math.pi * x
    return (4.0 / 3.0) * math.pi * x**1.5


def lattice_discrepancy(table: ShellTable, x):
    """P(x) = N(x) + 1 - V_d(x), the lattice-point discrepancy including the origin."""
    return lattice_count(table, x) + 1.0 - ball_volume(table.dimension, x)
