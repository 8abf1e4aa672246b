"""Kernels over conditioning coordinates and per-variable bandwidth selection.

Continuous variables get a Gaussian kernel whose bandwidth is a temperature
multiple of the Silverman rule-of-thumb value; discrete variables get the
exact-match identity kernel with unit bandwidth.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset

DEFAULT_GAMMA = 1e-3

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class KernelError(Exception):
    pass


class DegenerateColumn(KernelError):
    pass


class MissingBandwidth(KernelError):
    pass


class KernelKind(enum.Enum):
    GAUSSIAN = "gaussian"
    IDENTITY = "identity"


@dataclass(frozen=True)
class KernelEntry:
    kind: KernelKind
    bandwidth: float

    def __post_init__(self):
        if self.kind is KernelKind.IDENTITY and self.bandwidth != 1.0:
            raise KernelError("identity kernels carry bandwidth 1")
        if self.bandwidth <= 0:
            raise KernelError("bandwidth must be positive")


@dataclass(frozen=True)
class BandwidthPlan:
    """One kernel entry per variable, keyed by column name."""

    entries: Mapping[str, KernelEntry]

    def entry(self, column: str) -> KernelEntry:
        try:
            return self.entries[column]
        except KeyError:
            raise MissingBandwidth(f"no kernel entry for column {column!r}") from None

    def report_lines(self) -> list[str]:
        return [
            f"kernel {name}: {e.kind.value} h={e.bandwidth!r}"
            for name, e in self.entries.items()
        ]


def silverman_bandwidth(column, n: int | None = None) -> float:
    """Rule-of-thumb bandwidth (4/3)^(1/5) * A * n^(-1/5).

    A = min(sample standard deviation, IQR / 1.349), with the unbiased
    variance estimator and linear-interpolation (type 7) quantiles.
    Raises DegenerateColumn when A is zero.
    """
    x = np.asarray(column, dtype=np.float64)
    if n is None:
        n = x.size
    if n < 2 or x.size < 2:
        raise KernelError("need at least two observations for a bandwidth")
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75.0, 25.0])
    a = min(sd, float(q75 - q25) / 1.349)
    if a == 0.0:
        raise DegenerateColumn("zero spread (constant column or zero IQR)")
    return (4.0 / 3.0) ** 0.2 * a * float(n) ** -0.2


def bandwidth_plan(
    data: Dataset, gamma: float = DEFAULT_GAMMA, *, degenerate_fallback: bool = False
) -> BandwidthPlan:
    """Per-column plan: gamma-scaled Silverman for continuous, identity for discrete.

    A degenerate continuous column is an error unless ``degenerate_fallback``
    is set, in which case it receives the unit bandwidth scaled by gamma.
    """
    if gamma <= 0:
        raise KernelError("gamma must be positive")
    entries: dict[str, KernelEntry] = {}
    for j, name in enumerate(data.columns):
        if data.discrete[j]:
            entries[name] = KernelEntry(KernelKind.IDENTITY, 1.0)
            continue
        try:
            h = gamma * silverman_bandwidth(data.values[:, j])
        except DegenerateColumn:
            if not degenerate_fallback:
                raise DegenerateColumn(
                    f"column {name!r} has zero spread; pass a fallback or drop it"
                ) from None
            h = gamma
        entries[name] = KernelEntry(KernelKind.GAUSSIAN, h)
    return BandwidthPlan(entries=entries)


def gaussian_log_factor(diff: np.ndarray, h: float) -> np.ndarray:
    """log of (1/h) * standard-normal density at diff/h, elementwise."""
    u = diff / h
    return -0.5 * u * u - math.log(h) - _LOG_SQRT_2PI


def log_factor_matrix(column_values: np.ndarray, entry: KernelEntry) -> np.ndarray:
    """(n, n) log kernel factors between all observed value pairs of one column.

    Entry [a, b] is the log factor for a conditioning value taken from row a
    against candidate row b.  Identity mismatches are -inf.
    """
    x = np.asarray(column_values, dtype=np.float64)
    if entry.kind is KernelKind.IDENTITY:
        eq = x[:, None] == x[None, :]
        out = np.where(eq, 0.0, -np.inf)
        return out
    return gaussian_log_factor(x[:, None] - x[None, :], entry.bandwidth)


def product_kernel_value(
    plan: BandwidthPlan,
    pillow: Sequence[str],
    x: Sequence[float],
    y: Sequence[float],
) -> float:
    """Product kernel across the pillow coordinates, evaluated at x - y.

    Each continuous coordinate contributes (1/h) * phi((x-y)/h) with the
    standard normal density phi; each discrete coordinate contributes the
    exact-match indicator.  An empty pillow yields 1.
    """
    if len(x) != len(pillow) or len(y) != len(pillow):
        raise KernelError("x and y must be indexed by the pillow")
    value = 1.0
    for name, xv, yv in zip(pillow, x, y):
        entry = plan.entry(name)
        if entry.kind is KernelKind.IDENTITY:
            if xv != yv:
                return 0.0
        else:
            h = entry.bandwidth
            u = (xv - yv) / h
            value *= math.exp(-0.5 * u * u) / (h * math.sqrt(2.0 * math.pi))
    return value
