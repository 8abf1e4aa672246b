"""Instance-weighted data augmentation driven by an ADMG.

New rows are assembled coordinate-wise from the training data: the value for
each variable is resampled from rows that look similar on the variable's
Markov pillow, and every possible combination of source rows receives a
weight equal to the product of the conditional resampling weights along the
way.  The full combination space has n^D entries, so the engine walks it as
a tree, abandoning any subtree whose weight has already fallen below the
pruning threshold (node weights can only shrink with depth).

A direct per-tuple evaluation of the same weight product is provided as an
independent cross-check (`brute_force_weights`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .admg import Admg, markov_pillow, validate
from .data import Dataset, format_float, write_csv
from .kernels import (
    BandwidthPlan,
    KernelKind,
    MissingBandwidth,
    gaussian_log_factor,
    log_factor_matrix,
    product_kernel_value,
)


class AugmentError(Exception):
    pass


class PlanGraphMismatch(AugmentError):
    pass


class TooLarge(AugmentError):
    pass


class NodeCapExceeded(AugmentError):
    pass


@dataclass(frozen=True)
class TreeNode:
    """A partial source-row assignment: rows chosen so far, in topological order."""

    prefix: tuple[int, ...]
    depth: int
    weight: float


@dataclass(frozen=True)
class AugmentedDataset:
    """Surviving weighted combinations, in lexicographic index-tuple order.

    ``indices[k, c]`` is the source row of column c for sample k (0-based,
    dataset column order); ``values[k, c]`` is copied bit-for-bit from the
    source dataset.
    """

    columns: tuple[str, ...]
    discrete: tuple[bool, ...]
    target: str | None
    indices: np.ndarray  # (m, D) int64
    weights: np.ndarray  # (m,) float64
    values: np.ndarray  # (m, D) float64

    def __len__(self) -> int:
        return self.weights.shape[0]

    def samples(self) -> Iterator[tuple[tuple[int, ...], float, tuple[float, ...]]]:
        for k in range(len(self)):
            yield (
                tuple(int(i) for i in self.indices[k]),
                float(self.weights[k]),
                tuple(float(v) for v in self.values[k]),
            )


def total_weight(aug: AugmentedDataset) -> float:
    """Sum of surviving weights; 1 when nothing was pruned or zeroed."""
    return float(np.sum(aug.weights)) if len(aug) else 0.0


def _normalize_log_row(logk: np.ndarray) -> np.ndarray:
    """Normalized weights from log kernel values; all-zero when every value is 0."""
    m = np.max(logk)
    if m == -np.inf:
        return np.zeros_like(logk)
    e = np.exp(logk - m)
    return e / e.sum()


def conditional_weight_row(
    data: Dataset,
    plan: BandwidthPlan,
    pillow: tuple[int, ...] | list[int],
    query,
) -> np.ndarray:
    """Resampling weights of every row for one conditioning query.

    ``pillow`` holds dataset column indices and ``query`` the conditioning
    values in the same order.  Weights are kernel values normalized over the
    rows; the row is all zeros when every kernel value is zero, and uniform
    1/n when the pillow is empty.
    """
    n = data.n
    if len(pillow) == 0:
        return np.full(n, 1.0 / n)
    logk = np.zeros(n)
    for col, q in zip(pillow, query):
        entry = plan.entry(data.columns[col])
        xs = data.values[:, col]
        if entry.kind is KernelKind.IDENTITY:
            logk = logk + np.where(xs == q, 0.0, -np.inf)
        else:
            logk = logk + gaussian_log_factor(q - xs, entry.bandwidth)
    return _normalize_log_row(logk)


def _topology(data: Dataset, graph: Admg):
    """Validated topological view aligned with dataset columns."""
    indexing = validate(graph)
    if set(graph.vertices) != set(data.columns):
        missing = set(graph.vertices) ^ set(data.columns)
        raise PlanGraphMismatch(
            f"graph vertices and dataset columns differ on {sorted(missing)}"
        )
    col_of = [data.column_index(v) for v in indexing.order]
    pillows = [sorted(p) for p in markov_pillow(graph, indexing).pillows]
    return indexing, col_of, pillows


def fill_prob_tree(
    data: Dataset,
    graph: Admg,
    plan: BandwidthPlan,
    theta: float,
    *,
    node_cap: int = 10_000_000,
    renormalize: bool = False,
) -> AugmentedDataset:
    """Expand the weighted combination tree and return the surviving samples.

    Variables are processed in topological order; at each depth the candidate
    source rows are weighted by kernel similarity on the Markov pillow of the
    current variable, evaluated at the values already chosen along the branch.
    A branch is abandoned as soon as its weight drops below ``theta`` or hits
    exactly zero.  Worst case (theta=0, strictly positive kernels) the number
    of live nodes grows as n^depth, hence the ``node_cap`` guard.

    Weights are not renormalized after pruning unless ``renormalize`` is set.
    """
    if not (0.0 <= theta < 1.0):
        raise AugmentError("theta must be in [0, 1)")
    _, col_of, pillows = _topology(data, graph)
    n, d = data.n, data.d

    logm: dict[int, np.ndarray] = {}
    for pil in pillows:
        for p in pil:
            c = col_of[p]
            if c not in logm:
                name = data.columns[c]
                try:
                    entry = plan.entry(name)
                except MissingBandwidth as exc:
                    raise PlanGraphMismatch(str(exc)) from None
                logm[c] = log_factor_matrix(data.values[:, c], entry)

    uniform = np.full(n, 1.0 / n)
    out_tuples: list[tuple[int, ...]] = []
    out_weights: list[float] = []
    live_by_depth = [0] * (d + 1)

    stack = [TreeNode(prefix=(), depth=0, weight=1.0)]
    while stack:
        node = stack.pop()
        t = node.depth
        pil = pillows[t]
        if not pil:
            row = uniform
        else:
            logk = logm[col_of[pil[0]]][node.prefix[pil[0]], :]
            for p in pil[1:]:
                logk = logk + logm[col_of[p]][node.prefix[p], :]
            row = _normalize_log_row(logk)
        child_w = node.weight * row
        keep = np.nonzero((child_w >= theta) & (child_w > 0.0))[0]
        live_by_depth[t + 1] += keep.size
        if live_by_depth[t + 1] > node_cap:
            raise NodeCapExceeded(
                f"more than {node_cap} live nodes at depth {t + 1}; "
                "raise the cap or increase theta"
            )
        if t + 1 == d:
            for i in keep:
                out_tuples.append(node.prefix + (int(i),))
                out_weights.append(float(child_w[i]))
        else:
            for i in keep[::-1]:
                stack.append(
                    TreeNode(
                        prefix=node.prefix + (int(i),),
                        depth=t + 1,
                        weight=float(child_w[i]),
                    )
                )

    m = len(out_weights)
    indices = np.zeros((m, d), dtype=np.int64)
    for t in range(d):
        c = col_of[t]
        for k in range(m):
            indices[k, c] = out_tuples[k][t]
    weights = np.asarray(out_weights, dtype=np.float64)
    if m:
        order = np.lexsort(tuple(indices[:, c] for c in range(d - 1, -1, -1)))
        indices = indices[order]
        weights = weights[order]
    if renormalize and m:
        s = weights.sum()
        if s > 0:
            weights = weights / s
    values = data.values[indices, np.arange(d)] if m else np.zeros((0, d))
    return AugmentedDataset(
        columns=data.columns,
        discrete=data.discrete,
        target=data.target,
        indices=indices,
        weights=weights,
        values=values,
    )


def brute_force_weights(
    data: Dataset, graph: Admg, plan: BandwidthPlan
) -> dict[tuple[int, ...], float]:
    """Weight of every source-row combination by direct product evaluation.

    Enumerates all n^D tuples with no tree and no pruning; each factor is the
    kernel value of the candidate row against the already-chosen conditioning
    values, normalized over all rows (zero when the normalizer is zero).
    Keys are tuples in dataset column order.  Guarded to n^D <= 10^7.
    """
    _, col_of, pillows = _topology(data, graph)
    n, d = data.n, data.d
    if n**d > 10_000_000:
        raise TooLarge(f"n^D = {n**d} combinations exceed the enumeration guard")
    pillow_cols = [[col_of[p] for p in pil] for pil in pillows]
    pillow_names = [[data.columns[c] for c in cols] for cols in pillow_cols]

    result: dict[tuple[int, ...], float] = {}
    for topo in itertools.product(range(n), repeat=d):
        w = 1.0
        for t in range(d):
            cols = pillow_cols[t]
            if not cols:
                w = w * (1.0 / n)
                continue
            query = [float(data.values[topo[p], col_of[p]]) for p in pillows[t]]
            kv = [
                product_kernel_value(
                    plan,
                    pillow_names[t],
                    query,
                    [float(data.values[r, c]) for c in cols],
                )
                for r in range(n)
            ]
            s = sum(kv)
            if s == 0.0:
                w = 0.0
                break
            w = w * (kv[topo[t]] / s)
        key = [0] * d
        for t in range(d):
            key[col_of[t]] = topo[t]
        result[tuple(key)] = w
    return result


def write_augmented_csv(
    aug: AugmentedDataset, path: str, *, include_sources: bool = False
) -> None:
    """Write samples as CSV: original columns, ``__weight``, then optional
    ``__src_<col>`` source-row columns (0-based)."""
    header = list(aug.columns) + ["__weight"]
    if include_sources:
        header += [f"__src_{c}" for c in aug.columns]
    rows = []
    for k in range(len(aug)):
        row = [format_float(v) for v in aug.values[k]]
        row.append("%.17g" % aug.weights[k])
        if include_sources:
            row += [str(int(i)) for i in aug.indices[k]]
        rows.append(row)
    write_csv(path, header, rows)
