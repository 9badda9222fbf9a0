"""Pairwise similarity between cell time series: Pearson correlation and
histogram mutual information."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_bins, check_series_pair, check_series_matrix
from .grid import as_series_array, constant_series_mask

MEASURES = ("PC", "MI")
NORMALIZATIONS = ("none", "max_entropy")


class DegenerateSeriesWarning(RuntimeWarning):
    """A constant series was involved; its similarity is reported as 0."""


def sturges_bins(n_times: int) -> int:
    """Sturges' rule, ``ceil(log2(T)) + 1``."""
    return int(math.ceil(math.log2(n_times))) + 1


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length series.

    Returns 0.0 (and emits :class:`DegenerateSeriesWarning`) when either
    series has zero variance.
    """
    x, y = check_series_pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        warnings.warn("constant series, correlation set to 0", DegenerateSeriesWarning,
                      stacklevel=2)
        return 0.0
    r = np.dot(dx, dy) / (math.sqrt(sxx) * math.sqrt(syy))
    return float(min(1.0, max(-1.0, r)))


def bin_indices(x, bins: int) -> np.ndarray:
    """Equal-width bin index of every sample over ``[min(x), max(x)]``.

    Uses the same edge convention as :func:`numpy.histogram`: bins are
    half-open except the last, which includes ``max(x)``.
    """
    x = np.asarray(x, dtype=float)
    edges = np.linspace(x.min(), x.max(), bins + 1)
    idx = np.searchsorted(edges, x, side="right") - 1
    idx[x == edges[-1]] = bins - 1
    return idx


def _mi_from_counts(joint, n):
    cx = joint.sum(axis=1)
    cy = joint.sum(axis=0)
    nz = joint > 0
    c = joint[nz]
    outer = np.outer(cx, cy)[nz]
    return float(np.sum(c / n * np.log2(c * n / outer)))


def mutual_information(x, y, bins: int | None = None,
                       normalization: str = "max_entropy") -> float:
    """Plug-in mutual information (bits) from an equal-width 2-D histogram.

    Parameters
    ----------
    x, y : array-like
        Equal-length series, at least 2 samples.
    bins : int, optional
        Bins per axis. Defaults to Sturges' rule on the series length.
    normalization : {"max_entropy", "none"}
        ``"max_entropy"`` divides by ``log2(bins)`` so the result is in [0, 1].

    Returns
    -------
    float
        0.0 for a constant series, with a :class:`DegenerateSeriesWarning`.
    """
    x, y = check_series_pair(x, y)
    if bins is None:
        bins = sturges_bins(x.size)
    check_bins(bins)
    _check_normalization(normalization)
    if x.min() == x.max() or y.min() == y.max():
        warnings.warn("constant series, mutual information set to 0",
                      DegenerateSeriesWarning, stacklevel=2)
        return 0.0
    ix = bin_indices(x, bins)
    iy = bin_indices(y, bins)
    joint = np.bincount(ix * bins + iy, minlength=bins * bins).reshape(bins, bins)
    mi = max(_mi_from_counts(joint.astype(float), x.size), 0.0)
    if normalization == "max_entropy":
        mi /= math.log2(bins)
    return mi


def _check_normalization(normalization):
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


def _check_measure(measure):
    measure = str(measure).upper()
    if measure not in MEASURES:
        raise ValueError(f"measure must be one of {MEASURES}")
    return measure


@dataclass(eq=False)
class SimilarityMatrix:
    """Symmetric node-by-node similarity weights with a zero diagonal."""

    values: np.ndarray
    measure: str
    mi_bins: int | None = None
    mi_normalization: str | None = None
    n_times: int | None = None
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.measure = _check_measure(self.measure)
        if self.degenerate is None:
            self.degenerate = np.zeros(self.n, dtype=bool)
        self.degenerate = np.asarray(self.degenerate, dtype=bool)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def upper_pairs(self):
        """Row/column indices and weights of all pairs i < j."""
        i, j = np.triu_indices(self.n, k=1)
        return i, j, self.values[i, j]

    def metadata(self) -> dict:
        meta = {"measure": self.measure, "n": self.n, "n_times": self.n_times,
                "degenerate": np.flatnonzero(self.degenerate).tolist()}
        if self.measure == "MI":
            meta["bins"] = self.mi_bins
            meta["normalization"] = self.mi_normalization
        return meta


def _symmetrize(values):
    upper = np.triu(values, k=1)
    return upper + upper.T


def _pearson_block(a, b):
    za = a - a.mean(axis=1, keepdims=True)
    zb = b - b.mean(axis=1, keepdims=True)
    na = np.sqrt(np.einsum("ij,ij->i", za, za))
    nb = np.sqrt(np.einsum("ij,ij->i", zb, zb))
    with np.errstate(invalid="ignore", divide="ignore"):
        za = za / na[:, None]
        zb = zb / nb[:, None]
    out = za @ zb.T
    out[~np.isfinite(out)] = 0.0
    out[na == 0, :] = 0.0
    out[:, nb == 0] = 0.0
    return np.clip(out, -1.0, 1.0)


def _one_hot(values, bins):
    n, t = values.shape
    onehot = np.zeros((t, n * bins))
    for i in range(n):
        if values[i].min() == values[i].max():
            continue
        onehot[np.arange(t), i * bins + bin_indices(values[i], bins)] = 1.0
    return onehot


def _mi_block(onehot_a, onehot_b, bins, n_times, block=32):
    na = onehot_a.shape[1] // bins
    nb = onehot_b.shape[1] // bins
    cb = onehot_b.sum(axis=0).reshape(nb, bins)
    ca = onehot_a.sum(axis=0).reshape(na, bins)
    out = np.zeros((na, nb))
    for start in range(0, na, block):
        stop = min(na, start + block)
        joint = onehot_a[:, start * bins:stop * bins].T @ onehot_b
        joint = joint.reshape(stop - start, bins, nb, bins)
        outer = ca[start:stop, :, None, None] * cb[None, None, :, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = joint / n_times * np.log2(joint * n_times / outer)
        terms[joint == 0] = 0.0
        out[start:stop] = terms.sum(axis=(1, 3))
    return np.maximum(out, 0.0)


def cross_similarity(a, b, measure="PC", mi_bins=None, mi_normalization="max_entropy"):
    """Similarity between every row of ``a`` and every row of ``b``.

    Rows are series of equal length; the result has shape
    ``(len(a), len(b))`` and no diagonal handling.
    """
    measure = _check_measure(measure)
    a = check_series_matrix(a)
    b = check_series_matrix(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError("series lengths differ")
    if measure == "PC":
        return _pearson_block(a, b)
    bins = sturges_bins(a.shape[1]) if mi_bins is None else mi_bins
    check_bins(bins)
    _check_normalization(mi_normalization)
    out = _mi_block(_one_hot(a, bins), _one_hot(b, bins), bins, a.shape[1])
    if mi_normalization == "max_entropy":
        out /= math.log2(bins)
    return out


def similarity_matrix(grid, measure: str = "PC", mi_bins: int | None = None,
                      mi_normalization: str = "max_entropy") -> SimilarityMatrix:
    """All-pairs similarity for a :class:`GridSeries` or an (n, T) array.

    Pairs involving a constant series get weight 0 and the series is listed
    in ``degenerate``. The diagonal is fixed at 0.
    """
    measure = _check_measure(measure)
    values = check_series_matrix(as_series_array(grid))
    n, t = values.shape
    degenerate = constant_series_mask(values)
    if degenerate.any():
        warnings.warn(f"constant series at rows {np.flatnonzero(degenerate).tolist()}; "
                      "their similarities are set to 0", DegenerateSeriesWarning, stacklevel=2)
    if measure == "PC":
        raw = _pearson_block(values, values)
        bins = norm = None
    else:
        bins = sturges_bins(t) if mi_bins is None else mi_bins
        check_bins(bins)
        _check_normalization(mi_normalization)
        norm = mi_normalization
        raw = cross_similarity(values, values, "MI", bins, norm)
    raw[degenerate, :] = 0.0
    raw[:, degenerate] = 0.0
    return SimilarityMatrix(_symmetrize(raw), measure, bins, norm, t, degenerate)


def write_similarity(sim: SimilarityMatrix, path) -> tuple[Path, Path]:
    """Write ``i,j,weight`` rows for i < j plus a JSON sidecar."""
    path = Path(path)
    i, j, w = sim.upper_pairs()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["i", "j", "weight"])
        for a, b, c in zip(i.tolist(), j.tolist(), w.tolist()):
            out.writerow([a, b, repr(c)])
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(sim.metadata(), indent=2, sort_keys=True) + "\n",
                       encoding="utf-8")
    return path, sidecar


def read_similarity(path) -> SimilarityMatrix:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    n = int(meta["n"])
    values = np.zeros((n, n))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader) != ["i", "j", "weight"]:
            raise ValueError(f"{path}: header must be i,j,weight")
        for row in reader:
            a, b, w = int(row[0]), int(row[1]), float(row[2])
            values[a, b] = values[b, a] = w
    degenerate = np.zeros(n, dtype=bool)
    degenerate[meta.get("degenerate", [])] = True
    return SimilarityMatrix(values, meta["measure"], meta.get("bins"),
                            meta.get("normalization"), meta.get("n_times"), degenerate)
