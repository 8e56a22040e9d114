"""Moments, truncated moments and level sets of |F| over the torus.

Two routes to the p-th moment: an exact counting oracle for even p (the
p/2-fold self-convolution of the coefficients, bucketed by the frequency key
(sum R(n_i), sum n_i)), and equal-weight quadrature over a TorusGrid, which is
itself exact once the grid outruns the trigonometric degree of |F|^p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .quadform import QuadraticForm, frequency_bound
from .expsum import TorusGrid, GridField, iter_field_chunks, _as_sequence, _source_metadata
from .sequences import CoefficientSequence

__all__ = [
    "RepresentationCount",
    "MomentReport",
    "even_moment_exact",
    "representation_count",
    "nyquist_sizes",
    "nyquist_grid",
    "nyquist_sufficient",
    "grid_moment",
    "truncated_moment",
    "level_set_measure",
    "level_set_profile",
    "layer_cake_moment",
    "FieldScan",
    "scan_field",
    "build_report",
    "report_csv_header",
    "report_csv_row",
]


# ---------------------------------------------------------------------------
# exact even moments

def _support(form: QuadraticForm, seq: CoefficientSequence):
    """Nonzero coefficients with their 0-based box coordinates and R values."""
    vals = seq.values.ravel()
    nz = np.flatnonzero(vals)
    coords = np.unravel_index(nz, seq.values.shape)
    r_vals = form.values_on_grid(seq.radius).ravel()[nz]
    return vals[nz], coords, r_vals


def even_moment_exact(
    form: QuadraticForm, source, p: int, max_entries: int = 2**26
) -> float:
    """int |F|^p for even p by exact key counting.

    Folding the coefficient array p/2 times against itself builds the bucket
    weights W(sum R(n_i), sum n_i) = sum over p/2-tuples of prod a(n_i); the
    moment is sum |W|^2. Additions happen in a fixed support order, so the
    result is reproducible, and exact whenever the weights are (e.g. 0/1).
    """
    if p < 2 or p % 2 != 0:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    seq = _as_sequence(source)
    k = p // 2
    a_nz, coords, r_nz = _support(form, seq)
    if a_nz.size == 0:
        return 0.0
    rmin, rmax = int(r_nz.min()), int(r_nz.max())
    span_r = rmax - rmin
    width = 2 * seq.radius  # per-axis coordinate range of one point
    final_shape = (k * span_r + 1,) + (k * width + 1,) * seq.dim
    total = int(np.prod([np.int64(s) for s in final_shape]))
    if total > max_entries:
        raise ValueError(
            f"even-moment key table needs {total} entries, over the budget "
            f"{max_entries}; use the grid method (grid_moment / scan_field)"
        )
    dr = (r_nz - rmin).astype(np.int64)
    w = np.ones((1,) * (seq.dim + 1), dtype=np.complex128)
    for level in range(k):
        out_shape = ((level + 1) * span_r + 1,) + ((level + 1) * width + 1,) * seq.dim
        out = np.zeros(out_shape, dtype=np.complex128)
        for t in range(a_nz.size):
            sl = (slice(dr[t], dr[t] + w.shape[0]),) + tuple(
                slice(int(coords[i][t]), int(coords[i][t]) + w.shape[1 + i])
                for i in range(seq.dim)
            )
            out[sl] += a_nz[t] * w
        w = out
    return float(np.sum(np.abs(w) ** 2))


@dataclass(frozen=True)
class RepresentationCount:
    """Number of solution pairs of p/2-fold frequency collisions on supp(a)."""

    p_half: int
    count: int
    weighted: bool


def representation_count(form: QuadraticForm, source, p: int) -> RepresentationCount:
    """Exact count of pairs of p/2-tuples from supp(a) with equal keys.

    For 0/1 coefficients this is the even moment itself; otherwise the count
    refers to the support indicator and `weighted` is set.
    """
    seq = _as_sequence(source)
    vals = seq.values.ravel()
    nz = vals[vals != 0]
    weighted = bool(np.any(nz != 1.0))
    indicator = CoefficientSequence(
        seq.dim, seq.radius, (seq.values != 0).astype(np.complex128)
    )
    moment = even_moment_exact(form, indicator, p)
    count = int(round(moment))
    if abs(moment - count) > 1e-6 * max(1.0, abs(moment)):
        raise ArithmeticError(
            f"count {moment!r} is not near an integer; budget the key table"
        )
    return RepresentationCount(p // 2, count, weighted)


# ---------------------------------------------------------------------------
# grid quadrature

def nyquist_sizes(form: QuadraticForm, N: int, p: int) -> tuple[int, int]:
    """Smallest (m_alpha, m_theta) that integrate |F|^p exactly: the grid must
    strictly outrun the degrees p*R_max and 2pN."""
    if p < 2 or p % 2 != 0:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    return p * frequency_bound(form, N) + 1, 2 * p * N + 1


def nyquist_grid(form: QuadraticForm, N: int, dim: int, p: int) -> TorusGrid:
    m_alpha, m_theta = nyquist_sizes(form, N, p)
    return TorusGrid(dim, m_alpha, m_theta, (0.0,) * (dim + 1))


def nyquist_sufficient(grid: TorusGrid, form: QuadraticForm, N: int, p) -> bool:
    """Whether equal-weight quadrature on `grid` is provably exact for |F|^p."""
    if p != int(p) or int(p) % 2 != 0:
        return False
    m_alpha, m_theta = nyquist_sizes(form, N, int(p))
    return grid.m_alpha >= m_alpha and grid.m_theta >= m_theta


def _pow(mag: np.ndarray, p) -> np.ndarray:
    if p == int(p) and int(p) % 2 == 0:
        return (mag * mag) ** (int(p) // 2)
    return mag**p


def grid_moment(field: GridField, p) -> float:
    """Cell-measure-weighted sum of |F|^p (total measure 1)."""
    mag = field.magnitudes().ravel()
    return float(np.sum(_pow(mag, p))) * field.grid.cell_measure


def truncated_moment(field: GridField, p, C: float, norm_a: float) -> float:
    """Moment restricted to cells with |F| >= C * N^{d/4} * norm_a."""
    if C <= 0:
        raise ValueError("C must be positive (use grid_moment for C = 0)")
    d = field.metadata["dim"]
    N = field.metadata["N"]
    thr = C * float(N) ** (d / 4.0) * norm_a
    mag = field.magnitudes().ravel()
    kept = mag[mag >= thr]
    return float(np.sum(_pow(kept, p))) * field.grid.cell_measure


def level_set_measure(field: GridField, lam: float) -> float:
    """Fraction of grid cells with |F| >= lam (measure of E_lam)."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    mag = field.magnitudes().ravel()
    return float(np.count_nonzero(mag >= lam)) / mag.size


def level_set_profile(
    field: GridField, lambdas: Sequence[float]
) -> list[tuple[float, float]]:
    """(lambda, |E_lambda|) pairs in one sorted pass; lambdas must ascend."""
    lams = np.asarray(lambdas, dtype=float)
    if lams.ndim != 1 or lams.size == 0:
        raise ValueError("lambdas must be a non-empty 1-d list")
    if np.any(np.diff(lams) < 0):
        raise ValueError("lambdas must be sorted ascending")
    srt = np.sort(field.magnitudes().ravel())
    below = np.searchsorted(srt, lams, side="left")
    meas = (srt.size - below) / srt.size
    return [(float(l), float(m)) for l, m in zip(lams, meas)]


def layer_cake_moment(field: GridField, p, n_levels: int = 2048) -> float:
    """Riemann sum p * sum lam^{p-1} |E_lam| dlam over [0, sup|F|].

    Discretizes the layer-cake identity int |F|^p = p int lam^{p-1}|E_lam| dlam;
    agreement with grid_moment is a consistency check, not an exact identity.
    """
    if n_levels < 2:
        raise ValueError("n_levels must be >= 2")
    srt = np.sort(field.magnitudes().ravel())
    sup = float(srt[-1])
    if sup == 0.0:
        return 0.0
    lams = np.linspace(0.0, sup, n_levels + 1)[:-1]
    dlam = sup / n_levels
    meas = (srt.size - np.searchsorted(srt, lams, side="left")) / srt.size
    return float(np.sum(p * lams ** (p - 1) * meas) * dlam)


# ---------------------------------------------------------------------------
# streaming scan (grids too large to materialize)

@dataclass
class FieldScan:
    """Accumulated statistics from one pass over a grid field."""

    grid: TorusGrid
    metadata: dict
    sup: float
    moments: dict
    truncated: dict
    levels: list[tuple[float, float]] = field(default_factory=list)


def scan_field(
    form: QuadraticForm,
    source,
    grid: TorusGrid,
    p_values: Sequence[float] = (2.0,),
    thresholds: Sequence[tuple[float, float]] = (),
    lambdas: Sequence[float] = (),
) -> FieldScan:
    """Single streaming pass accumulating moments, threshold-restricted moments
    ((p, absolute threshold) pairs), level-set counts and the sup norm.

    Chunking is deterministic, so accumulation order and results are
    reproducible run to run.
    """
    p_values = tuple(p_values)
    thresholds = tuple((float(p), float(t)) for p, t in thresholds)
    lams = np.asarray(sorted(float(l) for l in lambdas), dtype=float)
    sums = {p: 0.0 for p in p_values}
    trunc = {key: 0.0 for key in thresholds}
    counts = np.zeros(lams.size, dtype=np.int64)
    sup = 0.0
    for _, vals in iter_field_chunks(form, source, grid):
        mag = np.abs(vals).ravel()
        if mag.size == 0:
            continue
        sup = max(sup, float(mag.max()))
        for p in p_values:
            sums[p] += float(np.sum(_pow(mag, p)))
        for p, thr in thresholds:
            kept = mag[mag >= thr]
            if kept.size:
                trunc[(p, thr)] += float(np.sum(_pow(kept, p)))
        if lams.size:
            bins = np.searchsorted(lams, mag, side="right")
            hist = np.bincount(bins, minlength=lams.size + 1)
            counts += hist[::-1].cumsum()[::-1][1:]
    meas = counts / grid.total_cells
    return FieldScan(
        grid=grid,
        metadata=_source_metadata(form, source),
        sup=sup,
        moments={p: sums[p] * grid.cell_measure for p in p_values},
        truncated={key: trunc[key] * grid.cell_measure for key in thresholds},
        levels=[(float(l), float(m)) for l, m in zip(lams, meas)],
    )


# ---------------------------------------------------------------------------
# reports

@dataclass
class MomentReport:
    """One (form, sequence, grid, p, C) measurement with provenance."""

    form_matrix: tuple
    dim: int
    N: int
    p: float
    C: float
    threshold: float
    norm_a: float
    full_moment: float
    truncated_moment: float
    sup: float
    levels: list[tuple[float, float]]
    grid_info: dict
    exact: bool
    spread: float | None = None
    oracle_full: float | None = None
    grid_full: float | None = None

    def json_dict(self) -> dict:
        return {
            "form": [list(r) for r in self.form_matrix],
            "N": self.N,
            "p": self.p,
            "C": self.C,
            "grid": self.grid_info,
            "full": self.full_moment,
            "truncated": self.truncated_moment,
            "levels": [[l, m] for l, m in self.levels],
            "exact": self.exact,
        }

    def to_json(self) -> str:
        return json.dumps(self.json_dict(), sort_keys=True)


def _grid_info(grid: TorusGrid, extra: dict | None = None) -> dict:
    info = {
        "m_alpha": grid.m_alpha,
        "m_theta": grid.m_theta,
        "offset": list(grid.offset),
        "cells": grid.total_cells,
    }
    if extra:
        info.update(extra)
    return info


def build_report(
    form: QuadraticForm,
    source,
    grid: TorusGrid,
    p: float,
    C: float = 1.0,
    lambdas: Sequence[float] | None = None,
    with_oracle: bool = False,
    oracle_budget: int = 2**26,
) -> MomentReport:
    """Scan the field once and assemble a MomentReport.

    With `with_oracle`, even p also runs the exact counting oracle (budget
    permitting) and records it; the full moment then reports the exact value.
    """
    seq = _as_sequence(source)
    meta = _source_metadata(form, source)
    N = meta["N"]
    norm_a = seq.l2_norm
    threshold = C * float(N) ** (seq.dim / 4.0) * norm_a
    if lambdas is None:
        bound = (2 * seq.radius + 1) ** (seq.dim / 2.0) * norm_a
        lambdas = np.linspace(0.0, bound, 17)
    scan = scan_field(
        form, source, grid,
        p_values=(p,),
        thresholds=((p, threshold),),
        lambdas=lambdas,
    )
    exact = nyquist_sufficient(grid, form, N, p)
    grid_full = scan.moments[p]
    full = grid_full
    oracle_val = None
    if with_oracle and p == int(p) and int(p) % 2 == 0:
        try:
            oracle_val = even_moment_exact(form, source, int(p), oracle_budget)
            full = oracle_val
        except ValueError:
            oracle_val = None
    return MomentReport(
        form_matrix=form.matrix,
        dim=seq.dim,
        N=N,
        p=p,
        C=C,
        threshold=threshold,
        norm_a=norm_a,
        full_moment=full,
        truncated_moment=scan.truncated[(p, threshold)],
        sup=scan.sup,
        levels=scan.levels,
        grid_info=_grid_info(grid),
        exact=exact,
        oracle_full=oracle_val,
        grid_full=grid_full,
    )


_CSV_FIELDS = [
    "N", "p", "C", "threshold", "full", "truncated", "sup",
    "norm_a", "exact", "m_alpha", "m_theta", "spread", "oracle",
]


def report_csv_header() -> str:
    return ",".join(_CSV_FIELDS)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def report_csv_row(report: MomentReport) -> str:
    vals = [
        report.N, report.p, report.C, report.threshold,
        report.full_moment, report.truncated_moment, report.sup,
        report.norm_a, report.exact,
        report.grid_info.get("m_alpha"), report.grid_info.get("m_theta"),
        report.spread, report.oracle_full,
    ]
    return ",".join(_fmt(v) for v in vals)
