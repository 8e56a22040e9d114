"""Extension-operator evaluation on the torus, Gauss sums, oscillatory integrals.

F_a(alpha, theta) = sum_n a(n) e(alpha R(n) + theta . n),   e(x) = exp(2 pi i x),

evaluated either directly (fixed lexicographic order, pairwise summation) or
on equispaced product grids via zero-padded FFTs, one alpha slice at a time.
The complete-sum machinery (Gauss sums S(a,b;q), the scaled oscillatory
integral I(beta, gamma; N), and the Poisson major-arc approximant) lives here
as well.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from math import ceil, gcd
from typing import Iterator, Sequence, Union

import numpy as np

from .bump import bump
from .quadform import QuadraticForm
from .sequences import CoefficientSequence, SmoothWeight

__all__ = [
    "TorusGrid",
    "GridField",
    "extension_direct",
    "smoothed_sum_direct",
    "grid_evaluate",
    "iter_field_chunks",
    "gauss_sum",
    "gauss_sum_table",
    "OscillatoryIntegral",
    "oscillatory_integral",
    "MajorArcApprox",
    "major_arc_approx",
]

TWO_PI = 2.0 * np.pi

Source = Union[CoefficientSequence, SmoothWeight]


@functools.lru_cache(maxsize=64)
def _r_grid(form: QuadraticForm, radius: int) -> np.ndarray:
    out = form.values_on_grid(radius)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=16)
def _weight_sequence(weight: SmoothWeight) -> CoefficientSequence:
    return weight.as_sequence()


def _as_sequence(source: Source) -> CoefficientSequence:
    if isinstance(source, SmoothWeight):
        return _weight_sequence(source)
    return source


def _source_metadata(form: QuadraticForm, source: Source) -> dict:
    seq = _as_sequence(source)
    n_param = source.N if isinstance(source, SmoothWeight) else seq.radius
    return {
        "kind": "weight" if isinstance(source, SmoothWeight) else "sequence",
        "dim": seq.dim,
        "radius": seq.radius,
        "N": n_param,
        "l2_norm": seq.l2_norm,
        "form": form.matrix,
        "label": seq.label,
    }


@dataclass(frozen=True)
class TorusGrid:
    """Equispaced product grid on T^{dim+1}: alpha then dim theta axes."""

    dim: int
    m_alpha: int
    m_theta: int
    offset: tuple[float, ...]

    def __post_init__(self):
        if self.dim < 1 or self.m_alpha < 1 or self.m_theta < 1:
            raise ValueError("grid dimensions must be positive")
        off = tuple(float(x) for x in self.offset)
        if len(off) != self.dim + 1:
            raise ValueError(
                f"offset needs {self.dim + 1} entries, got {len(off)}"
            )
        if any(not 0.0 <= x < 1.0 for x in off):
            raise ValueError("offsets must lie in [0, 1)")
        object.__setattr__(self, "offset", off)

    @classmethod
    def centered(cls, dim: int, m_alpha: int, m_theta: int) -> "TorusGrid":
        off = (0.5 / m_alpha,) + (0.5 / m_theta,) * dim
        return cls(dim, m_alpha, m_theta, off)

    @classmethod
    def random_offset(
        cls, dim: int, m_alpha: int, m_theta: int, rng: np.random.Generator
    ) -> "TorusGrid":
        off = tuple(float(x) for x in rng.random(dim + 1))
        return cls(dim, m_alpha, m_theta, off)

    def alphas(self) -> np.ndarray:
        return self.offset[0] + np.arange(self.m_alpha) / self.m_alpha

    def theta_values(self, axis: int) -> np.ndarray:
        return self.offset[1 + axis] + np.arange(self.m_theta) / self.m_theta

    @property
    def cell_measure(self) -> float:
        return 1.0 / (self.m_alpha * self.m_theta**self.dim)

    @property
    def total_cells(self) -> int:
        return self.m_alpha * self.m_theta**self.dim


@dataclass
class GridField:
    """Materialized field values over a TorusGrid plus provenance metadata."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)
    metadata: dict

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())


def extension_direct(
    form: QuadraticForm, source: Source, alpha: float, theta: Sequence[float]
) -> complex:
    """Direct summation of F(alpha, theta).

    Terms are laid out in lexicographic n order and reduced by numpy's
    pairwise summation, so results are bit-reproducible across runs.
    """
    seq = _as_sequence(source)
    th = np.asarray(theta, dtype=float)
    if th.shape != (seq.dim,):
        raise ValueError(f"theta must have length {seq.dim}")
    R = _r_grid(form, seq.radius).astype(float)
    phase = float(alpha) * R
    for i, grid_i in enumerate(seq.coordinate_grids()):
        if th[i] != 0.0:
            phase = phase + th[i] * grid_i
    terms = seq.values * np.exp(2j * np.pi * phase)
    return complex(np.sum(terms))


def smoothed_sum_direct(
    form: QuadraticForm, weight: SmoothWeight, alpha: float, theta: Sequence[float]
) -> complex:
    """F(alpha, theta) with the smooth weight omega(n) = eta(n/N) as coefficients."""
    return extension_direct(form, weight, alpha, theta)


def iter_field_chunks(
    form: QuadraticForm,
    source: Source,
    grid: TorusGrid,
    chunk: int | None = None,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (alpha start index, values[start:start+k]) over all alpha slices.

    Each slice is the theta-DFT of the alpha-twisted coefficients, computed by
    embedding a(n) e(alpha R(n) + offset . n) at indices n mod m_theta and
    applying a zero-padded inverse FFT (sign convention e(+theta . n)).
    """
    seq = _as_sequence(source)
    d, r, m = seq.dim, seq.radius, grid.m_theta
    if grid.dim != d:
        raise ValueError("grid dim does not match the sequence dim")
    if m < 2 * r + 1:
        raise ValueError(
            f"grid too coarse: m_theta={m} is below the support width "
            f"{2 * r + 1} of the sequence (frequencies would alias)"
        )
    coords = np.arange(-r, r + 1)
    grids = np.meshgrid(*([coords] * d), indexing="ij")
    flat_idx = np.ravel_multi_index(
        tuple((g % m).ravel() for g in grids), (m,) * d
    )
    theta_off_phase = np.zeros(grids[0].shape)
    for i in range(d):
        theta_off_phase = theta_off_phase + grid.offset[1 + i] * grids[i]
    base = (seq.values * np.exp(2j * np.pi * theta_off_phase)).ravel()
    R_flat = _r_grid(form, r).astype(float).ravel()

    if chunk is None:
        chunk = max(1, int(2**21 // max(m**d, 1)))
    alphas = grid.alphas()
    scale = float(m**d)
    for start in range(0, grid.m_alpha, chunk):
        a_chunk = alphas[start : start + chunk]
        twisted = np.exp(2j * np.pi * np.outer(a_chunk, R_flat)) * base
        buf = np.zeros((len(a_chunk), m**d), dtype=np.complex128)
        buf[:, flat_idx] = twisted
        buf = buf.reshape((len(a_chunk),) + (m,) * d)
        vals = np.fft.ifftn(buf, axes=tuple(range(1, d + 1))) * scale
        yield start, vals


def grid_evaluate(
    form: QuadraticForm,
    source: Source,
    grid: TorusGrid,
    max_cells: int = 2**25,
) -> GridField:
    """Materialize F on the full grid (use iter_field_chunks beyond max_cells)."""
    if grid.total_cells > max_cells:
        raise ValueError(
            f"grid has {grid.total_cells} cells > max_cells={max_cells}; "
            "stream with iter_field_chunks instead"
        )
    seq = _as_sequence(source)
    out = np.empty((grid.m_alpha,) + (grid.m_theta,) * seq.dim, dtype=np.complex128)
    for start, vals in iter_field_chunks(form, source, grid):
        out[start : start + vals.shape[0]] = vals
    return GridField(grid, out, _source_metadata(form, source))


# ---------------------------------------------------------------------------
# complete sums and the continuous factor


def _residue_r_mod(form: QuadraticForm, q: int) -> np.ndarray:
    """R(u) mod q on u in [0,q)^d as int64."""
    d = form.dim
    coords = np.arange(q, dtype=np.int64)
    grids = np.meshgrid(*([coords] * d), indexing="ij")
    out = np.zeros_like(grids[0])
    for i in range(d):
        for j in range(d):
            mij = form.matrix[i][j]
            if mij:
                out += (mij % q) * grids[i] * grids[j]
    return out % q


def gauss_sum(
    form: QuadraticForm, a: int, b: Sequence[int], q: int, max_terms: int = 2**22
) -> complex:
    """Complete sum S(a,b;q) = sum_{u in (Z/q)^d} e((a R(u) + b . u)/q).

    Phases are reduced mod q exactly and looked up in a length-q root table,
    so the only rounding is in the final pairwise summation.
    """
    d = form.dim
    bv = [int(x) for x in b]
    if len(bv) != d:
        raise ValueError(f"b must have length {d}")
    if q < 1:
        raise ValueError("q must be >= 1")
    if gcd(a, q) != 1:
        raise ValueError(f"need gcd(a, q) = 1, got a={a}, q={q}")
    if q**d > max_terms:
        raise ValueError(f"q^d = {q**d} exceeds max_terms={max_terms}")
    phases = (int(a) % q) * _residue_r_mod(form, q)
    coords = np.arange(q, dtype=np.int64)
    grids = np.meshgrid(*([coords] * d), indexing="ij")
    for i in range(d):
        if bv[i] % q:
            phases = phases + (bv[i] % q) * grids[i]
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    return complex(np.sum(roots[phases % q]))


def gauss_sum_table(
    form: QuadraticForm, a: int, q: int, max_terms: int = 2**22
) -> np.ndarray:
    """S(a, b; q) for every residue b, shape (q,)*d, via a length-q DFT.

    The table is the inverse FFT of e_q(a R(u)) scaled by q^d, exploiting
    S(a, b; q) = sum_u e_q(a R(u)) e_q(b . u).
    """
    d = form.dim
    if q < 1:
        raise ValueError("q must be >= 1")
    if gcd(a, q) != 1:
        raise ValueError(f"need gcd(a, q) = 1, got a={a}, q={q}")
    if q**d > max_terms:
        raise ValueError(f"q^d = {q**d} exceeds max_terms={max_terms}")
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    x = roots[(int(a) % q) * _residue_r_mod(form, q) % q]
    return np.fft.ifftn(x) * float(q**d)


def _composite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule of `order` per piece on [-2,-1], [-1,1], [1,2]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for lo, hi in ((-2.0, -1.0), (-1.0, 1.0), (1.0, 2.0)):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        xs.append(mid + half * nodes)
        ws.append(half * weights)
    return np.concatenate(xs), np.concatenate(ws)


@functools.lru_cache(maxsize=64)
def _cached_composite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _composite_rule(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _axis_orders(
    form: QuadraticForm,
    beta: float,
    gamma_bound: Sequence[float],
    N: int,
    quad_order: int,
) -> list[int]:
    """Per-axis node counts from the phase bandwidth.

    On [-2,2]^d the phase beta N^2 R(x) + N gamma . x has per-axis frequency
    at most nu_i = |beta| N^2 * 4 sum_j |M_ij| + N |gamma_i| cycles per unit.
    """
    orders = []
    for i in range(form.dim):
        row = sum(abs(v) for v in form.matrix[i])
        nu = abs(beta) * N * N * 4.0 * row + N * abs(gamma_bound[i])
        n = max(quad_order, int(32 * ceil((4.5 * nu + 24.0) / 32)))
        orders.append(n)
    return orders


def _integral_batch(
    form: QuadraticForm,
    beta: float,
    gammas: np.ndarray,
    N: int,
    orders: Sequence[int],
    max_nodes: int = 2**24,
) -> np.ndarray:
    """I(beta, gamma; N) = int eta(x) e(beta N^2 R(x) + N gamma . x) dx for a
    (K, d) batch of gamma vectors; diagonal forms factor into 1-d rules."""
    d = form.dim
    gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
    if form.is_diagonal():
        out = np.ones(len(gammas), dtype=np.complex128)
        for i in range(d):
            x, w = _cached_composite_rule(orders[i])
            ci = form.matrix[i][i]
            f = w * bump(x) * np.exp(2j * np.pi * beta * N * N * ci * x * x)
            phases = np.exp(2j * np.pi * N * np.outer(gammas[:, i], x))
            out *= phases @ f
        return out
    rules = [_cached_composite_rule(o) for o in orders]
    total = 1
    for x, _ in rules:
        total *= len(x)
    if total > max_nodes:
        raise ValueError(
            f"tensor quadrature grid of {total} nodes exceeds {max_nodes}"
        )
    grids = np.meshgrid(*[x for x, _ in rules], indexing="ij")
    wgrid = functools.reduce(
        np.multiply.outer, [w for _, w in rules]
    )
    eta = np.ones_like(grids[0])
    for g in grids:
        eta = eta * bump(g)
    R = np.zeros_like(grids[0])
    for i in range(d):
        for j in range(d):
            mij = form.matrix[i][j]
            if mij:
                R = R + mij * grids[i] * grids[j]
    core = (wgrid * eta * np.exp(2j * np.pi * beta * N * N * R)).ravel()
    X = np.stack([g.ravel() for g in grids], axis=1)
    out = np.empty(len(gammas), dtype=np.complex128)
    step = max(1, int(2**24 // max(len(core), 1)))
    for k0 in range(0, len(gammas), step):
        gk = gammas[k0 : k0 + step]
        out[k0 : k0 + step] = np.exp(2j * np.pi * N * (gk @ X.T)) @ core
    return out


@dataclass(frozen=True)
class OscillatoryIntegral:
    value: complex
    error_estimate: float
    orders: tuple[int, ...]


def oscillatory_integral(
    form: QuadraticForm,
    beta: float,
    gamma: Sequence[float],
    N: int,
    quad_order: int = 8,
) -> OscillatoryIntegral:
    """Tensor Gauss-Legendre value of I(beta, gamma; N) with an a-posteriori
    error estimate (difference against the half-order rule)."""
    if quad_order < 8:
        raise ValueError("quad_order must be >= 8")
    g = np.asarray(gamma, dtype=float)
    if g.shape != (form.dim,):
        raise ValueError(f"gamma must have length {form.dim}")
    orders = _axis_orders(form, beta, np.abs(g), N, quad_order)
    full = _integral_batch(form, beta, g[None, :], N, orders)[0]
    halves = [max(8, o // 2) for o in orders]
    half = _integral_batch(form, beta, g[None, :], N, halves)[0]
    return OscillatoryIntegral(complex(full), abs(full - half), tuple(orders))


@dataclass(frozen=True)
class MajorArcApprox:
    value: complex
    outer_shell: float
    m_cut: int
    terms: int


def major_arc_approx(
    form: QuadraticForm,
    weight: SmoothWeight,
    a: int,
    q: int,
    beta: float,
    theta: Sequence[float],
    m_cut: int = 3,
    quad_order: int = 8,
) -> MajorArcApprox:
    """Poisson-summation approximant to the smoothed sum at alpha = a/q + beta:

        F ~ sum_b q^{-d} S(a,b;q) sum_{|m|_inf <= m_cut} N^d I(beta, theta - b/q - m; N).

    Returns the truncated value together with the total magnitude of the
    outermost shell |m|_inf = m_cut, a heuristic for the truncation error.
    """
    d, N = weight.dim, weight.N
    th = np.asarray(theta, dtype=float)
    if th.shape != (d,):
        raise ValueError(f"theta must have length {d}")
    if m_cut < 1:
        raise ValueError("m_cut must be >= 1")
    table = gauss_sum_table(form, a, q)

    b_axes = [np.arange(q)] * d
    m_axes = [np.arange(-m_cut, m_cut + 1)] * d
    b_grid = np.stack(
        [g.ravel() for g in np.meshgrid(*b_axes, indexing="ij")], axis=1
    )
    m_grid = np.stack(
        [g.ravel() for g in np.meshgrid(*m_axes, indexing="ij")], axis=1
    )
    # gamma(b, m) = theta - b/q - m, all combinations flattened
    gammas = (
        th[None, None, :] - b_grid[:, None, :] / q - m_grid[None, :, :]
    ).reshape(-1, d)
    gamma_bound = np.abs(th) + 1.0 + m_cut
    orders = _axis_orders(form, beta, gamma_bound, N, quad_order)
    ivals = _integral_batch(form, beta, gammas, N, orders).reshape(
        len(b_grid), len(m_grid)
    )
    s_flat = table.ravel() / float(q**d)  # table is already b-indexed, C order
    contrib = s_flat[:, None] * ivals * float(N) ** d
    outer = np.abs(m_grid).max(axis=1) == m_cut
    shell = float(np.abs(contrib[:, outer].sum()))
    value = complex(contrib.sum())
    return MajorArcApprox(value, shell, m_cut, contrib.size)
