"""Coefficient sequences on integer boxes and the smooth counting weight.

A CoefficientSequence holds complex values a(n) for n in [-radius, radius]^d.
A SmoothWeight is the sequence omega(n) = eta(n/N) with eta the tensor power
of the shared smooth cutoff: omega = 1 on [-N,N]^d, supported in (-2N, 2N)^d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .bump import bump

__all__ = [
    "CoefficientSequence",
    "SmoothWeight",
    "ones_sequence",
    "delta_sequence",
    "diagonal_extremizer",
    "random_unit_sequence",
    "make_sequence",
    "save_sequence",
    "load_sequence",
]


@dataclass(frozen=True)
class CoefficientSequence:
    dim: int
    radius: int
    values: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        if self.dim < 1 or self.radius < 0:
            raise ValueError("dim must be >= 1 and radius >= 0")
        shape = (2 * self.radius + 1,) * self.dim
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.shape != shape:
            raise ValueError(f"values shape {arr.shape} != expected {shape}")
        v = np.ascontiguousarray(arr)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.values.ravel()))

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum())

    def normalized(self) -> "CoefficientSequence":
        nrm = self.l2_norm
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero sequence")
        return CoefficientSequence(
            self.dim, self.radius, self.values / nrm, self.label
        )

    def coordinate_grids(self) -> list[np.ndarray]:
        coords = np.arange(-self.radius, self.radius + 1)
        return np.meshgrid(*([coords] * self.dim), indexing="ij")

    def __getitem__(self, n: Sequence[int]) -> complex:
        idx = tuple(int(x) + self.radius for x in n)
        return complex(self.values[idx])


@dataclass(frozen=True)
class SmoothWeight:
    """omega(n) = prod_i eta1(n_i / N); support radius 2N-1."""

    dim: int
    N: int

    def __post_init__(self):
        if self.dim < 1 or self.N < 1:
            raise ValueError("dim and N must be positive")

    @property
    def radius(self) -> int:
        return 2 * self.N - 1

    def profile(self) -> np.ndarray:
        """1-d weight values eta1(n/N) for n in [-(2N-1), 2N-1]."""
        n = np.arange(-self.radius, self.radius + 1)
        return bump(n / self.N)

    def as_sequence(self) -> CoefficientSequence:
        p = self.profile()
        vals = p
        for _ in range(self.dim - 1):
            vals = np.multiply.outer(vals, p)
        return CoefficientSequence(self.dim, self.radius, vals, label="weight")


def _box_values(dim: int, radius: int) -> np.ndarray:
    return np.zeros((2 * radius + 1,) * dim, dtype=np.complex128)


def ones_sequence(dim: int, radius: int) -> CoefficientSequence:
    vals = np.ones((2 * radius + 1,) * dim, dtype=np.complex128)
    return CoefficientSequence(dim, radius, vals, label="ones")


def delta_sequence(dim: int, radius: int) -> CoefficientSequence:
    vals = _box_values(dim, radius)
    vals[(radius,) * dim] = 1.0
    return CoefficientSequence(dim, radius, vals, label="delta")


def diagonal_extremizer(dim: int, radius: int, s: int) -> CoefficientSequence:
    """Indicator of the paired diagonal: a(n) = 1 when n_i = n_{s+i} in [1, radius]
    for i <= s and all remaining coordinates vanish.

    Concentrates the mass on the null directions of a split form shaped like
    sum_{i<=s} x_i^2 - x_{s+i}^2, where it is sup-extremal.
    """
    if not 1 <= s <= dim // 2:
        raise ValueError(f"need 1 <= s <= dim/2, got s={s}, dim={dim}")
    if radius < 1:
        raise ValueError("radius must be >= 1 for the extremizer")
    vals = _box_values(dim, radius)
    for n in range(1, radius + 1):
        idx = [radius] * dim
        for i in range(s):
            idx[i] = n + radius
            idx[s + i] = n + radius
        vals[tuple(idx)] = 1.0
    return CoefficientSequence(dim, radius, vals, label=f"extremizer(s={s})")


def random_unit_sequence(dim: int, radius: int, seed: int) -> CoefficientSequence:
    """Complex Gaussian coefficients normalized to l2 norm 1, reproducible."""
    rng = np.random.default_rng(seed)
    shape = (2 * radius + 1,) * dim
    vals = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    vals /= np.linalg.norm(vals.ravel())
    return CoefficientSequence(dim, radius, vals, label=f"random-unit({seed})")


def make_sequence(
    family: str, dim: int, radius: int, *, s: int = 1, seed: int = 0
) -> CoefficientSequence:
    """Build a named family: ones | delta | extremizer | random-unit."""
    if family == "ones":
        return ones_sequence(dim, radius)
    if family == "delta":
        return delta_sequence(dim, radius)
    if family == "extremizer":
        return diagonal_extremizer(dim, radius, s)
    if family == "random-unit":
        return random_unit_sequence(dim, radius, seed)
    raise ValueError(
        f"unknown sequence family {family!r} "
        "(expected ones, delta, extremizer or random-unit)"
    )


def save_sequence(seq: CoefficientSequence, fh: TextIO) -> None:
    """Text format: header 'dim radius', then one 're im' pair per line in
    row-major (C) order over [-radius, radius]^dim."""
    fh.write(f"{seq.dim} {seq.radius}\n")
    for v in seq.values.ravel(order="C"):
        fh.write(f"{v.real:.17g} {v.imag:.17g}\n")


def load_sequence(fh: TextIO) -> CoefficientSequence:
    head = fh.readline().split()
    if len(head) != 2:
        raise ValueError("sequence file: first line must be 'dim radius'")
    dim, radius = int(head[0]), int(head[1])
    count = (2 * radius + 1) ** dim
    flat = np.empty(count, dtype=np.complex128)
    for k in range(count):
        parts = fh.readline().split()
        if len(parts) != 2:
            raise ValueError(f"sequence file: line {k + 2}: expected 're im'")
        flat[k] = float(parts[0]) + 1j * float(parts[1])
    return CoefficientSequence(
        dim, radius, flat.reshape((2 * radius + 1,) * dim), label="file"
    )
