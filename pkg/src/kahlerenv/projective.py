"""Homogeneous coordinates on P_m(C) with the n-tuple structure m = kn - 1.

Points of P_m are stored through a canonical representative: the vector is
divided by its largest-modulus coordinate, so that coordinate is exactly
``1 + 0j`` and every other entry has modulus at most one.

The symmetry group G_{n,k} is generated by

* ``Sigma(i, j)``  -- swap the n-tuples Z_i and Z_j,
* ``Tau(index, theta)`` -- multiply one homogeneous coordinate by exp(i theta),
* ``Gamma(p, q)`` -- swap two coordinates lying in the same n-tuple.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Union

import numpy as np

from .errors import (AllZero, ChartUndefined, CrossTupleSwap, EvaluationFailed,
                     IncidenceError, InvalidCount, InvalidGenerator, ShapeError,
                     ShapeMismatch, ZeroTuple)

PROJECTIVE_RTOL = 1e-12
MAX_WORD_LENGTH = 8


@dataclass(frozen=True)
class TupleShape:
    """Tuple structure of P_m with m = k*n - 1."""

    n: int
    k: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not isinstance(self.k, (int, np.integer)):
            raise ShapeError(f"n and k must be integers, got {self.n!r}, {self.k!r}")
        if self.n < 1:
            raise ShapeError(f"tuple length n must be >= 1, got {self.n}")
        if self.k < 2:
            raise ShapeError(f"number of tuples k must be >= 2, got {self.k}")
        # exponent identity of the incidence manifold construction
        if Fraction(self.k, self.m + 1) + Fraction(self.n - 1, self.n) != 1:
            raise ShapeError("exponent identity k/(m+1) + (n-1)/n = 1 violated")

    @property
    def m(self) -> int:
        return self.k * self.n - 1

    def tuple_slice(self, h: int) -> slice:
        if not 0 <= h < self.k:
            raise IndexError(f"tuple index {h} out of range for k={self.k}")
        return slice(h * self.n, (h + 1) * self.n)

    def tuple_of(self, index: int) -> int:
        if not 0 <= index <= self.m:
            raise IndexError(f"coordinate index {index} out of range for m={self.m}")
        return index // self.n

    def to_json(self) -> dict:
        return {"n": int(self.n), "k": int(self.k)}

    @classmethod
    def from_json(cls, data: dict) -> "TupleShape":
        return cls(int(data["n"]), int(data["k"]))


def canonical(coords: np.ndarray) -> np.ndarray:
    """Divide by the first largest-modulus coordinate (works on the last axis)."""
    z = np.asarray(coords, dtype=np.complex128)
    idx = np.argmax(np.abs(z), axis=-1)
    pivot = np.take_along_axis(z, idx[..., None], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = z / pivot
    # z / z can leave a rounding-level imaginary part; the pivot is exactly 1
    np.put_along_axis(out, idx[..., None], 1.0 + 0j, axis=-1)
    return out


class ProjectivePoint:
    """A point of P_d(C) stored by its canonical representative.

    ``shape`` is the tuple structure when the ambient space is P_m with
    m = kn - 1; factor points of the incidence manifold carry the shape
    (n=1, k=n) of P_{n-1}, or ``None`` for P_0.
    """

    __slots__ = ("_coords", "shape")

    def __init__(self, coords, shape: TupleShape | None = None):
        z = np.array(coords, dtype=np.complex128).reshape(-1)
        if shape is not None and z.size != shape.m + 1:
            raise ShapeMismatch(f"expected {shape.m + 1} coordinates, got {z.size}")
        if not np.all(np.isfinite(z)):
            raise ValueError("homogeneous coordinates must be finite")
        if not np.any(z != 0):
            raise AllZero("every homogeneous coordinate is zero")
        z = canonical(z)
        z.setflags(write=False)
        self._coords = z
        self.shape = shape

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def dim(self) -> int:
        return self._coords.size - 1

    def tuple(self, h: int) -> np.ndarray:
        return self._coords[self.shape.tuple_slice(h)]

    def moduli(self) -> np.ndarray:
        return np.abs(self._coords)

    def __repr__(self):
        body = ", ".join(f"{c:.6g}" for c in self._coords)
        return f"ProjectivePoint([{body}], shape={self.shape})"

    def to_json(self) -> dict:
        out = {"coords": [[float(c.real), float(c.imag)] for c in self._coords]}
        if self.shape is not None:
            out["shape"] = self.shape.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ProjectivePoint":
        coords = [complex(re, im) for re, im in data["coords"]]
        shape = TupleShape.from_json(data["shape"]) if data.get("shape") else None
        return cls(coords, shape)


@dataclass(frozen=True)
class ChartPoint:
    """Affine coordinates z_lambda / z_chart (lambda != chart) of a point."""

    chart_index: int
    affine: np.ndarray
    shape: TupleShape | None = None

    def __post_init__(self):
        a = np.array(self.affine, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("affine coordinates must be finite")
        if not 0 <= self.chart_index <= a.size:
            raise ValueError(f"chart index {self.chart_index} out of range")
        if self.shape is not None and a.size != self.shape.m:
            raise ShapeMismatch(f"expected {self.shape.m} affine coordinates, got {a.size}")
        a.setflags(write=False)
        object.__setattr__(self, "affine", a)

    @property
    def dim(self) -> int:
        return self.affine.size

    def homogeneous(self) -> np.ndarray:
        """Representative with the chart coordinate set to 1."""
        return np.insert(self.affine, self.chart_index, 1.0 + 0j)

    def to_point(self) -> ProjectivePoint:
        return ProjectivePoint(self.homogeneous(), self.shape)


def make_point(coords, shape: TupleShape) -> ProjectivePoint:
    return ProjectivePoint(coords, shape)


def moduli_point(x, shape: TupleShape) -> ProjectivePoint:
    """The point [1, x_1, .., x_m] of the real moduli cube."""
    x = np.asarray(x, dtype=float)
    return ProjectivePoint(np.concatenate(([1.0], x)), shape)


def to_chart(p: ProjectivePoint, chart_index: int) -> ChartPoint:
    z = p.coords
    if not 0 <= chart_index < z.size:
        raise ValueError(f"chart index {chart_index} out of range")
    if z[chart_index] == 0:
        raise ChartUndefined(f"coordinate z_{chart_index} vanishes")
    affine = np.delete(z, chart_index) / z[chart_index]
    return ChartPoint(chart_index, affine, p.shape)


def projectively_equal(p: ProjectivePoint, q: ProjectivePoint,
                       rtol: float = PROJECTIVE_RTOL) -> bool:
    """Compare canonical representatives up to a global phase."""
    a, b = p.coords, q.coords
    if a.shape != b.shape:
        return False
    j = int(np.argmax(np.abs(b)))
    if a[j] == 0:
        return False
    # align a to b's pivot; both pivots have unit modulus up to rounding
    aligned = a / a[j] * b[j]
    return bool(np.max(np.abs(aligned - b)) <= rtol * max(1.0, np.max(np.abs(b))))


# --------------------------------------------------------------------------
# group generators


@dataclass(frozen=True)
class Sigma:
    i: int
    j: int

    def validate(self, shape: TupleShape):
        if not (0 <= self.i < shape.k and 0 <= self.j < shape.k):
            raise InvalidGenerator(f"sigma({self.i},{self.j}) needs tuple indices < {shape.k}")
        if self.i == self.j:
            raise InvalidGenerator("sigma needs two distinct tuples")

    def act(self, z: np.ndarray, shape: TupleShape) -> np.ndarray:
        out = np.array(z, dtype=np.complex128, copy=True)
        si, sj = shape.tuple_slice(self.i), shape.tuple_slice(self.j)
        out[..., si], out[..., sj] = z[..., sj], z[..., si]
        return out


@dataclass(frozen=True)
class Tau:
    index: int
    theta: float

    def validate(self, shape: TupleShape):
        if not 0 <= self.index <= shape.m:
            raise InvalidGenerator(f"tau index {self.index} out of range for m={shape.m}")

    def act(self, z: np.ndarray, shape: TupleShape) -> np.ndarray:
        out = np.array(z, dtype=np.complex128, copy=True)
        out[..., self.index] *= np.exp(1j * self.theta)
        return out


@dataclass(frozen=True)
class Gamma:
    p: int
    q: int

    def validate(self, shape: TupleShape):
        if not (0 <= self.p <= shape.m and 0 <= self.q <= shape.m):
            raise InvalidGenerator(f"gamma({self.p},{self.q}) out of range for m={shape.m}")
        if self.p == self.q:
            raise InvalidGenerator("gamma needs two distinct coordinates")
        if shape.tuple_of(self.p) != shape.tuple_of(self.q):
            raise CrossTupleSwap(
                f"z_{self.p} and z_{self.q} lie in different {shape.n}-tuples")

    def act(self, z: np.ndarray, shape: TupleShape) -> np.ndarray:
        out = np.array(z, dtype=np.complex128, copy=True)
        out[..., self.p], out[..., self.q] = z[..., self.q], z[..., self.p]
        return out


Generator = Union[Sigma, Tau, Gamma]


def apply_generator(p: ProjectivePoint, gen: Generator) -> ProjectivePoint:
    if p.shape is None:
        raise ShapeMismatch("group action needs a point with a tuple shape")
    gen.validate(p.shape)
    return ProjectivePoint(gen.act(p.coords, p.shape), p.shape)


def apply_word(p: ProjectivePoint, word: Iterable[Generator]) -> ProjectivePoint:
    z = p.coords
    for gen in word:
        gen.validate(p.shape)
        z = gen.act(z, p.shape)
    return ProjectivePoint(z, p.shape)


def random_generator(shape: TupleShape, rng: np.random.Generator) -> Generator:
    kinds = ["sigma", "tau"] + (["gamma"] if shape.n >= 2 else [])
    kind = kinds[rng.integers(len(kinds))]
    if kind == "sigma":
        i, j = rng.choice(shape.k, size=2, replace=False)
        return Sigma(int(i), int(j))
    if kind == "tau":
        return Tau(int(rng.integers(shape.m + 1)), float(rng.uniform(0.0, 2 * math.pi)))
    h = int(rng.integers(shape.k))
    p, q = rng.choice(shape.n, size=2, replace=False)
    return Gamma(h * shape.n + int(p), h * shape.n + int(q))


def random_word(shape: TupleShape, rng: np.random.Generator,
                max_length: int = MAX_WORD_LENGTH) -> list[Generator]:
    length = int(rng.integers(1, max_length + 1))
    return [random_generator(shape, rng) for _ in range(length)]


def orbit_sample(p: ProjectivePoint, count: int, seed: int) -> list[ProjectivePoint]:
    """Images of ``p`` under ``count`` random generator words (length <= 8)."""
    if count < 1:
        raise InvalidCount(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    return [apply_word(p, random_word(p.shape, rng)) for _ in range(count)]


def _deviation(a: float, b: float) -> float:
    if a == b:  # covers equal infinities exactly
        return 0.0
    return abs(a - b)


def check_invariance(f: Callable[[ProjectivePoint], float], p: ProjectivePoint,
                     count: int, seed: int, tol: float | None = None) -> float:
    """Largest |f(q) - f(p)| over an orbit sample of ``p``.

    ``tol`` is accepted for interface symmetry; the comparison is left to
    the caller.
    """
    try:
        ref = float(f(p))
        values = [float(f(q)) for q in orbit_sample(p, count, seed)]
    except (InvalidCount, InvalidGenerator):
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with context
        raise EvaluationFailed(f"field evaluation failed: {exc}") from exc
    return max(_deviation(v, ref) for v in values)


# --------------------------------------------------------------------------
# incidence manifold M in P_m x (P_{n-1})^k


def factor_shape(shape: TupleShape) -> TupleShape | None:
    """Shape of the factor P_{n-1}: n singleton tuples (trivial for n = 1)."""
    return TupleShape(1, shape.n) if shape.n >= 2 else None


def incidence_defect(tuple_coords: np.ndarray, factor: ProjectivePoint) -> float:
    """Relative distance of Z_h from the complex line spanned by the factor."""
    z = np.asarray(tuple_coords, dtype=np.complex128)
    nz = np.linalg.norm(z)
    if nz == 0:
        return 0.0
    f = factor.coords
    proj = np.vdot(f, z) / np.vdot(f, f) * f
    return float(np.linalg.norm(z - proj) / nz)


@dataclass(frozen=True)
class MPoint:
    """Point (base, factors) of the incidence manifold M."""

    base: ProjectivePoint
    factors: tuple
    incidence_tol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        shape = self.base.shape
        if shape is None:
            raise ShapeMismatch("base point needs a tuple shape")
        factors = tuple(self.factors)
        if len(factors) != shape.k:
            raise ShapeMismatch(f"expected {shape.k} factors, got {len(factors)}")
        for h, fac in enumerate(factors):
            if fac.coords.size != shape.n:
                raise ShapeMismatch(f"factor {h} must live on P_{shape.n - 1}")
            defect = incidence_defect(self.base.tuple(h), fac)
            if defect > self.incidence_tol:
                raise IncidenceError(f"tuple {h} not proportional to factor (defect {defect:.3g})")
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self) -> TupleShape:
        return self.base.shape

    def to_json(self) -> dict:
        return {"base": self.base.to_json(),
                "factors": [f.to_json() for f in self.factors]}

    @classmethod
    def from_json(cls, data: dict) -> "MPoint":
        return cls(ProjectivePoint.from_json(data["base"]),
                   tuple(ProjectivePoint.from_json(f) for f in data["factors"]))


def lift_to_M(p: ProjectivePoint) -> MPoint:
    shape = p.shape
    if shape is None:
        raise ShapeMismatch("lifting needs a tuple shape")
    fshape = factor_shape(shape)
    factors = []
    for h in range(shape.k):
        zh = p.tuple(h)
        if not np.any(zh != 0):
            raise ZeroTuple(f"tuple Z_{h} vanishes; the fiber over this point is not unique")
        factors.append(ProjectivePoint(zh, fshape))
    return MPoint(p, tuple(factors))


def apply_generator_M(q: MPoint, gen: Generator) -> MPoint:
    """Act on M through the base point and re-lift."""
    return lift_to_M(apply_generator(q.base, gen))


def random_chart_points(shape: TupleShape, count: int, seed: int,
                        rmin: float = 0.5, rmax: float = 2.0) -> list[ChartPoint]:
    """Chart-0 points with log-uniform moduli in [rmin, rmax] and uniform phases."""
    rng = np.random.default_rng(seed)
    m = shape.m
    r = np.exp(rng.uniform(math.log(rmin), math.log(rmax), size=(count, m)))
    theta = rng.uniform(0.0, 2 * math.pi, size=(count, m))
    w = r * np.exp(1j * theta)
    return [ChartPoint(0, row, shape) for row in w]

