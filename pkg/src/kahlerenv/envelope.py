"""Extremal envelope functions and the geometric-mean reduction chain.

For a G_{n,k}-invariant admissible phi, the difference phi - psi can only
decrease when the moduli of each n-tuple are replaced by their geometric
mean (lemma1 stage), then when the tuple means zeta_1..zeta_{k-1} are
replaced by their own geometric mean gamma (lemma2 stage), and finally when
moving to the centre [1, .., 1]. Invariance lets every point be represented
as [1, x_1, .., x_m] with 0 <= x_i <= 1, so all scans run on the moduli cube.

``-inf`` is carried as IEEE ``-inf``; comparisons against it are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .errors import OutOfRange
from .hermitian import ScalarField
from .projective import (Gamma, MPoint, ProjectivePoint, Sigma, TupleShape, apply_word,
                         moduli_point)

STAGE_LABELS = ("input", "lemma1", "lemma2", "lemma3_target")
MONOTONE_TOL = 1e-7


# -- extremal functions --------------------------------------------------------

def _psi(z: np.ndarray, a_m: float) -> np.ndarray:
    sq = np.abs(z) ** 2
    m = sq.shape[-1] - 1
    with np.errstate(divide="ignore"):
        return (a_m / (m + 1)) * np.log(sq).sum(axis=-1) - a_m * np.log(sq.sum(axis=-1))


def psi_field(m: int, a_m: float) -> ScalarField:
    return ScalarField(lambda z: _psi(z, a_m), m, name="psi",
                       domain=lambda z: bool(np.all(z != 0)))


def eval_psi(p: ProjectivePoint, a_m: float) -> float:
    return float(_psi(p.coords, a_m))


def _psi_tilde(z: np.ndarray, a_m: float) -> np.ndarray:
    sq = np.abs(z) ** 2
    with np.errstate(divide="ignore"):
        return a_m * (np.log(sq[..., 0]) - np.log(sq.sum(axis=-1)))


def psi_tilde_field(m: int, a_m: float) -> ScalarField:
    return ScalarField(lambda z: _psi_tilde(z, a_m), m, name="psi_tilde")


def eval_psi_tilde(p: ProjectivePoint, a_m: float) -> float:
    return float(_psi_tilde(p.coords, a_m))


def _psi_M_from_primed(zp: np.ndarray, shape: TupleShape) -> np.ndarray:
    sq = np.abs(zp) ** 2
    n, k = shape.n, shape.k
    norms = sq.reshape(sq.shape[:-1] + (k, n)).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -k * np.log(sq.sum(axis=-1)) + np.log(sq).sum(axis=-1)
        if n > 1:
            val = val - (n - 1) * np.log(norms).sum(axis=-1)
    return np.where(np.any(sq == 0, axis=-1), -np.inf, val)


def psi_M_field(shape: TupleShape) -> ScalarField:
    """psi_M written in base coordinates of P_m (z' = base on M)."""
    return ScalarField(lambda z: _psi_M_from_primed(z, shape), shape.m, name="psi_M")


def primed_coordinates(q: MPoint) -> np.ndarray:
    """z'_i = zeta_h z_i, where Z_h = zeta_h * (factor h)."""
    shape = q.shape
    out = np.empty(shape.m + 1, dtype=np.complex128)
    for h, fac in enumerate(q.factors):
        zh = q.base.tuple(h)
        f = fac.coords
        zeta = np.vdot(f, zh) / np.vdot(f, f)
        out[shape.tuple_slice(h)] = zeta * f
    return out


def eval_psi_M(q: MPoint) -> float:
    return float(_psi_M_from_primed(primed_coordinates(q), q.shape))


def _psi_tilde_M_from_primed(zp: np.ndarray, shape: TupleShape) -> np.ndarray:
    sq = np.abs(zp) ** 2
    n, k = shape.n, shape.k
    norms = sq.reshape(sq.shape[:-1] + (k, n)).sum(axis=-1)
    lead = sq[..., ::n]  # the distinguished z'_0, z'_n, .., z'_{(k-1)n}
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -k * np.log(sq.sum(axis=-1)) + k * np.log(sq[..., 0])
        if n > 1:
            val = val + (n - 1) * (np.log(lead) - np.log(norms)).sum(axis=-1)
    dead = sq[..., 0] == 0
    if n > 1:
        dead = dead | np.any(lead == 0, axis=-1)
    return np.where(dead, -np.inf, val)


def psi_tilde_M_field(shape: TupleShape) -> ScalarField:
    return ScalarField(lambda z: _psi_tilde_M_from_primed(z, shape), shape.m,
                       name="psi_tilde_M")


def eval_psi_tilde_M(q: MPoint) -> float:
    return float(_psi_tilde_M_from_primed(primed_coordinates(q), q.shape))


def psi_max(m: int, a_m: float) -> float:
    """max psi = -a_m ln(m+1), attained on the torus |z_i| = 1."""
    return -a_m * math.log(m + 1)


# -- reductions -------------------------------------------------------------------

def _check_unit_interval(x: np.ndarray, what: str):
    if not np.all((x > 0) & (x <= 1)):
        raise OutOfRange(f"{what} must lie in (0, 1]")


def lemma1_reduce(x, shape: TupleShape) -> np.ndarray:
    """Replace each tuple of moduli by its geometric mean, repeated.

    Tuple 0 has the fixed entry x_0 = 1, so only its n-1 free moduli are
    averaged; for n = 1 it is empty.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (shape.m,):
        raise OutOfRange(f"expected {shape.m} moduli, got shape {x.shape}")
    _check_unit_interval(x, "moduli")
    lemma1, _ = core.reduction_points(x[None, :], shape.n, shape.k)
    return lemma1[0]


def lemma2_reduce(zeta) -> float:
    """Geometric mean gamma of the tuple means zeta_1..zeta_{k-1}."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    if zeta.size == 0:
        raise OutOfRange("need at least one tuple mean")
    _check_unit_interval(zeta, "tuple means")
    return float(np.exp(np.log(zeta).mean()))


@dataclass(frozen=True)
class Stage:
    label: str
    point: ProjectivePoint
    value: float


@dataclass(frozen=True)
class ReductionTrace:
    stages: tuple

    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.stages])

    def is_monotone(self, tol: float = MONOTONE_TOL) -> bool:
        v = self.values()
        return bool(np.all(np.diff(v) <= tol))

    def to_json(self) -> list:
        return [{"label": s.label, "point": s.point.to_json(), "value": s.value}
                for s in self.stages]


def cube_representative(p: ProjectivePoint) -> np.ndarray:
    """Moduli x in [0, 1]^m of a point of the orbit of ``p`` of the form [1, x].

    The largest-modulus coordinate is moved to position 0 by a tuple swap
    and a within-tuple swap; moduli are phase-blind, so tau is not needed.
    """
    shape = p.shape
    j = int(np.argmax(np.abs(p.coords)))
    h = shape.tuple_of(j)
    word = []
    if h != 0:
        word.append(Sigma(0, h))
        j -= h * shape.n
    if j != 0:
        word.append(Gamma(0, j))
    q = apply_word(p, word)
    return np.abs(q.coords[1:] / q.coords[0])


def chain_points(x, shape: TupleShape) -> list[np.ndarray]:
    x = np.asarray(x, dtype=float)
    _check_unit_interval(x, "moduli")
    l1, l2 = core.reduction_points(x[None, :], shape.n, shape.k)
    return [x, l1[0], l2[0], np.ones(shape.m)]


def reduction_chain(f: ScalarField, x, shape: TupleShape, a_m: float) -> ReductionTrace:
    """(phi - psi) at input -> lemma1 point -> lemma2 point -> [1, .., 1]."""
    stages = []
    for label, pt in zip(STAGE_LABELS, chain_points(x, shape)):
        p = moduli_point(pt, shape)
        stages.append(Stage(label, p, float(f(p)) - eval_psi(p, a_m)))
    return ReductionTrace(tuple(stages))


# -- verification -----------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Grid on the moduli cube [delta, 1]^m (log spacing by default)."""

    delta: float = 1e-3
    points_per_axis: int = 41
    log_spacing: bool = True

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("grid floor delta must lie in (0, 1]")
        if self.points_per_axis < 1:
            raise ValueError("points_per_axis must be >= 1")

    def axis(self) -> np.ndarray:
        if self.points_per_axis == 1:
            return np.ones(1)
        if self.log_spacing:
            ax = np.geomspace(self.delta, 1.0, self.points_per_axis)
        else:
            ax = np.linspace(self.delta, 1.0, self.points_per_axis)
        ax[-1] = 1.0
        return ax

    def points(self, m: int) -> np.ndarray:
        ax = self.axis()
        mesh = np.meshgrid(*([ax] * m), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def to_json(self) -> dict:
        return {"delta": self.delta, "points_per_axis": self.points_per_axis,
                "log_spacing": self.log_spacing}


@dataclass
class EnvelopeReport:
    min_gap: float
    argmin: list
    monotone_violations: int
    max_increase: float
    n_points: int
    grid_spec: GridSpec
    shape: TupleShape
    center_gap: float
    tol: float = MONOTONE_TOL
    gaps: np.ndarray | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.min_gap >= -self.tol and self.monotone_violations == 0

    def to_json(self) -> dict:
        return {"min_gap": self.min_gap, "argmin": self.argmin,
                "violations": self.monotone_violations,
                "max_increase": self.max_increase, "n_points": self.n_points,
                "center_gap": self.center_gap,
                "grid_spec": self.grid_spec.to_json(), "shape": self.shape.to_json(),
                "tol": self.tol, "passed": self.passed}


def verify_envelope(f: ScalarField, shape: TupleShape, a_m: float,
                    grid_spec: GridSpec = GridSpec(), tol: float = MONOTONE_TOL,
                    chunk: int = 1 << 15, keep_gaps: bool = False) -> EnvelopeReport:
    """Scan phi - psi over the grid and along each point's reduction chain.

    A monotonicity violation is one chain step whose (phi - psi) value
    increases by more than ``tol``; ``min_gap`` is taken over the grid
    points themselves. Ties for the minimum go to the lowest grid index.
    """
    m = shape.m
    pts = grid_spec.points(m)
    center = np.ones((1, m))
    center_gap = float(f.on_moduli(center)[0] - core.psi_moduli(center, a_m)[0])
    gaps = np.empty(pts.shape[0])
    violations = 0
    max_increase = -np.inf
    for lo in range(0, pts.shape[0], chunk):
        x = pts[lo:lo + chunk]
        l1, l2 = core.reduction_points(x, shape.n, shape.k)
        v0 = f.on_moduli(x) - core.psi_moduli(x, a_m)
        v1 = f.on_moduli(l1) - core.psi_moduli(l1, a_m)
        v2 = f.on_moduli(l2) - core.psi_moduli(l2, a_m)
        v3 = np.full_like(v0, center_gap)
        steps = np.stack([v1 - v0, v2 - v1, v3 - v2])
        violations += int(np.count_nonzero(steps > tol))
        max_increase = max(max_increase, float(steps.max()))
        gaps[lo:lo + chunk] = v0
    i = int(np.argmin(gaps))
    return EnvelopeReport(min_gap=float(gaps[i]), argmin=pts[i].tolist(),
                          monotone_violations=violations, max_increase=max_increase,
                          n_points=int(pts.shape[0]), grid_spec=grid_spec, shape=shape,
                          center_gap=center_gap, tol=tol,
                          gaps=gaps if keep_gaps else None)


def verify_center_bound(f: ScalarField, shape: TupleShape, a_m: float) -> float:
    """(phi - psi)(1, .., 1) = phi(1, .., 1) + a_m ln(m+1)."""
    return float(f(moduli_point(np.ones(shape.m), shape))) - psi_max(shape.m, a_m)
