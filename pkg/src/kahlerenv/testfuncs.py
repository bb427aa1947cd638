"""Smooth G_{n,k}-invariant test functions, calibrated to be admissible and
normalised to sup = 0.

Families (r = |z| / max|z|, N_h = squared norm of tuple h):

``power_ratio(d)``
    F = ln(sum r_i^(2d)) - d ln(sum r_i^2)
``tuple_norm_mix(weights)``
    F = sum_j w_j [ln(sum_h N_h^(j+2)) - (j+2) ln(sum_h N_h)]
``weighted_power_ratio(d, weights)``
    F = ln(sum c_i r_i^(2d)) - d ln(sum r_i^2); not invariant unless all
    c_i agree -- a negative control for the invariance checks.

Each F is homogeneous of degree zero and smooth on all of P_m; the field is
phi = epsilon * F.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidSpec, NeverAdmissible
from .geometry import MetricSpec
from .hermitian import ScalarField, complex_hessian
from .projective import ChartPoint, TupleShape

FAMILIES = ("power_ratio", "tuple_norm_mix", "weighted_power_ratio")
CALIBRATION_MARGIN = 0.05


@dataclass(frozen=True)
class TestFunctionSpec:
    __test__ = False  # not a pytest class

    family: str
    epsilon: float
    shape: TupleShape
    a_m: float
    degree: int = 2
    weights: tuple = ()

    def to_json(self) -> dict:
        return {"family": self.family, "epsilon": self.epsilon, "degree": self.degree,
                "weights": list(self.weights), "shape": self.shape.to_json(),
                "a_m": self.a_m}


def _unit_moduli_sq(z: np.ndarray) -> np.ndarray:
    r = np.abs(z)
    top = r.max(axis=-1, keepdims=True)
    return (r / top) ** 2


def _power_ratio(z, d, coeffs=None):
    s = _unit_moduli_sq(z)
    top = s ** d if coeffs is None else coeffs * s ** d
    return np.log(top.sum(axis=-1)) - d * np.log(s.sum(axis=-1))


def _tuple_norm_mix(z, shape: TupleShape, weights):
    s = _unit_moduli_sq(z)
    norms = s.reshape(s.shape[:-1] + (shape.k, shape.n)).sum(axis=-1)
    total = np.log(norms.sum(axis=-1))
    out = np.zeros(s.shape[:-1])
    for j, w in enumerate(weights):
        p = j + 2
        out = out + w * (np.log((norms ** p).sum(axis=-1)) - p * total)
    return out


def _base_function(spec: TestFunctionSpec):
    if spec.family == "power_ratio":
        d = spec.degree
        return lambda z: _power_ratio(z, d)
    if spec.family == "tuple_norm_mix":
        shape, weights = spec.shape, tuple(spec.weights) or (1.0,)
        return lambda z: _tuple_norm_mix(z, shape, weights)
    coeffs = np.asarray(spec.weights, dtype=float)
    d = spec.degree
    return lambda z: _power_ratio(z, d, coeffs)


def _validate(spec: TestFunctionSpec):
    if spec.family not in FAMILIES:
        raise InvalidSpec(f"unknown family {spec.family!r}; expected one of {FAMILIES}")
    if not np.isfinite(spec.epsilon) or spec.epsilon < 0:
        raise InvalidSpec("epsilon must be a finite non-negative scale")
    if spec.family in ("power_ratio", "weighted_power_ratio") and spec.degree < 1:
        raise InvalidSpec("degree must be >= 1")
    if spec.family == "weighted_power_ratio":
        w = np.asarray(spec.weights, dtype=float)
        if w.size != spec.shape.m + 1 or np.any(w <= 0):
            raise InvalidSpec("weighted_power_ratio needs m+1 positive weights")


def make_test_function(spec: TestFunctionSpec) -> ScalarField:
    _validate(spec)
    base = _base_function(spec)
    eps = float(spec.epsilon)
    name = f"{spec.family}(d={spec.degree})" if spec.family != "tuple_norm_mix" \
        else f"tuple_norm_mix(w={list(spec.weights) or [1.0]})"
    if eps == 0:
        fn = lambda z: np.zeros(np.shape(z)[:-1])  # noqa: E731
    else:
        fn = lambda z: eps * base(z)  # noqa: E731
    return ScalarField(fn, spec.shape.m, name=f"{eps:g}*{name}",
                       meta={"spec": spec.to_json()})


# -- calibration -------------------------------------------------------------

@dataclass(frozen=True)
class CubeGrid:
    """Linear grid on the closed moduli cube [0, 1]^m (vertices included)."""

    points_per_axis: int = 6
    refine: bool = True

    def points(self, m: int) -> np.ndarray:
        ax = np.linspace(0.0, 1.0, self.points_per_axis)
        mesh = np.meshgrid(*([ax] * m), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def to_json(self) -> dict:
        return {"points_per_axis": self.points_per_axis, "refine": self.refine}


def _calibration_data(field: ScalarField, metric: MetricSpec, grid: CubeGrid):
    pts = grid.points(field.dim)
    gs, hs = [], []
    for x in pts:
        p = ChartPoint(0, x.astype(complex), metric.shape)
        gs.append(metric.at(p).entries)
        hs.append(complex_hessian(field, p).entries)
    return np.array(gs), np.array(hs)


def calibrate_admissible(field: ScalarField, metric: MetricSpec,
                         grid_spec: CubeGrid = CubeGrid(), *,
                         margin: float = CALIBRATION_MARGIN, upper: Optional[float] = None,
                         iterations: int = 40) -> float:
    """Largest epsilon on a bisection lattice of [0, upper] such that
    lambda_min(g + epsilon * ddbar(field)) >= margin * lambda_min(g) at every
    grid point. The admissible set in epsilon is an interval containing 0,
    so bisection is exact up to the lattice.
    """
    G, H = _calibration_data(field, metric, grid_spec)
    lam_g = np.linalg.eigvalsh(G)[:, 0]
    if np.any(lam_g <= 0):
        raise NeverAdmissible("the metric itself is not positive definite on the grid")
    upper = 2.0 * (metric.shape.m + 1) if upper is None else float(upper)

    def passes(eps):
        lam = np.linalg.eigvalsh(G + eps * H)[:, 0]
        return bool(np.all(lam >= margin * lam_g))

    if passes(upper):
        return upper
    lo, hi = 0.0, upper
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo


def normalize_sup(field: ScalarField, grid_spec: CubeGrid = CubeGrid(11)) -> ScalarField:
    """Subtract the estimated supremum.

    The scan runs over the moduli cube (a complete set of orbit
    representatives for invariant fields), then polishes the best few grid
    points with bounded L-BFGS-B. ``meta`` records the estimate, its argmax
    and the size of the last refinement step as an error indicator.
    """
    m = field.dim
    pts = grid_spec.points(m)
    vals = field.on_moduli(pts)
    order = np.argsort(-vals, kind="stable")
    best_x, best = pts[order[0]], float(vals[order[0]])
    grid_best = best
    if grid_spec.refine:
        obj = lambda x: -float(field.on_moduli(x[None, :])[0])  # noqa: E731
        for i in order[:3]:
            res = minimize(obj, pts[i], method="L-BFGS-B", bounds=[(0.0, 1.0)] * m,
                           options={"ftol": 1e-15, "gtol": 1e-12})
            if -res.fun > best:
                best, best_x = -float(res.fun), np.asarray(res.x)
    meta = dict(field.meta)
    meta.update(sup_estimate=best, sup_argmax=[float(v) for v in best_x],
                sup_grid_max=grid_best, sup_error_estimate=best - grid_best,
                sup_grid=grid_spec.to_json())
    out = field.shifted(-best, name=f"{field.name}-sup")
    out.meta = meta
    return out


@dataclass
class CalibratedFunction:
    spec: TestFunctionSpec
    field: ScalarField
    epsilon_max: float
    info: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "epsilon_max": self.epsilon_max,
                "sup_estimate": self.field.meta.get("sup_estimate"),
                "sup_argmax": self.field.meta.get("sup_argmax"),
                "sup_error_estimate": self.field.meta.get("sup_error_estimate")}


def calibrated_test_function(spec: TestFunctionSpec, *,
                             calibration_grid: CubeGrid = CubeGrid(),
                             sup_grid: CubeGrid = CubeGrid(11),
                             metric: Optional[MetricSpec] = None,
                             calibrate: bool = True) -> CalibratedFunction:
    """Generate, scale to the largest calibrated epsilon, and sup-normalise.

    With ``calibrate=False`` the spec's own epsilon is kept.
    """
    metric = metric or MetricSpec.fubini_study(spec.shape, spec.a_m)
    eps_max = float("nan")
    if calibrate:
        unit = make_test_function(replace(spec, epsilon=1.0))
        eps_max = calibrate_admissible(unit, metric, calibration_grid)
        spec = replace(spec, epsilon=eps_max)
    phi = normalize_sup(make_test_function(spec), sup_grid)
    return CalibratedFunction(spec, phi, eps_max)


def default_specs(shape: TupleShape, a_m: float) -> list[TestFunctionSpec]:
    """The three standard families used by the verification campaigns."""
    return [TestFunctionSpec("power_ratio", 1.0, shape, a_m, degree=2),
            TestFunctionSpec("power_ratio", 1.0, shape, a_m, degree=3),
            TestFunctionSpec("tuple_norm_mix", 1.0, shape, a_m, weights=(1.0, 0.5))]
