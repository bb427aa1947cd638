"""Kähler potentials and metrics in the chart z_0 = 1.

Fubini-Study on P_m (scaled by a_m), and the restriction g^M of the product
metric k*FS + (n-1)*FS + ... + (n-1)*FS to the incidence manifold M, whose
potential in the chart of P_m reads

    k ln(1 + |z|^2) + (n-1) sum_h ln(|Z_h|^2),    Z_0 = (1, z_1, .., z_{n-1}).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroTuple
from .hermitian import (PD_TOL, HermitianForm, ScalarField, complex_hessian,
                        is_positive_definite)
from .projective import ChartPoint, TupleShape


def chern_scale(m: int) -> float:
    """The FS scale a_m = m + 1 placing g in the first Chern class."""
    return float(m + 1)


@dataclass(frozen=True)
class MetricSpec:
    kind: str
    shape: TupleShape
    a_m: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fubini_study", "product_m"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "fubini_study" and not self.a_m > 0:
            raise ValueError("Fubini-Study scale a_m must be positive")

    @classmethod
    def fubini_study(cls, shape: TupleShape, a_m: float | None = None) -> "MetricSpec":
        return cls("fubini_study", shape, chern_scale(shape.m) if a_m is None else float(a_m))

    @classmethod
    def product_m(cls, shape: TupleShape) -> "MetricSpec":
        return cls("product_m", shape)

    @property
    def in_first_chern_class(self) -> bool:
        # the product weights (k, n-1, .., n-1) are the Chern-class choice by construction
        return self.kind == "product_m" or self.a_m == self.shape.m + 1

    def at(self, p: ChartPoint) -> HermitianForm:
        if self.kind == "fubini_study":
            return fs_metric(p, self.a_m)
        return gM_metric(p)

    def potential_field(self) -> ScalarField:
        if self.kind == "fubini_study":
            return fs_potential_field(self.shape.m, self.a_m)
        return gM_potential_field(self.shape)


# -- Fubini-Study -----------------------------------------------------------

def _fs_potential(w: np.ndarray, a_m: float) -> np.ndarray:
    return a_m * np.log1p(np.sum(np.abs(w) ** 2, axis=-1))


def fs_potential_field(m: int, a_m: float) -> ScalarField:
    return ScalarField(lambda w: _fs_potential(w, a_m), m, homogeneous=False,
                       name=f"fs_potential(a={a_m:g})")


def fs_potential(p: ChartPoint, a_m: float) -> float:
    return float(_fs_potential(p.affine, a_m))


def fs_metric(p: ChartPoint, a_m: float) -> HermitianForm:
    """a_m [delta / S - conj(z_l) z_m / S^2] with S = 1 + |z|^2."""
    w = p.affine
    S = 1.0 + float(np.sum(np.abs(w) ** 2))
    g = a_m * (np.eye(w.size) / S - np.outer(w.conj(), w) / S ** 2)
    return HermitianForm(g)


def fs_volume_density(p: ChartPoint, m: int | None = None) -> float:
    """Chart density 1 / (1 + |z|^2)^(m+1), wedge constants dropped."""
    w = p.affine
    m = w.size if m is None else m
    return float((1.0 + np.sum(np.abs(w) ** 2)) ** (-(m + 1)))


def admissibility(f: ScalarField, p: ChartPoint, metric: MetricSpec,
                  tol: float = PD_TOL, step: float | None = None) -> bool:
    """Whether g + dd^c f is positive definite at ``p``."""
    return is_positive_definite(metric.at(p) + complex_hessian(f, p, step), tol)


# -- incidence manifold M -----------------------------------------------------

def _tuple_norms(w: np.ndarray, shape: TupleShape) -> tuple[np.ndarray, np.ndarray]:
    """(1 + |z|^2, per-tuple squared norms) with z_0 = 1; leading axes kept."""
    sq = np.abs(w) ** 2
    ones = np.ones(sq.shape[:-1] + (1,))
    full = np.concatenate([ones, sq], axis=-1)
    norms = full.reshape(full.shape[:-1] + (shape.k, shape.n)).sum(axis=-1)
    return full.sum(axis=-1), norms


def _check_tuples(norms: np.ndarray):
    zero = np.nonzero(np.atleast_2d(norms)[:, 1:] == 0)
    if zero[0].size:
        raise ZeroTuple(f"tuple Z_{int(zero[1][0]) + 1} vanishes in the chart z_0 = 1")


def _gM_potential(w: np.ndarray, shape: TupleShape) -> np.ndarray:
    S, norms = _tuple_norms(w, shape)
    out = shape.k * np.log(S)
    if shape.n > 1:
        out = out + (shape.n - 1) * np.log(norms).sum(axis=-1)
    return out


def gM_potential_field(shape: TupleShape) -> ScalarField:
    def domain(z):
        return bool(np.all(np.abs(z).reshape(shape.k, shape.n).sum(axis=-1) > 0))

    return ScalarField(lambda w: _gM_potential(w, shape), shape.m, homogeneous=False,
                       domain=domain, name="gM_potential")


def gM_potential(p: ChartPoint) -> float:
    _, norms = _tuple_norms(p.affine, p.shape)
    _check_tuples(norms)
    return float(_gM_potential(p.affine, p.shape))


def gM_metric(p: ChartPoint, step: float | None = None,
              richardson: bool = False) -> HermitianForm:
    """Numerical complex Hessian of the g^M potential."""
    _, norms = _tuple_norms(p.affine, p.shape)
    _check_tuples(norms)
    return complex_hessian(gM_potential_field(p.shape), p, step, richardson)


def gM_det_formula(p: ChartPoint) -> float:
    """Closed-form det g^M in the chart z_0 = 1:

        k^(k-1) prod_h [(n-1) S + k N_h]^(n-1) / (S^(m+1) prod_h N_h^(n-1))

    with S = 1 + |z|^2 and N_h the squared norm of tuple h.
    """
    shape = p.shape
    n, k, m = shape.n, shape.k, shape.m
    S, norms = _tuple_norms(p.affine, shape)
    _check_tuples(norms)
    S = float(S)
    log_det = (k - 1) * np.log(k) - (m + 1) * np.log(S)
    if n > 1:
        log_det += (n - 1) * float(np.sum(np.log((n - 1) * S + k * norms) - np.log(norms)))
    return float(np.exp(log_det))
