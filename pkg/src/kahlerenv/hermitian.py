"""Scalar fields on P_m, complex Hessians by finite differences, and
positive-definiteness tests for Hermitian forms."""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import EvaluationFailed, NonFiniteSample, NotHermitian
from .projective import ChartPoint, MPoint, ProjectivePoint

HERMITIAN_TOL = 1e-10
PD_TOL = 1e-8


class ScalarField:
    """An extended-real function on P_m.

    ``fn`` is vectorised over leading axes. A *homogeneous* field receives
    homogeneous coordinates of shape ``(..., m+1)`` and must be of degree
    zero; a *chart* field receives affine coordinates ``(..., m)`` of chart
    ``chart_index``. Values may be ``-inf``.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], dim: int, *,
                 homogeneous: bool = True, chart_index: int = 0,
                 domain: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 name: str = "field", meta: Optional[dict] = None):
        self.fn = fn
        self.dim = int(dim)
        self.homogeneous = homogeneous
        self.chart_index = chart_index
        self.domain = domain
        self.name = name
        self.meta = dict(meta or {})

    def __repr__(self):
        kind = "homogeneous" if self.homogeneous else f"chart {self.chart_index}"
        return f"ScalarField({self.name!r}, m={self.dim}, {kind})"

    # -- vectorised evaluation ------------------------------------------------
    def on_homogeneous(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        if self.homogeneous:
            return self._call(z)
        pivot = z[..., self.chart_index]
        if np.any(pivot == 0):
            raise EvaluationFailed(f"{self.name}: outside chart {self.chart_index}")
        w = np.delete(z, self.chart_index, axis=-1) / pivot[..., None]
        return self._call(w)

    def on_chart(self, w, chart_index: int = 0) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128)
        if not self.homogeneous and chart_index == self.chart_index:
            return self._call(w)
        z = np.insert(w, chart_index, 1.0 + 0j, axis=-1)
        return self.on_homogeneous(z)

    def on_moduli(self, x) -> np.ndarray:
        """Evaluate at [1, x_1, .., x_m] for real moduli arrays ``(..., m)``."""
        x = np.asarray(x, dtype=float)
        ones = np.ones(x.shape[:-1] + (1,))
        return self.on_homogeneous(np.concatenate([ones, x], axis=-1))

    def _call(self, arr: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.fn(arr), dtype=float)

    # -- pointwise ------------------------------------------------------------
    def __call__(self, p) -> float:
        if isinstance(p, MPoint):
            p = p.base
        if isinstance(p, ChartPoint):
            return float(self.on_chart(p.affine, p.chart_index))
        if isinstance(p, ProjectivePoint):
            return float(self.on_homogeneous(p.coords))
        return float(self.on_homogeneous(np.asarray(p)))

    def defined_at(self, p) -> bool:
        if self.domain is None:
            return True
        z = p.homogeneous() if isinstance(p, ChartPoint) else np.asarray(
            p.coords if isinstance(p, ProjectivePoint) else p)
        return bool(self.domain(z))

    # -- algebra --------------------------------------------------------------
    def scaled(self, factor: float, name: Optional[str] = None) -> "ScalarField":
        fn = self.fn
        return ScalarField(lambda a: factor * fn(a), self.dim, homogeneous=self.homogeneous,
                           chart_index=self.chart_index, domain=self.domain,
                           name=name or f"{factor:g}*{self.name}", meta=self.meta)

    def shifted(self, offset: float, name: Optional[str] = None) -> "ScalarField":
        fn = self.fn
        return ScalarField(lambda a: fn(a) + offset, self.dim, homogeneous=self.homogeneous,
                           chart_index=self.chart_index, domain=self.domain,
                           name=name or self.name, meta=self.meta)

    def __neg__(self):
        return self.scaled(-1.0, name=f"-{self.name}")


def constant_field(value: float, dim: int, name: str = "constant") -> ScalarField:
    return ScalarField(lambda z: np.full(z.shape[:-1], float(value)), dim, name=name)


class HermitianForm:
    """A dim x dim complex Hermitian matrix."""

    __slots__ = ("entries",)

    def __init__(self, entries, tol: float = HERMITIAN_TOL):
        a = np.array(entries, dtype=np.complex128)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
        scale = np.maximum(np.abs(a), np.abs(a.conj().T))
        if np.any(np.abs(a - a.conj().T) > tol * np.maximum(scale, 1.0)):
            raise NotHermitian("entries[l][m] != conj(entries[m][l])")
        a.setflags(write=False)
        self.entries = a

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def det(self) -> float:
        return float(np.linalg.det(self.entries).real)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def __add__(self, other: "HermitianForm") -> "HermitianForm":
        return HermitianForm(self.entries + other.entries)

    def __sub__(self, other: "HermitianForm") -> "HermitianForm":
        return HermitianForm(self.entries - other.entries)

    def __mul__(self, c: float) -> "HermitianForm":
        return HermitianForm(self.entries * float(c))

    __rmul__ = __mul__

    def __repr__(self):
        return f"HermitianForm({self.entries!r})"

    def to_json(self) -> list:
        return [[[float(c.real), float(c.imag)] for c in row] for row in self.entries]

    @classmethod
    def from_json(cls, data) -> "HermitianForm":
        return cls([[complex(re, im) for re, im in row] for row in data])


def relative_deviation(a: HermitianForm, b: HermitianForm) -> float:
    """Frobenius-norm relative distance ||a - b|| / ||b||."""
    return float(np.linalg.norm(a.entries - b.entries) / np.linalg.norm(b.entries))


def default_step(affine: np.ndarray) -> float:
    return 1e-4 * (1.0 + float(np.max(np.abs(affine), initial=0.0)))


def _real_hessian(values: np.ndarray, d: int, h: float) -> np.ndarray:
    """Assemble the real Hessian from the stencil laid out by _stencil."""
    f0 = values[0]
    plus, minus = values[1:1 + d], values[1 + d:1 + 2 * d]
    H = np.empty((d, d))
    H[np.diag_indices(d)] = (plus - 2.0 * f0 + minus) / (h * h)
    iu, ju = np.triu_indices(d, 1)
    off = values[1 + 2 * d:].reshape(-1, 4)
    mixed = (off[:, 0] - off[:, 1] - off[:, 2] + off[:, 3]) / (4.0 * h * h)
    H[iu, ju] = mixed
    H[ju, iu] = mixed
    return H


def _stencil(x: np.ndarray, h: float) -> np.ndarray:
    d = x.size
    E = np.eye(d) * h
    iu, ju = np.triu_indices(d, 1)
    pp = x + E[iu] + E[ju]
    pm = x + E[iu] - E[ju]
    mp = x - E[iu] + E[ju]
    mm = x - E[iu] - E[ju]
    off = np.stack([pp, pm, mp, mm], axis=1).reshape(-1, d)
    return np.concatenate([x[None, :], x + E, x - E, off])


def _hessian_at_step(f: ScalarField, p: ChartPoint, h: float) -> np.ndarray:
    m = p.dim
    x = np.concatenate([p.affine.real, p.affine.imag])
    pts = _stencil(x, h)
    w = pts[:, :m] + 1j * pts[:, m:]
    try:
        values = f.on_chart(w, p.chart_index)
    except Exception as exc:  # noqa: BLE001
        raise EvaluationFailed(f"{f.name}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise NonFiniteSample(f"{f.name}: non-finite value inside the stencil")
    H = _real_hessian(values, 2 * m, h)
    uu, vv = H[:m, :m], H[m:, m:]
    uv, vu = H[:m, m:], H[m:, :m]
    C = 0.25 * ((uu + vv) + 1j * (uv - vu))
    return C


def complex_hessian(f: ScalarField, p: ChartPoint, step: float | None = None,
                    richardson: bool = False) -> HermitianForm:
    """Finite-difference d^2 f / dz_l dzbar_m at ``p`` in the chart of ``p``.

    Central differences in the real coordinates z = u + iv; the result is
    symmetrised with its conjugate transpose. With ``richardson`` the
    estimates at h and h/2 are combined to cancel the O(h^2) term.
    """
    h = default_step(p.affine) if step is None else float(step)
    C = _hessian_at_step(f, p, h)
    if richardson:
        C = (4.0 * _hessian_at_step(f, p, h / 2) - C) / 3.0
    return HermitianForm(0.5 * (C + C.conj().T))


def is_positive_definite(h: HermitianForm, tol: float = PD_TOL) -> bool:
    if not isinstance(h, HermitianForm):
        h = HermitianForm(h)
    lam = h.eigvalsh()
    return bool(lam[0] > tol * (1.0 + abs(h.trace())))


def leading_minors_positive(h: HermitianForm) -> bool:
    """Sylvester's criterion; a brute-force reference for small forms."""
    a = h.entries
    return all(np.linalg.det(a[:j, :j]).real > 0 for j in range(1, h.dim + 1))
