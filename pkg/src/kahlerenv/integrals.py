"""Integrals of exp(-alpha phi) against the Fubini-Study volume (a_m = m+1).

Everything is written in the squared moduli x_p = |z_p|^2 of the chart
z_0 = 1, with the constant factor pi^m and the wedge-product constants
dropped. In those coordinates the integral of exp(-alpha psi) is

    I(alpha, m) = int_{(0,inf)^m} (1 + sum x)^((alpha-1)(m+1)) / (prod x)^alpha dx,

finite exactly for alpha < 1, with the Dirichlet closed form
Gamma(1-alpha)^(m+1) / Gamma((m+1)(1-alpha)).

Per axis the substitution x = u^(1/(1-alpha)), u = t/(1-t) turns
x^(-alpha) dx into du/(1-alpha) and maps (0, inf) onto (0, 1). The Monte
Carlo law uses the same singular match with a heavier tail
u = (t/(1-t))^s, s = (m+1)/2: with s = 1 the weights grow like |u|^2 when
all m >= 3 coordinates are large together, and the variance diverges.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from . import core
from .errors import AlphaOutOfRange, DomainError
from .hermitian import ScalarField

QUAD_ORDER = 12
QUAD_GRADE = 0.25
DEFAULT_NODES = 192
MC_BLOCK = 1 << 16
MAX_QUAD_DIM = 3
THREADS_ENV = "KAHLERENV_THREADS"


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    abs_error_estimate: float
    method: str
    samples_or_nodes: int
    seed: Optional[int] = None
    alpha: Optional[float] = None
    m: Optional[int] = None

    def __post_init__(self):
        if not self.abs_error_estimate >= 0:
            raise ValueError("error estimate must be non-negative")
        if self.method == "monte_carlo" and self.seed is None:
            raise ValueError("Monte Carlo estimates must carry their seed")

    @property
    def stderr(self) -> float:
        return self.abs_error_estimate

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.abs_error_estimate,
                "method": self.method, "nodes_or_samples": self.samples_or_nodes,
                "seed": self.seed, "alpha": self.alpha, "m": self.m}


def _check_alpha(alpha: float):
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")


def tian_integrand(x, alpha: float, m: int | None = None) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if m is not None and x.size != m:
        raise DomainError(f"expected {m} coordinates, got {x.size}")
    if np.any(x <= 0):
        raise DomainError("squared moduli must be positive")
    return float(core.tian_integrand(x[None, :], float(alpha))[0])


def dirichlet_oracle(alpha: float, m: int) -> float:
    """Gamma(1-alpha)^(m+1) / Gamma((m+1)(1-alpha))."""
    _check_alpha(alpha)
    return float(np.exp((m + 1) * gammaln(1.0 - alpha) - gammaln((m + 1) * (1.0 - alpha))))


# -- tensor quadrature ------------------------------------------------------

def graded_gauss_nodes(nodes: int = DEFAULT_NODES, order: int = QUAD_ORDER,
                       grade: float = QUAD_GRADE) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on (0, 1), panels graded geometrically
    toward both endpoints."""
    panels_per_side = max(1, math.ceil(nodes / order / 2))
    g, w = np.polynomial.legendre.leggauss(order)
    half = np.concatenate([[0.0], 0.5 * grade ** np.arange(panels_per_side - 1, -1, -1.0)])
    edges = np.concatenate([half, 1.0 - half[::-1][1:]])
    a, b = edges[:-1, None], edges[1:, None]
    t = ((b - a) / 2 * g + (a + b) / 2).ravel()
    wt = ((b - a) / 2 * w).ravel()
    return t, wt


def _tensor_sum(axis_x: np.ndarray, axis_w: np.ndarray, m: int,
                log_kernel) -> float:
    """sum over the tensor grid of prod(axis_w) * exp(log_kernel(sum x)).

    The last two axes are vectorised; leading axes are looped.
    """
    N = axis_x.size
    vec = min(m, 2)
    xs = np.meshgrid(*([axis_x] * vec), indexing="ij")
    ws = np.meshgrid(*([axis_w] * vec), indexing="ij")
    slab_x = sum(xs)
    slab_w = np.prod(ws, axis=0)
    partial = []
    for idx in itertools.product(range(N), repeat=m - vec):
        shift = float(sum(axis_x[i] for i in idx))
        wlead = float(np.prod([axis_w[i] for i in idx]))
        partial.append(wlead * float(np.sum(slab_w * np.exp(log_kernel(slab_x + shift)))))
    return core.kahan_sum(np.array(partial))


def _psi_quadrature(alpha: float, m: int, nodes: int, order: int) -> float:
    t, w = graded_gauss_nodes(nodes, order)
    x = (t / (1.0 - t)) ** (1.0 / (1.0 - alpha))
    wj = w / ((1.0 - alpha) * (1.0 - t) ** 2)
    expo = (alpha - 1.0) * (m + 1)
    return _tensor_sum(x, wj, m, lambda s: expo * np.log1p(s))


def tian_psi_integral(alpha: float, m: int, nodes: int = DEFAULT_NODES, *,
                      method: str = "quadrature", samples: int = 1_000_000,
                      seed: int = 0) -> IntegralEstimate:
    """I(alpha, m) by tensor Gauss quadrature, or by Monte Carlo.

    Quadrature is refused above m = 3. The error estimate is the larger of
    two differences: against a rule of order two lower on the same panels,
    and against the same order with one grading level dropped per side.
    """
    _check_alpha(alpha)
    if method == "monte_carlo":
        return tian_psi_mc(alpha, m, samples, seed)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    if m > MAX_QUAD_DIM:
        raise ValueError(f"tensor quadrature refused for m={m} > {MAX_QUAD_DIM}; "
                         "use method='monte_carlo'")
    value = _psi_quadrature(alpha, m, nodes, QUAD_ORDER)
    low_order = _psi_quadrature(alpha, m, nodes, QUAD_ORDER - 2)
    few_panels = _psi_quadrature(alpha, m, max(nodes - 2 * QUAD_ORDER, QUAD_ORDER), QUAD_ORDER)
    err = max(abs(value - low_order), abs(value - few_panels))
    n_axis = graded_gauss_nodes(nodes)[0].size
    return IntegralEstimate(value, err, "tensor_quadrature",
                            n_axis ** m, alpha=alpha, m=m)


# -- divergence at alpha >= 1 --------------------------------------------------

def divergence_sweep(alpha: float, m: int, cutoffs: Sequence[float],
                     panel_width: float = 0.5, order: int = QUAD_ORDER) -> list[tuple[float, float]]:
    """Truncated integrals of the psi integrand over [1/R, R]^m.

    With x = e^s the domain is [-ln R, ln R]^m and the integrand is smooth,
    so composite Gauss-Legendre in s is used.
    """
    if alpha < 1:
        raise AlphaOutOfRange(f"divergence sweep needs alpha >= 1, got {alpha}")
    cutoffs = [float(r) for r in cutoffs]
    if any(r <= 1 for r in cutoffs) or any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be increasing and > 1")
    g, w = np.polynomial.legendre.leggauss(order)
    out = []
    expo = (alpha - 1.0) * (m + 1)
    for R in cutoffs:
        L = math.log(R)
        panels = max(1, math.ceil(2 * L / panel_width))
        edges = np.linspace(-L, L, panels + 1)
        a, b = edges[:-1, None], edges[1:, None]
        s = ((b - a) / 2 * g + (a + b) / 2).ravel()
        ws = ((b - a) / 2 * w).ravel() * np.exp((1.0 - alpha) * s)
        out.append((R, _tensor_sum(np.exp(s), ws, m, lambda S: expo * np.log1p(S))))
    return out


def sweep_increments(sweep: Sequence[tuple[float, float]]) -> np.ndarray:
    vals = np.array([v for _, v in sweep])
    return np.diff(vals)


# -- Monte Carlo ---------------------------------------------------------------------

def mc_tail_exponent(m: int) -> float:
    """Tail exponent s = (m+1)/2: finite weight variance needs m/s < 2."""
    return max(1.0, 0.5 * (m + 1))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _block_uniforms(seed: int, block: int, size: int, m: int):
    """Counter-based stream for one block: Philox keyed by (seed, block)."""
    rng = np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(block)))
    # shift k / 2^53 to the open interval (0, 1)
    t = rng.random((size, m)) + 0.5 / 2.0 ** 53
    theta = rng.random((size, m)) * (2.0 * math.pi)
    return t, theta


def _mc_driver(samples: int, seed: int, m: int, block_fn) -> tuple[float, float]:
    if samples < 2:
        raise ValueError("need at least two samples")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    sizes = [min(MC_BLOCK, samples - lo) for lo in range(0, samples, MC_BLOCK)]

    def run(b):
        w = block_fn(*_block_uniforms(seed, b, sizes[b], m))
        return core.kahan_sum(w), core.kahan_sum(w * w)

    if _threads() > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(_threads()) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    s1 = core.kahan_sum(np.array([p[0] for p in parts]))
    s2 = core.kahan_sum(np.array([p[1] for p in parts]))
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / (samples - 1))


def tian_psi_mc(alpha: float, m: int, samples: int = 1_000_000,
                seed: int = 0) -> IntegralEstimate:
    """Monte Carlo estimate of I(alpha, m) with the exact singular-factor match."""
    _check_alpha(alpha)
    s = mc_tail_exponent(m)
    mean, se = _mc_driver(samples, seed, m,
                          lambda t, theta: core.tian_psi_weights(t, alpha, s))
    return IntegralEstimate(mean, se, "monte_carlo", samples, seed, alpha, m)


def tian_mc_integral(f: ScalarField, alpha: float, m: int, samples: int = 1_000_000,
                     seed: int = 0) -> IntegralEstimate:
    """Monte Carlo estimate of int exp(-alpha f) dv in squared-moduli form.

    Phases are sampled uniformly, so non-invariant fields are averaged over
    the torus. Deterministic given ``seed``.
    """
    if f.dim != m:
        raise ValueError(f"field lives on P_{f.dim}, not P_{m}")

    s = mc_tail_exponent(m)

    def block(t, theta):
        x, logj = core.tian_sample(t, alpha, s)
        z = np.sqrt(x) * np.exp(1j * theta)
        fz = f.on_chart(z, 0)
        with np.errstate(over="ignore", invalid="ignore"):
            logw = -alpha * fz - (m + 1) * np.log1p(x.sum(axis=1)) + logj
            return np.exp(logw)

    mean, se = _mc_driver(samples, seed, m, block)
    return IntegralEstimate(mean, se, "monte_carlo", samples, seed, alpha, m)
