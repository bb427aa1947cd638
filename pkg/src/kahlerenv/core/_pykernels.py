"""Pure numpy implementations of the batch kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Array arguments are two-dimensional ``(N, m)`` float64 batches.
"""
import math

import numpy as np

BACKEND = "python"


def kahan_sum(values):
    """Compensated (Neumaier) sum in index order."""
    total = 0.0
    comp = 0.0
    for v in np.asarray(values, dtype=np.float64).ravel().tolist():
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def psi_moduli(x, a_m):
    """psi at [1, x_1, .., x_m] for moduli x_i = |z_i| >= 0 (-inf on zeros)."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[1]
    with np.errstate(divide="ignore"):
        logs = np.log(x).sum(axis=1)
    return (2.0 * a_m / (m + 1)) * logs - a_m * np.log1p((x * x).sum(axis=1))


def reduction_points(x, n, k):
    """First and second reduction images of moduli points x in (0, 1]^m.

    The first step replaces the free part of tuple 0 by its geometric mean
    zeta_0 and tuple h >= 1 by zeta_h; the second replaces every zeta_h,
    h >= 1, by their geometric mean gamma.
    """
    x = np.asarray(x, dtype=np.float64)
    N = x.shape[0]
    logx = np.log(x)
    lemma1 = np.empty_like(x)
    lemma2 = np.empty_like(x)
    if n > 1:
        z0 = np.exp(logx[:, : n - 1].mean(axis=1))
        lemma1[:, : n - 1] = z0[:, None]
        lemma2[:, : n - 1] = z0[:, None]
    tail = logx[:, n - 1:].reshape(N, k - 1, n)
    log_zeta = tail.mean(axis=2)
    lemma1[:, n - 1:] = np.repeat(np.exp(log_zeta), n, axis=1)
    # gamma from the rounded zeta_h, exactly as the chain composes
    log_gamma = np.log(np.exp(log_zeta)).mean(axis=1)
    lemma2[:, n - 1:] = np.exp(log_gamma)[:, None]
    return lemma1, lemma2


def tian_integrand(x, alpha):
    """(1 + sum x)^((alpha-1)(m+1)) / (prod x)^alpha on squared moduli x > 0."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[1]
    return np.exp((alpha - 1.0) * (m + 1) * np.log1p(x.sum(axis=1))
                  - alpha * np.log(x).sum(axis=1))


def tian_sample(t, alpha, s=1.0):
    """Map uniforms t in (0,1)^m to x = u^(1/(1-alpha)), u = (t/(1-t))^s.

    Returns ``(x, log_jacobian)`` where the Jacobian is prod dx_i/dt_i.
    """
    t = np.asarray(t, dtype=np.float64)
    logv = np.log(t) - np.log1p(-t)
    x = np.exp(s * logv / (1.0 - alpha))
    logj = (alpha * np.log(x) + (s - 1.0) * logv - 2.0 * np.log1p(-t)).sum(axis=1) \
        + t.shape[1] * (math.log(s) - math.log(1.0 - alpha))
    return x, logj


def tian_psi_weights(t, alpha, s=1.0):
    """Importance weights of the psi integrand under the tian_sample law."""
    t = np.asarray(t, dtype=np.float64)
    m = t.shape[1]
    logv = np.log(t) - np.log1p(-t)
    x = np.exp(s * logv / (1.0 - alpha))
    return np.exp((alpha - 1.0) * (m + 1) * np.log1p(x.sum(axis=1))
                  + ((s - 1.0) * logv - 2.0 * np.log1p(-t)).sum(axis=1)
                  + m * (math.log(s) - math.log(1.0 - alpha)))
