"""Spectrum of the finite-rank Hessian perturbation induced by the spikes.

Conditioned on the overlap profile m, the landscape Hessian at a critical
point looks like a GOE matrix plus a rank-r perturbation.  The perturbation is
built from per-spike curvature weights theta_i and the Gram matrix of the
projected spike directions; its eigenvalues gamma_1 >= ... >= gamma_r feed the
large-deviation rates that separate saddles from local maxima.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import ModelParams

__all__ = ["perturbation_factors", "spike_eigenvalues", "spike_eigenvalues_r2"]


def perturbation_factors(
    params: ModelParams, m: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """Curvature weights theta and the Gram matrix of projected spike directions.

    theta_i = sqrt(2 / (p(p-1))) * k_i (k_i - 1) * lam_i * m_i^{k_i-2} (1 - m_i^2);
    the Gram matrix has unit diagonal and off-diagonal entries
    -m_i m_j / sqrt((1 - m_i^2)(1 - m_j^2)).  Requires |m_i| < 1 for all i.
    """
    if len(m) != params.r:
        raise ValueError(f"overlap vector has length {len(m)}, expected r = {params.r}")
    m = np.asarray(m, dtype=float)
    if np.any(np.abs(m) >= 1.0):
        raise ValueError("perturbation is degenerate at |m_i| = 1")
    p = params.p
    k = np.asarray(params.k, dtype=int)
    lam = np.asarray(params.lam, dtype=float)
    rem = 1.0 - m * m
    theta = math.sqrt(2.0 / (p * (p - 1))) * k * (k - 1) * lam * m ** (k - 2) * rem
    root = np.sqrt(rem)
    gram = -np.outer(m, m) / np.outer(root, root)
    np.fill_diagonal(gram, 1.0)
    return theta, gram


def spike_eigenvalues(params: ModelParams, m: Sequence[float]) -> np.ndarray:
    """Eigenvalues of the rank-r Hessian perturbation, sorted descending.

    The perturbation D_theta * Gram is diagonalized through the symmetric
    conjugate sqrt(D_theta) * Gram * sqrt(D_theta) when all theta_i >= 0
    (the case m in [0,1]^r, where the result is also >= 0 entrywise); a
    general eigensolver handles mixed signs.
    """
    theta, gram = perturbation_factors(params, m)
    if params.r == 1:
        return np.array([theta[0]])
    if np.all(theta >= 0.0):
        root = np.sqrt(theta)
        sym = gram * np.outer(root, root)
        vals = np.linalg.eigvalsh(sym)
    else:
        vals = np.linalg.eigvals(theta[:, None] * gram).real
    return np.sort(vals)[::-1]


def spike_eigenvalues_r2(params: ModelParams, m: Sequence[float]) -> tuple[float, float]:
    """Closed form for the two perturbation eigenvalues at rank 2."""
    if params.r != 2:
        raise ValueError(f"closed form requires r = 2, got r = {params.r}")
    theta, gram = perturbation_factors(params, m)
    th1, th2 = float(theta[0]), float(theta[1])
    c = float(gram[0, 1])
    s = th1 + th2
    d = math.sqrt((th1 - th2) ** 2 + 4 * th1 * th2 * c * c)
    return 0.5 * (s + d), 0.5 * (s - d)
