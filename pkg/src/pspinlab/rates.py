"""Large-deviation rates for the largest eigenvalue of a finite-rank spiked GOE
matrix, and the local-maxima complexity built on top of them.

All rates are at speed N with the bulk spectrum normalized to [-2, 2].  A
spike of size gamma detaches an eigenvalue at gamma + 1/gamma once gamma > 1;
below that it is invisible at this scale.  Library functions are closed form
throughout; quadrature appears only in the test oracles.
"""
from __future__ import annotations

import math
from typing import Sequence

from scipy import optimize

from .core import ModelParams, edge_area, phi_star, sigma_tot_joint, t_func, y_shift
from .spikes import spike_eigenvalues

__all__ = [
    "i_goe",
    "j_coupling",
    "i_gamma",
    "i_max",
    "big_l",
    "big_l_left",
    "sigma_max_joint",
    "sigma_max_projected",
]

INF = float("inf")


def i_goe(x: float) -> float:
    """Rate for the largest eigenvalue of an unspiked GOE matrix to sit at x.

    +inf below the bulk edge: at this speed the top eigenvalue cannot be
    pushed under 2.
    """
    if x < 2:
        return INF
    return 0.5 * edge_area(x)


def _stieltjes_edge(x: float) -> float:
    """Stieltjes transform of the semicircle law at x >= 2."""
    return 0.5 * (x - math.sqrt(x * x - 4))


def j_coupling(gamma: float, x: float) -> float:
    """Exponential tilt paid by a rank-one spike of size gamma for a top
    eigenvalue at x >= 2.  Saturates at gamma^2/2 once the tilt decouples."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if x < 2:
        raise ValueError(f"x must be >= 2, got {x}")
    if _stieltjes_edge(x) <= gamma:
        return gamma * x - 1 - math.log(gamma) - phi_star(x)
    return 0.5 * gamma * gamma


def i_gamma(gamma: float, x: float) -> float:
    """Rate for the top eigenvalue of a GOE matrix with one supercritical
    spike (gamma >= 1) to sit at x.  Zero exactly at the typical location
    gamma + 1/gamma; the smooth continuation below it is what enters i_max.
    +inf below the bulk edge.
    """
    if gamma < 1:
        raise ValueError(f"i_gamma requires gamma >= 1, got {gamma}")
    if x < 2:
        return INF
    e = gamma + 1.0 / gamma
    return (
        0.25 * (edge_area(x) - edge_area(e))
        - 0.5 * gamma * (x - e)
        + 0.125 * (x * x - e * e)
    )


def _split_spikes(gamma: Sequence[float]) -> tuple[list[float], list[float]]:
    """Validate descending order and split into supercritical / subcritical."""
    g = [float(v) for v in gamma]
    if any(g[i] < g[i + 1] for i in range(len(g) - 1)):
        raise ValueError(f"gamma must be sorted in non-increasing order, got {g}")
    sup = [v for v in g if v >= 1.0]
    sub = [v for v in g if 0.0 < v < 1.0]
    return sup, sub


def i_max(gamma: Sequence[float], x: float) -> float:
    """Rate for the largest eigenvalue of the spiked matrix to sit at x.

    Supercritical spikes contribute their individual rates, each switched off
    once x passes its typical location, except the leading one which always
    counts.  With only subcritical spikes the pure GOE rate applies up to the
    leading typical location and a tilted branch beyond it.  Entries <= 0 are
    inert.  +inf below the bulk edge.
    """
    sup, sub = _split_spikes(gamma)
    if x < 2:
        return INF
    if sup:
        total = i_gamma(sup[0], x)
        for g in sup[1:]:
            if x < g + 1.0 / g:
                total += i_gamma(g, x)
        return total
    if sub:
        g1 = sub[0]
        if x <= g1 + 1.0 / g1:
            return 0.5 * edge_area(x)
        return (
            0.25 * edge_area(x)
            + 0.125 * x * x
            - 0.5 * g1 * x
            + 0.25
            + 0.5 * math.log(g1)
            + 0.25 * g1 * g1
        )
    return 0.5 * edge_area(x)


def big_l(gamma: Sequence[float], t: float) -> float:
    """Rate for the largest eigenvalue to fall at or below t.

    Only supercritical spikes whose typical location exceeds t have to be
    pushed down, and their costs add.  +inf below the bulk edge, including
    when no spike is supercritical.
    """
    sup, _ = _split_spikes(gamma)
    if t < 2:
        return INF
    total = 0.0
    for g in sup:
        if g + 1.0 / g > t:
            total += i_gamma(g, t)
    return total


def big_l_left(gamma: Sequence[float], t: float) -> float:
    """Left limit of big_l: the rate for a strict fall below t.

    Differs from big_l only at the bulk edge, where strict confinement below
    2 is impossible at this speed.
    """
    if t <= 2:
        return INF
    return big_l(gamma, t)


def sigma_max_joint(params: ModelParams, m: Sequence[float], x: float) -> float:
    """Exponential growth rate of the expected number of local maxima with
    overlap profile m and value near x.

    Equals the critical-point exponent minus the cost of confining the
    perturbed Hessian spectrum below the shift t(m, x); -inf wherever that
    confinement has infinite cost (t below the bulk edge) or off-domain.
    """
    s = sigma_tot_joint(params, m, x)
    if s == float("-inf"):
        return s
    gam = sorted((float(v) for v in spike_eigenvalues(params, m)), reverse=True)
    return s - big_l(gam, t_func(params, m, x))


def sigma_max_projected(params: ModelParams, m: Sequence[float]) -> float:
    """sup over x of sigma_max_joint(m, x).

    The objective is smooth between breakpoints where the Hessian shift
    crosses the bulk edge or a spike's typical location, so each piece is
    maximized separately with a bounded scalar search.
    """
    alpha = sum(float(v) ** 2 for v in m)
    if not 0.0 < alpha < 1.0:
        return float("-inf")
    p = params.p
    gam = sorted((float(v) for v in spike_eigenvalues(params, m)), reverse=True)

    # pull the breakpoints in t back to the value coordinate x
    scale = math.sqrt((p - 1) / (2.0 * p))
    base = -y_shift(params, m, 0.0)  # the x-independent part of x - y
    breaks = [2.0] + [g + 1.0 / g for g in gam if g > 1.0]
    xs = sorted(base + t * scale for t in breaks)

    lam1 = params.lam[0] if params.lam else 0.0
    hi = params.r * lam1 * (p - 1) / (p - 2) + 10.0
    hi = max(hi, xs[-1] + 10.0)

    best = sigma_max_joint(params, m, xs[0])
    edges = xs + [hi]
    for lo_x, hi_x in zip(edges[:-1], edges[1:]):
        if hi_x - lo_x < 1e-14:
            continue
        res = optimize.minimize_scalar(
            lambda x: -sigma_max_joint(params, m, x),
            bounds=(lo_x, hi_x),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -res.fun, sigma_max_joint(params, m, hi_x))
    return best
