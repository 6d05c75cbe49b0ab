"""Closed forms for the annealed complexity of spiked spherical p-spin landscapes.

Model: an isotropic Gaussian polynomial of degree p on the sphere of radius
sqrt(N) in R^N, plus r deterministic terms lambda_i * <sigma, u_i>^{k_i} with
orthonormal directions u_i.  At exponential scale the expected number of
critical points with overlap profile m and value near x grows like
exp{N * sigma_tot_joint(m, x)}; this module evaluates that exponent and its
projections, boundaries, and zero sets in closed form.

Conventions used throughout the package:
    overlaps m_i = <sigma, u_i> / sqrt(N), alpha(m) = sum_i m_i^2,
    natural domain 0 < alpha < 1 (off-domain exponents are -inf);
    GOE matrices are normalized so the bulk spectrum converges to [-2, 2].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

__all__ = [
    "ModelParams",
    "OverlapPoint",
    "AuxStatistics",
    "RegimeLabel",
    "tau_critical",
    "eta_critical",
    "lambda_critical",
    "edge_area",
    "phi_star",
    "s_func",
    "y_shift",
    "t_func",
    "sigma_tot_joint",
    "sigma_tot_projected",
    "aux_statistics",
    "classify_regime",
    "zero_locus_solve",
    "g_ab",
    "f_ab",
    "appendix_diagnostics",
]

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ModelParams:
    """Landscape parameters: degree p, rank r, spike degrees k, strengths lam.

    lam must be sorted in non-increasing order; every k_i >= 3 and p >= 3.
    """

    p: int
    r: int
    k: tuple[int, ...]
    lam: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        object.__setattr__(self, "lam", tuple(float(v) for v in self.lam))
        if self.p < 3:
            raise ValueError(f"p must be >= 3, got {self.p}")
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if len(self.k) != self.r or len(self.lam) != self.r:
            raise ValueError("k and lam must each have length r")
        if any(ki < 3 for ki in self.k):
            raise ValueError(f"every spike degree must be >= 3, got {self.k}")
        if any(li < 0 for li in self.lam):
            raise ValueError(f"spike strengths must be >= 0, got {self.lam}")
        if any(self.lam[i] < self.lam[i + 1] for i in range(self.r - 1)):
            raise ValueError(f"lam must be non-increasing, got {self.lam}")


@dataclass(frozen=True)
class OverlapPoint:
    """A point in overlap space; alpha is its squared Euclidean norm."""

    m: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "m", tuple(float(v) for v in self.m))

    @property
    def alpha(self) -> float:
        return sum(v * v for v in self.m)


class RegimeLabel(IntEnum):
    """Classification of an overlap point by the sign structure of the exponent.

    Integer values double as the numeric codes written to grid CSV files.
    """

    OUT_OF_DOMAIN = 0
    POSITIVE = 1
    ZERO_BOUNDARY = 2
    NEGATIVE = 3
    SUBEXPONENTIAL_ZERO_LOCUS = 4


@dataclass(frozen=True)
class AuxStatistics:
    """Scalar summaries of an overlap point that drive every phase boundary.

    tau_star is NaN when its defining ratio is negative or degenerate; beta is
    NaN when tau vanishes; eta is +inf when some active strength is zero and
    eta_c is NaN for mixed spike degrees.
    """

    tau: float
    alpha: float
    beta: float
    eta: float
    tau_star: float
    tau_c: float
    eta_c: float


def tau_critical(p: int) -> float:
    """Threshold for the effective shift above which the wide-branch formula rules."""
    return (p - 2) / math.sqrt(2 * p * (p - 1))


def eta_critical(p: int, k: int) -> float:
    """Largest inverse-strength budget that still admits exact zeros of the exponent."""
    return (k - 2) * (2 * k * k / (p * (k - 1) ** (k - 1))) ** (1.0 / (k - 2))


def lambda_critical(p: int) -> float:
    """Strength threshold (r=1, k=p) separating trivial from informative zero sets."""
    return math.sqrt((p - 1) ** (p - 1) / ((p - 2) ** (p - 2) * 2 * p))


def edge_area(x: float) -> float:
    """Integral of sqrt(y^2 - 4) from 2 to x, for x >= 2.

    This is the area that controls the exponential cost of pulling one
    eigenvalue out of the bulk to position x.
    """
    if x < 2:
        raise ValueError(f"edge_area needs x >= 2, got {x}")
    s = math.sqrt(x * x - 4)
    return 0.5 * x * s - 2 * math.log(0.5 * (x + s))


def phi_star(x: float) -> float:
    """Limiting (1/N) log E|det(W - x)| for a bulk-normalized GOE matrix W.

    Equals the semicircle log-potential integral log|y - x| rho_sc(dy): inside
    the bulk only the quadratic part survives; outside, the area term enters.
    """
    v = 0.25 * x * x - 0.5
    ax = abs(x)
    if ax > 2:
        v -= 0.5 * edge_area(ax)
    return v


def _profile_parts(params: ModelParams, m: Sequence[float]):
    """Shared scalars: alpha, the two quadratic sums, tau, value center, shift.

    Returns (alpha, diag_sum, cross_sum, tau, center, shift) where
      diag_sum  = (1/p) sum_i lam_i^2 k_i^2 m_i^{2k_i-2} (1 - m_i^2),
      cross_sum = (2/p) sum_{i<j} lam_i lam_j k_i k_j m_i^{k_i} m_j^{k_j},
      tau       = (1/p) sum_i lam_i k_i m_i^{k_i},
      center    = sum_i lam_i m_i^{k_i},
      shift     = sum_i lam_i (1 - k_i/p) m_i^{k_i}.
    """
    if len(m) != params.r:
        raise ValueError(f"overlap vector has length {len(m)}, expected r = {params.r}")
    p = params.p
    alpha = 0.0
    diag_sum = 0.0
    tau = 0.0
    center = 0.0
    powers = []
    for lam_i, k_i, m_i in zip(params.lam, params.k, m):
        mi2 = m_i * m_i
        alpha += mi2
        mk = m_i**k_i
        powers.append(lam_i * k_i * mk)
        diag_sum += lam_i * lam_i * k_i * k_i * m_i ** (2 * k_i - 2) * (1 - mi2)
        tau += lam_i * k_i * mk
        center += lam_i * mk
    diag_sum /= p
    tau /= p
    cross_sum = 0.0
    for i in range(len(powers)):
        for j in range(i + 1, len(powers)):
            cross_sum += powers[i] * powers[j]
    cross_sum *= 2.0 / p
    shift = center - tau
    return alpha, diag_sum, cross_sum, tau, center, shift


def s_func(params: ModelParams, m: Sequence[float], x: float) -> float:
    """Density exponent of critical points at overlap m and value x, before
    the Hessian-determinant contribution.  -inf when alpha(m) is not in (0, 1).
    """
    alpha, diag_sum, cross_sum, _, center, _ = _profile_parts(params, m)
    if not 0.0 < alpha < 1.0:
        return NEG_INF
    d = x - center
    return (
        0.5 * (math.log(params.p - 1) + 1)
        + 0.5 * math.log1p(-alpha)
        - diag_sum
        + cross_sum
        - d * d
    )


def y_shift(params: ModelParams, m: Sequence[float], x: float) -> float:
    """Recentered value coordinate: x minus the deterministic part not seen by
    the gradient trace."""
    _, _, _, _, _, shift = _profile_parts(params, m)
    return x - shift


def t_func(params: ModelParams, m: Sequence[float], x: float) -> float:
    """Hessian shift coordinate: the recentered value scaled to the GOE edge units."""
    p = params.p
    return math.sqrt(2 * p / (p - 1)) * y_shift(params, m, x)


def sigma_tot_joint(params: ModelParams, m: Sequence[float], x: float) -> float:
    """Exponential growth rate of the expected number of critical points with
    overlap profile m and value near x.  -inf off-domain.
    """
    alpha, diag_sum, cross_sum, tau, _, shift = _profile_parts(params, m)
    if not 0.0 < alpha < 1.0:
        return NEG_INF
    p = params.p
    y = x - shift
    t = math.sqrt(2 * p / (p - 1)) * y
    d = y - tau
    return (
        0.5 * (math.log(p - 1) + 1)
        + 0.5 * math.log1p(-alpha)
        - diag_sum
        + cross_sum
        - d * d
        + phi_star(t)
    )


def sigma_tot_projected(params: ModelParams, m: Sequence[float]) -> float:
    """sup over x of sigma_tot_joint(m, x), in closed form.

    Two branches, split by tau against tau_critical(p): below the threshold
    the optimal Hessian shift stays outside the bulk (narrow branch), at or
    above it the optimizer sits against the bulk edge (wide branch).
    """
    alpha, diag_sum, cross_sum, tau, _, _ = _profile_parts(params, m)
    if not 0.0 < alpha < 1.0:
        return NEG_INF
    p = params.p
    base = 0.5 * math.log1p(-alpha) - diag_sum + cross_sum
    if tau < tau_critical(p):
        return 0.5 * math.log(p - 1) + base + (p / (p - 2)) * tau * tau
    u = math.sqrt(0.5 * p) * tau
    return base - u * u + u * math.sqrt(1 + u * u) + math.asinh(u)


def aux_statistics(params: ModelParams, m: Sequence[float]) -> AuxStatistics:
    """All scalar statistics of an overlap point used by the phase analysis."""
    p = params.p
    alpha, _, _, tau, _, _ = _profile_parts(params, m)
    sq = 0.0
    for lam_i, k_i, m_i in zip(params.lam, params.k, m):
        sq += (lam_i * k_i * m_i ** (k_i - 1)) ** 2
    sq /= p * p
    beta = alpha * sq / (tau * tau) if tau != 0.0 else math.nan

    eta = 0.0
    for lam_i, k_i, m_i in zip(params.lam, params.k, m):
        if m_i != 0.0:
            eta += lam_i ** (-2.0 / (k_i - 2)) if lam_i > 0 else math.inf

    if all(k_i == params.k[0] for k_i in params.k):
        eta_c = eta_critical(p, params.k[0])
    else:
        eta_c = math.nan

    tau_star = math.nan
    if 0.0 < alpha < 1.0 and not math.isnan(beta):
        den = (p - 1) / (p - 2) - beta / alpha
        num = -0.5 * math.log((1 - alpha) * (p - 1))
        if den != 0.0 and num / den >= 0.0:
            tau_star = math.sqrt(num / den) / math.sqrt(p)

    return AuxStatistics(
        tau=tau,
        alpha=alpha,
        beta=beta,
        eta=eta,
        tau_star=tau_star,
        tau_c=tau_critical(p),
        eta_c=eta_c,
    )


def _zero_conditions_hold(
    params: ModelParams, m: Sequence[float], tol: float
) -> bool:
    """Check the two exact-zero conditions of the wide branch at tolerance tol.

    (a) the values lam_i k_i m_i^{k_i-2} / p agree across nonzero coordinates;
    (b) the effective shift matches alpha / (2 sqrt(1 - alpha)) in edge units.
    """
    p = params.p
    alpha, _, _, tau, _, _ = _profile_parts(params, m)
    if not 0.0 < alpha < 1.0:
        return False
    d_vals = [
        (k_i / p) * lam_i * m_i ** (k_i - 2)
        for lam_i, k_i, m_i in zip(params.lam, params.k, m)
        if m_i != 0.0
    ]
    if not d_vals:
        return False
    if max(d_vals) - min(d_vals) > tol:
        return False
    resid = math.sqrt(0.5 * p) * tau - 0.5 * alpha / math.sqrt(1 - alpha)
    return abs(resid) <= tol


def classify_regime(
    params: ModelParams, m: Sequence[float], tol: float = 1e-6
) -> RegimeLabel:
    """Label an overlap point by the sign structure of the projected exponent.

    Points outside [0, 1]^r or with alpha outside (0, 1) are OUT_OF_DOMAIN.
    A point on the wide branch satisfying the exact-zero conditions within tol
    is SUBEXPONENTIAL_ZERO_LOCUS; otherwise the sign of the projected exponent
    decides, with |value| <= tol reported as ZERO_BOUNDARY.
    """
    if any(m_i < 0.0 for m_i in m):
        return RegimeLabel.OUT_OF_DOMAIN
    alpha, _, _, tau, _, _ = _profile_parts(params, m)
    if not 0.0 < alpha < 1.0:
        return RegimeLabel.OUT_OF_DOMAIN
    if tau >= tau_critical(params.p) - tol and _zero_conditions_hold(params, m, tol):
        return RegimeLabel.SUBEXPONENTIAL_ZERO_LOCUS
    value = sigma_tot_projected(params, m)
    if abs(value) <= tol:
        return RegimeLabel.ZERO_BOUNDARY
    return RegimeLabel.POSITIVE if value > 0 else RegimeLabel.NEGATIVE


def _pattern_residual(params: ModelParams, pattern: tuple[int, ...], delta: float):
    """Overlap vector and zero-condition residual for a common slope delta.

    Coordinates in the pattern carry m_i = (p delta / (k_i lam_i))^{1/(k_i-2)},
    the unique profile satisfying condition (a); the residual is condition (b).
    Returns (m, alpha, residual) with residual NaN when alpha >= 1.
    """
    p = params.p
    m = [0.0] * params.r
    alpha = 0.0
    tau = 0.0
    for i in pattern:
        m_i = (p * delta / (params.k[i] * params.lam[i])) ** (1.0 / (params.k[i] - 2))
        m[i] = m_i
        alpha += m_i * m_i
        tau += params.lam[i] * params.k[i] * m_i ** params.k[i] / p
    if alpha >= 1.0:
        return m, alpha, math.nan
    resid = math.sqrt(0.5 * p) * tau - 0.5 * alpha / math.sqrt(1 - alpha)
    return m, alpha, resid


def zero_locus_solve(
    params: ModelParams, pattern: Sequence[int] | None = None
) -> list[tuple[float, ...]]:
    """All overlap profiles solving the exact-zero conditions on a support pattern.

    pattern lists the coordinates allowed to be nonzero (default: all of them).
    Coordinates off the pattern are pinned to zero.  Solutions are found by a
    dense scan in the common slope followed by bisection to 1e-12; the list is
    ordered by increasing slope (hence increasing overlaps) and may be empty.
    """
    if pattern is None:
        pattern = tuple(range(params.r))
    pattern = tuple(sorted(set(int(i) for i in pattern)))
    if not pattern:
        return []
    if pattern[0] < 0 or pattern[-1] >= params.r:
        raise ValueError(f"pattern indices must lie in [0, {params.r - 1}]")
    if any(params.lam[i] == 0.0 for i in pattern):
        return []

    # upper end of the slope range: alpha(delta) is increasing, stop at alpha = 1
    lo, hi = 0.0, 1.0
    while _pattern_residual(params, pattern, hi)[1] < 1.0:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _pattern_residual(params, pattern, mid)[1] < 1.0:
            lo = mid
        else:
            hi = mid
    delta_max = lo

    grid_size = 4096
    deltas = [delta_max * (j + 1) / (grid_size + 1) for j in range(grid_size)]
    resids = [_pattern_residual(params, pattern, d)[2] for d in deltas]

    roots: list[float] = []
    for j in range(grid_size - 1):
        r0, r1 = resids[j], resids[j + 1]
        if math.isnan(r0) or math.isnan(r1):
            continue
        if r0 == 0.0:
            roots.append(deltas[j])
            continue
        if r0 * r1 < 0.0:
            a, b = deltas[j], deltas[j + 1]
            fa = r0
            for _ in range(100):
                c = 0.5 * (a + b)
                fc = _pattern_residual(params, pattern, c)[2]
                if fc == 0.0 or (b - a) < 1e-15:
                    a = b = c
                    break
                if fa * fc < 0.0:
                    b = c
                else:
                    a, fa = c, fc
            roots.append(0.5 * (a + b))
    if resids and resids[-1] == 0.0:
        roots.append(deltas[-1])

    out = []
    for d in roots:
        m, _, _ = _pattern_residual(params, pattern, d)
        out.append(tuple(m))
    return out


def g_ab(a: float, b: float, x: float, p: int = 3) -> float:
    """Narrow-branch profile exponent as a function of the scaled shift x."""
    if not 0.0 < a < 1.0:
        raise ValueError(f"a must be in (0, 1), got {a}")
    if b < 1.0:
        raise ValueError(f"b must be >= 1, got {b}")
    return 0.5 * math.log1p(-a) + 0.5 * math.log(p - 1) + ((p - 1) / (p - 2) - b / a) * x * x


def f_ab(a: float, b: float, x: float) -> float:
    """Wide-branch profile exponent as a function of the scaled shift x."""
    if not 0.0 < a < 1.0:
        raise ValueError(f"a must be in (0, 1), got {a}")
    if b < 1.0:
        raise ValueError(f"b must be >= 1, got {b}")
    return (
        0.5 * math.log1p(-a)
        - (2 * b / a) * x * x
        + x * x
        + x * math.sqrt(1 + x * x)
        + math.asinh(x)
    )


def appendix_diagnostics(a: float, b: float, p: int = 3) -> dict[str, float]:
    """Stationary structure of the two profile exponents g_ab and f_ab.

    Returns x_star (the nonnegative zero of g_ab, NaN when none exists),
    x_max (the unique maximizer of f_ab) and value_at_max (its maximum,
    which is <= 0 with equality exactly at b = 1).
    """
    if not 0.0 < a < 1.0:
        raise ValueError(f"a must be in (0, 1), got {a}")
    if b < 1.0:
        raise ValueError(f"b must be >= 1, got {b}")
    den = (p - 1) / (p - 2) - b / a
    num = -0.5 * (math.log1p(-a) + math.log(p - 1))
    if den != 0.0 and num / den >= 0.0:
        x_star = math.sqrt(num / den)
    else:
        x_star = math.nan
    x_max = a / (2 * math.sqrt(b * (b - a)))
    value_at_max = 0.5 * math.log(b * (1 - a) / (b - a))
    return {"x_star": x_star, "x_max": x_max, "value_at_max": value_at_max}
