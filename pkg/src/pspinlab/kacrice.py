"""Finite-N cross-examination of the landscape: build actual random polynomials
on small spheres, count their critical points directly, and compare against
the exact expected-count integral.

The random part is a symmetrized Gaussian p-tensor scaled so that the field
has covariance <sigma, sigma'>^p / (2n) on the unit sphere of R^n; spikes sit
on the first r coordinate axes.  At n = 2 the critical points of the induced
trigonometric polynomial are found exhaustively by a dense scan of the circle;
for n >= 3 a budgeted multistart Riemannian Newton search is best-effort.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .core import ModelParams, s_func, t_func
from .rmt import MCEstimate
from .spikes import spike_eigenvalues

__all__ = [
    "SpikedPolynomial",
    "CriticalPoint",
    "build_polynomial",
    "find_critical_points",
    "count_expected",
    "kac_rice_eval",
    "c_constant",
    "sphere_surface",
]

_LETTERS = "abcdefgh"


def _seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, (tuple, list)):
        return tuple(int(v) for v in seed)
    return (int(seed),)


@dataclass(frozen=True, eq=False)
class SpikedPolynomial:
    """A sampled landscape on the unit sphere of R^n.

    tensor is the symmetrized Gaussian coupling already scaled by 1/sqrt(2n);
    spike i acts along coordinate axis i with strength lam_i and degree k_i.
    """

    params: ModelParams
    n: int
    seed: tuple[int, ...]
    tensor: np.ndarray


def build_polynomial(params: ModelParams, n: int, seed) -> SpikedPolynomial:
    """Sample the Gaussian coupling tensor for a landscape in dimension n."""
    if params.r > n:
        raise ValueError(f"rank r = {params.r} exceeds dimension n = {n}")
    key = _seed_tuple(seed)
    rng = np.random.default_rng(key)
    p = params.p
    raw = rng.normal(size=(n,) * p)
    sym = np.zeros_like(raw)
    for perm in itertools.permutations(range(p)):
        sym += raw.transpose(perm)
    sym /= math.factorial(p) * math.sqrt(2.0 * n)
    return SpikedPolynomial(params=params, n=n, seed=key, tensor=sym)


@dataclass(frozen=True)
class CriticalPoint:
    """One critical point: location, value, spike overlaps, Morse data.

    index counts strictly negative directions of the tangent Hessian;
    degenerate marks eigenvalues inside the numerical zero band, and such
    points are excluded from index-resolved counts downstream.
    """

    position: tuple[float, ...]
    value: float
    overlaps: tuple[float, ...]
    index: int
    residual: float
    degenerate: bool


# ---------------------------------------------------------------------------
# pointwise evaluation

def _tensor_value(t: np.ndarray, sigma: np.ndarray) -> float:
    p = t.ndim
    sub = _LETTERS[:p] + "," + ",".join(_LETTERS[i] for i in range(p)) + "->"
    return float(np.einsum(sub, t, *([sigma] * p)))


def _tensor_grad(t: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    p = t.ndim
    sub = _LETTERS[:p] + "," + ",".join(_LETTERS[i] for i in range(1, p)) + f"->{_LETTERS[0]}"
    return p * np.einsum(sub, t, *([sigma] * (p - 1)))


def _tensor_hess(t: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    p = t.ndim
    if p == 2:
        return 2.0 * t
    sub = (
        _LETTERS[:p]
        + ","
        + ",".join(_LETTERS[i] for i in range(2, p))
        + f"->{_LETTERS[0]}{_LETTERS[1]}"
    )
    return p * (p - 1) * np.einsum(sub, t, *([sigma] * (p - 2)))


def _value(poly: SpikedPolynomial, sigma: np.ndarray) -> float:
    v = _tensor_value(poly.tensor, sigma)
    for i, (lam_i, k_i) in enumerate(zip(poly.params.lam, poly.params.k)):
        v += lam_i * sigma[i] ** k_i
    return v


def _grad(poly: SpikedPolynomial, sigma: np.ndarray) -> np.ndarray:
    g = _tensor_grad(poly.tensor, sigma)
    for i, (lam_i, k_i) in enumerate(zip(poly.params.lam, poly.params.k)):
        g[i] += lam_i * k_i * sigma[i] ** (k_i - 1)
    return g


def _hess(poly: SpikedPolynomial, sigma: np.ndarray) -> np.ndarray:
    h = _tensor_hess(poly.tensor, sigma)
    for i, (lam_i, k_i) in enumerate(zip(poly.params.lam, poly.params.k)):
        h[i, i] += lam_i * k_i * (k_i - 1) * sigma[i] ** (k_i - 2)
    return h


def _tangent_basis(sigma: np.ndarray) -> np.ndarray:
    n = len(sigma)
    q, _ = np.linalg.qr(np.column_stack([sigma, np.eye(n)]))
    return q[:, 1:n]


def _riemannian_data(poly: SpikedPolynomial, sigma: np.ndarray):
    """Projected gradient, tangent Hessian, and its scale at a point."""
    g = _grad(poly, sigma)
    radial = float(np.dot(sigma, g))
    g_tan = g - radial * sigma
    b = _tangent_basis(sigma)
    h = b.T @ _hess(poly, sigma) @ b - radial * np.eye(len(sigma) - 1)
    return g_tan, h, b


def _grad_residual(poly: SpikedPolynomial, sigma: np.ndarray) -> float:
    g = _grad(poly, sigma)
    return float(np.linalg.norm(g - np.dot(sigma, g) * sigma))


def _classify_index(h_tan: np.ndarray) -> tuple[int, bool]:
    """Morse index and degeneracy flag with a spectral-norm-relative zero band."""
    ev = np.linalg.eigvalsh(h_tan)
    scale = float(np.max(np.abs(ev))) if len(ev) else 0.0
    band = 1e-8 * max(scale, 1e-12)
    degenerate = bool(np.any(np.abs(ev) <= band))
    index = int(np.sum(ev < -band))
    return index, degenerate


# ---------------------------------------------------------------------------
# exhaustive search on the circle (n = 2)

_CIRCLE_SAMPLES = 100_000


def _circle_derivative(poly: SpikedPolynomial, phi: np.ndarray) -> np.ndarray:
    """d/dphi of the landscape along the unit circle, vectorized."""
    sig = np.vstack([np.cos(phi), np.sin(phi)])
    tan = np.vstack([-np.sin(phi), np.cos(phi)])
    p = poly.params.p
    sub = (
        _LETTERS[:p]
        + ","
        + ",".join(_LETTERS[i] + "z" for i in range(1, p))
        + f"->{_LETTERS[0]}z"
    )
    g = p * np.einsum(sub, poly.tensor, *([sig] * (p - 1)), optimize=True)
    for i, (lam_i, k_i) in enumerate(zip(poly.params.lam, poly.params.k)):
        g[i] += lam_i * k_i * sig[i] ** (k_i - 1)
    return np.sum(g * tan, axis=0)


def _circle_derivative_scalar(poly: SpikedPolynomial, phi: float) -> float:
    sigma = np.array([math.cos(phi), math.sin(phi)])
    tangent = np.array([-math.sin(phi), math.cos(phi)])
    return float(np.dot(_grad(poly, sigma), tangent))


def _find_on_circle(poly: SpikedPolynomial, tol: float) -> list[CriticalPoint]:
    phi = np.linspace(0.0, 2.0 * math.pi, _CIRCLE_SAMPLES, endpoint=False)
    d = _circle_derivative(poly, phi)
    step = 2.0 * math.pi / _CIRCLE_SAMPLES

    points: list[CriticalPoint] = []
    d_next = np.roll(d, -1)
    for j in np.nonzero((d * d_next < 0.0) | (d == 0.0))[0]:
        a, b = phi[j], phi[j] + step
        fa = float(d[j])
        if fa == 0.0:
            root = a
        else:
            fb = float(d_next[j])
            for _ in range(60):
                c = 0.5 * (a + b)
                fc = _circle_derivative_scalar(poly, c)
                if fc == 0.0:
                    a = b = c
                    break
                if fa * fc < 0.0:
                    b, fb = c, fc
                else:
                    a, fa = c, fc
            root = 0.5 * (a + b)
        sigma = np.array([math.cos(root), math.sin(root)])
        g_tan, h_tan, _ = _riemannian_data(poly, sigma)
        index, degenerate = _classify_index(h_tan)
        points.append(
            CriticalPoint(
                position=tuple(sigma),
                value=_value(poly, sigma),
                overlaps=tuple(sigma[: poly.params.r]),
                index=index,
                residual=float(np.linalg.norm(g_tan)),
                degenerate=degenerate,
            )
        )
    points.sort(key=lambda c: (c.value, c.position))
    return points


# ---------------------------------------------------------------------------
# budgeted multistart Newton (n >= 3)

_DEDUP_RADIUS = 1e-6


def _newton_polish(poly: SpikedPolynomial, sigma: np.ndarray, tol: float):
    for _ in range(80):
        g_tan, h_tan, b = _riemannian_data(poly, sigma)
        res = float(np.linalg.norm(g_tan))
        if res <= tol:
            return sigma, res
        rhs = b.T @ g_tan
        try:
            delta = np.linalg.solve(h_tan, -rhs)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(h_tan, -rhs, rcond=None)[0]
        norm = float(np.linalg.norm(delta))
        if norm > 1.0:
            delta *= 1.0 / norm
        step = 1.0
        for _ in range(25):
            cand = sigma + step * (b @ delta)
            cand /= np.linalg.norm(cand)
            if _grad_residual(poly, cand) < res:
                sigma = cand
                break
            step *= 0.5
        else:
            # gradient fallback when the Newton direction stalls
            cand = sigma - 0.1 * g_tan / max(res, 1e-12)
            sigma = cand / np.linalg.norm(cand)
    g_tan, _, _ = _riemannian_data(poly, sigma)
    return sigma, float(np.linalg.norm(g_tan))


def _find_multistart(
    poly: SpikedPolynomial, tol: float, budget: int
) -> list[CriticalPoint]:
    rng = np.random.default_rng(poly.seed + (10_007,))
    n = poly.n
    found: list[np.ndarray] = []
    for _ in range(budget):
        start = rng.normal(size=n)
        start /= np.linalg.norm(start)
        sigma, res = _newton_polish(poly, start, tol)
        if res > tol:
            continue
        fresh = True
        for prev in found:
            cosang = float(np.clip(np.dot(prev, sigma), -1.0, 1.0))
            if math.acos(cosang) < _DEDUP_RADIUS:
                fresh = False
                break
        if fresh:
            found.append(sigma)

    points = []
    for sigma in found:
        g_tan, h_tan, _ = _riemannian_data(poly, sigma)
        index, degenerate = _classify_index(h_tan)
        points.append(
            CriticalPoint(
                position=tuple(sigma),
                value=_value(poly, sigma),
                overlaps=tuple(sigma[: poly.params.r]),
                index=index,
                residual=float(np.linalg.norm(g_tan)),
                degenerate=degenerate,
            )
        )
    points.sort(key=lambda c: (c.value, c.position))
    return points


def find_critical_points(
    poly: SpikedPolynomial, tol: float = 1e-10, budget: int = 200
) -> list[CriticalPoint]:
    """All critical points of the sampled landscape (n = 2: exhaustive dense
    scan of the circle plus bisection; n >= 3: budget-limited multistart
    Newton, best-effort).  Points closer than 1e-6 in geodesic distance are
    merged; antipodes are distinct critical points and are never identified.
    """
    if poly.n == 2:
        return _find_on_circle(poly, tol)
    return _find_multistart(poly, tol, budget)


def _window_ok(value: float, window) -> bool:
    return window is None or (window[0] <= value <= window[1])


def count_expected(
    params: ModelParams,
    n: int,
    trials: int,
    seed: int = 0,
    overlap_windows: Sequence | None = None,
    value_window: tuple[float, float] | None = None,
    which: str | int = "total",
    tol: float = 1e-10,
    budget: int = 200,
) -> MCEstimate:
    """Monte Carlo mean of the exact critical-point count over fresh landscapes.

    which is "total" or a Morse index; index-resolved counts exclude
    degenerate points, whose per-trial mean rides along in extras together
    with the completeness flag (guaranteed only on the circle).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts = np.empty(trials)
    degenerate_counts = np.empty(trials)
    for t in range(trials):
        poly = build_polynomial(params, n, (seed, t))
        pts = find_critical_points(poly, tol=tol, budget=budget)
        c = 0
        dc = 0
        for pt in pts:
            if not all(
                _window_ok(ov, win)
                for ov, win in zip(
                    pt.overlaps, overlap_windows or [None] * params.r
                )
            ):
                continue
            if not _window_ok(pt.value, value_window):
                continue
            if pt.degenerate:
                dc += 1
                if which == "total":
                    c += 1
            elif which == "total" or pt.index == which:
                c += 1
        counts[t] = c
        degenerate_counts[t] = dc
    se = float(np.std(counts, ddof=1)) / math.sqrt(trials) if trials > 1 else math.nan
    extras = {
        "complete": n == 2,
        "mean_degenerate": float(np.mean(degenerate_counts)),
    }
    return MCEstimate(float(np.mean(counts)), se, trials, seed, extras)


# ---------------------------------------------------------------------------
# the exact finite-N expected-count integral

def sphere_surface(dim: int) -> float:
    """Surface measure of the unit sphere S^{dim-1} in R^dim."""
    return float(2.0 * math.exp(0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim)))


def c_constant(n: int, r: int, p: int) -> float:
    """The exact dimensional constant in front of the expected-count integral."""
    return float(
        2.0
        * math.exp(0.5 * (n - 1) * math.log((n - 1) / (2.0 * math.e)) - gammaln(0.5 * (n - r)))
        * math.pi ** (-0.5 * (r - 1))
        * math.sqrt(n / ((p - 1) * math.e * math.pi))
    )


def kac_rice_eval(
    params: ModelParams,
    n: int,
    overlap_windows: Sequence | None = None,
    value_window: tuple[float, float] | None = None,
    inner_trials: int = 2048,
    which: str = "total",
    seed: int = 0,
    batches: int = 8,
    epsrel: float = 1e-4,
) -> MCEstimate:
    """Expected number of critical points (or local maxima) at finite n, by
    adaptive quadrature of the exact expected-count integral.

    The overlap integral runs in angle coordinates m_i = sin(psi_i), which
    absorbs the (1 - alpha) endpoint singularity at n = 2; the conditional
    determinant E|det H| is estimated by common-random-number Monte Carlo
    (the same GOE draws at every quadrature node, so the integrand stays
    smooth).  The standard error comes from rerunning the quadrature on
    disjoint trial batches; trials whose determinant underflows to zero are
    excluded and counted in extras.
    """
    if params.r > n - 1:
        raise ValueError("the expected-count integral needs r <= n - 1")
    if which not in ("total", "max"):
        raise ValueError(f'which must be "total" or "max", got {which!r}')
    if inner_trials < batches:
        raise ValueError("inner_trials must be at least the number of batches")

    r = params.r
    windows = list(overlap_windows) if overlap_windows is not None else [None] * r
    if len(windows) != r:
        raise ValueError(f"need {r} overlap windows, got {len(windows)}")
    psi_ranges = []
    for win in windows:
        lo, hi = (-1.0, 1.0) if win is None else win
        lo, hi = max(lo, -1.0), min(hi, 1.0)
        psi_ranges.append((math.asin(lo), math.asin(hi)))

    lam_sum = sum(params.lam)
    if value_window is None:
        value_window = (-lam_sum - 9.0, lam_sum + 9.0)

    m_dim = n - 1
    root = math.sqrt(n / (n - 1))
    underflow = [0]

    # one GOE(n-1) draw per inner trial, shared across all quadrature nodes
    def draw(t: int) -> np.ndarray:
        rng = np.random.default_rng((seed, t))
        a = rng.normal(size=(m_dim, m_dim))
        return (a + a.T) / math.sqrt(2.0 * m_dim)

    all_ws = np.stack([draw(t) for t in range(inner_trials)])

    def batch_integral(ws: np.ndarray) -> float:
        def integrand(*args) -> float:
            x = args[0]
            psis = args[1:]
            m = [math.sin(ps) for ps in psis]
            alpha = sum(v * v for v in m)
            if alpha >= 1.0 - 1e-13:
                return 0.0
            s = s_func(params, m, x)
            jac = 1.0
            for ps in psis:
                jac *= math.cos(ps)
            dens = (1.0 - alpha) ** (-0.5 * (r + 2)) * math.exp(n * s) * jac
            if dens == 0.0:
                return 0.0
            gam = spike_eigenvalues(params, m)
            shift = np.zeros(m_dim)
            shift[: len(gam)] = gam
            shift = root * (shift - t_func(params, m, x))
            hs = ws.copy()
            hs[:, np.arange(m_dim), np.arange(m_dim)] += shift
            dets = np.abs(np.linalg.det(hs)) if m_dim > 1 else np.abs(hs[:, 0, 0])
            if which == "max":
                if m_dim > 1:
                    top = np.linalg.eigvalsh(hs)[:, -1]
                else:
                    top = hs[:, 0, 0]
                dets = dets * (top <= 0.0)
            zero = dets == 0.0
            if which != "max" and np.any(zero):
                underflow[0] += int(np.sum(zero))
                keep = dets[~zero]
                if len(keep) == 0:
                    return 0.0
                mean_det = float(np.mean(keep))
            else:
                mean_det = float(np.mean(dets))
            return dens * mean_det

        ranges = [value_window] + psi_ranges
        val, _ = integrate.nquad(
            integrand,
            ranges,
            opts={"epsrel": epsrel, "epsabs": 1e-12, "limit": 200},
        )
        return c_constant(n, r, params.p) * val

    per_batch = inner_trials // batches
    vals = []
    for b in range(batches):
        ws = all_ws[b * per_batch : (b + 1) * per_batch]
        vals.append(batch_integral(ws))
    vals = np.array(vals)
    value = float(np.mean(vals))
    se = float(np.std(vals, ddof=1)) / math.sqrt(batches) if batches > 1 else math.nan
    extras = {"underflow_trials": underflow[0], "batches": batches}
    return MCEstimate(value, se, inner_trials, seed, extras)
