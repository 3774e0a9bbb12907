"""Mittag-Leffler functions E_{beta,gamma}(z) for complex arguments.

Three complementary evaluation routes are provided:

* ``ml_series``: compensated Taylor summation with reciprocal-gamma terms.
  Reliable while the growth scale |z|**(1/beta) stays small; the dispatch
  radius below keeps the summation's cancellation under control.
* ``ml_split``: residue-plus-branch-cut form of the inverse Laplace
  transform for arguments on the ray z = alpha * (-i*t)**beta.  The pure
  phase factor exp(alpha**(1/beta) * (-i) * t) carries the oscillation and
  the cut integral along the negative axis carries the algebraic decay.
* ``_ml_contour``: numerical Bromwich inversion on a parabolic contour,
  uniformly valid in the argument plane; used by ``ml_global`` outside the
  series radius and as a fallback when the cut integrand is ill-placed.

``ml_linear_batch`` evaluates E_{beta,gamma}(c * t**beta) for several
(c, gamma) pairs on a shared time grid; the costly exponential factor of
the cut integral depends only on the quadrature nodes and the times, so it
is computed once and reused across pairs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import rgamma

from .config import DEFAULT_CONFIG, EvalConfig
from .errors import (
    BranchDomain,
    InvalidOrder,
    InvalidParams,
    NonConvergence,
    QuadratureFailure,
)

__all__ = [
    "MLOrder",
    "ml_series",
    "ml_split",
    "ml_global",
    "ml_time_derivative",
    "ml_linear_batch",
    "series_radius",
]

# Decay budget of the cut integral: e^{-45} ~ 3e-20 truncation.
_EFOLDS = 45.0
# Geometric panel ratio resolving the x**((1-gamma)/beta) endpoint behavior.
_HEAD_RATIO = 1.9
# Tail panels advance ~5 e-folds of the exponential factor each.
_TAIL_EFOLDS = 5.0
# Trapezoid points per half-contour of the parabolic Bromwich inversion.
_CONTOUR_NODES = 300
# Minimum angular distance of a cut-integrand root from the positive axis
# before the quadrature refuses (the two roots sit at arg(c) +- beta*pi).
_MIN_ROOT_ANGLE = 5e-3
# Below this angle the shared-mesh batch evaluator switches the affected
# coefficient to the contour route instead of refining panels further.
_BATCH_CONTOUR_ANGLE = 2e-2
# Root angles below this get extra zoom panels around |c| in the mesh.
_ZOOM_ANGLE = 0.45

_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


@dataclass(frozen=True)
class MLOrder:
    """Order pair (beta, gamma) of the two-parameter Mittag-Leffler function."""

    beta: float
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta) and 0.0 < self.beta <= 1.0):
            raise InvalidOrder(f"beta must lie in (0, 1], got {self.beta!r}")
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise InvalidOrder(f"gamma must be positive, got {self.gamma!r}")


def series_radius(beta: float) -> float:
    """Dispatch radius of the Taylor series.

    The summation loses roughly 0.434 * |z|**(1/beta) digits to
    cancellation, so the admissible |z| shrinks with beta; nine e-folds of
    growth keep the relative error near 1e-11 in double precision.
    """
    return min(5.0, 9.0**beta)


def _check_finite(z: complex, what: str = "argument") -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidParams(f"{what} must be finite, got {z!r}")
    return z


def _ensure_value(val: complex, context: str) -> complex:
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise NonConvergence(f"{context} produced a non-finite value")
    return val


def ml_series(order: MLOrder, z: complex, cfg: EvalConfig = DEFAULT_CONFIG) -> complex:
    """Taylor series sum_j z**j / Gamma(beta*j + gamma).

    Compensated (Neumaier) summation; reciprocal-gamma term evaluation
    underflows to zero for huge denominators instead of overflowing.
    Intended for |z| <= series_radius(beta); larger arguments either lose
    accuracy to cancellation or fail to converge within ``cfg.max_terms``.
    """
    z = _check_finite(z)
    beta, gamma = order.beta, order.gamma
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    zp = 1.0 + 0.0j
    small_run = 0
    for j in range(cfg.max_terms):
        term = zp * complex(rgamma(beta * j + gamma))
        # Neumaier update keeps the rounding error of the running sum.
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        zp *= z
        if abs(zp) > 1e280:
            raise NonConvergence(
                f"series terms exceed double range for |z|={abs(z):.3g}, beta={beta}"
            )
        if abs(term) <= 1e-16 * (1.0 + abs(total)) + 0.01 * cfg.abs_tol:
            small_run += 1
            if small_run >= 3:
                return _ensure_value(total, "ml_series")
        else:
            small_run = 0
    raise NonConvergence(
        f"series did not converge in {cfg.max_terms} terms for |z|={abs(z):.3g}"
    )


def _gauss_rule(per: int) -> tuple[np.ndarray, np.ndarray]:
    rule = _LEGGAUSS_CACHE.get(per)
    if rule is None:
        rule = leggauss(per)
        _LEGGAUSS_CACHE[per] = rule
    return rule


def _cut_roots(beta: float, c: complex) -> tuple[complex, complex]:
    """Roots of x**2 - 2*c*cos(beta*pi)*x + c**2, i.e. c*exp(+-i*beta*pi)."""
    return c * cmath.exp(1j * beta * math.pi), c * cmath.exp(-1j * beta * math.pi)


def _min_root_angle(beta: float, cs: Sequence[complex]) -> float:
    """Smallest |arg(root)| over the cut-integrand roots of all coefficients."""
    d = math.inf
    for c in cs:
        for r in _cut_roots(beta, c):
            d = min(d, abs(cmath.phase(r)))
    return d


def _cut_mesh(
    beta: float,
    t_lo: float,
    t_hi: float,
    cs: Sequence[complex],
    cfg: EvalConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre mesh in x = r**beta for the branch-cut integral.

    The integrand carries exp(-x**(1/beta) * t) times a rational factor
    whose roots sit at c*exp(+-i*beta*pi).  Geometric head panels resolve
    the algebraic endpoint behavior, e-fold-budgeted tail panels track the
    exponential over the whole [t_lo, t_hi] range, and zoom panels are
    inserted around |c| whenever a root approaches the integration axis.
    Returns (nodes, weights, nodes**(1/beta)).
    """
    if not (0.0 < t_lo <= t_hi):
        raise InvalidParams("cut mesh needs 0 < t_lo <= t_hi")
    r_hi = min(_EFOLDS / t_lo, cfg.quad_cutoff)
    x_hi = r_hi**beta
    x_break = min((1.0 / t_hi) ** beta, x_hi)
    x_lo = 1e-18

    edges = [x_lo]
    while edges[-1] < x_break:
        edges.append(edges[-1] * _HEAD_RATIO)
    r_tail = 1.0 + _TAIL_EFOLDS * beta / _EFOLDS
    while edges[-1] < x_hi:
        edges.append(edges[-1] * r_tail)
    edge_arr = [np.asarray(edges)]

    d_min = _min_root_angle(beta, cs)
    if d_min < _ZOOM_ANGLE:
        if d_min < _MIN_ROOT_ANGLE:
            raise QuadratureFailure(
                "cut-integrand root within "
                f"{d_min:.2e} rad of the positive axis; refine budget exceeded"
            )
        ratio = math.exp(max(d_min, 0.02) / 3.0)
        for ac in sorted({abs(c) for c in cs}):
            lo = max(ac * math.exp(-1.5), x_lo)
            hi = min(ac * math.exp(1.5), x_hi)
            if lo < hi:
                count = int(math.ceil(math.log(hi / lo) / math.log(ratio))) + 1
                edge_arr.append(np.geomspace(lo, hi, count + 1))
    all_edges = np.unique(np.concatenate(edge_arr))
    all_edges = all_edges[(all_edges >= x_lo) & (all_edges <= max(x_hi, x_lo * 2))]

    xg, wg = _gauss_rule(cfg.quad_points)
    a = all_edges[:-1]
    b = all_edges[1:]
    xm = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * xg[None, :]).ravel()
    wm = (0.5 * (b - a)[:, None] * wg[None, :]).ravel()
    return xm, wm, xm ** (1.0 / beta)


def _cut_weight_vector(
    beta: float, gamma: float, c: complex, xm: np.ndarray, wm: np.ndarray
) -> np.ndarray:
    """Quadrature weights of the branch-cut integral for one (c, gamma)."""
    s1 = math.sin(math.pi * (1.0 + beta - gamma))
    s2 = math.sin(math.pi * (1.0 - gamma))
    r1, r2 = _cut_roots(beta, c)
    rational = (c * s1 - xm * s2) / ((xm - r1) * (xm - r2))
    return -wm * (xm ** ((1.0 - gamma) / beta)) * rational / (beta * math.pi)


def _has_residue(beta: float, c: complex) -> bool:
    return abs(cmath.phase(c)) < beta * math.pi - 1e-13


def _residue_factor(beta: float, gamma: float, c: complex) -> tuple[complex, complex]:
    """Pole c**(1/beta) and prefactor of the residue exp(pole*t)*pref."""
    pole = c ** (1.0 / beta)
    return pole, pole ** (1.0 - gamma) / beta


def _ml_contour(
    beta: float, gamma: float, z: complex, cfg: EvalConfig
) -> complex:
    """Bromwich inversion of s**(beta-gamma) / (s**beta - z) on a parabola.

    Midpoint trapezoid on s = mu*(1+i*u)**2; the pole z**(1/beta), when it
    exists on the principal sheet, is either enclosed (and its residue
    added) or left outside, decided by its position relative to the
    contour.  Marginal placements move mu instead.
    """
    z = complex(z)
    pole = None
    if abs(cmath.phase(z)) < beta * math.pi - 1e-13:
        pole = z ** (1.0 / beta)
    mu = 3.0
    include = False
    if pole is not None:
        rho = abs(pole)
        phi = abs(cmath.phase(pole))
        x_rel = math.sqrt(rho / mu) * math.cos(phi / 2.0)
        if 0.7 < x_rel < 1.4:
            # Move the contour so the pole is clearly inside or outside.
            mu_try = rho * math.cos(phi / 2.0) ** 2 / 4.0
            mu = mu_try if mu_try > 0.05 else rho * math.cos(phi / 2.0) ** 2 / 0.25
        include = math.sqrt(rho / mu) * math.cos(phi / 2.0) > 1.0

    n = _CONTOUR_NODES
    h = 2.0 * math.sqrt(1.0 + 37.0 / mu) / n
    u = (np.arange(n) + 0.5) * h
    u = np.concatenate([-u[::-1], u])
    s = mu * (1.0 + 1j * u) ** 2
    ds = mu * 2j * (1.0 + 1j * u)
    vals = np.exp(s) * s ** (beta - gamma) / (s**beta - z) * ds
    total = complex(np.sum(vals)) * h / (2j * math.pi)
    if include:
        assert pole is not None
        if pole.real > 700.0:
            raise NonConvergence(
                f"residue exp({pole.real:.3g}) exceeds double range"
            )
        total += cmath.exp(pole) * pole ** (1.0 - gamma) / beta
    return _ensure_value(total, "contour inversion")


def ml_global(order: MLOrder, z: complex, cfg: EvalConfig = DEFAULT_CONFIG) -> complex:
    """Uniformly valid evaluation of E_{beta,gamma}(z).

    Dispatch: exact exponential for (1, 1); Taylor series inside
    ``series_radius(beta)``; parabolic-contour inversion outside.  The
    regime choice depends only on (order, z), never on intermediate
    values, so results are deterministic for fixed inputs.
    """
    z = _check_finite(z)
    beta, gamma = order.beta, order.gamma
    if z == 0:
        return complex(rgamma(gamma))
    if beta == 1.0 and gamma == 1.0:
        if z.real > 709.0:
            raise NonConvergence("exp overflow: Re z too large")
        return cmath.exp(z)
    if abs(z) <= series_radius(beta):
        return ml_series(order, z, cfg)
    return _ml_contour(beta, gamma, z, cfg)


def _split_parts(
    beta: float, alpha: float, t: float, cfg: EvalConfig
) -> tuple[complex, complex]:
    """Oscillation and decay parts of E_beta(alpha * (-i*t)**beta).

    Returns (residue_term, cut_term); their sum is the function value.
    """
    c = alpha * (-1j) ** beta
    if alpha < 0.0:
        # The residue needs |arg c| < beta*pi, i.e. beta > 2/3 here; below
        # that the principal-branch power alpha**(1/beta) has left the
        # first sheet and the representation does not apply.
        if not _has_residue(beta, c):
            raise BranchDomain(
                "negative eigenvalue with beta <= 2/3: principal branch leaves "
                "the first sheet; use ml_global instead"
            )
    if _min_root_angle(beta, [c]) < _MIN_ROOT_ANGLE:
        raise QuadratureFailure(
            "cut-integrand root too close to the positive axis for the "
            "split quadrature; use ml_global instead"
        )
    pole, pref = _residue_factor(beta, 1.0, c)
    osc = cmath.exp(pole * t) * pref
    xm, wm, y = _cut_mesh(beta, t, t, [c], cfg)
    w = _cut_weight_vector(beta, 1.0, c, xm, wm)
    cut = complex(np.exp(-y * t) @ w)
    return osc, cut


def ml_split(
    beta: float, alpha: float, t: float, cfg: EvalConfig = DEFAULT_CONFIG
) -> complex:
    """Residue-plus-cut evaluation of E_beta(alpha * (-i*t)**beta).

    ``alpha`` is a real eigenvalue; the argument of the Mittag-Leffler
    function is alpha * (-i*t)**beta under principal branches.  At beta=1
    the cut vanishes analytically and the value is exactly exp(-i*alpha*t).

    Raises BranchDomain for alpha < 0 with beta <= 2/3 (no principal-sheet
    residue) and QuadratureFailure when the cut integrand's roots crowd
    the integration axis.
    """
    if not (math.isfinite(beta) and 0.0 < beta <= 1.0):
        raise InvalidOrder(f"beta must lie in (0, 1], got {beta!r}")
    if not (math.isfinite(alpha) and alpha != 0.0):
        raise InvalidParams(f"alpha must be real and nonzero, got {alpha!r}")
    if not (math.isfinite(t) and t > 0.0):
        raise InvalidParams(f"t must be positive, got {t!r}")
    if beta == 1.0:
        return cmath.exp(-1j * alpha * t)
    osc, cut = _split_parts(beta, alpha, t, cfg)
    return _ensure_value(osc + cut, "ml_split")


def ml_time_derivative(
    beta: float, c: complex, t: float, cfg: EvalConfig = DEFAULT_CONFIG
) -> complex:
    """d/dt E_beta(c * t**beta) = c * t**(beta-1) * E_{beta,beta}(c * t**beta).

    For beta < 1 the magnitude diverges as t -> 0+; that is the correct
    behavior of the derivative, not an error.
    """
    if not (math.isfinite(beta) and 0.0 < beta <= 1.0):
        raise InvalidOrder(f"beta must lie in (0, 1], got {beta!r}")
    if not (math.isfinite(t) and t > 0.0):
        raise InvalidParams(f"t must be positive, got {t!r}")
    c = _check_finite(c, "coefficient")
    if c == 0:
        return 0.0 + 0.0j
    val = ml_global(MLOrder(beta, beta), c * t**beta, cfg)
    return _ensure_value(c * t ** (beta - 1.0) * val, "ml_time_derivative")


def _series_coefficients(
    beta: float, gamma: float, z_max: float, cfg: EvalConfig
) -> np.ndarray:
    """Taylor coefficients rgamma(beta*j + gamma) truncated for |z| <= z_max."""
    coeffs = []
    zp = 1.0
    small_run = 0
    for j in range(cfg.max_terms):
        a_j = float(rgamma(beta * j + gamma))
        coeffs.append(a_j)
        bound = abs(a_j) * zp
        zp *= z_max
        if zp > 1e280:
            raise NonConvergence("batch series bound exceeded double range")
        if bound <= 1e-18:
            small_run += 1
            if small_run >= 3:
                return np.asarray(coeffs)
        else:
            small_run = 0
    raise NonConvergence(
        f"batch series truncation not reached in {cfg.max_terms} terms"
    )


def _horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.full(z.shape, coeffs[-1], dtype=complex)
    for a_j in coeffs[-2::-1]:
        out *= z
        out += a_j
    return out


def ml_linear_batch(
    beta: float,
    pairs: Sequence[tuple[complex, float]],
    ts: np.ndarray,
    cfg: EvalConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """E_{beta,gamma}(c * t**beta) for each (c, gamma) pair over a time grid.

    Times must be nonnegative; t = 0 rows evaluate to 1/Gamma(gamma).
    Small arguments go through vectorized Taylor summation; the rest share
    one branch-cut mesh whose exponential factor exp(-x**(1/beta) * t) is
    computed once per time chunk and reused for every pair.  Coefficients
    whose cut roots fall too close to the integration axis are evaluated
    by the contour route point by point instead.

    Returns a complex array of shape (len(pairs), len(ts)).
    """
    if not (math.isfinite(beta) and 0.0 < beta <= 1.0):
        raise InvalidOrder(f"beta must lie in (0, 1], got {beta!r}")
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1:
        raise InvalidParams("ts must be a one-dimensional array")
    if ts.size and (not np.all(np.isfinite(ts)) or ts.min() < 0.0):
        raise InvalidParams("ts must be finite and nonnegative")
    out = np.empty((len(pairs), ts.size), dtype=complex)
    if ts.size == 0:
        return out

    if beta == 1.0:
        for i, (c, gamma) in enumerate(pairs):
            order = MLOrder(1.0, gamma)
            if gamma == 1.0:
                out[i] = np.exp(np.asarray(c) * ts)
            else:
                out[i] = [ml_global(order, c * t, cfg) for t in ts]
        _ensure_batch(out)
        return out

    radius = series_radius(beta)
    c_max = max((abs(c) for c, _ in pairs), default=0.0)
    if c_max == 0.0:
        for i, (_, gamma) in enumerate(pairs):
            out[i] = complex(rgamma(gamma))
        return out
    tb = ts**beta
    series_mask = c_max * tb <= radius
    mesh_mask = ~series_mask

    for i, (c, gamma) in enumerate(pairs):
        if np.any(series_mask):
            coeffs = _series_coefficients(beta, gamma, radius, cfg)
            out[i, series_mask] = _horner(coeffs, c * tb[series_mask])

    if np.any(mesh_mask):
        t_mesh = ts[mesh_mask]
        t_lo = float(t_mesh.min())
        t_hi = float(t_mesh.max())
        mesh_pairs = []
        contour_pairs = []
        for i, (c, gamma) in enumerate(pairs):
            if c != 0 and _min_root_angle(beta, [c]) < _BATCH_CONTOUR_ANGLE:
                contour_pairs.append((i, c, gamma))
            else:
                mesh_pairs.append((i, c, gamma))
        if mesh_pairs:
            cs = [c for _, c, _ in mesh_pairs if c != 0]
            xm, wm, y = _cut_mesh(beta, t_lo, t_hi, cs, cfg)
            weight_mat = np.stack(
                [
                    _cut_weight_vector(beta, gamma, c, xm, wm)
                    if c != 0
                    else np.zeros_like(xm, dtype=complex)
                    for _, c, gamma in mesh_pairs
                ],
                axis=1,
            )
            vals = np.empty((t_mesh.size, len(mesh_pairs)), dtype=complex)
            chunk = max(1, int(4e6 // max(1, xm.size)))
            for lo in range(0, t_mesh.size, chunk):
                hi = min(lo + chunk, t_mesh.size)
                expm = np.exp(-np.outer(t_mesh[lo:hi], y))
                vals[lo:hi] = expm @ weight_mat
            for k, (i, c, gamma) in enumerate(mesh_pairs):
                v = vals[:, k]
                if c == 0:
                    v = np.full(t_mesh.size, complex(rgamma(gamma)))
                else:
                    if _has_residue(beta, c):
                        pole, pref = _residue_factor(beta, gamma, c)
                        v = v + np.exp(pole * t_mesh) * pref
                    v = v * t_mesh ** (1.0 - gamma)
                out[i, mesh_mask] = v
        for i, c, gamma in contour_pairs:
            order = MLOrder(beta, gamma)
            out[i, mesh_mask] = [
                _ml_contour(beta, gamma, c * t**beta, cfg) for t in t_mesh
            ]

    _ensure_batch(out)
    return out


def _ensure_batch(out: np.ndarray) -> None:
    if not np.all(np.isfinite(out.real)) or not np.all(np.isfinite(out.imag)):
        raise NonConvergence("batch Mittag-Leffler evaluation produced non-finite values")
