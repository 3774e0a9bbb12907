"""Speed-limit bounds on the qubit population dynamics.

The geometric bound compares the Bures-angle displacement sin^2(B) of the
reduced state over [0, tau] against time-averaged norms of its rate of
change.  Because the reduced state stays diagonal, each Schatten norm of
the derivative is an explicit multiple of |d rho_ee/dt|, so the exact
time average is the total variation of the excited-state population
divided by tau.  The total variation is assembled from the population
values at the extrema (located by sign changes of the rate and refined
by a bracketing secant iteration), which keeps the bound free of
quadrature error: within a monotone segment the integral of |rate| is
the endpoint difference.

``qsl_ratio_formula`` recomputes the same ratio through an independent
route: a closed-form numerator from the two eigenfactor values at tau
and a panelwise Gauss-Legendre quadrature of |rate| for the denominator.
``qsl_mlmt`` bounds the time a state needs to reach the relative purity
observed a window tau_D later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma as gamma_fn

from .config import DEFAULT_CONFIG, EvalConfig
from .errors import InvalidParams, NotPure
from .jcmodel import JCParams, QubitDynamics, Trajectory
from .mlfun import MLOrder, ml_global

__all__ = [
    "QslPoint",
    "MLMTResult",
    "schatten_norm",
    "bures_overlap_term",
    "qsl_point",
    "qsl_ml",
    "qsl_mlmt",
    "qsl_ratio_formula",
]

_SQRT2 = math.sqrt(2.0)
# Grid nodes per radian of the population cycle when bracketing extrema.
_NODES_PER_RADIAN = 2.55
_MIN_GRID = 600
_MAX_GRID = 60000


@dataclass(frozen=True)
class QslPoint:
    """Speed-limit summary of one (parameters, tau) evaluation.

    ``ratio_op`` is the tightest bound ratio (operator norm);
    ``ratio_max`` is the best ratio over the three norms, which the
    norm ordering makes coincide with the operator one.  Ratios are 0 by
    convention when the state never moves (zero coupling).
    """

    tau: float
    sin2_bures: float
    lambda_tr: float
    lambda_hs: float
    lambda_op: float
    ratio_op: float
    ratio_max: float

    def __post_init__(self) -> None:
        for name in ("tau", "sin2_bures", "lambda_tr", "lambda_hs",
                     "lambda_op", "ratio_op", "ratio_max"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidParams("speed-limit fields must be finite numbers")
            object.__setattr__(self, name, float(v))
        if self.tau <= 0.0:
            raise InvalidParams(f"tau must be positive, got {self.tau!r}")
        if not (-1e-12 <= self.sin2_bures <= 1.0 + 1e-12):
            raise InvalidParams(f"sin2_bures outside [0, 1]: {self.sin2_bures!r}")
        slack = 1e-9 * (1.0 + self.lambda_tr)
        if not (0.0 <= self.lambda_op <= self.lambda_hs + slack):
            raise InvalidParams("norm ordering violated: op above hs")
        if not (self.lambda_hs <= self.lambda_tr + slack):
            raise InvalidParams("norm ordering violated: hs above tr")
        for name, r in (("ratio_op", self.ratio_op), ("ratio_max", self.ratio_max)):
            if not (0.0 <= r <= 1.0 + 1e-9):
                raise InvalidParams(f"{name} outside [0, 1]: {r!r}")


@dataclass(frozen=True)
class MLMTResult:
    """Window bound: minimal time to realize the observed purity change."""

    tau_qsl: float
    relative_purity: float
    avg_sv: float
    avg_hs: float

    def __post_init__(self) -> None:
        for name in ("tau_qsl", "relative_purity", "avg_sv", "avg_hs"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidParams("window-bound fields must be finite numbers")
            object.__setattr__(self, name, float(v))
        if self.tau_qsl < 0.0:
            raise InvalidParams(f"tau_qsl must be nonnegative, got {self.tau_qsl!r}")
        if self.avg_sv < 0.0 or self.avg_hs < 0.0:
            raise InvalidParams("averaged norms must be nonnegative")


def schatten_norm(matrix: np.ndarray, kind: str) -> float:
    """Schatten norm of a 2x2 matrix: 'tr', 'hs', or 'op'.

    Uses the closed-form singular values of the 2x2 Gram matrix, so no
    iterative factorization is involved.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise InvalidParams(f"matrix must be 2x2, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise InvalidParams("matrix entries must be finite")
    tr_gram = float(np.sum(np.abs(m) ** 2))
    abs_det = abs(complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]))
    if kind == "hs":
        return math.sqrt(tr_gram)
    if kind == "tr":
        return math.sqrt(max(tr_gram + 2.0 * abs_det, 0.0))
    if kind == "op":
        # Largest singular value from the Gram eigenvalues.
        disc = max(tr_gram * tr_gram - 4.0 * abs_det * abs_det, 0.0)
        return math.sqrt(0.5 * (tr_gram + math.sqrt(disc)))
    raise InvalidParams(f"unknown norm kind {kind!r}")


def bures_overlap_term(rho0: np.ndarray, rho_tau: np.ndarray) -> float:
    """sin^2 of the Bures angle from a pure start: |tr(rho0 rho_tau) - 1|."""
    r0 = np.asarray(getattr(rho0, "matrix", rho0), dtype=complex)
    rt = np.asarray(getattr(rho_tau, "matrix", rho_tau), dtype=complex)
    for name, r in (("rho0", r0), ("rho_tau", rt)):
        if r.shape != (2, 2):
            raise InvalidParams(f"{name} must be 2x2, got shape {r.shape}")
        if abs(complex(np.trace(r)) - 1.0) > 1e-10:
            raise InvalidParams(f"{name} must have unit trace")
    purity = float(np.real(np.trace(r0 @ r0)))
    if purity < 1.0 - 1e-10:
        raise NotPure(f"rho0 purity {purity!r} is below the pure-state tolerance")
    return abs(complex(np.trace(r0 @ rt)) - 1.0)


def _qsl_grid(omega: float, t_start: float, t_end: float) -> np.ndarray:
    """Sampling grid bracketing every extremum of the population.

    Node count tracks the cycle rate; a geometric head resolves the
    short-time power-law layer when the window starts at 0.
    """
    span = t_end - t_start
    count = int(min(max(math.ceil(_NODES_PER_RADIAN * omega * span), _MIN_GRID), _MAX_GRID))
    body = np.linspace(t_start, t_end, count)
    if t_start > 0.0:
        return body
    head = []
    x = t_end * 1e-9
    while x < body[1]:
        head.append(x)
        x *= 3.0
    return np.unique(np.concatenate([body, np.asarray(head)]))


def _refine_crossings(
    engine: QubitDynamics,
    lo: np.ndarray,
    hi: np.ndarray,
    f_lo: np.ndarray,
    f_hi: np.ndarray,
) -> np.ndarray:
    """Bracketed secant (Illinois) zero search on the population rate.

    All brackets advance together; each iteration costs one vectorized
    rate evaluation.  Stops when every bracket has shrunk by 1e-8
    relative to its initial width.
    """
    a = lo.astype(float).copy()
    b = hi.astype(float).copy()
    fa = f_lo.astype(float).copy()
    fb = f_hi.astype(float).copy()
    width0 = np.abs(b - a)
    live = width0 > 0.0
    for _ in range(40):
        if not np.any(live):
            break
        denom = fb - fa
        safe = live & (denom != 0.0)
        m = np.where(safe, (a * fb - b * fa) / np.where(denom == 0.0, 1.0, denom), 0.5 * (a + b))
        inside = (m > np.minimum(a, b)) & (m < np.maximum(a, b))
        m = np.where(inside, m, 0.5 * (a + b))
        fm = np.zeros_like(m)
        fm[live] = engine.population_rate(m[live])
        exact = live & (fm == 0.0)
        same_side = fm * fb > 0.0
        keep_a = live & ~same_side & ~exact
        halve = live & same_side & ~exact
        # Illinois step: replace the repeated endpoint's value by half.
        a = np.where(keep_a, b, a)
        fa = np.where(keep_a, fb, np.where(halve, 0.5 * fa, fa))
        b = np.where(live & ~exact, m, b)
        fb = np.where(live & ~exact, fm, fb)
        a = np.where(exact, m, a)
        b = np.where(exact, m, b)
        live = live & (np.abs(b - a) > 1e-8 * width0) & ~exact
    return 0.5 * (a + b)


def _extrema_times(
    engine: QubitDynamics, times: np.ndarray, rates: np.ndarray
) -> np.ndarray:
    """Interior times where the population rate changes sign."""
    # Node 0 carries the conventional rate 0; skip it in sign logic.
    t = times[1:]
    f = rates[1:]
    exact = np.flatnonzero(f[:-1] == 0.0)
    prod = f[:-1] * f[1:]
    idx = np.flatnonzero(prod < 0.0)
    pieces = []
    if idx.size:
        pieces.append(
            _refine_crossings(engine, t[idx], t[idx + 1], f[idx], f[idx + 1])
        )
    if exact.size:
        pieces.append(t[exact])
    if not pieces:
        return np.empty(0)
    zs = np.concatenate(pieces)
    zs = zs[(zs > times[0]) & (zs < times[-1])]
    return np.unique(zs)


def _total_variation(
    engine: QubitDynamics,
    times: np.ndarray,
    rho_ee: np.ndarray,
    rates: np.ndarray,
) -> tuple[float, int]:
    """Exact total variation of rho_ee over the sampled window.

    Between consecutive extrema the population is monotone, so the
    variation of each segment is the difference of its endpoint values.
    Returns (variation, number of extrema).
    """
    zs = _extrema_times(engine, times, rates)
    if zs.size:
        rho_z, _, _ = engine.population_sample(zs)
        seq = np.concatenate([[rho_ee[0]], rho_z, [rho_ee[-1]]])
    else:
        seq = np.array([rho_ee[0], rho_ee[-1]])
    return float(np.sum(np.abs(np.diff(seq)))), int(zs.size)


def _assert_diagonal_norm_identities(rates: np.ndarray) -> None:
    """Closed-form Schatten values of diag(-r, r) against the definitions."""
    for r in rates:
        m = np.array([[-r, 0.0], [0.0, r]])
        assert abs(schatten_norm(m, "op") - abs(r)) <= 1e-12 * (1.0 + abs(r))
        assert abs(schatten_norm(m, "hs") - _SQRT2 * abs(r)) <= 1e-12 * (1.0 + abs(r))
        assert abs(schatten_norm(m, "tr") - 2.0 * abs(r)) <= 1e-12 * (1.0 + abs(r))


def _point_from_variation(tau: float, sin2: float, tv: float) -> QslPoint:
    lam_op = tv / tau
    if tv == 0.0:
        # Frozen dynamics: no displacement, no average speed.
        return QslPoint(
            tau=tau,
            sin2_bures=sin2,
            lambda_tr=0.0,
            lambda_hs=0.0,
            lambda_op=0.0,
            ratio_op=0.0,
            ratio_max=0.0,
        )
    ratio_op = sin2 / tv
    ratios = (ratio_op, sin2 / (_SQRT2 * tv), sin2 / (2.0 * tv))
    return QslPoint(
        tau=tau,
        sin2_bures=sin2,
        lambda_tr=2.0 * lam_op,
        lambda_hs=_SQRT2 * lam_op,
        lambda_op=lam_op,
        ratio_op=ratio_op,
        ratio_max=max(ratios),
    )


def qsl_point(
    params: JCParams, tau: float, cfg: EvalConfig = DEFAULT_CONFIG
) -> QslPoint:
    """Speed-limit ratios for the dynamics run up to time tau."""
    if not (isinstance(tau, (int, float)) and math.isfinite(tau) and tau > 0.0):
        raise InvalidParams(f"tau must be positive, got {tau!r}")
    engine = QubitDynamics(params, cfg)
    times = _qsl_grid(engine.oscillation_rate(), 0.0, float(tau))
    rho_ee, _, rates = engine.population_sample(times)
    sample = rates[1 :: max(1, times.size // 5)][:5]
    _assert_diagonal_norm_identities(sample)
    tv, _ = _total_variation(engine, times, rho_ee, rates)
    sin2 = abs(rho_ee[-1] - 1.0)
    return _point_from_variation(float(tau), sin2, tv)


def qsl_ml(
    trajectory: Trajectory,
    rule: str = "op_only",
    cfg: EvalConfig = DEFAULT_CONFIG,
) -> QslPoint:
    """Speed-limit ratios from a precomputed trajectory.

    ``rule`` picks how the reported best ratio is formed: ``op_only``
    reuses the operator-norm ratio, ``max_of_three`` maximizes over the
    three norms explicitly.  The norm ordering makes both agree; the
    explicit rule exists so that agreement is checkable.
    """
    if rule not in ("op_only", "max_of_three"):
        raise InvalidParams(f"unknown rule {rule!r}")
    engine = QubitDynamics(trajectory.params, cfg)
    times = trajectory.times
    tau = float(times[-1])
    rho_ee = trajectory.rho_ee
    rates = trajectory.rho_dot
    sample = rates[1 :: max(1, times.size // 5)][:5]
    _assert_diagonal_norm_identities(sample)
    tv, _ = _total_variation(engine, times, rho_ee, rates)
    sin2 = abs(rho_ee[-1] - 1.0)
    point = _point_from_variation(tau, sin2, tv)
    if rule == "op_only":
        return QslPoint(
            tau=point.tau,
            sin2_bures=point.sin2_bures,
            lambda_tr=point.lambda_tr,
            lambda_hs=point.lambda_hs,
            lambda_op=point.lambda_op,
            ratio_op=point.ratio_op,
            ratio_max=point.ratio_op,
        )
    return point


def qsl_mlmt(
    chi_traj: Trajectory,
    tau: float,
    tau_d: float,
    cfg: EvalConfig = DEFAULT_CONFIG,
) -> MLMTResult:
    """Window bound from the relative purity drop across [tau, tau+tau_d].

    The bound divides the purity displacement |f - 1| * tr(chi_tau^2) by
    the window average of the singular values of the state derivative
    paired (descending) with those of chi_tau.  For this diagonal model
    that pairing collapses to |d rho_ee/dt| times the unit trace, which
    is asserted per run on sampled nodes.
    """
    if not (isinstance(tau, (int, float)) and math.isfinite(tau) and tau >= 0.0):
        raise InvalidParams(f"tau must be nonnegative, got {tau!r}")
    if not (isinstance(tau_d, (int, float)) and math.isfinite(tau_d) and tau_d > 0.0):
        raise InvalidParams(f"tau_d must be positive, got {tau_d!r}")
    horizon = float(chi_traj.times[-1])
    if tau + tau_d > horizon * (1.0 + 1e-12):
        raise InvalidParams(
            f"window [{tau}, {tau + tau_d}] exceeds the trajectory horizon {horizon}"
        )
    engine = QubitDynamics(chi_traj.params, cfg)
    t0, t1 = float(tau), float(tau + tau_d)
    ends = np.array([t0, t1])
    rho_e, rho_g, _ = engine.population_sample(ends)
    chi_tau = np.array([rho_g[0], rho_e[0]])
    chi_later = np.array([rho_g[1], rho_e[1]])
    tr_sq = float(np.sum(chi_tau**2))
    overlap = float(np.sum(chi_later * chi_tau))
    rel_purity = overlap / tr_sq

    times = _qsl_grid(engine.oscillation_rate(), t0, t1)
    rho_w, _, rates_w = engine.population_sample(times)
    tv, _ = _total_variation(engine, times, rho_w, rates_w)

    # Descending singular-value pairing check on sampled window nodes:
    # s(diag(-r, r)) = (|r|, |r|) paired with sigma(chi_tau) gives
    # |r| * tr(chi_tau) = |r|.
    sample = rates_w[1 :: max(1, times.size // 4)][:4]
    sigma = np.sort(np.abs(chi_tau))[::-1]
    assert abs(float(sigma.sum()) - 1.0) <= 1e-12
    for r in sample:
        s_pair = np.sort(np.abs(np.array([-r, r])))[::-1]
        direct = float(s_pair @ sigma)
        assert abs(direct - abs(r)) <= 1e-12 * (1.0 + abs(r))

    avg_sv = tv / tau_d
    avg_hs = _SQRT2 * avg_sv
    if avg_sv == 0.0:
        tau_qsl = 0.0
    else:
        tau_qsl = abs(rel_purity - 1.0) * tr_sq / avg_sv
    return MLMTResult(
        tau_qsl=tau_qsl,
        relative_purity=rel_purity,
        avg_sv=avg_sv,
        avg_hs=avg_hs,
    )


def qsl_ratio_formula(
    params: JCParams, tau: float, cfg: EvalConfig = DEFAULT_CONFIG
) -> float:
    """Operator-norm bound ratio through the closed-form route.

    Numerator: with P = |E2|^2 + |E1|^2 and R = 2 Re(E2 conj(E1)) from
    scalar eigenfactor evaluations at tau,

        sin^2(B) = a^2 (P - R) / (b^2 (P + R) + a^2 (P - R)).

    Denominator: integral of |d rho_ee/dt| by 15-point Gauss-Legendre on
    each monotone segment, with the first segment graded geometrically
    down to a cutoff below which the closed-form power law
    rho_gg ~ K t**(2 beta) supplies the remaining sliver.
    """
    if not (isinstance(tau, (int, float)) and math.isfinite(tau) and tau > 0.0):
        raise InvalidParams(f"tau must be positive, got {tau!r}")
    tau = float(tau)
    engine = QubitDynamics(params, cfg)
    beta = params.beta
    g = params.coupling
    a, b = params.a, params.b
    if g == 0.0:
        return 0.0

    order = MLOrder(beta)
    rot = (-1j) ** beta
    e2 = ml_global(order, g * rot * tau**beta, cfg)
    e1 = ml_global(order, -g * rot * tau**beta, cfg)
    p_sum = abs(e2) ** 2 + abs(e1) ** 2
    r_cross = 2.0 * float(np.real(e2 * np.conj(e1)))
    numer = a**2 * (p_sum - r_cross) / (
        b**2 * (p_sum + r_cross) + a**2 * (p_sum - r_cross)
    )

    times = _qsl_grid(engine.oscillation_rate(), 0.0, tau)
    _, _, rates = engine.population_sample(times)
    zs = _extrema_times(engine, times, rates)
    bounds = np.concatenate([[0.0], zs, [tau]])

    k_coef = (a / b) ** 2 * (g / gamma_fn(1.0 + beta)) ** 2
    eps = min(0.5 * bounds[1], (1e-13 / k_coef) ** (1.0 / (2.0 * beta)))
    sliver = k_coef * eps ** (2.0 * beta)

    # Panel list: graded subdivision of (eps, first extremum], then one
    # panel per monotone segment.
    panels = []
    edge = eps
    while edge < bounds[1]:
        nxt = min(edge * 4.0, bounds[1])
        panels.append((edge, nxt, 0))
        edge = nxt
    for seg in range(1, bounds.size - 1):
        panels.append((bounds[seg], bounds[seg + 1], seg))

    xg, wg = leggauss(cfg.quad_points)
    nodes = []
    weights = []
    for lo, hi, _ in panels:
        half = 0.5 * (hi - lo)
        nodes.append(0.5 * (lo + hi) + half * xg)
        weights.append(half * wg)
    all_nodes = np.concatenate(nodes)
    all_weights = np.concatenate(weights)
    rate_vals = engine.population_rate(all_nodes)

    seg_ids = np.concatenate(
        [np.full(cfg.quad_points, sid) for _, _, sid in panels]
    )
    denom = sliver
    for sid in range(bounds.size - 1):
        sel = seg_ids == sid
        denom += abs(float(np.sum(rate_vals[sel] * all_weights[sel])))
    if denom == 0.0:
        return 0.0
    return numer / denom
