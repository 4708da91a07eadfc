"""Closed-form thermodynamic-limit results for the LMG model.

Everything here is a function of (h, gamma, tau) with at most an explicit
extensive N-dependence; no diagonalization is involved.  The reduced
state of a subsystem fraction tau is controlled by three parameters: a
phase-dependent ratio alpha, the Green's functions G^{++} and G^{--} of
the collective bosonic mode, and the correlation parameter mu >= 1 that
sets the thermal-like spectrum of the reduced density matrix.

Both the global and reduced susceptibilities diverge at the critical
point h = 1; evaluations inside a small guard window around it raise
instead of returning silent infinities.

Note on the broken phase: alpha = sqrt((1-h^2)/(1-gamma)) exceeds 1 once
1 - h^2 > 1 - gamma (e.g. gamma = 0.5, h = 0).  The closed forms are
evaluated as written in that regime; the susceptibilities stay real and
positive there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CRITICAL_GUARD = 1e-6
DERIVATIVE_STEP = 1e-6
# tau = 1 makes the (mu^2 - 1) denominator vanish; the reduced
# susceptibility is then evaluated at this offset below 1 instead.
TAU_ONE_OFFSET = 1e-6
# Below this mu^2 - 1 the (d_h mu)^2 / (4 (mu^2 - 1)) term is evaluated
# through its alpha -> 1 limit instead of the raw 0/0 quotient.
MU_ONE_FLOOR = 1e-10


class CriticalPointError(ValueError):
    """Evaluation requested inside the singular window around h = 1."""


class IsotropicPointError(ValueError):
    """gamma = 1 is outside the supported anisotropy range."""


@dataclass(frozen=True)
class AnalyticPoint:
    """All closed-form quantities at one (h, gamma, tau, n)."""

    h: float
    gamma: float
    tau: float
    n: int
    alpha: float
    mu: float
    g_pp: float
    g_mm: float
    varphi: float
    epsilon: float
    theta0: float
    chi_g: float
    chi_r: float
    eta: float
    entropy: float


def theta0(h: float) -> float:
    """Mean-field rotation angle: arccos h in the broken phase, else 0."""
    if h < 0.0:
        raise ValueError(f"field must be >= 0, got {h}")
    return math.acos(h) if h <= 1.0 else 0.0


def _check_point_args(h: float, gamma: float, guard: float = CRITICAL_GUARD) -> None:
    if h < 0.0:
        raise ValueError(f"field must be >= 0, got {h}")
    if not (0.0 <= gamma < 1.0):
        if gamma == 1.0:
            raise IsotropicPointError("gamma = 1 is singular for the closed forms")
        raise ValueError(f"anisotropy must lie in [0, 1), got {gamma}")
    if abs(h - 1.0) < guard:
        raise CriticalPointError(
            f"h = {h} is within {guard:.0e} of the critical point"
        )


def alpha(h: float, gamma: float) -> float:
    """Phase-dependent ratio entering the Green's functions.

    sqrt((h-1)/(h-gamma)) in the symmetric phase, sqrt((1-h^2)/(1-gamma))
    in the broken phase.  Vanishes as h -> 1 from either side.
    """
    _check_point_args(h, gamma)
    if h > 1.0:
        return math.sqrt((h - 1.0) / (h - gamma))
    return math.sqrt((1.0 - h * h) / (1.0 - gamma))


def mu(alpha_value: float, tau: float) -> float:
    """Correlation parameter of the reduced state, >= 1.

    mu = alpha^{-1/2} sqrt([tau*alpha + (1-tau)] [tau + alpha*(1-tau)]);
    exactly 1 for tau = 1 (pure subsystem) and diverging like
    sqrt(tau(1-tau)/alpha) as alpha -> 0.
    """
    if alpha_value <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha_value}")
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    if tau == 1.0:
        return 1.0
    prod = (tau * alpha_value + (1.0 - tau)) * (tau + alpha_value * (1.0 - tau))
    return math.sqrt(prod) / math.sqrt(alpha_value)


def greens(alpha_value: float, tau: float) -> tuple[float, float]:
    """Green's functions (G^{++}, G^{--}) of the subsystem mode.

    G^{++} = 1 + (1/alpha - 1) tau and G^{--} = (1 - alpha) tau - 1.
    They satisfy -G^{++} G^{--} = mu^2 identically.
    """
    if alpha_value <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha_value}")
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    g_pp = 1.0 + (1.0 / alpha_value - 1.0) * tau
    g_mm = (1.0 - alpha_value) * tau - 1.0
    return g_pp, g_mm


def chi_g_analytic(h: float, gamma: float, n: int) -> float:
    """Thermodynamic-limit global fidelity susceptibility.

    Broken phase (h < 1):
        N / (4 sqrt((1-h^2)(1-gamma)))
        + h^2 (h^2-gamma)^2 / (32 (1-gamma)^2 (1-h^2)^2)
    Symmetric phase (h > 1):
        (1-gamma)^2 / (32 (h-gamma)^2 (h-1)^2)

    Extensive (grows with N) below the transition, intensive above it.
    """
    _check_point_args(h, gamma)
    if h < 1.0:
        one_m_h2 = 1.0 - h * h
        extensive = n / (4.0 * math.sqrt(one_m_h2 * (1.0 - gamma)))
        intensive = (
            h * h * (h * h - gamma) ** 2
            / (32.0 * (1.0 - gamma) ** 2 * one_m_h2**2)
        )
        return extensive + intensive
    return (1.0 - gamma) ** 2 / (32.0 * (h - gamma) ** 2 * (h - 1.0) ** 2)


def _central_difference(fn, x: float, step: float) -> float:
    return (fn(x + step) - fn(x - step)) / (2.0 * step)


def chi_r_analytic(
    h: float,
    gamma: float,
    tau: float,
    n: int,
    step: float = DERIVATIVE_STEP,
) -> float:
    """Thermodynamic-limit reduced fidelity susceptibility.

    chi = (d_h mu)^2 / (4 (mu^2 - 1))
        + mu^2 / (4 (mu^2 + 1)) * [d_h ln|mu / G^{++}|]^2

    plus, in the broken phase only, the extensive term
    N tau / (4 G^{++} (1 - h^2)).  The h-derivatives of the closed forms
    are taken by central differences of width ``step``; the absolute
    value inside the log leaves the derivative unchanged because the
    ratio keeps one sign on each side of the transition.

    tau = 1 makes the first denominator vanish; the value returned is
    the tau -> 1 limit, evaluated at tau = 1 - 1e-6.  Along the curve
    h^2 = gamma one has alpha = 1 and mu = 1 for every tau (the
    subsystem mode is unsqueezed there), which makes the first term a
    removable 0/0; it is evaluated through its limit
    tau (1 - tau) (d_h alpha)^2 / 4 in that case.
    """
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    _check_point_args(h, gamma, guard=CRITICAL_GUARD + step)
    tau_eff = 1.0 - TAU_ONE_OFFSET if tau == 1.0 else tau

    def mu_at(x: float) -> float:
        return mu(alpha(x, gamma), tau_eff)

    def log_ratio_at(x: float) -> float:
        a = alpha(x, gamma)
        return math.log(abs(mu(a, tau_eff) / greens(a, tau_eff)[0]))

    d_mu = _central_difference(mu_at, h, step)
    d_log_ratio = _central_difference(log_ratio_at, h, step)
    mu0 = mu_at(h)
    mu_sq_m1 = mu0**2 - 1.0
    if mu_sq_m1 > MU_ONE_FLOOR:
        pop_term = d_mu**2 / (4.0 * mu_sq_m1)
    else:
        d_alpha = _central_difference(lambda x: alpha(x, gamma), h, step)
        pop_term = tau_eff * (1.0 - tau_eff) * d_alpha**2 / 4.0
    chi = pop_term + (mu0**2 / (4.0 * (mu0**2 + 1.0))) * d_log_ratio**2
    if h < 1.0:
        g_pp = greens(alpha(h, gamma), tau_eff)[0]
        chi += n * tau_eff / (4.0 * g_pp * (1.0 - h * h))
    return chi


def entropy_analytic(h: float, gamma: float, tau: float) -> float:
    """Thermodynamic-limit entanglement entropy of the tau-fraction block.

    E = ((mu+1)/2) ln((mu+1)/2) - ((mu-1)/2) ln((mu-1)/2) + x ln 2,
    with x = 1 in the broken phase (twofold ground degeneracy) and x = 0
    in the symmetric phase.  The mu = 1 limit returns x ln 2 exactly.
    """
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    mu0 = mu(alpha(h, gamma), tau)
    degeneracy = math.log(2.0) if h < 1.0 else 0.0
    if mu0 == 1.0:
        return degeneracy
    up = 0.5 * (mu0 + 1.0)
    down = 0.5 * (mu0 - 1.0)
    return up * math.log(up) - down * math.log(down) + degeneracy


def analytic_point(h: float, gamma: float, tau: float, n: int) -> AnalyticPoint:
    """Bundle every closed-form quantity at one parameter point."""
    a = alpha(h, gamma)
    mu0 = mu(a, tau)
    g_pp, g_mm = greens(a, tau)
    varphi = math.atanh((mu0 - g_pp) / (mu0 + g_pp))
    epsilon = math.inf if mu0 == 1.0 else math.log((mu0 + 1.0) / (mu0 - 1.0))
    chi_g = chi_g_analytic(h, gamma, n)
    chi_r = chi_r_analytic(h, gamma, tau, n)
    return AnalyticPoint(
        h=h,
        gamma=gamma,
        tau=tau,
        n=n,
        alpha=a,
        mu=mu0,
        g_pp=g_pp,
        g_mm=g_mm,
        varphi=varphi,
        epsilon=epsilon,
        theta0=theta0(h),
        chi_g=chi_g,
        chi_r=chi_r,
        eta=chi_r / chi_g,
        entropy=entropy_analytic(h, gamma, tau),
    )


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of ln y against ln x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points for a slope fit")
    coeffs = np.polyfit(lx, ly, 1)
    return float(coeffs[0])
