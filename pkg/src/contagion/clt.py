"""Gaussian approximation of large-portfolio losses.

The centered, sqrt(n)-scaled portfolio loss converges to a normal law
whose variance splits into a static part (independent defaults at the
limiting probabilities) and a contagion part that integrates the
squared covariance kernel

    V(t) = Var(exposure * y(t)) + int_0^t A(s)^2 * B(s) ds,

    A(s) = sum_k w_k alpha_k q_k(s) (exposure_k - l(t)),
    B(s) = sum_k w_k beta_k^2 (1 - q_k(s)) * hazard_k(s).

Validity requires the proportional-sensitivity structure certified by
:func:`contagion.model.check_reciprocity`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAGridPoint, ReciprocityRequired
from .limit import LimitSolution, _check_width
from .model import Environment, ReciprocityCertificate
from .rng import VALIDATOR_NS, stream


@dataclass(frozen=True)
class VarianceReport:
    """Variance of the scaled loss at one horizon.

    `total` is always `static_var + contagion_var`; `ratio` records the
    sensitivity-to-impact constant of the certificate used.
    """

    horizon: float
    mean_loss: float
    static_var: float
    contagion_var: float
    total: float
    ratio: float


def _grid_index(sol: LimitSolution, t: float) -> int:
    g = int(round(t / sol.step))
    if g < 0 or g >= sol.t_grid.size or abs(sol.t_grid[g] - t) > sol.step * 1e-6:
        raise NotAGridPoint(f"t={t!r} is not on the solution grid")
    return g


def variance_horizon(
    sol: LimitSolution,
    env: Environment,
    t: float,
    cert: ReciprocityCertificate | None,
) -> VarianceReport:
    """Closed-form variance of the scaled loss at grid time `t`.

    Raises
    ------
    ReciprocityRequired
        If no certificate is supplied.
    NotAGridPoint
        If `t` is not a grid time of `sol`.
    """
    if cert is None:
        raise ReciprocityRequired("variance needs a reciprocity certificate")
    _check_width(sol, env)
    g = _grid_index(sol, t)
    w = env.weight
    q_t = sol.default_prob[g]
    l_t = float((w * env.exposure) @ q_t)
    static = max(float((w * env.exposure**2) @ q_t) - l_t * l_t, 0.0)

    q = sol.default_prob[: g + 1]
    a = q @ (w * env.alpha * (env.exposure - l_t))
    b = ((1.0 - q) * sol.hazard[: g + 1]) @ (w * env.beta**2)
    contagion = float(np.trapezoid(a * a * b, dx=sol.step)) if g > 0 else 0.0
    return VarianceReport(
        horizon=float(sol.t_grid[g]),
        mean_loss=l_t,
        static_var=static,
        contagion_var=contagion,
        total=static + contagion,
        ratio=cert.ratio,
    )


def excess_prob(report: VarianceReport, n: int, x: float) -> float:
    """Gaussian approximation of P(loss per firm >= x) for `n` firms.

    Degenerate variance yields the point-mass rule: 1 if x <= mean,
    else 0.
    """
    if report.total <= 0.0:
        return 1.0 if x <= report.mean_loss else 0.0
    z = (x - report.mean_loss) * math.sqrt(n) / math.sqrt(report.total)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def excess_curve(
    sol: LimitSolution,
    env: Environment,
    cert: ReciprocityCertificate | None,
    n: int,
    thresholds,
    t_grid,
) -> np.ndarray:
    """Excess probabilities, rows indexed by `t_grid`, columns by
    `thresholds`. Every requested time must be a grid time of `sol`."""
    thresholds = tuple(thresholds)
    if not thresholds:
        raise ValueError("thresholds must be nonempty")
    out = np.empty((len(t_grid), len(thresholds)))
    for i, t in enumerate(t_grid):
        report = variance_horizon(sol, env, float(t), cert)
        out[i] = [excess_prob(report, n, x) for x in thresholds]
    return out


def mc_validate_covdiag(
    sol: LimitSolution,
    env: Environment,
    cert: ReciprocityCertificate | None,
    t: float,
    replicas: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo check of the variance formula via the martingale
    representation of the scaled loss.

    Each replica draws a class and a default time under the limit law
    and evaluates

        X = (phi - l(t)) - ratio * alpha * [A(tau) 1{tau <= t}
            - int_0^{tau ^ t} A(s) hazard(s) ds],

    with phi the exposure earned if tau <= t. The mean of X^2 estimates
    the closed-form variance; returns (estimate, standard error).
    """
    if cert is None:
        raise ReciprocityRequired("validation needs a reciprocity certificate")
    _check_width(sol, env)
    if replicas < 100:
        raise ValueError("need at least 100 replicas")
    g = _grid_index(sol, t)
    t_val = float(sol.t_grid[g])
    w = env.weight
    q_t = sol.default_prob[g]
    l_t = float((w * env.exposure) @ q_t)
    grid = sol.t_grid[: g + 1]
    a = sol.default_prob[: g + 1] @ (w * env.alpha * (env.exposure - l_t))
    # per-class cumulative integral of A(s) * hazard_k(s)
    integrand = a[:, None] * sol.hazard[: g + 1]
    steps = 0.5 * sol.step * (integrand[1:] + integrand[:-1])
    comp = np.vstack([np.zeros(env.k), np.cumsum(steps, axis=0)])

    rng = stream(seed, VALIDATOR_NS)
    cls = np.searchsorted(np.cumsum(w), rng.random(replicas), side="right")
    cls = np.minimum(cls, env.k - 1)
    e_draw = rng.standard_exponential(replicas)

    tau = np.empty(replicas)
    compensator = np.empty(replicas)
    for k in range(env.k):
        mask = cls == k
        if not mask.any():
            continue
        cum_k = sol.cum_hazard[:, k]
        tau_k = np.interp(e_draw[mask], cum_k, sol.t_grid)
        tau_k[e_draw[mask] > cum_k[-1]] = np.inf
        tau[mask] = tau_k
        compensator[mask] = np.interp(np.minimum(tau_k, t_val), grid, comp[:, k])

    defaulted = tau <= t_val
    phi = env.exposure[cls] * defaulted
    jump = np.where(defaulted, np.interp(np.minimum(tau, t_val), grid, a), 0.0)
    scale = cert.ratio * env.alpha[cls]
    x = (phi - l_t) - scale * (jump - compensator)
    sq = x * x
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(replicas))
