"""Portfolio model: firm classes, validated environments, portfolios.

A firm carries a parameter triple (alpha, beta, gamma): alpha is its
impact weight in the aggregate, beta its sensitivity to that aggregate,
gamma its baseline log-hazard offset. Firms come in finitely many
classes; a class also carries a loss exposure and a population weight.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    AllAlphasZero,
    DuplicateClassConflict,
    NegativeParameter,
    NonFiniteParameter,
    NonPositiveWeight,
    ReciprocityViolated,
    WeightsDoNotSumToOne,
)
from .rng import PORTFOLIO_NS, stream

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class FirmClass:
    """One homogeneous group of firms.

    Attributes
    ----------
    alpha : float
        Impact weight of a default on the aggregate, >= 0.
    beta : float
        Sensitivity of the hazard to the aggregate, >= 0.
    gamma : float
        Baseline log-hazard offset; the hazard with a zero aggregate
        is exp(-gamma).
    exposure : float
        Loss incurred per defaulted firm of this class, >= 0.
    weight : float
        Population fraction of the class, in (0, 1].
    """

    alpha: float
    beta: float
    gamma: float
    exposure: float
    weight: float


@dataclass(frozen=True)
class Environment:
    """A validated, merged collection of firm classes.

    Construct via :func:`validate_environment`; weights sum to one and
    (alpha, beta, gamma) triples are pairwise distinct.
    """

    classes: tuple[FirmClass, ...]

    @property
    def k(self) -> int:
        return len(self.classes)

    @cached_property
    def alpha(self) -> np.ndarray:
        return _field_array(self.classes, "alpha")

    @cached_property
    def beta(self) -> np.ndarray:
        return _field_array(self.classes, "beta")

    @cached_property
    def gamma(self) -> np.ndarray:
        return _field_array(self.classes, "gamma")

    @cached_property
    def exposure(self) -> np.ndarray:
        return _field_array(self.classes, "exposure")

    @cached_property
    def weight(self) -> np.ndarray:
        return _field_array(self.classes, "weight")


def _field_array(classes: Sequence[FirmClass], name: str) -> np.ndarray:
    out = np.array([getattr(c, name) for c in classes], dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Portfolio:
    """A concrete assignment of `n` firms to environment classes."""

    n: int
    class_of: np.ndarray
    environment: Environment

    @cached_property
    def class_counts(self) -> np.ndarray:
        counts = np.bincount(self.class_of, minlength=self.environment.k)
        counts.flags.writeable = False
        return counts


@dataclass(frozen=True)
class ReciprocityCertificate:
    """Witness that beta == ratio * alpha holds across all classes.

    `ratio` is the common sensitivity-to-impact proportionality constant
    (zero only in the contagion-free case beta == 0), and `max_residual`
    is the largest attained |beta - ratio * alpha|.
    """

    ratio: float
    max_residual: float


def validate_environment(classes: Sequence[FirmClass]) -> Environment:
    """Check class parameters and weights, merging duplicate triples.

    Parameters
    ----------
    classes : sequence of FirmClass
        Class order is preserved. Classes with identical
        (alpha, beta, gamma) are merged by summing their weights; they
        must then agree on exposure.

    Returns
    -------
    Environment

    Raises
    ------
    NonFiniteParameter, NegativeParameter, NonPositiveWeight
        For an offending field of any single class.
    DuplicateClassConflict
        Duplicate triple with conflicting exposures.
    WeightsDoNotSumToOne
        If the merged weights are not within 1e-12 of one.
    """
    for i, c in enumerate(classes):
        fields = (c.alpha, c.beta, c.gamma, c.exposure, c.weight)
        if not all(np.isfinite(fields)):
            raise NonFiniteParameter(f"class {i} has a non-finite field")
        if c.alpha < 0 or c.beta < 0 or c.exposure < 0:
            raise NegativeParameter(
                f"class {i}: alpha, beta and exposure must be >= 0"
            )
        if c.weight <= 0:
            raise NonPositiveWeight(f"class {i}: weight must be positive")

    merged: list[FirmClass] = []
    index_of: dict[tuple[float, float, float], int] = {}
    for c in classes:
        key = (c.alpha, c.beta, c.gamma)
        if key in index_of:
            j = index_of[key]
            prev = merged[j]
            if prev.exposure != c.exposure:
                raise DuplicateClassConflict(
                    f"duplicate triple {key} with exposures "
                    f"{prev.exposure} and {c.exposure}"
                )
            merged[j] = FirmClass(
                c.alpha, c.beta, c.gamma, c.exposure, prev.weight + c.weight
            )
        else:
            index_of[key] = len(merged)
            merged.append(c)

    total = sum(c.weight for c in merged)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise WeightsDoNotSumToOne(f"weights sum to {total!r}")
    return Environment(tuple(merged))


def check_reciprocity(
    env: Environment, tolerance: float = 1e-9
) -> ReciprocityCertificate:
    """Certify that sensitivities are proportional to impact weights.

    The ratio is read off the first class with alpha > 0; every class
    must then satisfy |beta - ratio * alpha| <= tolerance (for classes
    with alpha == 0 this forces beta <= tolerance).

    Raises
    ------
    AllAlphasZero
        No class has a positive impact weight.
    ReciprocityViolated
        Carries the maximal residual.
    """
    alpha, beta = env.alpha, env.beta
    positive = np.nonzero(alpha > 0)[0]
    if positive.size == 0:
        raise AllAlphasZero("no class has alpha > 0")
    ratio = beta[positive[0]] / alpha[positive[0]]
    max_residual = float(np.max(np.abs(beta - ratio * alpha)))
    if max_residual > tolerance:
        raise ReciprocityViolated(max_residual)
    return ReciprocityCertificate(ratio=float(ratio), max_residual=max_residual)


def build_portfolio(
    env: Environment,
    n: int,
    mode: str = "deterministic_proportions",
    seed: int = 0,
) -> Portfolio:
    """Assign `n` firms to classes.

    Parameters
    ----------
    env : Environment
    n : int
        Number of firms, >= 1.
    mode : {"deterministic_proportions", "iid_sample"}
        "deterministic_proportions" rounds n * weight per class by the
        largest-remainder rule (ties to the lower class index) and lays
        firms out in class blocks, class 0 first. "iid_sample" draws
        each firm's class independently from the weights.
    seed : int
        Drives the draw in "iid_sample" mode; ignored otherwise.

    Notes
    -----
    A pure function of its arguments: repeated calls return identical
    assignments.
    """
    if n < 1:
        raise ValueError("portfolio size must be >= 1")
    w = env.weight
    if mode == "deterministic_proportions":
        target = n * w
        counts = np.floor(target).astype(int)
        leftover = n - int(counts.sum())
        # stable sort on -remainder sends ties to the lower class index
        order = np.argsort(-(target - counts), kind="stable")
        counts[order[:leftover]] += 1
        class_of = np.repeat(np.arange(env.k), counts)
    elif mode == "iid_sample":
        u = stream(seed, PORTFOLIO_NS).random(n)
        class_of = np.searchsorted(np.cumsum(w), u, side="right")
        class_of = np.minimum(class_of, env.k - 1)
    else:
        raise ValueError(f"unknown assignment mode: {mode!r}")
    class_of = class_of.astype(np.intp)
    class_of.flags.writeable = False
    return Portfolio(n=n, class_of=class_of, environment=env)
