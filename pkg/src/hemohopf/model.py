"""Model definition: parameters, nonlinearity, equilibria, Taylor data.

The model is the scalar delay equation

    x'(t) = -[beta(x(t)) + delta] x(t) + k beta(x(t-r)) x(t-r)

with the Hill-type production rate beta(x) = beta0 / (1 + x^n) and the
delay-dependent amplification k = 2 exp(-gamma r).  Everything downstream
(linear stability, Hopf analysis, simulation) is driven by the values
computed here: the equilibria x1 = 0 and x2 > 0, and the Taylor
coefficients B_m of beta(x) x at x2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import DomainError, NoPositiveEquilibriumError, ParameterError

__all__ = [
    "ModelParameters",
    "EquilibriumReport",
    "TaylorCoefficients",
    "derive_k",
    "gamma_from_k",
    "beta_derivatives",
    "equilibria",
    "taylor_coefficients",
]

#: Relative consistency tolerance between a stored k and 2 exp(-gamma r).
K_CONSISTENCY_RTOL = 1e-12


def derive_k(gamma: float, r: float) -> float:
    """Amplification factor k = 2 exp(-gamma r) in (0, 2].

    Parameters
    ----------
    gamma : float
        Loss rate in the delayed term, > 0.
    r : float
        Delay, >= 0.
    """
    if not (math.isfinite(gamma) and math.isfinite(r)):
        raise ParameterError(f"non-finite inputs: gamma={gamma}, r={r}")
    if gamma <= 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if r < 0.0:
        raise ParameterError(f"delay r must be nonnegative, got {r}")
    return 2.0 * math.exp(-gamma * r)


def gamma_from_k(k: float, r: float) -> float:
    """Loss rate gamma = -ln(k/2)/r recovered from (k, r), r > 0."""
    if not (math.isfinite(k) and math.isfinite(r)):
        raise ParameterError(f"non-finite inputs: k={k}, r={r}")
    if r <= 0.0:
        raise ParameterError(f"recovering gamma requires r > 0, got r={r}")
    if not 0.0 < k < 2.0:
        raise ParameterError(f"k must lie in (0, 2) to recover gamma > 0, got {k}")
    return -math.log(k / 2.0) / r


@dataclass(frozen=True)
class ModelParameters:
    """The five model parameters plus the derived amplification k.

    ``k = 2 exp(-gamma r)`` holds to machine precision by construction;
    build instances through :meth:`from_gamma` or :meth:`from_k`.
    """

    beta0: float
    n: float
    delta: float
    gamma: float
    r: float
    k: float

    def __post_init__(self):
        for name in ("beta0", "n", "delta", "gamma", "r", "k"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite number, got {v!r}")
        if self.beta0 <= 0.0:
            raise ParameterError(f"beta0 must be positive, got {self.beta0}")
        if self.delta <= 0.0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if self.gamma <= 0.0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if self.r < 0.0:
            raise ParameterError(f"delay r must be nonnegative, got {self.r}")
        if self.n <= 1.0:
            raise ParameterError(f"Hill exponent n must exceed 1, got {self.n}")
        expected = derive_k(self.gamma, self.r)
        if abs(self.k - expected) > K_CONSISTENCY_RTOL * abs(expected):
            raise ParameterError(
                f"k={self.k!r} inconsistent with 2 exp(-gamma r)={expected!r}"
            )

    @classmethod
    def from_gamma(cls, beta0, n, delta, gamma, r) -> "ModelParameters":
        """Build from (gamma, r); k is derived."""
        return cls(beta0, n, delta, gamma, r, derive_k(gamma, r))

    @classmethod
    def from_k(cls, beta0, n, delta, k, r) -> "ModelParameters":
        """Build from (k, r) with r > 0; gamma is derived."""
        return cls(beta0, n, delta, gamma_from_k(k, r), r, k)

    def with_r(self, r: float) -> "ModelParameters":
        """Same physical parameters at a different delay (k rederived)."""
        return replace(self, r=r, k=derive_k(self.gamma, r))

    @property
    def A(self) -> float:
        """Equilibrium balance ratio beta0 (k - 1) / delta."""
        return self.beta0 * (self.k - 1.0) / self.delta

    @property
    def x2_exists(self) -> bool:
        """True iff the positive equilibrium exists, i.e. A > 1."""
        return self.A > 1.0


def _pow(x: float, e: float) -> float:
    # x ** e for x >= 0, resolving the x == 0 corner: 0^0 = 1, 0^positive = 0.
    if x == 0.0:
        if e > 0.0:
            return 0.0
        if e == 0.0:
            return 1.0
        raise DomainError(f"x^({e}) diverges at x = 0")
    return x**e


def beta_derivatives(x: float, params: ModelParameters, max_order: int = 3):
    """Closed-form derivatives of beta(x) = beta0 / (1 + x^n).

    Returns the tuple (beta(x), beta'(x), ..., beta^(max_order)(x)).
    Orders above 3 are not implemented.
    """
    if max_order > 3 or max_order < 0:
        raise DomainError(f"derivative order must be in 0..3, got {max_order}")
    if x < 0.0:
        raise ParameterError(f"x must be nonnegative, got {x}")
    beta0, n = params.beta0, params.n

    def term(coeff: float, exponent: float) -> float:
        # a vanishing coefficient kills the power even where it diverges
        return 0.0 if coeff == 0.0 else coeff * _pow(x, exponent)

    u = 1.0 + _pow(x, n)
    out = [beta0 / u]
    if max_order >= 1:
        u1 = term(n, n - 1.0)
        out.append(-beta0 * u1 / u**2)
    if max_order >= 2:
        u2 = term(n * (n - 1.0), n - 2.0)
        out.append(beta0 * (2.0 * u1**2 / u**3 - u2 / u**2))
    if max_order >= 3:
        u3 = term(n * (n - 1.0) * (n - 2.0), n - 3.0)
        out.append(beta0 * (6.0 * u1 * u2 / u**3 - 6.0 * u1**3 / u**4 - u3 / u**2))
    return tuple(out)


@dataclass(frozen=True)
class EquilibriumReport:
    """Equilibria and the delay thresholds governing their existence.

    ``x2`` (and ``B1_at_x2``) are None when the positive equilibrium does
    not exist (A <= 1, equivalently r >= r_max).  ``r_n`` is the delay at
    which B1 at x2 changes sign; both thresholds may be negative when the
    corresponding regime is empty.
    """

    x1: float
    x2: Optional[float]
    A: float
    B1_at_x1: float
    B1_at_x2: Optional[float]
    r_max: float
    r_n: float


def _b1_at_x2(beta0: float, n: float, A: float) -> float:
    # Linearization coefficient beta'(x2) x2 + beta(x2) in closed form.
    return beta0 * (n - (n - 1.0) * A) / (A * A)


def equilibria(params: ModelParameters) -> EquilibriumReport:
    """Equilibrium report for validated parameters.

    The trivial equilibrium x1 = 0 always exists with linearization
    coefficient beta0.  The positive equilibrium x2 = (A - 1)^(1/n)
    exists iff A > 1, which in delay terms reads r < r_max.
    """
    beta0, n, delta, gamma = params.beta0, params.n, params.delta, params.gamma
    A = params.A
    if A > 1.0:
        x2 = (A - 1.0) ** (1.0 / n)
        b1_x2 = _b1_at_x2(beta0, n, A)
    else:
        x2 = None
        b1_x2 = None
    r_max = -math.log(0.5 * (1.0 + delta / beta0)) / gamma
    r_n = -math.log(0.5 * (delta * n / (beta0 * (n - 1.0)) + 1.0)) / gamma
    return EquilibriumReport(
        x1=0.0, x2=x2, A=A, B1_at_x1=beta0, B1_at_x2=b1_x2, r_max=r_max, r_n=r_n
    )


@dataclass(frozen=True)
class TaylorCoefficients:
    """Taylor coefficients B_m of the production term beta(x) x at x2.

    B_m = beta^(m)(x2) x2 + m beta^(m-1)(x2) is the m-th derivative of
    beta(x) x evaluated at x2; indexing is 1-based via ``tc[m]``.
    """

    b1: float
    b2: float
    b3: float

    def __getitem__(self, order: int) -> float:
        if order == 1:
            return self.b1
        if order == 2:
            return self.b2
        if order == 3:
            return self.b3
        raise IndexError(f"Taylor coefficient order must be 1..3, got {order}")


def taylor_coefficients(
    params: ModelParameters, report: EquilibriumReport
) -> TaylorCoefficients:
    """B_1..B_3 at the positive equilibrium of `report`."""
    if report.x2 is None:
        raise NoPositiveEquilibriumError(
            f"no positive equilibrium: A = {report.A} <= 1"
        )
    x2 = report.x2
    b0, d1, d2, d3 = beta_derivatives(x2, params, max_order=3)
    return TaylorCoefficients(
        b1=d1 * x2 + b0,
        b2=d2 * x2 + 2.0 * d1,
        b3=d3 * x2 + 3.0 * d2,
    )
