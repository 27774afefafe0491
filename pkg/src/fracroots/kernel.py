"""Fractional-derivative kernel and the diagonal pseudo-Newton multiplier.

The iteration exploits the fact that fractional derivatives of constants do
not vanish: under the Riemann-Liouville derivative with base point 0, the
order-beta derivative of the unit constant at x > 0 is

    x**(-beta) / gamma(1 - beta),

which is nonzero for every non-integer beta.  For negative arguments the
kernel is extended with the sign of x (an odd continuation), which keeps the
iteration real while preserving the update map's symmetry; zero components
switch to the classical order 1, where the derivative of a constant is 0 and
the multiplier entry collapses to the regularisation constant eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, PoleArgument

#: Width of the numerical guard band around integers.
INTEGER_GUARD = 1e-12


def _nearest_integer_gap(value: float) -> float:
    return abs(value - round(value))


@dataclass(frozen=True)
class FractionalOrder:
    """A fractional differentiation order: real, in [-2, 2], not an integer.

    The order is the method's single tuning parameter; different orders steer
    the iteration into different basins, which is what makes multi-root
    sweeps from one initial condition possible.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        object.__setattr__(self, "value", v)
        if not math.isfinite(v) or not -2.0 <= v <= 2.0:
            raise ValueError(f"fractional order must lie in [-2, 2], got {v!r}")
        if _nearest_integer_gap(v) <= INTEGER_GUARD:
            raise ValueError(f"fractional order must not be an integer, got {v!r}")

    @classmethod
    def coerce(cls, value) -> "FractionalOrder":
        if isinstance(value, FractionalOrder):
            return value
        return cls(float(value))


@dataclass(frozen=True)
class PDiagonal:
    """Diagonal of the multiplier matrix plus the per-component order used.

    The matrix is diagonal by construction; :meth:`as_matrix` materialises it
    densely for callers that want to verify exactly that.
    """

    entries: np.ndarray
    order_used: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        orders = np.asarray(self.order_used, dtype=float)
        if entries.shape != orders.shape or entries.ndim != 1:
            raise ValueError("entries and order_used must be 1-d arrays of equal length")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "order_used", orders)

    def as_matrix(self) -> np.ndarray:
        return np.diag(self.entries)


def gamma(z: float) -> float:
    """Gamma function on the real line, guarding the non-positive integer poles.

    Raises PoleArgument when z is within 1e-12 of 0, -1, -2, ...; accuracy is
    pinned by the oracle tests against a high-precision reference.
    """
    z = float(z)
    if _nearest_integer_gap(z) <= INTEGER_GUARD and round(z) <= 0:
        raise PoleArgument(f"gamma pole at non-positive integer, got z={z!r}")
    return math.gamma(z)


def beta_select(alpha, component: float) -> float:
    """Order selector: the fractional order on nonzero components, 1 on zeros.

    The classical branch at zero avoids the kernel's singularity at x = 0.
    """
    if component == 0.0:
        return 1.0
    return FractionalOrder.coerce(alpha).value


def constant_frac_deriv(beta: float, x: float) -> float:
    """Order-beta derivative of the unit constant, evaluated at x.

    beta = 1 returns exactly 0 (classical derivative of a constant) without
    touching the gamma pole at 0.  Non-integer beta returns
    sign(x) * |x|**(-beta) / gamma(1 - beta) and rejects x = 0, where the
    power is singular.
    """
    beta = float(beta)
    x = float(x)
    if beta == 1.0:
        return 0.0
    if x == 0.0:
        raise DomainError("kernel of non-classical order is singular at x = 0")
    # Fails fast (PoleArgument) for the remaining integer orders beta >= 2.
    gamma(1.0 - beta)
    return _kernels.frac_unit_deriv(beta, x)


def p_matrix(alpha, x, epsilon: float) -> PDiagonal:
    """Diagonal pseudo-Newton multiplier evaluated at the point x.

    Entry k is constant_frac_deriv(beta_select(alpha, x[k]), x[k]) + epsilon;
    zero components therefore contribute exactly epsilon.
    """
    alpha = FractionalOrder.coerce(alpha)
    epsilon = float(epsilon)
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a 1-d vector")
    entries = np.empty(x.shape[0])
    orders = np.empty(x.shape[0])
    for k in range(x.shape[0]):
        orders[k] = beta_select(alpha, x[k])
        entries[k] = _kernels.p_entry(alpha.value, x[k], epsilon)
    return PDiagonal(entries=entries, order_used=orders)
