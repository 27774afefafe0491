"""Investment-under-uncertainty thresholds via the Dixit-Pindyck system.

A producer with geometric-Brownian income should expand above an income H
and reduce or close below an income L.  Value matching and smooth pasting at
the two triggers give four nonlinear equations in (H, L, A, B), where A and
B are the coefficients of the option part of the project value.  The
coefficient pair enters the smooth-pasting equations linearly, so it can be
eliminated in closed form; what remains is a two-variable system in (H, L)
that the fractional pseudo-Newton iteration solves, after which A and B are
recovered by back-substitution and the full four-equation residual is
checked independently.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from ._accel import NUMBA_ENABLED
from .errors import (DegenerateThresholds, InvalidPrimitives,
                     NonRealEvaluation, ThresholdSolveFailed)
from .kernel import FractionalOrder
from .solver import (STATUS_FROM_CODE, IterationTrace, RootSet, SkippedAlpha,
                     SolverSettings, SolveOutcome, Status, alpha_sweep,
                     collect_roots, default_alpha_grid, fixed_point_solve,
                     norm2)

#: Tolerance on the exact algebraic identities the constants must satisfy.
IDENTITY_TOL = 1e-9


class Decision(enum.Enum):
    EXPAND = "expand"
    CONTINUE = "continue"
    REDUCE_OR_CLOSE = "reduce_or_close"


class ThresholdOrderingWarning(UserWarning):
    """The converged point had its expansion component below its closing one."""


@dataclass(frozen=True)
class EconomicPrimitives:
    """Raw model inputs.

    mu      mean growth rate of income
    sigma   volatility of income (> 0)
    l       long-run real interest rate (> mu, so discounting converges)
    c       annual production cost (>= 0)
    kappa   sunk cost of expanding (>= 0)
    chi     cost of reducing or closing (>= 0)
    """

    mu: float
    sigma: float
    l: float
    c: float
    kappa: float
    chi: float

    def __post_init__(self):
        for name in ("mu", "sigma", "l", "c", "kappa", "chi"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.sigma > 0.0:
            raise InvalidPrimitives(f"sigma must be positive, got {self.sigma!r}")
        if not self.l > 0.0:
            raise InvalidPrimitives(f"l must be positive, got {self.l!r}")
        if not self.l > self.mu:
            raise InvalidPrimitives(
                f"l must exceed mu (got l={self.l!r}, mu={self.mu!r}), "
                "otherwise the perpetuity factor 1/(l - mu) is not positive and finite")
        for name in ("c", "kappa", "chi"):
            if getattr(self, name) < 0.0:
                raise InvalidPrimitives(f"{name} must be non-negative, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class ModelConstants:
    """The seven system constants a1..a7 plus the discriminant root rho.

    The exponent constants are coupled: a3 = a1 + 1, a2 = a4 + 1 and
    a1 + a2 = a3 + a4 = 2 rho.  Construction enforces those identities, so a
    ModelConstants instance is always an internally consistent system.
    """

    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    a6: float
    a7: float
    rho: float

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a5", "a6", "a7", "rho"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.a1 > 0.0 and self.a2 > 0.0):
            raise ValueError("a1 and a2 must be positive (exponent signs of the value function)")
        scale = max(1.0, abs(self.rho))
        checks = (
            ("a3 - a1", self.a3 - self.a1 - 1.0),
            ("a2 - a4", self.a2 - self.a4 - 1.0),
            ("a1 + a2 - 2 rho", self.a1 + self.a2 - 2.0 * self.rho),
            ("a3 + a4 - 2 rho", self.a3 + self.a4 - 2.0 * self.rho),
        )
        for label, gap in checks:
            if abs(gap) > IDENTITY_TOL * scale:
                raise ValueError(f"constants violate {label} identity by {gap:.3e}")

    @classmethod
    def from_values(cls, a1, a2, a3, a4, a5, a6, a7) -> "ModelConstants":
        """Accept the seven constants directly; rho is implied by a1 + a2."""
        return cls(a1=a1, a2=a2, a3=a3, a4=a4, a5=a5, a6=a6, a7=a7,
                   rho=(float(a1) + float(a2)) / 2.0)

    def with_triggers(self, a6, a7) -> "ModelConstants":
        """Same structural constants with a new scenario pair (a6, a7)."""
        return ModelConstants(a1=self.a1, a2=self.a2, a3=self.a3, a4=self.a4,
                              a5=self.a5, a6=float(a6), a7=float(a7), rho=self.rho)


def derive_constants(p: EconomicPrimitives) -> ModelConstants:
    """Compute a1..a7 and rho from the economic primitives.

    rho = sqrt((mu/sigma^2 - 1/2)^2 + 2 l / sigma^2); the four exponent
    constants are rho shifted by +/- mu/sigma^2 and +/- 1/2, a5 is the
    perpetuity factor 1/(l - mu), and a6, a7 are the capitalised cost plus
    the expansion cost and minus the closing cost respectively.
    """
    m = p.mu / p.sigma**2
    rho = math.sqrt((m - 0.5) ** 2 + 2.0 * p.l / p.sigma**2)
    return ModelConstants(
        a1=m - 0.5 + rho,
        a2=-m + 0.5 + rho,
        a3=m + 0.5 + rho,
        a4=-m - 0.5 + rho,
        a5=1.0 / (p.l - p.mu),
        a6=p.c / p.l + p.kappa,
        a7=p.c / p.l - p.chi,
        rho=rho,
    )


@dataclass(frozen=True)
class ThresholdProblem:
    """One scenario: a consistent constant set and the starting point."""

    constants: ModelConstants
    x0: np.ndarray

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).ravel()
        if x0.shape != (2,):
            raise ValueError("x0 must be a 2-vector (H0, L0)")
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be finite")
        object.__setattr__(self, "x0", x0)
        if not self.constants.a6 > self.constants.a7:
            raise ValueError(
                f"a6 must exceed a7 (got a6={self.constants.a6!r}, a7={self.constants.a7!r}); "
                "their gap is the total switching cost")


@dataclass(frozen=True)
class ThresholdSolution:
    """Solved scenario: thresholds, coefficients and residual diagnostics."""

    H: float
    L: float
    A: float
    B: float
    reduced_residual_norm: float
    full_residual_norm: float
    outcome: SolveOutcome
    relabeled: bool = False


def reduced_residual(constants: ModelConstants, x) -> np.ndarray:
    """Two-variable residual whose zero is the threshold pair (H, L).

    Both components must be positive and distinct; coincident components
    collapse the elimination denominator and raise DegenerateThresholds,
    non-positive ones raise NonRealEvaluation (real powers with non-integer
    exponents leave the real line there).
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (2,):
        raise ValueError("x must be a 2-vector")
    c = constants
    try:
        code, f1, f2 = _kernels.reduced_residual_checked(
            c.a1, c.a2, c.a3, c.a4, c.a5, c.a6, c.a7, float(x[0]), float(x[1]))
    except OverflowError as exc:
        raise NonRealEvaluation("power overflow in reduced residual") from exc
    if code == _kernels.NONPOSITIVE:
        raise NonRealEvaluation(f"thresholds must be positive, got {tuple(x)}")
    if code == _kernels.DEGENERATE:
        raise DegenerateThresholds(f"threshold components coincide at {tuple(x)}")
    if code == _kernels.NONFINITE:
        raise NonRealEvaluation("reduced residual evaluated to a non-finite value")
    return np.array([f1, f2])


def make_residual(constants: ModelConstants):
    """Residual closure for the generic solver drivers."""

    def f(x: np.ndarray) -> np.ndarray:
        return reduced_residual(constants, x)

    return f


def back_substitute(constants: ModelConstants, x) -> tuple:
    """Recover the value-function coefficients (A, B) from a threshold pair.

    The smooth-pasting equations are linear in (A, B); this is their closed
    form solution.  Swapping the two components leaves the result unchanged
    because numerator and denominator flip sign together.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (2,):
        raise ValueError("x must be a 2-vector")
    x1, x2 = float(x[0]), float(x[1])
    if x1 <= 0.0 or x2 <= 0.0:
        raise NonRealEvaluation(f"thresholds must be positive, got {(x1, x2)}")
    c = constants
    try:
        t1 = x1 ** (c.a3 + c.a4)
        t2 = x2 ** (c.a3 + c.a4)
        if abs(t1 - t2) < _kernels.DEGENERATE_GAP:
            raise DegenerateThresholds(f"threshold components coincide at {(x1, x2)}")
        a = c.a5 * (x1 ** c.a3 - x2 ** c.a3) / (c.a2 * (t1 - t2))
        b = c.a5 * (x1 * x2) ** c.a3 * (x1 ** c.a4 - x2 ** c.a4) / (c.a1 * (t1 - t2))
    except OverflowError as exc:
        raise NonRealEvaluation("power overflow in back-substitution") from exc
    if not (math.isfinite(a) and math.isfinite(b)):
        raise NonRealEvaluation("back-substitution produced a non-finite coefficient")
    return a, b


def full_residual(constants: ModelConstants, H: float, L: float,
                  A: float, B: float) -> np.ndarray:
    """All four equations of the threshold system, evaluated verbatim.

    Components 0 and 2 are value matching at H and L, components 1 and 3 the
    smooth-pasting conditions.
    """
    H, L, A, B = float(H), float(L), float(A), float(B)
    if H <= 0.0 or L <= 0.0:
        raise NonRealEvaluation(f"thresholds must be positive, got {(H, L)}")
    c = constants
    try:
        r = np.array([
            c.a5 * H + B * H ** (-c.a1) - A * H ** c.a2 - c.a6,
            -c.a1 * B * H ** (-c.a3) - c.a2 * A * H ** c.a4 + c.a5,
            c.a5 * L + B * L ** (-c.a1) - A * L ** c.a2 - c.a7,
            -c.a1 * B * L ** (-c.a3) - c.a2 * A * L ** c.a4 + c.a5,
        ])
    except OverflowError as exc:
        raise NonRealEvaluation("power overflow in full residual") from exc
    if not np.all(np.isfinite(r)):
        raise NonRealEvaluation("full residual evaluated to a non-finite value")
    return r


def full_residual_scale(constants: ModelConstants, H: float, L: float) -> float:
    """Normalisation used when judging the full residual relatively."""
    return 1.0 + abs(constants.a6) + abs(constants.a7) \
        + 2.0 * abs(constants.a5) * max(H, L)


def _solve_outcome(problem: ThresholdProblem, settings: SolverSettings,
                   keep_trace: bool) -> SolveOutcome:
    """Dispatch one reduced-system solve to the active backend."""
    if not NUMBA_ENABLED:
        return fixed_point_solve(make_residual(problem.constants), problem.x0,
                                 settings, keep_trace=keep_trace)
    c = problem.constants
    n_max = settings.max_iter
    xs = np.empty((n_max + 1, 2))
    steps = np.empty(n_max)
    residuals = np.empty(n_max + 1)
    code, n, x1, x2, step_norm, res_norm = _kernels.solve_reduced(
        c.a1, c.a2, c.a3, c.a4, c.a5, c.a6, c.a7,
        float(problem.x0[0]), float(problem.x0[1]),
        settings.alpha.value, settings.epsilon,
        settings.tol_step, settings.tol_residual, n_max,
        settings.divergence_bound, xs, steps, residuals)
    status = STATUS_FROM_CODE[code]
    trace = None
    if keep_trace:
        # Failed statuses keep only the prefix where the residual existed.
        last = n if status in (Status.CONVERGED, Status.MAX_ITERATIONS) else max(n - 1, 0)
        trace = IterationTrace(iterates=xs[:last + 1].copy(),
                               step_norms=steps[:last].copy(),
                               residual_norms=residuals[:last + 1].copy())
    return SolveOutcome(status=status, x_final=np.array([x1, x2]), iterations=n,
                        final_step_norm=step_norm, final_residual_norm=res_norm,
                        trace=trace)


def _label_thresholds(x1: float, x2: float) -> tuple:
    """Order a converged pair as (H, L); flag when the labels had to swap."""
    if x1 >= x2:
        return x1, x2, False
    return x2, x1, True


def solve_thresholds(problem: ThresholdProblem,
                     settings: Optional[SolverSettings] = None,
                     keep_trace: bool = False) -> ThresholdSolution:
    """Solve one scenario end to end.

    Runs the pseudo-Newton iteration on the reduced residual, back-substitutes
    the value-function coefficients and attaches both residual norms.  A
    non-converged outcome raises ThresholdSolveFailed carrying the outcome;
    evaluation problems never escape as raw arithmetic errors.
    """
    if settings is None:
        settings = SolverSettings()
    out = _solve_outcome(problem, settings, keep_trace)
    if not out.converged:
        raise ThresholdSolveFailed(out)
    x1, x2 = float(out.x_final[0]), float(out.x_final[1])
    H, L, relabeled = _label_thresholds(x1, x2)
    if relabeled:
        warnings.warn("converged point has expansion threshold below closing "
                      "threshold; labels were swapped", ThresholdOrderingWarning)
    A, B = back_substitute(problem.constants, out.x_final)
    full = full_residual(problem.constants, H, L, A, B)
    return ThresholdSolution(H=H, L=L, A=A, B=B,
                             reduced_residual_norm=out.final_residual_norm,
                             full_residual_norm=norm2(full),
                             outcome=out, relabeled=relabeled)


def sweep_thresholds(problem: ThresholdProblem, grid=None,
                     settings: Optional[SolverSettings] = None,
                     dedup_tolerance: float = 1e-3) -> RootSet:
    """Order sweep over one scenario from its single initial condition."""
    if grid is None:
        grid = default_alpha_grid()
    grid = [FractionalOrder.coerce(a) for a in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if settings is None:
        settings = SolverSettings()
    if not NUMBA_ENABLED:
        return alpha_sweep(make_residual(problem.constants), problem.x0,
                           grid=grid, settings=settings,
                           dedup_tolerance=dedup_tolerance)
    converged = []
    skipped = []
    for alpha in grid:
        out = _solve_outcome(problem, replace(settings, alpha=alpha), keep_trace=False)
        if out.converged:
            converged.append((out.x_final, alpha.value, out))
        else:
            skipped.append(SkippedAlpha(alpha=alpha.value, status=out.status))
    return collect_roots(converged, skipped, dedup_tolerance)


def classify_income(income: float, sol: ThresholdSolution) -> Decision:
    """Action implied by an observed income against the solved thresholds.

    The triggers are inclusive: income at H expands, income at L reduces or
    closes, anything strictly between continues as is.
    """
    income = float(income)
    if not income > 0.0:
        raise ValueError(f"income must be positive, got {income!r}")
    if income >= sol.H:
        return Decision.EXPAND
    if income <= sol.L:
        return Decision.REDUCE_OR_CLOSE
    return Decision.CONTINUE
