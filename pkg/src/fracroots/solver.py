"""Fixed-point iteration machinery built around the fractional pseudo-Newton step.

The driver iterates x_{i+1} = step(x_i, f(x_i)) until both the step norm and
the residual norm fall under their tolerances.  The default step is the
pseudo-Newton update x - P(x) * f(x) with the diagonal multiplier from
:mod:`fracroots.kernel`; a classical Newton step over a finite-difference
Jacobian is provided as the baseline, and an order-sweep driver discovers
multiple roots from a single initial condition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InsufficientData, NonRealEvaluation, SingularJacobian
from .kernel import FractionalOrder, p_matrix

#: Condition-number ceiling beyond which the Newton linear solve is refused.
CONDITION_LIMIT = 1e12

#: Aitken denominators below this magnitude leave the component untouched.
AITKEN_GUARD = 1e-30


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"
    EVALUATION_FAILED = "evaluation_failed"


#: Integer codes used by the compiled kernels, in Status order.
STATUS_FROM_CODE = {
    0: Status.CONVERGED,
    1: Status.MAX_ITERATIONS,
    2: Status.DIVERGED,
    3: Status.EVALUATION_FAILED,
}


def norm2(v) -> float:
    """Euclidean norm as sqrt of the dot product, shared by all drivers."""
    v = np.asarray(v, dtype=float).ravel()
    return math.sqrt(float(np.dot(v, v)))


@dataclass(frozen=True)
class SolverSettings:
    """Everything the driver needs besides the residual function.

    alpha
        Fractional order of the pseudo-Newton step (float or FractionalOrder).
    epsilon
        Diagonal regularisation of the multiplier matrix.
    tol_step, tol_residual
        Convergence requires BOTH the step norm and the residual norm under
        their tolerance after the same iteration.
    max_iter
        Iteration cap.
    divergence_bound
        Abort with Diverged once the iterate norm exceeds this.
    """

    alpha: FractionalOrder = FractionalOrder(0.5)
    epsilon: float = 1e-4
    tol_step: float = 1e-5
    tol_residual: float = 1e-4
    max_iter: int = 500
    divergence_bound: float = 1e10

    def __post_init__(self):
        object.__setattr__(self, "alpha", FractionalOrder.coerce(self.alpha))
        for name in ("epsilon", "tol_step", "tol_residual", "divergence_bound"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        object.__setattr__(self, "max_iter", int(self.max_iter))
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass(frozen=True)
class IterationTrace:
    """Per-iterate history of one solve.

    Lengths are coupled: with n steps there are n+1 iterates (x0 included),
    n step norms and n+1 residual norms.
    """

    iterates: np.ndarray
    step_norms: np.ndarray
    residual_norms: np.ndarray

    def __post_init__(self):
        iterates = np.asarray(self.iterates, dtype=float)
        steps = np.asarray(self.step_norms, dtype=float)
        residuals = np.asarray(self.residual_norms, dtype=float)
        if iterates.ndim != 2:
            raise ValueError("iterates must be a (n+1, dim) array")
        if steps.shape[0] != iterates.shape[0] - 1:
            raise ValueError("need exactly one step norm per transition")
        if residuals.shape[0] != iterates.shape[0]:
            raise ValueError("need exactly one residual norm per iterate")
        object.__setattr__(self, "iterates", iterates)
        object.__setattr__(self, "step_norms", steps)
        object.__setattr__(self, "residual_norms", residuals)


@dataclass(frozen=True)
class SolveOutcome:
    """Final status plus the diagnostics reported for every solve."""

    status: Status
    x_final: np.ndarray
    iterations: int
    final_step_norm: float
    final_residual_norm: float
    trace: Optional[IterationTrace] = None

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


@dataclass(frozen=True)
class RootRecord:
    """One distinct root found by a sweep, with the orders that reached it."""

    x: np.ndarray
    alpha: float
    outcome: SolveOutcome
    found_by: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))


@dataclass(frozen=True)
class SkippedAlpha:
    """A grid point that produced no converged root, with the reason."""

    alpha: float
    status: Status


@dataclass(frozen=True)
class RootSet:
    """Deduplicated, canonically ordered roots from an order sweep."""

    roots: tuple
    dedup_tolerance: float
    skipped: tuple = field(default_factory=tuple)

    def vectors(self) -> list:
        return [r.x for r in self.roots]


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate a residual, normalising every failure to NonRealEvaluation."""
    try:
        fx = np.asarray(f(x), dtype=float).ravel()
    except NonRealEvaluation:
        raise
    except (ArithmeticError, ValueError) as exc:
        raise NonRealEvaluation(str(exc)) from exc
    if fx.shape != x.shape:
        raise ValueError(f"residual has shape {fx.shape}, expected {x.shape}")
    if not np.all(np.isfinite(fx)):
        raise NonRealEvaluation("residual evaluated to a non-finite value")
    return fx


def fpn_step(f: Callable, x, alpha, epsilon: float) -> np.ndarray:
    """One fractional pseudo-Newton update x - P(x) * f(x).

    P is diagonal, so the product is component-wise; a point with zero
    residual is returned unchanged.
    """
    x = np.asarray(x, dtype=float)
    fx = _evaluate(f, x)
    entries = p_matrix(alpha, x, epsilon).entries
    return x - entries * fx


def fpn_update(alpha, epsilon: float) -> Callable:
    """Step closure (x, fx) -> next iterate for the driver's hot loop."""
    alpha = FractionalOrder.coerce(alpha)

    def step(x: np.ndarray, fx: np.ndarray) -> np.ndarray:
        return x - p_matrix(alpha, x, epsilon).entries * fx

    return step


def fd_jacobian(f: Callable, x, h: Optional[float] = None) -> np.ndarray:
    """Central-difference Jacobian, column k from f(x +/- h e_k).

    The default step is max(1e-6, 1e-8 * ||x||_inf), which keeps the stencil
    scaled on large iterates without collapsing near the origin.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if h is None:
        h = max(1e-6, 1e-8 * float(np.max(np.abs(x))))
    h = float(h)
    jac = np.empty((n, n))
    for k in range(n):
        bump = np.zeros(n)
        bump[k] = h
        jac[:, k] = (_evaluate(f, x + bump) - _evaluate(f, x - bump)) / (2.0 * h)
    return jac


def newton_step(f: Callable, x, h: Optional[float] = None) -> np.ndarray:
    """Classical Newton update x - J^{-1} f(x) over the finite-difference Jacobian."""
    x = np.asarray(x, dtype=float)
    fx = _evaluate(f, x)
    jac = fd_jacobian(f, x, h)
    cond = np.linalg.cond(jac)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularJacobian(f"Jacobian condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
    try:
        delta = np.linalg.solve(jac, fx)
    except np.linalg.LinAlgError as exc:
        raise SingularJacobian(str(exc)) from exc
    return x - delta


def newton_update(f: Callable, h: Optional[float] = None) -> Callable:
    """Step closure running the classical Newton baseline inside the driver."""

    def step(x: np.ndarray, fx: np.ndarray) -> np.ndarray:
        jac = fd_jacobian(f, x, h)
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularJacobian(f"Jacobian condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
        try:
            delta = np.linalg.solve(jac, fx)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        return x - delta

    return step


def aitken_accelerate(last3) -> np.ndarray:
    """Component-wise delta-squared extrapolation of three consecutive iterates.

    Components whose second difference is below the guard are passed through
    from the newest iterate unchanged, so degenerate directions never divide
    by (numerical) zero.
    """
    x0, x1, x2 = (np.asarray(v, dtype=float) for v in last3)
    den = x2 - 2.0 * x1 + x0
    out = x2.copy()
    usable = np.abs(den) >= AITKEN_GUARD
    out[usable] = x0[usable] - (x1[usable] - x0[usable]) ** 2 / den[usable]
    return out


def fixed_point_solve(f: Callable, x0, settings: SolverSettings,
                      step: Optional[Callable] = None, keep_trace: bool = False,
                      accelerate: bool = False) -> SolveOutcome:
    """Run a fixed-point iteration until converged, capped, diverged or failed.

    Parameters
    f
        Residual whose zero is sought; must return a vector of x0's length.
    x0
        Finite starting point.
    settings
        Tolerances, iteration cap and (for the default step) alpha / epsilon.
    step
        Optional iteration map (x, f(x)) -> next x; defaults to the
        fractional pseudo-Newton update built from the settings.
    keep_trace
        Attach the full IterationTrace to the outcome.
    accelerate
        Opt-in restarted delta-squared acceleration: every third iterate is
        replaced by the extrapolated point when the residual stays evaluable
        there.  Off by default.

    The outcome always encodes failures in its status instead of raising.
    """
    x = np.asarray(x0, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    if step is None:
        step = fpn_update(settings.alpha, settings.epsilon)

    def outcome(status, x_final, n, step_norm, res_norm):
        trace = None
        if keep_trace:
            trace = IterationTrace(
                iterates=np.array(iterates),
                step_norms=np.array(step_norms),
                residual_norms=np.array(residual_norms),
            )
        return SolveOutcome(status=status, x_final=np.asarray(x_final, dtype=float),
                            iterations=n, final_step_norm=step_norm,
                            final_residual_norm=res_norm, trace=trace)

    try:
        fx = _evaluate(f, x)
    except NonRealEvaluation:
        return outcome(Status.EVALUATION_FAILED, x, 0, math.nan, math.nan)

    iterates = [x.copy()]
    step_norms: list = []
    residual_norms = [norm2(fx)]

    for i in range(1, settings.max_iter + 1):
        try:
            x_next = np.asarray(step(x, fx), dtype=float)
        except (NonRealEvaluation, SingularJacobian):
            return outcome(Status.EVALUATION_FAILED, x, i - 1,
                           step_norms[-1] if step_norms else math.nan,
                           residual_norms[-1])
        if accelerate and i % 3 == 0 and len(iterates) >= 2:
            candidate = aitken_accelerate((iterates[-2], iterates[-1], x_next))
            try:
                _evaluate(f, candidate)
            except NonRealEvaluation:
                pass
            else:
                x_next = candidate
        step_norm = norm2(x_next - x)
        if not np.all(np.isfinite(x_next)) or norm2(x_next) > settings.divergence_bound:
            return outcome(Status.DIVERGED, x_next, i, step_norm, math.nan)
        try:
            fx_next = _evaluate(f, x_next)
        except NonRealEvaluation:
            return outcome(Status.EVALUATION_FAILED, x_next, i, step_norm, math.nan)
        res_norm = norm2(fx_next)
        iterates.append(x_next.copy())
        step_norms.append(step_norm)
        residual_norms.append(res_norm)
        x, fx = x_next, fx_next
        if step_norm <= settings.tol_step and res_norm <= settings.tol_residual:
            return outcome(Status.CONVERGED, x, i, step_norm, res_norm)

    return outcome(Status.MAX_ITERATIONS, x, settings.max_iter,
                   step_norms[-1], residual_norms[-1])


def estimate_order(norms: Sequence[float]) -> float:
    """Empirical convergence order from the tail of an error or step-norm sequence.

    Uses p = log(e_k+1 / e_k) / log(e_k / e_k-1) on the last three entries of
    the trailing strictly positive, strictly decreasing run.  Raises
    InsufficientData (with the reason) when that run is shorter than four
    entries, which covers both short and non-monotone tails.
    """
    seq = [float(v) for v in norms]
    if len(seq) < 4:
        raise InsufficientData(f"need at least 4 entries, got {len(seq)}")
    run = 0
    for k in range(len(seq) - 1, -1, -1):
        if seq[k] <= 0.0:
            break
        if run > 0 and seq[k] <= seq[k + 1]:
            break
        run += 1
    if run < 4:
        raise InsufficientData(
            f"trailing strictly decreasing run has {run} entries, need 4 "
            "(sequence tail is too short or non-monotone)")
    e0, e1, e2 = seq[-3], seq[-2], seq[-1]
    return math.log(e2 / e1) / math.log(e1 / e0)


def default_alpha_grid(step: float = 0.05, lower: float = -2.0, upper: float = 2.0,
                       exclusion: float = 0.01) -> list:
    """Sweep grid over [lower, upper] skipping a band around every integer.

    The band half-width keeps every grid point clear of the integer orders
    the kernel cannot take.
    """
    if not step > 0.0:
        raise ValueError("step must be positive")
    grid = []
    k = 0
    while True:
        value = round(lower + k * step, 12)
        if value > upper + 1e-12:
            break
        k += 1
        if abs(value - round(value)) <= exclusion:
            continue
        grid.append(FractionalOrder(value))
    return grid


def same_root(a, b, tolerance: float) -> bool:
    """Dedup predicate: distance below tolerance relative to root magnitude."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = 1.0 + max(norm2(a), norm2(b))
    return norm2(a - b) <= tolerance * scale


def collect_roots(converged, skipped, dedup_tolerance: float) -> RootSet:
    """Cluster converged sweep hits into a canonical RootSet.

    ``converged`` holds (x, alpha_value, outcome) triples.  Candidates are
    sorted canonically before clustering, so the result is a pure function of
    the set of hits, not of grid order; each cluster is represented by its
    best hit (smallest residual norm, then smallest alpha).
    """
    candidates = sorted(
        ((np.asarray(x, dtype=float), float(alpha), out) for x, alpha, out in converged),
        key=lambda c: (tuple(c[0]), c[2].final_residual_norm, c[1]),
    )
    clusters: list = []
    for x, alpha, out in candidates:
        for members in clusters:
            if same_root(x, members[0][0], dedup_tolerance):
                members.append((x, alpha, out))
                break
        else:
            clusters.append([(x, alpha, out)])
    records = []
    for members in clusters:
        best = min(members, key=lambda m: (m[2].final_residual_norm, m[1]))
        found_by = tuple(sorted(alpha for _, alpha, _ in members))
        records.append(RootRecord(x=best[0], alpha=best[1], outcome=best[2],
                                  found_by=found_by))
    records.sort(key=lambda r: tuple(r.x))
    return RootSet(roots=tuple(records), dedup_tolerance=dedup_tolerance,
                   skipped=tuple(sorted(skipped, key=lambda s: s.alpha)))


def alpha_sweep(f: Callable, x0, grid=None, settings: Optional[SolverSettings] = None,
                dedup_tolerance: float = 1e-3) -> RootSet:
    """Run the pseudo-Newton iteration for every order in the grid.

    Converged outcomes are deduplicated and sorted canonically; every other
    grid point lands in the skipped list with its failure status.  The same
    initial condition is reused throughout, which is the whole point: the
    order, not the start, selects the root.
    """
    if grid is None:
        grid = default_alpha_grid()
    grid = [FractionalOrder.coerce(a) for a in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if settings is None:
        settings = SolverSettings(alpha=grid[0])
    converged = []
    skipped = []
    for alpha in grid:
        out = fixed_point_solve(f, x0, replace(settings, alpha=alpha))
        if out.converged:
            converged.append((out.x_final, alpha.value, out))
        else:
            skipped.append(SkippedAlpha(alpha=alpha.value, status=out.status))
    return collect_roots(converged, skipped, dedup_tolerance)
