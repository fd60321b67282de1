"""Step maps and fixed-step integration for scalar problems.

The positive scheme advances by

    y1 = (y + phi*f_plus(y) + phi*alpha*y*f_minus(y)) / (1 - phi*beta*f_minus(y))

with phi = phi(spec, h, y). Every term in the numerator is nonnegative and
the denominator is at least 1, so iterates from y >= 0 stay nonnegative in
floating point, not just in exact arithmetic. Points with f(y) = 0 are fixed
exactly.

Baselines from the comparison experiments live here too: explicit Euler,
Heun's method (the RK2 variant used throughout), the branching
positivity-preserving logistic scheme it is measured against, and the
first-order nonstandard schemes for the cubic, Monod and sine equations.

All step updates accept scalar or array states, so property audits can run
batched.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .denominator import DenominatorSpec, phi, phim
from .errors import (
    NegativeState,
    OracleSelfCheckFailed,
    ParameterOutOfRange,
    StepCountOverflow,
)
from .model import Representation, ScalarProblem, SchemeConfig, Trajectory

MAX_STEPS = 100_000_000


@dataclass(frozen=True)
class StepMap:
    """A one-step update rule y_{n+1} = update(y_n, h).

    ``update`` must be deterministic and vectorized over the state argument.
    """

    label: str
    update: Callable
    requires_representation: bool = False
    order_claimed: Union[int, str] = 1  # 1 | 2 | "exact"


def nsfd_step(
    problem: ScalarProblem,
    rep: Representation,
    config: SchemeConfig,
    spec: DenominatorSpec,
    y_n,
    h: float,
):
    """One step of the positive nonstandard scheme. Requires y_n >= 0."""
    y = np.asarray(y_n, dtype=float)
    if np.any(y < 0.0):
        raise NegativeState(f"nsfd_step needs y_n >= 0, got min {float(np.min(y)):.6g}")
    fy = np.asarray(problem.f(y), dtype=float)
    ph = np.asarray(phi(spec, h, y), dtype=float)
    fp = np.asarray(rep.f_plus(y), dtype=float)
    fm = np.asarray(rep.f_minus(y), dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        num = y + ph * fp + ph * (config.alpha * y * fm)
        den = 1.0 - ph * config.beta * fm
        out = np.where(fy == 0.0, y, num / den)
    return float(out) if np.ndim(y_n) == 0 else out


def nsfd_step_map(
    problem: ScalarProblem,
    rep: Representation,
    config: SchemeConfig,
    spec: DenominatorSpec,
    label: str = "",
) -> StepMap:
    return StepMap(
        label=label or config.label or "nsfd",
        update=lambda y, h: nsfd_step(problem, rep, config, spec, y, h),
        requires_representation=True,
        order_claimed=2,
    )


def euler_step(problem: ScalarProblem, y_n, h: float):
    return y_n + h * problem.f(y_n)


def euler_map(problem: ScalarProblem) -> StepMap:
    return StepMap(label="euler", update=lambda y, h: euler_step(problem, y, h))


def rk2_step(problem: ScalarProblem, y_n, h: float):
    """Heun's method: y + (h/2)*(f(y) + f(y + h*f(y)))."""
    k1 = problem.f(y_n)
    k2 = problem.f(y_n + h * k1)
    return y_n + 0.5 * h * (k1 + k2)


def rk2_map(problem: ScalarProblem) -> StepMap:
    return StepMap(label="rk2", update=lambda y, h: rk2_step(problem, y, h), order_claimed=2)


def wood_kojouharov_step(y_n, h: float):
    """Branching positive scheme for the logistic equation, phi = 1 - e^{-h}.

    The branch follows the sign of f(y) = 2y - y^2; both branches keep
    nonnegative states nonnegative.
    """
    y = np.asarray(y_n, dtype=float)
    ph = -np.expm1(-h)
    fy = 2.0 * y - y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(fy >= 0.0, y + ph * fy, y * y / (y - ph * fy))
    return float(out) if np.ndim(y_n) == 0 else out


def wood_map() -> StepMap:
    return StepMap(label="wood", update=lambda y, h: wood_kojouharov_step(y, h))


def mickens_cubic_step(y_n, h: float):
    """First-order nonstandard scheme for y' = y(1 - y^2) with maximum
    symmetry in the cubic term; phi = (1 - e^{-2h})/2."""
    y = np.asarray(y_n, dtype=float)
    ph = 0.5 * (-np.expm1(-2.0 * h))
    out = y * ((2.0 + ph) + ph * y * y) / ((2.0 - ph) + 3.0 * ph * y * y)
    return float(out) if np.ndim(y_n) == 0 else out


def mickens_monod_step(y_n, h: float, mu: float):
    """First-order nonstandard scheme for the modified Monod equation;
    phi = (1 - e^{-Rh})/R with R = mu - 1. Requires mu > 1."""
    if mu <= 1.0:
        raise ParameterOutOfRange(f"Monod parameter must exceed 1, got {mu}")
    y = np.asarray(y_n, dtype=float)
    R = mu - 1.0
    ph = h * phim(R * h)
    ratio = y / (1.0 + y)
    out = (y + ph * (mu - 1.0) * ratio) / (1.0 + ph * (mu + 1.0) * ratio)
    return float(out) if np.ndim(y_n) == 0 else out


def mickens_sine_step(y_n, h: float):
    """First-order nonstandard scheme for y' = sin(pi*y);
    phi = (1 - e^{-pi*h})/pi < 1/pi keeps iterates inside [0, inf)."""
    y = np.asarray(y_n, dtype=float)
    ph = h * phim(np.pi * h)
    out = y + ph * np.sin(np.pi * y)
    return float(out) if np.ndim(y_n) == 0 else out


def powerlaw_nsfd_step(a: float, b: float, m: int, y_n, h: float):
    """Positive scheme for y' = a*y - b*y^m solved from the one-sided form

        (y1 - y)/phi = a*y - b*(1 - m/2)*y^m - b*(m/2)*y^{m-1}*y1

    with phi = (1 - e^{-ah})/a as printed in the source scheme. Note this
    constant-rate phi satisfies the negated order-2 condition; the derived
    variant uses rate -a instead (see the errata report).
    """
    if a <= 0.0 or b <= 0.0:
        raise ParameterOutOfRange(f"need a, b > 0, got a = {a}, b = {b}")
    if m < 2 or int(m) != m:
        raise ParameterOutOfRange(f"need integer m >= 2, got {m}")
    y = np.asarray(y_n, dtype=float)
    if np.any(y < 0.0):
        raise NegativeState("powerlaw scheme needs y_n >= 0")
    ph = h * phim(a * h)
    num = y + ph * (a * y - b * (1.0 - m / 2.0) * y**m)
    den = 1.0 + ph * b * (m / 2.0) * y ** (m - 1)
    out = num / den
    return float(out) if np.ndim(y_n) == 0 else out


def integrate(
    step: StepMap,
    y0,
    h: float,
    t_end: float,
    problem_name: str = "",
) -> Trajectory:
    """Fold a step map from t = 0 to t_end at fixed step h.

    t_end is rounded to a whole number of steps (with a warning when the
    rounding is not exact).
    """
    if h <= 0.0:
        raise ValueError(f"h = {h!r} must be > 0")
    n = int(round(t_end / h))
    if n > MAX_STEPS:
        raise StepCountOverflow(f"{t_end}/{h} needs {n} steps (limit {MAX_STEPS})")
    if abs(n * h - t_end) > 1e-9 * max(1.0, abs(t_end)):
        warnings.warn(
            f"t_end = {t_end} is not a multiple of h = {h}; integrating to {n * h}",
            stacklevel=2,
        )
    start = np.asarray(y0, dtype=float)
    states = np.empty((n + 1,) + start.shape, dtype=float)
    states[0] = start
    y = float(start) if start.ndim == 0 else start
    for k in range(n):
        y = step.update(y, h)
        states[k + 1] = y
    return Trajectory(
        times=np.arange(n + 1, dtype=float) * h,
        states=states,
        scheme_label=step.label,
        problem_name=problem_name,
        h=h,
    )


def _rk4(f: Callable, y0: float, t_end: float, n: int) -> float:
    y = float(y0)
    h = t_end / n
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def reference_solution(
    problem: ScalarProblem,
    y0: float,
    h_out: float,
    t_end: float,
    substeps: int = 1000,
) -> Trajectory:
    """Ground-truth trajectory on the output grid from a classical
    fourth-order one-step method run at internal step h_out/substeps.

    When the problem carries an exact solution the oracle is checked
    against it to 1e-10 and the run aborts on disagreement.
    """
    n_out = int(round(t_end / h_out))
    times = np.arange(n_out + 1, dtype=float) * h_out
    states = np.empty(n_out + 1)
    states[0] = y = float(y0)
    fn = lambda y: float(problem.f(y))  # noqa: E731
    for k in range(n_out):
        y = _rk4(fn, y, h_out, substeps)
        states[k + 1] = y

    if problem.exact_solution is not None:
        exact = np.asarray(problem.exact_solution(times, y0), dtype=float)
        gap = float(np.max(np.abs(exact - states)))
        if gap > 1e-10:
            raise OracleSelfCheckFailed(
                f"{problem.name}: reference integrator differs from the exact "
                f"solution by {gap:.3e}"
            )
        states = exact  # prefer the closed form once it is validated
    return Trajectory(
        times=times, states=states, scheme_label="reference",
        problem_name=problem.name, h=h_out,
    )


def reference_value(problem: ScalarProblem, y0: float, t_end: float) -> float:
    """Reference state at a single final time (cached closed form when
    available, otherwise the fourth-order oracle over the whole span)."""
    if problem.exact_solution is not None:
        return float(problem.exact_solution(t_end, y0))
    key = (problem.name, float(y0), float(t_end))
    if key not in _REFERENCE_CACHE:
        traj = reference_solution(problem, y0, h_out=t_end, t_end=t_end, substeps=4000)
        _REFERENCE_CACHE[key] = float(traj.states[-1])
    return _REFERENCE_CACHE[key]


_REFERENCE_CACHE: dict = {}


def local_error_slope(
    problem: ScalarProblem,
    step: StepMap,
    y: float,
    h_list=(1e-1, 1e-2, 1e-3, 1e-4),
) -> float:
    """Fitted slope of log one-step error versus log h against the flow."""
    errs = []
    for h in h_list:
        flow = reference_value(problem, y, h)
        errs.append(abs(float(step.update(y, h)) - flow))
    errs = np.asarray(errs)
    keep = errs > 1e-15
    return float(np.polyfit(np.log(np.asarray(h_list)[keep]), np.log(errs[keep]), 1)[0])
