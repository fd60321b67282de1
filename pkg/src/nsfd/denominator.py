"""Denominator functions phi(h, y) and the conditions they must satisfy.

The workhorse is the kernel phim(x) = (1 - exp(-x))/x, so that

    phi(h, y) = h * phim(h * lam(y))

with lam(y) = -f'(y) + 2*beta*f_minus(y). Built this way, phi is positive
for every h > 0 regardless of the sign of lam, equals h + O(h^2) as h -> 0,
and its second h-derivative at 0 is -lam(y) = f'(y) - 2*beta*f_minus(y),
which is exactly the second-order accuracy condition (H3).

Several of the denominators printed in the source material satisfy the
negated condition d2phi/dh2(0, y) = -(f' - 2*beta*f_minus) instead; those
variants are kept available (they are what the errata report measures)
but every scheme labeled "derived" uses the construction above.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NonPositiveStep
from .model import Representation, ScalarProblem, SchemeConfig

#: below this |x| the kernel is evaluated by truncated series: truncation
#: error <= 1e-21 while the expm1 route starts losing digits to cancellation
SERIES_CUTOFF = 1e-5

#: kernel argument floor: exp(-x) overflows float64 below roughly -709, so
#: the kernel saturates there (the true value is not representable anyway)
ARG_FLOOR = -700.0

#: default step sizes probed by the stability condition (H2)
H2_PROBES = (0.1, 1.0, 10.0, 100.0)


def phim(x):
    """The kernel (1 - exp(-x))/x with its removable singularity filled.

    Accepts scalars or arrays. Always positive; phim(0) = 1. Evaluated by a
    truncated series below ``SERIES_CUTOFF`` and through expm1 elsewhere to
    avoid cancellation; saturates at ``ARG_FLOOR`` to stay finite.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if abs(x) < SERIES_CUTOFF:
            return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0
        if x < ARG_FLOOR:
            x = ARG_FLOOR
        return -np.expm1(-x) / x
    arr = np.asarray(x, dtype=float)
    clipped = np.maximum(arr, ARG_FLOOR)
    small = np.abs(arr) < SERIES_CUTOFF
    safe = np.where(small, 1.0, clipped)
    with np.errstate(over="ignore", invalid="ignore"):
        main = -np.expm1(-safe) / safe
        series = 1.0 - arr / 2.0 + arr * arr / 6.0 - arr * arr * arr / 24.0
    return np.where(small, series, main)


@dataclass(frozen=True)
class DenominatorSpec:
    """A denominator function family.

    kind "eq17" evaluates h * phim(h * lambda_fn(y)); "constant_rate" is the
    state-independent special case h * phim(h * rate) (rate may be negative,
    e.g. the exact logistic denominator (exp(2h) - 1)/2 has rate -2);
    "custom" delegates to ``phi_fn(h, y)`` unchanged.
    """

    kind: str  # "eq17" | "constant_rate" | "custom"
    lambda_fn: Optional[Callable] = None
    rate: Optional[float] = None
    phi_fn: Optional[Callable] = None
    label: str = ""

    def __post_init__(self):
        if self.kind == "eq17" and self.lambda_fn is None:
            raise ValueError("eq17 denominator needs lambda_fn")
        if self.kind == "constant_rate" and self.rate is None:
            raise ValueError("constant_rate denominator needs rate")
        if self.kind == "custom" and self.phi_fn is None:
            raise ValueError("custom denominator needs phi_fn")
        if self.kind not in ("eq17", "constant_rate", "custom"):
            raise ValueError(f"unknown denominator kind {self.kind!r}")


def lambda_from_scheme(problem: ScalarProblem, rep: Representation, beta: float) -> Callable:
    """The rate function lam(y) = -f'(y) + 2*beta*f_minus(y)."""

    def lam(y):
        return -np.asarray(problem.df(y), dtype=float) + 2.0 * beta * np.asarray(
            rep.f_minus(y), dtype=float
        )

    return lam


def derived_denominator(
    problem: ScalarProblem, rep: Representation, beta: float, label: str = ""
) -> DenominatorSpec:
    """The order-2 denominator induced by a representation and weight beta."""
    return DenominatorSpec(
        kind="eq17",
        lambda_fn=lambda_from_scheme(problem, rep, beta),
        label=label or f"derived(beta={beta:g})",
    )


def constant_rate(rate: float, label: str = "") -> DenominatorSpec:
    return DenominatorSpec(kind="constant_rate", rate=rate, label=label or f"rate({rate:g})")


def phi(spec: DenominatorSpec, h, y):
    """Evaluate the denominator at step size h > 0 and state y.

    ``h`` may be an array broadcastable against ``y`` (used by batched
    property audits where every trajectory carries its own step size).
    """
    if np.any(np.asarray(h) <= 0.0):
        raise NonPositiveStep(f"h = {h!r} must be > 0")
    if spec.kind == "eq17":
        return h * phim(h * np.asarray(spec.lambda_fn(y), dtype=float))
    if spec.kind == "constant_rate":
        val = h * phim(h * spec.rate)
        if np.ndim(val) == 0 and np.ndim(y) != 0:
            return np.full(np.shape(y), val)
        return val
    return spec.phi_fn(h, y)


def _second_h_derivative_at_zero(spec: DenominatorSpec, y: float, scale: float) -> float:
    """d2phi/dh2(0, y) by one-sided second differences with two Richardson
    levels; phi(0, y) = 0 by consistency so only positive steps are used."""
    h0 = 1e-3 / (1.0 + abs(scale))

    def d2(h):
        return (float(phi(spec, 2.0 * h, y)) - 2.0 * float(phi(spec, h, y))) / (h * h)

    r = lambda h: 2.0 * d2(h / 2.0) - d2(h)  # noqa: E731
    return (4.0 * r(h0 / 2.0) - r(h0)) / 3.0


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the (H1)-(H4) checks with one witness string per failure."""

    h1: bool
    h2: bool
    h3: bool
    h4: bool
    witnesses: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.h1 and self.h2 and self.h3 and self.h4

    def __str__(self) -> str:
        lines = [
            f"H1 (positivity, phi = h + O(h^2)): {'pass' if self.h1 else 'FAIL'}",
            f"H2 (stability bound at stable equilibria): {'pass' if self.h2 else 'FAIL'}",
            f"H3 (order-2 condition on d2phi/dh2): {'pass' if self.h3 else 'FAIL'}",
            f"H4 (weights alpha + beta = 1, alpha <= 0 <= beta): {'pass' if self.h4 else 'FAIL'}",
        ]
        lines += [f"  note: {w}" for w in self.witnesses]
        return "\n".join(lines)


def check_H_conditions(
    problem: ScalarProblem,
    rep: Representation,
    config: SchemeConfig,
    spec: DenominatorSpec,
    n_y: int = 100,
) -> ConditionReport:
    """Audit the four conditions (H1)-(H4) under which the weighted scheme
    is positive, elementary stable and second-order accurate.

    H1 and H3 are sampled over the domain window; H2 is probed at the stable
    equilibria over ``H2_PROBES`` (vacuously true where the bracket
    2*beta*f_minus - f' is nonpositive); H4 is exact arithmetic on the
    weights.
    """
    lo, hi = problem.domain_hint
    ys = np.linspace(max(lo, 0.0), hi, n_y)
    notes: list[str] = []

    # H1: positivity on an (h, y) grid and phi/h -> 1 with bounded slope
    h1 = True
    h_grid = np.logspace(-3, 2, 11)
    for h in h_grid:
        vals = np.asarray(phi(spec, float(h), ys), dtype=float)
        if np.any(vals <= 0.0) or not np.all(np.isfinite(vals)):
            h1 = False
            notes.append(f"H1: phi({h:.3g}, y) not positive/finite somewhere")
            break
    if h1:
        cs = []
        for h in (1e-2, 1e-3, 1e-4):
            vals = np.asarray(phi(spec, h, ys), dtype=float)
            cs.append(float(np.max(np.abs(vals / h - 1.0))) / h)
        if not all(np.isfinite(cs)):
            h1 = False
            notes.append("H1: phi/h - 1 not O(h) (non-finite slope estimate)")
        elif cs[2] > 4.0 * cs[0] + 1e-9:
            h1 = False
            notes.append(f"H1: |phi/h - 1|/h grows as h -> 0: {cs}")

    # H2: phi(h, y*) * (2*beta*f_minus(y*) - f'(y*)) < 2 at stable equilibria
    h2 = True
    for eq in problem.stable_equilibria:
        bracket = 2.0 * config.beta * float(rep.f_minus(eq.y_star)) - eq.derivative_at
        if bracket <= 0.0:
            notes.append(
                f"H2: vacuous at y* = {eq.y_star:.6g} "
                f"(2*beta*f_minus - f' = {bracket:.6g} <= 0)"
            )
            continue
        for h in H2_PROBES:
            lhs = float(phi(spec, h, eq.y_star)) * bracket
            if not lhs < 2.0:
                h2 = False
                notes.append(f"H2: fails at y* = {eq.y_star:.6g}, h = {h:g} (phi*bracket = {lhs:.6g})")

    # H3: d2phi/dh2(0, y) = f'(y) - 2*beta*f_minus(y) on samples
    h3 = True
    worst, worst_y = 0.0, float(ys[0])
    for y in ys:
        target = float(problem.df(y)) - 2.0 * config.beta * float(rep.f_minus(y))
        est = _second_h_derivative_at_zero(spec, float(y), target)
        err = abs(est - target) / (1.0 + abs(target))
        if err > worst:
            worst, worst_y = err, float(y)
    if worst > 1e-4:
        h3 = False
        notes.append(f"H3: d2phi/dh2(0, y) mismatch, relative error {worst:.3e} at y = {worst_y:.6g}")

    # H4: exact arithmetic on the weights
    h4 = config.weights_admissible
    if not h4:
        notes.append(f"H4: weights (alpha, beta) = ({config.alpha}, {config.beta}) inadmissible")

    return ConditionReport(h1=h1, h2=h2, h3=h3, h4=h4, witnesses=tuple(notes))
