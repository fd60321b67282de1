"""Componentwise positive schemes for systems of ODEs.

Each component is discretized the same way as the scalar method. Two
component forms are supported:

* product form   dx_i/dt = x_i * (f_plus - f_minus), f_plus, f_minus >= 0
* affine form    dx_i/dt = f_plus + x_i * f_minus,   f_plus >= 0 >= f_minus

All denominators and coefficient functions are evaluated at the old state,
so the update is fully explicit, and each component update has a nonnegative
numerator over a denominator >= 1: componentwise nonnegativity holds for
every step size.

The order-2 denominators come from matching the h^2 term of the component
map against the chain rule: with the affine-form f_minus,

    lambda_i(x) = 2*beta_i*f_minus_i(x) - (grad f_i . F)(x) / f_i(x)

evaluated where |f_i| exceeds a small threshold and zero elsewhere (at
points where f_i vanishes both h^2 coefficients vanish with it). The kernel
argument h*lambda_i is clamped to a trust region: lambda_i grows like
1/f_i near a nullcline crossing, and an unclamped kernel there turns the
denominator into an O(1) amplifier that costs a full order of measured
convergence along orbits that cross nullclines.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .denominator import phim
from .errors import JacobianMissing, NegativeState, StepCountOverflow
from .model import Trajectory
from .schemes import MAX_STEPS, StepMap

#: |f_i| at or below this switches the component rate to zero (phi_i = h)
NEAR_EQUILIBRIUM_EPS = 1e-10

#: default trust region for the kernel argument h*lambda_i
KERNEL_ARG_CLAMP = 4.0


@dataclass(frozen=True)
class SystemComponent:
    """Signed coefficient functions for one component.

    For ``form="product"`` both callables are nonnegative on the state box;
    for ``form="affine"`` f_plus >= 0 and f_minus <= 0. Callables take the
    full state array (last axis indexes components, so batched states work).
    """

    form: str  # "product" | "affine"
    f_plus: Callable
    f_minus: Callable

    def affine_parts(self, state, idx: int):
        """(f_plus, f_minus) in the affine sign convention."""
        if self.form == "affine":
            return self.f_plus(state), self.f_minus(state)
        x_i = np.asarray(state, dtype=float)[..., idx]
        return x_i * np.asarray(self.f_plus(state), dtype=float), -np.asarray(
            self.f_minus(state), dtype=float
        )


@dataclass(frozen=True)
class SystemProblem:
    name: str
    dim: int
    F: Callable  # state -> dstate/dt
    components: tuple[SystemComponent, ...]
    jacobian: Optional[Callable] = None  # state -> (dim, dim) matrix
    conserved: Optional[Callable] = None  # state -> float diagnostic
    equilibria: tuple = ()
    box: tuple[float, float] = (0.0, 10.0)  # sampling box for sign audits

    def __post_init__(self):
        if len(self.components) != self.dim:
            raise ValueError(f"{self.name}: {len(self.components)} components for dim {self.dim}")


@dataclass(frozen=True)
class SystemDenominator:
    """Per-component denominator phi_i(h, state).

    kind "plain" is phi = h; "eq17" evaluates h * phim(clip(h * lambda_fn(state)))
    with the trust-region clip described in the module docstring.
    """

    kind: str  # "plain" | "eq17"
    lambda_fn: Optional[Callable] = None
    arg_clamp: Optional[float] = KERNEL_ARG_CLAMP

    def __call__(self, h: float, state):
        if self.kind == "plain":
            base = np.asarray(state, dtype=float)[..., 0]
            return h * np.ones_like(base)
        lam = np.asarray(self.lambda_fn(state), dtype=float)
        x = h * lam
        if self.arg_clamp is not None:
            x = np.clip(x, -self.arg_clamp, self.arg_clamp)
        return h * phim(x)


@dataclass(frozen=True)
class SystemSchemeConfig:
    """Per-component weights and denominators; alpha_i + beta_i = 1 with
    alpha_i <= 0 <= beta_i, checked on construction."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    denominators: tuple[SystemDenominator, ...]
    label: str = ""

    def __post_init__(self):
        for a, b in zip(self.alphas, self.betas):
            if a + b != 1.0 or a > 0.0 or b < 0.0:
                raise ValueError(f"inadmissible component weights ({a}, {b})")
        if not (len(self.alphas) == len(self.betas) == len(self.denominators)):
            raise ValueError("alphas/betas/denominators length mismatch")


def validate_components(sys: SystemProblem, n_samples: int = 10_000, seed: int = 0) -> float:
    """Largest sign violation of the component coefficient functions over
    random states in the system's sampling box (0 when all hold).

    Product components need f_plus, f_minus >= 0; affine components need
    f_plus >= 0 >= f_minus.
    """
    rng = np.random.default_rng(seed)
    lo, hi = sys.box
    states = rng.uniform(lo, hi, size=(n_samples, sys.dim))
    worst = 0.0
    for i, comp in enumerate(sys.components):
        fp = np.asarray(comp.f_plus(states), dtype=float)
        fm = np.asarray(comp.f_minus(states), dtype=float)
        worst = max(worst, float(np.max(-fp, initial=0.0)))
        if comp.form == "product":
            worst = max(worst, float(np.max(-fm, initial=0.0)))
        else:
            worst = max(worst, float(np.max(fm, initial=0.0)))
    return worst


def plain_config(sys: SystemProblem, betas: Optional[tuple] = None, label: str = "plain") -> SystemSchemeConfig:
    """Config with phi_i = h (first-order positive scheme)."""
    betas = betas or tuple(1.0 for _ in range(sys.dim))
    return SystemSchemeConfig(
        alphas=tuple(1.0 - b for b in betas),
        betas=tuple(betas),
        denominators=tuple(SystemDenominator(kind="plain") for _ in range(sys.dim)),
        label=label,
    )


def second_order_denominators(
    sys: SystemProblem,
    cfg: SystemSchemeConfig,
    eps: float = NEAR_EQUILIBRIUM_EPS,
    arg_clamp: Optional[float] = KERNEL_ARG_CLAMP,
) -> tuple[SystemDenominator, ...]:
    """Denominators meeting the componentwise order-2 matching condition."""
    if sys.jacobian is None:
        raise JacobianMissing(f"{sys.name}: order-2 denominators need a jacobian")

    def make_lambda(i: int, beta_i: float) -> Callable:
        comp = sys.components[i]

        def lam(state):
            state = np.asarray(state, dtype=float)
            Fv = np.asarray(sys.F(state), dtype=float)
            J = np.asarray(sys.jacobian(state), dtype=float)
            # (grad f_i . F); einsum keeps batched states working
            jf = np.einsum("...j,...j->...", J[..., i, :], Fv)
            fi = Fv[..., i]
            _, fm = comp.affine_parts(state, i)
            with np.errstate(divide="ignore", invalid="ignore"):
                full = 2.0 * beta_i * fm - jf / fi
            return np.where(np.abs(fi) <= eps, 0.0, full)

        return lam

    return tuple(
        SystemDenominator(kind="eq17", lambda_fn=make_lambda(i, cfg.betas[i]), arg_clamp=arg_clamp)
        for i in range(sys.dim)
    )


def second_order_config(sys: SystemProblem, betas: Optional[tuple] = None,
                        label: str = "nsfd2") -> SystemSchemeConfig:
    base = plain_config(sys, betas, label=label)
    return replace(base, denominators=second_order_denominators(sys, base))


def system_nsfd_step(sys: SystemProblem, cfg: SystemSchemeConfig, state, h: float):
    """One explicit componentwise step; state must be componentwise >= 0.

    Batched states of shape (..., dim) are supported.
    """
    s = np.asarray(state, dtype=float)
    if np.any(s[np.isfinite(s)] < 0.0):
        raise NegativeState("system state must be componentwise nonnegative")
    Fv = np.asarray(sys.F(s), dtype=float)
    out = np.empty_like(s)
    for i in range(sys.dim):
        fp, fm = sys.components[i].affine_parts(s, i)
        fp = np.asarray(fp, dtype=float)
        fm = np.asarray(fm, dtype=float)
        ph = np.asarray(cfg.denominators[i](h, s), dtype=float)
        x_i = s[..., i]
        with np.errstate(over="ignore", invalid="ignore"):
            num = x_i + ph * fp + ph * (cfg.alphas[i] * x_i * fm)
            den = 1.0 - ph * cfg.betas[i] * fm
            out[..., i] = np.where(Fv[..., i] == 0.0, x_i, num / den)
    return out


def system_step_map(sys: SystemProblem, cfg: SystemSchemeConfig) -> StepMap:
    return StepMap(
        label=cfg.label or "system-nsfd",
        update=lambda s, h: system_nsfd_step(sys, cfg, s, h),
        requires_representation=True,
        order_claimed=2 if cfg.denominators[0].kind == "eq17" else 1,
    )


def euler_system_map(sys: SystemProblem) -> StepMap:
    return StepMap(label="euler", update=lambda s, h: np.asarray(s, float) + h * np.asarray(sys.F(s), float))


def integrate_system(
    sys: SystemProblem,
    cfg: SystemSchemeConfig,
    state0,
    h: float,
    t_end: float,
) -> Trajectory:
    """Fold the componentwise step from t = 0 to t_end at fixed step h."""
    if h <= 0.0:
        raise ValueError(f"h = {h!r} must be > 0")
    n = int(round(t_end / h))
    if n > MAX_STEPS:
        raise StepCountOverflow(f"{t_end}/{h} needs {n} steps")
    if abs(n * h - t_end) > 1e-9 * max(1.0, abs(t_end)):
        warnings.warn(f"t_end = {t_end} is not a multiple of h = {h}", stacklevel=2)
    s = np.asarray(state0, dtype=float)
    states = np.empty((n + 1, sys.dim))
    states[0] = s
    for k in range(n):
        s = system_nsfd_step(sys, cfg, s, h)
        states[k + 1] = s
    return Trajectory(
        times=np.arange(n + 1, dtype=float) * h,
        states=states,
        scheme_label=cfg.label or "system-nsfd",
        problem_name=sys.name,
        h=h,
    )


def conserved_series(sys: SystemProblem, traj: Trajectory):
    """Per-step values of the system's conserved diagnostic, if any."""
    if sys.conserved is None:
        return None
    return np.asarray(sys.conserved(traj.states), dtype=float)


def reference_system_solution(sys: SystemProblem, state0, h_out: float, t_end: float,
                              substeps: int = 1000) -> Trajectory:
    """Classical fourth-order reference on the output grid (internal step
    h_out/substeps)."""
    n_out = int(round(t_end / h_out))
    s = np.asarray(state0, dtype=float)
    states = np.empty((n_out + 1, sys.dim))
    states[0] = s
    h_in = h_out / substeps
    for k in range(n_out):
        for _ in range(substeps):
            k1 = np.asarray(sys.F(s), float)
            k2 = np.asarray(sys.F(s + 0.5 * h_in * k1), float)
            k3 = np.asarray(sys.F(s + 0.5 * h_in * k2), float)
            k4 = np.asarray(sys.F(s + h_in * k3), float)
            s = s + (h_in / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = s
    return Trajectory(
        times=np.arange(n_out + 1, dtype=float) * h_out,
        states=states,
        scheme_label="reference",
        problem_name=sys.name,
        h=h_out,
    )


def step_map_jacobian(sys: SystemProblem, cfg: SystemSchemeConfig, state, h: float,
                      eps: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of the one-step map at ``state``."""
    s = np.asarray(state, dtype=float)
    J = np.empty((sys.dim, sys.dim))
    for j in range(sys.dim):
        e = np.zeros(sys.dim)
        e[j] = eps * max(1.0, abs(s[j]))
        J[:, j] = (system_nsfd_step(sys, cfg, s + e, h) - system_nsfd_step(sys, cfg, s - e, h)) / (2 * e[j])
    return J


@dataclass(frozen=True)
class StabilityThresholdRow:
    h: float
    rho_full: float
    rho_transverse: float


def stability_thresholds(
    sys: SystemProblem,
    cfg: SystemSchemeConfig,
    equilibrium,
    h_grid,
    fixed_line_tangent=None,
) -> list[StabilityThresholdRow]:
    """Spectral radius of the step-map Jacobian at an equilibrium over a
    step grid.

    When the equilibrium sits on a line of equilibria (``fixed_line_tangent``
    given), the map fixes the whole line, so one eigenvalue equals 1
    structurally; ``rho_transverse`` excludes the eigenvalue whose
    eigenvector aligns best with the tangent.
    """
    rows = []
    for h in h_grid:
        J = step_map_jacobian(sys, cfg, equilibrium, float(h))
        vals, vecs = np.linalg.eig(J)
        rho_full = float(np.max(np.abs(vals)))
        if fixed_line_tangent is None:
            rho_t = rho_full
        else:
            t = np.asarray(fixed_line_tangent, float)
            t = t / np.linalg.norm(t)
            align = [abs(np.vdot(t, vecs[:, k] / np.linalg.norm(vecs[:, k]))) for k in range(sys.dim)]
            drop = int(np.argmax(align))
            keep = [k for k in range(sys.dim) if k != drop]
            rho_t = float(np.max(np.abs(vals[keep])))
        rows.append(StabilityThresholdRow(h=float(h), rho_full=rho_full, rho_transverse=rho_t))
    return rows


# ---------------------------------------------------------------------------
# model registry


def lotka_volterra(a: float = 1.0, b: float = 1.0, c: float = 1.0, e: float = 1.0) -> SystemProblem:
    """Predator-prey system x' = ax - bxy, y' = -cy + exy in product form
    (x-component: f_plus = a, f_minus = by; y-component: f_plus = ex,
    f_minus = c)."""

    def F(s):
        s = np.asarray(s, dtype=float)
        x, y = s[..., 0], s[..., 1]
        return np.stack([a * x - b * x * y, -c * y + e * x * y], axis=-1)

    def jac(s):
        s = np.asarray(s, dtype=float)
        x, y = s[..., 0], s[..., 1]
        row0 = np.stack([a - b * y, -b * x], axis=-1)
        row1 = np.stack([e * y, e * x - c], axis=-1)
        return np.stack([row0, row1], axis=-2)

    def conserved(s):
        s = np.asarray(s, dtype=float)
        x, y = s[..., 0], s[..., 1]
        with np.errstate(divide="ignore"):
            return e * x - c * np.log(x) + b * y - a * np.log(y)

    return SystemProblem(
        name="lv",
        dim=2,
        F=F,
        components=(
            SystemComponent(form="product",
                            f_plus=lambda s: a * np.ones_like(np.asarray(s, float)[..., 0]),
                            f_minus=lambda s: b * np.asarray(s, float)[..., 1]),
            SystemComponent(form="product",
                            f_plus=lambda s: e * np.asarray(s, float)[..., 0],
                            f_minus=lambda s: c * np.ones_like(np.asarray(s, float)[..., 1])),
        ),
        jacobian=jac,
        conserved=conserved,
        equilibria=(np.array([0.0, 0.0]), np.array([c / e, a / b])),
    )


def sirs(beta: float = 0.3, gamma: float = 0.1, mu: float = 0.05, N: float = 1.0) -> SystemProblem:
    """SIRS compartment model in affine form:

        S' = mu*R   + S*(-beta*I/N)
        I' = beta*S*I/N + I*(-gamma)
        R' = gamma*I    + R*(-mu)

    Total population is conserved, so equilibria come in lines; the endemic
    point for total N is (gamma*N/beta, I*, gamma*I*/mu) with
    I* = N*(1 - gamma/beta)/(1 + gamma/mu).
    """
    bN = beta / N

    def F(s):
        s = np.asarray(s, dtype=float)
        S, I, R = s[..., 0], s[..., 1], s[..., 2]
        return np.stack([mu * R - bN * S * I, bN * S * I - gamma * I, gamma * I - mu * R], axis=-1)

    def jac(s):
        s = np.asarray(s, dtype=float)
        S, I = s[..., 0], s[..., 1]
        one = np.ones_like(S)
        row0 = np.stack([-bN * I, -bN * S, mu * one], axis=-1)
        row1 = np.stack([bN * I, bN * S - gamma * one, 0.0 * one], axis=-1)
        row2 = np.stack([0.0 * one, gamma * one, -mu * one], axis=-1)
        return np.stack([row0, row1, row2], axis=-2)

    i_star = N * (1.0 - gamma / beta) / (1.0 + gamma / mu)
    endemic = np.array([gamma * N / beta, i_star, gamma * i_star / mu])

    return SystemProblem(
        name="sirs",
        dim=3,
        F=F,
        components=(
            SystemComponent(form="affine",
                            f_plus=lambda s: mu * np.asarray(s, float)[..., 2],
                            f_minus=lambda s: -bN * np.asarray(s, float)[..., 1]),
            SystemComponent(form="affine",
                            f_plus=lambda s: bN * np.asarray(s, float)[..., 0] * np.asarray(s, float)[..., 1],
                            f_minus=lambda s: -gamma * np.ones_like(np.asarray(s, float)[..., 1])),
            SystemComponent(form="affine",
                            f_plus=lambda s: gamma * np.asarray(s, float)[..., 1],
                            f_minus=lambda s: -mu * np.ones_like(np.asarray(s, float)[..., 2])),
        ),
        jacobian=jac,
        conserved=lambda s: np.asarray(s, float)[..., 0] + np.asarray(s, float)[..., 1] + np.asarray(s, float)[..., 2],
        equilibria=(endemic,),
    )


_SYSTEM_FACTORIES = {"lv": lotka_volterra, "sirs": sirs}


def get_system(name: str, **params) -> SystemProblem:
    if name not in _SYSTEM_FACTORIES:
        raise KeyError(f"unknown system {name!r}; choose from {sorted(_SYSTEM_FACTORIES)}")
    return _SYSTEM_FACTORIES[name](**params)


def system_names() -> list[str]:
    return sorted(_SYSTEM_FACTORIES)


#: default start states for the benchmark runs
DEFAULT_STARTS = {"lv": (2.0, 0.5), "sirs": (0.9, 0.1, 0.0)}
