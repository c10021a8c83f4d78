"""Dynamical systems and their solutions over the curve C = R.

Generic systems are integrated with an adaptive Dormand-Prince RK45 pair (a
fixed-step RK4 is available for jet-heavy runs); linear systems get exact
flows through the matrix exponential.  Both the time and the state arguments
of every flow are jet-polymorphic: integration is performed on the rescaled
system dy/ds = t * vhat(y) over s in [0, 1], so a jet value of t rides
through the same arithmetic as the state and step-size selection is frozen
to primal values.  The derivative a jet extracts is therefore the derivative
of the numerical map actually computed.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fields import (
    FLOW_TOL,
    JET_TOL,
    LawCheck,
    LinearVectorField,
    VectorField,
    commutes,
    tangent_lift,
)
from .jets import Jet, jet_depth, primal_value
from .kernel import (
    ShapeError,
    SmoothMap,
    Space,
    compose,
    structural_map,
    tangent,
)
from . import dsl
from .sampling import DEFAULT_SEED, LAW_GRID_SAMPLES, LAW_GRID_TIMES, sample_points

__all__ = [
    "CurveObject",
    "DynamicalSystem",
    "Flow",
    "Connection",
    "IntegratorConfig",
    "StepSizeCollapse",
    "MaxStepsExceeded",
    "NonCommutingFields",
    "integrate",
    "flow_of",
    "expm",
    "linear_flow",
    "generator",
    "sigma_flow",
    "flow_laws",
    "commuting_flows_check",
    "sum_flow",
    "eta",
    "reverse",
    "solve_nth_order",
    "holonomic_jet",
    "geodesic_flow",
    "acceleration_residual",
    "augment_time",
    "flow_smooth_map",
    "curve",
]


class StepSizeCollapse(ArithmeticError):
    """The adaptive step underflowed or the state blew up: the strongest
    finite-time non-existence signal the integrator can give."""

    def __init__(self, t_reached: float):
        self.t_reached = t_reached
        super().__init__(f"step size collapse near t={t_reached:.3f}")


class MaxStepsExceeded(ArithmeticError):
    def __init__(self, t_reached: float, max_steps: int):
        self.t_reached = t_reached
        super().__init__(f"exceeded {max_steps} steps at t={t_reached:.3f}")


class NonCommutingFields(ValueError):
    def __init__(self, check: LawCheck):
        self.check = check
        super().__init__(
            f"fields do not commute (residual {check.max_residual:.3e})"
        )


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"  # "rk45" or "rk4"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_steps: int = 10**6
    h: float = 1e-3  # fixed step for rk4 (in time units)

    def describe(self) -> dict:
        if self.method == "rk4":
            return {"method": "rk4-fixed", "h": self.h}
        return {
            "method": "rk45",
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_steps": self.max_steps,
        }


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class DynamicalSystem:
    """(space, field, initial map), optionally of higher order.

    For order n the field lives on T^(n-1) of the base space and must
    satisfy the section conditions checked by :func:`solve_nth_order`.
    """

    space: Space
    vector_field: VectorField
    initial_map: SmoothMap | None = None
    order: int = 1

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        expected = self.space.tangent_power(self.order - 1)
        if self.vector_field.space != expected:
            raise ShapeError(
                f"order-{self.order} field must live on R^{expected.dim}"
            )
        if self.initial_map is not None and self.initial_map.codomain != expected:
            raise ShapeError("initial map must land in the field's space")

    @classmethod
    def from_field_spec(cls, spec: dsl.FieldSpec) -> "DynamicalSystem":
        """Build a first-order system from a field spec; time-dependent specs
        are made autonomous by :func:`augment_time`."""
        if spec.time_dependent:
            return augment_time(spec)
        vf = VectorField(Space(spec.arity), dsl.compile_spec(spec))
        return cls(vf.space, vf)


@dataclass(frozen=True)
class Flow:
    """A callable (t, x) -> point, with provenance and its defining config.

    ``evaluate`` accepts jets in both arguments.  Instances are immutable
    and safe to call concurrently.
    """

    space: Space
    evaluate: Callable[[object, Sequence], list] = field(repr=False)
    provenance: dict = field(default_factory=dict)

    def __call__(self, t, xs):
        return self.evaluate(t, xs)


@dataclass(frozen=True)
class Connection:
    """Christoffel data in the flat chart: gamma maps (x, u) to the
    quadratic correction vector, so geodesics solve u' = -gamma(x, u)."""

    base_dim: int
    gamma: SmoothMap

    def __post_init__(self):
        if self.gamma.domain.dim != 2 * self.base_dim:
            raise ShapeError("christoffel map must take (x, u)")
        if self.gamma.codomain.dim != self.base_dim:
            raise ShapeError("christoffel map must produce a base vector")

    def quadratic_check(
        self, samples=None, tol: float = JET_TOL, seed: int = DEFAULT_SEED
    ) -> LawCheck:
        """gamma(x, a*u) = a^2 gamma(x, u) on samples."""
        n = self.base_dim
        if samples is None:
            samples = sample_points(2 * n + 1, count=25, seed=seed)
        worst, witness = 0.0, None
        for row in samples:
            x, u, a = row[:n], row[n : 2 * n], row[2 * n]
            scaled = self.gamma(list(x) + [a * ui for ui in u])
            direct = self.gamma(list(x) + list(u))
            residual = max(
                abs(primal_value(s) - a * a * primal_value(d))
                for s, d in zip(scaled, direct)
            )
            if residual > worst:
                worst, witness = residual, tuple(row)
        return LawCheck("christoffel-quadratic", worst <= tol, worst, witness, seed)


# -- the curve object ---------------------------------------------------------


@dataclass(frozen=True)
class CurveObject:
    """C = R with the unit field and base point 0."""

    space: Space
    c0: float
    c1: VectorField

    def self_check(self, tol: float = JET_TOL) -> list[LawCheck]:
        """Startup checks: c1 is a section with constant component 1 and
        commutes with itself."""
        pts = sample_points(1, count=25, seed=DEFAULT_SEED)
        sect = max(
            abs(primal_value(self.c1.full_map(p)[0]) - p[0]) for p in pts
        )
        comp = max(abs(primal_value(self.c1.vhat(p)[0]) - 1.0) for p in pts)
        return [
            LawCheck("curve-section", sect <= tol, sect, None, DEFAULT_SEED),
            LawCheck("curve-unit-component", comp <= tol, comp, None, DEFAULT_SEED),
            commutes(self.c1, self.c1, tol=tol),
        ]


@functools.lru_cache(maxsize=1)
def curve() -> CurveObject:
    """The curve object, validated once on first use."""
    space = Space(1)
    c1 = VectorField(
        space, SmoothMap(space, space, lambda xs: [1.0], name="unit_field")
    )
    obj = CurveObject(space, 0.0, c1)
    for check in obj.self_check():
        if not check.passed:
            raise AssertionError(f"curve object failed {check.law}")
    return obj


# -- integration ---------------------------------------------------------------

# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# b5 - b4: coefficients of the embedded error estimate.
_DP_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_STATE_NORM_LIMIT = 1e12
_MIN_STEP = 1e-14


def _axpy(y, h, k):
    return [yi + h * ki for yi, ki in zip(y, k)]


def _rk_stage_state(y, h, coeffs, ks):
    out = list(y)
    for a, k in zip(coeffs, ks):
        if a != 0.0:
            out = _axpy(out, h * a, k)
    return out


def _integrate_scaled(rhs, y0: list, cfg: IntegratorConfig, t_scale) -> list:
    """Integrate dy/ds = rhs(y) over s in [0, 1].

    ``t_scale`` is the original time value (used only to convert the reached
    fraction back to time units in errors); the controller reads primal
    values exclusively, so jets in the state ride along untouched.
    """

    if cfg.method == "rk4":
        return _rk4_fixed(rhs, y0, cfg, t_scale)
    if cfg.method != "rk45":
        raise ValueError(f"unknown integrator method {cfg.method!r}")

    y = list(y0)
    s = 0.0
    h = 0.01
    k1 = rhs(y)
    steps = 0
    while s < 1.0:
        if steps >= cfg.max_steps:
            raise MaxStepsExceeded(s * primal_value(t_scale), cfg.max_steps)
        steps += 1
        if h < _MIN_STEP or not math.isfinite(h):
            raise StepSizeCollapse(s * primal_value(t_scale))
        last = h >= 1.0 - s
        h_step = (1.0 - s) if last else h

        ks = [k1]
        for i in range(1, 7):
            stage_y = _rk_stage_state(y, h_step, _DP_A[i], ks)
            ks.append(rhs(stage_y))

        y_new = list(y)
        for b, k in zip(_DP_B5, ks):
            if b != 0.0:
                y_new = _axpy(y_new, h_step * b, k)

        # Error estimate and norm from primal parts only: jets never steer.
        err = 0.0
        for i in range(len(y)):
            e = 0.0
            for c, k in zip(_DP_E, ks):
                if c != 0.0:
                    e += c * primal_value(k[i])
            e *= h_step
            scale = cfg.abs_tol + cfg.rel_tol * max(
                abs(primal_value(y[i])), abs(primal_value(y_new[i]))
            )
            err = max(err, abs(e) / scale)

        if err <= 1.0:
            s = 1.0 if last else s + h_step
            y = y_new
            k1 = ks[6]  # FSAL
            norm = max((abs(primal_value(v)) for v in y), default=0.0)
            if not math.isfinite(norm) or norm > _STATE_NORM_LIMIT:
                raise StepSizeCollapse(s * primal_value(t_scale))
            h = h_step * (5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2)))
        else:
            h = h_step * max(0.2, 0.9 * err**-0.2)
    return y


def _rk4_fixed(rhs, y0: list, cfg: IntegratorConfig, t_scale) -> list:
    span = abs(primal_value(t_scale))
    steps = max(1, math.ceil(span / cfg.h)) if span > 0.0 else 1
    h = 1.0 / steps
    y = list(y0)
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(_axpy(y, h / 2, k1))
        k3 = rhs(_axpy(y, h / 2, k2))
        k4 = rhs(_axpy(y, h, k3))
        y = [
            yi + (h / 6) * (a + 2 * b + 2 * c + d)
            for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
        ]
        norm = max((abs(primal_value(v)) for v in y), default=0.0)
        if not math.isfinite(norm) or norm > _STATE_NORM_LIMIT:
            raise StepSizeCollapse(primal_value(t_scale))
    return y


def _integrate_field(vhat: SmoothMap, t, xs: Sequence, cfg: IntegratorConfig) -> list:
    """Solve y' = vhat(y), y(0) = xs, up to time t (t and xs may be jets)."""
    xs = list(xs)
    if not math.isfinite(primal_value(t)):
        raise ValueError("integration time must be finite")
    if isinstance(t, (int, float)) and t == 0.0 and not any(
        isinstance(v, Jet) for v in xs
    ):
        return xs

    def rhs(y):
        vals = vhat.evaluator(list(y))
        return [t * v for v in vals]

    return _integrate_scaled(rhs, xs, cfg, t)


def integrate(
    system: DynamicalSystem, t, x0: Sequence, cfg: IntegratorConfig = DEFAULT_CONFIG
) -> list:
    """Approximate the solution of a first-order system at time t from x0
    (x0 lives in the domain of the initial map when one is present)."""
    if system.order != 1:
        raise ShapeError("integrate handles order 1; use solve_nth_order")
    y0 = list(x0)
    if system.initial_map is not None:
        y0 = system.initial_map(y0)
    return _integrate_field(system.vector_field.vhat, t, y0, cfg)


def flow_of(v: VectorField, cfg: IntegratorConfig = DEFAULT_CONFIG) -> Flow:
    """The flow of a field, integrator-backed."""

    def evaluate(t, xs):
        return _integrate_field(v.vhat, t, xs, cfg)

    return Flow(v.space, evaluate, {"kind": "integrator", **cfg.describe()})


# -- matrix exponential --------------------------------------------------------

_PADE13_B = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_PADE13_THETA = 5.371920351148152


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with the order-13 diagonal
    Pade approximant."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError("expm needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("expm requires finite entries")
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))

    norm = float(np.max(np.abs(A).sum(axis=0)))  # 1-norm
    squarings = 0
    if norm > _PADE13_THETA:
        squarings = int(math.ceil(math.log2(norm / _PADE13_THETA)))
    As = A / (2.0**squarings)

    ident = np.eye(n)
    b = _PADE13_B
    A2 = As @ As
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = As @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6
        + b[5] * A4
        + b[3] * A2
        + b[1] * ident
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6
        + b[4] * A4
        + b[2] * A2
        + b[0] * ident
    )
    R = np.linalg.solve(V - U, U + V)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(squarings):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise OverflowError("matrix exponential overflowed")
    return R


def _jet_matvec(rows, xs):
    return [sum(a * x for a, x in zip(row, xs)) for row in rows]


def linear_flow(A) -> Flow:
    """The exact flow t -> expm(tA) of a linear field.

    Float times go through a per-flow memo of expm(tA).  A jet time t is
    split as primal + nilpotent part d; expm(tA) = expm(t0 A) * sum_k
    (dA)^k / k! truncated at the jet depth, which is exact.
    """

    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError("linear_flow needs a square matrix")
    n = A.shape[0]
    powers = [np.eye(n), A]
    memo: dict[float, np.ndarray] = {}

    def expm_at(t0: float) -> np.ndarray:
        got = memo.get(t0)
        if got is None:
            got = expm(t0 * A)
            memo[t0] = got
        return got

    def evaluate(t, xs):
        xs = list(xs)
        depth = jet_depth(t)
        E0 = expm_at(primal_value(t))
        if depth == 0:
            return _jet_matvec(E0.tolist(), xs)
        while len(powers) <= depth:
            powers.append(powers[-1] @ A)
        d = t - primal_value(t)  # nilpotent at the jet level of t
        # rows of E0 (I + dA + d^2 A^2/2 + ...) with jet-scalar entries
        series_rows = []
        fact = 1.0
        mats = [E0]
        for k in range(1, depth + 1):
            fact *= k
            mats.append((E0 @ powers[k]) / fact)
        dk = [1.0]
        for k in range(1, depth + 1):
            dk.append(dk[-1] * d)
        for i in range(n):
            row = []
            for j in range(n):
                acc = mats[0][i, j]
                for k in range(1, depth + 1):
                    acc = acc + dk[k] * mats[k][i, j]
                row.append(acc)
            series_rows.append(row)
        return _jet_matvec(series_rows, xs)

    return Flow(Space(n), evaluate, {"kind": "matrix exponential"})


# -- flows as maps, generators, laws -------------------------------------------


def flow_smooth_map(flow: Flow) -> SmoothMap:
    """The flow as a map C x M -> M, so the kernel can differentiate it."""
    n = flow.space.dim

    def ev(xs):
        return flow.evaluate(xs[0], xs[1:])

    return SmoothMap(Space(1 + n), flow.space, ev, name="flow")


def generator(flow: Flow) -> VectorField:
    """The derivative of the flow at time 0, by one jet evaluation."""
    n = flow.space.dim

    def ev(xs):
        # Fresh outermost jet level for the time direction; the state is
        # lifted as constant in that direction.
        t = Jet(0.0, 1.0)
        lifted = [Jet(x, 0.0) for x in xs]
        ys = flow.evaluate(t, lifted)
        return [y.tangent if isinstance(y, Jet) else 0.0 for y in ys]

    return VectorField(flow.space, SmoothMap(flow.space, flow.space, ev, name="gen"))


def sigma_flow(cfg: IntegratorConfig = DEFAULT_CONFIG) -> Flow:
    """The flow of the unit field on C; numerically this is addition."""
    return flow_of(curve().c1, cfg)


def eta(cfg: IntegratorConfig = DEFAULT_CONFIG) -> SmoothMap:
    """Time reversal: the solution of the negated unit field from 0,
    numerically t -> -t (computed through the integrator)."""
    space = Space(1)
    neg_unit = VectorField(
        space, SmoothMap(space, space, lambda xs: [-1.0], name="neg_unit")
    )

    def ev(xs):
        return _integrate_field(neg_unit.vhat, xs[0], [0.0], cfg)

    return SmoothMap(space, space, ev, name="eta")


def reverse(flow: Flow, cfg: IntegratorConfig = DEFAULT_CONFIG) -> Flow:
    """Run a flow backwards: (t, x) -> flow(eta(t), x); solves the negated field."""
    eta_map = eta(cfg)

    def evaluate(t, xs):
        return flow.evaluate(eta_map([t])[0], xs)

    return Flow(flow.space, evaluate, {"kind": "reversed", "of": flow.provenance})


def _cached_float_flow(flow: Flow):
    """Memoized evaluation for all-float arguments (pure, so this is safe)."""
    memo: dict = {}

    def call(t, xs):
        if isinstance(t, (int, float)) and not any(isinstance(x, Jet) for x in xs):
            key = (float(t), tuple(float(x) for x in xs))
            got = memo.get(key)
            if got is None:
                got = flow.evaluate(t, list(xs))
                memo[key] = got
            return list(got)
        return flow.evaluate(t, list(xs))

    return call


def flow_laws(
    flow: Flow,
    samples=None,
    tol: float = FLOW_TOL,
    times: Sequence[float] = LAW_GRID_TIMES,
    seed: int = DEFAULT_SEED,
) -> list[LawCheck]:
    """The four flow laws, each with its max residual:

    L1 unit: flow(0, x) = x.
    L2 action: flow(t, flow(s, x)) = flow(t+s, x).
    L3 own invariance: the generator is carried along the flow,
       D_x flow(t, x) vhat(x) = vhat(flow(t, x)).
    L4 equation of variation: the x-derivative of the flow is itself a flow
       on TM solving the lifted field.
    """

    n = flow.space.dim
    if samples is None:
        samples = sample_points(n, count=LAW_GRID_SAMPLES, seed=seed)
    ev = _cached_float_flow(flow)
    gen = generator(flow)
    lifted = tangent_lift(gen)
    fmap = flow_smooth_map(flow)
    tfmap = tangent(fmap)

    checks = []

    worst, witness = 0.0, None
    for x in samples:
        y = ev(0.0, x)
        r = max(abs(primal_value(a) - b) for a, b in zip(y, x))
        if r > worst:
            worst, witness = r, tuple(x)
    checks.append(LawCheck("flow-unit", worst <= tol, worst, witness, seed))

    worst, witness = 0.0, None
    for t in times:
        for s in times:
            for x in samples:
                a = ev(t, ev(s, x))
                b = ev(t + s, x)
                r = max(
                    abs(primal_value(ai) - primal_value(bi)) for ai, bi in zip(a, b)
                )
                if r > worst:
                    worst, witness = r, (t, s, *x)
    checks.append(LawCheck("flow-action", worst <= tol, worst, witness, seed))

    worst, witness = 0.0, None
    for t in times:
        for x in samples:
            vx = [primal_value(v) for v in gen.vhat(x)]
            # T(flow) at point (t, x) with direction (0, vhat(x)): the
            # output is the TM-element (flow(t,x), D_x flow(t,x) vhat(x)).
            out = tfmap([t] + list(x) + [0.0] + vx)
            moved = [primal_value(o) for o in out[:n]]
            pushed = out[n:]
            vy = gen.vhat(moved)
            r = max(
                abs(primal_value(a) - primal_value(b)) for a, b in zip(pushed, vy)
            )
            if r > worst:
                worst, witness = r, (t, *x)
    checks.append(LawCheck("flow-own-invariance", worst <= tol, worst, witness, seed))

    # L4: gammaT(t, (x, v)) := (flow(t, x), D_x flow(t, x) v) must satisfy
    # the unit law and solve the lifted field on TM.
    def gamma_t(t, xv):
        return tfmap.evaluator([t] + list(xv[:n]) + [0.0] + list(xv[n:]))

    tm_samples = sample_points(2 * n, count=max(4, len(samples) // 2), seed=seed + 1)
    worst, witness = 0.0, None
    for xv in tm_samples:
        y = gamma_t(0.0, xv)
        r = max(abs(primal_value(a) - b) for a, b in zip(y, xv))
        if r > worst:
            worst, witness = r, tuple(xv)
    for t in times:
        for xv in tm_samples:
            # d/dt of gamma_t vs the lifted field at the flowed point; the
            # time jet is introduced at a fresh outermost level.
            tj = Jet(float(t), 1.0)
            y = gamma_t(tj, [Jet(v, 0.0) for v in xv])
            deriv = [v.tangent if isinstance(v, Jet) else 0.0 for v in y]
            at = [v.primal if isinstance(v, Jet) else v for v in y]
            want = lifted.vhat(at)
            r = max(
                abs(primal_value(a) - primal_value(b)) for a, b in zip(deriv, want)
            )
            if r > worst:
                worst, witness = r, (t, *xv)
    checks.append(
        LawCheck("flow-equation-of-variation", worst <= tol, worst, witness, seed)
    )
    return checks


def _flow_for(v: VectorField, cfg: IntegratorConfig) -> Flow:
    if isinstance(v, LinearVectorField):
        return linear_flow(v.matrix)
    return flow_of(v, cfg)


def commuting_flows_check(
    v1: VectorField,
    v2: VectorField,
    samples=None,
    tol: float = FLOW_TOL,
    times: Sequence[float] = LAW_GRID_TIMES,
    seed: int = DEFAULT_SEED,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> list[LawCheck]:
    """The four equivalent conditions for a commuting pair, all sampled:
    flow interchange, field commutation, and invariance each way."""

    if v1.space != v2.space:
        raise ShapeError("fields must share a space")
    n = v1.space.dim
    if samples is None:
        samples = sample_points(n, count=LAW_GRID_SAMPLES, seed=seed)
    f1 = _cached_float_flow(_flow_for(v1, cfg))
    f2 = _cached_float_flow(_flow_for(v2, cfg))

    worst, witness = 0.0, None
    for t in times:
        for s in times:
            for x in samples:
                a = f1(t, f2(s, x))
                b = f2(s, f1(t, x))
                r = max(
                    abs(primal_value(ai) - primal_value(bi)) for ai, bi in zip(a, b)
                )
                if r > worst:
                    worst, witness = r, (t, s, *x)
    interchange = LawCheck(
        "flow-interchange", worst <= tol, worst, witness, seed
    )

    comm = commutes(v1, v2, samples=samples, tol=min(tol, JET_TOL), seed=seed)
    inv12 = _invariance_check(v1, f2, samples, times, tol, seed, "field1-invariant")
    inv21 = _invariance_check(v2, f1, samples, times, tol, seed, "field2-invariant")
    return [interchange, comm, inv12, inv21]


def _invariance_check(v, flow_eval, samples, times, tol, seed, law):
    """V invariant under the flow: D_x gamma(t, x) vhat(x) = vhat(gamma(t, x))."""
    worst, witness = 0.0, None
    for t in times:
        for x in samples:
            vx = [primal_value(a) for a in v.vhat(x)]
            pushed = flow_eval(t, [Jet(xi, vi) for xi, vi in zip(x, vx)])
            moved = [primal_value(p) for p in pushed]
            want = v.vhat(moved)
            r = max(
                abs((p.tangent if isinstance(p, Jet) else 0.0) - primal_value(w))
                for p, w in zip(pushed, want)
            )
            if r > worst:
                worst, witness = r, (t, *x)
    return LawCheck(law, worst <= tol, worst, witness, seed)


def sum_flow(
    v1: VectorField,
    v2: VectorField,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    tol: float = FLOW_TOL,
    seed: int = DEFAULT_SEED,
) -> Flow:
    """The flow of the sum of a commuting pair: run one flow, then the other
    for the same time.  Raises :class:`NonCommutingFields` when the
    commutation precondition fails."""

    check = commutes(v1, v2, tol=JET_TOL, seed=seed)
    if not check.passed:
        raise NonCommutingFields(check)
    g1 = _flow_for(v1, cfg)
    g2 = _flow_for(v2, cfg)

    def evaluate(t, xs):
        return g2.evaluate(t, g1.evaluate(t, xs))

    return Flow(v1.space, evaluate, {"kind": "sum", "of": [g1.provenance, g2.provenance]})


# -- higher order, geodesics, time dependence ----------------------------------


def holonomic_jet(derivatives: Sequence[Sequence[float]]) -> list:
    """Embed successive curve derivatives (y, y', ..., y^(k)) as an element
    of T^k M: the iterated-jet coordinates of the curve they define.  For
    k = 1 this is just (y, y'); for k = 2 it is (y, y', y', y'')."""
    if len(derivatives) == 1:
        return list(derivatives[0])
    return holonomic_jet(derivatives[:-1]) + holonomic_jet(derivatives[1:])


def _check_section_conditions(
    system: DynamicalSystem, tol: float = JET_TOL, seed: int = DEFAULT_SEED
) -> None:
    """An order-n field must project to the identity under p, T(p), ...,
    T^(n-1)(p).  For n >= 3 the conditions are only jointly satisfiable on
    holonomic jets (which is where solutions live), so that locus is what
    gets sampled."""
    n = system.order
    d = system.space.dim
    full = system.vector_field.full_map
    pts = [
        holonomic_jet([row[i * d : (i + 1) * d] for i in range(n)])
        for row in sample_points(n * d, count=10, seed=seed)
    ]
    for k in range(n):
        proj = structural_map("p", Space(d * 2 ** (n - 1 - k)))
        for _ in range(k):
            proj = tangent(proj)
        candidate = compose(full, proj)
        worst = 0.0
        for x in pts:
            y = candidate(x)
            worst = max(
                worst,
                max(abs(primal_value(a) - b) for a, b in zip(y, x)),
            )
        if worst > tol:
            raise ShapeError(
                f"order-{n} section condition failed for T^{k}(p): residual {worst:.3e}"
            )


def solve_nth_order(
    system: DynamicalSystem,
    t,
    x0: Sequence,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> list:
    """Solve an order-n system by integrating the first-order system on
    T^(n-1)M and projecting back down with p, n-1 times.

    ``x0`` (or the image of the initial map) must be an element of
    T^(n-1)M; for n >= 3 that means a holonomic jet (see
    :func:`holonomic_jet`), since that is where solutions live.
    """
    _check_section_conditions(system)
    y0 = list(x0)
    if system.initial_map is not None:
        y0 = system.initial_map(y0)
    y = _integrate_field(system.vector_field.vhat, t, y0, cfg)
    for _ in range(system.order - 1):
        y = y[: len(y) // 2]
    return y


def geodesic_flow(conn: Connection, cfg: IntegratorConfig = DEFAULT_CONFIG) -> Flow:
    """The geodesic field (x, u) -> (u, -gamma(x, u)) integrated on TM."""
    q = conn.quadratic_check()
    if not q.passed:
        raise ShapeError(
            f"christoffel map is not quadratic in u: residual {q.max_residual:.3e}"
        )
    n = conn.base_dim
    tm = Space(2 * n)

    def ev(xs):
        x, u = xs[:n], xs[n:]
        g = conn.gamma(list(x) + list(u))
        return list(u) + [-gi for gi in g]

    field_ = VectorField(tm, SmoothMap(tm, tm, ev, name="geodesic"))
    flow = flow_of(field_, cfg)
    return Flow(tm, flow.evaluate, {**flow.provenance, "connection": conn})


def acceleration_residual(
    flow: Flow,
    samples: Sequence[Sequence[float]],
    times: Sequence[float] = (0.25, 0.5, 1.0, 1.5, 2.0),
) -> float:
    """Max of |u' + gamma(x, u)| along flowed trajectories; zero for a
    geodesic flow of the stored connection."""
    conn = flow.provenance.get("connection")
    if conn is None:
        raise ValueError("flow has no connection metadata")
    n = conn.base_dim
    worst = 0.0
    for start in samples:
        for t in times:
            tj = Jet(float(t), 1.0)
            out = flow.evaluate(tj, [Jet(v, 0.0) for v in start])
            state = [primal_value(o) for o in out]
            uprime = [
                o.tangent if isinstance(o, Jet) else 0.0 for o in out[n:]
            ]
            g = conn.gamma(state)
            worst = max(
                worst,
                max(
                    abs(primal_value(up) + primal_value(gi))
                    for up, gi in zip(uprime, g)
                ),
            )
    return worst


def augment_time(spec: dsl.FieldSpec) -> DynamicalSystem:
    """Make a time-dependent field autonomous on M x R: append a clock
    coordinate whose component is constantly 1.  The first block of the
    solution recovers the non-autonomous solution; the clock recovers t."""
    if not spec.time_dependent:
        raise ValueError("augment_time expects a time-dependent field spec")
    n = spec.arity
    compiled = dsl.compile_spec(spec)  # inputs (x1..xn, t)
    aug = Space(n + 1)

    def ev(xs):
        return list(compiled.evaluator(list(xs))) + [1.0]

    vf = VectorField(aug, SmoothMap(aug, aug, ev, name="augmented"))
    embed = SmoothMap(Space(n), aug, lambda xs: list(xs) + [0.0], name="clock0")
    return DynamicalSystem(aug, vf, initial_map=embed)
