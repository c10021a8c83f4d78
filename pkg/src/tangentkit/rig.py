"""Scaling fields, exponential flows, and the multiplicative structure they
induce on the curve C.

The exponential map ``e`` is deliberately computed through the integrator
(never hard-coded as ``math.exp``) so that the algebraic suites genuinely
exercise the solver; closed forms appear only as oracles in tests.
Multiplication on C is recovered from the second derivative of ``e``:
evaluating the second-order jet of ``e`` at point ``(0, a)`` with direction
``(b, 0)`` yields ``a * b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .dynamics import DEFAULT_CONFIG, Flow, IntegratorConfig, flow_of, flow_smooth_map
from .fields import LawCheck, VectorField
from .jets import Jet, exp as jet_exp, primal_value
from .kernel import (
    ShapeError,
    SmoothMap,
    Space,
    TrivialBundle,
    compose,
    product,
    product_interleave_inv,
    structural_map,
    tangent,
    vertical_bracket,
)
from .sampling import DEFAULT_SEED, sample_points

__all__ = [
    "EulerField",
    "ExpFlow",
    "RigStructure",
    "ActionLinearityReport",
    "euler_field",
    "exp_flow",
    "e_map",
    "multiply",
    "rig_structure",
    "rig_suite",
    "action",
    "action_suite",
    "linearity_via_action",
    "C_BUNDLE",
]

RIG_TOL = 1e-6

# The curve as a differential object: a one-dimensional fibre over a point.
C_BUNDLE = TrivialBundle(0, 1)


@dataclass(frozen=True)
class EulerField(VectorField):
    """The fibrewise-scaling generator of a trivial bundle: at ``(x, a)``
    the direction is ``(0, a)``."""

    bundle: TrivialBundle = C_BUNDLE


@dataclass(frozen=True)
class ExpFlow:
    """The flow of the scaling field, with the closed form kept alongside
    for cross-checking."""

    bundle: TrivialBundle
    flow: Flow
    closed_form: Callable[[float, Sequence[float]], list] = None

    def evaluate(self, t, xs):
        return self.flow.evaluate(t, xs)


@dataclass(frozen=True)
class RigStructure:
    unit: float
    multiply: Callable[[float, float], float]


def _diag_embed(bundle: TrivialBundle) -> SmoothMap:
    """A -> A_2, (x, a) -> (x, a, a)."""
    n, m = bundle.base_dim, bundle.fibre_dim

    def ev(xs):
        return list(xs) + list(xs[n:])

    return SmoothMap(Space(n + m), Space(n + 2 * m), ev, name="diag")


def euler_field(bundle: TrivialBundle, check_tol: float = 1e-12) -> EulerField:
    """The scaling field of a trivial bundle, built structurally as the
    diagonal into the fibre square followed by mu; its section, over-zero
    and linearity properties are verified on seeded samples."""

    n, m = bundle.base_dim, bundle.fibre_dim
    total = bundle.total
    mu = structural_map("bundle_mu", bundle)
    full = compose(_diag_embed(bundle), mu)
    vhat = compose(full, structural_map("hat_p", TrivialBundle(0, n + m)))
    field_ = EulerField(total, vhat, bundle)

    pts = sample_points(n + m, count=10, seed=DEFAULT_SEED)
    lift = structural_map("bundle_lift", bundle)
    flip = structural_map("flip", total)
    lhs = compose(compose(field_.full_map, tangent(lift)), flip)
    rhs = compose(lift, tangent(field_.full_map))
    for p in pts:
        y = full(p)
        # over the zero field on the base: T(q) sends it to (x, 0)
        base_dir = y[n + m : 2 * n + m]
        resid = max((abs(primal_value(v)) for v in base_dir), default=0.0)
        sect = max(
            abs(primal_value(a) - b) for a, b in zip(y[: n + m], p)
        ) if (n + m) else 0.0
        lin = max(
            (abs(primal_value(a) - primal_value(b)) for a, b in zip(lhs(p), rhs(p))),
            default=0.0,
        )
        if max(resid, sect, lin) > check_tol:
            raise ShapeError(
                f"scaling field failed its structural checks at {p}: "
                f"section {sect:.2e}, base {resid:.2e}, linearity {lin:.2e}"
            )
    return field_


def exp_flow(
    bundle: TrivialBundle, cfg: IntegratorConfig = DEFAULT_CONFIG
) -> ExpFlow:
    """The flow of the scaling field; closed form (t, (x, a)) -> (x, e^t a)."""
    field_ = euler_field(bundle)
    flow = flow_of(field_, cfg)
    n = bundle.base_dim

    def closed(t, xs):
        scale = jet_exp(t)
        return list(xs[:n]) + [scale * a for a in xs[n:]]

    return ExpFlow(bundle, flow, closed)


def e_map(cfg: IntegratorConfig = DEFAULT_CONFIG) -> SmoothMap:
    """The exponential of the curve: the solution through 1 of the scaling
    field on C, as a jet-polymorphic map C -> C."""
    flow = exp_flow(C_BUNDLE, cfg).flow

    def ev(xs):
        return flow.evaluate(xs[0], [1.0])

    return SmoothMap(Space(1), Space(1), ev, name="e")


def multiply(a: float, b: float, cfg: IntegratorConfig = DEFAULT_CONFIG, e: SmoothMap | None = None):
    """Multiplication recovered from the second derivative of e.

    Evaluates the second-order jet of e at point (0, a) with direction
    (b, 0) (the point-first layout of rule 2) and returns the corner
    coefficient, which is a*b up to integrator tolerance.
    """
    if e is None:
        e = e_map(cfg)
    d2e = tangent(tangent(e))
    out = d2e([0.0, a, b, 0.0])
    return out[3]


def rig_structure(cfg: IntegratorConfig = DEFAULT_CONFIG) -> RigStructure:
    e = e_map(cfg)
    unit = primal_value(e([0.0])[0])
    return RigStructure(unit, lambda a, b: multiply(a, b, cfg=cfg, e=e))


def rig_suite(
    samples=None,
    tol: float = RIG_TOL,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    seed: int = DEFAULT_SEED,
    e: SmoothMap | None = None,
) -> list[LawCheck]:
    """The exponential-rig laws, each with its max residual:

    R1 <0,1> D(e) = id          R2 (1 x e) D(e) = + e
    R3 e(a+b) = e(a) * e(b)     R4 * is commutative/associative/bilinear
    R5 e(0) = 1

    Passing an explicit ``e`` lets callers probe how the laws reject a
    perturbed exponential.
    """

    if e is None:
        e = e_map(cfg)
    de = tangent(e)
    mult = lambda a, b: primal_value(multiply(a, b, cfg=cfg, e=e))
    ev_e = lambda t: primal_value(e([t])[0])
    if samples is None:
        samples = sample_points(3, count=15, seed=seed)

    checks = []

    worst, witness = 0.0, None
    for row in samples:
        v = row[0]
        r = abs(primal_value(de([0.0, v])[1]) - v)
        if r > worst:
            worst, witness = r, (v,)
    checks.append(LawCheck("rig-derivative-unit", worst <= tol, worst, witness, seed))

    worst, witness = 0.0, None
    for row in samples:
        a, b = row[0], row[1]
        lhs = primal_value(de([a, ev_e(b)])[1])
        rhs = ev_e(a + b)
        r = abs(lhs - rhs)
        if r > worst:
            worst, witness = r, (a, b)
    checks.append(LawCheck("rig-derivative-sum", worst <= tol, worst, witness, seed))

    worst, witness = 0.0, None
    for row in samples:
        a, b = row[0], row[1]
        r = abs(ev_e(a + b) - mult(ev_e(a), ev_e(b)))
        if r > worst:
            worst, witness = r, (a, b)
    checks.append(LawCheck("rig-exp-of-sum", worst <= tol, worst, witness, seed))

    worst, witness = 0.0, None
    for row in samples:
        a, b, c = row
        r = abs(mult(a, b) - mult(b, a))
        r = max(r, abs(mult(a, mult(b, c)) - mult(mult(a, b), c)))
        r = max(r, abs(mult(a, b + c) - (mult(a, b) + mult(a, c))))
        r = max(r, abs(mult(a + b, c) - (mult(a, c) + mult(b, c))))
        if r > worst:
            worst, witness = r, tuple(row)
    checks.append(LawCheck("rig-multiply-laws", worst <= tol, worst, witness, seed))

    r = abs(ev_e(0.0) - 1.0)
    checks.append(LawCheck("rig-unit-value", r <= tol, r, (0.0,), seed))
    return checks


# -- the action of C on bundles -------------------------------------------------


def action(
    bundle: TrivialBundle,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    verticality_tol: float = 1e-7,
) -> SmoothMap:
    """The scalar action C x A -> A, built through the structural pipeline:
    lift the time, zero the point, differentiate the exponential flow, and
    extract the vertical component.  Coordinates: (s, (x, a)) -> (x, s a).

    A VerticalityViolation here signals integrator drift; retry with a
    tighter integrator tolerance.
    """

    total = bundle.total
    lam_c = structural_map("bundle_lift", C_BUNDLE)
    zero_a = structural_map("zero", total)
    pre = compose(
        product(lam_c, zero_a), product_interleave_inv(Space(1), total)
    )
    fmap = flow_smooth_map(exp_flow(bundle, cfg).flow)
    pipeline = compose(pre, tangent(fmap))
    act = vertical_bracket(pipeline, bundle, tol=verticality_tol)
    return SmoothMap(act.domain, act.codomain, act.evaluator, name="action")


def _fibre_add(bundle: TrivialBundle, p: Sequence, q: Sequence) -> list:
    n = bundle.base_dim
    return list(p[:n]) + [a + b for a, b in zip(p[n:], q[n:])]


def _time_derivative(evaluate, t: float, xs: Sequence[float]):
    """Value and d/dt of a jet-polymorphic (t, xs) callable, via a fresh
    outermost jet level."""
    out = evaluate(Jet(float(t), 1.0), [Jet(float(x), 0.0) for x in xs])
    vals = [o.primal if isinstance(o, Jet) else o for o in out]
    ders = [o.tangent if isinstance(o, Jet) else 0.0 for o in out]
    return vals, ders


def action_suite(
    bundle: TrivialBundle,
    samples=None,
    tol: float = RIG_TOL,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    seed: int = DEFAULT_SEED,
) -> list[LawCheck]:
    """Laws of the scalar action:

    A1 unitality (1 acts as identity)
    A2 associativity through the rig multiplication
    A3 additivity in the scalar and in the fibre
    A4 the time derivative at 0 is the bundle lift
    A5 the paired action solves its defining linear system
    """

    n, m = bundle.base_dim, bundle.fibre_dim
    act = action(bundle, cfg)
    e = e_map(cfg)
    mult = lambda a, b: primal_value(multiply(a, b, cfg=cfg, e=e))
    if samples is None:
        samples = sample_points(2 + n + 2 * m, count=10, seed=seed)

    def act_at(s, p):
        return [primal_value(v) for v in act([s] + list(p))]

    checks = []

    worst, witness = 0.0, None
    for row in samples:
        p = row[2 : 2 + n + m]
        got = act_at(1.0, p)
        r = max(abs(a - b) for a, b in zip(got, p))
        if r > worst:
            worst, witness = r, tuple(p)
    checks.append(LawCheck("action-unit", worst <= tol, worst, witness, seed))

    worst, witness = 0.0, None
    for row in samples:
        s, r_, p = row[0], row[1], row[2 : 2 + n + m]
        lhs = act_at(s, act_at(r_, p))
        rhs = act_at(mult(s, r_), p)
        r = max(abs(a - b) for a, b in zip(lhs, rhs))
        if r > worst:
            worst, witness = r, (s, r_, *p)
    checks.append(LawCheck("action-associative", worst <= tol, worst, witness, seed))

    worst, witness = 0.0, None
    for row in samples:
        s, r_ = row[0], row[1]
        p = row[2 : 2 + n + m]
        second_fibre = row[2 + n + m :]
        q = list(p[:n]) + list(second_fibre)
        lhs = act_at(s + r_, p)
        rhs = _fibre_add(bundle, act_at(s, p), act_at(r_, p))
        r = max(abs(a - b) for a, b in zip(lhs, rhs))
        lhs2 = act_at(s, _fibre_add(bundle, p, q))
        rhs2 = _fibre_add(bundle, act_at(s, p), act_at(s, q))
        r = max(r, max(abs(a - b) for a, b in zip(lhs2, rhs2)))
        if r > worst:
            worst, witness = r, tuple(row)
    checks.append(LawCheck("action-additive", worst <= tol, worst, witness, seed))

    lift = structural_map("bundle_lift", bundle)
    t_act = tangent(act)
    worst, witness = 0.0, None
    for row in samples:
        p = list(row[2 : 2 + n + m])
        # T(action) at point (0, p) with direction (1, 0): a TA-element.
        out = t_act([0.0] + p + [1.0] + [0.0] * (n + m))
        want = lift(p)
        r = max(abs(primal_value(a) - primal_value(b)) for a, b in zip(out, want))
        if r > worst:
            worst, witness = r, tuple(p)
    checks.append(LawCheck("action-derivative-is-lift", worst <= tol, worst, witness, seed))

    # A5: (action, second projection) solves the system on the fibre square
    # whose field sends (x, a1, a2) to direction (0, a2, 0) and whose initial
    # map is (x, a) -> (x, 0, a).
    def paired(t, xs):
        y = act.evaluator([t] + list(xs))
        return list(y) + list(xs[n:])

    worst, witness = 0.0, None
    for row in samples:
        p = list(row[2 : 2 + n + m])
        at0 = [primal_value(v) for v in paired(0.0, p)]
        start = list(p[:n]) + [0.0] * m + list(p[n:])
        r = max(abs(a - b) for a, b in zip(at0, start))
        for t in (-1.0, -0.25, 0.5, 1.0):
            vals, ders = _time_derivative(paired, t, p)
            vals = [primal_value(v) for v in vals]
            want = [0.0] * n + vals[n + m :] + [0.0] * m
            r = max(
                r,
                max(abs(primal_value(d) - w) for d, w in zip(ders, want)),
            )
        if r > worst:
            worst, witness = r, tuple(p)
    checks.append(LawCheck("action-solves-system", worst <= tol, worst, witness, seed))
    return checks


@dataclass(frozen=True)
class ActionLinearityReport:
    is_bundle_map: LawCheck
    is_linear: LawCheck
    preserves_action: LawCheck
    preserves_exp: LawCheck

    @property
    def agreement(self) -> bool:
        """The equivalence under test: linearity iff action preservation."""
        return self.is_linear.passed == self.preserves_action.passed

    def to_dict(self) -> dict:
        return {
            "is_bundle_map": self.is_bundle_map.to_dict(),
            "is_linear": self.is_linear.to_dict(),
            "preserves_action": self.preserves_action.to_dict(),
            "preserves_exp": self.preserves_exp.to_dict(),
            "agreement": self.agreement,
        }


def linearity_via_action(
    f: SmoothMap,
    bundle_a: TrivialBundle,
    bundle_b: TrivialBundle,
    samples=None,
    tol: float = RIG_TOL,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    seed: int = DEFAULT_SEED,
) -> ActionLinearityReport:
    """Check, on samples, whether a total-space map is a bundle morphism,
    whether it is linear, and whether it preserves the scalar actions and
    exponential flows of the two bundles."""

    if f.domain != bundle_a.total or f.codomain != bundle_b.total:
        raise ShapeError("map must go between the bundles' total spaces")
    na, ma = bundle_a.base_dim, bundle_a.fibre_dim
    nb = bundle_b.base_dim
    if samples is None:
        samples = sample_points(1 + na + 2 * ma, count=12, seed=seed)

    def f_at(p):
        return [primal_value(v) for v in f(list(p))]

    worst, witness = 0.0, None
    for row in samples:
        x = row[1 : 1 + na]
        a1 = row[1 + na : 1 + na + ma]
        a2 = row[1 + na + ma :]
        b1 = f_at(list(x) + list(a1))[:nb]
        b2 = f_at(list(x) + list(a2))[:nb]
        r = max((abs(u - v) for u, v in zip(b1, b2)), default=0.0)
        if r > worst:
            worst, witness = r, tuple(row)
    bundle_check = LawCheck("bundle-map", worst <= tol, worst, witness, seed)

    lift_a = structural_map("bundle_lift", bundle_a)
    lift_b = structural_map("bundle_lift", bundle_b)
    lin_lhs = compose(lift_a, tangent(f))
    lin_rhs = compose(f, lift_b)
    worst, witness = 0.0, None
    for row in samples:
        p = row[1 : 1 + na + ma]
        r = max(
            abs(primal_value(u) - primal_value(v))
            for u, v in zip(lin_lhs(p), lin_rhs(p))
        )
        if r > worst:
            worst, witness = r, tuple(p)
    linear_check = LawCheck("linear", worst <= tol, worst, witness, seed)

    act_a = action(bundle_a, cfg)
    act_b = action(bundle_b, cfg)
    worst, witness = 0.0, None
    for row in samples:
        s = row[0]
        p = row[1 : 1 + na + ma]
        lhs = f_at([primal_value(v) for v in act_a([s] + list(p))])
        rhs = [primal_value(v) for v in act_b([s] + f_at(p))]
        r = max(abs(u - v) for u, v in zip(lhs, rhs))
        if r > worst:
            worst, witness = r, (s, *p)
    action_check = LawCheck("preserves-action", worst <= tol, worst, witness, seed)

    ea = exp_flow(bundle_a, cfg)
    eb = exp_flow(bundle_b, cfg)
    worst, witness = 0.0, None
    for row in samples:
        s = row[0]
        p = row[1 : 1 + na + ma]
        lhs = f_at([primal_value(v) for v in ea.evaluate(s, list(p))])
        rhs = [primal_value(v) for v in eb.evaluate(s, f_at(p))]
        r = max(abs(u - v) for u, v in zip(lhs, rhs))
        if r > worst:
            worst, witness = r, (s, *p)
    exp_check = LawCheck("preserves-exp", worst <= tol, worst, witness, seed)

    return ActionLinearityReport(bundle_check, linear_check, action_check, exp_check)
