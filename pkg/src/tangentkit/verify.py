"""Law-verification suites.

Each suite returns a list of :class:`LawCheck` rows; a suite passes when
every row does.  Negative instances (detectors that must fire) are encoded
so the row passes exactly when the detector classifies correctly.  Suites
are deterministic given the seed.
"""

from __future__ import annotations

import math
import random

import numpy as np

from . import dsl
from .dynamics import (
    DEFAULT_CONFIG,
    Connection,
    DynamicalSystem,
    Flow,
    IntegratorConfig,
    StepSizeCollapse,
    acceleration_residual,
    commuting_flows_check,
    curve,
    eta,
    expm,
    flow_laws,
    flow_of,
    generator,
    geodesic_flow,
    integrate,
    linear_flow,
    reverse,
    sigma_flow,
    sum_flow,
)
from .fields import (
    LawCheck,
    LinearVectorField,
    VectorField,
    commutes,
    euler_space_field,
    is_vf_morphism,
    lie_bracket,
    matrix_of,
    rotation_field,
    tangent_lift,
    zero_field,
)
from .jets import Jet, primal_value
from .jets import cos as jcos, exp as jexp, sin as jsin
from .kernel import (
    SmoothMap,
    Space,
    TrivialBundle,
    compose,
    identity_map,
    structural_map,
    tangent,
    vertical_bracket,
)
from .rig import (
    action,
    action_suite,
    e_map,
    linearity_via_action,
    multiply,
    rig_suite,
)
from .sampling import DEFAULT_SEED, sample_matrix, sample_points

__all__ = ["SUITES", "run_suite"]

SIGMA_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0)


def _law(law, worst, tol, witness=None, seed=None):
    return LawCheck(law, worst <= tol, worst, witness, seed)


def _map_residual(f: SmoothMap, g: SmoothMap, samples):
    worst, witness = 0.0, None
    for p in samples:
        a, b = f(p), g(p)
        r = max(
            (abs(primal_value(x) - primal_value(y)) for x, y in zip(a, b)),
            default=0.0,
        )
        if r > worst:
            worst, witness = r, tuple(p)
    return worst, witness


def _flow_residual(f1, f2, times, points) -> float:
    worst = 0.0
    for t in times:
        for x in points:
            a = f1(t, list(x))
            b = f2(t, list(x))
            worst = max(
                worst,
                max(abs(primal_value(u) - primal_value(v)) for u, v in zip(a, b)),
            )
    return worst


def _test_map() -> SmoothMap:
    """A mildly nonlinear 2 -> 2 map used for the kernel identities."""
    return dsl.compile_spec(dsl.parse("sin(x1) * x2; x1^2 + tanh(x2)", 2))


def _second_map() -> SmoothMap:
    return dsl.compile_spec(dsl.parse("x1 + x2^3; cos(x2)", 2))


# -- kernel ----------------------------------------------------------------------


def suite_kernel(seed: int = DEFAULT_SEED, tol: float = 1e-12, count: int = 100):
    f = _test_map()
    g = _second_map()
    space2 = Space(2)
    checks = []

    pts_m = sample_points(2, count=count, seed=seed)
    pts_tm = sample_points(4, count=count, seed=seed + 1)
    pts_t2m = sample_points(8, count=count, seed=seed + 2)
    pts_sum = sample_points(6, count=count, seed=seed + 3)

    p2 = structural_map("p", space2)
    zero2 = structural_map("zero", space2)
    ell2 = structural_map("ell", space2)
    flip2 = structural_map("flip", space2)
    plus2 = structural_map("plus", space2)
    neg2 = structural_map("neg", space2)

    worst, wit = _map_residual(compose(tangent(f), p2), compose(p2, f), pts_tm)
    checks.append(_law("naturality-p", worst, tol, wit, seed))

    worst, wit = _map_residual(compose(f, zero2), compose(zero2, tangent(f)), pts_m)
    checks.append(_law("naturality-zero", worst, tol, wit, seed))

    worst, wit = _map_residual(
        compose(tangent(f), ell2), compose(ell2, tangent(tangent(f))), pts_tm
    )
    checks.append(_law("naturality-ell", worst, tol, wit, seed))

    worst, wit = _map_residual(
        compose(tangent(tangent(f)), flip2),
        compose(flip2, tangent(tangent(f))),
        pts_t2m,
    )
    checks.append(_law("naturality-flip", worst, tol, wit, seed))

    worst, wit = _map_residual(
        compose(flip2, flip2), identity_map(Space(8)), pts_t2m
    )
    checks.append(_law("coherence-flip-involution", worst, tol, wit, seed))

    worst, wit = _map_residual(compose(ell2, flip2), ell2, pts_tm)
    checks.append(_law("coherence-ell-flip", worst, tol, wit, seed))

    worst, wit = _map_residual(
        compose(ell2, tangent(p2)), compose(p2, zero2), pts_tm
    )
    checks.append(_law("coherence-ell-p", worst, tol, wit, seed))

    worst, wit = 0.0, None
    for row in pts_sum:
        x, u, w = row[:2], row[2:4], row[4:6]
        v = [wi + 0.5 for wi in w]
        comm = max(
            abs(a - b)
            for a, b in zip(
                plus2(list(x) + list(u) + list(w)), plus2(list(x) + list(w) + list(u))
            )
        )
        left = plus2(plus2(list(x) + list(u) + list(w)) + v)
        right = plus2(list(x) + list(u) + [a + b for a, b in zip(w, v)])
        assoc = max(abs(a - b) for a, b in zip(left, right))
        r = max(comm, assoc)
        if r > worst:
            worst, wit = r, tuple(row)
    checks.append(_law("plus-monoid", worst, tol, wit, seed))

    worst, wit = 0.0, None
    for row in pts_tm:
        x = row[:2]
        summed = plus2(list(row) + neg2(row)[2:])
        want = list(x) + [0.0, 0.0]
        r = max(abs(a - b) for a, b in zip(summed, want))
        if r > worst:
            worst, wit = r, tuple(row)
    checks.append(_law("neg-inverse", worst, tol, wit, seed))

    worst, wit = _map_residual(
        tangent(compose(f, g)), compose(tangent(f), tangent(g)), pts_tm
    )
    checks.append(_law("functoriality", worst, tol, wit, seed))

    # bracket reconstruction: a vertical value with point (x, a) and
    # direction (0, w) is rebuilt from its bracket output (x, w) and its
    # point part.
    bundle = TrivialBundle(2, 2)

    def vertical_ev(xs):
        x1, x2 = xs[0], xs[1]
        return [x1, x2, x1 * x2, 0.0, 0.0, 0.0, x2, x1 * x1]

    vert = SmoothMap(Space(2), Space(8), vertical_ev, name="vertical")
    br = vertical_bracket(vert, bundle)
    lift = structural_map("bundle_lift", bundle)
    worst, wit = 0.0, None
    for p in pts_m:
        original = vert(p)
        rebuilt = original[:4] + lift(br(p))[4:]
        r = max(abs(a - b) for a, b in zip(rebuilt, original))
        if r > worst:
            worst, wit = r, tuple(p)
    checks.append(_law("bracket-reconstruction", worst, tol, wit, seed))

    return checks


# -- vector fields -----------------------------------------------------------------


def _commuting_pair(rng: random.Random, n: int):
    A = np.array(sample_matrix(n, rng))
    B = (
        rng.uniform(-1, 1) * np.eye(n)
        + rng.uniform(-1, 1) * A
        + rng.uniform(-1, 1) * (A @ A)
    )
    return A, B


def _noncommuting_pair(rng: random.Random, n: int):
    while True:
        A = np.array(sample_matrix(n, rng))
        B = np.array(sample_matrix(n, rng))
        if np.max(np.abs(A @ B - B @ A)) > 0.1:
            return A, B


def _invertible(rng: random.Random, n: int) -> np.ndarray:
    while True:
        P = np.array(sample_matrix(n, rng))
        if abs(np.linalg.det(P)) > 0.3:
            return P


def _linear_map(P: np.ndarray) -> SmoothMap:
    rows = [tuple(float(a) for a in row) for row in P]
    n = len(rows)
    return SmoothMap(
        Space(n),
        Space(n),
        lambda xs: [sum(a * x for a, x in zip(row, xs)) for row in rows],
        name="linear",
    )


def _jacobian_bracket(v1: VectorField, v2: VectorField, p):
    """D(vhat2) vhat1 - D(vhat1) vhat2 by direct jet evaluation, independent
    of the structural pipeline."""
    n = v1.space.dim
    w1 = [primal_value(v) for v in v1.vhat(p)]
    w2 = [primal_value(v) for v in v2.vhat(p)]
    a = tangent(v2.vhat)(list(p) + w1)[n:]
    b = tangent(v1.vhat)(list(p) + w2)[n:]
    return [primal_value(x) - primal_value(y) for x, y in zip(a, b)]


def _fd_bracket(v1: VectorField, v2: VectorField, p, h: float = 1e-5):
    """Central-difference bracket oracle."""
    n = v1.space.dim
    w1 = [primal_value(v) for v in v1.vhat(p)]
    w2 = [primal_value(v) for v in v2.vhat(p)]

    def jac_times(vhat, vec):
        out = [0.0] * n
        for j in range(n):
            hi, lo = list(p), list(p)
            hi[j] += h
            lo[j] -= h
            fp = [primal_value(v) for v in vhat(hi)]
            fm = [primal_value(v) for v in vhat(lo)]
            for i in range(n):
                out[i] += (fp[i] - fm[i]) / (2 * h) * vec[j]
        return out

    a = jac_times(v2.vhat, w1)
    b = jac_times(v1.vhat, w2)
    return [x - y for x, y in zip(a, b)]


def suite_vf(seed: int = DEFAULT_SEED, tol: float = 1e-9):
    rng = random.Random(seed)
    checks = []
    rot = rotation_field()
    eul = euler_space_field(Space(2))

    zc = commutes(rot, zero_field(Space(2)), tol=tol, seed=seed)
    checks.append(LawCheck("zero-commutes", zc.passed, zc.max_residual, zc.witness, seed))

    ok, worst = True, 0.0
    for i in range(5):
        A, B = _commuting_pair(rng, 2 + (i % 2))
        c = commutes(LinearVectorField(A), LinearVectorField(B), tol=tol, seed=seed)
        ok &= c.passed
        if not c.passed:
            worst = max(worst, c.max_residual)
    for i in range(5):
        A, B = _noncommuting_pair(rng, 2 + (i % 2))
        c = commutes(LinearVectorField(A), LinearVectorField(B), tol=tol, seed=seed)
        ok &= not c.passed
        if c.passed:
            worst = max(worst, 1.0)
    checks.append(LawCheck("linear-commutation", ok, worst, None, seed))

    c12 = commutes(rot, eul, tol=tol, seed=seed)
    c21 = commutes(eul, rot, tol=tol, seed=seed)
    checks.append(
        LawCheck(
            "commutes-symmetric",
            c12.passed == c21.passed,
            abs(c12.max_residual - c21.max_residual),
            None,
            seed,
        )
    )

    nonlinear = VectorField.from_expr("x1*x2; sin(x1)", 2)
    ok, worst = True, 0.0
    for v in (rot, eul, nonlinear):
        c = commutes(v, v, tol=tol, seed=seed)
        ok &= c.passed
        worst = max(worst, c.max_residual)
    checks.append(LawCheck("self-commutation", ok, worst, None, seed))

    v1 = VectorField.from_expr("x2^2; x1", 2)
    v2 = VectorField.from_expr("sin(x2); x1*x2", 2)
    bracket = lie_bracket(v1, v2)
    worst, wit = 0.0, None
    for p in sample_points(2, count=50, seed=seed):
        want = _jacobian_bracket(v1, v2, p)
        got = [primal_value(v) for v in bracket.vhat(p)]
        r = max(abs(a - b) for a, b in zip(got, want))
        if r > worst:
            worst, wit = r, tuple(p)
    checks.append(_law("bracket-jacobian", worst, 1e-12, wit, seed))

    worst, wit = 0.0, None
    for p in sample_points(2, count=25, seed=seed + 4):
        want = _fd_bracket(v1, v2, p)
        got = [primal_value(v) for v in bracket.vhat(p)]
        r = max(abs(a - b) for a, b in zip(got, want))
        if r > worst:
            worst, wit = r, tuple(p)
    checks.append(_law("bracket-finite-difference", worst, 1e-5, wit, seed))

    ok, worst = True, 0.0
    for _ in range(10):
        n = rng.choice((2, 3))
        P = _invertible(rng, n)
        Pinv = np.linalg.inv(P)
        A1 = np.array(sample_matrix(n, rng))
        A2 = np.array(sample_matrix(n, rng))
        W1, W2 = P @ A1 @ Pinv, P @ A2 @ Pinv
        fmap = _linear_map(P)
        va1, va2 = LinearVectorField(A1), LinearVectorField(A2)
        wb1, wb2 = LinearVectorField(W1), LinearVectorField(W2)
        m1 = is_vf_morphism(fmap, va1, wb1, tol=1e-9, seed=seed)
        m2 = is_vf_morphism(fmap, va2, wb2, tol=1e-9, seed=seed)
        mb = is_vf_morphism(
            fmap, lie_bracket(va1, va2), lie_bracket(wb1, wb2), tol=1e-7, seed=seed
        )
        ok &= m1.passed and m2.passed and mb.passed
        worst = max(worst, mb.max_residual)
    checks.append(LawCheck("f-relatedness-bracket", ok, worst, None, seed))

    ok, worst = True, 0.0
    shear_a = LinearVectorField([[0.0, 1.0], [0.0, 0.0]])
    shear_b = LinearVectorField([[0.0, 0.0], [1.0, 0.0]])
    for va, vb, should in ((rot, eul, True), (shear_a, shear_b, False)):
        cm = commutes(va, vb, tol=tol, seed=seed)
        morph = is_vf_morphism(vb.full_map, va, tangent_lift(va), tol=tol, seed=seed)
        ok &= (cm.passed == morph.passed == should)
        worst = max(worst, abs(cm.max_residual - morph.max_residual))
    checks.append(LawCheck("pair-commuting-predicate", ok, worst, None, seed))

    return checks


# -- curve -------------------------------------------------------------------------


def suite_curve(seed: int = DEFAULT_SEED, tol: float = 1e-9, cfg=DEFAULT_CONFIG):
    checks = list(curve().self_check())
    sigma = sigma_flow(cfg)

    def s(t, x):
        return primal_value(sigma.evaluate(t, [x])[0])

    worst, wit = 0.0, None
    for t in SIGMA_GRID:
        for x in SIGMA_GRID:
            r = abs(s(t, x) - (t + x))
            if r > worst:
                worst, wit = r, (t, x)
    checks.append(_law("sigma-addition", worst, tol, wit, seed))

    worst, wit = 0.0, None
    for x in SIGMA_GRID:
        r = max(abs(s(0.0, x) - x), abs(s(x, 0.0) - x))
        if r > worst:
            worst, wit = r, (x,)
    checks.append(_law("sigma-unit", worst, tol, wit, seed))

    worst, wit = 0.0, None
    for t in SIGMA_GRID:
        for x in SIGMA_GRID:
            r = abs(s(t, x) - s(x, t))
            if r > worst:
                worst, wit = r, (t, x)
    checks.append(_law("sigma-commutative", worst, tol, wit, seed))

    worst, wit = 0.0, None
    for t in SIGMA_GRID:
        for u in SIGMA_GRID:
            for x in SIGMA_GRID:
                r = abs(s(t, s(u, x)) - s(s(t, u), x))
                if r > worst:
                    worst, wit = r, (t, u, x)
    checks.append(_law("sigma-associative", worst, tol, wit, seed))

    eta_map = eta(cfg)
    worst, wit = 0.0, None
    for t in SIGMA_GRID + (1.5, -0.75):
        r = abs(primal_value(eta_map([t])[0]) + t)
        if r > worst:
            worst, wit = r, (t,)
    checks.append(_law("eta-negation", worst, tol, wit, seed))

    worst, wit = 0.0, None
    for t in SIGMA_GRID:
        r = abs(s(t, primal_value(eta_map([t])[0])))
        if r > worst:
            worst, wit = r, (t,)
    checks.append(_law("group-inverse", worst, tol, wit, seed))

    return checks


# -- flows -------------------------------------------------------------------------


def rotation_closed_flow() -> Flow:
    def evaluate(t, xs):
        c, s = jcos(t), jsin(t)
        return [c * xs[0] + s * xs[1], -s * xs[0] + c * xs[1]]

    return Flow(Space(2), evaluate, {"kind": "exact closed form"})


def euler_closed_flow(n: int) -> Flow:
    def evaluate(t, xs):
        g = jexp(t)
        return [g * x for x in xs]

    return Flow(Space(n), evaluate, {"kind": "exact closed form"})


def _time_derivative_map(gmap: SmoothMap, t: float, xs):
    out = gmap.evaluator([Jet(float(t), 1.0)] + [Jet(float(x), 0.0) for x in xs])
    vals = [o.primal if isinstance(o, Jet) else o for o in out]
    ders = [o.tangent if isinstance(o, Jet) else 0.0 for o in out]
    return vals, ders


def tangent_of_solution_residual(flow: Flow, v: VectorField, g_scale: float, t, x):
    """Residual of the claim that (t, x) -> V(flow(t, g x)) solves the lifted
    system with initial map g V, for the linear g = g_scale * id."""
    n = v.space.dim
    lift = tangent_lift(v)

    def candidate(xs):
        y = flow.evaluate(xs[0], [g_scale * q for q in xs[1:]])
        return list(y) + list(v.vhat(y))

    gmap = SmoothMap(Space(1 + n), Space(2 * n), candidate, name="gammaV")
    vals, ders = _time_derivative_map(gmap, t, x)
    want = lift.vhat([primal_value(q) for q in vals])
    return max(abs(primal_value(a) - primal_value(b)) for a, b in zip(ders, want))


def solution_square_residuals(flow_eval, v: VectorField, t: float, x):
    """Full and hat-p-projected residuals of the solution square at (t, x)."""
    n = v.space.dim
    fmap = SmoothMap(
        Space(1 + n), Space(n), lambda xs: flow_eval(xs[0], xs[1:]), name="cand"
    )
    out = tangent(fmap)([t] + list(x) + [1.0] + [0.0] * n)
    lhs_base = [primal_value(q) for q in out[:n]]
    ddt = [primal_value(q) for q in out[n:]]
    plain = [primal_value(q) for q in flow_eval(t, list(x))]
    want = [primal_value(q) for q in v.vhat(plain)]
    base_resid = max(abs(a - b) for a, b in zip(lhs_base, plain))
    proj_resid = max(abs(a - b) for a, b in zip(ddt, want))
    return max(base_resid, proj_resid), proj_resid


def suite_flows(seed: int = DEFAULT_SEED, cfg=DEFAULT_CONFIG, quick: bool = False):
    rng = random.Random(seed)
    checks = []
    times = (-1.0, -0.5, 0.0, 0.5, 1.0)
    pts2 = sample_points(2, count=5 if quick else 8, seed=seed)

    got = integrate(
        DynamicalSystem(Space(1), euler_space_field(Space(1))), 1.0, [1.0], cfg
    )
    r = abs(got[0] - math.e)
    checks.append(LawCheck("e-value", r <= 1e-8, r, (1.0,), seed))

    worst = 0.0
    for i in range(4 if quick else 8):
        n = 2 if i % 2 == 0 else 3
        A = np.array(sample_matrix(n, rng))
        got_m = matrix_of(generator(linear_flow(A)))
        worst = max(worst, float(np.max(np.abs(got_m - A))))
    checks.append(_law("generator-roundtrip", worst, 1e-9, None, seed))

    worst = 0.0
    for closed in (rotation_closed_flow(), euler_closed_flow(2)):
        numeric = flow_of(generator(closed), cfg)
        worst = max(
            worst, _flow_residual(numeric.evaluate, closed.evaluate, times, pts2[:5])
        )
    checks.append(_law("flow-roundtrip", worst, 1e-6, None, seed))

    A = np.array(sample_matrix(2, rng))
    for c in flow_laws(
        linear_flow(A), samples=pts2[:5], tol=1e-9, times=times, seed=seed
    ):
        checks.append(c)
    rot_flow = flow_of(rotation_field(), cfg)
    for c in flow_laws(
        rot_flow, samples=pts2[:4], tol=1e-6, times=times, seed=seed
    ):
        checks.append(c)

    ok, worst = True, 0.0
    for _ in range(2 if quick else 4):
        A, B = _commuting_pair(rng, 2)
        rep = commuting_flows_check(
            LinearVectorField(A),
            LinearVectorField(B),
            samples=pts2[:5],
            tol=1e-6,
            times=times,
            seed=seed,
            cfg=cfg,
        )
        ok &= all(c.passed for c in rep)
        worst = max(worst, rep[0].max_residual)
    for _ in range(2 if quick else 4):
        A, B = _noncommuting_pair(rng, 2)
        rep = commuting_flows_check(
            LinearVectorField(A),
            LinearVectorField(B),
            samples=pts2[:5],
            tol=1e-6,
            times=times,
            seed=seed,
            cfg=cfg,
        )
        interchange, comm = rep[0], rep[1]
        ok &= (not interchange.passed) and (not comm.passed)
        ok &= interchange.max_residual >= 1e-3
    checks.append(LawCheck("flow-interchange", ok, worst, None, seed))

    worst = 0.0
    for _ in range(2 if quick else 4):
        A, B = _commuting_pair(rng, 2)
        sflow = sum_flow(LinearVectorField(A), LinearVectorField(B), cfg)
        target = linear_flow(A + B)
        worst = max(
            worst, _flow_residual(sflow.evaluate, target.evaluate, (0.5, 1.0), pts2[:5])
        )
        swapped = sum_flow(LinearVectorField(B), LinearVectorField(A), cfg)
        worst = max(
            worst, _flow_residual(sflow.evaluate, swapped.evaluate, (0.5, 1.0), pts2[:5])
        )
    checks.append(_law("sum-flow-agreement", worst, 1e-6, None, seed))

    A = np.array(sample_matrix(2, rng))
    worst = _flow_residual(
        reverse(linear_flow(A), cfg).evaluate, linear_flow(-A).evaluate, times, pts2[:5]
    )
    eta_map = eta(cfg)
    for x in pts2[:5]:
        t = 0.7
        back = rot_flow.evaluate(
            primal_value(eta_map([t])[0]), rot_flow.evaluate(t, x)
        )
        worst = max(worst, max(abs(primal_value(u) - v) for u, v in zip(back, x)))
    checks.append(_law("reverse-inverse", worst, 1e-6, None, seed))

    v = rotation_field()
    worst = 0.0
    for t in times:
        for x in pts2[:4]:
            worst = max(worst, tangent_of_solution_residual(rot_flow, v, 2.0, t, x))
    checks.append(_law("tangent-of-solution", worst, 1e-6, None, seed))

    worst = 0.0
    corrupted = lambda tt, xs: [
        xi + tt * wi
        for xi, wi in zip(xs, v.vhat([primal_value(q) for q in xs]))
    ]
    for t in times:
        for x in pts2[:4]:
            full_r, proj_r = solution_square_residuals(rot_flow.evaluate, v, t, x)
            worst = max(worst, abs(full_r - proj_r))
            full_b, proj_b = solution_square_residuals(corrupted, v, t, x)
            worst = max(worst, abs(full_b - proj_b))
    checks.append(_law("diff-object-criterion", worst, 1e-9, None, seed))

    worst = 0.0
    for _ in range(3 if quick else 6):
        A = np.array(sample_matrix(2, rng))
        fl = flow_of(LinearVectorField(A), cfg)
        for t in (-1.0, 0.5, 1.0):
            E = expm(t * A)
            for x in pts2[:4]:
                a = fl.evaluate(t, x)
                b = E @ np.array(x)
                worst = max(
                    worst, max(abs(primal_value(u) - w) for u, w in zip(a, b))
                )
    checks.append(_law("expm-vs-integrator", worst, 1e-6, None, seed))

    ok, worst = True, 0.0
    for should in (True, False):
        P = _invertible(rng, 2)
        A1 = np.array(sample_matrix(2, rng))
        if should:
            A2 = P @ A1 @ np.linalg.inv(P)
        else:
            while True:
                A2 = np.array(sample_matrix(2, rng))
                if np.max(np.abs(P @ A2 - A1 @ P)) > 0.05:
                    break
        fmap = _linear_map(P)
        morph = is_vf_morphism(
            fmap, LinearVectorField(A1), LinearVectorField(A2), tol=1e-9, seed=seed
        )
        fl1, fl2 = linear_flow(A1), linear_flow(A2)
        fworst = 0.0
        for t in times:
            for x in pts2[:5]:
                a = fmap([primal_value(u) for u in fl1.evaluate(t, x)])
                b = fl2.evaluate(t, fmap(list(x)))
                fworst = max(
                    fworst,
                    max(abs(primal_value(u) - primal_value(w)) for u, w in zip(a, b)),
                )
        intertwines = fworst <= 1e-6
        ok &= morph.passed == intertwines == should
        if should:
            worst = max(worst, fworst)
    checks.append(LawCheck("flow-morphism-equivalence", ok, worst, None, seed))

    quad = VectorField.from_expr("x1^2", 1)
    try:
        integrate(DynamicalSystem(Space(1), quad), 1.0, [1.0], cfg)
        blew, t_reached = False, 0.0
    except StepSizeCollapse as e:
        blew, t_reached = True, e.t_reached
    ok = blew and 0.99 <= t_reached <= 1.0
    checks.append(
        LawCheck("blowup-detection", ok, abs(1.0 - t_reached), (t_reached,), seed)
    )

    flat = Connection(
        2, SmoothMap(Space(4), Space(2), lambda xs: [0.0, 0.0], name="flat")
    )
    gflow = geodesic_flow(flat, cfg)
    worst = 0.0
    for x in sample_points(4, count=5, seed=seed):
        for t in (0.5, 1.0):
            got_pt = gflow.evaluate(t, x)
            want = [x[0] + t * x[2], x[1] + t * x[3], x[2], x[3]]
            worst = max(
                worst, max(abs(primal_value(u) - w) for u, w in zip(got_pt, want))
            )
    checks.append(_law("geodesic-flat", worst, 1e-8, None, seed))

    half_conn = half_plane_connection()
    checks.append(
        _law(
            "christoffel-quadratic",
            half_conn.quadratic_check().max_residual,
            1e-9,
            None,
            seed,
        )
    )
    half = geodesic_flow(half_conn, cfg)
    drift = 0.0
    for t in [0.25 * k for k in range(9)]:
        pt = half.evaluate(t, [0.0, 1.0, 1.0, 0.0])
        drift = max(
            drift, abs(primal_value(pt[0]) ** 2 + primal_value(pt[1]) ** 2 - 1.0)
        )
    checks.append(LawCheck("geodesic-semicircle", drift <= 1e-5, drift, None, seed))

    acc = max(
        acceleration_residual(gflow, sample_points(4, count=3, seed=seed)),
        acceleration_residual(half, [[0.0, 1.0, 1.0, 0.0]], times=(0.5, 1.0, 2.0)),
    )
    checks.append(_law("geodesic-acceleration", acc, 1e-6, None, seed))

    sys_rot = DynamicalSystem(Space(2), rotation_field())
    a1 = integrate(sys_rot, 1.0, [1.0, 0.5], cfg)
    a2 = integrate(sys_rot, 1.0, [1.0, 0.5], cfg)
    det = max(abs(u - w) for u, w in zip(a1, a2))
    checks.append(LawCheck("integrator-determinism", det == 0.0, det, None, seed))

    return checks


def half_plane_connection() -> Connection:
    """Christoffel data of the hyperbolic upper half-plane in the flat chart."""

    def ev(xs):
        y, u1, u2 = xs[1], xs[2], xs[3]
        return [(-2.0 * u1 * u2) / y, (u1 * u1 - u2 * u2) / y]

    return Connection(2, SmoothMap(Space(4), Space(2), ev, name="half_plane"))


# -- rig and action ------------------------------------------------------------------


def suite_rig(seed: int = DEFAULT_SEED, cfg=DEFAULT_CONFIG):
    checks = list(rig_suite(cfg=cfg, seed=seed))
    e = e_map(cfg)
    r = abs(primal_value(e([1.0])[0]) - math.e)
    checks.append(LawCheck("e-value", r <= 1e-8, r, (1.0,), seed))

    de = tangent(e)
    worst, wit = 0.0, None
    for t in (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0):
        for v in (-1.5, -0.5, 1.0, 2.0):
            r = abs(primal_value(de([t, v])[1]) - v * math.exp(t))
            if r > worst:
                worst, wit = r, (t, v)
    checks.append(LawCheck("de-is-exp-flow", worst <= 1e-7, worst, wit, seed))

    worst, wit = 0.0, None
    for row in sample_points(2, count=20, seed=seed):
        a, b = 1.5 * row[0], 1.5 * row[1]
        r = abs(primal_value(multiply(a, b, cfg=cfg, e=e)) - a * b)
        if r > worst:
            worst, wit = r, (a, b)
    checks.append(LawCheck("multiply-scalar", worst <= 1e-7, worst, wit, seed))
    return checks


def suite_action(seed: int = DEFAULT_SEED, cfg=DEFAULT_CONFIG, quick: bool = False):
    checks = []
    bundles = [TrivialBundle(0, 2), TrivialBundle(1, 1)]
    if not quick:
        bundles += [TrivialBundle(2, 3), TrivialBundle(3, 3)]

    worst, wit = 0.0, None
    for bundle in bundles:
        n = bundle.base_dim
        act = action(bundle, cfg)
        for row in sample_points(1 + n + bundle.fibre_dim, count=6, seed=seed):
            s, p = row[0], row[1:]
            got = [primal_value(q) for q in act([s] + list(p))]
            want = list(p[:n]) + [s * a for a in p[n:]]
            r = max(abs(u - w) for u, w in zip(got, want))
            if r > worst:
                worst, wit = r, (float(n), float(bundle.fibre_dim), s)
    checks.append(LawCheck("action-is-scaling", worst <= 1e-6, worst, wit, seed))

    for bundle in bundles[:2] if quick else bundles[:3]:
        checks.extend(action_suite(bundle, tol=1e-6, cfg=cfg, seed=seed))

    b11 = TrivialBundle(1, 1)
    family = [
        (SmoothMap(Space(2), Space(2), lambda xs: [xs[0], 2.0 * xs[1]], name="double"), True),
        (SmoothMap(Space(2), Space(2), lambda xs: [xs[0], xs[1] * xs[1]], name="square"), False),
        (identity_map(Space(2)), True),
        (
            SmoothMap(
                Space(2),
                Space(2),
                lambda xs: [xs[0], (1.0 + xs[0] * xs[0]) * xs[1]],
                name="xdep",
            ),
            True,
        ),
        (
            SmoothMap(Space(2), Space(2), lambda xs: [xs[0], xs[1] + 0.5], name="affine"),
            False,
        ),
    ]
    ok, disagreements = True, 0
    for fmap, is_lin in family:
        rep = linearity_via_action(fmap, b11, b11, tol=1e-6, cfg=cfg, seed=seed)
        if not rep.agreement:
            disagreements += 1
        ok &= rep.agreement and rep.is_linear.passed == is_lin
    checks.append(LawCheck("linearity-equivalence", ok, float(disagreements), None, seed))
    return checks


SUITES = {
    "kernel": lambda seed, cfg, quick: suite_kernel(seed),
    "vf": lambda seed, cfg, quick: suite_vf(seed),
    "curve": lambda seed, cfg, quick: suite_curve(seed, cfg=cfg),
    "flows": lambda seed, cfg, quick: suite_flows(seed, cfg=cfg, quick=quick),
    "rig": lambda seed, cfg, quick: suite_rig(seed, cfg=cfg),
    "action": lambda seed, cfg, quick: suite_action(seed, cfg=cfg, quick=quick),
}


def run_suite(
    name: str,
    seed: int = DEFAULT_SEED,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    quick: bool = False,
) -> list[LawCheck]:
    if name == "all":
        out = []
        for key in ("kernel", "vf", "curve", "flows", "rig", "action"):
            out.extend(SUITES[key](seed, cfg, quick))
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    return SUITES[name](seed, cfg, quick)
