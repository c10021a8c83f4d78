"""Vector fields on Euclidean spaces: brackets, commutation, morphisms, lifts.

A vector field is stored through its component map ``vhat`` (the classical
ODE right-hand side); the full section ``x -> (x, vhat(x))`` is derived.
Every predicate returns a :class:`LawCheck` carrying the max residual and
the worst witness point, never a bare boolean.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import dsl
from .jets import primal_value
from .kernel import (
    ShapeError,
    SmoothMap,
    Space,
    TrivialBundle,
    compose,
    identity_map,
    pair,
    product,
    product_interleave_inv,
    structural_map,
    tangent,
    vertical_bracket,
)
from .sampling import DEFAULT_SEED, sample_points

__all__ = [
    "VectorField",
    "LinearVectorField",
    "LawCheck",
    "LinearityError",
    "lie_bracket",
    "commutes",
    "is_vf_morphism",
    "tangent_lift",
    "product_vf",
    "matrix_of",
    "zero_field",
    "euler_space_field",
    "rotation_field",
    "JET_TOL",
    "FLOW_TOL",
]

# Default tolerances: jet-exact identities vs identities routed through an
# integrator.
JET_TOL = 1e-9
FLOW_TOL = 1e-6


@dataclass(frozen=True)
class LawCheck:
    """Outcome of a sampled law check: serializes as
    {law, passed, max_residual, witness, seed}."""

    law: str
    passed: bool
    max_residual: float
    witness: tuple | None = None
    seed: int | None = None

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "law": self.law,
            "passed": bool(self.passed),
            "max_residual": float(self.max_residual),
            "witness": (
                [float(w) for w in self.witness] if self.witness is not None else None
            ),
            "seed": self.seed,
        }


class LinearityError(ValueError):
    def __init__(self, max_residual: float, witness):
        self.max_residual = max_residual
        self.witness = witness
        super().__init__(
            f"component map is not linear: residual {max_residual:.3e} at {witness}"
        )


@dataclass(frozen=True)
class VectorField:
    """A section of the tangent projection, stored via its component map."""

    space: Space
    vhat: SmoothMap

    def __post_init__(self):
        if self.vhat.domain != self.space or self.vhat.codomain != self.space:
            raise ShapeError(
                f"component map must be R^{self.space.dim} -> R^{self.space.dim}"
            )

    @property
    def full_map(self) -> SmoothMap:
        """x -> (x, vhat(x)); the section property holds by construction."""
        return pair(identity_map(self.space), self.vhat)

    @classmethod
    def from_expr(cls, text: str, dim: int) -> "VectorField":
        spec = dsl.parse(text, dim)
        if spec.n_components != dim:
            raise ShapeError(
                f"field on R^{dim} needs {dim} components, got {spec.n_components}"
            )
        return cls(Space(dim), dsl.compile_spec(spec))


class LinearVectorField(VectorField):
    """Vector field whose component map is a matrix."""

    def __init__(self, matrix):
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ShapeError("matrix must be square")
        n = A.shape[0]
        rows = [tuple(float(a) for a in row) for row in A]

        def ev(xs):
            return [sum(a * x for a, x in zip(row, xs)) for row in rows]

        object.__setattr__(self, "matrix", A.copy())
        super().__init__(Space(n), SmoothMap(Space(n), Space(n), ev, name="linear"))


def zero_field(space: Space) -> VectorField:
    n = space.dim
    return VectorField(
        space, SmoothMap(space, space, lambda xs: [0.0] * n, name="zero_field")
    )


def euler_space_field(space: Space) -> VectorField:
    """The field x -> (x, x) on R^n; its flow is e^t scaling."""
    return VectorField(
        space, SmoothMap(space, space, lambda xs: list(xs), name="euler")
    )


def rotation_field() -> VectorField:
    """(x1, x2) -> (x2, -x1); flows are clockwise rotations."""
    return VectorField.from_expr("x2; -x1", 2)


# -- residual machinery -------------------------------------------------------


def _max_abs(values) -> float:
    return max((abs(primal_value(v)) for v in values), default=0.0)


def _check_on_samples(
    law: str,
    lhs: SmoothMap,
    rhs: SmoothMap,
    samples: Sequence[Sequence[float]],
    tol: float,
    seed: int | None,
) -> LawCheck:
    worst = 0.0
    witness = None
    for point in samples:
        a = lhs(point)
        b = rhs(point)
        residual = _max_abs([ai - bi for ai, bi in zip(a, b)])
        if residual > worst:
            worst = residual
            witness = tuple(point)
    return LawCheck(law, worst <= tol, worst, witness, seed)


def _default_samples(dim: int, samples, seed):
    if samples is not None:
        return samples, seed
    return sample_points(dim, seed=seed), seed


# -- operations ----------------------------------------------------------------


def lie_bracket(v1: VectorField, v2: VectorField) -> VectorField:
    """[V1, V2] through the structural pipeline: form V1 T(V2) and
    V2 T(V1) c, subtract in the fibre over TM, and extract the vertical
    component.  The coordinate consequence D(vhat2) vhat1 - D(vhat1) vhat2
    is checked by tests, not assumed here.
    """

    if v1.space != v2.space:
        raise ShapeError("lie_bracket requires fields on the same space")
    space = v1.space
    n = space.dim
    flip = structural_map("flip", space)
    z1 = compose(v1.full_map, tangent(v2.full_map))
    z2 = compose(compose(v2.full_map, tangent(v1.full_map)), flip)

    def diff_ev(xs):
        a = z1.evaluator(list(xs))
        b = z2.evaluator(list(xs))
        # Both land over the same point of TM; subtract direction blocks.
        return a[: 2 * n] + [ai - bi for ai, bi in zip(a[2 * n :], b[2 * n :])]

    diff = SmoothMap(space, Space(4 * n), diff_ev, name="bracket_diff")
    full = vertical_bracket(diff, TrivialBundle(n, n))
    vhat = compose(full, _component_of(space))
    return VectorField(space, vhat)


def _component_of(space: Space) -> SmoothMap:
    """TM -> M, (x, v) -> v: the fibre projection of the differential object."""
    return structural_map("hat_p", TrivialBundle(0, space.dim))


def commutes(
    v1: VectorField,
    v2: VectorField,
    samples=None,
    tol: float = JET_TOL,
    seed: int = DEFAULT_SEED,
) -> LawCheck:
    """V1 T(V2) c = V2 T(V1), sampled."""
    if v1.space != v2.space:
        raise ShapeError("commutes requires fields on the same space")
    samples, seed = _default_samples(v1.space.dim, samples, seed)
    flip = structural_map("flip", v1.space)
    lhs = compose(compose(v1.full_map, tangent(v2.full_map)), flip)
    rhs = compose(v2.full_map, tangent(v1.full_map))
    return _check_on_samples("commutes", lhs, rhs, samples, tol, seed)


def is_vf_morphism(
    f: SmoothMap,
    v1: VectorField,
    v2: VectorField,
    samples=None,
    tol: float = JET_TOL,
    seed: int = DEFAULT_SEED,
) -> LawCheck:
    """f relates V1 to V2: V1 T(f) = f V2, sampled on the domain."""
    if f.domain != v1.space or f.codomain != v2.space:
        raise ShapeError("morphism check needs f: space(V1) -> space(V2)")
    samples, seed = _default_samples(v1.space.dim, samples, seed)
    lhs = compose(v1.full_map, tangent(f))
    rhs = compose(f, v2.full_map)
    return _check_on_samples("vf-morphism", lhs, rhs, samples, tol, seed)


def tangent_lift(v: VectorField) -> VectorField:
    """The lifted field T(V) c on the tangent space."""
    space = v.space
    lifted_space = space.tangent
    full = compose(tangent(v.full_map), structural_map("flip", space))
    vhat = compose(full, _component_of(lifted_space))
    return VectorField(lifted_space, vhat)


def product_vf(v1: VectorField, v2: VectorField) -> VectorField:
    """The product field on M1 x M2; its component map is the concatenation
    of the component maps (the tangent interleaving is applied by the
    full-map construction)."""
    return VectorField(
        Space(v1.space.dim + v2.space.dim), product(v1.vhat, v2.vhat)
    )


def product_full_map(v1: VectorField, v2: VectorField) -> SmoothMap:
    """V1 x V2 as a map into T(M1 x M2), interleaving included."""
    raw = product(v1.full_map, v2.full_map)  # lands in TM1 x TM2
    return compose(raw, product_interleave_inv(v1.space, v2.space))


def matrix_of(
    v: VectorField, tol: float = JET_TOL, seed: int = DEFAULT_SEED
) -> np.ndarray:
    """Extract the matrix of a linear field (columns vhat(e_i) - vhat(0));
    raises :class:`LinearityError` when the sampled linearity residual
    exceeds ``tol``."""
    n = v.space.dim
    at_zero = [primal_value(y) for y in v.vhat([0.0] * n)]
    cols = []
    for i in range(n):
        e = [0.0] * n
        e[i] = 1.0
        cols.append([primal_value(y) - z for y, z in zip(v.vhat(e), at_zero)])
    A = np.array(cols, dtype=float).T if n else np.zeros((0, 0))

    worst = 0.0
    witness = None
    for point in sample_points(n, count=25, seed=seed):
        expected = A @ np.array(point) if n else np.zeros(0)
        actual = np.array([primal_value(y) for y in v.vhat(point)])
        residual = float(np.max(np.abs(actual - expected))) if n else 0.0
        if residual > worst:
            worst = residual
            witness = tuple(point)
    if worst > tol:
        raise LinearityError(worst, witness)
    return A
