"""Claimed splittings of the seven families and their abelian invariants.

Each family is paired with the graph-of-groups shape it is expected to split
as, together with generator words (over the family alphabet) for the factor
groups.  The claim's own standard presentation is abelianized independently
of the family presentation so that the two can be compared.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .groups import (
    AbelianInvariants,
    Family,
    FamilySpec,
    exponent_sums,
    invariants_from_relations,
)


class Shape(str, enum.Enum):
    FREE_PRODUCT = "FreeProduct"
    HNN = "HNN"
    AMALGAM_DIHEDRAL = "AmalgamDihedral"
    AMALGAM_CYCLIC_DIHEDRAL = "AmalgamCyclicDihedral"
    AMALGAM_INFINITE_DIHEDRAL = "AmalgamInfiniteDihedral"


@dataclass(frozen=True)
class SplittingClaim:
    family: Family
    shape: Shape
    n: int
    m: int | None
    factors: tuple[tuple[str, ...], ...]
    label: str
    under_test: bool = False

    @property
    def generator_words(self) -> tuple[str, ...]:
        return tuple(w for factor in self.factors for w in factor)

    def as_dict(self) -> dict:
        return {
            "family": self.family.value,
            "shape": self.shape.value,
            "label": self.label,
            "n": self.n,
            "m": self.m,
            "factors": [list(f) for f in self.factors],
            "under_test": self.under_test,
        }


def classify(spec: FamilySpec) -> SplittingClaim:
    """The splitting each family is expected to have."""
    n, m = spec.n, spec.m
    f = spec.family
    if f is Family.P1:
        return SplittingClaim(f, Shape.FREE_PRODUCT, n, m, (("ba",), ("b",)), f"Z_{n} * Z_2")
    if f is Family.P2:
        return SplittingClaim(
            f, Shape.HNN, n, m, (("bAba", "b"), ("a",)), f"D_{2 * n} *_Z_2 (t)"
        )
    if f is Family.P3:
        return SplittingClaim(
            f, Shape.AMALGAM_DIHEDRAL, n, m, (("ba", "b"), ("bc", "b")), f"D_{2 * n} *_Z_2 D_{2 * m}"
        )
    if f is Family.P4:
        return SplittingClaim(
            f, Shape.FREE_PRODUCT, n, m, (("bcba",), ("b",)), f"Z_{n} * Z_2", under_test=True
        )
    if f is Family.P5:
        return SplittingClaim(
            f,
            Shape.AMALGAM_CYCLIC_DIHEDRAL,
            n,
            m,
            (("a",), ("b" + "a" * n, "b")),
            f"Z_{2 * n} *_Z_2 D_{2 * m}",
        )
    if f is Family.P6:
        return SplittingClaim(
            f,
            Shape.AMALGAM_DIHEDRAL,
            n,
            m,
            (("bc", "b"), ("a" + "bc" * n, "a")),
            f"D_{4 * n} *_Z_2 D_{2 * m}",
        )
    return SplittingClaim(
        f,
        Shape.AMALGAM_INFINITE_DIHEDRAL,
        n,
        m,
        (("bc", "b"), ("a" + "bc" * n + "b", "a")),
        f"D_inf *_Z_2 D_{2 * m}",
    )


def _dihedral(rot: str, ref: str, k: int) -> list[str]:
    return [ref * 2, rot * k, (ref + rot) * 2]


def standard_presentation(claim: SplittingClaim) -> tuple[str, list[str]]:
    """Generators and relators of the claim's standard presentation.

    Uppercase letters are inverses.  Dihedral factors are ``<p, q | q^2, p^k,
    (qp)^2>``; the amalgamating relation identifies the common involution.
    """
    n, m = claim.n, claim.m or 0
    f = claim.family
    if claim.shape is Shape.FREE_PRODUCT:
        return "xy", ["x" * n, "yy"]
    if claim.shape is Shape.HNN:
        # the stable letter conjugates the reflection q to the reflection qp
        return "pqt", _dihedral("p", "q", n) + ["TqtPQ"]
    if f is Family.P3:
        return "pqrs", _dihedral("p", "q", n) + _dihedral("r", "s", m) + ["qS"]
    if f is Family.P5:
        return "pqr", ["p" * (2 * n)] + _dihedral("r", "q", m) + ["p" * n + "RQ"]
    if f is Family.P6:
        return "pqrs", _dihedral("p", "q", 2 * n) + _dihedral("r", "s", m) + ["p" * n + "RS"]
    # D_inf is the dihedral presentation without a rotation order
    d_inf = ["qq", "qpqp"]
    return "pqrs", d_inf + _dihedral("r", "s", m) + ["p" * n + "qRS"]


def splitting_abelianization(claim: SplittingClaim) -> AbelianInvariants:
    gens, relators = standard_presentation(claim)
    matrix = [exponent_sums(r, list(gens)) for r in relators]
    return invariants_from_relations(matrix, len(gens))
