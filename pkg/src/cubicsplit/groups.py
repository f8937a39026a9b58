"""Presentation families, rewriting systems and abelian invariants.

Words are plain ``str`` over the alphabet ``a A b c``.  ``A`` is the inverse
of ``a`` and only exists in the families where ``a`` has infinite or even
order > 2 (P1, P2, P5); everywhere else ``a``, ``b``, ``c`` are involutions.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

ORDER = "aAbc"
_KEYMAP = str.maketrans({"a": "0", "A": "1", "b": "2", "c": "3"})

DEFAULT_RULE_CAP = 2000


class GroupError(Exception):
    pass


class InvalidParameters(GroupError, ValueError):
    pass


class CompletionOverflow(GroupError):
    def __init__(self, rule_cap: int):
        super().__init__(f"Knuth-Bendix completion exceeded {rule_cap} rules")
        self.rule_cap = rule_cap


def shortlex_key(word: str) -> tuple[int, str]:
    return (len(word), word.translate(_KEYMAP))


class Family(str, enum.Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"
    P6 = "P6"
    P7 = "P7"


_TWO_GEN = {Family.P1, Family.P2, Family.P5}
_USES_M = {Family.P3, Family.P5, Family.P6, Family.P7}
# minimal admissible (n, m); below these a relator collapses the Cayley graph
_MINIMA = {
    Family.P1: (2, None),
    Family.P2: (1, None),
    Family.P3: (2, 2),
    Family.P4: (1, None),
    Family.P5: (2, 2),
    Family.P6: (1, 2),
    Family.P7: (1, 2),
}
_RELATOR_TEXT = {
    Family.P1: ("b^2", "(ba)^n"),
    Family.P2: ("b^2", "(ba^-1ba)^n"),
    Family.P3: ("(ba)^n", "(bc)^m"),
    Family.P4: ("(bcba)^n",),
    Family.P5: ("a^2n", "(ba^n)^m"),
    Family.P6: ("(bc)^2n", "(a(bc)^n)^m"),
    Family.P7: ("(a(bc)^nb)^m",),
}


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    n: int
    m: int | None = None

    def __post_init__(self) -> None:
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        n_min, m_min = _MINIMA[fam]
        if not isinstance(self.n, int) or self.n < n_min:
            raise InvalidParameters(
                f"{fam.value} needs n >= {n_min} (got n={self.n}); "
                f"relator {_RELATOR_TEXT[fam][0]} degenerates"
            )
        if fam in _USES_M:
            if not isinstance(self.m, int) or self.m < m_min:
                raise InvalidParameters(
                    f"{fam.value} needs m >= {m_min} (got m={self.m}); "
                    f"relator {_RELATOR_TEXT[fam][-1]} degenerates"
                )
        elif self.m is not None:
            raise InvalidParameters(f"{fam.value} takes no m parameter")

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """Parse ``family=P5 n=2 m=3``."""
        fields = dict(re.findall(r"(\w+)\s*=\s*(\w+)", text))
        if "family" not in fields or "n" not in fields:
            raise InvalidParameters(f"cannot parse presentation spec {text!r}")
        m = int(fields["m"]) if "m" in fields else None
        return cls(Family(fields["family"].upper()), int(fields["n"]), m)

    def __str__(self) -> str:
        s = f"family={self.family.value} n={self.n}"
        return s if self.m is None else s + f" m={self.m}"

    @property
    def generators(self) -> tuple[str, ...]:
        """Edge-producing generator symbols (the cubic generating set)."""
        return ("a", "A", "b") if self.family in _TWO_GEN else ("a", "b", "c")

    @property
    def alphabet(self) -> str:
        return "aAb" if self.family in _TWO_GEN else "abc"

    @property
    def a_is_involution(self) -> bool:
        return self.family not in _TWO_GEN

    def relators(self) -> list[str]:
        """Defining relators, involution squares included."""
        n, m = self.n, self.m
        f = self.family
        if f is Family.P1:
            return ["bb", "ba" * n]
        if f is Family.P2:
            return ["bb", "bAba" * n]
        if f is Family.P5:
            return ["bb", "a" * (2 * n), ("b" + "a" * n) * m]
        invs = ["aa", "bb", "cc"]
        if f is Family.P3:
            return invs + ["ba" * n, "bc" * m]
        if f is Family.P4:
            return invs + ["bcba" * n]
        if f is Family.P6:
            return invs + ["bc" * (2 * n), ("a" + "bc" * n) * m]
        return invs + [("a" + "bc" * n + "b") * m]

    def presentation(self) -> str:
        gens = ",".join(sorted(set(self.alphabet.lower())))
        return f"<{gens} | {', '.join(self.relators())}>"

    def normalize_surface(self, word: str) -> str:
        """Map ``A`` to ``a`` where ``a`` is an involution; reject foreign letters."""
        if self.a_is_involution:
            word = word.replace("A", "a")
        bad = set(word) - set(self.alphabet)
        if bad:
            raise InvalidParameters(f"letters {sorted(bad)} not in alphabet {self.alphabet}")
        return word

    def inverse(self, word: str) -> str:
        if self.a_is_involution:
            return word[::-1]
        return word[::-1].translate(str.maketrans("aA", "Aa"))


# Letter precedence for the recursive path ordering used to orient rules.
# Shortlex completion diverges on several of the families (for instance when
# ``a`` commutes with ``bcb``), while this ordering finishes on all of them.
PRECEDENCE = "cbaA"
_RANK = {ch: i for i, ch in enumerate(PRECEDENCE)}


def rpo_greater(u: str, v: str) -> bool:
    """Recursive path ordering on words, read right to left.

    With ``u = u'x`` and ``v = v'y``: ``u > v`` iff ``u' >= v``, or ``x > y``
    and ``u > v'``, or ``x == y`` and ``u' > v'``.
    """
    if u == v:
        return False
    lu, lv = len(u), len(v)
    common = 0
    while common < min(lu, lv) and u[common] == v[common]:
        common += 1
    ru = [_RANK[ch] for ch in u]
    rv = [_RANK[ch] for ch in v]
    # row[j] holds u[:i] > v[:j] for the current i
    prev = [False] * (lv + 1)
    for i in range(1, lu + 1):
        row = [True] + [False] * lv
        x = ru[i - 1]
        for j in range(1, lv + 1):
            if prev[j] or (j == i - 1 and common >= j):
                row[j] = True
                continue
            y = rv[j - 1]
            if x > y:
                row[j] = row[j - 1]
            elif x == y:
                row[j] = prev[j - 1]
        prev = row
    return prev[lv]


@dataclass(frozen=True)
class Unbounded:
    """No power up to ``cap`` is trivial."""

    cap: int


def _orient(u: str, v: str) -> tuple[str, str]:
    return (u, v) if rpo_greater(u, v) else (v, u)


class _Rules:
    """Mutable rule set used during completion."""

    def __init__(self) -> None:
        self.rules: dict[str, str] = {}
        self.lengths: list[int] = []

    def _refresh(self) -> None:
        self.lengths = sorted({len(k) for k in self.rules})

    def reduce(self, word: str) -> str:
        return _reduce(word, self.rules, self.lengths)

    def add(self, u: str, v: str, cap: int) -> bool:
        """Add the equation ``u = v``; return True if the rule set changed."""
        changed = False
        pending = [(u, v)]
        while pending:
            u, v = pending.pop()
            u, v = self.reduce(u), self.reduce(v)
            if u == v:
                continue
            lhs, rhs = _orient(u, v)
            # lhs is irreducible, so no existing lhs occurs inside it; the
            # reverse may happen, and those rules are retired.
            for old in [k for k in self.rules if lhs in k]:
                pending.append((old, self.rules.pop(old)))
            self.rules[lhs] = rhs
            self._refresh()
            for k, r in list(self.rules.items()):
                if k != lhs:
                    self.rules[k] = self.reduce(r)
            changed = True
            if len(self.rules) > cap:
                raise CompletionOverflow(cap)
        return changed


def _reduce(word: str, rules: dict[str, str], lengths: Sequence[int]) -> str:
    out: list[str] = []
    todo = list(reversed(word))
    while todo:
        out.append(todo.pop())
        n_out = len(out)
        for k in lengths:
            if k > n_out:
                break
            rhs = rules.get("".join(out[n_out - k :]))
            if rhs is not None:
                del out[n_out - k :]
                todo.extend(reversed(rhs))
                break
    return "".join(out)


def _critical_pairs(l1: str, r1: str, l2: str, r2: str) -> list[tuple[str, str, str]]:
    found = []
    for k in range(1, min(len(l1), len(l2))):
        if l1[-k:] == l2[:k]:
            found.append((l1 + l2[k:], r1 + l2[k:], l1[:-k] + r2))
    return found


@dataclass(frozen=True)
class RewriteSystem:
    spec: FamilySpec
    rules: tuple[tuple[str, str], ...]
    complete: bool = True
    _table: dict[str, str] = field(default_factory=dict, repr=False, compare=False, hash=False)
    _lengths: tuple[int, ...] = field(default=(), repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        self._table.update(self.rules)
        object.__setattr__(self, "_lengths", tuple(sorted({len(k) for k, _ in self.rules})))

    def nf(self, word: str) -> str:
        return _reduce(self.spec.normalize_surface(word), self._table, self._lengths)

    def multiply(self, u: str, v: str) -> str:
        return self.nf(u + v)

    def invert(self, u: str) -> str:
        return self.nf(self.spec.inverse(self.spec.normalize_surface(u)))

    def element_order(self, word: str, cap: int) -> "int | Unbounded":
        """Least ``k <= cap`` with ``word**k == 1``, else :class:`Unbounded`."""
        if cap < 1:
            raise ValueError("cap must be >= 1")
        w = self.nf(word)
        power = w
        for k in range(1, cap + 1):
            if power == "":
                return k
            power = self.nf(power + w)
        return Unbounded(cap)

    def subgroup(self, generators: Iterable[str], limit: int = 100_000) -> frozenset[str]:
        """Closure of ``generators`` under multiplication (finite subgroups only)."""
        gens = [self.nf(g) for g in generators]
        gens += [self.invert(g) for g in gens]
        seen = {""}
        frontier = [""]
        while frontier:
            nxt = []
            for h in frontier:
                for g in gens:
                    k = self.nf(h + g)
                    if k not in seen:
                        seen.add(k)
                        nxt.append(k)
            if len(seen) > limit:
                raise GroupError(f"subgroup closure exceeded {limit} elements")
            frontier = nxt
        return frozenset(seen)

    def to_text(self) -> str:
        return "\n".join(f"{l or 'e'} -> {r or 'e'}" for l, r in self.rules)


def build_rewrite_system(spec: FamilySpec, rule_cap: int = DEFAULT_RULE_CAP) -> RewriteSystem:
    """Knuth-Bendix completion of ``spec``'s presentation.

    Rules are oriented by :func:`rpo_greater`.

    Critical pairs are resolved pass by pass; within a pass they are taken in
    shortlex order of their superposition word, so the resulting system is
    reproducible.
    """
    if rule_cap < 1:
        raise ValueError("rule_cap must be >= 1")
    rs = _Rules()
    if not spec.a_is_involution:
        rs.add("aA", "", rule_cap)
        rs.add("Aa", "", rule_cap)
    for rel in spec.relators():
        rs.add(rel, "", rule_cap)

    checked: set[tuple[tuple[str, str], tuple[str, str]]] = set()
    while True:
        current = sorted(rs.rules.items(), key=lambda kv: shortlex_key(kv[0]))
        todo = []
        for p in current:
            for q in current:
                if (p, q) in checked:
                    continue
                checked.add((p, q))
                todo.extend(_critical_pairs(p[0], p[1], q[0], q[1]))
        if not todo:
            break
        todo.sort(key=lambda t: (shortlex_key(t[0]), shortlex_key(t[1]), shortlex_key(t[2])))
        for _, u, v in todo:
            rs.add(u, v, rule_cap)
        live = set(rs.rules.items())
        checked = {pq for pq in checked if pq[0] in live and pq[1] in live}

    rules = tuple(sorted(rs.rules.items(), key=lambda kv: shortlex_key(kv[0])))
    return RewriteSystem(spec, rules, complete=True)


# -- abelian invariants -------------------------------------------------------


@dataclass(frozen=True)
class AbelianInvariants:
    free_rank: int
    torsion: tuple[int, ...]

    def __post_init__(self) -> None:
        t = tuple(self.torsion)
        object.__setattr__(self, "torsion", t)
        if any(d < 2 for d in t) or any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"torsion {t} is not a divisibility chain of integers >= 2")

    def as_dict(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


def smith_diagonal(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero invariant factors of an integer matrix, in divisibility order."""
    a = [list(map(int, row)) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    diag = []
    t = 0
    while t < min(rows, cols):
        pivots = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not pivots:
            break
        _, pi, pj = min(pivots)
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    dirty = True
            for j in range(t + 1, cols):
                q = a[t][j] // p
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                if a[t][j]:
                    dirty = True
            if not dirty:
                bad = [(i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p]
                if not bad:
                    break
                # pull a non-divisible entry into the pivot row
                i, _ = bad[0]
                a[t] = [x + y for x, y in zip(a[t], a[i])]
                continue
            # move the smallest nonzero entry of row/column t into the pivot
            cand = [(abs(a[i][t]), i, t) for i in range(t, rows) if a[i][t]]
            cand += [(abs(a[t][j]), t, j) for j in range(t, cols) if a[t][j]]
            _, pi, pj = min(cand)
            a[t], a[pi] = a[pi], a[t]
            for row in a:
                row[t], row[pj] = row[pj], row[t]
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def invariants_from_relations(matrix: Sequence[Sequence[int]], n_generators: int) -> AbelianInvariants:
    diag = smith_diagonal(matrix) if matrix else []
    return AbelianInvariants(
        free_rank=n_generators - len(diag),
        torsion=tuple(d for d in diag if d != 1),
    )


def exponent_sums(word: str, generators: Sequence[str]) -> list[int]:
    """Exponent sum per generator; ``X`` (uppercase) counts as ``x**-1``."""
    sums = dict.fromkeys(generators, 0)
    for ch in word:
        if ch in sums:
            sums[ch] += 1
        elif ch.lower() in sums:
            sums[ch.lower()] -= 1
        else:
            raise ValueError(f"letter {ch!r} not among generators {list(generators)}")
    return [sums[g] for g in generators]


def abelianization(spec: FamilySpec) -> AbelianInvariants:
    gens = sorted(set(spec.alphabet.lower()))
    matrix = [exponent_sums(r, gens) for r in spec.relators()]
    return invariants_from_relations(matrix, len(gens))
