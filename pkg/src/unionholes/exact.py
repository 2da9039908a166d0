"""Exact rational scalars, 3-vectors, sparse matrices, rank and LP feasibility.

Every number that flows through the package is a ``gmpy2.mpq``: an
arbitrary-precision rational kept in lowest terms with a positive
denominator. Floats are rejected at the boundary so that nothing inexact
can leak in by accident.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Mapping, NamedTuple, Sequence

from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)


def Q(value, denominator=None) -> mpq:
    """Coerce ``value`` to an exact rational.

    Accepts ints, ``Fraction``, ``mpq``, and strings such as ``"3/4"``,
    ``"-2"`` or ``"0.125"``. Floats raise ``TypeError``.
    """
    if denominator is not None:
        return Q(value) / Q(denominator)
    if isinstance(value, float):
        raise TypeError(f"refusing inexact float {value!r}; pass a string or Fraction")
    if type(value) is type(ZERO):
        return value
    if isinstance(value, (Integral, Rational)):
        return mpq(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def parse_rational(text: str) -> mpq:
    """Parse ``"p/q"``, an integer, or a terminating decimal string."""
    s = text.strip()
    if not s:
        raise ValueError("empty rational literal")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            d = int(den)
            if d == 0:
                raise ZeroDivisionError
            return mpq(int(num), d)
        return Q(Fraction(s))
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None
    except ValueError:
        raise ValueError(f"not a rational literal: {text!r}") from None


def format_rational(q) -> str:
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def decimal_string(q, digits: int = 6) -> str:
    """Round ``q`` half-away-from-zero to ``digits`` decimals, exactly."""
    q = Q(q)
    scale = 10**digits
    num = abs(q.numerator) * scale
    den = q.denominator
    r, rem = divmod(num, den)
    if 2 * rem >= den:
        r += 1
    sign = "-" if q < 0 and r else ""
    whole, frac = divmod(r, scale)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def is_canonical(q) -> bool:
    return q.denominator > 0 and math.gcd(int(q.numerator), int(q.denominator)) == 1


class Vec3(NamedTuple):
    """A point or direction in 3-space with exact coordinates.

    Tuple ordering gives the lexicographic total order.
    """

    x: mpq
    y: mpq
    z: mpq

    @classmethod
    def of(cls, x, y, z) -> "Vec3":
        return cls(Q(x), Q(y), Q(z))

    def __add__(self, other):  # type: ignore[override]
        return Vec3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return Vec3(self.x - other[0], self.y - other[1], self.z - other[2])

    def __neg__(self):
        return Vec3(-self.x, -self.y, -self.z)

    def __mul__(self, s):  # type: ignore[override]
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other) -> mpq:
        return self.x * other[0] + self.y * other[1] + self.z * other[2]

    def cross(self, other) -> "Vec3":
        ox, oy, oz = other
        return Vec3(
            self.y * oz - self.z * oy,
            self.z * ox - self.x * oz,
            self.x * oy - self.y * ox,
        )

    def is_zero(self) -> bool:
        return not (self.x or self.y or self.z)


ORIGIN = Vec3(ZERO, ZERO, ZERO)


def primitive_integer_vector(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the parallel primitive integer vector."""
    qs = [Q(c) for c in v]
    den = 1
    for c in qs:
        den = math.lcm(den, int(c.denominator))
    ints = [int(c * den) for c in qs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return tuple(c // g for c in ints)


# --------------------------------------------------------------------------
# Sparse matrices and exact rank
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SparseMatrix:
    rows: int
    cols: int
    entries: Mapping[tuple[int, int], mpq] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r}, {c}) outside {self.rows}x{self.cols}")
            v = Q(v)
            if v:
                clean[(r, c)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrix":
        n_rows = len(rows)
        n_cols = len(rows[0]) if n_rows else 0
        entries = {
            (i, j): v for i, row in enumerate(rows) for j, v in enumerate(row) if v
        }
        return cls(n_rows, n_cols, entries)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): ONE for i in range(n)})

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_dense(self) -> list[list[mpq]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, {(c, r): v for (r, c), v in self.entries.items()})

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        by_row: dict[int, list[tuple[int, mpq]]] = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        acc: dict[tuple[int, int], mpq] = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                key = (r, c)
                acc[key] = acc.get(key, ZERO) + v * w
        return SparseMatrix(self.rows, other.cols, acc)

    def is_zero(self) -> bool:
        return not self.entries

    def nnz(self) -> int:
        return len(self.entries)


def _integer_rows(m: SparseMatrix) -> list[dict[int, int]]:
    rows: list[dict[int, mpq]] = [dict() for _ in range(m.rows)]
    for (r, c), v in m.entries.items():
        rows[r][c] = v
    out = []
    for row in rows:
        if not row:
            continue
        den = 1
        for v in row.values():
            den = math.lcm(den, int(v.denominator))
        out.append({c: int(v * den) for c, v in row.items()})
    return out


def _remove_content(row: dict[int, int]) -> None:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
        if g == 1:
            return
    if g > 1:
        for c in row:
            row[c] //= g


def matrix_rank(m: SparseMatrix) -> int:
    """Exact rank over the rationals.

    Rows are cleared of denominators and reduced with fraction-free integer
    row operations; each updated row is divided by its content to keep
    coefficients small. The pivot row is always a shortest remaining row.
    """
    rows = _integer_rows(m)
    col_rows: dict[int, set[int]] = {}
    for idx, row in enumerate(rows):
        for c in row:
            col_rows.setdefault(c, set()).add(idx)
    active = set(range(len(rows)))
    rank = 0
    while active:
        r = min(active, key=lambda i: (len(rows[i]), i))
        row = rows[r]
        active.discard(r)
        if not row:
            continue
        c = min(row, key=lambda j: (abs(row[j]), j))
        p = row[c]
        for c2 in row:
            col_rows[c2].discard(r)
        for r2 in list(col_rows.get(c, ())):
            other = rows[r2]
            a = other[c]
            g = math.gcd(p, a)
            mul_other, mul_piv = p // g, a // g
            if mul_other != 1:
                for k in other:
                    other[k] *= mul_other
            for k, v in row.items():
                nv = other.get(k, 0) - mul_piv * v
                if nv:
                    if k not in other:
                        col_rows.setdefault(k, set()).add(r2)
                    other[k] = nv
                elif k in other:
                    del other[k]
                    col_rows[k].discard(r2)
            _remove_content(other)
        rank += 1
    return rank


def nullity(m: SparseMatrix) -> int:
    return m.cols - matrix_rank(m)


# --------------------------------------------------------------------------
# Linear feasibility
# --------------------------------------------------------------------------


Constraint = tuple[tuple[mpq, ...], mpq]


@dataclass(frozen=True)
class LinearSystem:
    """Constraints ``<normal, x> <= offset`` and ``<normal, x> == offset``."""

    inequalities: tuple[Constraint, ...] = ()
    equalities: tuple[Constraint, ...] = ()
    n_vars: int | None = None

    def __post_init__(self):
        ineq = tuple((tuple(Q(a) for a in n), Q(b)) for n, b in self.inequalities)
        eq = tuple((tuple(Q(a) for a in n), Q(b)) for n, b in self.equalities)
        widths = {len(n) for n, _ in ineq + eq}
        if self.n_vars is not None:
            widths.add(self.n_vars)
        if len(widths) > 1:
            raise ValueError(f"constraints disagree on the variable count: {sorted(widths)}")
        if not widths:
            raise ValueError("empty system needs an explicit n_vars")
        object.__setattr__(self, "inequalities", ineq)
        object.__setattr__(self, "equalities", eq)
        object.__setattr__(self, "n_vars", widths.pop())

    def satisfied_by(self, x: Sequence) -> bool:
        for n, b in self.inequalities:
            if _dot(n, x) > b:
                return False
        for n, b in self.equalities:
            if _dot(n, x) != b:
                return False
        return True


@dataclass(frozen=True)
class Feasibility:
    """Outcome of an exact feasibility test.

    ``witness`` is set when feasible. For infeasible systems ``core`` lists
    the inequality indices of a subsystem that is already infeasible.
    """

    feasible: bool
    witness: tuple[mpq, ...] | None = None
    core: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.feasible


def _dot(a, b) -> mpq:
    s = ZERO
    for u, v in zip(a, b):
        if u:
            s += u * v
    return s


def _phase_one(rows: list[tuple[tuple[mpq, ...], mpq, bool]], n: int) -> tuple[mpq, ...] | None:
    """Dense phase-one simplex with Bland's rule.

    ``rows`` holds ``(a, b, is_equality)``. Variables are free, so each one
    is split into a positive and a negative part. Returns a point satisfying
    every row, or None when the phase-one optimum is positive.
    """
    n_rows = len(rows)
    n_slack = sum(1 for _, _, eq in rows if not eq)
    art_rows = [i for i, (_, b, eq) in enumerate(rows) if eq or b < 0]
    n_cols = 2 * n + n_slack + len(art_rows)
    first_art = 2 * n + n_slack

    tab: list[list[mpq]] = []
    basis: list[int] = []
    slack = 2 * n
    art = first_art
    for i, (a, b, eq) in enumerate(rows):
        sign = -1 if b < 0 else 1
        line = [ZERO] * (n_cols + 1)
        for j, v in enumerate(a):
            if v:
                line[j] = sign * v
                line[n + j] = -sign * v
        if not eq:
            line[slack] = mpq(sign)
            if sign > 0:
                basis.append(slack)
            slack += 1
        if eq or b < 0:
            line[art] = ONE
            basis.append(art)
            art += 1
        line[-1] = sign * b
        tab.append(line)

    # reduced costs for minimising the sum of artificials
    cost = [ZERO] * (n_cols + 1)
    for i in art_rows:
        line = tab[i]
        for j in range(n_cols + 1):
            if line[j]:
                cost[j] -= line[j]
    for j in range(first_art, n_cols):
        cost[j] = ZERO

    while True:
        enter = next((j for j in range(n_cols) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(n_rows):
            coef = tab[i][enter]
            if coef > 0:
                key = (tab[i][-1] / coef, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            # cannot happen: phase one is bounded below by zero
            raise ArithmeticError("phase-one simplex reported unbounded")
        leave = best[1]
        prow = tab[leave]
        piv = prow[enter]
        if piv != 1:
            prow = [v / piv for v in prow]
            tab[leave] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i in range(n_rows):
            if i == leave:
                continue
            f = tab[i][enter]
            if f:
                line = tab[i]
                for j in nz:
                    line[j] -= f * prow[j]
        f = cost[enter]
        for j in nz:
            cost[j] -= f * prow[j]
        basis[leave] = enter

    if cost[-1] != 0:
        return None
    values = [ZERO] * n_cols
    for i, var in enumerate(basis):
        values[var] = tab[i][-1]
    return tuple(values[j] - values[n + j] for j in range(n))


def lp_feasible(system: LinearSystem, batch: int | None = None) -> Feasibility:
    """Decide exactly whether ``system`` has a solution.

    Works by constraint generation: phase one is run on a growing active
    subset of the inequalities, adding the most violated ones until the
    subset's solution satisfies everything (feasible) or the subset itself
    is infeasible (which proves the whole system infeasible). Equalities are
    always active. The returned witness has been substituted into every
    constraint.
    """
    n = system.n_vars
    ineq = system.inequalities
    eq = [(a, b, True) for a, b in system.equalities]
    batch = batch or n + 1
    x: tuple[mpq, ...] = (ZERO,) * n
    active: list[int] = []
    in_active: set[int] = set()
    solved_once = False
    while True:
        if solved_once or not eq:
            violated = []
            for idx, (a, b) in enumerate(ineq):
                gap = _dot(a, x) - b
                if gap > 0:
                    violated.append((-gap, idx))
            if not violated:
                if system.satisfied_by(x):
                    return Feasibility(True, x)
                raise ArithmeticError("witness failed exact re-verification")
            violated.sort()
            for _, idx in violated[:batch]:
                if idx in in_active:
                    raise ArithmeticError("active constraint violated by phase-one solution")
                active.append(idx)
                in_active.add(idx)
        rows = eq + [(ineq[i][0], ineq[i][1], False) for i in active]
        sol = _phase_one(rows, n)
        solved_once = True
        if sol is None:
            return Feasibility(False, None, tuple(sorted(active)))
        x = sol


def halfspace_system(constraints: Iterable[Constraint], n_vars: int = 3) -> LinearSystem:
    return LinearSystem(tuple(constraints), (), n_vars)


__all__ = [
    "Q",
    "ZERO",
    "ONE",
    "ORIGIN",
    "Vec3",
    "SparseMatrix",
    "LinearSystem",
    "Feasibility",
    "lp_feasible",
    "matrix_rank",
    "nullity",
    "parse_rational",
    "format_rational",
    "decimal_string",
    "is_canonical",
    "primitive_integer_vector",
    "halfspace_system",
]
