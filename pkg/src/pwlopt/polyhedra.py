"""Exact bit sizes of rational polyhedra and the variable bounds they imply.

All arithmetic is on Python ints and :class:`fractions.Fraction`, so
``2**(U-1)`` never overflows. Matrix entries whose denominator is 1 are
sized as integers, other entries as ratios of coprime integers.
"""
from __future__ import annotations

import itertools
import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .approx import ceil_log, sharp_ratio
from .exceptions import DomainError, InvalidArgument, SizeCapExceeded

VERTEX_CAP = 8


def size_int(r):
    """``1 + ceil(log2(|r|+1))``; the ceiling equals the bit length of ``|r|``."""
    if not isinstance(r, numbers.Integral):
        raise InvalidArgument(f"size_int needs an integer, got {r!r}")
    return 1 + abs(int(r)).bit_length()


def size_rat(r):
    """``size(num) + size(den)`` for a rational in lowest terms.

    Accepts a :class:`Fraction` (always canonical) or a ``(num, den)`` pair,
    which must already be reduced with ``den >= 1``.
    """
    if isinstance(r, tuple):
        num, den = r
        if den < 1 or math.gcd(num, den) != 1:
            raise InvalidArgument(f"{num}/{den} is not in canonical form")
        return size_int(num) + size_int(den)
    r = Fraction(r)
    return size_int(r.numerator) + size_int(r.denominator)


def size_entry(r):
    r = Fraction(r)
    if r.denominator == 1:
        return size_int(r.numerator)
    return size_rat(r)


def size_mat(M):
    """``p*q + sum of entry sizes``; a flat sequence counts as a column."""
    rows = [row if isinstance(row, (list, tuple)) else [row] for row in M]
    p = len(rows)
    q = len(rows[0]) if rows else 0
    return p * q + sum(size_entry(x) for row in rows for x in row)


def to_rational(x):
    """Parse an int, Fraction, ``"p/q"`` string or ``{"n": .., "d": ..}`` dict."""
    if isinstance(x, dict):
        try:
            return Fraction(int(x["n"]), int(x["d"]))
        except (KeyError, ValueError, ZeroDivisionError) as exc:
            raise InvalidArgument(f"bad rational {x!r}") from exc
    if isinstance(x, float):
        raise InvalidArgument("floats are not accepted as exact rationals; use a string or int")
    try:
        return Fraction(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"bad rational {x!r}") from exc


def rational_json(r):
    return {"n": str(r.numerator), "d": str(r.denominator)}


@dataclass(frozen=True)
class Polyhedron:
    """``{x : Ax <= b}``, with ``x >= 0`` appended when ``nonneg``."""

    A: tuple
    b: tuple
    nonneg: bool = True

    def __post_init__(self):
        A = tuple(tuple(to_rational(v) for v in row) for row in self.A)
        b = tuple(to_rational(v) for v in self.b)
        if not A or not A[0]:
            raise InvalidArgument("A must have at least one row and one column")
        if any(len(row) != len(A[0]) for row in A):
            raise InvalidArgument("A is ragged")
        if len(b) != len(A):
            raise InvalidArgument(f"b has length {len(b)}, A has {len(A)} rows")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def shape(self):
        return len(self.A), len(self.A[0])

    def constraints(self):
        """All rows ``(a, beta)`` meaning ``a.x <= beta``, including sign rows."""
        m, n = self.shape
        rows = list(zip(self.A, self.b))
        if self.nonneg:
            for i in range(n):
                rows.append((tuple(Fraction(-1 if j == i else 0) for j in range(n)), Fraction(0)))
        return rows

    def contains(self, x):
        return all(sum(a * v for a, v in zip(row, x)) <= beta for row, beta in self.constraints())

    def to_json(self):
        return {"A": [[rational_json(v) for v in row] for row in self.A],
                "b": [rational_json(v) for v in self.b],
                "nonneg": self.nonneg}

    @classmethod
    def from_json(cls, data):
        try:
            return cls(data["A"], data["b"], bool(data.get("nonneg", True)))
        except KeyError as exc:
            raise InvalidArgument(f"polyhedron JSON lacks {exc}") from exc


@dataclass(frozen=True)
class BitSizeReport:
    n: int
    size_A: int
    size_b: int
    U: int
    V: int
    l: Fraction
    u: Fraction

    def to_json(self):
        return {"n": self.n, "size_A": self.size_A, "size_b": self.size_b, "U": self.U,
                "V": self.V, "l": rational_json(self.l), "u": rational_json(self.u)}


def bound_U(P):
    """Bit-size report with ``U = 4(size(A)+size(b)+2n^2+3n)`` and the implied bounds."""
    _, n = P.shape
    sa, sb = size_mat(P.A), size_mat(P.b)
    U = 4 * (sa + sb + 2 * n * n + 3 * n)
    top = 2 ** (U - 1) - 1
    return BitSizeReport(n, sa, sb, U, bound_V(P), Fraction(1, top), Fraction(top))


def bound_V(P):
    return 4 * (size_mat(P.A) + size_mat(P.b))


def as_float(r):
    """Float value of an exact bound; raises when it leaves double range."""
    try:
        f = float(r)
    except OverflowError as exc:
        raise DomainError(f"{r!r} overflows a double; use log_value instead") from exc
    if f == 0 and r != 0:
        raise DomainError("bound underflows a double; use log_value instead")
    return f


def log_value(r):
    """Natural log of a positive rational, exact enough for huge bit lengths."""
    r = Fraction(r)
    if r <= 0:
        raise InvalidArgument("log of a nonpositive rational")

    def _ln(k):
        shift = max(0, k.bit_length() - 60)
        return math.log(k >> shift) + shift * math.log(2)

    return _ln(r.numerator) - _ln(r.denominator)


def pieces_bound(epsilon, report):
    """``1 + ceil(2U / log2(1+4eps+4eps^2))`` evaluated as an exact ceiling."""
    U = report.U if isinstance(report, BitSizeReport) else int(report)
    return 1 + ceil_log(Fraction(2) ** (2 * U), sharp_ratio(epsilon))


class CoordinateBounds(NamedTuple):
    kind: str
    alpha: Fraction
    beta: Fraction
    l: Fraction
    u: Fraction
    V_cd: int | None


DOMAIN_KINDS = ("interval", "halfline_low", "halfline_high", "full_line")


def _parse_kind(spec):
    if isinstance(spec, str):
        spec = (spec,)
    kind, *ends = spec
    if kind not in DOMAIN_KINDS:
        raise InvalidArgument(f"unknown domain kind {kind!r}; expected one of {DOMAIN_KINDS}")
    need = {"interval": 2, "halfline_low": 1, "halfline_high": 1, "full_line": 0}[kind]
    if len(ends) != need or any(e is None for e in ends):
        raise InvalidArgument(f"{kind} needs {need} endpoint(s), got {ends!r}")
    return kind, [to_rational(e) for e in ends]


def general_bounds(P, kinds, cd_sizes=None):
    """Per-coordinate ``(alpha, beta, l, u)`` for a general-form polyhedron.

    ``kinds[i]`` is ``("interval", a, b)``, ``("halfline_low", a)`` for
    ``[a, inf)``, ``("halfline_high", b)`` for ``(-inf, b]`` or
    ``"full_line"``. ``cd_sizes[i]`` is the size budget of the domain
    polyhedron; when omitted, the largest size of the supplied endpoints is
    used instead.
    """
    _, n = P.shape
    if len(kinds) != n:
        raise InvalidArgument(f"expected {n} domain kinds, got {len(kinds)}")
    V = bound_V(P)
    out = []
    for i, spec in enumerate(kinds):
        kind, ends = _parse_kind(spec)
        if kind == "full_line":
            out.append(CoordinateBounds(kind, Fraction(-(2 ** V)), Fraction(2 ** V),
                                        Fraction(2 ** (V - 1)), Fraction(3 * 2 ** (V - 1)), None))
            continue
        vcd = cd_sizes[i] if cd_sizes is not None else max(size_rat(e) for e in ends)
        if kind == "interval":
            alpha, beta = ends
            if alpha >= beta:
                raise InvalidArgument(f"empty interval [{alpha}, {beta}]")
        elif kind == "halfline_low":
            alpha, beta = ends[0], Fraction(2 ** (V - 1))
        else:
            alpha, beta = Fraction(-(2 ** (V - 1))), ends[0]
        l = Fraction(1, 2 ** (V + vcd - 1) - 1)
        u = Fraction(2 ** (V - 1) + 2 ** (vcd - 1) - 1)
        out.append(CoordinateBounds(kind, alpha, beta, l, u, vcd))
    return out


def general_pieces_bound(epsilon, V_ab, V_cd):
    """``4 + 2 ceil((2V(A,b) + 2V(C,d)) / log2(1+4eps+4eps^2))``."""
    return 4 + 2 * ceil_log(Fraction(2) ** (2 * V_ab + 2 * V_cd), sharp_ratio(epsilon))


def restricted_pieces_bound(epsilon, V_ab, variant="3V"):
    """Piece bound when the domain is the feasible polyhedron itself.

    ``variant="4V"`` is the direct specialisation, ``"3V"`` the sharper one.
    """
    factor = {"4V": 4, "3V": 3}.get(variant)
    if factor is None:
        raise InvalidArgument(f"variant must be '4V' or '3V', got {variant!r}")
    return 4 + 2 * ceil_log(Fraction(2) ** (factor * V_ab), sharp_ratio(epsilon))


def endpoint_pieces_bound(epsilon, V_ab, alpha, beta):
    """Bound using the sizes of explicitly given domain endpoints."""
    e = 2 * V_ab + 2 * size_rat(to_rational(alpha)) + 2 * size_rat(to_rational(beta))
    return 4 + 2 * ceil_log(Fraction(2) ** e, sharp_ratio(epsilon))


def _solve_exact(rows, rhs):
    """Gauss-Jordan over the rationals; None when singular."""
    n = len(rows)
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return tuple(M[r][n] for r in range(n))


def brute_force_vertices(P, limit=VERTEX_CAP):
    """All vertices by exhaustive basis enumeration (test oracle; ``n, m <= 8``)."""
    m, n = P.shape
    if n > limit or m > limit:
        raise SizeCapExceeded(f"vertex enumeration capped at n, m <= {limit}; got n={n}, m={m}")
    rows = P.constraints()
    seen = set()
    for basis in itertools.combinations(range(len(rows)), n):
        x = _solve_exact([rows[i][0] for i in basis], [rows[i][1] for i in basis])
        if x is not None and x not in seen and P.contains(x):
            seen.add(x)
    return sorted(seen)
