"""Hook Specht module combinatorics on 10-subset coordinates.

A marking alphabet mixes numbered legs with half-edge ("node") marks.  Marks
are plain ints: leg k is k, and side s of edge e is NODE_BASE + 2e + s, so
node marks sort after every leg and among themselves by (edge, side).

Vectors of the weight-11 multiplicity space of a genus-1 vertex are stored as
sparse rational coefficient maps over unordered 10-subsets of the alphabet.
The spanning vectors omega(A), indexed by ordered 11-tuples A, are signed
simplicial boundaries; the ones with increasing A containing the minimal mark
form the standard generator basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

from . import ratlin

NODE_BASE = 1_000_000


def mark_leg(k: int) -> int:
    if not 1 <= k < NODE_BASE:
        raise ValueError(f"leg number out of range: {k}")
    return k


def mark_node(edge: int, side: int) -> int:
    if edge < 0 or side not in (0, 1):
        raise ValueError(f"bad node mark ({edge},{side})")
    return NODE_BASE + 2 * edge + side


def mark_is_node(m: int) -> bool:
    return m >= NODE_BASE


def mark_edge_side(m: int) -> tuple[int, int]:
    if not mark_is_node(m):
        raise ValueError(f"not a node mark: {m}")
    return divmod(m - NODE_BASE, 2)


def mark_str(m: int) -> str:
    if mark_is_node(m):
        e, s = mark_edge_side(m)
        return f"N{e}.{s}"
    return f"L{m}"


def mark_from_str(s: str) -> int:
    if s.startswith("L"):
        return mark_leg(int(s[1:]))
    if s.startswith("N"):
        e, side = s[1:].split(".")
        return mark_node(int(e), int(side))
    raise ValueError(f"bad mark string: {s!r}")


def subset_key(marks: Iterable[int]) -> str:
    return ",".join(mark_str(m) for m in sorted(marks))


def perm_sign(seq: Sequence) -> int:
    """Sign of the permutation sorting `seq` (entries pairwise distinct)."""
    n = len(seq)
    if len(set(seq)) != n:
        raise ValueError("entries not distinct")
    inv = 0
    for i in range(n):
        si = seq[i]
        for j in range(i + 1, n):
            if seq[j] < si:
                inv += 1
    return -1 if inv % 2 else 1


class NotInSpan:
    """Distinguished return value: vector not in the omega span."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotInSpan"


NOT_IN_SPAN = NotInSpan()


@dataclass
class H11Vector:
    """Element of the 10-subset coordinate space over a marking alphabet."""

    alphabet: tuple[int, ...]
    coeffs: dict[frozenset, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.alphabet = tuple(sorted(self.alphabet))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet has repeats")
        aset = set(self.alphabet)
        clean = {}
        for key, v in self.coeffs.items():
            fs = frozenset(key)
            if len(fs) != 10 or not fs <= aset:
                raise ValueError(f"bad coordinate key {sorted(fs)}")
            fv = Fraction(v)
            if fv:
                clean[fs] = fv
        self.coeffs = clean

    def is_zero(self) -> bool:
        return not self.coeffs

    def scale(self, c) -> "H11Vector":
        c = Fraction(c)
        if not c:
            return H11Vector(self.alphabet, {})
        return H11Vector(self.alphabet, {k: v * c for k, v in self.coeffs.items()})

    def __add__(self, other: "H11Vector") -> "H11Vector":
        if self.alphabet != other.alphabet:
            raise ValueError("alphabet mismatch")
        acc = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = acc.get(k, Fraction(0)) + v
            if s:
                acc[k] = s
            elif k in acc:
                del acc[k]
        return H11Vector(self.alphabet, acc)

    def __sub__(self, other: "H11Vector") -> "H11Vector":
        return self + other.scale(-1)

    def __eq__(self, other) -> bool:
        return (isinstance(other, H11Vector) and self.alphabet == other.alphabet
                and self.coeffs == other.coeffs)

    def to_json_dict(self) -> dict:
        return {
            "alphabet": [mark_str(m) for m in self.alphabet],
            "coeffs": {subset_key(k): f"{v.numerator}/{v.denominator}"
                       for k, v in sorted(self.coeffs.items(), key=lambda kv: subset_key(kv[0]))},
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "H11Vector":
        alphabet = tuple(mark_from_str(s) for s in d["alphabet"])
        coeffs = {frozenset(mark_from_str(t) for t in k.split(",")): Fraction(v)
                  for k, v in d["coeffs"].items()}
        return cls(alphabet, coeffs)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def omega_terms(A: Sequence[int]) -> Iterator[tuple[frozenset, int]]:
    """The 11 signed coordinates of omega(A): (-1)^(j-1) * sort sign on A minus a_j."""
    A = tuple(A)
    if len(A) != 11 or len(set(A)) != len(A):
        raise ValueError("need 11 distinct marks")
    for j in range(11):
        rest = A[:j] + A[j + 1:]
        sign = perm_sign(rest) * (1 if j % 2 == 0 else -1)
        yield frozenset(rest), sign


def omega(A: Sequence[int], alphabet: Sequence[int]) -> H11Vector:
    """Signed boundary expansion of the ordered 11-tuple A inside `alphabet`."""
    A = tuple(A)
    aset = set(alphabet)
    if len(A) != 11:
        raise ValueError(f"need an 11-tuple, got {len(A)} marks")
    if len(set(A)) != 11:
        raise ValueError("tuple entries not distinct")
    if not set(A) <= aset:
        raise ValueError("tuple not contained in alphabet")
    coeffs: dict[frozenset, Fraction] = {}
    for key, sign in omega_terms(A):
        coeffs[key] = coeffs.get(key, Fraction(0)) + sign
    return H11Vector(tuple(alphabet), coeffs)


def standard_generators(alphabet: Sequence[int]) -> list[tuple[int, ...]]:
    """All increasing 11-tuples containing the minimal mark; count binom(m-1,10)."""
    marks = tuple(sorted(alphabet))
    if len(marks) < 11:
        raise ValueError(f"alphabet too small for generators: {len(marks)} marks")
    lead = marks[0]
    return [(lead,) + rest for rest in combinations(marks[1:], 10)]


def expansion_matrix(alphabet: Sequence[int],
                     tuples: Sequence[tuple[int, ...]] | None = None) -> ratlin.SparseMat:
    """Coordinates-by-tuples matrix of omega expansions.

    Rows run over all 10-subsets of the alphabet in sorted order; columns over
    `tuples` (default: the standard generators).
    """
    marks = tuple(sorted(alphabet))
    if tuples is None:
        tuples = standard_generators(marks)
    subsets = list(combinations(marks, 10))
    row_index = {frozenset(s): i for i, s in enumerate(subsets)}
    row_labels = [subset_key(s) for s in subsets]
    col_labels = ["|".join(mark_str(m) for m in t) for t in tuples]
    triplets = []
    for j, t in enumerate(tuples):
        for key, sign in omega_terms(t):
            triplets.append((row_index[key], j, Fraction(sign)))
    return ratlin.SparseMat(row_labels, col_labels, triplets)


def coordinate_vector(v: H11Vector) -> list[Fraction]:
    """Dense coordinates of v in the sorted 10-subset row order."""
    marks = v.alphabet
    out = []
    for s in combinations(marks, 10):
        out.append(v.coeffs.get(frozenset(s), Fraction(0)))
    return out


def express_in_generators(v: H11Vector):
    """Exact coefficients of v over the standard generators, or NOT_IN_SPAN.

    Solves against the generator expansion matrix; desk-scale alphabets only.
    """
    if len(v.alphabet) < 11:
        return [] if v.is_zero() else NOT_IN_SPAN
    mat = expansion_matrix(v.alphabet)
    sol = ratlin.solve(mat, coordinate_vector(v))
    if sol is ratlin.Inconsistent:
        return NOT_IN_SPAN
    return list(sol)


def membership_in_span(v: H11Vector) -> bool:
    return express_in_generators(v) is not NOT_IN_SPAN


def expand_in_generators(alphabet: Sequence[int], coeffs: Sequence) -> H11Vector:
    """Sum of coeff * omega(gen) over the standard generators."""
    gens = standard_generators(alphabet)
    if len(coeffs) != len(gens):
        raise ValueError("coefficient length mismatch")
    acc: dict[frozenset, Fraction] = {}
    for c, g in zip(coeffs, gens):
        c = Fraction(c)
        if not c:
            continue
        for key, sign in omega_terms(g):
            s = acc.get(key, Fraction(0)) + c * sign
            if s:
                acc[key] = s
            elif key in acc:
                del acc[key]
    return H11Vector(tuple(alphabet), acc)


def relabel(v: H11Vector, mapping: Mapping[int, int],
            new_alphabet: Sequence[int] | None = None) -> H11Vector:
    """Signed transport of coordinates along an injective mark relabeling.

    The coefficient at B moves to mapping(B) with the sign of the reordering
    induced on the sorted representatives.
    """
    image = [mapping[m] for m in v.alphabet]
    if len(set(image)) != len(image):
        raise ValueError("mapping not injective on the alphabet")
    if new_alphabet is None:
        new_alphabet = image
    acc: dict[frozenset, Fraction] = {}
    for key, val in v.coeffs.items():
        src = sorted(key)
        dst = [mapping[m] for m in src]
        sign = perm_sign(dst)
        fs = frozenset(dst)
        s = acc.get(fs, Fraction(0)) + sign * val
        if s:
            acc[fs] = s
        elif fs in acc:
            del acc[fs]
    return H11Vector(tuple(new_alphabet), acc)


def act(sigma: Mapping[int, int], v: H11Vector) -> H11Vector:
    """Signed action of a permutation of v.alphabet."""
    if set(sigma) != set(v.alphabet) or set(sigma.values()) != set(v.alphabet):
        raise ValueError("sigma is not a permutation of the alphabet")
    return relabel(v, sigma, v.alphabet)


def express_omega_signed(tup: Sequence[int], lead_mark: int,
                         gen_index: Mapping[tuple[int, ...], int]) -> list[tuple[int, int]]:
    """Closed-form standard-generator expansion of omega(tup).

    Returns (generator index, +/-1) pairs: one term after sorting when the
    leading mark already occurs in the tuple, otherwise the 11 terms produced
    by the 12-term boundary relation.  Cross-checked against the solve-based
    route in the test suite.
    """
    tup = tuple(tup)
    sorted_t = tuple(sorted(tup))
    sgn = perm_sign(tup)
    if lead_mark in tup:
        return [(gen_index[sorted_t], sgn)]
    C = tuple(sorted((lead_mark,) + sorted_t))
    out = []
    for j in range(1, 12):  # positions 2..12, 1-based
        term = C[:j] + C[j + 1:]
        coeff = sgn * (1 if (j + 1) % 2 == 0 else -1)
        out.append((gen_index[term], coeff))
    return out


@dataclass(frozen=True)
class Tableau:
    """Hook-shape tableau: 11 marks down the first column, the rest increasing."""

    first_column: tuple[int, ...]
    first_row_rest: tuple[int, ...]

    def __post_init__(self):
        if len(self.first_column) != 11:
            raise ValueError("first column must have 11 entries")
        if list(self.first_row_rest) != sorted(self.first_row_rest):
            raise ValueError("first row must increase")
        both = set(self.first_column) | set(self.first_row_rest)
        if len(both) != len(self.first_column) + len(self.first_row_rest):
            raise ValueError("column and row overlap")

    @property
    def shape(self) -> tuple[int, ...]:
        return (len(self.first_row_rest) + 1,) + (1,) * 10

    def is_standard(self, alphabet: Sequence[int]) -> bool:
        col = self.first_column
        increasing = all(col[i] < col[i + 1] for i in range(10))
        return increasing and col[0] == min(alphabet)


def tableau_of(A: Sequence[int], alphabet: Sequence[int]) -> Tableau:
    """The hook tableau with the ordered tuple A down the column."""
    rest = tuple(sorted(set(alphabet) - set(A)))
    return Tableau(tuple(A), rest)


def span_dimension(alphabet: Sequence[int]) -> int:
    marks = tuple(alphabet)
    if len(marks) < 11:
        return 0
    return comb(len(marks) - 1, 10)
