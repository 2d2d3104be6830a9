"""Exact sparse linear algebra over the rationals.

Entries are `fractions.Fraction`, elimination is integer-preserving (rows are
scaled to integers and kept reduced by their content gcd), and ranks can be
cross-checked modulo a large prime.  Matrices carry opaque string labels so
that files written by one run can be consumed by another without positional
bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

DEFAULT_PRECHECK_PRIME = 999_999_937  # 30-bit prime used by the modular rank precheck


class ModularExactMismatch(RuntimeError):
    """Modular and exact elimination disagreed on a rank; assembly is suspect."""


class _Inconsistent:
    """Distinguished return value of `solve` for unsolvable systems."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Inconsistent"


Inconsistent = _Inconsistent()


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class SparseMat:
    """Sparse matrix over Q with labeled rows and columns.

    Stored row-major as dicts column-index -> Fraction; explicit zeros are
    never kept.  Immutable by convention once built.
    """

    __slots__ = ("row_labels", "col_labels", "rows")

    def __init__(self, row_labels: Sequence[str], col_labels: Sequence[str],
                 triplets: Iterable[tuple[int, int, object]] = ()):
        self.row_labels = [str(l) for l in row_labels]
        self.col_labels = [str(l) for l in col_labels]
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("duplicate row labels")
        if len(set(self.col_labels)) != len(self.col_labels):
            raise ValueError("duplicate column labels")
        self.rows: list[dict[int, Fraction]] = [dict() for _ in self.row_labels]
        nr, nc = len(self.row_labels), len(self.col_labels)
        for i, j, v in triplets:
            if not (0 <= i < nr and 0 <= j < nc):
                raise ValueError(f"entry ({i},{j}) out of bounds {nr}x{nc}")
            fv = _frac(v)
            if fv == 0:
                continue
            if j in self.rows[i]:
                raise ValueError(f"duplicate entry at ({i},{j})")
            self.rows[i][j] = fv

    @classmethod
    def from_rows(cls, row_labels: Sequence[str], col_labels: Sequence[str],
                  rows: Sequence[Mapping[int, object]]) -> "SparseMat":
        m = cls(row_labels, col_labels)
        for i, r in enumerate(rows):
            for j, v in r.items():
                fv = _frac(v)
                if fv:
                    m.rows[i][j] = fv
        return m

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.row_labels), len(self.col_labels))

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i].get(j, Fraction(0))

    def is_zero(self) -> bool:
        return all(not r for r in self.rows)

    def transpose(self) -> "SparseMat":
        t = SparseMat(self.col_labels, self.row_labels)
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                t.rows[j][i] = v
        return t

    def matmul(self, other: "SparseMat") -> "SparseMat":
        if len(self.col_labels) != len(other.row_labels):
            raise ValueError("shape mismatch in matmul")
        out = SparseMat(self.row_labels, other.col_labels)
        for i, r in enumerate(self.rows):
            acc: dict[int, Fraction] = {}
            for k, v in r.items():
                for j, w in other.rows[k].items():
                    s = acc.get(j, Fraction(0)) + v * w
                    if s:
                        acc[j] = s
                    elif j in acc:
                        del acc[j]
            out.rows[i] = acc
        return out

    def __matmul__(self, other: "SparseMat") -> "SparseMat":
        return self.matmul(other)

    def mul_vec(self, vec: Sequence[object]) -> list[Fraction]:
        if len(vec) != len(self.col_labels):
            raise ValueError("vector length mismatch")
        fv = [_frac(x) for x in vec]
        return [sum((v * fv[j] for j, v in r.items()), Fraction(0)) for r in self.rows]

    def equal(self, other: "SparseMat") -> bool:
        return (self.row_labels == other.row_labels
                and self.col_labels == other.col_labels
                and self.rows == other.rows)

    # text format: header `%%sparse-rational rows=R cols=C`, then one line per
    # entry `<row_label> <col_label> <num>/<den>` sorted by (row_label, col_label)
    def to_text(self) -> str:
        for lab in self.row_labels + self.col_labels:
            if not lab or any(c.isspace() for c in lab):
                raise ValueError(f"label not whitespace-free: {lab!r}")
        lines = [f"%%sparse-rational rows={len(self.row_labels)} cols={len(self.col_labels)}"]
        items = []
        for i, r in enumerate(self.rows):
            rl = self.row_labels[i]
            for j, v in r.items():
                items.append((rl, self.col_labels[j], v))
        items.sort(key=lambda t: (t[0], t[1]))
        for rl, cl, v in items:
            lines.append(f"{rl} {cl} {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "SparseMat":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("%%sparse-rational"):
            raise ValueError("missing sparse-rational header")
        head = dict(tok.split("=") for tok in lines[0].split()[1:])
        nr, nc = int(head["rows"]), int(head["cols"])
        entries = []
        for ln in lines[1:]:
            rl, cl, val = ln.split()
            entries.append((rl, cl, Fraction(val)))
        row_labels = sorted({rl for rl, _, _ in entries})
        col_labels = sorted({cl for _, cl, _ in entries})
        if len(row_labels) > nr or len(col_labels) > nc:
            raise ValueError("header counts smaller than labels present")
        ri = {l: i for i, l in enumerate(row_labels)}
        ci = {l: i for i, l in enumerate(col_labels)}
        return cls(row_labels, col_labels,
                   ((ri[rl], ci[cl], v) for rl, cl, v in entries))

    @classmethod
    def read(cls, path) -> "SparseMat":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def __repr__(self) -> str:
        return f"SparseMat({len(self.row_labels)}x{len(self.col_labels)}, nnz={self.nnz})"


def _int_rows(m: SparseMat) -> list[dict[int, int]]:
    """Rows scaled to integers and reduced by their content."""
    out = []
    for r in m.rows:
        if not r:
            continue
        den = 1
        for v in r.values():
            den = lcm(den, v.denominator)
        row = {j: int(v * den) for j, v in r.items()}
        _reduce_content(row)
        out.append(row)
    return out


def _reduce_content(row: dict[int, int]) -> None:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return
    if g > 1:
        for j in row:
            row[j] //= g


@dataclass
class EliminationStats:
    pivots: int = 0
    row_updates: int = 0
    max_row_len: int = 0


def _rank_elim(rows: list[dict[int, int]], mod: int | None = None,
               stats: EliminationStats | None = None) -> int:
    """Rank by sparse elimination, pivoting on least-populated columns.

    Exact integer mode keeps rows content-reduced after each update; modular
    mode reduces everything mod `mod`.
    """
    if mod is not None:
        mrows = []
        for r in rows:
            nr = {j: v % mod for j, v in r.items()}
            nr = {j: v for j, v in nr.items() if v}
            if nr:
                mrows.append(nr)
        rows = mrows
    else:
        rows = [dict(r) for r in rows if r]

    col_rows: dict[int, set[int]] = {}
    for i, r in enumerate(rows):
        for j in r:
            col_rows.setdefault(j, set()).add(i)

    rank = 0
    while col_rows:
        c = min(col_rows, key=lambda j: (len(col_rows[j]), j))
        holders = col_rows[c]
        p = min(holders, key=lambda i: (len(rows[i]), i))
        prow = rows[p]
        piv = prow[c]
        for r_id in [i for i in holders if i != p]:
            row = rows[r_id]
            f = row[c]
            old_keys = set(row)
            if mod is None:
                new = {j: piv * v for j, v in row.items()}
                for j, v in prow.items():
                    w = new.get(j, 0) - f * v
                    if w:
                        new[j] = w
                    elif j in new:
                        del new[j]
                _reduce_content(new)
            else:
                new = dict(row)
                for j, v in prow.items():
                    w = (new.get(j, 0) - f * v) % mod
                    if w:
                        new[j] = w
                    elif j in new:
                        del new[j]
            rows[r_id] = new
            new_keys = set(new)
            for j in old_keys - new_keys:
                s = col_rows.get(j)
                if s is not None:
                    s.discard(r_id)
                    if not s:
                        del col_rows[j]
            for j in new_keys - old_keys:
                col_rows.setdefault(j, set()).add(r_id)
            if stats is not None:
                stats.row_updates += 1
                if len(new) > stats.max_row_len:
                    stats.max_row_len = len(new)
        # retire pivot row and pivot column
        for j in rows[p]:
            s = col_rows.get(j)
            if s is not None:
                s.discard(p)
                if not s:
                    del col_rows[j]
        rows[p] = {}
        rank += 1
        if stats is not None:
            stats.pivots += 1
    return rank


def rank(m: SparseMat, stats: EliminationStats | None = None) -> int:
    """Exact rank of `m` over Q."""
    return _rank_elim(_int_rows(m), mod=None, stats=stats)


def rank_mod_prime(m: SparseMat, p: int) -> int:
    """Rank of `m` over F_p (a lower bound for the exact rank)."""
    return _rank_elim(_int_rows(m), mod=p)


def rank_with_precheck(m: SparseMat, prime: int = DEFAULT_PRECHECK_PRIME,
                       stats: EliminationStats | None = None) -> tuple[int, dict]:
    """Exact rank preceded by a modular precheck.

    Raises ModularExactMismatch when the two ranks differ (fast failure on
    assembly bugs; an unlucky prime also trips it, by design).
    """
    rows = _int_rows(m)
    modular = _rank_elim(rows, mod=prime)
    exact = _rank_elim(rows, mod=None, stats=stats)
    record = {"prime": prime, "modular_rank": modular, "exact_rank": exact}
    if modular > exact:
        raise ModularExactMismatch(
            f"modular rank {modular} exceeds exact rank {exact} (impossible): {record}")
    if modular != exact:
        raise ModularExactMismatch(
            f"modular/exact rank disagreement: {record}")
    return exact, record


def _echelon_fraction(rows: list[dict[int, Fraction]], rhs: list[Fraction] | None):
    """Gauss-Jordan elimination taking pivot columns in label (index) order.

    Returns (pivots: list of (col, row_id), rows, rhs) with pivot rows monic
    and pivot columns cleared from every other row.
    """
    pivots: list[tuple[int, int]] = []
    pivot_of_col: dict[int, int] = {}
    used_rows: set[int] = set()
    cols = sorted({j for r in rows for j in r})
    for c in cols:
        p = None
        for i, r in enumerate(rows):
            if i not in used_rows and c in r:
                p = i
                break
        if p is None:
            continue
        prow = rows[p]
        piv = prow[c]
        if piv != 1:
            rows[p] = prow = {j: v / piv for j, v in prow.items()}
            if rhs is not None:
                rhs[p] = rhs[p] / piv
        for i, r in enumerate(rows):
            if i == p or c not in r:
                continue
            f = r[c]
            new = dict(r)
            for j, v in prow.items():
                w = new.get(j, Fraction(0)) - f * v
                if w:
                    new[j] = w
                elif j in new:
                    del new[j]
            rows[i] = new
            if rhs is not None:
                rhs[i] = rhs[i] - f * rhs[p]
        used_rows.add(p)
        pivots.append((c, p))
        pivot_of_col[c] = p
    return pivots, rows, rhs


def kernel_basis(m: SparseMat) -> list[tuple[Fraction, ...]]:
    """Exact basis of the right kernel, one vector per free column."""
    ncols = len(m.col_labels)
    rows = [{j: Fraction(v) for j, v in r.items()} for r in m.rows if r]
    pivots, rows, _ = _echelon_fraction(rows, None)
    pivot_cols = {c: p for c, p in pivots}
    basis = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for c, p in pivots:
            vec[c] = -rows[p].get(f, Fraction(0))
        basis.append(tuple(vec))
    return basis


def solve(m: SparseMat, b: Sequence[object]):
    """Some exact solution of m x = b, or Inconsistent.

    Deterministic: columns are eliminated in label order and free variables
    are set to zero.
    """
    if len(b) != len(m.row_labels):
        raise ValueError("rhs length mismatch")
    rows = [{j: Fraction(v) for j, v in r.items()} for r in m.rows]
    rhs = [_frac(x) for x in b]
    pivots, rows, rhs = _echelon_fraction(rows, rhs)
    for i, r in enumerate(rows):
        if not r and rhs[i] != 0:
            return Inconsistent
    x = [Fraction(0)] * len(m.col_labels)
    for c, p in pivots:
        x[c] = rhs[p]
    return tuple(x)


@dataclass
class SignedAction:
    """A finite group of signed permutation matrices with a +/-1 character.

    `elements` must list the whole group; `character` is aligned with it.
    """

    elements: list[SparseMat]
    character: list[int]

    def __post_init__(self):
        if len(self.elements) != len(self.character):
            raise ValueError("character list misaligned with elements")
        for chi in self.character:
            if chi not in (1, -1):
                raise ValueError("character values must be +1 or -1")

    def perms(self) -> list[tuple[list[int], list[int]]]:
        """Per element: (image index per coordinate, sign per coordinate)."""
        out = []
        dim = None
        for mat in self.elements:
            n = len(mat.col_labels)
            if len(mat.row_labels) != n:
                raise ValueError("action matrices must be square")
            if dim is None:
                dim = n
            elif dim != n:
                raise ValueError("action matrices must share one dimension")
            img = [-1] * n
            sgn = [0] * n
            seen_rows = set()
            for i, r in enumerate(mat.rows):
                for j, v in r.items():
                    if v != 1 and v != -1:
                        raise ValueError("signed permutation entries must be +/-1")
                    if img[j] != -1:
                        raise ValueError("column with two entries")
                    img[j] = i
                    sgn[j] = int(v)
                    if i in seen_rows:
                        raise ValueError("row with two entries")
                    seen_rows.add(i)
            if any(t == -1 for t in img):
                raise ValueError("not a permutation matrix")
            out.append((img, sgn))
        return out


def invariant_basis(action: SignedAction) -> list[dict[int, Fraction]]:
    """Exact basis of the image of the averaging projector of `action`.

    Vectors are sparse dicts, supported on single group orbits (so their
    supports are pairwise disjoint), normalized to primitive integer vectors
    with positive leading coefficient, ordered by leading coordinate.
    """
    if not action.elements:
        raise ValueError("empty group")
    perms = action.perms()
    dim = len(perms[0][0])
    seen = [False] * dim
    basis: list[dict[int, Fraction]] = []
    for i in range(dim):
        if seen[i]:
            continue
        # orbit of coordinate i under the listed elements
        orbit = {i}
        stack = [i]
        while stack:
            x = stack.pop()
            for img, _ in perms:
                y = img[x]
                if y not in orbit:
                    orbit.add(y)
                    stack.append(y)
        for x in orbit:
            seen[x] = True
        acc: dict[int, int] = {}
        for (img, sgn), chi in zip(perms, action.character):
            j = img[i]
            s = chi * sgn[i]
            acc[j] = acc.get(j, 0) + s
        acc = {j: v for j, v in acc.items() if v}
        if not acc:
            continue
        g = 0
        for v in acc.values():
            g = gcd(g, v)
        lead = min(acc)
        if acc[lead] < 0:
            g = -g
        basis.append({j: Fraction(v // g) for j, v in acc.items()})
    return basis
