"""Weight-11 cohomology data attached to stable graphs.

Each genus-1 vertex with at least 11 marks contributes a summand spanned by
the standard generators over its marking alphabet; genus-0 vertices carry
nothing, and genus >= 2 vertices must already be certified zero in the
vanishing ledger before any basis involving them can be assembled.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Protocol, Sequence

from . import ratlin, specht
from .graphs import (GraphIso, StableGraph, automorphisms, canonical_key,
                     canonicalize, contract_edge, det_edge_character)
from .specht import H11Vector, mark_node, mark_str


class UnknownStatusError(RuntimeError):
    """A genus >= 2 vertex was consulted before its status was resolved."""

    def __init__(self, g: int, m: int):
        super().__init__(f"H11 status of ({g},{m}) is unresolved")
        self.g = g
        self.m = m


class NotInSpanError(ValueError):
    """Input vector is outside the omega span."""


class LedgerLike(Protocol):
    def h11_dim(self, g: int, n: int) -> int: ...


def vertex_h11_dim(g_v: int, m: int, ledger: LedgerLike | None = None) -> int:
    """Dimension of the weight-11 space of a single (g_v, m) vertex.

    Genus 0 gives 0, genus 1 gives binom(m-1, 10); genus >= 2 requires a
    resolved ledger entry and raises UnknownStatusError otherwise.
    """
    if not (2 * g_v - 2 + m > 0):
        raise ValueError(f"unstable vertex type ({g_v},{m})")
    if g_v == 0:
        return 0
    if g_v == 1:
        return comb(m - 1, 10) if m >= 11 else 0
    if ledger is None:
        raise UnknownStatusError(g_v, m)
    return ledger.h11_dim(g_v, m)


@dataclass
class Summand:
    vertex: int
    alphabet: tuple[int, ...]
    generators: list[tuple[int, ...]]
    offset: int

    @property
    def dim(self) -> int:
        return len(self.generators)


@dataclass
class GraphH11Basis:
    graph: StableGraph
    key: str
    summands: list[Summand]
    total_dim: int

    def labels(self) -> list[str]:
        out = []
        for s in self.summands:
            for gen in s.generators:
                out.append(f"{self.key}#v{s.vertex}#" + ",".join(mark_str(m) for m in gen))
        return out

    def summand_of_vertex(self, v: int) -> Summand | None:
        for s in self.summands:
            if s.vertex == v:
                return s
        return None

    def gen_index(self, s: Summand) -> dict[tuple[int, ...], int]:
        return {g: s.offset + i for i, g in enumerate(s.generators)}


def graph_basis(G: StableGraph, ledger: LedgerLike | None = None,
                key: str | None = None) -> GraphH11Basis:
    """Per-vertex standard-generator lists over the vertex alphabets."""
    summands = []
    offset = 0
    for v in range(G.num_vertices):
        g_v = G.genera[v]
        marks = G.vertex_marks(v)
        dim = vertex_h11_dim(g_v, len(marks), ledger)
        if g_v == 1 and dim > 0:
            gens = specht.standard_generators(marks)
            summands.append(Summand(v, marks, gens, offset))
            offset += len(gens)
    if key is None:
        key = canonical_key(G)
    return GraphH11Basis(G, key, summands, offset)


def res(v: H11Vector, B: Sequence[int], p: int) -> H11Vector:
    """Boundary restriction: omega_A maps to omega at A with the mark outside B
    replaced by p when at most one is outside, and to zero otherwise.

    Authoritative generator route: straighten v (raising NotInSpanError when v
    is outside the omega span), map the generators, re-expand.
    """
    Bset = set(B)
    if not Bset <= set(v.alphabet):
        raise ValueError("B is not a subset of the alphabet")
    if len(Bset) < 10:
        raise ValueError("B needs at least 10 marks")
    if p in set(v.alphabet) or p in Bset:
        raise ValueError("p must be a fresh mark")
    target_alphabet = tuple(sorted(Bset | {p}))
    coeffs = specht.express_in_generators(v)
    if coeffs is specht.NOT_IN_SPAN:
        raise NotInSpanError("vector outside the omega span")
    gens = specht.standard_generators(v.alphabet) if len(v.alphabet) >= 11 else []
    acc: dict[frozenset, Fraction] = {}
    for c, A in zip(coeffs, gens):
        if not c:
            continue
        outside = [a for a in A if a not in Bset]
        if len(outside) > 1:
            continue
        eps = tuple(p if a not in Bset else a for a in A)
        for key, sign in specht.omega_terms(eps):
            s = acc.get(key, Fraction(0)) + c * sign
            if s:
                acc[key] = s
            elif key in acc:
                del acc[key]
    return H11Vector(target_alphabet, acc)


def res_coordinatewise(v: H11Vector, B: Sequence[int], p: int) -> H11Vector:
    """Coordinate-level fast path for `res`; agrees with it on the omega span.

    Keeps coordinates inside B, transports coordinates with one mark outside B
    to the subset with that mark replaced by p (with the resorting sign), and
    kills the rest.
    """
    Bset = set(B)
    if not Bset <= set(v.alphabet):
        raise ValueError("B is not a subset of the alphabet")
    if p in set(v.alphabet):
        raise ValueError("p must be a fresh mark")
    target_alphabet = tuple(sorted(Bset | {p}))
    acc: dict[frozenset, Fraction] = {}
    for key, val in v.coeffs.items():
        outside = [m for m in key if m not in Bset]
        if len(outside) == 0:
            fs = key
            sign = 1
        elif len(outside) == 1:
            i = outside[0]
            src = sorted(key)
            a = src.index(i)
            rest = [m for m in src if m != i]
            b = sum(1 for m in rest if m < p)
            sign = -1 if (a + b) % 2 else 1
            fs = frozenset(rest) | {p}
        else:
            continue
        s = acc.get(fs, Fraction(0)) + sign * val
        if s:
            acc[fs] = s
        elif fs in acc:
            del acc[fs]
    return H11Vector(target_alphabet, acc)


def _merged_vertex_pullback(G2: StableGraph, e: int,
                            emap: Sequence[int], phi_summand: Summand,
                            basis2: GraphH11Basis) -> list[list[tuple[int, int]]]:
    """Columns of the pullback block for the vertex split by un-contracting e."""
    a, b = G2.edges[e]
    u = a if G2.genera[a] == 1 else b
    if G2.genera[u] != 1:
        # merged vertex has genus 1 but neither side does: impossible
        raise AssertionError("merged genus-1 vertex without a genus-1 side")
    target = basis2.summand_of_vertex(u)
    # mark translation on the merged alphabet: legs keep their names, node
    # marks follow the edge correspondence; marks on the far side leave B
    translate: dict[int, int] = {}
    B_marks = set()
    u_legs = set(G2.vertex_legs(u))
    for m in phi_summand.alphabet:
        if specht.mark_is_node(m):
            k, s = specht.mark_edge_side(m)
            old_e = emap[k]
            oa, ob = G2.edges[old_e]
            side_vertex = (oa, ob)[s]
            if side_vertex == u:
                translate[m] = mark_node(old_e, s)
                B_marks.add(m)
        else:
            if m in u_legs:
                translate[m] = m
                B_marks.add(m)
    side_u = 0 if G2.edges[e][0] == u else 1
    p_mark = mark_node(e, side_u)
    cols: list[list[tuple[int, int]]] = []
    if target is None:
        return [[] for _ in phi_summand.generators]
    tgt_index = basis2.gen_index(target)
    lead = target.alphabet[0]
    for A in phi_summand.generators:
        outside = [m for m in A if m not in B_marks]
        if len(outside) > 1:
            cols.append([])
            continue
        eps = tuple(translate[m] if m in B_marks else p_mark for m in A)
        cols.append(specht.express_omega_signed(eps, lead, tgt_index))
    return cols


def _unsplit_vertex_pullback(G2: StableGraph, emap: Sequence[int],
                             old_vertex: int, phi_summand: Summand,
                             basis2: GraphH11Basis) -> list[list[tuple[int, int]]]:
    """Columns for a vertex untouched by the un-contraction: signed relabeling."""
    target = basis2.summand_of_vertex(old_vertex)
    if target is None:
        return [[] for _ in phi_summand.generators]
    translate: dict[int, int] = {}
    for m in phi_summand.alphabet:
        if specht.mark_is_node(m):
            k, s = specht.mark_edge_side(m)
            translate[m] = mark_node(emap[k], s)
        else:
            translate[m] = m
    tgt_index = basis2.gen_index(target)
    lead = target.alphabet[0]
    cols = []
    for A in phi_summand.generators:
        eps = tuple(translate[m] for m in A)
        cols.append(specht.express_omega_signed(eps, lead, tgt_index))
    return cols


def pullback_columns(G2: StableGraph, e: int, ledger: LedgerLike | None,
                     basis2: GraphH11Basis | None = None
                     ) -> tuple[GraphH11Basis, GraphH11Basis, list[list[tuple[int, int]]]]:
    """Sparse columns of the pullback along contracting edge e of G2.

    Returns (phi_basis, G2_basis, columns); columns[j] lists (row, +/-1) for
    the j-th flat generator of the contracted graph.
    """
    phi, vmap, emap = contract_edge(G2, e)
    basisP = graph_basis(phi, ledger)
    if basis2 is None:
        basis2 = graph_basis(G2, ledger)
    a, b = G2.edges[e]
    is_loop = a == b
    merged = vmap[a] if not is_loop else None
    bumped = vmap[a] if is_loop else None
    cols: list[list[tuple[int, int]]] = []
    for s in basisP.summands:
        if not is_loop and s.vertex == merged:
            cols.extend(_merged_vertex_pullback(G2, e, emap, s, basis2))
        elif is_loop and s.vertex == bumped:
            # genus dropped on un-contraction: genus-0 vertex, no target summand
            cols.extend([[] for _ in s.generators])
        else:
            old_vertex = vmap.index(s.vertex)
            cols.extend(_unsplit_vertex_pullback(G2, emap, old_vertex, s, basis2))
    return basisP, basis2, cols


def contraction_pullback(G2: StableGraph, e: int,
                         ledger: LedgerLike | None = None) -> ratlin.SparseMat:
    """Matrix of the pullback from the contracted graph's basis to G2's basis."""
    basisP, basis2, cols = pullback_columns(G2, e, ledger)
    triplets = []
    for j, col in enumerate(cols):
        for i, sign in col:
            triplets.append((i, j, Fraction(sign)))
    return ratlin.SparseMat(basis2.labels(), basisP.labels(), triplets)


def signed_action(G: StableGraph, basis: GraphH11Basis) -> ratlin.SignedAction:
    """Aut(G) acting on the flat generator basis, with the det-edge character."""
    autos = automorphisms(G)
    labels = basis.labels()
    elements = []
    character = []
    for iso in autos:
        hed = iso.half_edge_dict()
        triplets = []
        for s in basis.summands:
            w = iso.vertex_map[s.vertex]
            t = basis.summand_of_vertex(w)
            if t is None:
                raise AssertionError("automorphism image lost a summand")
            translate = {}
            for m in s.alphabet:
                if specht.mark_is_node(m):
                    k, sd = specht.mark_edge_side(m)
                    ke, ks = hed[(k, sd)]
                    translate[m] = mark_node(ke, ks)
                else:
                    translate[m] = m
            t_index = {g: i for i, g in enumerate(t.generators)}
            for j, A in enumerate(s.generators):
                img = tuple(translate[m] for m in A)
                sgn = specht.perm_sign(img)
                key = tuple(sorted(img))
                if key not in t_index:
                    raise AssertionError("generator image is not standard")
                triplets.append((t.offset + t_index[key], s.offset + j, Fraction(sgn)))
        elements.append(ratlin.SparseMat(labels, labels, triplets))
        character.append(det_edge_character(G, iso))
    return ratlin.SignedAction(elements, character)


def twisted_invariants(G: StableGraph, ledger: LedgerLike | None = None,
                       basis: GraphH11Basis | None = None) -> list[dict[int, Fraction]]:
    """Basis of the det-edge-twisted Aut-invariant subspace, as sparse vectors
    over the flat generator basis."""
    if basis is None:
        basis = graph_basis(G, ledger)
    if basis.total_dim == 0:
        return []
    action = signed_action(G, basis)
    vecs = ratlin.invariant_basis(action)
    dim_check = twisted_dim(G, ledger, basis)
    if len(vecs) != dim_check:
        raise AssertionError(
            f"invariant basis size {len(vecs)} != character dimension {dim_check}")
    return vecs


def twisted_dim(G: StableGraph, ledger: LedgerLike | None = None,
                basis: GraphH11Basis | None = None) -> int:
    """Dimension of the twisted invariants by character averaging (no basis)."""
    if basis is None:
        basis = graph_basis(G, ledger)
    if basis.total_dim == 0:
        return 0
    autos = automorphisms(G)
    total = 0
    for iso in autos:
        hed = iso.half_edge_dict()
        chi = det_edge_character(G, iso)
        tr = 0
        for s in basis.summands:
            w = iso.vertex_map[s.vertex]
            if w != s.vertex:
                continue
            translate = {}
            for m in s.alphabet:
                if specht.mark_is_node(m):
                    k, sd = specht.mark_edge_side(m)
                    ke, ks = hed[(k, sd)]
                    translate[m] = mark_node(ke, ks)
                else:
                    translate[m] = m
            for A in s.generators:
                img = tuple(translate[m] for m in A)
                if set(img) == set(A):
                    tr += specht.perm_sign(img)
        total += chi * tr
    q, r = divmod(total, len(autos))
    if r:
        raise AssertionError("character average is not integral")
    return q
