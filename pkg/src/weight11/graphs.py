"""Stable graphs: enumeration, canonical forms, contraction, automorphisms.

A stable graph carries vertex genera, labeled legs attached to vertices, and
edges given as ordered endpoint pairs; half-edge (e, s) sits at
`edges[e][s]`.  Legs are fixed pointwise by isomorphisms (marked points are
labeled), so only vertices and half-edges may move.

Supported regimes: at most two edges (boundary strata of codimension <= 2)
and genus-0 stable trees of any size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, permutations, product
from typing import Iterable, Iterator, Sequence

from .specht import mark_node


@dataclass(frozen=True)
class StableGraph:
    genera: tuple[int, ...]
    leg_to_vertex: tuple[int, ...]  # entry i is the vertex of leg i+1
    edges: tuple[tuple[int, int], ...]

    @property
    def num_vertices(self) -> int:
        return len(self.genera)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return len(self.leg_to_vertex)

    def vertex_legs(self, v: int) -> tuple[int, ...]:
        return tuple(i + 1 for i, w in enumerate(self.leg_to_vertex) if w == v)

    def vertex_half_edges(self, v: int) -> tuple[tuple[int, int], ...]:
        out = []
        for e, (a, b) in enumerate(self.edges):
            if a == v:
                out.append((e, 0))
            if b == v:
                out.append((e, 1))
        return tuple(out)

    def vertex_marks(self, v: int) -> tuple[int, ...]:
        """Sorted marking alphabet of a vertex: legs then node marks."""
        marks = list(self.vertex_legs(v))
        marks.extend(mark_node(e, s) for e, s in self.vertex_half_edges(v))
        return tuple(sorted(marks))

    def n_v(self, v: int) -> int:
        return len(self.vertex_legs(v)) + len(self.vertex_half_edges(v))

    @property
    def genus(self) -> int:
        betti = self.num_edges - self.num_vertices + 1
        return sum(self.genera) + betti

    def is_connected(self) -> bool:
        if self.num_vertices == 0:
            return False
        seen = {0}
        stack = [0]
        adj: dict[int, set[int]] = {v: set() for v in range(self.num_vertices)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.num_vertices

    def is_stable(self) -> bool:
        return all(2 * self.genera[v] - 2 + self.n_v(v) > 0
                   for v in range(self.num_vertices))

    def validate(self) -> None:
        for a, b in self.edges:
            if not (0 <= a < self.num_vertices and 0 <= b < self.num_vertices):
                raise ValueError("edge endpoint out of range")
        for w in self.leg_to_vertex:
            if not 0 <= w < self.num_vertices:
                raise ValueError("leg attachment out of range")
        if any(g < 0 for g in self.genera):
            raise ValueError("negative genus label")
        if not self.is_connected():
            raise ValueError("graph not connected")
        if not self.is_stable():
            raise ValueError("graph not stable")

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(self.genera),
            "legs": {str(i + 1): v for i, v in enumerate(self.leg_to_vertex)},
            "edges": [[[a, 2 * e], [b, 2 * e + 1]] for e, (a, b) in enumerate(self.edges)],
            "canonical_key": canonical_key(self),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "StableGraph":
        genera = tuple(d["vertices"])
        legs = [0] * len(d["legs"])
        for k, v in d["legs"].items():
            legs[int(k) - 1] = v
        edges = tuple((pair[0][0], pair[1][0]) for pair in d["edges"])
        return cls(genera, tuple(legs), edges)


@dataclass(frozen=True)
class GraphIso:
    """Isomorphism data: vertex images and half-edge images (e,s) -> (e',s')."""

    vertex_map: tuple[int, ...]
    half_edge_map: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def half_edge_dict(self) -> dict[tuple[int, int], tuple[int, int]]:
        return dict(self.half_edge_map)

    def edge_perm(self, num_edges: int) -> list[int]:
        he = self.half_edge_dict()
        return [he[(e, 0)][0] for e in range(num_edges)]


def stable_type(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


def _vertex_classes(G: StableGraph) -> list[int]:
    """Vertex partition labels refined by genus, legs, and neighborhood."""
    inv = [(G.genera[v], G.vertex_legs(v), G.n_v(v)) for v in range(G.num_vertices)]
    for _ in range(2):
        nbr = [[] for _ in range(G.num_vertices)]
        for a, b in G.edges:
            nbr[a].append(inv[b])
            nbr[b].append(inv[a])
        inv = [(inv[v], tuple(sorted(map(repr, nbr[v])))) for v in range(G.num_vertices)]
    order = sorted(range(G.num_vertices),
                   key=lambda v: (-G.genera[v], repr(inv[v])))
    label = {}
    out = [0] * G.num_vertices
    for pos, v in enumerate(order):
        key = (-G.genera[v], repr(inv[v]))
        if key not in label:
            label[key] = len(label)
        out[v] = label[key]
    return out


def _candidate_orders(G: StableGraph) -> Iterator[tuple[int, ...]]:
    """Vertex relabelings compatible with the refined invariant classes."""
    classes = _vertex_classes(G)
    buckets: dict[int, list[int]] = {}
    for v, c in enumerate(classes):
        buckets.setdefault(c, []).append(v)
    ordered = [buckets[c] for c in sorted(buckets)]
    for combo in product(*(permutations(b) for b in ordered)):
        seq: list[int] = []
        for part in combo:
            seq.extend(part)
        # seq[new] = old; invert to pi[old] = new
        pi = [0] * G.num_vertices
        for new, old in enumerate(seq):
            pi[old] = new
        yield tuple(pi)


def _encode(G: StableGraph, pi: Sequence[int]):
    genera = [0] * G.num_vertices
    for old, new in enumerate(pi):
        genera[new] = G.genera[old]
    legs = tuple(pi[v] for v in G.leg_to_vertex)
    pairs = []
    for e, (a, b) in enumerate(G.edges):
        x, y = pi[a], pi[b]
        pairs.append(((min(x, y), max(x, y)), e))
    pairs.sort()
    return (tuple(genera), legs, tuple(p for p, _ in pairs)), pairs


def canonicalize(G: StableGraph) -> tuple[StableGraph, GraphIso]:
    """Canonical representative plus the isomorphism from G onto it."""
    best = None
    best_pi = None
    best_pairs = None
    for pi in _candidate_orders(G):
        enc, pairs = _encode(G, pi)
        if best is None or enc < best:
            best, best_pi, best_pairs = enc, pi, pairs
    genera, legs, pair_keys = best
    pi = best_pi
    hmap = []
    edges = []
    for new_e, ((x, y), old_e) in enumerate(best_pairs):
        a, b = G.edges[old_e]
        if x == y:  # loop: keep stored side order
            edges.append((x, y))
            hmap.append((((old_e, 0), (new_e, 0))))
            hmap.append((((old_e, 1), (new_e, 1))))
        else:
            edges.append((x, y))
            if pi[a] == x:
                hmap.append(((old_e, 0), (new_e, 0)))
                hmap.append(((old_e, 1), (new_e, 1)))
            else:
                hmap.append(((old_e, 0), (new_e, 1)))
                hmap.append(((old_e, 1), (new_e, 0)))
    canon = StableGraph(genera, legs, tuple(edges))
    iso = GraphIso(tuple(pi), tuple(sorted(hmap)))
    return canon, iso


def _format_key(canon: StableGraph) -> str:
    v = ",".join(map(str, canon.genera))
    l = ",".join(map(str, canon.leg_to_vertex))
    e = ",".join(f"{a}-{b}" for a, b in canon.edges)
    return f"v={v};l={l};e={e}"


def canonical_key(G: StableGraph) -> str:
    return _format_key(canonicalize(G)[0])


def _dedupe_sorted(graphs: Iterable[StableGraph]) -> list[StableGraph]:
    by_key: dict[str, StableGraph] = {}
    for G in graphs:
        canon, _ = canonicalize(G)
        key = _format_key(canon)
        if key not in by_key:
            by_key[key] = canon
    return [by_key[k] for k in sorted(by_key)]


def _split_graph(g1: int, legs1: Sequence[int], g2: int, legs2: Sequence[int],
                 n: int) -> StableGraph | None:
    """Two vertices joined by one edge; side 0 on the first vertex."""
    leg_map = [0] * n
    for leg in legs2:
        leg_map[leg - 1] = 1
    G = StableGraph((g1, g2), tuple(leg_map), ((0, 1),))
    return G if G.is_stable() else None


def enumerate_one_edge(g: int, n: int) -> list[StableGraph]:
    """All isomorphism classes of stable (g,n) graphs with exactly one edge."""
    if not stable_type(g, n):
        raise ValueError(f"({g},{n}) is not stable")
    legs = tuple(range(1, n + 1))
    found: list[StableGraph] = []
    if g >= 1:
        loop = StableGraph((g - 1,), (0,) * n, ((0, 0),))
        if loop.is_stable():
            found.append(loop)
    for g1 in range(g + 1):
        g2 = g - g1
        for k in range(n + 1):
            for A in combinations(legs, k):
                rest = tuple(x for x in legs if x not in A)
                G = _split_graph(g1, A, g2, rest, n)
                if G is not None:
                    found.append(G)
    return _dedupe_sorted(found)


def _two_edge_candidates(g: int, n: int) -> Iterator[StableGraph]:
    legs = tuple(range(1, n + 1))
    # one vertex, two loops
    if g >= 2:
        yield StableGraph((g - 2,), (0,) * n, ((0, 0), (0, 0)))
    # two vertices: loop at vertex 0 plus a bridge, or a double edge
    for gu in range(g):
        gv = g - 1 - gu
        if gv < 0:
            continue
        for k in range(n + 1):
            for A in combinations(legs, k):
                leg_map = [1] * n
                for leg in A:
                    leg_map[leg - 1] = 0
                yield StableGraph((gu, gv), tuple(leg_map), ((0, 0), (0, 1)))
                yield StableGraph((gu, gv), tuple(leg_map), ((0, 1), (0, 1)))
    # three-vertex chain, middle vertex index 1
    for ga in range(g + 1):
        for gb in range(g + 1 - ga):
            gc = g - ga - gb
            for assign in product((0, 1, 2), repeat=n):
                yield StableGraph((ga, gb, gc), assign, ((0, 1), (1, 2)))


def enumerate_two_edge(g: int, n: int) -> list[StableGraph]:
    """All isomorphism classes of stable (g,n) graphs with exactly two edges.

    Brute force over the five two-edge topologies; intended for small n.
    """
    if not stable_type(g, n):
        raise ValueError(f"({g},{n}) is not stable")
    return _dedupe_sorted(G for G in _two_edge_candidates(g, n)
                          if G.is_stable() and G.is_connected())


def enumerate_two_edge_support(g: int, n: int, min_marks: int = 11) -> list[StableGraph]:
    """Two-edge classes owning a genus-1 vertex with at least `min_marks` marks.

    Direct construction per topology: these are the only classes that can
    carry a nonzero weight-11 summand.  Checked against the full enumeration
    on small (g,n) in the test suite.
    """
    if not stable_type(g, n):
        raise ValueError(f"({g},{n}) is not stable")
    legs = tuple(range(1, n + 1))
    out: list[StableGraph] = []

    def consider(G: StableGraph):
        if G.is_stable() and G.is_connected():
            out.append(G)

    # one vertex with two loops
    if g - 2 == 1 and n + 4 >= min_marks:
        consider(StableGraph((1,), (0,) * n, ((0, 0), (0, 0))))
    # loop at u plus bridge u-v
    for gu in range(g):
        gv = g - 1 - gu
        if gv < 0:
            continue
        if gu == 1:
            lo = max(0, min_marks - 3)
            for k in range(lo, n + 1):
                for A in combinations(legs, k):
                    leg_map = [1] * n
                    for leg in A:
                        leg_map[leg - 1] = 0
                    consider(StableGraph((gu, gv), tuple(leg_map), ((0, 0), (0, 1))))
        if gv == 1:
            hi = n - max(0, min_marks - 1)
            for k in range(0, hi + 1):
                for A in combinations(legs, k):
                    leg_map = [1] * n
                    for leg in A:
                        leg_map[leg - 1] = 0
                    consider(StableGraph((gu, gv), tuple(leg_map), ((0, 0), (0, 1))))
    # double edge: put the big genus-1 vertex first
    for gu in range(g):
        gv = g - 1 - gu
        if gv < 0 or gu != 1:
            continue
        lo = max(0, min_marks - 2)
        for k in range(lo, n + 1):
            for A in combinations(legs, k):
                leg_map = [1] * n
                for leg in A:
                    leg_map[leg - 1] = 0
                consider(StableGraph((gu, gv), tuple(leg_map), ((0, 1), (0, 1))))
    # chain u - w - v (middle index 1): big genus-1 end or big genus-1 middle
    for ga in range(g + 1):
        for gb in range(g + 1 - ga):
            gc = g - ga - gb
            # big end (vertex 0)
            if ga == 1:
                lo = max(0, min_marks - 1)
                for k in range(lo, n + 1):
                    for A in combinations(legs, k):
                        rest = [x for x in legs if x not in A]
                        for sub in product((1, 2), repeat=len(rest)):
                            assign = [0] * n
                            for leg, w in zip(rest, sub):
                                assign[leg - 1] = w
                            consider(StableGraph((ga, gb, gc), tuple(assign),
                                                 ((0, 1), (1, 2))))
            # big middle (vertex 1)
            if gb == 1:
                lo = max(0, min_marks - 2)
                for k in range(lo, n + 1):
                    for A in combinations(legs, k):
                        rest = [x for x in legs if x not in A]
                        for sub in product((0, 2), repeat=len(rest)):
                            assign = [1] * n
                            for leg, w in zip(rest, sub):
                                assign[leg - 1] = w
                            consider(StableGraph((ga, gb, gc), tuple(assign),
                                                 ((0, 1), (1, 2))))
    return _dedupe_sorted(out)


def one_edge_vertex_types(g: int, n: int) -> set[tuple[int, int]]:
    """Realizable (genus, marks) vertex decorations in one-edge (g,n) graphs."""
    types = set()
    if g >= 1 and stable_type(g - 1, n + 2):
        types.add((g - 1, n + 2))
    for g1 in range(g + 1):
        g2 = g - g1
        for k in range(n + 1):
            if (2 * g1 - 2 + k + 1 > 0) and (2 * g2 - 2 + (n - k) + 1 > 0):
                types.add((g1, k + 1))
                types.add((g2, n - k + 1))
    return types


def two_edge_vertex_types(g: int, n: int) -> set[tuple[int, int]]:
    """Realizable (genus, marks) vertex decorations in two-edge (g,n) graphs."""
    types = set()
    if g >= 2 and 2 * (g - 2) - 2 + n + 4 > 0:
        types.add((g - 2, n + 4))
    for gu in range(g):
        gv = g - 1 - gu
        if gv < 0:
            continue
        for k in range(n + 1):
            # loop at u plus bridge
            if (2 * gu - 2 + k + 3 > 0) and (2 * gv - 2 + (n - k) + 1 > 0):
                types.add((gu, k + 3))
                types.add((gv, n - k + 1))
            # double edge
            if (2 * gu - 2 + k + 2 > 0) and (2 * gv - 2 + (n - k) + 2 > 0):
                types.add((gu, k + 2))
                types.add((gv, n - k + 2))
    for ga in range(g + 1):
        for gb in range(g + 1 - ga):
            gc = g - ga - gb
            for ka in range(n + 1):
                for kb in range(n - ka + 1):
                    kc = n - ka - kb
                    if (2 * ga - 2 + ka + 1 > 0 and 2 * gb - 2 + kb + 2 > 0
                            and 2 * gc - 2 + kc + 1 > 0):
                        types.add((ga, ka + 1))
                        types.add((gb, kb + 2))
                        types.add((gc, kc + 1))
    return types


def contract_edge(G: StableGraph, e: int) -> tuple[StableGraph, tuple[int, ...], tuple[int, ...]]:
    """Contract edge e.

    Returns (graph, vertex_map, edge_map): vertex_map[old_vertex] is the new
    index, edge_map[new_edge] the old edge index.  A loop contraction bumps
    its vertex genus; a bridge contraction merges endpoints and adds genera.
    """
    a, b = G.edges[e]
    if a == b:
        genera = list(G.genera)
        genera[a] += 1
        vmap = tuple(range(G.num_vertices))
        new_edges = []
        emap = []
        for k, pair in enumerate(G.edges):
            if k == e:
                continue
            new_edges.append(pair)
            emap.append(k)
        return StableGraph(tuple(genera), G.leg_to_vertex, tuple(new_edges)), vmap, tuple(emap)
    lo, hi = (a, b) if a < b else (b, a)
    vmap_list = []
    for v in range(G.num_vertices):
        if v == hi:
            vmap_list.append(lo)
        elif v > hi:
            vmap_list.append(v - 1)
        else:
            vmap_list.append(v)
    genera = []
    for v in range(G.num_vertices):
        if v == hi:
            continue
        if v == lo:
            genera.append(G.genera[lo] + G.genera[hi])
        else:
            genera.append(G.genera[v])
    legs = tuple(vmap_list[v] for v in G.leg_to_vertex)
    new_edges = []
    emap = []
    for k, (x, y) in enumerate(G.edges):
        if k == e:
            continue
        new_edges.append((vmap_list[x], vmap_list[y]))
        emap.append(k)
    return StableGraph(tuple(genera), legs, tuple(new_edges)), tuple(vmap_list), tuple(emap)


def _leg_compatible_vertex_maps(G: StableGraph) -> Iterator[tuple[int, ...]]:
    """Vertex bijections preserving genus, legs pointwise, and adjacency."""
    classes: dict[tuple, list[int]] = {}
    for v in range(G.num_vertices):
        classes.setdefault((G.genera[v], G.vertex_legs(v)), []).append(v)
    multiset = {}
    for a, b in G.edges:
        key = (min(a, b), max(a, b))
        multiset[key] = multiset.get(key, 0) + 1
    groups = list(classes.values())
    for combo in product(*(permutations(grp) for grp in groups)):
        vm = [0] * G.num_vertices
        for grp, image in zip(groups, combo):
            for src, dst in zip(grp, image):
                vm[src] = dst
        ok = True
        image_multiset: dict[tuple[int, int], int] = {}
        for (a, b), cnt in multiset.items():
            key = (min(vm[a], vm[b]), max(vm[a], vm[b]))
            image_multiset[key] = image_multiset.get(key, 0) + cnt
        if image_multiset == multiset:
            yield tuple(vm)


def _edge_assignments(G: StableGraph, vm: Sequence[int]) -> Iterator[dict]:
    """Half-edge bijections over a vertex map; loops allow a side swap."""
    by_pair: dict[tuple[int, int], list[int]] = {}
    for e, (a, b) in enumerate(G.edges):
        by_pair.setdefault((min(a, b), max(a, b)), []).append(e)
    slots = []
    for (a, b), es in sorted(by_pair.items()):
        target = (min(vm[a], vm[b]), max(vm[a], vm[b]))
        targets = by_pair.get(target)
        if targets is None or len(targets) != len(es):
            return
        slots.append((es, targets))
    for perm_choice in product(*(permutations(t) for _, t in slots)):
        # per edge: (source, image, kind) with kind loop / straight / flipped
        assigned: list[tuple[int, int, str]] = []
        ok = True
        for (es, _), images in zip(slots, perm_choice):
            for e_src, e_dst in zip(es, images):
                sa, sb = G.edges[e_src]
                ta, tb = G.edges[e_dst]
                if sa == sb:
                    if ta != vm[sa] or ta != tb:
                        ok = False
                        break
                    assigned.append((e_src, e_dst, "loop"))
                elif (vm[sa], vm[sb]) == (ta, tb):
                    assigned.append((e_src, e_dst, "straight"))
                elif (vm[sb], vm[sa]) == (ta, tb):
                    assigned.append((e_src, e_dst, "flipped"))
                else:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        loop_count = sum(1 for _, _, kind in assigned if kind == "loop")
        for flips in product((0, 1), repeat=loop_count):
            hmap = {}
            li = 0
            for e_src, e_dst, kind in assigned:
                if kind == "loop":
                    f = flips[li]
                    li += 1
                    hmap[(e_src, 0)] = (e_dst, f)
                    hmap[(e_src, 1)] = (e_dst, 1 - f)
                elif kind == "straight":
                    hmap[(e_src, 0)] = (e_dst, 0)
                    hmap[(e_src, 1)] = (e_dst, 1)
                else:
                    hmap[(e_src, 0)] = (e_dst, 1)
                    hmap[(e_src, 1)] = (e_dst, 0)
            yield hmap


def automorphisms(G: StableGraph) -> list[GraphIso]:
    """The full group of leg-fixing automorphisms; graphs with <= 2 edges only."""
    if G.num_edges > 2:
        raise ValueError("automorphism search supports at most two edges")
    return _automorphisms_any(G)


def _automorphisms_any(G: StableGraph) -> list[GraphIso]:
    out = []
    for vm in _leg_compatible_vertex_maps(G):
        for hmap in _edge_assignments(G, vm):
            iso = GraphIso(vm, tuple(sorted(hmap.items())))
            out.append(iso)
    return sorted(out, key=lambda i: (i.vertex_map, i.half_edge_map))


def tree_automorphism_count(G: StableGraph) -> int:
    """Number of leg-fixing automorphisms of a loopless multigraph-free tree.

    Half-edge images are forced by the vertex map here, so brute force over
    leg-compatible vertex maps suffices at any tree size we enumerate.
    """
    if any(a == b for a, b in G.edges):
        raise ValueError("not a tree: loop present")
    pairs = [(min(a, b), max(a, b)) for a, b in G.edges]
    if len(set(pairs)) != len(pairs):
        raise ValueError("not a tree: parallel edges present")
    if G.num_edges != G.num_vertices - 1:
        raise ValueError("not a tree")
    return sum(1 for _ in _leg_compatible_vertex_maps(G))


def det_edge_character(G: StableGraph, iso: GraphIso) -> int:
    """Sign of the edge permutation induced by an automorphism."""
    perm = iso.edge_perm(G.num_edges)
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _partitions_into_blocks(items: tuple, min_block: int = 2) -> Iterator[list[tuple]]:
    """Set partitions of `items` into any number of blocks of size >= min_block."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(min_block - 1, len(rest) + 1):
        for mates in combinations(rest, k):
            block = (first,) + mates
            remaining = tuple(x for x in rest if x not in mates)
            for sub in _partitions_into_blocks(remaining, min_block):
                yield [block] + sub


def _rooted_trees(marks: tuple, root_extra: int) -> Iterator[list]:
    """Stable genus-0 trees on `marks` plus `root_extra` half-edges at the root.

    Yields nested structures [legs_at_root, [branches...]] where each branch
    is again such a structure; the root needs root_extra + legs + branches >= 3.
    """
    items = tuple(sorted(marks))
    for k in range(len(items) + 1):
        for legs_here in combinations(items, k):
            rest = tuple(x for x in items if x not in legs_here)
            for blocks in _partitions_into_blocks(rest):
                if root_extra + len(legs_here) + len(blocks) < 3:
                    continue
                for combo in product(*(_rooted_trees(b, 1) for b in blocks)):
                    yield [list(legs_here), list(combo)]


def _tree_structure_to_graph(struct, n: int) -> StableGraph:
    vertices: list[int] = []
    legs = [0] * n
    edges: list[tuple[int, int]] = []

    def build(node) -> int:
        v = len(vertices)
        vertices.append(0)
        for leg in node[0]:
            legs[leg - 1] = v
        for child in node[1]:
            w = build(child)
            edges.append((v, w))
        return v

    build(struct)
    return StableGraph(tuple(vertices), tuple(legs), tuple(edges))


def enumerate_stable_trees(n: int) -> list[StableGraph]:
    """All genus-0 stable trees with n labeled legs, any number of edges.

    Rooting at the vertex carrying leg 1 makes the recursion produce each
    class exactly once.
    """
    if n < 3:
        raise ValueError("need at least three legs")
    out = []
    # leg 1 counts as one mark at the root, hence root_extra=1
    for struct in _rooted_trees(tuple(range(2, n + 1)), 1):
        struct[0] = [1] + struct[0]
        G = _tree_structure_to_graph(struct, n)
        if G.is_stable():
            out.append(G)
    canon = [canonicalize(G)[0] for G in out]
    canon.sort(key=_format_key)
    return canon
