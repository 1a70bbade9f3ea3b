"""Partition representation and structural predicates: simple connectivity,
balance classification, district neighborhoods, cut and exposed vertices,
tricolor triangles, rebalance-case dispatch, and ground-state construction.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .lattice import OUTSIDE, TriRegion, Vertex

Targets = tuple[int, int, int]
DISTRICTS = (1, 2, 3)


class BalanceClass(enum.Enum):
    BALANCED = "balanced"
    NEARLY_BALANCED = "nearly_balanced"
    OUTSIDE_OMEGA = "outside_omega"


def connected_components(
    region: TriRegion, vset: frozenset[Vertex] | set[Vertex]
) -> list[frozenset[Vertex]]:
    """Connected components of the subgraph induced by vset."""
    remaining = set(vset)
    comps = []
    while remaining:
        root = next(iter(remaining))
        seen = {root}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u in region.neighbors(v):
                if u in remaining and u not in seen:
                    seen.add(u)
                    queue.append(u)
        comps.append(frozenset(seen))
        remaining -= seen
    return comps


def component_of(
    region: TriRegion, vset: Iterable[Vertex], v: Vertex
) -> frozenset[Vertex]:
    """The connected component of v inside vset (v must be in vset)."""
    vset = set(vset)
    assert v in vset
    seen = {v}
    queue = deque([v])
    while queue:
        w = queue.popleft()
        for u in region.neighbors(w):
            if u in vset and u not in seen:
                seen.add(u)
                queue.append(u)
    return frozenset(seen)


def is_connected(region: TriRegion, vset: Iterable[Vertex]) -> bool:
    vset = set(vset)
    if not vset:
        return False
    return len(component_of(region, vset, next(iter(vset)))) == len(vset)


def is_simply_connected(region: TriRegion, vset: Iterable[Vertex]) -> bool:
    """True iff vset is nonempty, connected, and encloses no complement
    vertex: every complement component must reach the region boundary (all
    boundary-touching components merge through the exterior)."""
    vset = set(vset)
    if not vset or not is_connected(region, vset):
        return False
    complement = set(region.vertices) - vset
    for comp in connected_components(region, complement):
        if not (comp & region.boundary):
            return False
    return True


class Partition:
    """An assignment of every region vertex to district 1, 2, or 3, with size
    targets.  Immutable; mutating operations return new values."""

    __slots__ = ("region", "targets", "labels", "_districts", "_hash")

    def __init__(self, region: TriRegion, targets: Targets, labels: tuple[int, ...]):
        if len(labels) != region.num_vertices:
            raise ValueError("label array length mismatch")
        if sum(targets) != region.num_vertices:
            raise ValueError("targets must sum to the vertex count")
        self.region = region
        self.targets = tuple(targets)
        self.labels = tuple(labels)
        self._districts: Optional[tuple[frozenset, ...]] = None
        self._hash: Optional[int] = None

    def district(self, v: Vertex) -> int:
        return self.labels[self.region.index_of[v]]

    def districts(self) -> tuple[frozenset[Vertex], ...]:
        """(P1, P2, P3) as frozensets."""
        if self._districts is None:
            sets: tuple[set, set, set] = (set(), set(), set())
            for v, lab in zip(self.region.vertices, self.labels):
                sets[lab - 1].add(v)
            self._districts = tuple(frozenset(s) for s in sets)
        return self._districts

    def district_set(self, d: int) -> frozenset[Vertex]:
        return self.districts()[d - 1]

    def sizes(self) -> tuple[int, int, int]:
        return tuple(len(s) for s in self.districts())

    def with_moves(self, moves: Iterable[tuple[Vertex, int]]) -> "Partition":
        """New partition with the given (vertex, new district) reassignments."""
        labels = list(self.labels)
        for v, d in moves:
            labels[self.region.index_of[v]] = d
        return Partition(self.region, self.targets, tuple(labels))

    def with_labels(self, labels: tuple[int, ...]) -> "Partition":
        return Partition(self.region, self.targets, labels)

    def relabeled(self, perm: dict[int, int]) -> "Partition":
        """Apply a district relabeling: old label d becomes perm[d].  Targets
        move with their districts."""
        labels = tuple(perm[d] for d in self.labels)
        targets = [0, 0, 0]
        for d in DISTRICTS:
            targets[perm[d] - 1] = self.targets[d - 1]
        return Partition(self.region, tuple(targets), labels)

    def reflected(self) -> "Partition":
        """The mirror image under the column-fixing reflection."""
        region = self.region
        labels = [0] * region.num_vertices
        for v, lab in zip(region.vertices, self.labels):
            labels[region.index_of[region.reflect(v)]] = lab
        return Partition(region, self.targets, tuple(labels))

    def rotated(self, turns: int = 1) -> "Partition":
        """The image under `turns` third-of-a-turn rotations."""
        region = self.region
        labels = list(self.labels)
        for _ in range(turns % 3):
            out = [0] * region.num_vertices
            for v in region.vertices:
                out[region.index_of[region.rotate(v)]] = labels[
                    region.index_of[v]
                ]
            labels = out
        return Partition(region, self.targets, tuple(labels))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Partition)
            and self.region is other.region
            and self.targets == other.targets
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.region.n, self.targets, self.labels))
        return self._hash

    def __repr__(self) -> str:
        return f"Partition(n={self.region.n}, sizes={self.sizes()})"


# -- predicates -------------------------------------------------------------


def is_valid(p: Partition) -> bool:
    """All three districts nonempty and simply connected."""
    return all(is_simply_connected(p.region, s) for s in p.districts())


def classify(p: Partition) -> BalanceClass:
    """Balance classification; OUTSIDE_OMEGA on any validity or size-window
    violation."""
    sizes = p.sizes()
    if any(abs(sz - k) > 1 for sz, k in zip(sizes, p.targets)):
        return BalanceClass.OUTSIDE_OMEGA
    if not is_valid(p):
        return BalanceClass.OUTSIDE_OMEGA
    if sizes == p.targets:
        return BalanceClass.BALANCED
    return BalanceClass.NEARLY_BALANCED


def in_omega(p: Partition) -> bool:
    return classify(p) is not BalanceClass.OUTSIDE_OMEGA


def d_neighborhood(
    p: Partition, v: Vertex, d: int
) -> tuple[frozenset[Vertex], bool]:
    """(N(v) in district d, whether that set is one contiguous arc of the
    6-slot cycle).  The empty set is vacuously connected."""
    slots = p.region.neighbors_cyclic(v)
    hits = [u is not OUTSIDE and p.district(u) == d for u in slots]
    members = frozenset(u for u, h in zip(slots, hits) if h)
    # count cyclic blocks of consecutive hits
    blocks = sum(
        1 for i in range(6) if hits[i] and not hits[(i - 1) % 6]
    )
    return members, blocks <= 1


def own_neighborhood_connected(p: Partition, v: Vertex) -> bool:
    return d_neighborhood(p, v, p.district(v))[1]


def is_cut_vertex(p: Partition, v: Vertex) -> bool:
    """True iff removing v disconnects its district, equivalently its
    own-district neighborhood is not one contiguous arc."""
    return not own_neighborhood_connected(p, v)


def exposed_vertices(p: Partition, d: int) -> frozenset[Vertex]:
    """Vertices of district d adjacent to a different district."""
    out = set()
    for v in p.district_set(d):
        for u in p.region.neighbors(v):
            if p.district(u) != d:
                out.add(v)
                break
    return frozenset(out)


def is_exposed(p: Partition, v: Vertex) -> bool:
    d = p.district(v)
    return any(p.district(u) != d for u in p.region.neighbors(v))


@dataclass(frozen=True)
class TricolorTriangle:
    """A lattice face whose three vertices lie in three districts.  Vertices
    are stored in clockwise face order; chirality is 'cw' when the district
    labels 1, 2, 3 appear clockwise around the face."""

    vertices: tuple[Vertex, Vertex, Vertex]
    chirality: str

    def vertex_in(self, p: Partition, d: int) -> Vertex:
        for v in self.vertices:
            if p.district(v) == d:
                return v
        raise ValueError(f"no vertex of district {d} on the face")


def tricolor_triangles(p: Partition) -> list[TricolorTriangle]:
    out = []
    for face in p.region.faces:
        labs = tuple(p.district(v) for v in face)
        if len(set(labs)) == 3:
            # rotate so district 1 comes first, read the clockwise order
            i = labs.index(1)
            cw = labs[i:] + labs[:i]
            chir = "cw" if cw == (1, 2, 3) else "ccw"
            out.append(TricolorTriangle(face, chir))
    return out


def districts_adjacent(p: Partition, d1: int, d2: int) -> bool:
    s2 = p.district_set(d2)
    return any(
        u in s2 for v in p.district_set(d1) for u in p.region.neighbors(v)
    )


def case_dispatch(p: Partition) -> str:
    """Which rebalance case applies, for a valid partition whose district 1
    contains corner (1, 1): 'A' adjacent boundary pair of districts 2 and 3;
    'B' district 2 interior; 'C' district 3 interior; 'D' districts 2 and 3
    not adjacent.  Exactly one holds."""
    bd = p.region.boundary
    p2b = p.district_set(2) & bd
    p3b = p.district_set(3) & bd
    case_a = any(
        u in p3b for v in p2b for u in p.region.neighbors(v)
    )
    case_b = not p2b
    case_c = not p3b
    case_d = not districts_adjacent(p, 2, 3)
    flags = [case_a, case_b, case_c, case_d]
    assert sum(flags) == 1, (
        f"case dispatch expects exactly one case, got {flags} for {p!r}"
    )
    return "ABCD"[flags.index(True)]


def ground_state(region: TriRegion, targets: Targets, perm: tuple[int, int, int]) -> Partition:
    """The block partition: the first k_{perm[0]} vertices in left-to-right,
    top-to-bottom order get district perm[0], the next block perm[1], the
    rest perm[2].  Requires every target >= n."""
    if sorted(perm) != [1, 2, 3]:
        raise ValueError(f"perm must be a permutation of (1, 2, 3), got {perm}")
    if any(k < region.n for k in targets):
        raise ValueError("ground states require every target >= n")
    labels = []
    for d in perm:
        labels.extend([d] * targets[d - 1])
    return Partition(region, targets, tuple(labels))


def ground_states(region: TriRegion, targets: Targets) -> dict[tuple[int, int, int], Partition]:
    import itertools

    return {
        perm: ground_state(region, targets, perm)
        for perm in itertools.permutations((1, 2, 3))
    }
