"""Bump lattice geometry, potential-short adjacency, codeword coloring, and blocks.

The package I/O bumps sit on a rectangular or hexagonal (close-packed)
lattice.  Bumps that are close enough to short against each other form the
potential-short adjacency graph; a proper 4-coloring of that graph decides
which of the four test codewords each bump receives, and contiguous column
bands split the map into sequentially tested blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

from scipy.spatial import cKDTree

from .errors import ColoringError, ParameterError

# Times pitch.  Captures the two close-packed rings of a hexagonal lattice
# (neighbor distances pitch and sqrt(3)*pitch, 12 bumps) while excluding the
# 2*pitch ring; any factor in [sqrt(3), 2) yields the same 12-neighborhood.
DEFAULT_SHORT_RADIUS_FACTOR = 1.9


class LatticeKind(Enum):
    HEXAGONAL = "hexagonal"
    RECTANGULAR = "rectangular"


class Color(Enum):
    """Codeword color classes; the drive patterns live in the BIST engine."""

    GREEN = "green"
    BLUE = "blue"
    RED = "red"
    BLACK = "black"


COLOR_ORDER = (Color.GREEN, Color.BLUE, Color.RED, Color.BLACK)
COLOR_INDEX = {color: i for i, color in enumerate(COLOR_ORDER)}


@dataclass(frozen=True)
class Lattice:
    kind: LatticeKind
    rows: int
    cols: int
    pitch_um: float

    def __post_init__(self) -> None:
        if not isinstance(self.rows, int) or not isinstance(self.cols, int):
            raise ParameterError("lattice rows and cols must be integers")
        if self.rows < 1 or self.cols < 1:
            raise ParameterError(
                f"lattice needs rows >= 1 and cols >= 1, got {self.rows}x{self.cols}"
            )
        if not self.pitch_um > 0:
            raise ParameterError(f"lattice pitch must be positive, got {self.pitch_um}")

    @property
    def bump_count(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class BumpMap:
    """Bump positions plus (once assigned) codeword coloring and block split.

    Bump ids are dense, 0..rows*cols-1, in row-major order.  ``coloring`` and
    ``blocks`` are tuples indexed by bump id; they are None until
    :func:`assign_codewords` / :func:`partition_blocks` produce them.
    """

    lattice: Lattice
    positions: tuple[tuple[float, float], ...]
    coloring: tuple[Color, ...] | None = None
    blocks: tuple[int, ...] | None = None
    block_count: int | None = None

    @property
    def bump_count(self) -> int:
        return len(self.positions)

    def row_col(self, bump: int) -> tuple[int, int]:
        return divmod(bump, self.lattice.cols)

    def color_of(self, bump: int) -> Color:
        if self.coloring is None:
            raise ParameterError("bump map has no codeword coloring yet")
        return self.coloring[bump]

    def block_of(self, bump: int) -> int:
        if self.blocks is None:
            raise ParameterError("bump map has no block partition yet")
        return self.blocks[bump]

    def bumps_in_block(self, block: int) -> tuple[int, ...]:
        if self.blocks is None:
            raise ParameterError("bump map has no block partition yet")
        return tuple(b for b, k in enumerate(self.blocks) if k == block)


class AdjacencyGraph:
    """Undirected potential-short graph over bump ids.

    Edges are stored normalized (a < b), once each, with no self-loops.
    """

    def __init__(
        self,
        edges: Iterable[tuple[int, int]],
        short_radius_um: float | None = None,
    ) -> None:
        normalized = set()
        for a, b in edges:
            if a == b:
                raise ParameterError(f"self-loop edge on bump {a}")
            if a < 0 or b < 0:
                raise ParameterError(f"negative bump id in edge ({a}, {b})")
            normalized.add((a, b) if a < b else (b, a))
        self.edges: frozenset[tuple[int, int]] = frozenset(normalized)
        self.short_radius_um = short_radius_um
        nbrs: dict[int, set[int]] = {}
        for a, b in self.edges:
            nbrs.setdefault(a, set()).add(b)
            nbrs.setdefault(b, set()).add(a)
        self._neighbors = {b: tuple(sorted(s)) for b, s in nbrs.items()}

    def neighbors(self, bump: int) -> tuple[int, ...]:
        return self._neighbors.get(bump, ())

    def degree(self, bump: int) -> int:
        return len(self._neighbors.get(bump, ()))

    def has_edge(self, a: int, b: int) -> bool:
        return ((a, b) if a < b else (b, a)) in self.edges

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def build_bump_map(lattice: Lattice) -> BumpMap:
    """Realize lattice geometry: positions in micrometers, row-major ids.

    Hexagonal lattices offset odd rows by pitch/2 and space rows by
    pitch*sqrt(3)/2 (close packing); rectangular lattices are a plain grid.
    """
    pitch = lattice.pitch_um
    row_step = pitch * math.sqrt(3.0) / 2.0
    positions = []
    for r in range(lattice.rows):
        for c in range(lattice.cols):
            if lattice.kind is LatticeKind.HEXAGONAL:
                positions.append((c * pitch + (r % 2) * pitch / 2.0, r * row_step))
            else:
                positions.append((c * pitch, r * pitch))
    return BumpMap(lattice=lattice, positions=tuple(positions))


def potential_short_graph(bump_map: BumpMap, short_radius_um: float) -> AdjacencyGraph:
    """Edges between every bump pair with Euclidean distance <= short_radius_um."""
    if not short_radius_um > 0:
        raise ParameterError(f"short radius must be positive, got {short_radius_um}")
    tree = cKDTree(bump_map.positions)
    pairs = tree.query_pairs(short_radius_um)
    return AdjacencyGraph(pairs, short_radius_um)


def periodic_tiling_coloring(lattice: Lattice) -> tuple[Color, ...]:
    """Structured 4-coloring with period 2 in columns and 4 (hex) / 2 (rect) in rows.

    For the hexagonal lattice the color class of bump (r, c) is
    (r mod 2, (c + r//2) mod 2); every same-class pair is >= 2*pitch apart, so
    the coloring is proper on the 12-neighborhood (both close-packed rings).
    The rectangular class is plain (r mod 2, c mod 2), proper for any short
    radius below 2*pitch.
    """
    colors = []
    for r in range(lattice.rows):
        for c in range(lattice.cols):
            if lattice.kind is LatticeKind.HEXAGONAL:
                idx = (r % 2) * 2 + (c + r // 2) % 2
            else:
                idx = (r % 2) * 2 + c % 2
            colors.append(COLOR_ORDER[idx])
    return tuple(colors)


def _greedy_coloring(bump_count: int, graph: AdjacencyGraph) -> tuple[Color, ...] | None:
    """Smallest-available-color in bump-id order; None if a 5th color is needed."""
    assigned: list[int] = []
    for b in range(bump_count):
        used = {assigned[n] for n in graph.neighbors(b) if n < b}
        color = 0
        while color in used:
            color += 1
        if color >= len(COLOR_ORDER):
            return None
        assigned.append(color)
    return tuple(COLOR_ORDER[i] for i in assigned)


def coloring_violations(
    coloring: tuple[Color, ...], graph: AdjacencyGraph
) -> tuple[tuple[int, int], ...]:
    """Edges whose endpoints share a color (empty iff the coloring is proper)."""
    return tuple(e for e in sorted(graph.edges) if coloring[e[0]] is coloring[e[1]])


def assign_codewords(bump_map: BumpMap, graph: AdjacencyGraph) -> BumpMap:
    """Assign a proper coloring with at most 4 colors, or fail loudly.

    Greedy (smallest available color in bump-id order) runs first; when it
    would need a 5th color the periodic lattice tiling is used instead,
    provided it is proper on the given graph.  A 5th color is never emitted
    silently.
    """
    for a, b in graph.edges:
        if b >= bump_map.bump_count:
            raise ParameterError(f"edge ({a}, {b}) references a bump outside the map")
    coloring = _greedy_coloring(bump_map.bump_count, graph)
    if coloring is None:
        tiling = periodic_tiling_coloring(bump_map.lattice)
        if coloring_violations(tiling, graph):
            raise ColoringError(
                "coloring failed: greedy needs a 5th color and the periodic "
                "tiling is not proper on this graph"
            )
        coloring = tiling
    return replace(bump_map, coloring=coloring)


def partition_blocks(bump_map: BumpMap, block_count: int) -> BumpMap:
    """Split the map into contiguous column bands of near-equal width.

    Band widths differ by at most one column, wider bands first.  Requires
    block_count <= cols so that every block is non-empty.
    """
    cols = bump_map.lattice.cols
    if not isinstance(block_count, int) or block_count < 1:
        raise ParameterError(f"block_count must be a positive integer, got {block_count}")
    if block_count > cols:
        raise ParameterError(
            f"block_count {block_count} exceeds the {cols} columns available "
            "for column-band partitioning"
        )
    base, extra = divmod(cols, block_count)
    col_to_block = []
    for k in range(block_count):
        width = base + (1 if k < extra else 0)
        col_to_block.extend([k] * width)
    blocks = tuple(col_to_block[bump_map.row_col(b)[1]] for b in range(bump_map.bump_count))
    return replace(bump_map, blocks=blocks, block_count=block_count)
