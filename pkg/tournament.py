# tournament.py
#
# The tournament data model used by every other module of the linkage toolkit.
# A tournament is stored as an n x n boolean orientation matrix; sub-tournaments
# keep the root vertex ids of the vertices they contain, so every set, path and
# trace produced anywhere in the project is expressed in root coordinates.
# This module also owns the plain-text TRN1 codec.

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Tuple

import networkx as nx
import numpy as np

# --- Configuration Constants ---
TRN1_MAGIC = "TRN1"


class TournamentInputError(ValueError):
    """Raised for every malformed input: bad vertex ids, bad sets, bad TRN1 text."""


def check_tournament(matrix: np.ndarray) -> None:
    """Raises TournamentInputError unless `matrix` is a valid orientation matrix."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise TournamentInputError(f"Orientation matrix must be square, got shape {matrix.shape}.")
    n = matrix.shape[0]
    if n and matrix.diagonal().any():
        bad = int(np.flatnonzero(matrix.diagonal())[0])
        raise TournamentInputError(f"Self-arc at vertex {bad}.")
    both = matrix & matrix.T
    neither = ~(matrix | matrix.T)
    np.fill_diagonal(neither, False)
    if both.any() or neither.any():
        i, j = np.argwhere(both | neither)[0]
        raise TournamentInputError(f"Pair ({i}, {j}) does not carry exactly one arc.")
    if int(matrix.sum()) != n * (n - 1) // 2:
        raise TournamentInputError("Out-degree sum differs from n(n-1)/2.")


@dataclass(frozen=True, eq=False)
class Tournament:
    """
    An immutable tournament. `matrix[a, b]` is True iff there is an arc from the
    a-th to the b-th vertex of `labels`; `labels` holds the root vertex ids in
    ascending order. Public methods take and return root ids only.
    """
    matrix: np.ndarray
    labels: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=bool)
        check_tournament(matrix)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        labels = tuple(int(v) for v in self.labels) if self.labels else tuple(range(matrix.shape[0]))
        if len(labels) != matrix.shape[0]:
            raise TournamentInputError("Label map length differs from the vertex count.")
        if any(b <= a for a, b in zip(labels, labels[1:])):
            raise TournamentInputError("Label map must be strictly ascending.")
        object.__setattr__(self, "labels", labels)

    # --- Construction ---

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Tuple[int, int]]) -> "Tournament":
        """Builds a root tournament on 0..n-1 from an explicit arc list."""
        matrix = np.zeros((n, n), dtype=bool)
        for u, v in arcs:
            matrix[u, v] = True
        return cls(matrix)

    # --- Basic accessors ---

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def vertices(self) -> Tuple[int, ...]:
        return self.labels

    @cached_property
    def index_of(self) -> Dict[int, int]:
        return {v: i for i, v in enumerate(self.labels)}

    @cached_property
    def successors(self) -> Dict[int, Tuple[int, ...]]:
        """Root id -> ascending tuple of out-neighbour root ids."""
        labels = self.labels
        return {labels[i]: tuple(labels[j] for j in np.flatnonzero(row)) for i, row in enumerate(self.matrix)}

    @cached_property
    def out_degrees(self) -> Dict[int, int]:
        sums = self.matrix.sum(axis=1)
        return {v: int(sums[i]) for i, v in enumerate(self.labels)}

    def _index(self, v: int) -> int:
        try:
            return self.index_of[v]
        except (KeyError, TypeError):
            raise TournamentInputError(f"Vertex {v!r} is not a vertex of this tournament.") from None

    def _indices(self, vertices: Iterable[int]) -> List[int]:
        return sorted({self._index(v) for v in vertices})

    def require(self, vertices: Iterable[int]) -> None:
        """Raises TournamentInputError unless every id is a vertex of this tournament."""
        self._indices(vertices)

    def __contains__(self, v) -> bool:
        return v in self.index_of

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tournament):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Tournament(n={self.n}, labels={list(self.labels)})"

    # --- Arc and degree queries ---

    def has_arc(self, u: int, v: int) -> bool:
        if u == v:
            raise TournamentInputError(f"has_arc needs two distinct vertices, got {u} twice.")
        return bool(self.matrix[self._index(u), self._index(v)])

    def out_neighbors(self, v: int) -> FrozenSet[int]:
        return frozenset(self.successors[self.labels[self._index(v)]])

    def in_neighbors(self, v: int) -> FrozenSet[int]:
        column = self.matrix[:, self._index(v)]
        return frozenset(self.labels[i] for i in np.flatnonzero(column))

    def out_degree(self, v: int) -> int:
        return self.out_degrees[self.labels[self._index(v)]]

    def in_degree(self, v: int) -> int:
        return self.n - 1 - self.out_degree(v)

    def min_out_degree(self) -> int:
        if self.n == 0:
            raise TournamentInputError("Empty tournament has no minimum out-degree.")
        return int(self.matrix.sum(axis=1).min())

    def min_in_degree(self) -> int:
        if self.n == 0:
            raise TournamentInputError("Empty tournament has no minimum in-degree.")
        return int(self.matrix.sum(axis=0).min())

    def min_out_degree_vertex(self) -> int:
        """Vertex of minimum out-degree; ties go to the lowest root id."""
        if self.n == 0:
            raise TournamentInputError("Empty tournament has no minimum out-degree vertex.")
        # argmin returns the first minimum, and labels are ascending
        return self.labels[int(np.argmin(self.matrix.sum(axis=1)))]

    # --- Sub-tournaments ---

    def induced(self, vertices: Iterable[int]) -> "Tournament":
        """T<X>: the sub-tournament on `vertices`, keeping root ids."""
        idx = self._indices(vertices)
        return Tournament(self.matrix[np.ix_(idx, idx)], tuple(self.labels[i] for i in idx) or ())

    def remove(self, vertices: Iterable[int]) -> "Tournament":
        """T - X."""
        drop = set(self._indices(vertices))
        return self.induced(self.labels[i] for i in range(self.n) if i not in drop)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.labels)
        graph.add_edges_from((u, v) for u, outs in self.successors.items() for v in outs)
        return graph

    # --- TRN1 codec ---

    def to_trn1(self) -> str:
        """TRN1 text; sub-views are written relabelled 0..n-1."""
        rows = ["".join("1" if bit else "0" for bit in row) for row in self.matrix]
        return "\n".join([TRN1_MAGIC, str(self.n)] + rows) + "\n"

    @classmethod
    def from_trn1(cls, text: str) -> "Tournament":
        lines = [line.strip() for line in text.strip().splitlines()]
        if not lines or lines[0] != TRN1_MAGIC:
            raise TournamentInputError(f"Missing '{TRN1_MAGIC}' header line.")
        if len(lines) < 2 or not (lines[1].isascii() and lines[1].isdigit()):
            raise TournamentInputError("Second line must be the vertex count.")
        n = int(lines[1])
        rows = lines[2:]
        if len(rows) != n:
            raise TournamentInputError(f"Expected {n} matrix rows, found {len(rows)}.")
        matrix = np.zeros((n, n), dtype=bool)
        for i, row in enumerate(rows):
            if len(row) != n or set(row) - {"0", "1"}:
                raise TournamentInputError(f"Row {i} must hold exactly {n} characters over {{0,1}}.")
            matrix[i] = [c == "1" for c in row]
        return cls(matrix)


def read_trn1(path: str) -> Tournament:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except UnicodeDecodeError as e:
        raise TournamentInputError(f"'{path}' is not UTF-8 text: {e}") from e
    tournament = Tournament.from_trn1(text)
    logging.debug(f"Read {tournament!r} from '{path}'")
    return tournament


def write_trn1(tournament: Tournament, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(tournament.to_trn1())
    logging.debug(f"Wrote {tournament!r} to '{path}'")
