"""Random communication graphs: Erdős–Rényi rounds and uniform connected graphs.

A :class:`Graph` stores its undirected edge set as an integer bitmask over the
``M(M-1)/2`` unordered pairs in lexicographic order ``(0,1), (0,2), ...,
(M-2,M-1)``; bit ``k`` is set when the ``k``-th pair is an edge.  Self-loops
are never stored but every consumer treats a node as adjacent to itself.

Uniform connected graphs are approximated by a Metropolis–Hastings walk on
connected graphs: pick a pair uniformly, add it if absent, remove it if
present and the result stays connected, otherwise stay put.  The proposal is
symmetric, so the uniform distribution is stationary.  Small ``M`` can be
checked exactly with :func:`enumerate_connected` and
:func:`transition_matrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import SizeLimitError

ENUMERATION_LIMIT = 5
MATRIX_LIMIT = 4


@lru_cache(maxsize=None)
def pair_list(M: int) -> tuple[tuple[int, int], ...]:
    """Unordered pairs ``(i, j)``, ``i < j``, in lexicographic order."""
    return tuple((i, j) for i in range(M) for j in range(i + 1, M))


@lru_cache(maxsize=None)
def pair_index_table(M: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(pair_list(M))}


def pair_count(M: int) -> int:
    return M * (M - 1) // 2


def pair_index(M: int, i: int, j: int) -> int:
    if i == j:
        raise ValueError("self-loops have no pair index")
    if i > j:
        i, j = j, i
    return pair_index_table(M)[(i, j)]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..node_count-1``."""

    node_count: int
    mask: int = 0

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("a graph needs at least one node")
        if self.mask < 0 or self.mask >> pair_count(self.node_count):
            raise ValueError("edge mask has bits outside the pair range")

    @classmethod
    def from_edges(cls, M: int, edges) -> "Graph":
        mask = 0
        for i, j in edges:
            mask |= 1 << pair_index(M, i, j)
        return cls(M, mask)

    @classmethod
    def empty(cls, M: int) -> "Graph":
        return cls(M, 0)

    @classmethod
    def complete(cls, M: int) -> "Graph":
        return cls(M, (1 << pair_count(M)) - 1)

    @property
    def M(self) -> int:
        return self.node_count

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [p for k, p in enumerate(pair_list(self.node_count)) if self.mask >> k & 1]

    @property
    def edge_count(self) -> int:
        return self.mask.bit_count()

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return True
        return bool(self.mask >> pair_index(self.node_count, i, j) & 1)

    def toggled(self, k: int) -> "Graph":
        """Graph with the ``k``-th pair flipped."""
        return Graph(self.node_count, self.mask ^ (1 << k))

    def with_edge(self, i: int, j: int) -> "Graph":
        return Graph(self.node_count, self.mask | (1 << pair_index(self.node_count, i, j)))

    def without_edge(self, i: int, j: int) -> "Graph":
        return Graph(self.node_count, self.mask & ~(1 << pair_index(self.node_count, i, j)))

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        nb = [0] * self.node_count
        for k, (i, j) in enumerate(pair_list(self.node_count)):
            if self.mask >> k & 1:
                nb[i] |= 1 << j
                nb[j] |= 1 << i
        return tuple(nb)

    def neighbors(self, m: int) -> list[int]:
        """Neighbor set of ``m`` (excluding ``m`` itself), ascending."""
        nb = self.neighbor_masks[m]
        return [j for j in range(self.node_count) if nb >> j & 1]

    def adjacency(self) -> np.ndarray:
        """Boolean ``(M, M)`` adjacency with a zero diagonal."""
        A = np.zeros((self.node_count, self.node_count), dtype=bool)
        for i, j in self.edges:
            A[i, j] = A[j, i] = True
        return A

    def to_text(self) -> str:
        lines = [str(self.node_count)] + [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        M = int(rows[0][0])
        return cls.from_edges(M, [(int(a), int(b)) for a, b in rows[1:]])


def _reach(nb: Sequence[int], start: int) -> int:
    seen = frontier = 1 << start
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= nb[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        seen |= frontier
    return seen


def is_connected(g: Graph) -> bool:
    """True iff every node is reachable from node 0 (a single node is connected)."""
    return _reach(g.neighbor_masks, 0) == (1 << g.node_count) - 1


def components(g: Graph) -> list[list[int]]:
    """Connected components, each sorted, ordered by smallest member."""
    left = (1 << g.node_count) - 1
    out = []
    while left:
        start = (left & -left).bit_length() - 1
        comp = _reach(g.neighbor_masks, start)
        out.append([v for v in range(g.node_count) if comp >> v & 1])
        left &= ~comp
    return out


def generate_er(M: int, c: float, rng: np.random.Generator) -> Graph:
    """One E-R graph: each pair present independently with probability ``c``.

    Draws exactly ``M(M-1)/2`` uniforms, one per pair in lexicographic order.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"invalid edge probability {c}")
    if M < 1:
        raise ValueError("M must be positive")
    u = rng.random(pair_count(M))
    return Graph(M, mask_from_bits(u < c))


def mask_from_bits(bits: np.ndarray) -> int:
    mask = 0
    for k in np.flatnonzero(bits):
        mask |= 1 << int(k)
    return mask


def connect_minimally(g: Graph, rng: np.random.Generator) -> Graph:
    """Join the components of ``g`` with ``#components - 1`` new edges.

    Components are visited by smallest member; each later component is linked
    through one uniformly chosen node of its own to one uniformly chosen node
    of the part already connected.
    """
    comps = components(g)
    joined = list(comps[0])
    mask = g.mask
    for comp in comps[1:]:
        u = comp[int(rng.integers(len(comp)))]
        v = joined[int(rng.integers(len(joined)))]
        mask |= 1 << pair_index(g.node_count, u, v)
        joined.extend(comp)
    return Graph(g.node_count, mask)


@dataclass
class ChainState:
    """Position of the connected-graph Metropolis–Hastings walk."""

    current: Graph
    steps_taken: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng, repr=False)


def mh_step(state: ChainState, pair: int | None = None) -> ChainState:
    """Advance the walk by one proposal.

    ``pair`` forces the proposed pair index (used by tests); otherwise it is
    drawn uniformly from the state's stream.
    """
    g = state.current
    npairs = pair_count(g.node_count)
    if npairs == 0:
        return ChainState(g, state.steps_taken + 1, state.rng)
    k = int(state.rng.integers(npairs)) if pair is None else pair
    proposal = g.toggled(k)
    if g.mask >> k & 1 and not is_connected(proposal):
        proposal = g
    return ChainState(proposal, state.steps_taken + 1, state.rng)


def sample_uniform_connected(M: int, tau1: int, rng: np.random.Generator) -> ChainState:
    """Initialise the walk and run ``tau1`` warm-up steps.

    The start is an E-R graph with edge probability 1/2, made connected with
    the fewest extra edges.  Keep calling :func:`mh_step` (or
    :func:`chain_graphs`) on the returned state for further samples.
    """
    if M < 1 or tau1 < 0:
        raise ValueError("need M >= 1 and tau1 >= 0")
    g0 = connect_minimally(generate_er(M, 0.5, rng), rng)
    state = ChainState(g0, 0, rng)
    for _ in range(tau1):
        state = mh_step(state)
    return state


def chain_graphs(state: ChainState, thin: int = 1) -> Iterator[Graph]:
    """Endless stream of graphs, ``thin`` walk steps apart.

    The state is advanced in place so the caller can keep using it.
    """
    if thin < 1:
        raise ValueError("thin must be >= 1")
    while True:
        for _ in range(thin):
            nxt = mh_step(state)
            state.current, state.steps_taken = nxt.current, nxt.steps_taken
        yield state.current


def enumerate_connected(M: int) -> list[Graph]:
    """All connected labelled graphs on ``M <= 5`` nodes, by ascending mask."""
    if M < 1:
        raise ValueError("M must be positive")
    if M > ENUMERATION_LIMIT:
        raise SizeLimitError(f"enumeration is limited to M <= {ENUMERATION_LIMIT}, got {M}")
    return [g for mask in range(1 << pair_count(M)) if is_connected(g := Graph(M, mask))]


def edge_presence_probability(M: int, mode: str = "formula") -> Fraction | float:
    """Probability that a fixed pair is an edge of a uniform connected graph.

    ``mode="enumeration"`` returns the exact :class:`~fractions.Fraction` for
    ``M <= 5``.  ``mode="formula"`` returns ``2 ln M / (M - 1)`` clipped to
    ``[0, 1]`` (an asymptotic value; it exceeds 1 for small ``M``).
    """
    if M < 2:
        raise ValueError("edge probability needs M >= 2")
    if mode == "formula":
        return min(1.0, max(0.0, 2.0 * math.log(M) / (M - 1)))
    if mode == "enumeration":
        graphs = enumerate_connected(M)
        return Fraction(sum(g.mask & 1 for g in graphs), len(graphs))
    raise ValueError(f"unknown mode {mode!r}")


def transition_matrix(M: int) -> tuple[np.ndarray, list[Graph]]:
    """Exact walk kernel over ``enumerate_connected(M)`` for ``M <= 4``.

    Returns ``(matrix, states)``; ``matrix[a, b]`` is the one-step probability
    of moving from ``states[a]`` to ``states[b]``.
    """
    if M > MATRIX_LIMIT:
        raise SizeLimitError(f"transition matrix is limited to M <= {MATRIX_LIMIT}, got {M}")
    states = enumerate_connected(M)
    index = {g.mask: a for a, g in enumerate(states)}
    n = len(states)
    P = np.zeros((n, n))
    npairs = pair_count(M)
    if npairs:
        step = 2.0 / (M * (M - 1))
        for a, g in enumerate(states):
            for k in range(npairs):
                b = index.get(g.mask ^ (1 << k))
                if b is not None:
                    P[a, b] = step
    for a in range(n):
        P[a, a] = 1.0 - P[a].sum()
    return P, states


@dataclass(frozen=True)
class GraphDistribution:
    """Probability vector over an ordered list of graphs."""

    support: tuple[Graph, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        if len(self.support) != len(self.probabilities):
            raise ValueError("support and probabilities differ in length")
        if np.any(self.probabilities < 0) or abs(self.probabilities.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")

    @classmethod
    def uniform_connected(cls, M: int) -> "GraphDistribution":
        states = enumerate_connected(M)
        return cls(tuple(states), np.full(len(states), 1.0 / len(states)))

    @classmethod
    def empirical(cls, support: Sequence[Graph], samples) -> "GraphDistribution":
        """Frequencies of ``samples`` (graphs or masks) over ``support``."""
        index = {g.mask: a for a, g in enumerate(support)}
        counts = np.zeros(len(support))
        total = 0
        for s in samples:
            counts[index[s.mask if isinstance(s, Graph) else s]] += 1
            total += 1
        return cls(tuple(support), counts / total)


def tv_distance(p, q) -> float:
    """Total variation distance ``0.5 * sum |p - q|``.

    Some texts use ``sup``-based conventions that are twice this value.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    for v in (p, q):
        if abs(v.sum() - 1.0) > 1e-9:
            raise ValueError("probability vectors must sum to 1")
    return 0.5 * float(np.abs(p - q).sum())


def chain_tv_trace(M: int, tau1: int, samples: int, rng: np.random.Generator, checkpoints: Sequence[int]) -> list[tuple[int, float]]:
    """TV distance from uniform of the walk's empirical distribution.

    Runs ``tau1`` warm-up steps, then records ``samples`` consecutive states
    and reports the TV distance of the first ``k`` of them for every ``k`` in
    ``checkpoints`` (capped at ``samples``).
    """
    states = enumerate_connected(M)
    index = {g.mask: a for a, g in enumerate(states)}
    target = np.full(len(states), 1.0 / len(states))
    state = sample_uniform_connected(M, tau1, rng)
    counts = np.zeros(len(states))
    marks = sorted({min(k, samples) for k in checkpoints if k > 0})
    out = []
    stream = chain_graphs(state)
    for k in range(1, samples + 1):
        counts[index[next(stream).mask]] += 1
        if marks and k == marks[0]:
            out.append((k, tv_distance(counts / k, target)))
            marks.pop(0)
    return out
