"""Weighted MaxCut instances represented as diagonal Ising cost operators.

A problem graph is turned into the full 2^N diagonal of
``H = sum_{(i,j)} J_ij * sz_i * sz_j`` using the little-endian bit
convention: qubit ``i`` is bit ``i`` of the basis index, and the spin of
qubit ``i`` in basis state ``z`` is ``s_i(z) = 1 - 2*bit_i(z)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_QUBITS = 24


class GraphGenerationError(RuntimeError):
    """Raised when the pairing model exhausts its retry budget."""


class ResourceLimitError(ValueError):
    """Raised when a request would exceed the configured qubit cap."""


@dataclass(frozen=True)
class ProblemGraph:
    """Simple weighted graph with vertices 0..num_vertices-1.

    Edges are stored sorted by (i, j) with i < j; weights must be finite
    and nonzero.
    """

    num_vertices: int
    edges: tuple[tuple[int, int, float], ...]
    seed: int | None = None
    weighted: bool = False

    def __post_init__(self):
        if self.num_vertices < 2:
            raise ValueError("need at least two vertices")
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < j < self.num_vertices):
                raise ValueError(f"edge ({i}, {j}) out of range or unordered")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if not np.isfinite(w) or w == 0.0:
                raise ValueError(f"edge ({i}, {j}) has invalid weight {w}")
            seen.add((i, j))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_vertices, dtype=int)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def to_dict(self) -> dict:
        return {
            "n": self.num_vertices,
            "edges": [[i, j, w] for i, j, w in self.edges],
            "seed": self.seed,
            "weighted": self.weighted,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemGraph":
        edges = tuple((int(i), int(j), float(w)) for i, j, w in data["edges"])
        return cls(
            num_vertices=int(data["n"]),
            edges=edges,
            seed=data.get("seed"),
            weighted=bool(data.get("weighted", False)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ProblemGraph":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class CostDiagonal:
    """Full diagonal of the Ising cost operator plus spectral references.

    ``n_c`` is the sum of squared edge weights, which equals both the
    squared norm of H|+> and the energy variance of the |+> state.
    """

    values: np.ndarray
    num_qubits: int
    n_c: float
    ground_energy: float
    ground_index: int

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass
class PauliTermSum:
    """Sum of diagonal Pauli-Z strings, one term per (support, coefficient)."""

    terms: list[tuple[tuple[int, ...], float]] = field(default_factory=list)

    def evaluate(self, num_qubits: int) -> np.ndarray:
        """Evaluate the sum on every basis state of `num_qubits` qubits."""
        z = np.arange(1 << num_qubits, dtype=np.int64)
        out = np.zeros(z.size, dtype=float)
        for support, coeff in self.terms:
            parity = np.zeros(z.size, dtype=np.int64)
            for q in support:
                if q >= num_qubits:
                    raise ValueError(f"support qubit {q} out of range")
                parity ^= (z >> q) & 1
            out += coeff * (1 - 2 * parity)
        return out


def generate_regular_graph(
    n: int, degree: int, weighted: bool = False, seed: int = 0
) -> ProblemGraph:
    """Sample a simple degree-regular graph via the configuration model.

    Stub pairings with self-loops or multi-edges are rejected and redrawn,
    up to a budget of 10*n attempts. Identical arguments always produce an
    identical graph.
    """
    if degree < 1 or n <= degree or (n * degree) % 2 != 0:
        raise ValueError(f"no {degree}-regular simple graph on {n} vertices")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(10 * n):
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        if np.any(lo == hi):
            continue
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        order = np.argsort(keys)
        if weighted:
            # uniform on (0, 1]: zero weights are disallowed
            raw = 1.0 - rng.random(len(order))
            weights = raw[order]
        else:
            weights = np.ones(len(order))
        edges = tuple(
            (int(lo[k]), int(hi[k]), float(w)) for k, w in zip(order, weights)
        )
        return ProblemGraph(n, edges, seed=seed, weighted=weighted)
    raise GraphGenerationError(
        f"pairing model failed for n={n}, degree={degree} after {10 * n} tries"
    )


def build_cost_diagonal(g: ProblemGraph, max_qubits: int = MAX_QUBITS) -> CostDiagonal:
    """Exhaustively evaluate the Ising diagonal and its ground state."""
    n = g.num_vertices
    if n > max_qubits:
        raise ResourceLimitError(f"{n} qubits exceeds cap of {max_qubits}")
    z = np.arange(1 << n, dtype=np.int64)
    values = np.zeros(z.size, dtype=float)
    for i, j, w in g.edges:
        parity = ((z >> i) ^ (z >> j)) & 1
        values += w * (1 - 2 * parity)
    ground_index = int(np.argmin(values))
    return CostDiagonal(
        values=values,
        num_qubits=n,
        n_c=float(sum(w * w for _, _, w in g.edges)),
        ground_energy=float(values[ground_index]),
        ground_index=ground_index,
    )


def hc_squared_decomposition(
    g: ProblemGraph,
) -> tuple[float, PauliTermSum, PauliTermSum]:
    """Split the squared cost operator into constant, 2-local and 4-local parts.

    Ordered pairs of distinct edges sharing one vertex contribute 2-local
    terms (their supports may coincide with existing edges); disjoint pairs
    contribute 4-local terms; equal pairs sum to the identity coefficient.
    """
    constant = float(sum(w * w for _, _, w in g.edges))
    t2 = PauliTermSum()
    t4 = PauliTermSum()
    edges = g.edges
    for a, (i1, j1, w1) in enumerate(edges):
        e1 = {i1, j1}
        for b, (i2, j2, w2) in enumerate(edges):
            if a == b:
                continue
            support = tuple(sorted(e1 ^ {i2, j2}))
            term = (support, w1 * w2)
            if len(support) == 2:
                t2.terms.append(term)
            else:
                t4.terms.append(term)
    return constant, t2, t4


def approximation_ratio(energy: float, cost: CostDiagonal) -> float:
    """Distance 1 - r of `energy` from the ground energy, per the cost scale."""
    if cost.ground_energy == 0.0:
        raise ValueError("approximation ratio undefined for zero ground energy")
    return (cost.ground_energy - energy) / cost.ground_energy
