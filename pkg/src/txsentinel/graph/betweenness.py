"""Directed betweenness centrality (Brandes), exact or source-sampled.

Operates on the collapsed simple view of the transaction multigraph: parallel
edges count once for path purposes. Values are raw dependency-pair counts,
deliberately unnormalized. Source sampling accumulates dependencies from a
random subset of sources and scales by |V| / samples.

Two engines compute the same quantity: a plain-Python Brandes (reference,
default for small graphs) and a numba-compiled CSR kernel that keeps the
every-B-insertions recompute affordable on windows of thousands of nodes.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Sequence

import numpy as np

from .dynamic import TransactionGraph

try:  # the JIT kernel is an optimization; everything works without it
    import numba
except ImportError:  # pragma: no cover
    numba = None

_NUMBA_CUTOFF = 300  # below this node count the Python path wins (no JIT warmup)


class _Workspace:
    """Per-call scratch arrays, reset only where a source's BFS touched them."""

    def __init__(self, n: int):
        self.sigma = [0] * n
        self.dist = [-1] * n
        self.preds: list[list[int]] = [[] for _ in range(n)]
        self.dependency = [0.0] * n

    def reset(self, touched: list[int]) -> None:
        for v in touched:
            self.sigma[v] = 0
            self.dist[v] = -1
            self.preds[v].clear()
            self.dependency[v] = 0.0


def _accumulate(
    bet: list[float],
    succ: Sequence[Sequence[int]],
    source: int,
    ws: _Workspace,
    scale: float,
) -> None:
    sigma, dist, preds, dependency = ws.sigma, ws.dist, ws.preds, ws.dependency
    sigma[source] = 1
    dist[source] = 0
    order: list[int] = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        dv1 = dist[v] + 1
        sv = sigma[v]
        for w in succ[v]:
            dw = dist[w]
            if dw < 0:
                dist[w] = dv1
                queue.append(w)
                sigma[w] = sv
                preds[w].append(v)
            elif dw == dv1:
                sigma[w] += sv
                preds[w].append(v)
    for w in reversed(order):
        coeff = (1.0 + dependency[w]) / sigma[w]
        for v in preds[w]:
            dependency[v] += sigma[v] * coeff
        if w != source:
            bet[w] += dependency[w] * scale
    ws.reset(order)


def _python_engine(
    n: int, succ: list[list[int]], sources: Sequence[int], scale: float
) -> list[float]:
    bet = [0.0] * n
    ws = _Workspace(n)
    for s in sources:
        _accumulate(bet, succ, s, ws, scale)
    return bet


if numba is not None:

    @numba.njit(cache=True)
    def _brandes_kernel(n, indptr, indices, rindptr, rindices, sources, scale):  # pragma: no cover
        bet = np.zeros(n)
        sigma = np.zeros(n)
        dist = np.empty(n, dtype=np.int64)
        dependency = np.zeros(n)
        queue = np.empty(n, dtype=np.int64)
        order = np.empty(n, dtype=np.int64)
        for si in range(sources.shape[0]):
            s = sources[si]
            for i in range(n):
                dist[i] = -1
                sigma[i] = 0.0
                dependency[i] = 0.0
            sigma[s] = 1.0
            dist[s] = 0
            head = 0
            tail = 1
            queue[0] = s
            count = 0
            while head < tail:
                v = queue[head]
                head += 1
                order[count] = v
                count += 1
                dv1 = dist[v] + 1
                sv = sigma[v]
                for ei in range(indptr[v], indptr[v + 1]):
                    w = indices[ei]
                    dw = dist[w]
                    if dw < 0:
                        dist[w] = dv1
                        queue[tail] = w
                        tail += 1
                        sigma[w] += sv
                    elif dw == dv1:
                        sigma[w] += sv
            for oi in range(count - 1, -1, -1):
                w = order[oi]
                coeff = (1.0 + dependency[w]) / sigma[w]
                dw = dist[w]
                for ei in range(rindptr[w], rindptr[w + 1]):
                    v = rindices[ei]
                    if dist[v] == dw - 1:
                        dependency[v] += sigma[v] * coeff
                if w != s:
                    bet[w] += dependency[w] * scale
        return bet


def _csr_arrays(n: int, succ: list[list[int]]) -> tuple[np.ndarray, ...]:
    lengths = np.fromiter((len(row) for row in succ), dtype=np.int64, count=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    indices = np.fromiter(
        (w for row in succ for w in row), dtype=np.int64, count=int(indptr[-1])
    )
    rcounts = np.bincount(indices, minlength=n)
    rindptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(rcounts, out=rindptr[1:])
    rindices = np.empty(int(rindptr[-1]), dtype=np.int64)
    cursor = rindptr[:-1].copy()
    for v in range(n):
        for w in succ[v]:
            rindices[cursor[w]] = v
            cursor[w] += 1
    return indptr, indices, rindptr, rindices


def betweenness_all(
    graph: TransactionGraph,
    sample_sources: int | None = None,
    seed: int = 0,
    engine: str = "auto",
) -> dict[str, float]:
    """Betweenness of every node; exact when ``sample_sources`` is None.

    With ``sample_sources = s < |V|`` the estimate runs Brandes from ``s``
    uniformly sampled sources and scales by |V|/s; ``s >= |V|`` degrades to
    the exact computation. ``engine`` is "auto", "python", or "numba".
    """
    if graph.n_nodes == 0:
        raise ValueError("betweenness on an empty graph")
    if sample_sources is not None and sample_sources <= 0:
        raise ValueError("sample_sources must be >= 1")
    if engine not in ("auto", "python", "numba"):
        raise ValueError(f"unknown betweenness engine: {engine}")

    names = list(graph.nodes())
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    succ: list[list[int]] = [
        [index[w] for w in graph.simple_successors(name)] for name in names
    ]

    if sample_sources is None or sample_sources >= n:
        sources: Sequence[int] = range(n)
        scale = 1.0
    else:
        rng = random.Random(seed)
        sources = rng.sample(range(n), sample_sources)
        scale = n / sample_sources

    use_numba = engine == "numba" or (
        engine == "auto" and numba is not None and n >= _NUMBA_CUTOFF
    )
    if use_numba:
        if numba is None:
            raise RuntimeError("numba engine requested but numba is not installed")
        indptr, indices, rindptr, rindices = _csr_arrays(n, succ)
        src_arr = np.fromiter(sources, dtype=np.int64)
        bet = _brandes_kernel(n, indptr, indices, rindptr, rindices, src_arr, scale)
        return {names[i]: float(bet[i]) for i in range(n)}

    bet_list = _python_engine(n, succ, sources, scale)
    return {names[i]: bet_list[i] for i in range(n)}
