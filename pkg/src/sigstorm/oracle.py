"""Brute-force reference for the closed forms.

The full chain expands every signalling segment of every edge into its own
exponential delay state, is solved by a dense linear solve of global balance,
and message rates are obtained by summing ``pi(source) * rate * cost`` over
edges.  Nothing here uses the closed-form algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sigstorm.model import State, TransitionTable

PHI = (1 + math.sqrt(5)) / 2
INV_PHI = 1 / PHI


class SingularChainError(ArithmeticError):
    """The chain has no unique stationary distribution on D's component."""


@dataclass(frozen=True)
class Segment:
    edge: int
    index: int
    source: State
    sigma: float


@dataclass
class GeneratorMatrix:
    """Row-sum-zero generator of the full chain.

    Indices ``0..len(main)-1`` are the main states in table order; the rest
    are signalling delay states described by ``segments``.
    """

    Q: np.ndarray
    labels: list[str]
    main: tuple[State, ...]
    segments: list[Segment]

    @property
    def size(self) -> int:
        return self.Q.shape[0]

    def index(self, s: State) -> int:
        return self.main.index(s)

    def check(self, atol: float = 1e-12) -> None:
        off = self.Q - np.diag(np.diag(self.Q))
        if (off < 0).any():
            raise ValueError("negative off-diagonal rate")
        scale = max(1.0, float(np.abs(self.Q).max()))
        if np.abs(self.Q.sum(axis=1)).max() > atol * scale:
            raise ValueError("generator rows do not sum to zero")
        k = len(self.main)
        for j, seg in enumerate(self.segments):
            if np.count_nonzero(off[k + j]) != 1:
                raise ValueError(f"signalling state {self.labels[k + j]} must have one exit")


def build_full_generator(t: TransitionTable) -> GeneratorMatrix:
    main = tuple(t.states)
    k = len(main)
    pos = {s: i for i, s in enumerate(main)}
    labels = [str(s) for s in main]
    segments: list[Segment] = []
    moves: list[tuple[int, int, float]] = []

    for ei, e in enumerate(t.edges):
        if not e.rate > 0:
            continue
        if not math.isfinite(e.rate):
            raise ValueError("generator needs finite rates")
        prev, rate = pos[e.source], e.rate
        for si, delay in enumerate(e.segments):
            idx = k + len(segments)
            segments.append(Segment(ei, si, e.source, 1.0 / delay))
            labels.append(f"S[{e.source}->{e.target}:{si}]")
            moves.append((prev, idx, rate))
            prev, rate = idx, 1.0 / delay
        moves.append((prev, pos[e.target], rate))

    Q = np.zeros((len(labels), len(labels)))
    for i, j, r in moves:
        Q[i, j] += r
        Q[i, i] -= r
    return GeneratorMatrix(Q, labels, main, segments)


def _reach(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adj[i]):
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    return seen


def _gth(rates: np.ndarray) -> np.ndarray:
    """Grassmann-Taksar-Heyman elimination on an irreducible rate matrix.

    Only off-diagonal entries are read and no subtraction occurs, so every
    component keeps full relative accuracy however small it is.
    """
    A = rates.astype(float, copy=True)
    np.fill_diagonal(A, 0.0)
    n = A.shape[0]
    for k in range(n - 1, 0, -1):
        s = A[k, :k].sum()
        if not s > 0:
            raise SingularChainError("state cannot be left towards lower indices")
        A[:k, k] /= s
        A[:k, :k] += np.outer(A[:k, k], A[k, :k])
    x = np.zeros(n)
    x[0] = 1.0
    for k in range(1, n):
        x[k] = x[:k] @ A[:k, k]
    return x / x.sum()


def _lu(sub: np.ndarray) -> np.ndarray:
    A = sub.T.copy()
    A[-1, :] = 1.0
    rhs = np.zeros(sub.shape[0])
    rhs[-1] = 1.0
    try:
        x = np.linalg.solve(A, rhs)
        x += np.linalg.solve(A, rhs - A @ x)
    except np.linalg.LinAlgError as exc:
        raise SingularChainError(str(exc)) from exc
    if x.min() < -1e-12:
        raise SingularChainError(f"negative probability {x.min():.3e}")
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def solve_stationary(g: GeneratorMatrix, start: State = State.D, method: str = "gth") -> np.ndarray:
    """Stationary vector over the full state space (zeros off D's component).

    ``method="gth"`` (default) uses GTH elimination, which keeps componentwise
    relative accuracy for probabilities many decades below the largest one.
    ``method="lu"`` solves global balance with one equation replaced by
    ``sum(pi) = 1``, by LU with partial pivoting plus one refinement step;
    it is accurate in norm but not for tiny components.
    """
    Q = g.Q
    off = (Q - np.diag(np.diag(Q))) > 0
    s0 = g.index(start)
    fwd = _reach(off, s0)
    back = _reach(off.T, s0)
    if not np.array_equal(fwd, fwd & back):
        raise SingularChainError("reachable set from the start state is not a single closed class")
    idx = np.flatnonzero(fwd)
    sub = Q[np.ix_(idx, idx)]
    if len(idx) == 1:
        x = np.ones(1)
    elif method == "gth":
        x = _gth(sub)
    elif method == "lu":
        x = _lu(sub)
    else:
        raise ValueError(f"unknown method {method!r}")

    max_rate = float(np.abs(sub).max()) if sub.size else 0.0
    if np.abs(x @ sub).max() > 1e-10 * max(max_rate, 1.0):
        raise SingularChainError("balance residual too large")
    full = np.zeros(g.size)
    full[idx] = x
    return full


@dataclass(frozen=True)
class ReducedDistribution:
    pi: dict[State, float]
    signalling_mass: dict[State, float]
    segment_mass: tuple[float, ...]

    def total(self) -> float:
        return sum(self.pi.values()) + sum(self.signalling_mass.values())


def reduce_full_distribution(full: np.ndarray, g: GeneratorMatrix) -> ReducedDistribution:
    """Main-state probabilities plus signalling mass attributed to each source.

    Main states absent from ``g`` (P when PCH is disabled) get probability 0.
    """
    k = len(g.main)
    pi = {s: 0.0 for s in State}
    mass = {s: 0.0 for s in State}
    for i, s in enumerate(g.main):
        pi[s] = float(full[i])
    seg_mass = []
    for j, seg in enumerate(g.segments):
        v = float(full[k + j])
        mass[seg.source] += v
        seg_mass.append(v)
    return ReducedDistribution(pi, mass, tuple(seg_mass))


def expected_segment_mass(full: np.ndarray, g: GeneratorMatrix, t: TransitionTable) -> tuple[float, ...]:
    """``pi(source) * rate * mean_delay`` for every segment, in ``g.segments`` order."""
    out = []
    for seg in g.segments:
        e = t.edges[seg.edge]
        out.append(float(full[g.index(seg.source)]) * e.rate / seg.sigma)
    return tuple(out)


def message_rate_oracle(full: np.ndarray, t: TransitionTable) -> tuple[float, float]:
    """``(gamma_r, gamma_c)`` by summing edge flow times cost.

    ``full`` must be ordered as produced by :func:`solve_stationary` on the
    generator of ``t``: main states first, in ``t.states`` order.
    """
    pos = {s: i for i, s in enumerate(t.states)}
    g_r = g_c = 0.0
    for e in t.edges:
        flow = full[pos[e.source]] * e.rate
        g_r += flow * e.n_cost
        g_c += flow * e.m_cost
    return float(g_r), float(g_c)


def oracle_solve(t: TransitionTable) -> tuple[ReducedDistribution, float, float]:
    g = build_full_generator(t)
    full = solve_stationary(g)
    g_r, g_c = message_rate_oracle(full, t)
    return reduce_full_distribution(full, g), g_r, g_c


def golden_section_max(f, a: float, b: float, iters: int) -> tuple[float, float]:
    c = b - (b - a) * INV_PHI
    d = a + (b - a) * INV_PHI
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * INV_PHI
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * INV_PHI
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def argmax_scan(f, lo: float, hi: float, grid_points: int = 64, refine_iters: int = 60,
                log: bool = False) -> tuple[float, float]:
    """Maximise a scalar function on ``[lo, hi]``.

    A coarse scan picks the best grid point, then golden-section search runs
    on the two cells around it.  For unimodal ``f`` the location is exact to
    roughly ``(hi - lo) / grid_points * PHI ** -refine_iters``; otherwise this
    is best-effort and never returns worse than the best grid point.  With
    ``log=True`` the grid and the refinement work in ``log(x)`` (``lo > 0``).
    """
    if grid_points < 16:
        raise ValueError("grid_points must be >= 16")
    if log:
        if lo <= 0:
            raise ValueError("log scan needs lo > 0")
        to_x, u_lo, u_hi = math.exp, math.log(lo), math.log(hi)
    else:
        to_x, u_lo, u_hi = (lambda u: u), lo, hi

    grid = np.linspace(u_lo, u_hi, grid_points)
    vals = [f(to_x(u)) for u in grid]
    i = int(np.argmax(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid_points - 1)]
    u, fu = golden_section_max(lambda u: f(to_x(u)), a, b, refine_iters)
    if fu >= vals[i]:
        return to_x(u), fu
    return to_x(grid[i]), vals[i]
