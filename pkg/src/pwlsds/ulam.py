"""Ulam discretization of the transfer kernel and the closed classes of the resulting chain.

Entry ``(i, j)`` is ``Σ_g μ(g) |bin_i ∩ g⁻¹(bin_j)| / |bin_i|``, computed
exactly.  Closed classes come from the positive-entry digraph, so the number
of stationary distributions is read off the graph, never off near-degenerate
eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .intervals import grid_edges
from .rational import fmt_rat
from .sds import SdsSystem

EXACT_LIMIT = 64


@dataclass
class UlamMatrix:
    bins: int
    grid: str
    entries: list[list[Fraction]]

    def row_sums(self) -> list[Fraction]:
        return [sum(r, Fraction(0)) for r in self.entries]

    def to_float(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.entries])

    def to_json(self) -> dict:
        return {"bins": self.bins, "grid": self.grid, "entries": [[fmt_rat(v) for v in r] for r in self.entries]}


def build_ulam(sys: SdsSystem, B: int, grid: str = "uniform") -> UlamMatrix:
    edges = grid_edges(grid, B)
    P = [[Fraction(0)] * B for _ in range(B)]
    for g, prob in sys.items():
        for piece in g.pieces():
            s = abs(piece.slope)
            for i in range(B):
                lo, hi = max(edges[i], piece.lo), min(edges[i + 1], piece.hi)
                if lo >= hi:
                    continue
                ya, yb = sorted((piece(lo), piece(hi)))
                w = prob / (s * (edges[i + 1] - edges[i]))
                # bins hit by [ya, yb]
                j0 = max(0, min(B - 1, int(ya * B)))
                while j0 > 0 and edges[j0] > ya:
                    j0 -= 1
                for j in range(j0, B):
                    if edges[j] >= yb:
                        break
                    ov = min(yb, edges[j + 1]) - max(ya, edges[j])
                    if ov > 0:
                        P[i][j] += w * ov
    return UlamMatrix(B, grid, P)


def closed_classes(M: UlamMatrix) -> list[list[int]]:
    """Strongly connected components with no edge leaving them (0-based bin indices)."""
    B = M.bins
    rows, cols = [], []
    for i, r in enumerate(M.entries):
        for j, v in enumerate(r):
            if v > 0:
                rows.append(i)
                cols.append(j)
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(B, B))
    n, labels = connected_components(adj, directed=True, connection="strong")
    leaves = np.ones(n, bool)
    for i, j in zip(rows, cols):
        if labels[i] != labels[j]:
            leaves[labels[i]] = False
    classes = [sorted(np.flatnonzero(labels == c).tolist()) for c in range(n) if leaves[c]]
    return sorted(classes)


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


@dataclass
class StationaryReport:
    classes: list[list[int]]
    distributions: list[list]
    exact: bool
    spectral_gap: float
    residuals: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        fmt = fmt_rat if self.exact else float
        return {
            "classes": self.classes,
            "exact": self.exact,
            "distributions": [[fmt(v) for v in d] for d in self.distributions],
            "distributions_decimal": [[float(v) for v in d] for d in self.distributions],
            "spectral_gap": self.spectral_gap,
            "residuals": self.residuals,
        }


def _stationary_float(P: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000) -> tuple[np.ndarray, float]:
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi = np.clip(np.linalg.lstsq(A, b, rcond=None)[0], 0, None)
    pi /= pi.sum()
    res = float(np.abs(pi @ P - pi).max())
    it = 0
    while res >= tol and it < max_iter:
        pi = 0.5 * (pi + pi @ P)
        pi /= pi.sum()
        res = float(np.abs(pi @ P - pi).max())
        it += 1
    return pi, res


def stationary_distributions(M: UlamMatrix) -> StationaryReport:
    classes = closed_classes(M)
    B = M.bins
    exact = B <= EXACT_LIMIT
    dists, residuals = [], []
    for C in classes:
        k = len(C)
        if exact:
            # π (P_C − I) = 0 with the last balance equation replaced by Σπ = 1
            A = [[M.entries[C[j]][C[i]] - (1 if i == j else 0) for j in range(k)] for i in range(k)]
            A[-1] = [Fraction(1)] * k
            rhs = [Fraction(0)] * (k - 1) + [Fraction(1)]
            pi_c = _solve_exact(A, rhs)
            full = [Fraction(0)] * B
            for idx, v in zip(C, pi_c):
                full[idx] = v
            residuals.append(0.0)
        else:
            Pc = np.array([[float(M.entries[i][j]) for j in C] for i in C])
            pi_c, res = _stationary_float(Pc)
            full = [0.0] * B
            for idx, v in zip(C, pi_c):
                full[idx] = float(v)
            residuals.append(res)
        dists.append(full)
    ev = np.sort(np.abs(np.linalg.eigvals(M.to_float())))[::-1]
    gap = float(1 - ev[len(classes)]) if len(ev) > len(classes) else 1.0
    return StationaryReport(classes, dists, exact, gap, residuals)
