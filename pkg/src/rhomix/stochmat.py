"""Bistochastic matrices: unistochastic images, chain-links and certificates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, NotBistochastic, NotUnitary, PreconditionViolated
from .majorization import TTransform, as_probability
from .numkernel import as_matrix, is_unitary, nearest_unitary, unitarity_residual

ENTRY_TOL = 1e-12
SUM_TOL = 1e-10
CHAIN_LINKS_TOL = 1e-12
CERTIFY_TOL = 1e-8


def as_bistochastic(b, name: str = "B") -> np.ndarray:
    m = np.array(b, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NotBistochastic(f"{name}: expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotBistochastic(f"{name}: entries must be finite")
    if m.min() < -ENTRY_TOL or m.max() > 1.0 + ENTRY_TOL:
        raise NotBistochastic(f"{name}: entries must lie in [0, 1]")
    m = np.clip(m, 0.0, 1.0)
    rows = np.abs(m.sum(axis=1) - 1.0).max()
    cols = np.abs(m.sum(axis=0) - 1.0).max()
    if max(rows, cols) > SUM_TOL:
        raise NotBistochastic(
            f"{name}: row/column sums deviate from 1 by {max(rows, cols):.3e}"
        )
    return m


def from_unitary(u) -> np.ndarray:
    """Entrywise squared moduli of a unitary matrix."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1] or not is_unitary(u, 1e-10):
        raise NotUnitary("from_unitary requires a unitary matrix (tol 1e-10)")
    return np.abs(u) ** 2


def van_der_waerden(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.full((n, n), 1.0 / n)


def t_product(transforms, n: int) -> np.ndarray:
    """Product ``T_k ... T_1`` for ``transforms = [T_1, ..., T_k]``."""
    b = np.eye(n)
    for t in transforms:
        t.check(n)
        ri, rj = b[t.i].copy(), b[t.j]
        b[t.i] = t.t * ri + (1.0 - t.t) * rj
        b[t.j] = (1.0 - t.t) * ri + t.t * rj
    return b


def is_permutation_matrix(b: np.ndarray, tol: float = ENTRY_TOL) -> bool:
    return bool(np.all((np.abs(b) < tol) | (np.abs(b - 1.0) < tol)))


@dataclass(frozen=True)
class ChainLinksReport:
    satisfied: bool
    worst_margin: float
    # (axis, (i, j)) with axis "column" or "row"; set only when violated
    violating_pair: tuple[str, tuple[int, int]] | None = None
    links: tuple[float, ...] | None = None


def _pair_links(b: np.ndarray):
    n = b.shape[0]
    # round-off entries would otherwise surface as links of order sqrt(1e-15)
    b = np.where(b < ENTRY_TOL, 0.0, b)
    for axis, mat in (("column", b), ("row", b.T)):
        for i, j in itertools.combinations(range(n), 2):
            yield axis, (i, j), np.sqrt(mat[:, i] * mat[:, j])


def chain_links(b) -> ChainLinksReport:
    """Check that no link exceeds the sum of the others, for every row and column pair.

    For columns ``(i, j)`` the links are ``sqrt(B[r, i] * B[r, j])`` over rows
    ``r``; the margin is ``sum(links) - 2 * max(links)``. Ties in the worst
    margin resolve to the first pair met (columns before rows, lexicographic).
    """
    b = as_bistochastic(b)
    if b.shape[0] < 2:
        return ChainLinksReport(True, 0.0)
    worst = np.inf
    worst_pair = None
    worst_links = None
    for axis, pair, links in _pair_links(b):
        margin = float(links.sum() - 2.0 * links.max())
        if margin < worst:
            worst, worst_pair, worst_links = margin, (axis, pair), links
    satisfied = worst >= -CHAIN_LINKS_TOL
    if satisfied:
        return ChainLinksReport(True, worst)
    return ChainLinksReport(False, worst, worst_pair, tuple(float(x) for x in worst_links))


@dataclass(frozen=True)
class UnistochasticCertificate:
    verdict: str  # "certified" | "refuted" | "undetermined"
    witness: np.ndarray | None
    residual: float
    chain_links: ChainLinksReport | None = None
    iterations: int = 0


@dataclass
class SearchOptions:
    """Alternating-projection budget for the N > 3 unistochastic search."""

    seed: int = 0
    max_iter: int = 10_000
    restarts: int = 8
    tol: float = CERTIFY_TOL
    # stop a restart early when the residual has not improved by this
    # relative factor over `stall_window` iterations
    stall_window: int = 500
    stall_ratio: float = 0.999


def witness_residual(witness: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.abs(witness) ** 2 - b)))


def _certify_small(b: np.ndarray) -> np.ndarray:
    if b.shape[0] == 1:
        return np.ones((1, 1), dtype=complex)
    a = b[0, 0]
    ca, sa = np.sqrt(a), np.sqrt(b[0, 1])
    return np.array([[ca, sa], [sa, -ca]], dtype=complex)


def triangle_witness(b: np.ndarray) -> np.ndarray:
    """Unitary with moduli ``sqrt(B)`` for a 3x3 B whose first two columns obey chain-links.

    The first column is real; the second gets phases ``(0, mu1, mu2)`` chosen so
    the links ``L_r = sqrt(B[r,0] B[r,1])`` close into a triangle
    ``L1 + L2 e^{i mu1} + L3 e^{i mu2} = 0``; the third column is the
    orthogonal complement of the first two.
    """
    col0 = np.sqrt(b[:, 0]).astype(complex)
    mod1 = np.sqrt(b[:, 1])
    links = np.sqrt(b[:, 0] * b[:, 1])
    l1, l2, l3 = links
    if l1 * l2 > 0.0:
        cos_mu1 = (l3 * l3 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
        mu1 = -np.arccos(np.clip(cos_mu1, -1.0, 1.0))
    else:
        mu1 = 0.0
    u = l2 * np.exp(1j * mu1)
    w = -l1 - u
    mu2 = float(np.angle(w)) if abs(w) > 0.0 else 0.0
    col1 = mod1 * np.exp(1j * np.array([0.0, mu1, mu2]))
    col2 = np.conj(np.cross(col0, col1))
    norm = np.linalg.norm(col2)
    if norm > 0.0:
        col2 = col2 / norm
    return np.column_stack([col0, col1, col2])


def _alternating_projections(b: np.ndarray, opts: SearchOptions):
    n = b.shape[0]
    moduli = np.sqrt(b)
    best = (np.inf, None, 0)
    seeds = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    for restart, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        x = moduli * np.exp(2j * np.pi * rng.uniform(size=(n, n)))
        history = []
        res = np.inf
        u = None
        for it in range(1, opts.max_iter + 1):
            u = nearest_unitary(x)
            res = witness_residual(u, b)
            if res < opts.tol:
                break
            history.append(res)
            if len(history) > opts.stall_window:
                if res > opts.stall_ratio * history[-opts.stall_window - 1]:
                    break
            x = moduli * np.exp(1j * np.angle(u))
        if res < best[0]:
            best = (res, u, it)
        if res < opts.tol:
            break
    return best


def _support_blocks(b: np.ndarray, tol: float = ENTRY_TOL):
    """Connected components of the row/column support graph as (rows, cols) pairs."""
    n = b.shape[0]
    seen_rows: set[int] = set()
    blocks = []
    for start in range(n):
        if start in seen_rows:
            continue
        rows, cols = {start}, set()
        frontier = [("r", start)]
        while frontier:
            kind, idx = frontier.pop()
            if kind == "r":
                for c in np.nonzero(b[idx] > tol)[0]:
                    if int(c) not in cols:
                        cols.add(int(c))
                        frontier.append(("c", int(c)))
            else:
                for r in np.nonzero(b[:, idx] > tol)[0]:
                    if int(r) not in rows:
                        rows.add(int(r))
                        frontier.append(("r", int(r)))
        seen_rows |= rows
        blocks.append((sorted(rows), sorted(cols)))
    return blocks


def _witness(b: np.ndarray, opts: SearchOptions):
    n = b.shape[0]
    if is_permutation_matrix(b):
        return np.round(b).astype(complex), 0
    blocks = _support_blocks(b)
    if len(blocks) > 1 and all(len(r) == len(c) for r, c in blocks):
        w = np.zeros((n, n), dtype=complex)
        total = 0
        for rows, cols in blocks:
            sub, iters = _witness(b[np.ix_(rows, cols)], opts)
            if sub is None:
                return None, total + iters
            w[np.ix_(rows, cols)] = sub
            total += iters
        return w, total
    if n <= 2:
        return _certify_small(b), 0
    if n == 3:
        return triangle_witness(b), 0
    _, w, iters = _alternating_projections(b, opts)
    return w, iters


def certify_unistochastic(b, opts: SearchOptions | None = None) -> UnistochasticCertificate:
    """Decide (or try to decide) whether ``B`` is unistochastic.

    N <= 2 is always certified; N = 3 is decided by chain-links with an
    explicit phase construction; N > 3 is refuted on chain-links failure and
    otherwise searched by alternating projections between the unitary group
    and the set of matrices with moduli ``sqrt(B)``. A B that splits into
    independent blocks is certified block by block.
    """
    b = as_bistochastic(b)
    opts = opts or SearchOptions()
    n = b.shape[0]
    report = chain_links(b) if n >= 3 else None
    if report is not None and not report.satisfied:
        return UnistochasticCertificate("refuted", None, np.inf, report)

    w, iters = _witness(b, opts)
    if w is None:
        return UnistochasticCertificate("undetermined", None, np.inf, report, iters)
    res = witness_residual(w, b)
    ok = res < opts.tol and unitarity_residual(w) < CERTIFY_TOL
    verdict = "certified" if ok else "undetermined"
    return UnistochasticCertificate(verdict, w, res, report, iters)


def block_structure_check(b, p, q, k: int) -> bool:
    """Whether ``B`` splits as ``diag(D1, D2)`` with ``D1`` of size ``(k-1) x (k-1)``.

    ``k`` follows the 1-based convention: the prefix sums of ``p`` and ``q``
    agree through entry ``k-1`` and ``q[k-2] > q[k-1]`` (0-based) is the gap.
    """
    b = as_bistochastic(b)
    p = as_probability(p, "p")
    q = as_probability(q, "q")
    n = b.shape[0]
    if p.size != n or q.size != n:
        raise PreconditionViolated("B, p and q must share the same dimension")
    if not 2 <= k <= n:
        raise IndexOutOfRange(f"k must lie in [2, {n}], got {k}")
    if np.max(np.abs(b @ q - p)) > 1e-10:
        raise PreconditionViolated("B @ q does not reproduce p within 1e-10")
    h = k - 1
    if abs(p[:h].sum() - q[:h].sum()) > 1e-12:
        raise PreconditionViolated(f"prefix sums of p and q differ at k-1={h}")
    if not q[h - 1] > q[h] + 1e-12:
        raise PreconditionViolated(f"no gap q[{h - 1}] > q[{h}]")
    off = max(np.max(b[:h, h:], initial=0.0), np.max(b[h:, :h], initial=0.0))
    return bool(off < 1e-10)


def _permutation_matrix(perm) -> np.ndarray:
    n = len(perm)
    m = np.zeros((n, n))
    m[np.arange(n), perm] = 1.0
    return m


def sample_feasible_bistochastic(p, q, seed: int, iterations: int = 2000):
    """Some bistochastic ``B`` with ``B @ q == p``, or ``None`` if the attempt fails.

    Start from a random convex combination of permutation matrices, then
    alternate least-squares projection onto the affine constraints (unit row
    and column sums, ``B q = p``) with clipping to the nonnegative orthant.
    """
    p = as_probability(p, "p")
    q = as_probability(q, "q")
    n = p.size
    rng = np.random.default_rng(seed)
    count = n + 2
    weights = rng.dirichlet(np.ones(count))
    b = sum(w * _permutation_matrix(rng.permutation(n)) for w in weights)

    # constraints on vec(B) (row-major): row sums, column sums, B q = p
    rows = []
    rhs = []
    for i in range(n):
        r = np.zeros((n, n))
        r[i, :] = 1.0
        rows.append(r.ravel())
        rhs.append(1.0)
    for j in range(n):
        r = np.zeros((n, n))
        r[:, j] = 1.0
        rows.append(r.ravel())
        rhs.append(1.0)
    for i in range(n):
        r = np.zeros((n, n))
        r[i, :] = q
        rows.append(r.ravel())
        rhs.append(p[i])
    a = np.array(rows)
    target = np.array(rhs)
    a_pinv = np.linalg.pinv(a)

    x = b.ravel()
    for _ in range(iterations):
        x = x - a_pinv @ (a @ x - target)
        if x.min() >= -1e-15:
            break
        x = np.clip(x, 0.0, None)
    b = x.reshape(n, n)
    if b.min() < -1e-10:
        return None
    b = np.clip(b, 0.0, None)
    if np.max(np.abs(b.sum(axis=0) - 1)) > 1e-10 or np.max(np.abs(b.sum(axis=1) - 1)) > 1e-10:
        return None
    if np.max(np.abs(b @ q - p)) > 1e-10:
        return None
    return b
