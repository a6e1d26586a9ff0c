"""Majorization order, T-transforms and Horn's orthostochastic construction.

Probability vectors are plain 1-D float arrays; :func:`as_probability`
validates and clamps them. Order-sensitive operations (``hlp_chain``,
``horn_orthogonal``) expect inputs already sorted descending and padded to a
common length; use :func:`sort_descending` and :func:`pad_to` first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, InvalidProbability, NotMajorized, TargetTooShort

NEG_CLAMP = 1e-14
SUM_TOL = 1e-12
MAJORIZATION_SLACK = 1e-12


def as_probability(p, name: str = "p") -> np.ndarray:
    """Validate a probability vector, clamping tiny negative entries to zero."""
    v = np.array(p, dtype=float).reshape(-1)
    if v.size == 0:
        raise InvalidProbability(f"{name}: probability vector is empty")
    if not np.all(np.isfinite(v)):
        raise InvalidProbability(f"{name}: entries must be finite")
    if np.any(v < -NEG_CLAMP):
        raise InvalidProbability(f"{name}: negative component {v.min():.3e}")
    v[v < 0] = 0.0
    total = v.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidProbability(f"{name}: components sum to {total!r}, not 1")
    return v


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class TTransform:
    """Mix entries ``i`` and ``j`` with weight ``t`` on the diagonal.

    As a matrix it is the identity except for the 2x2 block
    ``[[t, 1-t], [1-t, t]]`` on rows/columns ``(i, j)``.
    """

    i: int
    j: int
    t: float

    def __post_init__(self):
        if self.i == self.j:
            raise IndexOutOfRange(f"T-transform indices must differ, got ({self.i}, {self.j})")
        if min(self.i, self.j) < 0:
            raise IndexOutOfRange(f"negative index in ({self.i}, {self.j})")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")

    def check(self, n: int) -> None:
        if max(self.i, self.j) >= n:
            raise IndexOutOfRange(f"T-transform ({self.i}, {self.j}) out of range for n={n}")

    def matrix(self, n: int) -> np.ndarray:
        self.check(n)
        m = np.eye(n)
        m[self.i, self.i] = m[self.j, self.j] = self.t
        m[self.i, self.j] = m[self.j, self.i] = 1.0 - self.t
        return m


def sort_descending(p) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(sorted, perm)`` with ``sorted[k] == p[perm[k]]``; stable on ties."""
    v = as_probability(p)
    perm = np.argsort(-v, kind="stable")
    return v[perm], perm


def pad_to(p, n: int) -> np.ndarray:
    v = as_probability(p)
    if n < v.size:
        raise TargetTooShort(f"cannot pad length {v.size} vector to {n}")
    return np.concatenate([v, np.zeros(n - v.size)])


def _sorted_padded(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.sort(as_probability(p, "p"))[::-1]
    q = np.sort(as_probability(q, "q"))[::-1]
    n = max(p.size, q.size)
    return pad_to(p, n), pad_to(q, n)


def majorization_margin(p, q) -> float:
    """Minimum over k of (prefix_k(q) - prefix_k(p)); >= 0 iff p is majorized by q."""
    p, q = _sorted_padded(p, q)
    return float(np.min(np.cumsum(q) - np.cumsum(p)))


def majorizes(p, q) -> bool:
    """True iff ``p`` is majorized by ``q`` (``p`` is the more even one)."""
    return majorization_margin(p, q) >= -MAJORIZATION_SLACK


def apply_t(p, t: TTransform) -> np.ndarray:
    v = np.array(p, dtype=float)
    t.check(v.size)
    a, b = v[t.i], v[t.j]
    v[t.i] = t.t * a + (1.0 - t.t) * b
    v[t.j] = (1.0 - t.t) * a + t.t * b
    return v


def replay(q, transforms) -> np.ndarray:
    v = np.array(q, dtype=float)
    for t in transforms:
        v = apply_t(v, t)
    return v


def _require_majorized(p: np.ndarray, q: np.ndarray) -> None:
    if p.size != q.size:
        raise NotMajorized(f"length mismatch {p.size} vs {q.size}; pad first")
    if not majorizes(p, q):
        raise NotMajorized("p is not majorized by q")


def hlp_chain(p, q) -> list[TTransform]:
    """At most N-1 T-transforms taking ``q`` to ``p`` (both sorted, same length).

    Each step picks the last index ``j`` where the working vector exceeds
    ``p`` and the first later index ``k`` where it falls short, then moves
    ``min(v_j - p_j, p_k - v_k)`` of mass from ``j`` to ``k``. Every step pins
    at least one more coordinate to its target.
    """
    p = as_probability(p, "p")
    q = as_probability(q, "q")
    _require_majorized(p, q)
    n = p.size
    v = q.copy()
    tol = 1e-15
    chain: list[TTransform] = []
    for _ in range(n - 1):
        over = np.nonzero(v - p > tol)[0]
        if over.size == 0:
            break
        j = int(over[-1])
        under = np.nonzero(p[j + 1:] - v[j + 1:] > tol)[0]
        if under.size == 0:
            break
        k = j + 1 + int(under[0])
        gap = v[j] - v[k]
        delta = min(v[j] - p[j], p[k] - v[k])
        t = min(max(1.0 - delta / gap, 0.0), 1.0)
        chain.append(TTransform(j, k, float(t)))
        if v[j] - p[j] <= p[k] - v[k]:
            v[k] += v[j] - p[j]
            v[j] = p[j]
        else:
            v[j] -= p[k] - v[k]
            v[k] = p[k]
    return chain


def horn_orthogonal(p, q) -> np.ndarray:
    """Real orthogonal ``O`` with ``(O * O) @ q == p`` (both sorted, same length).

    Works on the symmetric matrix ``W diag(q) W^T`` whose diagonal must end up
    equal to ``p``. At each level the largest remaining diagonal entry ``a``
    is rotated against a partner ``b`` (the last position whose value brackets
    the target from below) so that entry ``a`` hits its target exactly; the
    remaining active block stays diagonal, which makes the recursion valid.
    Rows are finally reordered so row ``m`` carries target ``p[m]``.
    """
    p = as_probability(p, "p")
    q = as_probability(q, "q")
    _require_majorized(p, q)
    n = p.size
    w = np.eye(n)
    v = q.copy()
    active = list(range(n))
    owner = np.empty(n, dtype=int)
    for m in range(n):
        order = sorted(active, key=lambda idx: (-v[idx], idx))
        a = order[0]
        target = p[m]
        owner[m] = a
        active.remove(a)
        if len(order) == 1 or target >= v[a]:
            continue
        # largest position k >= 1 with v[order[k-1]] >= target >= v[order[k]]
        k = len(order) - 1
        for pos in range(len(order) - 1, 0, -1):
            if v[order[pos - 1]] >= target >= v[order[pos]]:
                k = pos
                break
        b = order[k]
        hi, lo = v[a], v[b]
        if hi - lo <= 0.0:
            continue
        c2 = min(max((target - lo) / (hi - lo), 0.0), 1.0)
        c, s = np.sqrt(c2), np.sqrt(1.0 - c2)
        ra, rb = w[a].copy(), w[b].copy()
        w[a] = c * ra - s * rb
        w[b] = s * ra + c * rb
        v[a] = target
        v[b] = hi + lo - target
    return w[owner]


def random_t_transform(n: int, rng: np.random.Generator) -> TTransform:
    i, j = rng.choice(n, size=2, replace=False)
    return TTransform(int(i), int(j), float(rng.uniform(0.0, 1.0)))


def sample_majorized(q, seed: int) -> np.ndarray:
    """A point of the majorization polytope of ``q``: 3N seeded random T-transforms."""
    v = as_probability(q, "q")
    n = v.size
    if n == 1:
        return v
    rng = np.random.default_rng(seed)
    for _ in range(3 * n):
        v = apply_t(v, random_t_transform(n, rng))
    v[v < 0] = 0.0
    return v / v.sum()
