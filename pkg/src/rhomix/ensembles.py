"""Density matrices and the pure-state ensembles that realize them.

Every construction works in the eigenbasis of the density matrix: given an
N x N unitary ``U`` whose first M columns are used, the unnormalized states
are ``sum_j U[i, j] sqrt(lambda_j) e_j`` with weights
``p_i = sum_j |U[i, j]|^2 lambda_j``. The constructions differ only in how
they choose ``U``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidDensityMatrix,
    NonConvergent,
    NotCertified,
    NotMajorized,
    NotUnitary,
    PureState,
    TooFewPoints,
    ZeroWeight,
)
from .majorization import (
    TTransform,
    as_probability,
    horn_orthogonal,
    majorizes,
    pad_to,
    sort_descending,
)
from .numkernel import as_matrix, hermitian_eig, is_unitary, random_unitary
from .stochmat import SearchOptions, UnistochasticCertificate, certify_unistochastic

RANK_TOL = 1e-12
TRACE_TOL = 1e-12
ZERO_WEIGHT = 1e-14
DEGENERACY_EPS = 1e-8
SUCCESS_RESIDUAL = 1e-8


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix with a cached eigenbasis.

    ``eigenvalues``/``eigenvectors`` hold only the M nonzero eigenvalues
    (descending) and their eigenvectors, where M is the rank.
    """

    def __init__(self, matrix):
        try:
            m = as_matrix(matrix)
        except ValueError as exc:
            raise InvalidDensityMatrix(str(exc)) from exc
        if m.shape[0] != m.shape[1]:
            raise InvalidDensityMatrix(f"density matrix must be square, got {m.shape}")
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > 1e-10:
            raise InvalidDensityMatrix(f"not Hermitian: max |rho - rho^H| = {asym:.3e}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrix(f"trace is {tr!r}, not 1")
        dec = hermitian_eig(m)
        if dec.eigenvalues[-1] < -RANK_TOL:
            raise InvalidDensityMatrix(
                f"not positive semidefinite: eigenvalue {dec.eigenvalues[-1]:.3e}"
            )
        rank = int(np.sum(dec.eigenvalues > RANK_TOL))
        self._matrix = m
        self._matrix.setflags(write=False)
        self.rank = rank
        self.eigenvalues = dec.eigenvalues[:rank].copy()
        self.eigenvectors = dec.eigenvectors[:, :rank].copy()
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @classmethod
    def diag(cls, values) -> "DensityMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.rank == 1

    def spectrum(self) -> np.ndarray:
        """Nonzero eigenvalues renormalized to an exact probability vector."""
        lam = self.eigenvalues
        return lam / lam.sum()

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, rank={self.rank}, eigenvalues={self.eigenvalues})"


def normalize_phase(state: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first largest-modulus entry is real and >= 0."""
    mod = np.abs(state)
    k = int(np.nonzero(mod >= mod.max() - 1e-12)[0][0])
    if mod[k] == 0.0:
        return state
    return state * (np.conj(state[k]) / mod[k])


@dataclass
class PureEnsemble:
    weights: np.ndarray
    states: np.ndarray  # shape (N, dim); row i is |psi_i>

    def __post_init__(self):
        self.weights = as_probability(self.weights, "weights")
        self.states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        if self.states.shape[0] != self.weights.size:
            raise DimensionMismatch(
                f"{self.weights.size} weights but {self.states.shape[0]} states"
            )
        norms = np.linalg.norm(self.states, axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > 1e-10)[0]
        if bad.size:
            raise DimensionMismatch(f"state {int(bad[0])} has norm {norms[bad[0]]!r}, not 1")

    def __len__(self) -> int:
        return self.weights.size


@dataclass
class ConstructionOutcome:
    ensemble: PureEnsemble
    bistochastic_used: np.ndarray
    unitary_used: np.ndarray
    degenerate: bool
    residual: float
    min_pair_gap: float
    certificate: UnistochasticCertificate | None = None
    transforms: list[TTransform] = field(default_factory=list)
    sweeps: int = 0


def mix(ensemble: PureEnsemble) -> np.ndarray:
    s = ensemble.states
    return (s.T * ensemble.weights) @ s.conj()


def eigenensemble(rho: DensityMatrix) -> PureEnsemble:
    states = np.array([normalize_phase(v) for v in rho.eigenvectors.T])
    return PureEnsemble(rho.eigenvalues / rho.eigenvalues.sum(), states)


def pair_gaps(ensemble: PureEnsemble) -> np.ndarray:
    """Matrix of ``1 - |<psi_i|psi_j>|`` (diagonal set to +inf)."""
    s = ensemble.states
    gaps = 1.0 - np.abs(s.conj() @ s.T)
    np.fill_diagonal(gaps, np.inf)
    return gaps


def min_pair_gap(ensemble: PureEnsemble) -> float:
    if len(ensemble) < 2:
        return float("inf")
    return float(pair_gaps(ensemble).min())


def is_degenerate(ensemble: PureEnsemble, eps: float = DEGENERACY_EPS) -> bool:
    """True iff two states coincide up to a global phase."""
    return min_pair_gap(ensemble) < eps


def max_ray_multiplicity(ensemble: PureEnsemble, eps: float = DEGENERACY_EPS) -> int:
    """Size of the largest group of states lying on a common ray."""
    gaps = pair_gaps(ensemble)
    same = gaps < eps
    n = len(ensemble)
    label = list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if same[i, j]:
                a, b = label[i], label[j]
                label = [a if x == b else x for x in label]
    return max(label.count(x) for x in set(label))


def schrodinger_states(
    rho: DensityMatrix, u, eps: float = DEGENERACY_EPS
) -> ConstructionOutcome:
    """Ensemble from an N x N unitary; only its first M columns are used."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1] or not is_unitary(u, 1e-10):
        raise NotUnitary("mixing matrix must be unitary within 1e-10")
    m = rho.rank
    n = u.shape[0]
    if n < m:
        raise DimensionMismatch(f"unitary size {n} is smaller than the rank {m}")
    lam = rho.eigenvalues
    coeffs = u[:, :m] * np.sqrt(lam)
    weights = np.sum(np.abs(coeffs) ** 2, axis=1)
    small = np.nonzero(weights < ZERO_WEIGHT)[0]
    if small.size:
        raise ZeroWeight(f"weight p[{int(small[0])}] = {weights[small[0]]:.3e} below 1e-14")
    ambient = coeffs @ rho.eigenvectors.T
    states = ambient / np.sqrt(weights)[:, None]
    states = states / np.linalg.norm(states, axis=1)[:, None]
    states = np.array([normalize_phase(s) for s in states])
    ensemble = PureEnsemble(weights / weights.sum(), states)
    residual = float(np.max(np.abs(mix(ensemble) - rho.matrix)))
    gap = min_pair_gap(ensemble)
    return ConstructionOutcome(
        ensemble=ensemble,
        bistochastic_used=np.abs(u) ** 2,
        unitary_used=u,
        degenerate=gap < eps,
        residual=residual,
        min_pair_gap=gap,
    )


def fourier_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def uniform_ensemble(rho: DensityMatrix, n: int, eps: float = DEGENERACY_EPS) -> ConstructionOutcome:
    """N equally weighted states spread over a closed orbit of phases.

    State k has eigenbasis components ``sqrt(lambda_j) exp(2 pi i j k / N)``,
    i.e. integer frequencies ``0..M-1`` sampled at the N-th roots of unity.
    """
    if rho.is_pure:
        raise PureState("a pure state admits no nontrivial uniform ensemble")
    if n < rho.rank:
        raise TooFewPoints(f"need N >= M = {rho.rank}, got {n}")
    return schrodinger_states(rho, fourier_matrix(n), eps)


def _padded_spectrum(rho: DensityMatrix, n: int) -> np.ndarray:
    if n < rho.rank:
        raise NotMajorized(f"{n} weights cannot be majorized by a rank-{rho.rank} spectrum")
    return pad_to(rho.spectrum(), n)


def _check_weights(p: np.ndarray, lam: np.ndarray) -> None:
    if not majorizes(p, lam):
        raise NotMajorized("p is not majorized by the eigenvalue vector")
    small = np.nonzero(p <= ZERO_WEIGHT)[0]
    if small.size:
        raise ZeroWeight(f"p[{int(small[0])}] = {p[small[0]]:.3e} is not positive")


def _unsort_rows(rows_sorted: np.ndarray, perm: np.ndarray) -> np.ndarray:
    out = np.empty_like(rows_sorted)
    out[perm] = rows_sorted
    return out


def nielsen_ensemble(rho: DensityMatrix, p, eps: float = DEGENERACY_EPS) -> ConstructionOutcome:
    """Ensemble with weights ``p`` through Horn's orthostochastic matrix."""
    p = as_probability(p)
    lam = _padded_spectrum(rho, p.size)
    _check_weights(p, lam)
    ps, perm = sort_descending(p)
    o = horn_orthogonal(ps, lam)
    return schrodinger_states(rho, _unsort_rows(o, perm).astype(complex), eps)


@dataclass
class SweepOptions:
    max_sweeps: int = 10_000
    tol: float = 1e-12
    eps: float = DEGENERACY_EPS
    search: SearchOptions = field(default_factory=SearchOptions)


def _ratio_t(a: float, b: float, pa: float, pb: float) -> float:
    """t in [0, 1] making the mixed pair satisfy ``pa * b' == pb * a'``."""
    coeff = (b - a) * (pa + pb)
    rhs = pb * b - pa * a
    if abs(coeff) <= 1e-300 or (abs(coeff) < 1e-15 and abs(rhs) < 1e-15):
        return 1.0
    return min(max(rhs / coeff, 0.0), 1.0)


def ratio_sweep_matrix(p, lam, max_sweeps: int = 10_000, tol: float = 1e-12):
    """Bistochastic ``B`` with ``B @ lam == p`` from repeated adjacent ratio-matching sweeps.

    Both vectors sorted descending and of equal length. Returns
    ``(B, transforms, sweeps)``; identity steps (t == 1) are not recorded.
    Raises :class:`NonConvergent` when the budget runs out.
    """
    p = np.asarray(p, dtype=float)
    v = [float(x) for x in lam]
    target = [float(x) for x in p]
    n = len(v)
    b = np.eye(n)
    transforms: list[TTransform] = []
    dist = max(abs(x - y) for x, y in zip(v, target))
    sweeps = 0
    while dist >= tol:
        if sweeps >= max_sweeps:
            raise NonConvergent(
                f"ratio sweep did not converge in {max_sweeps} sweeps "
                f"(distance {dist:.3e})",
                sweeps=sweeps,
                distance=dist,
            )
        sweeps += 1
        for k in range(1, n):
            a, c = v[k - 1], v[k]
            t = _ratio_t(a, c, target[k - 1], target[k])
            if t == 1.0:
                continue
            s = 1.0 - t
            v[k - 1] = t * a + s * c
            v[k] = s * a + t * c
            ra, rc = b[k - 1].copy(), b[k]
            b[k - 1] = t * ra + s * rc
            b[k] = s * ra + t * rc
            transforms.append(TTransform(k - 1, k, t))
        dist = max(abs(x - y) for x, y in zip(v, target))
    return b, transforms, sweeps


def ratio_sweep(
    rho: DensityMatrix, p, opts: SweepOptions | None = None
) -> ConstructionOutcome:
    """Ensemble with weights ``p`` from the limit of ratio-matching T-transform sweeps.

    Each sweep runs over adjacent pairs ``(k-1, k)`` of the working vector
    (initialised to the eigenvalues) and picks the T-transform that makes
    ``v[k]/v[k-1]`` equal ``p[k]/p[k-1]``. The accumulated product must then
    be certified unistochastic before a unitary, and hence an ensemble, exists.
    """
    opts = opts or SweepOptions()
    p = as_probability(p)
    lam = _padded_spectrum(rho, p.size)
    _check_weights(p, lam)
    ps, perm = sort_descending(p)
    b, transforms, sweeps = ratio_sweep_matrix(ps, lam, opts.max_sweeps, opts.tol)
    cert = certify_unistochastic(b, opts.search)
    if cert.verdict != "certified":
        raise NotCertified(
            f"sweep product not certified unistochastic ({cert.verdict})",
            certificate=cert,
            bistochastic=b,
        )
    outcome = schrodinger_states(rho, _unsort_rows(cert.witness, perm), opts.eps)
    outcome.bistochastic_used = _unsort_rows(b, perm)
    outcome.certificate = cert
    outcome.transforms = transforms
    outcome.sweeps = sweeps
    return outcome


ADMISSIBLE = "admissible"
EXCLUDED_PURE = "excluded_pure"
EXCLUDED_BOUNDARY = "excluded_boundary"
BOUNDARY_DEGENERATE_GAP = "boundary_degenerate_gap"


def conjecture2_admissible(p, rho: DensityMatrix) -> str:
    """Classify ``p`` for distinct-state ensembles of ``rho``.

    The excluded boundary is where the first M-1 sorted weights carry exactly
    the mass of the first M-1 eigenvalues. When that happens with
    ``lambda_{M-1} == lambda_M`` the case is reported separately.
    """
    p = as_probability(p)
    lam = rho.spectrum()
    n = max(p.size, lam.size)
    if not majorizes(p, lam):
        raise NotMajorized("p is not majorized by the eigenvalue vector")
    m = rho.rank
    if m == 1:
        return EXCLUDED_PURE
    ps = np.sort(pad_to(p, n))[::-1]
    if abs(ps[: m - 1].sum() - lam[: m - 1].sum()) > 1e-12:
        return ADMISSIBLE
    if lam[m - 2] > lam[m - 1] + 1e-12:
        return EXCLUDED_BOUNDARY
    return BOUNDARY_DEGENERATE_GAP


def random_density_matrix(
    m: int, rng: np.random.Generator, dim: int | None = None
) -> DensityMatrix:
    """Rank-m state: Dirichlet(1) spectrum conjugated by a Haar unitary."""
    dim = m if dim is None else dim
    if dim < m:
        raise DimensionMismatch(f"ambient dimension {dim} below rank {m}")
    lam = np.zeros(dim)
    lam[:m] = rng.dirichlet(np.ones(m))
    # floor keeps every sampled eigenvalue well above the rank cutoff
    lam[:m] = np.maximum(lam[:m], 1e-9)
    lam /= lam.sum()
    u = random_unitary(dim, rng)
    rho = (u * lam) @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return DensityMatrix(rho)
