"""Seeded batch exploration of which weight vectors admit distinct-state ensembles,
plus the small coordinate emitters used for Bloch-ball and simplex plots."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .ensembles import (
    DEGENERACY_EPS,
    SUCCESS_RESIDUAL,
    SweepOptions,
    conjecture2_admissible,
    nielsen_ensemble,
    random_density_matrix,
    ratio_sweep,
    uniform_ensemble,
)
from .errors import NonConvergent, NotCertified, ValidationError
from .majorization import pad_to, sample_majorized, uniform
from .serialize import SchemaError, write_csv
from .stochmat import SearchOptions

ALGORITHMS = ("uniform", "nielsen", "ratio-sweep")
OUTCOMES = ("nondegenerate", "degenerate", "nonconvergent", "notcertified", "failed")

TOLERANCE_DEFAULTS = {
    "degeneracy_eps": DEGENERACY_EPS,
    "residual": SUCCESS_RESIDUAL,
    "sweep_tol": 1e-12,
    "certify_tol": 1e-8,
}


@dataclass
class ExploreConfig:
    trials: int
    m_range: tuple[int, int]
    n_range: tuple[int, int]
    algorithms: tuple[str, ...] = ("ratio-sweep",)
    master_seed: int = 0
    tolerances: dict = field(default_factory=dict)
    # fraction of trials whose weights are placed on the excluded boundary
    boundary_fraction: float = 0.0

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise SchemaError("config: 'trials' must be an integer >= 1")
        self.m_range = _int_range(self.m_range, "m_range")
        self.n_range = _int_range(self.n_range, "n_range")
        if self.m_range[0] < 1:
            raise SchemaError("config: 'm_range' must start at 1 or above")
        if self.m_range[1] > self.n_range[0]:
            raise SchemaError("config: need M <= N throughout (max of m_range > min of n_range)")
        if isinstance(self.algorithms, str) or not self.algorithms:
            raise SchemaError("config: 'algorithms' must be a non-empty list")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise SchemaError(f"config: unknown algorithms {bad}; choose from {list(ALGORITHMS)}")
        self.algorithms = tuple(self.algorithms)
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise SchemaError("config: 'master_seed' must be a nonnegative integer")
        if not isinstance(self.tolerances, dict):
            raise SchemaError("config: 'tolerances' must be an object")
        unknown = set(self.tolerances) - set(TOLERANCE_DEFAULTS)
        if unknown:
            raise SchemaError(f"config: unknown tolerance keys {sorted(unknown)}")
        for k, v in self.tolerances.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise SchemaError(f"config: tolerance {k!r} must be a positive number")
        if not isinstance(self.boundary_fraction, (int, float)) or not 0 <= self.boundary_fraction <= 1:
            raise SchemaError("config: 'boundary_fraction' must lie in [0, 1]")

    @classmethod
    def from_dict(cls, obj) -> "ExploreConfig":
        if not isinstance(obj, dict):
            raise SchemaError("config: expected a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise SchemaError(f"config: unknown keys {sorted(unknown)}")
        missing = {"trials", "m_range", "n_range"} - set(obj)
        if missing:
            raise SchemaError(f"config: missing keys {sorted(missing)}")
        return cls(**obj)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, TOLERANCE_DEFAULTS[key]))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m_range"] = list(self.m_range)
        d["n_range"] = list(self.n_range)
        d["algorithms"] = list(self.algorithms)
        return d


def _int_range(r, name: str) -> tuple[int, int]:
    if (
        not isinstance(r, (list, tuple))
        or len(r) != 2
        or not all(isinstance(x, int) and not isinstance(x, bool) for x in r)
        or r[0] > r[1]
    ):
        raise SchemaError(f"config: {name!r} must be [lo, hi] integers with lo <= hi")
    return int(r[0]), int(r[1])


@dataclass
class TrialRecord:
    seed: int
    M: int
    N: int
    lambda_: np.ndarray
    p: np.ndarray
    admissibility: str
    algorithm: str
    outcome: str
    residual: float
    min_pair_gap: float

    FIELDS = ("seed", "M", "N", "lambda", "p", "admissibility", "algorithm",
              "outcome", "residual", "min_pair_gap")

    def row(self) -> list:
        return [self.seed, self.M, self.N, self.lambda_, self.p, self.admissibility,
                self.algorithm, self.outcome, self.residual, self.min_pair_gap]


def classify(residual: float, gap: float, eps: float, residual_tol: float) -> str:
    """Outcome label recomputed from the stored residual and pair gap."""
    if math.isnan(residual) or residual >= residual_tol:
        return "failed"
    return "degenerate" if gap < eps else "nondegenerate"


def _trial_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1, dtype=np.uint64)[0] >> 1)


def _boundary_weights(lam: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Weights whose first M-1 entries carry exactly the mass of the first M-1 eigenvalues."""
    m = lam.size
    head_mass = lam[: m - 1].sum()
    tail = np.zeros(n - m + 1)
    tail[0] = 1.0
    tail = lam[m - 1] * sample_majorized(tail, int(rng.integers(2**32)))
    head = lam[: m - 1].copy()
    if m > 2:
        cand = head_mass * sample_majorized(head / head_mass, int(rng.integers(2**32)))
        if cand.min() >= tail.max():
            head = cand
    p = np.concatenate([head, tail])
    return p / p.sum()


def run_trial(index: int, config: ExploreConfig) -> list[TrialRecord]:
    seed = _trial_seed(config.master_seed, index)
    rng = np.random.default_rng(seed)
    m = int(rng.integers(config.m_range[0], config.m_range[1] + 1))
    n = int(rng.integers(max(m, config.n_range[0]), config.n_range[1] + 1))
    rho = random_density_matrix(m, rng)
    lam = rho.spectrum()
    boundary = m >= 2 and rng.uniform() < config.boundary_fraction
    if boundary:
        sampled_p = _boundary_weights(lam, n, rng)
    else:
        sampled_p = sample_majorized(pad_to(lam, n), int(rng.integers(2**32)))

    eps = config.tol("degeneracy_eps")
    res_tol = config.tol("residual")
    sweep_opts = SweepOptions(
        tol=config.tol("sweep_tol"),
        eps=eps,
        search=SearchOptions(seed=seed, tol=config.tol("certify_tol")),
    )
    records = []
    for algorithm in config.algorithms:
        p = uniform(n) if algorithm == "uniform" else sampled_p
        admissibility = conjecture2_admissible(p, rho)
        residual, gap = float("nan"), float("nan")
        try:
            if algorithm == "uniform":
                out = uniform_ensemble(rho, n, eps)
            elif algorithm == "nielsen":
                out = nielsen_ensemble(rho, p, eps)
            else:
                out = ratio_sweep(rho, p, sweep_opts)
            residual, gap = out.residual, out.min_pair_gap
            outcome = classify(residual, gap, eps, res_tol)
        except NonConvergent:
            outcome = "nonconvergent"
        except NotCertified:
            outcome = "notcertified"
        except ValidationError:
            outcome = "failed"
        records.append(
            TrialRecord(seed, m, n, lam, p, admissibility, algorithm, outcome, residual, gap)
        )
    return records


def run_explore(config: ExploreConfig) -> tuple[list[TrialRecord], dict]:
    records: list[TrialRecord] = []
    for i in range(config.trials):
        records.extend(run_trial(i, config))
    counts: dict = {}
    tally = Counter((r.algorithm, r.admissibility, r.outcome) for r in records)
    for (alg, adm, outcome), c in sorted(tally.items()):
        counts.setdefault(alg, {}).setdefault(adm, {})[outcome] = c
    summary = {
        "config": config.to_dict(),
        "records": len(records),
        "counts": counts,
    }
    return records, summary


def records_csv(records: list[TrialRecord]) -> str:
    return write_csv(list(TrialRecord.FIELDS), (r.row() for r in records))


def bloch_coordinates(state) -> tuple[float, float, float]:
    a, b = complex(state[0]), complex(state[1])
    ab = a * b.conjugate()
    return 2.0 * ab.real, 2.0 * ab.imag, abs(a) ** 2 - abs(b) ** 2


def simplex_xy(v) -> tuple[float, float]:
    """Planar position of a 3-component probability vector in the equilateral simplex
    with corners (0, 0), (1, 0), (1/2, sqrt(3)/2)."""
    return float(v[1] + 0.5 * v[2]), float(np.sqrt(3.0) / 2.0 * v[2])


def simplex_corners(v) -> list[tuple[float, ...]]:
    """All 3! permutations of ``v`` (corners of its majorization polytope) with planar coordinates."""
    rows = []
    for perm in itertools.permutations(range(3)):
        w = np.asarray(v, dtype=float)[list(perm)]
        rows.append((*w, *simplex_xy(w)))
    return rows
