# --- Python Standard Library Imports ---
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

# --- Third-Party Library Imports ---
import numpy as np

# --- Local Application Imports ---
from .conf import spectral_setting
from .exceptions import DegenerateWeights, DimensionMismatch, ValidationError
from .fourier_service import SpectrumApprox, transfer_sum, union_spectrum_mass, wb_eval
from .hadamard_service import HadamardTriple
from .lattice_service import Vector, to_vector
from .utils import chunk_seeds, format_vector, split_count, with_stage_timing, worker_pool

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

# Below this total weight a state has no admissible transition.
_DEGENERATE = 1e-15

KINDS = ("cycle", "subspace", "union", "full", "empty")


@dataclass(frozen=True)
class InvariantSetSpec:
    """
    A closed invariant set F described by a cycle, a translate R^r × {y0}, a union of
    such sets, the whole space or the empty set.
    """
    kind: str
    points: Tuple[Vector, ...] = ()
    r: int = 0
    y0: Vector = ()
    members: Tuple["InvariantSetSpec", ...] = ()
    tol: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown invariant set kind '{self.kind}', expected one of {KINDS}")
        if self.kind == "cycle" and not self.points:
            raise ValidationError("a cycle set needs at least one point")
        if self.kind == "union" and not self.members:
            raise ValidationError("a union needs members")
        if self.kind == "subspace":
            if isinstance(self.r, bool) or not isinstance(self.r, int) or self.r < 1:
                raise ValidationError(f"a subspace set needs an integer r >= 1, got {self.r!r}")
            if not self.y0:
                raise ValidationError("a subspace set needs y0 with d - r >= 1 entries")

    @classmethod
    def from_cycle(cls, cycle, tol: Optional[float] = None) -> "InvariantSetSpec":
        word = "".join(str(i) for i in cycle.indices)
        return cls(kind="cycle", points=tuple(cycle.points), tol=tol, label=f"cycle[{word}]")

    @classmethod
    def subspace(cls, r: int, y0: Sequence, tol: Optional[float] = None) -> "InvariantSetSpec":
        y0 = to_vector(y0)
        return cls(kind="subspace", r=r, y0=y0, tol=tol, label=f"R^{r}x{{{','.join(format_vector(y0))}}}")

    @property
    def tolerance(self) -> float:
        if self.tol is not None:
            return self.tol
        if self.kind == "cycle":
            return spectral_setting("CYCLE_DIST_TOL")
        return spectral_setting("SUBSPACE_DIST_TOL")

    def distance(self, states: np.ndarray) -> np.ndarray:
        """Euclidean distance from each state (last axis) to F."""
        states = np.asarray(states, dtype=float)
        if self.kind == "full":
            return np.zeros(states.shape[:-1])
        if self.kind == "empty":
            return np.full(states.shape[:-1], np.inf)
        if self.kind == "cycle":
            points = np.array([[float(v) for v in p] for p in self.points])
            if points.shape[1] != states.shape[-1]:
                raise DimensionMismatch("cycle points and states differ in dimension")
            gaps = np.linalg.norm(states[..., None, :] - points, axis=-1)
            return gaps.min(axis=-1)
        if self.kind == "subspace":
            if states.shape[-1] != self.r + len(self.y0):
                raise DimensionMismatch(f"states of dimension {states.shape[-1]} but r + len(y0) = "
                                        f"{self.r + len(self.y0)}")
            target = np.array([float(v) for v in self.y0])
            return np.linalg.norm(states[..., self.r:] - target, axis=-1)
        return np.min(np.stack([m.distance(states) for m in self.members]), axis=0)

    def tail_hits(self, tail_states: np.ndarray) -> np.ndarray:
        """Paths whose mean distance over the tail states is below the tolerance."""
        if self.kind == "union":
            return np.any(np.stack([m.tail_hits(tail_states) for m in self.members]), axis=0)
        if self.kind == "full":
            return np.ones(tail_states.shape[0], dtype=bool)
        if self.kind == "empty":
            return np.zeros(tail_states.shape[0], dtype=bool)
        return self.distance(tail_states).mean(axis=1) < self.tolerance

    def to_dict(self) -> Dict:
        data = {"kind": self.kind, "label": self.label, "tol": self.tolerance if self.kind in ("cycle", "subspace") else None}
        if self.kind == "cycle":
            data["points"] = [format_vector(p) for p in self.points]
        if self.kind == "subspace":
            data.update(r=self.r, y0=format_vector(self.y0))
        if self.kind == "union":
            data["members"] = [m.to_dict() for m in self.members]
        return data


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    start: np.ndarray
    n_steps: int
    n_paths: int
    seed: int
    final_states: np.ndarray
    words: np.ndarray
    tail_states: np.ndarray
    max_partition_residual: float
    classification: Optional[np.ndarray] = None
    labels: Tuple[str, ...] = ()

    def cylinder_frequency(self, prefix: Sequence[int]) -> float:
        """Empirical probability of the cylinder [l_1 … l_k] (digit indices)."""
        prefix = np.asarray(prefix, dtype=self.words.dtype)
        return float(np.mean(np.all(self.words[:, :len(prefix)] == prefix, axis=1)))

    def classify(self, specs: Sequence[InvariantSetSpec]) -> "PathEnsemble":
        """Label each path with the first set it converges to (-1 for none)."""
        labels = np.full(self.n_paths, -1, dtype=np.int64)
        for k, spec in reversed(list(enumerate(specs))):
            labels[spec.tail_hits(self.tail_states)] = k
        return replace(self, classification=labels, labels=tuple(s.label or s.kind for s in specs))


def _simulate_chunk(x: np.ndarray, triple: HadamardTriple, n_steps: int, tail_length: int, count: int,
                    seed_sequence: np.random.SeedSequence):
    rng = np.random.default_rng(seed_sequence)
    S_inverse_t = triple.S.inverse_array(1).T
    digits = triple.L.as_array().astype(float)
    N = triple.N
    states = np.tile(x, (count, 1))
    words = np.empty((count, n_steps), dtype=np.int16)
    tail = np.empty((count, tail_length, len(x)))
    rows = np.arange(count)
    worst = 0.0
    for step in range(n_steps):
        images = (states[:, None, :] + digits[None, :, :]) @ S_inverse_t
        weights = wb_eval(triple.B, images)
        totals = weights.sum(axis=1)
        if np.any(totals < _DEGENERATE):
            raise DegenerateWeights(f"all transition weights vanish at step {step}")
        worst = max(worst, float(np.max(np.abs(totals - 1.0))))
        # Inverse CDF over the digits in their fixed order.
        cdf = np.cumsum(weights / totals[:, None], axis=1)
        choice = np.minimum((rng.random(count)[:, None] >= cdf).sum(axis=1), N - 1)
        states = images[rows, choice]
        words[:, step] = choice
        if step >= n_steps - tail_length:
            tail[:, step - (n_steps - tail_length)] = states
    return states, words, tail, worst


@with_stage_timing("simulate_paths")
def simulate_paths(x: Sequence[float], triple: HadamardTriple, n_steps: Optional[int] = None,
                   n_paths: Optional[int] = None, seed: Optional[int] = None,
                   stream: Tuple[int, ...] = ()) -> PathEnsemble:
    """
    Paths of the Markov chain that moves y to σ_l(y) with probability W_B(σ_l y).
    Chunks are seeded by chunk index so the ensemble does not depend on the worker count.
    """
    n_steps = spectral_setting("STEPS") if n_steps is None else n_steps
    n_paths = spectral_setting("PATHS") if n_paths is None else n_paths
    seed = spectral_setting("SEED") if seed is None else seed
    if n_steps < 1 or n_paths < 1:
        raise ValidationError(f"n_steps and n_paths must be >= 1, got {n_steps} and {n_paths}")
    x = np.asarray(x, dtype=float)
    if x.shape != (triple.dim,):
        raise DimensionMismatch(f"start point must have dimension {triple.dim}")

    tail_length = math.ceil(n_steps / 4)
    sizes = split_count(n_paths)
    seeds = chunk_seeds(seed, len(sizes), *stream)
    chunks = worker_pool.map(
        lambda job: _simulate_chunk(x, triple, n_steps, tail_length, *job),
        list(zip(sizes, seeds)),
    )
    worst = max(c[3] for c in chunks)
    if worst > 1e-12:
        logger.warning(f"Transition weights deviate from 1 by up to {worst:.3e}; is the triple Hadamard?")
    return PathEnsemble(
        start=x,
        n_steps=n_steps,
        n_paths=n_paths,
        seed=seed,
        final_states=np.concatenate([c[0] for c in chunks]),
        words=np.concatenate([c[1] for c in chunks]),
        tail_states=np.concatenate([c[2] for c in chunks]),
        max_partition_residual=worst,
    )


@dataclass(frozen=True)
class HitEstimate:
    estimate: float
    stderr: float
    n_paths: int
    ambiguous_fraction: float

    @property
    def dichotomy_ok(self) -> bool:
        # Tails should be either clearly inside F or clearly away from it.
        return self.ambiguous_fraction < 0.01

    def to_dict(self) -> Dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "n_paths": self.n_paths,
            "ambiguous_fraction": self.ambiguous_fraction,
            "dichotomy_ok": self.dichotomy_ok,
        }


def _binomial(hits: np.ndarray) -> Tuple[float, float]:
    p = float(np.mean(hits))
    return p, math.sqrt(max(p * (1 - p), 0.0) / len(hits))


def _estimate_from_hits(hits: np.ndarray, distances: np.ndarray, tol: float) -> HitEstimate:
    if not len(hits):
        return HitEstimate(estimate=0.0, stderr=0.0, n_paths=0, ambiguous_fraction=0.0)
    estimate, stderr = _binomial(hits)
    ambiguous = float(np.mean((distances >= tol) & (distances < 100 * tol)))
    return HitEstimate(estimate=estimate, stderr=stderr, n_paths=len(hits), ambiguous_fraction=ambiguous)


def estimate_hF(x: Sequence[float], triple: HadamardTriple, F: InvariantSetSpec, n_steps: Optional[int] = None,
                n_paths: Optional[int] = None, seed: Optional[int] = None, ensemble: Optional[PathEnsemble] = None,
                stream: Tuple[int, ...] = ()) -> HitEstimate:
    """Estimate of h_F(x) = P_x(N(F)) from the tails of simulated paths, with a binomial stderr."""
    n_paths = n_paths or spectral_setting("PATHS")
    if F.kind in ("full", "empty"):
        return HitEstimate(estimate=1.0 if F.kind == "full" else 0.0, stderr=0.0, n_paths=n_paths,
                           ambiguous_fraction=0.0)
    ensemble = ensemble or simulate_paths(x, triple, n_steps, n_paths, seed, stream)
    distances = F.distance(ensemble.tail_states).mean(axis=1)
    return _estimate_from_hits(F.tail_hits(ensemble.tail_states), distances, F.tolerance)


@dataclass(frozen=True)
class RuelleReport:
    residual: float
    sigma: float
    weights: Tuple[float, ...]
    image_estimates: Tuple[HitEstimate, ...]
    start_estimate: HitEstimate

    @property
    def passed(self) -> bool:
        return self.residual <= 3 * self.sigma + 1e-12

    def to_dict(self) -> Dict:
        return {
            "residual": self.residual,
            "sigma": self.sigma,
            "passed": self.passed,
            "weights": list(self.weights),
            "image_estimates": [e.to_dict() for e in self.image_estimates],
            "start_estimate": self.start_estimate.to_dict(),
        }


def _stratified_ruelle(x: np.ndarray, triple: HadamardTriple, F: InvariantSetSpec,
                       ensemble: PathEnsemble) -> RuelleReport:
    """
    Reuses one ensemble from x: the paths whose first digit is l continue as paths
    from σ_l x, so their hit frequency estimates ĥ_F(σ_l x).
    """
    if not np.allclose(ensemble.start, x):
        raise ValidationError("the ensemble was simulated from a different start point")
    weights = wb_eval(triple.B, (x + triple.L.as_array()) @ triple.S.inverse_array(1).T)
    hits = F.tail_hits(ensemble.tail_states)
    if F.kind in ("full", "empty"):
        distances = np.zeros(len(hits))
        tol = 1.0
    else:
        distances = F.distance(ensemble.tail_states).mean(axis=1)
        tol = F.tolerance
    first = ensemble.words[:, 0]
    estimates = tuple(
        _estimate_from_hits(hits[first == index], distances[first == index], tol) for index in range(triple.N)
    )
    start = _estimate_from_hits(hits, distances, tol)
    # A digit no path took says nothing about h_F there: pooled estimate, widest error.
    estimates = tuple(
        e if e.n_paths else HitEstimate(estimate=start.estimate, stderr=1.0, n_paths=0, ambiguous_fraction=0.0)
        for e in estimates
    )
    image_sum = float(sum(w * e.estimate for w, e in zip(weights, estimates)))
    # Treated as independent; the positive correlation makes this conservative.
    sigma = math.sqrt(sum((w * e.stderr) ** 2 for w, e in zip(weights, estimates)) + start.stderr ** 2)
    return RuelleReport(
        residual=abs(image_sum - start.estimate),
        sigma=sigma,
        weights=tuple(float(w) for w in weights),
        image_estimates=estimates,
        start_estimate=start,
    )


def ruelle_residual(x: Sequence[float], triple: HadamardTriple, F: InvariantSetSpec, n_steps: Optional[int] = None,
                    n_paths: Optional[int] = None, seed: Optional[int] = None,
                    ensemble: Optional[PathEnsemble] = None) -> RuelleReport:
    """
    |Σ_l W_B(σ_l x) ĥ_F(σ_l x) - ĥ_F(x)|.

    Without an ensemble every point gets its own independent estimate (N + 1
    simulations). With an ensemble started at x the image estimates come from
    the paths stratified by their first digit, so no new paths are drawn.
    For F the whole space this is exactly the partition residual.
    """
    x = np.asarray(x, dtype=float)
    if ensemble is not None:
        return _stratified_ruelle(x, triple, F, ensemble)
    estimates: List[HitEstimate] = []

    def h(images: np.ndarray) -> np.ndarray:
        for index, image in enumerate(images):
            estimates.append(estimate_hF(image, triple, F, n_steps, n_paths, seed, stream=(index + 1,)))
        return np.array([e.estimate for e in estimates])

    weights = wb_eval(triple.B, (x + triple.L.as_array()) @ triple.S.inverse_array(1).T)
    image_sum = float(transfer_sum(triple.B, triple.L, triple.S, x, h))
    start = estimate_hF(x, triple, F, n_steps, n_paths, seed, stream=(0,))
    sigma = math.sqrt(sum((w * e.stderr) ** 2 for w, e in zip(weights, estimates)) + start.stderr ** 2)
    return RuelleReport(
        residual=abs(image_sum - start.estimate),
        sigma=sigma,
        weights=tuple(float(w) for w in weights),
        image_estimates=tuple(estimates),
        start_estimate=start,
    )


@dataclass
class MassReport:
    mass: float
    stderr: float
    unclassified: float
    per_set: Dict[str, float]
    overlap_fraction: float
    intersections: List[Dict] = field(default_factory=list)
    union_formula: Optional[Dict] = None

    @property
    def passed(self) -> bool:
        return abs(1.0 - self.mass) <= 3 * self.stderr + 1e-12

    def to_dict(self) -> Dict:
        return {
            "mass": self.mass,
            "stderr": self.stderr,
            "unclassified": self.unclassified,
            "per_set": self.per_set,
            "overlap_fraction": self.overlap_fraction,
            "intersections": self.intersections,
            "union_formula": self.union_formula,
            "passed": self.passed,
        }


@with_stage_timing("total_mass_check")
def total_mass_check(x: Sequence[float], triple: HadamardTriple, specs: Sequence[InvariantSetSpec],
                     n_steps: Optional[int] = None, n_paths: Optional[int] = None, seed: Optional[int] = None,
                     intersections: Optional[Sequence[Tuple[int, int, InvariantSetSpec]]] = None,
                     spectra: Optional[Sequence[SpectrumApprox]] = None,
                     truncation_budget: Optional[float] = None,
                     ensemble: Optional[PathEnsemble] = None) -> MassReport:
    """
    Empirical P_x(∪ N(F_k)) for caller-disjoint sets F_k, with the unclassified
    fraction, optional intersection consistency N(F_i ∩ F_j) = N(F_i) ∩ N(F_j), and
    an optional comparison against Σ over the union of spectra of |μ̂(x+λ)|².
    """
    if not specs:
        raise ValidationError("total_mass_check needs at least one invariant set")
    if any(s.kind == "full" for s in specs):
        per_set = {s.label or s.kind: (1.0 if s.kind == "full" else 0.0) for s in specs}
        return MassReport(mass=1.0, stderr=0.0, unclassified=0.0, per_set=per_set, overlap_fraction=0.0)

    ensemble = (ensemble or simulate_paths(x, triple, n_steps, n_paths, seed)).classify(specs)
    hits = [s.tail_hits(ensemble.tail_states) for s in specs]
    stacked = np.stack(hits)
    covered = stacked.any(axis=0)
    mass, stderr = _binomial(covered)
    overlap = float(np.mean(stacked.sum(axis=0) > 1))
    if overlap:
        logger.warning(f"{overlap:.3%} of paths converge to more than one of the given sets.")

    report = MassReport(
        mass=mass,
        stderr=stderr,
        unclassified=1.0 - mass,
        per_set={label: float(np.mean(ensemble.classification == k)) for k, label in enumerate(ensemble.labels)},
        overlap_fraction=overlap,
    )

    for i, j, joint in intersections or []:
        both, both_err = _binomial(hits[i] & hits[j])
        direct, direct_err = _binomial(joint.tail_hits(ensemble.tail_states))
        sigma = math.sqrt(both_err ** 2 + direct_err ** 2)
        report.intersections.append({
            "sets": [i, j],
            "intersection_of_hits": both,
            "hits_of_intersection": direct,
            "consistent": abs(both - direct) <= 3 * sigma + 1e-12,
        })

    if spectra:
        budget = spectral_setting("TOL_CERTIFY") if truncation_budget is None else truncation_budget
        spectral_mass = union_spectrum_mass(triple.R, triple.B, ensemble.start, spectra)
        report.union_formula = {
            "spectral_mass": spectral_mass,
            "path_mass": mass,
            "consistent": abs(spectral_mass - mass) <= 3 * stderr + budget,
        }
    logger.info(f"Total mass at x={ensemble.start.tolist()}: {mass:.6f} ± {stderr:.2e}.")
    return report
