# --- Python Standard Library Imports ---
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# --- Third-Party Library Imports ---
import numpy as np

# --- Local Application Imports ---
from .conf import spectral_setting
from .exceptions import BudgetExceeded, DimensionMismatch, ValidationError
from .lattice_service import (
    DigitSet,
    ExpandingMatrix,
    Vector,
    contraction_profile,
    infinity_norm,
    matrix_inverse_power,
    to_vector,
)
from .utils import as_fraction, with_stage_timing, worker_pool

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

# Points per block when evaluating products.
_BLOCK = 65536
_INT64_SAFE = 2 ** 62
_NEGLIGIBLE_INCREMENT = 1e-12


# --- The weight W_B and the partition identity ---

def _points(x, dim: int) -> np.ndarray:
    points = np.asarray(x, dtype=float)
    if points.shape[-1:] != (dim,):
        raise DimensionMismatch(f"points must have trailing dimension {dim}, got shape {points.shape}")
    return points


def m_b(B: DigitSet, y) -> np.ndarray:
    """m_B(y) = N^{-1} Σ_b exp(2πi b·y), vectorised over leading axes of y."""
    y = _points(y, B.dim)
    return np.exp(2j * np.pi * (y @ B.as_array().T.astype(float))).mean(axis=-1)


def wb_eval(B: DigitSet, x):
    """W_B(x) = |m_B(x)|², a float for one point or an array for many."""
    values = np.abs(m_b(B, x)) ** 2
    return float(values) if np.ndim(values) == 0 else values


def _fractional(value: Fraction) -> float:
    return float(value - (value.numerator // value.denominator))


def wb_eval_rational(B: DigitSet, x: Sequence) -> float:
    """W_B at an exact rational point; every b·x is reduced mod 1 before exponentiating."""
    x = to_vector(x)
    phases = np.array([_fractional(sum((b_i * x_i for b_i, x_i in zip(b, x)), Fraction(0))) for b in B])
    return float(np.abs(np.exp(2j * np.pi * phases).mean()) ** 2)


def wb_eval_shifted(B: DigitSet, x, shift: Sequence) -> np.ndarray:
    """W_B(x + shift) with the shift's contribution b·shift reduced mod 1 exactly."""
    x = _points(x, B.dim)
    shift = to_vector(shift)
    offsets = np.array([_fractional(sum((b_i * s_i for b_i, s_i in zip(b, shift)), Fraction(0))) for b in B])
    phases = x @ B.as_array().T.astype(float) + offsets
    return np.abs(np.exp(2j * np.pi * phases).mean(axis=-1)) ** 2


def sigma_images(S: ExpandingMatrix, L: DigitSet, x) -> np.ndarray:
    """σ_l(x) = S^{-1}(x + l) for every l, stacked on a new second-to-last axis."""
    x = _points(x, S.dim)
    shifted = x[..., None, :] + L.as_array().astype(float)
    return shifted @ S.inverse_array(1).T


def transfer_sum(B: DigitSet, L: DigitSet, S: ExpandingMatrix, x, h: Optional[Callable] = None):
    """
    Σ_l W_B(σ_l x) h(σ_l x). With h omitted the sum is the partition sum, which
    equals 1 for a Hadamard triple. `h` receives the stacked images.
    """
    images = sigma_images(S, L, x)
    weights = wb_eval(B, images)
    if h is not None:
        weights = weights * np.asarray(h(images), dtype=float)
    return weights.sum(axis=-1)


def partition_residual(B: DigitSet, L: DigitSet, S: ExpandingMatrix, x):
    residual = np.abs(transfer_sum(B, L, S, x) - 1.0)
    return float(residual) if np.ndim(residual) == 0 else residual


# --- Truncated infinite products ---

@dataclass(frozen=True)
class ProductTail:
    """
    Certified bounds on the tail ∏_{k>K} of the Fourier product.

    |1 - m_B(y)| <= c1‖y‖₂ and 1 - W_B(y) <= c2‖y‖₂², with c1 = 2π max‖b‖ and
    c2 = (2π)² max‖b‖². Summing over S^{-j} y_K uses the geometric bounds of
    the contraction profile.
    """
    c1: float
    c2: float
    dim: int
    norm_sum: float
    square_norm_sum: float

    def complex_bound(self, y_norm: float) -> float:
        return math.expm1(self.c1 * math.sqrt(self.dim) * y_norm * self.norm_sum)

    def square_bound(self, y_norm: float) -> float:
        return min(1.0, self.c2 * self.dim * y_norm ** 2 * self.square_norm_sum)

    def bound(self, y_norm: float, squared: bool) -> float:
        return self.square_bound(y_norm) if squared else self.complex_bound(y_norm)


@lru_cache(maxsize=64)
def _product_tail(S_entries, B_vectors) -> ProductTail:
    S = ExpandingMatrix(S_entries)
    profile = contraction_profile(S)
    radius = max(math.sqrt(sum(v * v for v in b)) for b in B_vectors)
    return ProductTail(
        c1=2 * math.pi * radius,
        c2=(2 * math.pi * radius) ** 2,
        dim=S.dim,
        norm_sum=profile.power_sum(1),
        square_norm_sum=profile.power_sum(2),
    )


def product_tail(R: ExpandingMatrix, B: DigitSet) -> ProductTail:
    return _product_tail(R.transpose().entries, B.vectors)


def _inverse_norm(S: ExpandingMatrix, k: int) -> float:
    return float(infinity_norm(matrix_inverse_power(S, k)))


def auto_product_depth(R: ExpandingMatrix, B: DigitSet, x_norm: float, squared: bool = False,
                       tail_tol: Optional[float] = None) -> Tuple[int, float]:
    """Smallest K whose certified tail bound at ‖x‖∞ = x_norm is below tail_tol."""
    tail_tol = spectral_setting("TAIL_TOL") if tail_tol is None else tail_tol
    max_depth = spectral_setting("MAX_PRODUCT_DEPTH")
    tail = product_tail(R, B)
    S = R.transpose()
    bound = float("inf")
    for depth in range(1, max_depth + 1):
        bound = tail.bound(_inverse_norm(S, depth) * x_norm, squared)
        if bound < tail_tol:
            return depth, bound
    logger.warning(f"Product depth capped at {max_depth}; tail bound {bound:.3e} exceeds {tail_tol:.1e}.")
    return max_depth, bound


@dataclass(frozen=True, eq=False)
class MuHatBatch:
    values: np.ndarray
    depth: int
    tail_bound: float


def _product_block(S_inverse_t: np.ndarray, digits_t: np.ndarray, points: np.ndarray, depth: int,
                   squared: bool) -> np.ndarray:
    y = points
    result = np.ones(len(points), dtype=float if squared else complex)
    for _ in range(depth):
        y = y @ S_inverse_t
        factor = np.exp(2j * np.pi * (y @ digits_t)).mean(axis=-1)
        result *= np.abs(factor) ** 2 if squared else factor
    return result


def mu_hat_batch(R: ExpandingMatrix, B: DigitSet, xs, depth: Optional[int] = None, squared: bool = False,
                 tail_tol: Optional[float] = None) -> MuHatBatch:
    """
    ∏_{k=1}^K m_B(S^{-k} x) at many points (or ∏ W_B(S^{-k} x) when squared).
    With depth omitted, K is chosen from the certified tail bound at the largest ‖x‖∞.
    """
    points = _points(xs, R.dim).reshape(-1, R.dim)
    x_norm = float(np.max(np.abs(points))) if points.size else 0.0
    if depth is None:
        depth, bound = auto_product_depth(R, B, x_norm, squared, tail_tol)
    else:
        if depth < 1:
            raise ValidationError(f"product depth must be >= 1, got {depth}")
        bound = product_tail(R, B).bound(_inverse_norm(R.transpose(), depth) * x_norm, squared)

    S_inverse_t = R.transpose().inverse_array(1).T
    digits_t = B.as_array().T.astype(float)
    blocks = [points[i:i + _BLOCK] for i in range(0, len(points), _BLOCK)] or [points]
    values = worker_pool.map(lambda block: _product_block(S_inverse_t, digits_t, block, depth, squared), blocks)
    return MuHatBatch(values=np.concatenate(values), depth=depth, tail_bound=bound)


def mu_hat(R: ExpandingMatrix, B: DigitSet, x: Sequence[float], depth: Optional[int] = None,
           tail_tol: Optional[float] = None) -> complex:
    """μ̂(x) as the truncated product ∏_{k=1}^K m_B(S^{-k}x)."""
    return complex(mu_hat_batch(R, B, [x], depth=depth, tail_tol=tail_tol).values[0])


# --- Candidate spectra ---

@dataclass(frozen=True, eq=False)
class SpectrumApprox:
    """
    A truncation Λ_n of a candidate spectrum. Elements are numerators / denominator;
    first_depth[i] is the generation step at which element i first appeared.
    """
    depth: int
    numerators: np.ndarray
    denominator: int
    first_depth: np.ndarray
    collisions: Tuple[int, ...]
    provenance: Dict = field(default_factory=dict)
    nested: bool = True

    def __len__(self) -> int:
        return len(self.numerators)

    @property
    def dim(self) -> int:
        return self.numerators.shape[1]

    def elements(self) -> List[Vector]:
        return [tuple(Fraction(int(v), self.denominator) for v in row) for row in self.numerators]

    def element_set(self) -> set:
        return set(self.elements())

    def as_float(self) -> np.ndarray:
        return self.numerators.astype(float) / self.denominator

    def truncated(self, depth: int) -> List[Vector]:
        """Elements of Λ_depth (valid for nested generation)."""
        mask = self.first_depth <= depth
        return [tuple(Fraction(int(v), self.denominator) for v in row) for row in self.numerators[mask]]

    def is_integral(self) -> bool:
        return self.denominator == 1 or bool(np.all(self.numerators % self.denominator == 0))

    def to_dict(self) -> Dict:
        return {
            "depth": self.depth,
            "size": len(self),
            "denominator": self.denominator,
            "collisions": list(self.collisions),
            "nested": self.nested,
            "provenance": self.provenance,
            "sizes_by_depth": [int(np.sum(self.first_depth <= k)) for k in range(self.depth + 1)],
        }


def _common_denominator(points: Sequence[Vector]) -> int:
    denominator = 1
    for point in points:
        for v in point:
            denominator = denominator * v.denominator // math.gcd(denominator, v.denominator)
    return denominator


def _row_ids(*arrays: np.ndarray) -> List[np.ndarray]:
    """Integer ids such that equal rows (across all arrays) share an id."""
    combined = np.concatenate(arrays, axis=0)
    _, inverse = np.unique(combined, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    ids, start = [], 0
    for array in arrays:
        ids.append(inverse[start:start + len(array)])
        start += len(array)
    return ids


@with_stage_timing("generate_spectrum")
def generate_spectrum(S: ExpandingMatrix, digits: DigitSet, seed_points: Sequence[Sequence], depth: int,
                      provenance: Optional[Dict] = None, budget: Optional[int] = None) -> SpectrumApprox:
    """
    Applies Λ ↦ SΛ + L to the seed `depth` times, deduplicating after every step.
    Records the first depth of each element and how many generated vectors collided.
    """
    if depth < 0:
        raise ValidationError(f"spectrum depth must be >= 0, got {depth}")
    budget = budget or 4 * spectral_setting("CLOUD_BUDGET")
    seeds = [to_vector(p) for p in seed_points]
    if not seeds:
        raise ValidationError("a spectrum needs at least one seed point")
    if any(len(p) != S.dim for p in seeds):
        raise DimensionMismatch(f"seed points must live in dimension {S.dim}")

    denominator = _common_denominator(seeds)
    seed_numerators = np.array([[int(v * denominator) for v in p] for p in seeds], dtype=np.int64)
    projected = len(digits) ** depth * len(seeds)
    if projected > budget:
        raise BudgetExceeded("spectrum elements", projected, budget)
    growth = max(sum(abs(v) for v in row) for row in S.entries)
    magnitude = (int(np.abs(seed_numerators).max(initial=0)) + denominator * max(
        max(abs(v) for v in l) for l in digits)) * growth ** depth
    if magnitude >= _INT64_SAFE:
        raise BudgetExceeded("spectrum numerator magnitude", magnitude, _INT64_SAFE)

    current = np.unique(seed_numerators, axis=0)
    tags = np.zeros(len(current), dtype=np.int64)
    collisions: List[int] = []
    nested = True
    S_t = np.array(S.entries, dtype=np.int64).T
    shifts = digits.as_array() * denominator

    for step in range(1, depth + 1):
        grown = ((current @ S_t)[:, None, :] + shifts[None, :, :]).reshape(-1, S.dim)
        following = np.unique(grown, axis=0)
        collisions.append(len(grown) - len(following))
        current_ids, following_ids = _row_ids(current, following)
        if not np.isin(current_ids, following_ids).all():
            nested = False
        tag_by_id = np.full(int(max(current_ids.max(initial=0), following_ids.max(initial=0))) + 1, step)
        tag_by_id[current_ids] = tags
        tags = tag_by_id[following_ids]
        current = following

    if not nested:
        logger.warning("Spectrum generation is not nested: Λ_k ⊄ Λ_{k+1} for some k.")
    logger.info(f"Generated {len(current)} spectrum elements at depth {depth}; collisions per step {collisions}.")
    return SpectrumApprox(
        depth=depth,
        numerators=current,
        denominator=denominator,
        first_depth=tags,
        collisions=tuple(collisions),
        provenance=dict(provenance or {}),
        nested=nested,
    )


# --- Orthogonality and Parseval ---

@dataclass(frozen=True)
class OrthogonalityReport:
    defect: float
    pair_count: int
    distinct_differences: int
    worst_difference: Optional[Tuple[Fraction, ...]]

    def to_dict(self) -> Dict:
        return {
            "defect": self.defect,
            "pair_count": self.pair_count,
            "distinct_differences": self.distinct_differences,
            "worst_difference": list(self.worst_difference) if self.worst_difference else None,
        }


def orthogonality_defect(R: ExpandingMatrix, B: DigitSet, spectrum: SpectrumApprox,
                         radius: Optional[float] = None, pair_cap: Optional[int] = None,
                         depth: Optional[int] = None) -> OrthogonalityReport:
    """Max of |μ̂(λ - λ')| over distinct pairs with ‖λ - λ'‖∞ <= radius."""
    pair_cap = int(pair_cap or spectral_setting("PAIR_CAP"))
    n = len(spectrum)
    if n < 2:
        return OrthogonalityReport(defect=0.0, pair_count=0, distinct_differences=0, worst_difference=None)
    if radius is None and n * (n - 1) // 2 > pair_cap:
        raise BudgetExceeded("orthogonality pairs", n * (n - 1) // 2, pair_cap)

    numerators = spectrum.numerators
    limit = None if radius is None else radius * spectrum.denominator
    differences, pair_count = [], 0
    for i in range(n - 1):
        diffs = numerators[i + 1:] - numerators[i]
        if limit is not None:
            diffs = diffs[np.max(np.abs(diffs), axis=1) <= limit]
        pair_count += len(diffs)
        if pair_count > pair_cap:
            raise BudgetExceeded("orthogonality pairs", pair_count, pair_cap)
        if len(diffs):
            # |μ̂(-v)| = |μ̂(v)|; keep the lexicographically positive sign.
            first = np.argmax(diffs != 0, axis=1)
            signs = np.sign(diffs[np.arange(len(diffs)), first])
            differences.append(diffs * signs[:, None])
    if not differences:
        return OrthogonalityReport(defect=0.0, pair_count=0, distinct_differences=0, worst_difference=None)

    unique = np.unique(np.concatenate(differences, axis=0), axis=0)
    batch = mu_hat_batch(R, B, unique.astype(float) / spectrum.denominator, depth=depth)
    magnitudes = np.abs(batch.values)
    worst = int(np.argmax(magnitudes))
    return OrthogonalityReport(
        defect=float(magnitudes[worst]),
        pair_count=pair_count,
        distinct_differences=len(unique),
        worst_difference=tuple(Fraction(int(v), spectrum.denominator) for v in unique[worst]),
    )


@dataclass(frozen=True, eq=False)
class CertificationReport:
    grid: np.ndarray
    partial_sums: np.ndarray
    spectrum_depth: int
    product_depth: int
    product_tail_bound: float
    max_deviation: float
    monotone: bool
    orthogonality: Optional[OrthogonalityReport]
    verdict: str
    tolerance: float
    truncation: Dict
    repetition: Dict
    criterion: str = "direct"
    tail_estimate: Optional[np.ndarray] = None
    extrapolated_deviation: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def final_sums(self) -> np.ndarray:
        return self.partial_sums[:, -1]

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict,
            "criterion": self.criterion,
            "tolerance": self.tolerance,
            "spectrum_depth": self.spectrum_depth,
            "product_depth": self.product_depth,
            "product_tail_bound": self.product_tail_bound,
            "max_deviation": self.max_deviation,
            "extrapolated_deviation": self.extrapolated_deviation,
            "monotone": self.monotone,
            "monotone_basis": "structural: nonnegative terms summed over nested truncations Λ_k ⊆ Λ_(k+1), "
                              "nesting checked while generating",
            "grid": self.grid.tolist(),
            "partial_sums": self.partial_sums.tolist(),
            "orthogonality": self.orthogonality.to_dict() if self.orthogonality else None,
            "truncation": self.truncation,
            "repetition": self.repetition,
        }


def default_grid(dim: int, box=None, count: int = 20, seed: Optional[int] = None) -> np.ndarray:
    """The origin plus `count` uniform points in the box (unit cube when no box is given)."""
    seed = spectral_setting("SEED") if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(dim,)))
    lo = np.zeros(dim) if box is None else np.array([float(v) for v in box.lo])
    hi = np.ones(dim) if box is None else np.array([float(v) for v in box.hi])
    return np.vstack([np.zeros((1, dim)), lo + (hi - lo) * rng.random((count, dim))])


def geometric_tail(partial: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mass beyond the last depth at each grid point, assuming the increments
    Δ_k = s_k - s_(k-1) keep shrinking at the rate seen over the last two depths:
    ρ = sqrt(Δ_n / Δ_(n-2)) and tail = Δ_n ρ / (1 - ρ).

    The two-depth ratio smooths out period-two oscillation of the increments.
    Points whose last increment is negligible get tail 0; points whose increments
    do not shrink, or with fewer than four partial sums, get an infinite tail.
    Returns (tail, rho).
    """
    increments = np.diff(partial, axis=1)
    tail = np.zeros(len(partial))
    rho = np.zeros(len(partial))
    if increments.shape[1] == 0:
        short = partial[:, 0] < 1.0 - _NEGLIGIBLE_INCREMENT
        tail[short] = np.inf
        rho[short] = np.inf
        return tail, rho
    last = increments[:, -1]
    active = last > _NEGLIGIBLE_INCREMENT
    if increments.shape[1] < 3:
        tail[active] = np.inf
        rho[active] = np.inf
        return tail, rho
    earlier = increments[:, -3]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(earlier > 0, np.sqrt(np.clip(last, 0.0, None) / earlier), np.inf)
    rho[active] = ratio[active]
    shrinking = active & (ratio < 1.0)
    tail[shrinking] = last[shrinking] * ratio[shrinking] / (1.0 - ratio[shrinking])
    tail[active & ~shrinking] = np.inf
    return tail, rho


@with_stage_timing("parseval_certify")
def parseval_certify(R: ExpandingMatrix, B: DigitSet, spectrum: SpectrumApprox, grid=None,
                     product_depth: Optional[int] = None, tol: Optional[float] = None, box=None,
                     seed: Optional[int] = None, orthogonality_radius: Optional[float] = None,
                     extrapolate: bool = False) -> CertificationReport:
    """
    Partial Parseval sums s_k(x) = Σ_{λ∈Λ_k} |μ̂(x+λ)|² for k = 0..n at every grid point.

    Sums are accumulated per generation depth. Over nested truncations they are
    nondecreasing in k by construction, so `monotone` is reported as structural and
    is False only when the spectrum is not nested.

    The direct verdict is PASS iff max |s_n(x) - 1| < tol. With `extrapolate`, the
    verdict instead compares s_n(x) + geometric_tail(x) with 1. Use it for spectra
    whose truncation mass decays too slowly for the direct test at a feasible depth.
    The direct deviation is reported either way.
    """
    tol = spectral_setting("TOL_CERTIFY") if tol is None else tol
    grid = default_grid(R.dim, box, seed=seed) if grid is None else _points(grid, R.dim).reshape(-1, R.dim)
    elements = spectrum.as_float()
    tags = spectrum.first_depth

    def sums_at(x: np.ndarray):
        batch = mu_hat_batch(R, B, elements + x, depth=product_depth, squared=True)
        per_depth = np.bincount(tags, weights=batch.values, minlength=spectrum.depth + 1)
        return np.cumsum(per_depth), batch.depth, batch.tail_bound

    results = worker_pool.map(sums_at, list(grid))
    partial = np.vstack([r[0] for r in results])
    depth_used = max(r[1] for r in results)
    tail_bound = max(r[2] for r in results)

    final = partial[:, -1]
    deviation = float(np.max(np.abs(final - 1.0)))
    monotone = bool(spectrum.nested and np.all(np.diff(partial, axis=1) >= 0))

    orthogonality = None
    if orthogonality_radius is not None:
        try:
            orthogonality = orthogonality_defect(R, B, spectrum, radius=orthogonality_radius)
        except BudgetExceeded as e:
            logger.warning(f"Orthogonality check skipped: {e}")

    increments = partial[:, -1] - partial[:, -2] if spectrum.depth >= 1 else np.zeros(len(grid))
    truncation = {
        "product_truncation_bound": float(tail_bound * np.max(final)),
        "spectrum_truncation_max": float(np.max(1.0 - final)),
        "last_depth_increment_max": float(np.max(increments)),
        "deviation_by_depth": np.max(np.abs(partial - 1.0), axis=0).tolist(),
    }
    repetition = {
        "elements": len(spectrum),
        "collisions_by_depth": list(spectrum.collisions),
        "nested": spectrum.nested,
        "distinct": bool(len(np.unique(spectrum.numerators, axis=0)) == len(spectrum)),
    }

    tail, rho = geometric_tail(partial)
    limits = final + tail
    extrapolated = float(np.max(np.abs(limits - 1.0))) if np.all(np.isfinite(limits)) else None
    truncation.update({
        "tail_rate_max": float(np.max(rho)) if np.all(np.isfinite(rho)) else None,
        "tail_estimate_max": float(np.max(tail)) if np.all(np.isfinite(tail)) else None,
        "extrapolated_deviation": extrapolated,
    })

    if extrapolate:
        criterion = "extrapolated"
        verdict = "PASS" if extrapolated is not None and extrapolated < tol else "FAIL"
        logger.info(f"Parseval certification: max deviation {deviation:.3e}, extrapolated "
                    f"{extrapolated if extrapolated is not None else float('inf'):.3e} (tol {tol:.1e}) -> {verdict}.")
    else:
        criterion = "direct"
        verdict = "PASS" if deviation < tol else "FAIL"
        logger.info(f"Parseval certification: max deviation {deviation:.3e} (tol {tol:.1e}) -> {verdict}.")
    truncation["criterion"] = criterion
    return CertificationReport(
        grid=grid,
        partial_sums=partial,
        spectrum_depth=spectrum.depth,
        product_depth=depth_used,
        product_tail_bound=tail_bound,
        max_deviation=deviation,
        monotone=monotone,
        orthogonality=orthogonality,
        verdict=verdict,
        tolerance=tol,
        truncation=truncation,
        repetition=repetition,
        criterion=criterion,
        tail_estimate=tail,
        extrapolated_deviation=extrapolated,
    )


def union_spectrum_mass(R: ExpandingMatrix, B: DigitSet, x: Sequence[float], spectra: Sequence[SpectrumApprox],
                        product_depth: Optional[int] = None) -> float:
    """Σ over the union of several spectra of |μ̂(x+λ)|², each element counted once."""
    if not spectra:
        return 0.0
    denominator = 1
    for spectrum in spectra:
        denominator = denominator * spectrum.denominator // math.gcd(denominator, spectrum.denominator)
    scaled = [s.numerators * (denominator // s.denominator) for s in spectra]
    union = np.unique(np.concatenate(scaled, axis=0), axis=0)
    points = union.astype(float) / denominator + np.asarray(x, dtype=float)
    return float(mu_hat_batch(R, B, points, depth=product_depth, squared=True).values.sum())
