# --- Python Standard Library Imports ---
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

# --- Third-Party Library Imports ---
import numpy as np

# --- Local Application Imports ---
from .conf import spectral_setting
from .exceptions import BudgetExceeded, DimensionMismatch, ValidationError
from .lattice_service import (
    DigitSet,
    ExpandingMatrix,
    RationalMatrix,
    Vector,
    contraction_profile,
    float_matrix,
    infinity_norm,
    mat_vec,
    matrix_inverse_power,
    to_vector,
)
from .utils import chunk_seeds, split_count, with_stage_timing, worker_pool

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

# Outward rounding grid for the interval iteration of bounding_box.
_BOX_GRID = 2 ** 32
# Integer clouds switch to Python ints above this magnitude.
_INT64_SAFE = 2 ** 62


@dataclass(frozen=True)
class AffineIfs:
    """The maps x ↦ scaling^{-1}(x + digit), one per digit."""
    scaling: ExpandingMatrix
    digits: DigitSet

    def __post_init__(self):
        if self.scaling.dim != self.digits.dim:
            raise DimensionMismatch(
                f"scaling is {self.scaling.dim}×{self.scaling.dim} but digits live in dimension {self.digits.dim}"
            )

    @property
    def dim(self) -> int:
        return self.scaling.dim

    @property
    def N(self) -> int:
        return len(self.digits)


@dataclass(frozen=True)
class BoundingBox:
    lo: Vector
    hi: Vector

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x: Sequence) -> bool:
        x = to_vector(x)
        return all(lo <= v <= hi for lo, v, hi in zip(self.lo, x, self.hi))

    def radius(self) -> Fraction:
        """Largest infinity norm of a point of the box."""
        return max(max(abs(lo), abs(hi)) for lo, hi in zip(self.lo, self.hi))

    def to_list(self) -> List[List[Fraction]]:
        return [[lo, hi] for lo, hi in zip(self.lo, self.hi)]


@dataclass(frozen=True, eq=False)
class AttractorCloud:
    """
    All depth-K partial sums Σ_{k=1}^K R^{-k} b_k, stored as integer vectors v
    with point = R^{-K} v so that deduplication is exact.
    """
    depth: int
    requested_depth: int
    numerators: Union[np.ndarray, List[Tuple[int, ...]]]
    scale_inverse: RationalMatrix
    hausdorff_bound: float

    def __len__(self) -> int:
        return len(self.numerators)

    def points(self) -> List[Vector]:
        rows = self.numerators.tolist() if isinstance(self.numerators, np.ndarray) else self.numerators
        return [mat_vec(self.scale_inverse, [Fraction(int(v)) for v in row]) for row in rows]

    def as_array(self) -> np.ndarray:
        numerators = np.array(self.numerators, dtype=float)
        return numerators @ float_matrix(self.scale_inverse).T


def apply_map(ifs: AffineIfs, index: int, x: Sequence) -> tuple:
    """
    τ_b(x) = R^{-1}(x + b) for the digit at `index`.
    Exact when x is exact (ints or Fractions); float in, float out otherwise.
    """
    if not 0 <= index < ifs.N:
        raise ValidationError(f"digit index {index} out of range for {ifs.N} digits")
    if len(x) != ifs.dim:
        raise DimensionMismatch(f"point has dimension {len(x)}, maps act on dimension {ifs.dim}")
    digit = ifs.digits[index]
    if any(isinstance(v, (float, np.floating)) for v in x):
        shifted = np.asarray(x, dtype=float) + np.asarray(digit, dtype=float)
        return tuple(ifs.scaling.inverse_array(1) @ shifted)
    exact = to_vector(x)
    return mat_vec(matrix_inverse_power(ifs.scaling, 1), [v + b for v, b in zip(exact, digit)])


def _effective_depth(ifs: AffineIfs, depth: int, budget: int, strict: bool) -> int:
    if ifs.N == 1:
        return depth
    allowed = max(1, int(math.floor(math.log(budget) / math.log(ifs.N) + 1e-12)))
    if depth <= allowed:
        return depth
    if strict:
        raise BudgetExceeded("attractor cloud points", ifs.N ** depth, budget)
    logger.warning(f"Attractor depth {depth} clamped to {allowed} (cloud budget {budget} points).")
    return allowed


@with_stage_timing("attractor_cloud")
def attractor_cloud(ifs: AffineIfs, depth: int, budget: Optional[int] = None, strict: bool = False) -> AttractorCloud:
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    budget = budget or spectral_setting("CLOUD_BUDGET")
    effective = _effective_depth(ifs, depth, budget, strict)

    digits = ifs.digits.as_array()
    scaling = np.array(ifs.scaling.entries, dtype=np.int64)
    growth = max(sum(abs(v) for v in row) for row in ifs.scaling.entries)
    magnitude = int(np.abs(digits).max(initial=0)) * sum(growth ** k for k in range(effective))

    if magnitude < _INT64_SAFE:
        cloud = np.zeros((1, ifs.dim), dtype=np.int64)
        for _ in range(effective):
            # V_{k+1} = R V_k + B, deduplicated.
            grown = (cloud @ scaling.T)[:, None, :] + digits[None, :, :]
            cloud = np.unique(grown.reshape(-1, ifs.dim), axis=0)
        numerators = cloud
    else:
        logger.info(f"Attractor numerators exceed int64 at depth {effective}; using exact Python integers.")
        current = {tuple([0] * ifs.dim)}
        for _ in range(effective):
            current = {
                tuple(a + b for a, b in zip(mat_vec(ifs.scaling.entries, v), digit))
                for v in current for digit in ifs.digits
            }
        numerators = sorted(current)

    scale_inverse = matrix_inverse_power(ifs.scaling, effective)
    bound = float(infinity_norm(scale_inverse)) * float(bounding_box(ifs).radius())
    logger.info(f"Attractor cloud at depth {effective}: {len(numerators)} points, Hausdorff bound {bound:.3e}.")
    return AttractorCloud(
        depth=effective,
        requested_depth=depth,
        numerators=numerators,
        scale_inverse=scale_inverse,
        hausdorff_bound=bound,
    )


def _diagonal_box(ifs: AffineIfs) -> BoundingBox:
    lo, hi = [], []
    for i in range(ifs.dim):
        r = ifs.scaling.entries[i][i]
        values = [digit[i] for digit in ifs.digits]
        b_min, b_max = min(values), max(values)
        if r > 1:
            lo.append(Fraction(b_min, r - 1))
            hi.append(Fraction(b_max, r - 1))
        else:
            # r < -1: odd powers of r^{-1} are negative.
            s = -r
            lo.append(Fraction(b_min - s * b_max, s * s - 1))
            hi.append(Fraction(b_max - s * b_min, s * s - 1))
    return BoundingBox(lo=tuple(lo), hi=tuple(hi))


def _round_out(lo: Fraction, hi: Fraction) -> Tuple[Fraction, Fraction]:
    return (
        Fraction(math.floor(lo * _BOX_GRID), _BOX_GRID),
        Fraction(math.ceil(hi * _BOX_GRID), _BOX_GRID),
    )


def _interval_box(ifs: AffineIfs, max_iterations: int = 200) -> BoundingBox:
    """
    X = Y + Q X with Q = R^{-k0} and Y the depth-k0 partial sums. Starting from
    the invariant ball of radius max‖y‖/(1 - ‖Q‖), each interval iterate still
    contains X, so any iterate is a certified box.
    """
    profile = contraction_profile(ifs.scaling)
    k0 = profile.k0
    Q = matrix_inverse_power(ifs.scaling, k0)
    q = infinity_norm(Q)
    assert q < 1

    heads = exact_partial_sums(ifs, k0)
    y_lo = [min(p[i] for p in heads) for i in range(ifs.dim)]
    y_hi = [max(p[i] for p in heads) for i in range(ifs.dim)]
    rho = max(max(abs(a), abs(b)) for a, b in zip(y_lo, y_hi)) / (1 - q)
    lo = [-rho] * ifs.dim
    hi = [rho] * ifs.dim

    for iteration in range(max_iterations):
        new_lo, new_hi = [], []
        for i in range(ifs.dim):
            low, high = y_lo[i], y_hi[i]
            for j in range(ifs.dim):
                a, b = Q[i][j] * lo[j], Q[i][j] * hi[j]
                low += min(a, b)
                high += max(a, b)
            low, high = _round_out(low, high)
            new_lo.append(max(low, lo[i]))
            new_hi.append(min(high, hi[i]))
        change = max(max(abs(a - b) for a, b in zip(new_lo, lo)), max(abs(a - b) for a, b in zip(new_hi, hi)))
        lo, hi = new_lo, new_hi
        if change <= Fraction(1, _BOX_GRID):
            logger.debug(f"Interval box stabilised after {iteration + 1} iterations (k0={k0}).")
            break
    return BoundingBox(lo=tuple(lo), hi=tuple(hi))


def exact_partial_sums(ifs: AffineIfs, depth: int) -> List[Vector]:
    """Exact depth-`depth` partial sums without budget handling (small depths only)."""
    current = {tuple([Fraction(0)] * ifs.dim)}
    inverse = matrix_inverse_power(ifs.scaling, 1)
    for _ in range(depth):
        # Σ_{k=1}^{K+1} R^{-k} b_k = R^{-1}(b_1 + Σ_{k=1}^{K} R^{-k} b_{k+1})
        current = {
            mat_vec(inverse, [v + b for v, b in zip(point, digit)])
            for point in current for digit in ifs.digits
        }
    return sorted(current)


def bounding_box(ifs: AffineIfs) -> BoundingBox:
    """A box certified to contain the attractor; exact for diagonal scaling."""
    if ifs.N == 1:
        # Digits are {0}, so the attractor is the origin.
        zero = tuple([Fraction(0)] * ifs.dim)
        return BoundingBox(lo=zero, hi=zero)
    if ifs.scaling.is_diagonal():
        return _diagonal_box(ifs)
    return _interval_box(ifs)


def truncation_radius(ifs: AffineIfs, depth: int) -> float:
    """Bound on the distance between a depth-K partial sum and its infinite continuation."""
    return float(infinity_norm(matrix_inverse_power(ifs.scaling, depth))) * float(bounding_box(ifs).radius())


@dataclass(frozen=True, eq=False)
class MeasureSample:
    points: np.ndarray
    depth: int
    seed: int
    tail_radius: float

    def __len__(self) -> int:
        return len(self.points)


def _horner_draws(ifs: AffineIfs, depth: int, count: int, seed_sequence: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed_sequence)
    digits = ifs.digits.as_array().astype(float)
    inverse_t = ifs.scaling.inverse_array(1).T
    choices = rng.integers(ifs.N, size=(count, depth))
    x = np.zeros((count, ifs.dim))
    # R^{-1}(b_1 + R^{-1}(b_2 + ... + R^{-1} b_K))
    for k in range(depth - 1, -1, -1):
        x = (x + digits[choices[:, k]]) @ inverse_t
    return x


def sample_invariant_measure(
    ifs: AffineIfs,
    depth: int,
    count: int,
    seed: Optional[int] = None,
    stream: Tuple[int, ...] = (),
) -> MeasureSample:
    """
    i.i.d. draws of Σ_{k=1}^K R^{-k} b_k with uniform digits.
    Chunks are seeded by chunk index, so the result does not depend on the worker count.
    """
    if depth < 1 or count < 1:
        raise ValidationError(f"depth and count must be >= 1, got depth={depth}, count={count}")
    seed = spectral_setting("SEED") if seed is None else seed
    sizes = split_count(count)
    seeds = chunk_seeds(seed, len(sizes), *stream)
    chunks = worker_pool.map(lambda job: _horner_draws(ifs, depth, *job), list(zip(sizes, seeds)))
    return MeasureSample(
        points=np.concatenate(chunks, axis=0),
        depth=depth,
        seed=seed,
        tail_radius=truncation_radius(ifs, depth),
    )


@dataclass(frozen=True)
class InvarianceResidual:
    residual: float
    stderr: float

    @property
    def passed(self) -> bool:
        return self.residual < 5 * self.stderr + 1e-12


def invariance_residual(
    ifs: AffineIfs,
    t: Sequence[float],
    depth: int,
    count: int,
    seed: Optional[int] = None,
) -> InvarianceResidual:
    """
    Monte Carlo check of ∫ f dμ = (1/N) Σ_b ∫ f∘τ_b dμ for f = e^{2πi t·x}.
    Both sides are estimated from independent sample streams.
    """
    t = np.asarray(t, dtype=float)
    left = sample_invariant_measure(ifs, depth, count, seed, stream=(1,)).points
    right = sample_invariant_measure(ifs, depth, count, seed, stream=(2,)).points

    f_left = np.exp(2j * np.pi * (left @ t))
    inverse_t = ifs.scaling.inverse_array(1).T
    digits = ifs.digits.as_array().astype(float)
    images = (right[:, None, :] + digits[None, :, :]) @ inverse_t
    f_right = np.exp(2j * np.pi * (images @ t)).mean(axis=1)

    residual = abs(f_left.mean() - f_right.mean())
    var_left = float(np.mean(np.abs(f_left) ** 2) - abs(f_left.mean()) ** 2)
    var_right = float(np.mean(np.abs(f_right) ** 2) - abs(f_right.mean()) ** 2)
    stderr = math.sqrt(max(var_left, 0.0) / count + max(var_right, 0.0) / count)
    return InvarianceResidual(residual=float(residual), stderr=stderr)
