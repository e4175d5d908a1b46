# --- Python Standard Library Imports ---
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

# --- Third-Party Library Imports ---
import numpy as np
from sympy import Matrix

# --- Local Application Imports ---
from .conf import spectral_setting
from .exceptions import (
    BudgetExceeded,
    ConditionsNotMet,
    DimensionMismatch,
    Inconclusive,
    NoFixedDigit,
    NotInvariant,
    UnequalFibers,
    ValidationError,
)
from .fourier_service import SpectrumApprox, generate_spectrum, parseval_certify, wb_eval_shifted
from .hadamard_service import HadamardTriple, check_incongruence, is_hadamard_triple
from .ifs_service import bounding_box
from .lattice_service import (
    DigitSet,
    ExpandingMatrix,
    IntMatrix,
    IntVector,
    RationalMatrix,
    Vector,
    fractions_to_sympy,
    mat_vec,
    matrix_inverse_power,
    sympy_to_fractions,
    to_vector,
)
from .utils import format_vector, with_stage_timing, worker_pool

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

# |m(y, i)| below this counts as an exact zero.
_ZERO = 1e-12
# Translates explored by the closure search before giving up.
_CLOSURE_LIMIT = 64

PASS, FAIL, UNVERIFIED = "PASS", "FAIL", "UNVERIFIED"


def _fractional_phase(vector: Sequence, y: Sequence) -> float:
    value = sum((Fraction(v) * w for v, w in zip(vector, y)), Fraction(0))
    return float(value - (value.numerator // value.denominator))


# --- Block decomposition ---

@dataclass(frozen=True)
class BlockDecomposition:
    """
    S = [[S1, C], [0, S2]] for the S-invariant subspace R^r × {0}, with
    R = [[A1, 0], [C*, A2]]. B is split into its distinct first-block projections
    r_i (first-appearance order) and the fibers η_{i,j} above each of them.
    """
    r: int
    triple: HadamardTriple
    S1: IntMatrix
    C: IntMatrix
    S2: IntMatrix
    projections: Tuple[IntVector, ...]
    fibers: Tuple[Tuple[IntVector, ...], ...]

    @property
    def dim(self) -> int:
        return self.triple.dim

    @property
    def N1(self) -> int:
        return len(self.projections)

    @property
    def N2(self) -> Tuple[int, ...]:
        return tuple(len(f) for f in self.fibers)

    @property
    def A1(self) -> IntMatrix:
        return tuple(zip(*self.S1))

    @property
    def A2(self) -> IntMatrix:
        return tuple(zip(*self.S2))

    @property
    def C_star(self) -> IntMatrix:
        return tuple(zip(*self.C))

    @cached_property
    def S1_matrix(self) -> ExpandingMatrix:
        return ExpandingMatrix(self.S1)

    @cached_property
    def S2_matrix(self) -> ExpandingMatrix:
        return ExpandingMatrix(self.S2)

    @cached_property
    def A1_matrix(self) -> ExpandingMatrix:
        return ExpandingMatrix(self.A1)

    @cached_property
    def projection_digits(self) -> DigitSet:
        return DigitSet(self.projections, "proj B")

    def has_equal_fibers(self) -> bool:
        return len(set(self.N2)) == 1

    def reassemble(self) -> IntMatrix:
        top = [tuple(a) + tuple(c) for a, c in zip(self.S1, self.C)]
        bottom = [tuple([0] * self.r) + tuple(row) for row in self.S2]
        return tuple(top + bottom)

    def second(self, vector: Sequence) -> tuple:
        return tuple(vector[self.r:])

    def image(self, y: Sequence, l2: Sequence) -> Vector:
        """Second component of σ_l on R^r × {y}: S2^{-1}(y + l2)."""
        return mat_vec(matrix_inverse_power(self.S2_matrix, 1), [Fraction(a) + b for a, b in zip(y, l2)])

    def first_digits(self, l2: Sequence) -> List[IntVector]:
        """L_1(l2) = {l1 : (l1, l2) ∈ L}."""
        l2 = tuple(l2)
        return [tuple(l[:self.r]) for l in self.triple.L if tuple(l[self.r:]) == l2]

    def m(self, y, i: int) -> np.ndarray:
        """m(y, i) = N2(i)^{-1} Σ_j exp(2πi η_{i,j}·y), vectorised over leading axes of y."""
        y = np.asarray(y, dtype=float)
        fiber = np.array(self.fibers[i], dtype=float).reshape(len(self.fibers[i]), self.dim - self.r)
        return np.exp(2j * np.pi * (y @ fiber.T)).mean(axis=-1)

    def fiber_coefficients(self, y: Sequence) -> np.ndarray:
        """m(y, i) for every i at an exact rational y, phases reduced mod 1 exactly."""
        y = to_vector(y)
        return np.array([
            np.exp(2j * np.pi * np.array([_fractional_phase(eta, y) for eta in fiber])).mean()
            for fiber in self.fibers
        ])

    def wtilde(self, y) -> np.ndarray:
        """W̃(y) = N1^{-1} Σ_i |m(y, i)|²."""
        return np.mean([np.abs(self.m(y, i)) ** 2 for i in range(self.N1)], axis=0)

    def to_dict(self) -> Dict:
        return {
            "r": self.r,
            "S1": [list(row) for row in self.S1],
            "C": [list(row) for row in self.C],
            "S2": [list(row) for row in self.S2],
            "A1": [list(row) for row in self.A1],
            "A2": [list(row) for row in self.A2],
            "C_star": [list(row) for row in self.C_star],
            "projections": [list(p) for p in self.projections],
            "fibers": [[list(eta) for eta in fiber] for fiber in self.fibers],
            "N1": self.N1,
            "N2": list(self.N2),
        }


def decompose(triple: HadamardTriple, r: int) -> BlockDecomposition:
    """Splits (R, B, L) along R^r × {0}; raises NotInvariant unless S maps it into itself."""
    d = triple.dim
    if not 0 < r < d:
        raise ValidationError(f"sub-dimension r must satisfy 0 < r < {d}, got {r}")
    S = triple.S.entries
    lower_left = [row[:r] for row in S[r:]]
    if any(v != 0 for row in lower_left for v in row):
        raise NotInvariant(f"R^{r}×{{0}} is not S-invariant: lower-left block of S is {lower_left}")

    projections: List[IntVector] = []
    fibers: Dict[IntVector, List[IntVector]] = {}
    for b in triple.B:
        head, tail = tuple(b[:r]), tuple(b[r:])
        if head not in fibers:
            projections.append(head)
            fibers[head] = []
        fibers[head].append(tail)

    decomposition = BlockDecomposition(
        r=r,
        triple=triple,
        S1=tuple(tuple(row[:r]) for row in S[:r]),
        C=tuple(tuple(row[r:]) for row in S[:r]),
        S2=tuple(tuple(row[r:]) for row in S[r:]),
        projections=tuple(projections),
        fibers=tuple(tuple(fibers[p]) for p in projections),
    )
    assert decomposition.reassemble() == S, "block reassembly must reproduce S"
    assert sum(decomposition.N2) == triple.N
    return decomposition


@dataclass(frozen=True)
class FiberSeries:
    """D_k = -Σ_{l=0}^{k-1} A2^{-(l+1)} C* A1^{-(k-l)}, for k = 1..K."""
    decomposition: BlockDecomposition
    D: Tuple[RationalMatrix, ...]

    @property
    def norms(self) -> List[float]:
        return [max((sum(abs(float(v)) for v in row) for row in Dk), default=0.0) for Dk in self.D]

    def g(self, indices: Sequence[int], depth: Optional[int] = None) -> Vector:
        """Truncated g(ω) = Σ_{k=1}^K D_k r_{i_k} for 0-based projection indices."""
        depth = len(self.D) if depth is None else depth
        if depth > len(self.D) or len(indices) < depth:
            raise ValidationError(f"need {depth} indices and series terms, have {len(indices)} and {len(self.D)}")
        total = [Fraction(0)] * (self.decomposition.dim - self.decomposition.r)
        for Dk, i in zip(self.D[:depth], indices):
            total = [a + b for a, b in zip(total, mat_vec(Dk, self.decomposition.projections[i]))]
        return tuple(total)


def fiber_series(decomposition: BlockDecomposition, depth: int) -> FiberSeries:
    A1_inverse = Matrix(decomposition.A1).inv()
    A2_inverse = Matrix(decomposition.A2).inv()
    C_star = Matrix(decomposition.C_star)
    terms = []
    for k in range(1, depth + 1):
        Dk = Matrix.zeros(decomposition.dim - decomposition.r, decomposition.r)
        for l in range(k):
            Dk -= A2_inverse ** (l + 1) * C_star * A1_inverse ** (k - l)
        terms.append(sympy_to_fractions(Dk))
    return FiberSeries(decomposition=decomposition, D=tuple(terms))


def fiber_mu_hat(decomposition: BlockDecomposition, prefix: Sequence[int], y: Sequence[float], depth: int) -> complex:
    """∏_{k=1}^{depth} m(S2^{-k} y, i_k) for 0-based projection indices i_k."""
    if len(prefix) < depth:
        raise ValidationError(f"prefix of length {len(prefix)} is shorter than depth {depth}")
    if any(not 0 <= i < decomposition.N1 for i in prefix[:depth]):
        raise ValidationError(f"prefix indices must lie in 0..{decomposition.N1 - 1}")
    inverse_t = decomposition.S2_matrix.inverse_array(1).T
    point = np.asarray(y, dtype=float)
    value = 1.0 + 0.0j
    for i in prefix[:depth]:
        point = point @ inverse_t
        value *= complex(decomposition.m(point, i))
    return value


def f_product(decomposition: BlockDecomposition, y: Sequence[float], depth: Optional[int] = None) -> float:
    """F(y) = ∏_{k=1}^K W̃(S2^{-k} y)."""
    if not decomposition.has_equal_fibers():
        raise UnequalFibers(f"fiber sizes N2 = {list(decomposition.N2)} are not all equal")
    depth = depth or spectral_setting("MAX_PRODUCT_DEPTH")
    inverse_t = decomposition.S2_matrix.inverse_array(1).T
    point = np.asarray(y, dtype=float)
    value = 1.0
    for _ in range(depth):
        point = point @ inverse_t
        value *= float(decomposition.wtilde(point))
    return value


# --- Invariant translates ---

def vanishes_on_translate(decomposition: BlockDecomposition, y: Sequence, seed: Optional[int] = None) -> bool:
    """
    Whether W_B vanishes identically on R^r × {y}.

    On the translate W_B(x, y) = |Σ_i (N2(i)/N) m(y, i) e^{2πi r_i·x}|², so it vanishes
    iff every coefficient m(y, i) does. The exact-phase coefficient test is
    cross-checked at 4·N1 random points x; disagreement raises Inconclusive.
    """
    y = to_vector(y)
    by_coefficients = bool(np.all(np.abs(decomposition.fiber_coefficients(y)) < _ZERO))

    seed = spectral_setting("SEED") if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(decomposition.r,)))
    samples = np.zeros((4 * decomposition.N1, decomposition.dim))
    samples[:, :decomposition.r] = rng.random((len(samples), decomposition.r))
    shift = tuple([Fraction(0)] * decomposition.r) + y
    by_sampling = bool(np.max(wb_eval_shifted(decomposition.triple.B, samples, shift)) < _ZERO)

    if by_coefficients != by_sampling:
        raise Inconclusive(
            f"vanishing test on R^{decomposition.r}×{{{','.join(format_vector(y))}}} disagrees: "
            f"coefficients say {by_coefficients}, samples say {by_sampling}"
        )
    return by_coefficients


def _vanishes_exact(decomposition: BlockDecomposition, y: Vector) -> bool:
    return bool(np.all(np.abs(decomposition.fiber_coefficients(y)) < _ZERO))


@dataclass(frozen=True)
class TranslateBranch:
    digit: IntVector
    image: Vector
    branch: str

    def to_dict(self) -> Dict:
        return {"digit": list(self.digit), "image": format_vector(self.image), "branch": self.branch}


@dataclass(frozen=True)
class TranslateReport:
    r: int
    y0: Vector
    invariant: bool
    branches: Tuple[TranslateBranch, ...]
    wtilde_periodic: Optional[bool] = None

    def to_dict(self) -> Dict:
        return {
            "r": self.r,
            "y0": format_vector(self.y0),
            "invariant": self.invariant,
            "branches": [b.to_dict() for b in self.branches],
            "wtilde_periodic": self.wtilde_periodic,
        }


def check_invariant_translate(triple: HadamardTriple, r: int, y0: Sequence, seed: Optional[int] = None) -> TranslateReport:
    """
    R^r × {y0} is invariant iff for every l either σ_l maps it into itself or W_B
    vanishes identically on the image translate. The witness lists the branch per digit.
    """
    decomposition = decompose(triple, r)
    y0 = to_vector(y0)
    if len(y0) != triple.dim - r:
        raise DimensionMismatch(f"y0 must have dimension {triple.dim - r}")
    branches = []
    for l in triple.L:
        image = decomposition.image(y0, decomposition.second(l))
        if image == y0:
            branch = "maps-into"
        elif vanishes_on_translate(decomposition, image, seed):
            branch = "vanishes"
        else:
            branch = "fails"
        branches.append(TranslateBranch(digit=l, image=image, branch=branch))
    invariant = all(b.branch != "fails" for b in branches)

    wtilde_periodic = None
    if invariant:
        seed = spectral_setting("SEED") if seed is None else seed
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r, 1)))
        ys = rng.random((100, triple.dim - r))
        shift = np.array([float(v) for v in y0])
        wtilde_periodic = bool(np.max(np.abs(decomposition.wtilde(ys + shift) - decomposition.wtilde(ys))) < _ZERO)

    logger.info(f"Translate R^{r}×{{{','.join(format_vector(y0))}}}: invariant={invariant}.")
    return TranslateReport(r=r, y0=y0, invariant=invariant, branches=tuple(branches), wtilde_periodic=wtilde_periodic)


def fixed_digits(triple: HadamardTriple, r: int, y0: Sequence) -> List[IntVector]:
    """Every l ∈ L with σ_{l2}(y0) = y0."""
    decomposition = decompose(triple, r)
    y0 = to_vector(y0)
    return [l for l in triple.L if decomposition.image(y0, decomposition.second(l)) == y0]


@dataclass(frozen=True)
class EscapeTrace:
    y0: Vector
    chain: Tuple[Vector, ...]
    digits: Tuple[IntVector, ...]
    status: str
    left_candidates_at: Optional[int]
    closure: Tuple[Vector, ...]
    closure_closed: bool

    def to_dict(self) -> Dict:
        return {
            "y0": format_vector(self.y0),
            "chain": [format_vector(y) for y in self.chain],
            "digits": [list(l) for l in self.digits],
            "status": self.status,
            "left_candidates_at": self.left_candidates_at,
            "closure": [format_vector(y) for y in self.closure],
            "closure_closed": self.closure_closed,
        }


def _possible_images(decomposition: BlockDecomposition, y: Vector) -> List[Tuple[IntVector, Vector]]:
    """Images S2^{-1}(y + l2) on which W_B does not vanish, one per distinct l2 in digit order."""
    images, seen = [], set()
    for l in decomposition.triple.L:
        l2 = decomposition.second(l)
        if l2 in seen:
            continue
        seen.add(l2)
        image = decomposition.image(y, l2)
        if not _vanishes_exact(decomposition, image):
            images.append((l2, image))
    return images


def trace_escape(triple: HadamardTriple, r: int, y0: Sequence, max_steps: int = 10,
                 candidates: Optional[Sequence[Sequence]] = None) -> EscapeTrace:
    """
    Follows second-component transitions y ↦ S2^{-1}(y + l2) with W_B not vanishing
    on the image, taking the first new image in digit order. The trace is PERIODIC
    when only already visited translates are reachable and it never left the
    candidates, ESCAPED otherwise.
    """
    decomposition = decompose(triple, r)
    y0 = to_vector(y0)
    allowed = None if candidates is None else {to_vector(c) for c in candidates}

    chain, digits = [y0], []
    left_at = None if allowed is None or y0 in allowed else 0
    periodic = False
    for step in range(1, max_steps + 1):
        fresh = [(l2, image) for l2, image in _possible_images(decomposition, chain[-1]) if image not in chain]
        if not fresh:
            periodic = True
            break
        l2, image = fresh[0]
        chain.append(image)
        digits.append(l2)
        if left_at is None and allowed is not None and image not in allowed:
            left_at = step

    # Breadth-first closure: a finite invariant union of translates exists iff it closes.
    closure, queue = {y0}, deque([y0])
    while queue and len(closure) <= _CLOSURE_LIMIT:
        for _, image in _possible_images(decomposition, queue.popleft()):
            if image not in closure:
                closure.add(image)
                queue.append(image)
    closed = not queue

    status = "PERIODIC" if periodic and left_at is None else "ESCAPED"
    logger.info(f"Escape trace from {format_vector(y0)}: {[format_vector(y) for y in chain]} -> {status}.")
    return EscapeTrace(
        y0=y0,
        chain=tuple(chain),
        digits=tuple(digits),
        status=status,
        left_candidates_at=left_at,
        closure=tuple(sorted(closure)),
        closure_closed=closed,
    )


def candidate_translates(triple: HadamardTriple, r: int, grid_denominator: Optional[int] = None,
                         budget: Optional[int] = None) -> List[Vector]:
    """
    Points y of the projected X_L box on the grid (1/q)Z^{d-r} (q = |det S2| by
    default) from which some transition lands on a translate where W_B vanishes.
    """
    decomposition = decompose(triple, r)
    q = grid_denominator or abs(decomposition.S2_matrix.det)
    budget = budget or spectral_setting("WORD_BUDGET")
    box = bounding_box(triple.dual_ifs())
    ranges = [
        range(math.ceil(lo * q), math.floor(hi * q) + 1)
        for lo, hi in zip(box.lo[r:], box.hi[r:])
    ]
    count = math.prod(len(rng) for rng in ranges)
    if count > budget:
        raise BudgetExceeded("translate grid points", count, budget)

    l2_values = sorted({decomposition.second(l) for l in triple.L})
    found = []
    for numerators in product(*ranges):
        y = tuple(Fraction(n, q) for n in numerators)
        if any(_vanishes_exact(decomposition, decomposition.image(y, l2)) for l2 in l2_values):
            found.append(y)
    logger.info(f"{len(found)} candidate translates among {count} grid points.")
    return found


# --- Condition checks for subspace spectra ---

@dataclass
class ConditionReport:
    kind: str
    r: int
    y0: Vector
    fixed_digit: Optional[IntVector]
    L1: List[IntVector]
    conditions: Dict[str, Dict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        # UNVERIFIED (no-overlap) does not block.
        return all(c["status"] != FAIL for c in self.conditions.values())

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "r": self.r,
            "y0": format_vector(self.y0),
            "fixed_digit": list(self.fixed_digit) if self.fixed_digit is not None else None,
            "L1": [list(l) for l in self.L1],
            "conditions": self.conditions,
            "passed": self.passed,
        }


def default_lambda1(decomposition: BlockDecomposition, l2: Sequence[int], depth: int) -> SpectrumApprox:
    """{Σ_{k<n} S1^k a_k : a_k ∈ L_1(l2)}, the candidate spectrum of the first-block measure."""
    digits = DigitSet(decomposition.first_digits(l2), "L1", require_zero=False)
    return generate_spectrum(
        decomposition.S1_matrix, digits, [tuple([0] * decomposition.r)], depth,
        provenance={"kind": "lambda1", "L1": digits.to_list()},
    )


def _containment(decomposition: BlockDecomposition, y0: Vector, L1: List[IntVector], lambda1: SpectrumApprox,
                 depth: Optional[int]) -> Dict:
    """Every λ of Λ1 truncated at n is S1λ' - C y0 + l1 with λ' ∈ Λ1 truncated at n+1."""
    n = lambda1.depth - 1 if depth is None else depth
    if n < 0 or n + 1 > lambda1.depth:
        return {"status": FAIL, "detail": f"Λ1 of depth {lambda1.depth} cannot check truncation {n}"}
    outer = set(lambda1.truncated(n + 1))
    inverse = matrix_inverse_power(decomposition.S1_matrix, 1)
    shift = mat_vec(decomposition.C, y0)
    missing = []
    for lam in lambda1.truncated(n):
        if not any(
            mat_vec(inverse, [a + c - l for a, c, l in zip(lam, shift, l1)]) in outer for l1 in L1
        ):
            missing.append(lam)
    return {
        "status": PASS if not missing else FAIL,
        "truncation": n,
        "checked": len(lambda1.truncated(n)),
        "missing": [format_vector(m) for m in missing[:10]],
    }


def _periodicity(decomposition: BlockDecomposition, y0: Vector, lambda1: SpectrumApprox,
                 seed: Optional[int]) -> Dict:
    """W_B(z + S^n (λ1, -y0)) = W_B(z) at 100 random z for sampled λ1 and n <= n_max."""
    triple = decomposition.triple
    n_max = spectral_setting("PERIOD_MAX_N")
    seed = spectral_setting("SEED") if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(decomposition.r, 2)))
    elements = lambda1.elements()
    picks = sorted(rng.choice(len(elements), size=min(16, len(elements)), replace=False))
    zs = rng.random((100, triple.dim))
    base = wb_eval_shifted(triple.B, zs, tuple([0] * triple.dim))
    S = Matrix(triple.S.entries)

    structural = lambda1.is_integral() and all(v.denominator == 1 for v in y0)
    worst = 0.0
    for index in picks:
        vector = fractions_to_sympy([[v] for v in (*elements[index], *(-v for v in y0))])
        for n in range(n_max + 1):
            shift = tuple(Fraction(int(v.p), int(v.q)) for v in (S ** n) * vector)
            worst = max(worst, float(np.max(np.abs(wb_eval_shifted(triple.B, zs, shift) - base))))
    return {
        "status": PASS if worst < _ZERO else FAIL,
        "structural": "Λ1 ⊂ Z^r" if structural else None,
        "max_difference": worst,
        "n_max": n_max,
        "sampled": len(picks),
    }


def _no_overlap(decomposition: BlockDecomposition) -> Dict:
    distinct = check_incongruence(decomposition.projections, decomposition.A1_matrix)
    return {
        "status": PASS if distinct else UNVERIFIED,
        "detail": "r_i pairwise distinct mod A1 Z^r" if distinct else "r_i not distinct mod A1 Z^r; overlap not ruled out",
    }


def _hadamard_subtriple(decomposition: BlockDecomposition, L1: List[IntVector]) -> Dict:
    if len(L1) != decomposition.N1:
        return {"status": FAIL, "detail": f"#L1 = {len(L1)} but N1 = {decomposition.N1}"}
    try:
        accepted, defect = is_hadamard_triple(
            decomposition.A1_matrix, decomposition.projections, DigitSet(L1, "L1", require_zero=False)
        )
    except ValidationError as e:
        return {"status": FAIL, "detail": str(e)}
    return {"status": PASS if accepted else FAIL, "defect": defect, "L1": [list(l) for l in L1]}


def _condition_report(kind: str, triple: HadamardTriple, r: int, y0: Vector, lambda1: SpectrumApprox,
                      depth: Optional[int], seed: Optional[int]) -> ConditionReport:
    decomposition = decompose(triple, r)
    if lambda1.dim != r:
        raise DimensionMismatch(f"Λ1 must live in dimension {r}, got {lambda1.dim}")
    fixed = [l for l in triple.L if decomposition.image(y0, decomposition.second(l)) == y0]
    if not fixed:
        raise NoFixedDigit(f"no l ∈ L has σ_l2({format_vector(y0)}) = {format_vector(y0)}")
    l2 = decomposition.second(fixed[0])
    L1 = decomposition.first_digits(l2)

    report = ConditionReport(kind=kind, r=r, y0=y0, fixed_digit=fixed[0], L1=L1)
    parseval = parseval_certify(decomposition.A1_matrix, decomposition.projection_digits, lambda1, seed=seed)
    report.conditions["parseval"] = {
        "status": parseval.verdict,
        "max_deviation": parseval.max_deviation,
        "tolerance": parseval.tolerance,
    }
    checks = {
        "containment": lambda: _containment(decomposition, y0, L1, lambda1, depth),
        "periodicity": lambda: _periodicity(decomposition, y0, lambda1, seed),
        "no_overlap": lambda: _no_overlap(decomposition),
        "hadamard_subtriple": lambda: _hadamard_subtriple(decomposition, L1),
    }
    results = worker_pool.map(lambda item: (item[0], item[1]()), list(checks.items()))
    report.conditions.update(dict(results))
    return report


@with_stage_timing("check_corollary_conditions")
def check_corollary_conditions(triple: HadamardTriple, r: int, lambda1: SpectrumApprox,
                               depth: Optional[int] = None, seed: Optional[int] = None) -> ConditionReport:
    """The conditions for R^r × {0}: Λ1 a spectrum, S1Λ1 + L1(0) ⊇ Λ1, Λ1 periods, no overlap, subtriple."""
    zero = tuple([Fraction(0)] * (triple.dim - r))
    return _condition_report("corollary", triple, r, zero, lambda1, depth, seed)


@with_stage_timing("check_theorem_conditions")
def check_theorem_conditions(triple: HadamardTriple, r: int, y0: Sequence, lambda1: SpectrumApprox,
                             depth: Optional[int] = None, seed: Optional[int] = None) -> ConditionReport:
    """As the corollary check for a general translate R^r × {y0}, plus equal fiber sizes."""
    report = _condition_report("theorem", triple, r, to_vector(y0), lambda1, depth, seed)
    decomposition = decompose(triple, r)
    report.conditions["equal_fibers"] = {
        "status": PASS if decomposition.has_equal_fibers() else FAIL,
        "N2": list(decomposition.N2),
    }
    return report


@with_stage_timing("subspace_spectrum")
def subspace_spectrum(triple: HadamardTriple, r: int, y0: Sequence, lambda1: SpectrumApprox, depth: int,
                      report: Optional[ConditionReport] = None) -> SpectrumApprox:
    """Λ_n = L + SL + ⋯ + S^{n-1}L + S^n(Λ1 × {-y0})."""
    y0 = to_vector(y0)
    report = report or check_theorem_conditions(triple, r, y0, lambda1)
    if not report.passed:
        failed = sorted(k for k, c in report.conditions.items() if c["status"] == FAIL)
        raise ConditionsNotMet(f"conditions {failed} failed for R^{r}×{{{','.join(format_vector(y0))}}}")
    seeds = [tuple(lam) + tuple(-v for v in y0) for lam in lambda1.elements()]
    spectrum = generate_spectrum(
        triple.S, triple.L, seeds, depth,
        provenance={"kind": "subspace", "r": r, "y0": format_vector(y0), "lambda1_depth": lambda1.depth},
    )
    if not spectrum.nested:
        logger.warning(f"Subspace spectrum for r={r} is not nested; the containment condition should prevent this.")
    return spectrum
