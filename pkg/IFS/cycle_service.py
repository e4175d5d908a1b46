# --- Python Standard Library Imports ---
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Set, Tuple

# --- Third-Party Library Imports ---
from sympy import Matrix, eye

# --- Local Application Imports ---
from .conf import spectral_setting
from .exceptions import BudgetExceeded, NotWbCycle, RankDeficient, ValidationError
from .fourier_service import SpectrumApprox, generate_spectrum, wb_eval_rational
from .hadamard_service import HadamardTriple, check_incongruence
from .ifs_service import bounding_box
from .lattice_service import (
    DigitSet,
    ExpandingMatrix,
    IntVector,
    RationalMatrix,
    Vector,
    dual_lattice,
    mat_vec,
    matrix_inverse_power,
    sympy_to_fractions,
)
from .utils import format_vector, with_stage_timing, worker_pool

# Get a logger instance for this file.
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cycle:
    """
    A cycle of the dual maps: x_j = σ_{l_j}(x_{j-1}) and σ_{l_m}(x_{m-1}) = x_0.
    `word` holds the digit vectors, `indices` their positions in L.
    """
    word: Tuple[IntVector, ...]
    indices: Tuple[int, ...]
    points: Tuple[Vector, ...]
    wb_values: Tuple[float, ...]
    is_wb: bool

    @property
    def length(self) -> int:
        return len(self.word)

    def to_dict(self) -> Dict:
        return {
            "word": [list(l) for l in self.word],
            "indices": list(self.indices),
            "points": [format_vector(p) for p in self.points],
            "wb_values": list(self.wb_values),
            "is_wb": self.is_wb,
        }


@lru_cache(maxsize=256)
def _cycle_solver(S_entries, m: int) -> RationalMatrix:
    """(I - S^{-m})^{-1}; invertible because S is expanding."""
    S = Matrix(S_entries)
    system = eye(S.rows) - (S ** m).inv()
    assert system.det() != 0, "I - S^{-m} is singular for an expanding S"
    return sympy_to_fractions(system.inv())


def cycle_point(word: Sequence[Sequence[int]], S: ExpandingMatrix, L: Optional[DigitSet] = None) -> Vector:
    """
    The unique x_0 with σ_{l_m}∘⋯∘σ_{l_1}(x_0) = x_0, i.e.
    x_0 = S^{-m} x_0 + Σ_j S^{-(m-j+1)} l_j, solved exactly.
    """
    word = [tuple(int(v) for v in l) for l in word]
    if not word:
        raise ValidationError("a cycle word must be nonempty")
    if L is not None and any(l not in L.vectors for l in word):
        raise ValidationError(f"word {word} uses digits outside L")
    m = len(word)
    offset = [Fraction(0)] * S.dim
    for j, l in enumerate(word, start=1):
        term = mat_vec(matrix_inverse_power(S, m - j + 1), l)
        offset = [a + b for a, b in zip(offset, term)]
    return mat_vec(_cycle_solver(S.entries, m), offset)


def cycle_orbit(word: Sequence[Sequence[int]], S: ExpandingMatrix, x0: Vector) -> Tuple[Vector, ...]:
    """x_0, σ_{l_1}x_0, …, σ_{l_{m-1}}⋯σ_{l_1}x_0; asserts the word returns to x_0."""
    inverse = matrix_inverse_power(S, 1)
    points = [tuple(x0)]
    current = tuple(x0)
    for l in word:
        current = mat_vec(inverse, [a + b for a, b in zip(current, l)])
        points.append(current)
    assert points[-1] == points[0], "cycle word does not return to its starting point"
    return tuple(points[:-1])


def _is_least_primitive_rotation(word: Tuple[int, ...]) -> bool:
    m = len(word)
    for shift in range(1, m):
        rotated = word[shift:] + word[:shift]
        if rotated < word:
            return False
        if rotated == word:
            # a proper power of a shorter word
            return False
    return True


def _make_cycle(triple: HadamardTriple, indices: Tuple[int, ...], tol: float) -> Cycle:
    word = tuple(triple.L[i] for i in indices)
    x0 = cycle_point(word, triple.S)
    points = cycle_orbit(word, triple.S, x0)
    values = tuple(wb_eval_rational(triple.B, p) for p in points)
    return Cycle(
        word=word,
        indices=indices,
        points=points,
        wb_values=values,
        is_wb=all(abs(v - 1.0) <= tol for v in values),
    )


def cycle_from_word(triple: HadamardTriple, word: Sequence[Sequence[int]], tol: Optional[float] = None) -> Cycle:
    """The cycle generated by a word of digits from L, with its W_B values."""
    tol = spectral_setting("WB_ONE_TOL") if tol is None else tol
    word = [tuple(int(v) for v in l) for l in word]
    if not word:
        raise ValidationError("a cycle word must be nonempty")
    missing = [l for l in word if l not in triple.L.vectors]
    if missing:
        raise ValidationError(f"word uses digits {missing} outside L")
    return _make_cycle(triple, tuple(triple.L.vectors.index(l) for l in word), tol)


def _gamma_candidates(triple: HadamardTriple) -> Optional[Set[Vector]]:
    """Γ ∩ box for the dual attractor, or None when B does not span a lattice."""
    try:
        gamma = dual_lattice(triple.B)
    except RankDeficient as e:
        logger.warning(f"Candidate filter disabled: {e}")
        return None
    box = bounding_box(triple.dual_ifs())
    return set(gamma.points_in_box(box.lo, box.hi, budget=spectral_setting("WORD_BUDGET")))


def _words_for_first_letter(triple: HadamardTriple, first: int, m_max: int,
                            candidates: Optional[Set[Vector]], tol: float) -> List[Cycle]:
    found = []
    N = triple.N
    for m in range(1, m_max + 1):
        for tail in product(range(N), repeat=m - 1):
            indices = (first,) + tail
            if not _is_least_primitive_rotation(indices):
                continue
            word = tuple(triple.L[i] for i in indices)
            x0 = cycle_point(word, triple.S)
            if candidates is not None and x0 not in candidates:
                continue
            cycle = _make_cycle(triple, indices, tol)
            if candidates is not None and any(p not in candidates for p in cycle.points):
                continue
            if cycle.is_wb:
                found.append(cycle)
    return found


@with_stage_timing("enumerate_wb_cycles")
def enumerate_wb_cycles(triple: HadamardTriple, m_max: int, use_candidate_filter: bool = True,
                        budget: Optional[int] = None, tol: Optional[float] = None) -> List[Cycle]:
    """
    Every W_B-cycle of length <= m_max, once each, started at its least rotation.

    With the candidate filter, cycle points must lie in Γ ∩ box: W_B(x) = 1 forces
    every b·x to be an integer, and the points lie in the dual attractor.
    """
    if m_max < 1:
        raise ValidationError(f"m_max must be >= 1, got {m_max}")
    budget = budget or spectral_setting("WORD_BUDGET")
    tol = spectral_setting("WB_ONE_TOL") if tol is None else tol
    words = sum(triple.N ** m for m in range(1, m_max + 1))
    if words > budget:
        raise BudgetExceeded("cycle words", words, budget)

    candidates = _gamma_candidates(triple) if use_candidate_filter else None
    if candidates is not None:
        logger.info(f"{len(candidates)} lattice candidates for W_B-cycle points.")
    groups = worker_pool.map(
        lambda first: _words_for_first_letter(triple, first, m_max, candidates, tol),
        list(range(triple.N)),
    )
    cycles = sorted((c for group in groups for c in group), key=lambda c: (c.length, c.indices))
    logger.info(f"Found {len(cycles)} W_B-cycles up to length {m_max}.")
    return cycles


@dataclass(frozen=True)
class CandidateRecord:
    """How a Γ ∩ box candidate fares: its successors and the forced W_B = 1 chain."""
    point: Vector
    wb_value: float
    successors: Tuple[Vector, ...]
    successor_wb: Tuple[float, ...]
    forced_chain: Tuple[Vector, ...]
    status: str

    @property
    def max_successor_wb(self) -> float:
        return max(self.successor_wb)

    def to_dict(self) -> Dict:
        return {
            "point": format_vector(self.point),
            "wb_value": self.wb_value,
            "successors": [format_vector(p) for p in self.successors],
            "successor_wb": list(self.successor_wb),
            "max_successor_wb": self.max_successor_wb,
            "forced_chain": [format_vector(p) for p in self.forced_chain],
            "status": self.status,
        }


def candidate_report(triple: HadamardTriple, tol: Optional[float] = None) -> List[CandidateRecord]:
    """
    For each Γ ∩ box candidate, the W_B values of its one-step successors and the
    chain of successors forced by W_B = 1. A candidate lies on a W_B-cycle only if
    that chain returns to it.
    """
    tol = spectral_setting("WB_ONE_TOL") if tol is None else tol
    candidates = _gamma_candidates(triple)
    if candidates is None:
        return []
    inverse = matrix_inverse_power(triple.S, 1)

    def successors(point: Vector) -> List[Tuple[Vector, float]]:
        images = [mat_vec(inverse, [a + b for a, b in zip(point, l)]) for l in triple.L]
        return [(image, wb_eval_rational(triple.B, image)) for image in images]

    records = []
    for point in sorted(candidates):
        steps = successors(point)
        chain = [point]
        status = "rejected"
        current = point
        while True:
            forced = [image for image, value in successors(current) if abs(value - 1.0) <= tol and image in candidates]
            if not forced:
                break
            following = forced[0]
            if following == point:
                status = "cycle"
                break
            if following in chain:
                status = "feeds-cycle"
                break
            chain.append(following)
            current = following
        records.append(CandidateRecord(
            point=point,
            wb_value=wb_eval_rational(triple.B, point),
            successors=tuple(image for image, _ in steps),
            successor_wb=tuple(value for _, value in steps),
            forced_chain=tuple(chain),
            status=status,
        ))
    return records


def cycle_spectrum(cycle: Cycle, S: ExpandingMatrix, L: DigitSet, depth: int) -> SpectrumApprox:
    """Λ_n: n applications of Λ ↦ SΛ + L to -C."""
    if not cycle.is_wb:
        raise NotWbCycle(f"cycle {cycle.to_dict()['word']} has W_B values {list(cycle.wb_values)}")
    seed = [tuple(-v for v in p) for p in cycle.points]
    spectrum = generate_spectrum(
        S, L, seed, depth,
        provenance={"kind": "cycle", "word": [list(l) for l in cycle.word]},
    )
    if check_incongruence(L, S) and any(spectrum.collisions):
        logger.warning(f"Collisions {list(spectrum.collisions)} in a cycle spectrum with incongruent L.")
    return spectrum
