# --- Python Standard Library Imports ---
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

# --- Third-Party Library Imports ---
import numpy as np

# --- Local Application Imports ---
from .conf import spectral_setting
from .exceptions import BudgetExceeded, DimensionMismatch
from .ifs_service import AffineIfs
from .lattice_service import (
    DigitSet,
    ExpandingMatrix,
    column_hermite_form,
    is_integral,
    mat_vec,
    matrix_inverse_power,
)
from .utils import with_stage_timing, worker_pool

# Get a logger instance for this file.
logger = logging.getLogger(__name__)


def _vectors(digits) -> List[Tuple[int, ...]]:
    return [tuple(int(v) for v in d) for d in digits]


def _phase_matrix(R: ExpandingMatrix, B: Sequence, L: Sequence) -> np.ndarray:
    """(R^{-1} b)·l reduced mod 1 exactly, as floats in [0, 1)."""
    inverse = matrix_inverse_power(R, 1)
    scaled = [mat_vec(inverse, b) for b in B]
    phases = np.empty((len(B), len(L)))
    for i, rb in enumerate(scaled):
        for j, l in enumerate(L):
            value = sum((x * y for x, y in zip(rb, l)), Fraction(0))
            phases[i, j] = float(value - (value.numerator // value.denominator))
    return phases


def hadamard_matrix(R: ExpandingMatrix, B: Sequence, L: Sequence) -> np.ndarray:
    """
    The N×N matrix N^{-1/2} exp(2πi (R^{-1}b)·l), rows in B order and columns in L order.
    """
    B, L = _vectors(B), _vectors(L)
    if len(B) != len(L):
        raise DimensionMismatch(f"#B = {len(B)} but #L = {len(L)}")
    if any(len(v) != R.dim for v in B + L):
        raise DimensionMismatch(f"digits must live in dimension {R.dim}")
    return np.exp(2j * np.pi * _phase_matrix(R, B, L)) / np.sqrt(len(B))


def unitarity_defect(H: np.ndarray) -> float:
    """Max-norm distance of H*H from the identity."""
    return float(np.max(np.abs(H.conj().T @ H - np.eye(H.shape[0]))))


def is_hadamard_triple(R: ExpandingMatrix, B: Sequence, L: Sequence, tol: Optional[float] = None) -> Tuple[bool, float]:
    tol = spectral_setting("TOL_UNITARY") if tol is None else tol
    defect = unitarity_defect(hadamard_matrix(R, B, L))
    return defect < tol, defect


@dataclass(frozen=True)
class HadamardTriple:
    """(R, B, L) with the unitarity defect of its matrix computed once at construction."""
    R: ExpandingMatrix
    B: DigitSet
    L: DigitSet
    defect: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        if len(self.B) != len(self.L):
            raise DimensionMismatch(f"#B = {len(self.B)} but #L = {len(self.L)}")
        if self.B.dim != self.R.dim or self.L.dim != self.R.dim:
            raise DimensionMismatch(
                f"R is {self.R.dim}×{self.R.dim}, B has dimension {self.B.dim}, L has dimension {self.L.dim}"
            )

    @classmethod
    def build(cls, R: ExpandingMatrix, B: DigitSet, L: DigitSet) -> "HadamardTriple":
        _, defect = is_hadamard_triple(R, B, L, tol=np.inf)
        return cls(R=R, B=B, L=L, defect=defect)

    @property
    def N(self) -> int:
        return len(self.B)

    @property
    def dim(self) -> int:
        return self.R.dim

    @property
    def S(self) -> ExpandingMatrix:
        return self.R.transpose()

    def is_accepted(self, tol: Optional[float] = None) -> bool:
        tol = spectral_setting("TOL_UNITARY") if tol is None else tol
        return self.defect < tol

    def forward_ifs(self) -> AffineIfs:
        return AffineIfs(self.R, self.B)

    def dual_ifs(self) -> AffineIfs:
        return AffineIfs(self.S, self.L)

    def matrix(self) -> np.ndarray:
        return hadamard_matrix(self.R, self.B, self.L)


def check_incongruence(L: Sequence, S: ExpandingMatrix) -> bool:
    """True iff no difference of two elements of L lies in S Z^d."""
    inverse = matrix_inverse_power(S, 1)
    vectors = _vectors(L)
    for a, b in combinations(vectors, 2):
        if is_integral(mat_vec(inverse, [x - y for x, y in zip(a, b)])):
            return False
    return True


def residue_representatives(S: ExpandingMatrix) -> List[Tuple[int, ...]]:
    """
    One representative per class of Z^d / S Z^d: the box 0 <= x_i < h_ii of the
    lower-triangular Hermite form of S.
    """
    columns = [tuple(row[j] for row in S.entries) for j in range(S.dim)]
    H = column_hermite_form(columns, S.dim)
    diagonal = [H[i][i] for i in range(S.dim)]
    grids = np.meshgrid(*[np.arange(h) for h in diagonal], indexing="ij")
    return [tuple(int(v) for v in point) for point in np.stack([g.ravel() for g in grids], axis=1)]


def _extend_cliques(start: int, size: int, adjacency: np.ndarray) -> List[Tuple[int, ...]]:
    """All cliques of `size` vertices whose smallest vertex is `start`."""
    found = []

    def grow(clique: List[int], candidates: List[int]):
        if len(clique) == size:
            found.append(tuple(clique))
            return
        for k, v in enumerate(candidates):
            if len(clique) + len(candidates) - k < size:
                break
            grow(clique + [v], [w for w in candidates[k + 1:] if adjacency[v, w]])

    grow([start], [w for w in range(start + 1, adjacency.shape[0]) if adjacency[start, w]])
    return found


@with_stage_timing("search_completions")
def search_completions(
    R: ExpandingMatrix,
    B: DigitSet,
    residue_bound: Optional[int] = None,
    tol: Optional[float] = None,
) -> List[DigitSet]:
    """
    Every L ⊂ Z^d with 0 ∈ L, #L = #B, pairwise distinct residues mod S Z^d and a
    unitary Hadamard matrix, one representative per residue class. The search is
    exhaustive over the residue box and makes no claim beyond it.
    """
    residue_bound = residue_bound or spectral_setting("RESIDUE_BOUND")
    tol = spectral_setting("TOL_UNITARY") if tol is None else tol
    S = R.transpose()
    classes = abs(S.det)
    if classes > residue_bound:
        raise BudgetExceeded("residue classes mod S Z^d", classes, residue_bound)

    N = len(B)
    zero = tuple([0] * R.dim)
    if N == 1:
        return [DigitSet([zero], "L")]

    residues = residue_representatives(S)
    # Columns l, l' are orthogonal iff Σ_b exp(2πi (R^{-1}b)·(l - l')) = 0.
    columns = np.exp(2j * np.pi * _phase_matrix(R, B.vectors, residues))
    gram = np.abs(columns.conj().T @ columns)
    adjacency = gram < tol * N
    origin = residues.index(zero)
    partners = [i for i in range(len(residues)) if i != origin and adjacency[origin, i]]
    if len(partners) < N - 1:
        logger.info(f"No completion: only {len(partners)} residues are orthogonal to 0, {N - 1} needed.")
        return []

    sub = adjacency[np.ix_(partners, partners)]
    groups = worker_pool.map(lambda start: _extend_cliques(start, N - 1, sub), list(range(len(partners))))

    completions = []
    for group in groups:
        for clique in group:
            L = DigitSet([zero] + [residues[partners[k]] for k in clique], "L")
            accepted, _ = is_hadamard_triple(R, B, L, tol)
            if accepted:
                completions.append(L)
    logger.info(f"Completion search over {classes} residues found {len(completions)} sets L.")
    return completions
