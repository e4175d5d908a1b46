# --- Python Standard Library Imports ---
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import List, Optional, Sequence, Tuple

# --- Third-Party Library Imports ---
import numpy as np
from sympy import Matrix

# --- Local Application Imports ---
from .exceptions import (
    BudgetExceeded,
    DimensionMismatch,
    NonUnimodular,
    NotExpanding,
    RankDeficient,
    ValidationError,
)
from .utils import as_fraction

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]
Vector = Tuple[Fraction, ...]
IntMatrix = Tuple[Tuple[int, ...], ...]
RationalMatrix = Tuple[Tuple[Fraction, ...], ...]

# Eigenvalue moduli must clear 1 by this margin.
EXPANSION_MARGIN = 1e-9


# --- Small exact helpers ---

def to_int_matrix(rows: Sequence[Sequence]) -> IntMatrix:
    try:
        matrix = tuple(tuple(int(v) for v in row) for row in rows)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"matrix entries must be integers: {e}") from e
    for row, original in zip(matrix, rows):
        if any(int(v) != v for v in original):
            raise ValidationError("matrix entries must be integers")
    return matrix


def to_vector(values: Sequence) -> Vector:
    return tuple(as_fraction(v) for v in values)


def mat_vec(matrix: Sequence[Sequence], vector: Sequence) -> tuple:
    return tuple(sum(a * x for a, x in zip(row, vector)) for row in matrix)


def mat_mul(left: Sequence[Sequence], right: Sequence[Sequence]) -> tuple:
    columns = list(zip(*right))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in columns) for row in left)


def transpose(matrix: Sequence[Sequence]) -> tuple:
    return tuple(zip(*matrix))


def identity(dim: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim))


def sympy_to_fractions(matrix: Matrix) -> RationalMatrix:
    return tuple(
        tuple(Fraction(int(matrix[i, j].p), int(matrix[i, j].q)) for j in range(matrix.cols))
        for i in range(matrix.rows)
    )


def fractions_to_sympy(matrix: Sequence[Sequence]) -> Matrix:
    from sympy import Rational
    return Matrix([[Rational(as_fraction(v).numerator, as_fraction(v).denominator) for v in row] for row in matrix])


def infinity_norm(matrix: Sequence[Sequence]) -> Fraction:
    """Maximum absolute row sum, exact for rational entries."""
    return max(sum(abs(as_fraction(v)) for v in row) for row in matrix)


def float_matrix(matrix: Sequence[Sequence]) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in matrix], dtype=float)


def is_integral(vector: Sequence) -> bool:
    return all(as_fraction(v).denominator == 1 for v in vector)


# --- Domain types ---

def is_expanding(rows: Sequence[Sequence]) -> Tuple[bool, float]:
    """
    Tests whether every eigenvalue of a square integer matrix has modulus > 1.
    Returns the verdict and the smallest modulus so callers can report the margin.
    """
    if any(len(row) != len(rows) for row in rows):
        raise DimensionMismatch(f"expected a square matrix, got rows of lengths {[len(row) for row in rows]}")
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise DimensionMismatch(f"expected a square matrix, got shape {matrix.shape}")
    min_modulus = float(np.min(np.abs(np.linalg.eigvals(matrix))))
    return min_modulus > 1 + EXPANSION_MARGIN, min_modulus


@dataclass(frozen=True)
class ExpandingMatrix:
    """A d×d integer matrix whose eigenvalues all lie outside the closed unit disc."""
    entries: IntMatrix

    def __post_init__(self):
        object.__setattr__(self, "entries", to_int_matrix(self.entries))
        expanding, min_modulus = is_expanding(self.entries)
        if not expanding:
            raise NotExpanding(
                f"R is not expanding: smallest eigenvalue modulus is {min_modulus:.6g}, "
                f"all eigenvalues must satisfy |λ| > 1"
            )

    @property
    def dim(self) -> int:
        return len(self.entries)

    @cached_property
    def min_modulus(self) -> float:
        return is_expanding(self.entries)[1]

    @cached_property
    def det(self) -> int:
        return int(Matrix(self.entries).det())

    def transpose(self) -> "ExpandingMatrix":
        return ExpandingMatrix(transpose(self.entries))

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(self.dim) for j in range(self.dim) if i != j)

    def inverse_power(self, k: int) -> RationalMatrix:
        return matrix_inverse_power(self, k)

    def inverse_array(self, k: int = 1) -> np.ndarray:
        return float_matrix(matrix_inverse_power(self, k))

    def to_list(self) -> List[List[int]]:
        return [list(row) for row in self.entries]


@dataclass(frozen=True)
class DigitSet:
    """A finite list of integer vectors (the B side or the L side of a triple)."""
    vectors: Tuple[IntVector, ...]
    role: str = "B"
    require_zero: bool = True

    def __post_init__(self):
        vectors = tuple(tuple(v) for v in to_int_matrix(self.vectors))
        object.__setattr__(self, "vectors", vectors)
        if not vectors:
            raise ValidationError(f"digit set {self.role} is empty")
        dims = {len(v) for v in vectors}
        if len(dims) != 1:
            raise DimensionMismatch(f"digit set {self.role} mixes dimensions {sorted(dims)}")
        if len(set(vectors)) != len(vectors):
            duplicates = sorted({v for v in vectors if vectors.count(v) > 1})
            raise ValidationError(f"digit set {self.role} has duplicate vectors {duplicates}")
        if self.require_zero and tuple([0] * self.dim) not in vectors:
            raise ValidationError(f"0 ∈ {self.role} required")

    @property
    def dim(self) -> int:
        return len(self.vectors[0])

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, index: int) -> IntVector:
        return self.vectors[index]

    def as_array(self) -> np.ndarray:
        return np.array(self.vectors, dtype=np.int64).reshape(len(self.vectors), self.dim)

    def to_list(self) -> List[List[int]]:
        return [list(v) for v in self.vectors]


@lru_cache(maxsize=256)
def _inverse_power(entries: IntMatrix, k: int) -> RationalMatrix:
    return sympy_to_fractions((Matrix(entries) ** k).inv())


def matrix_inverse_power(R: ExpandingMatrix, k: int) -> RationalMatrix:
    """Exact rational R^{-k}."""
    if k < 1:
        raise ValidationError(f"power must be >= 1, got {k}")
    return _inverse_power(R.entries, k)


@dataclass(frozen=True)
class ContractionProfile:
    """Norms of the inverse powers M^{-1}, …, M^{-k0}, where k0 is the first with norm < 1."""
    k0: int
    norms: Tuple[float, ...]

    @property
    def ratio(self) -> float:
        return self.norms[-1]

    def power_sum(self, exponent: int = 1) -> float:
        """Upper bound for Σ_{j≥1} ‖M^{-j}‖∞^exponent."""
        head = sum(n ** exponent for n in self.norms)
        return head / (1.0 - self.ratio ** exponent)


@lru_cache(maxsize=64)
def _contraction_profile(entries: IntMatrix, max_power: int) -> ContractionProfile:
    R = ExpandingMatrix(entries)
    norms = []
    for k in range(1, max_power + 1):
        norm = infinity_norm(matrix_inverse_power(R, k))
        norms.append(float(norm))
        if norm < 1:
            return ContractionProfile(k0=k, norms=tuple(norms))
    raise AssertionError(f"no inverse power up to {max_power} contracts in the infinity norm")


def contraction_profile(R: ExpandingMatrix, max_power: int = 64) -> ContractionProfile:
    return _contraction_profile(R.entries, max_power)


# --- Lattices ---

def _extgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def column_hermite_form(columns: Sequence[Sequence[int]], dim: int) -> List[List[int]]:
    """
    Lower-triangular column Hermite form of the integer lattice spanned by `columns`.

    Returns `dim` basis columns with positive diagonal; entries left of the
    diagonal are reduced into [0, diagonal). Raises RankDeficient when the
    columns do not span a full-rank lattice.
    """
    remaining = [list(map(int, c)) for c in columns if any(c)]
    basis: List[List[int]] = []
    for i in range(dim):
        pivot = None
        rest = []
        for col in remaining:
            if col[i] == 0:
                rest.append(col)
            elif pivot is None:
                pivot = col
            else:
                g, s, t = _extgcd(pivot[i], col[i])
                a, b = pivot[i] // g, col[i] // g
                combined = [s * p + t * c for p, c in zip(pivot, col)]
                eliminated = [b * p - a * c for p, c in zip(pivot, col)]
                pivot = combined
                if any(eliminated):
                    rest.append(eliminated)
        if pivot is None:
            rank = Matrix([list(c) for c in columns]).T.rank() if columns else 0
            raise RankDeficient(rank, dim)
        if pivot[i] < 0:
            pivot = [-v for v in pivot]
        for col in basis:
            q = col[i] // pivot[i]
            if q:
                col[:] = [v - q * p for v, p in zip(col, pivot)]
        basis.append(pivot)
        remaining = rest
    return basis


@dataclass(frozen=True)
class LatticeBasis:
    """A full-rank rational lattice given by lower-triangular basis columns."""
    basis: Tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def entry(self, i: int, j: int) -> Fraction:
        return self.basis[j][i]

    def coordinates(self, x: Sequence) -> Vector:
        """Solve G c = x by forward substitution (G is lower triangular)."""
        x = to_vector(x)
        if len(x) != self.dim:
            raise DimensionMismatch(f"point has dimension {len(x)}, lattice has {self.dim}")
        coords: List[Fraction] = []
        for i in range(self.dim):
            partial = sum((self.entry(i, j) * coords[j] for j in range(i)), Fraction(0))
            coords.append((x[i] - partial) / self.entry(i, i))
        return tuple(coords)

    def contains(self, x: Sequence) -> bool:
        return is_integral(self.coordinates(x))

    def points_in_box(self, lo: Sequence, hi: Sequence, budget: Optional[int] = None) -> List[Vector]:
        """All lattice points x with lo <= x <= hi coordinatewise, in lexicographic coefficient order."""
        lo, hi = to_vector(lo), to_vector(hi)
        points: List[Vector] = []

        def extend(i: int, coords: List[int]):
            if i == self.dim:
                point = tuple(
                    sum((self.entry(k, j) * coords[j] for j in range(k + 1)), Fraction(0))
                    for k in range(self.dim)
                )
                points.append(point)
                if budget is not None and len(points) > budget:
                    raise BudgetExceeded("lattice points in box", len(points), budget)
                return
            partial = sum((self.entry(i, j) * coords[j] for j in range(i)), Fraction(0))
            diag = self.entry(i, i)
            first = math.ceil((lo[i] - partial) / diag)
            last = math.floor((hi[i] - partial) / diag)
            for c in range(first, last + 1):
                extend(i + 1, coords + [c])

        extend(0, [])
        return points

    def to_list(self) -> List[List[Fraction]]:
        return [list(v) for v in self.basis]


def dual_lattice(B: DigitSet) -> LatticeBasis:
    """
    Γ = {γ : γ·b ∈ Z for every b ∈ B}, as a canonical lower-triangular basis.
    """
    H = column_hermite_form(B.vectors, B.dim)
    # Matrix(H) holds the basis columns as rows; the rows of H^{-1} span the dual.
    dual = sympy_to_fractions(Matrix(H).T.inv())
    denominator = 1
    for row in dual:
        for v in row:
            denominator = denominator * v.denominator // math.gcd(denominator, v.denominator)
    scaled = [[int(v * denominator) for v in row] for row in dual]
    canonical = column_hermite_form(scaled, B.dim)
    basis = tuple(tuple(Fraction(v, denominator) for v in col) for col in canonical)
    logger.info(f"Dual lattice of {len(B)} digits in dimension {B.dim}: basis {basis}")
    return LatticeBasis(basis=basis)


# --- Unimodular conjugation ---

@dataclass(frozen=True)
class UnimodularMatrix:
    entries: IntMatrix

    def __post_init__(self):
        entries = to_int_matrix(self.entries)
        object.__setattr__(self, "entries", entries)
        if any(len(row) != len(entries) for row in entries):
            raise DimensionMismatch("a unimodular matrix must be square")
        det = int(Matrix(entries).det())
        if abs(det) != 1:
            raise NonUnimodular(f"|det M| must be 1, got det M = {det}")

    @property
    def dim(self) -> int:
        return len(self.entries)

    def inverse(self) -> IntMatrix:
        inverse = Matrix(self.entries).inv()
        return tuple(tuple(int(inverse[i, j]) for j in range(self.dim)) for i in range(self.dim))

    def inverse_transpose(self) -> IntMatrix:
        return transpose(self.inverse())

    def to_list(self) -> List[List[int]]:
        return [list(row) for row in self.entries]


def random_unimodular(dim: int, rng: np.random.Generator, steps: int = 6) -> UnimodularMatrix:
    """A product of elementary integer row operations (additions, swaps and sign flips)."""
    rows = [list(r) for r in identity(dim)]
    for _ in range(steps):
        if dim == 1:
            rows[0][0] = -rows[0][0]
            continue
        i, j = rng.choice(dim, size=2, replace=False)
        move = rng.integers(3)
        if move == 0:
            factor = int(rng.choice([-2, -1, 1, 2]))
            rows[i] = [a + factor * b for a, b in zip(rows[i], rows[j])]
        elif move == 1:
            rows[i], rows[j] = rows[j], rows[i]
        else:
            rows[i] = [-a for a in rows[i]]
    return UnimodularMatrix(tuple(tuple(r) for r in rows))


def conjugate_triple(M: UnimodularMatrix, triple):
    """
    Returns the conjugate triple (M R M^{-1}, M B, (M^T)^{-1} L).
    Digit order is preserved, so the Hadamard matrix keeps its row and column order.
    """
    # Local import to prevent circular dependency: hadamard_service imports this module.
    from .hadamard_service import HadamardTriple

    if M.dim != triple.R.dim:
        raise DimensionMismatch(f"M is {M.dim}×{M.dim} but the triple lives in dimension {triple.R.dim}")
    R2 = mat_mul(mat_mul(M.entries, triple.R.entries), M.inverse())
    B2 = [mat_vec(M.entries, b) for b in triple.B]
    L2 = [mat_vec(M.inverse_transpose(), l) for l in triple.L]
    assert all(isinstance(v, int) for row in R2 for v in row), "conjugated scaling must be integral"
    logger.info(f"Conjugated triple by M={M.to_list()}: R={[list(r) for r in R2]}")
    return HadamardTriple.build(ExpandingMatrix(R2), DigitSet(B2, "B"), DigitSet(L2, "L"))
