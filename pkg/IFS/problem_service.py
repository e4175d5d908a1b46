# --- Python Standard Library Imports ---
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

# --- Local Application Imports ---
from .exceptions import DimensionMismatch, ParseError, ValidationError
from .forms import ProblemForm
from .hadamard_service import HadamardTriple
from .lattice_service import DigitSet, ExpandingMatrix, UnimodularMatrix, Vector, to_vector
from .path_service import InvariantSetSpec
from .utils import format_vector

# Get a logger instance for this file.
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemFile:
    name: str
    triple: HadamardTriple
    M: Optional[UnimodularMatrix] = None
    params: Dict = field(default_factory=dict)
    source: Optional[str] = None

    @property
    def dim(self) -> int:
        return self.triple.dim

    def param(self, key: str, default=None):
        return self.params.get(key, default)

    def to_dict(self) -> Dict:
        """Canonical form: the fields that define the problem, nothing derived."""
        data = {
            "name": self.name,
            "dimension": self.dim,
            "R": self.triple.R.to_list(),
            "B": self.triple.B.to_list(),
            "L": self.triple.L.to_list(),
        }
        if self.M is not None:
            data["M"] = self.M.to_list()
        if self.params:
            data["params"] = dict(sorted(self.params.items()))
        return data


def _read_json(path: Union[str, Path]) -> Dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ParseError(f"{path} must hold a JSON object at the top level")
    return data


def _form_errors(form: ProblemForm) -> str:
    messages = []
    for name, errors in form.errors.items():
        prefix = "" if name == "__all__" else f"{name}: "
        messages.extend(f"{prefix}{error}" for error in errors)
    return "; ".join(messages)


def problem_from_dict(data: Dict, source: Optional[str] = None) -> ProblemFile:
    """Validates a problem mapping with ProblemForm and builds the triple."""
    form = ProblemForm(data=data)
    if not form.is_valid():
        raise ValidationError(_form_errors(form))
    cleaned = form.cleaned_data
    triple = HadamardTriple.build(cleaned["R"], cleaned["B"], cleaned["L"])
    name = cleaned.get("name") or (Path(source).stem if source else "problem")
    logger.info(f"Loaded problem '{name}' (d={triple.dim}, N={triple.N}, Hadamard defect {triple.defect:.3e}).")
    return ProblemFile(name=name, triple=triple, M=cleaned.get("M"), params=cleaned.get("params") or {},
                       source=source)


def parse_problem(path: Union[str, Path]) -> ProblemFile:
    """Reads and validates a JSON problem file."""
    return problem_from_dict(_read_json(path), source=str(path))


def serialize_problem(problem: ProblemFile) -> str:
    return json.dumps(problem.to_dict(), sort_keys=True, indent=2) + "\n"


# --- Side files: spectra, analyses and invariant sets ---

def _vector(values, what: str) -> Vector:
    try:
        return to_vector(values)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"{what} must be a list of rationals ('p/q' strings or integers): {e}") from e


def _int(data: Dict, key: str, default=None) -> Optional[int]:
    value = data.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"'{key}' must be an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class Lambda1Spec:
    """Generator of the first-block spectrum: depth applications of Λ ↦ scale·Λ + digits to {0}."""
    scale: Optional[ExpandingMatrix]
    digits: Optional[DigitSet]
    depth: int

    def to_dict(self) -> Dict:
        return {
            "scale": self.scale.to_list() if self.scale else None,
            "digits": self.digits.to_list() if self.digits else None,
            "depth": self.depth,
        }


def parse_lambda1(data: Optional[Dict], default_depth: int = 6) -> Lambda1Spec:
    if not data:
        return Lambda1Spec(scale=None, digits=None, depth=default_depth)
    scale = ExpandingMatrix(data["scale"]) if data.get("scale") else None
    digits = DigitSet(data["digits"], "Λ1 digits", require_zero=False) if data.get("digits") else None
    return Lambda1Spec(scale=scale, digits=digits, depth=_int(data, "depth", default_depth))


@dataclass(frozen=True)
class AnalysisSpec:
    r: int
    M: Optional[UnimodularMatrix] = None
    y0: Optional[Vector] = None
    lambda1: Lambda1Spec = field(default_factory=lambda: Lambda1Spec(None, None, 6))
    spectrum_depth: int = 4
    max_steps: int = 10
    grid_denominator: Optional[int] = None

    def to_dict(self) -> Dict:
        return {
            "r": self.r,
            "M": self.M.to_list() if self.M else None,
            "y0": format_vector(self.y0) if self.y0 is not None else None,
            "lambda1": self.lambda1.to_dict(),
            "spectrum_depth": self.spectrum_depth,
            "max_steps": self.max_steps,
            "grid_denominator": self.grid_denominator,
        }


def analysis_from_dict(data: Dict) -> AnalysisSpec:
    if "r" not in data:
        raise ValidationError("an analysis spec needs the sub-dimension 'r'")
    return AnalysisSpec(
        r=_int(data, "r"),
        M=UnimodularMatrix(data["M"]) if data.get("M") else None,
        y0=_vector(data["y0"], "y0") if data.get("y0") is not None else None,
        lambda1=parse_lambda1(data.get("lambda1")),
        spectrum_depth=_int(data, "spectrum_depth", 4),
        max_steps=_int(data, "max_steps", 10),
        grid_denominator=_int(data, "grid_denominator"),
    )


def parse_analysis(path: Union[str, Path]) -> AnalysisSpec:
    return analysis_from_dict(_read_json(path))


SPECTRUM_KINDS = ("cycle", "subspace", "explicit", "generated")


@dataclass(frozen=True)
class SpectrumSpec:
    """How to build a candidate spectrum: from a W_B-cycle word, a subspace translate, explicit points or seeds."""
    kind: str
    depth: int = 0
    word: Optional[List[List[int]]] = None
    r: Optional[int] = None
    y0: Optional[Vector] = None
    lambda1: Optional[Lambda1Spec] = None
    points: Optional[List[Vector]] = None

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "depth": self.depth,
            "word": self.word,
            "r": self.r,
            "y0": format_vector(self.y0) if self.y0 is not None else None,
            "lambda1": self.lambda1.to_dict() if self.lambda1 else None,
            "points": [format_vector(p) for p in self.points] if self.points else None,
        }


def spectrum_spec_from_dict(data: Dict) -> SpectrumSpec:
    kind = data.get("kind")
    if kind not in SPECTRUM_KINDS:
        raise ValidationError(f"spectrum kind must be one of {SPECTRUM_KINDS}, got {kind!r}")
    depth = _int(data, "depth", 0)
    if kind == "cycle":
        if not data.get("word"):
            raise ValidationError("a cycle spectrum needs a nonempty 'word' of digit vectors")
        return SpectrumSpec(kind=kind, depth=depth, word=[[int(v) for v in l] for l in data["word"]])
    if kind == "subspace":
        return SpectrumSpec(
            kind=kind,
            depth=depth,
            r=_int(data, "r"),
            y0=_vector(data["y0"], "y0") if data.get("y0") is not None else None,
            lambda1=parse_lambda1(data.get("lambda1")),
        )
    key = "elements" if kind == "explicit" else "seed"
    if not data.get(key):
        raise ValidationError(f"a {kind} spectrum needs a nonempty '{key}' list")
    return SpectrumSpec(kind=kind, depth=depth, points=[_vector(p, key) for p in data[key]])


def parse_spectrum_spec(path: Union[str, Path]) -> SpectrumSpec:
    return spectrum_spec_from_dict(_read_json(path))


def invariant_set_from_dict(data: Dict, triple: Optional[HadamardTriple] = None) -> InvariantSetSpec:
    """
    {"kind": "subspace", "r": 1, "y0": ["0"]}, {"kind": "cycle", "word": [[0, 0]]} or
    {"kind": "cycle", "points": [...]}, {"kind": "union", "members": [...]}, {"kind": "full"}.
    """
    kind = data.get("kind")
    tol = data.get("tol")
    label = data.get("label", "")
    if kind == "subspace":
        r = _int(data, "r")
        if r is None:
            raise ValidationError("a subspace set needs the sub-dimension 'r'")
        y0 = _vector(data.get("y0", []), "y0")
        if triple is not None:
            if not 0 < r < triple.dim:
                raise ValidationError(f"'r' must satisfy 0 < r < {triple.dim}, got {r}")
            if len(y0) != triple.dim - r:
                raise DimensionMismatch(f"y0 must have d - r = {triple.dim - r} entries, got {len(y0)}")
        spec = InvariantSetSpec.subspace(r, y0, tol)
        return replace(spec, label=label) if label else spec
    if kind == "cycle" and data.get("word"):
        if triple is None:
            raise ValidationError("a cycle given by its word needs the problem's triple")
        # Local import: cycle_service pulls in the whole numerics stack.
        from .cycle_service import cycle_orbit, cycle_point
        word = [tuple(int(v) for v in l) for l in data["word"]]
        points = cycle_orbit(word, triple.S, cycle_point(word, triple.S, triple.L))
        return InvariantSetSpec(kind="cycle", points=points, tol=tol, label=label or f"cycle{[list(l) for l in word]}")
    if kind == "cycle":
        points = tuple(_vector(p, "cycle point") for p in data.get("points", []))
        return InvariantSetSpec(kind="cycle", points=points, tol=tol, label=label)
    if kind == "union":
        members = tuple(invariant_set_from_dict(m, triple) for m in data.get("members", []))
        return InvariantSetSpec(kind="union", members=members, tol=tol, label=label or "union")
    if kind in ("full", "empty"):
        return InvariantSetSpec(kind=kind, label=label or kind)
    raise ValidationError(f"unknown invariant set kind {kind!r}")


@dataclass(frozen=True)
class InvariantSetsFile:
    sets: List[InvariantSetSpec]
    starts: List[List[float]]
    intersections: List[tuple]
    spectra: List[SpectrumSpec]


def invariant_sets_from_dict(data: Dict, triple: HadamardTriple) -> InvariantSetsFile:
    if not data.get("sets"):
        raise ValidationError("an invariant-set file needs a nonempty 'sets' list")
    sets = [invariant_set_from_dict(s, triple) for s in data["sets"]]
    starts = [[float(v) for v in _vector(x, "start point")] for x in data.get("starts", [])]
    intersections = []
    for entry in data.get("intersections", []):
        i, j = entry["sets"]
        if not (0 <= i < len(sets) and 0 <= j < len(sets)):
            raise ValidationError(f"intersection refers to sets {i}, {j} but only {len(sets)} are given")
        intersections.append((i, j, invariant_set_from_dict(entry["set"], triple)))
    spectra = [spectrum_spec_from_dict(s) for s in data.get("spectra", [])]
    return InvariantSetsFile(sets=sets, starts=starts, intersections=intersections, spectra=spectra)


def parse_invariant_sets(path: Union[str, Path], triple: HadamardTriple) -> InvariantSetsFile:
    return invariant_sets_from_dict(_read_json(path), triple)
