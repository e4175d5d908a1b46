# --- Python Standard Library Imports ---
import logging
import time
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# --- Third-Party Library Imports ---
import numpy as np

# --- Local Application Imports ---
from .conf import spectral_setting
from .cycle_service import candidate_report, cycle_from_word, cycle_spectrum, enumerate_wb_cycles
from .exceptions import NoFixedDigit, RankDeficient, ValidationError
from .fourier_service import (
    SpectrumApprox,
    default_grid,
    generate_spectrum,
    mu_hat_batch,
    parseval_certify,
    partition_residual,
)
from .hadamard_service import HadamardTriple, check_incongruence, search_completions
from .ifs_service import attractor_cloud, bounding_box, invariance_residual
from .lattice_service import DigitSet, UnimodularMatrix, conjugate_triple, dual_lattice, random_unimodular
from .path_service import InvariantSetSpec, estimate_hF, ruelle_residual, simulate_paths, total_mass_check
from .problem_service import (
    AnalysisSpec,
    InvariantSetsFile,
    Lambda1Spec,
    ProblemFile,
    SpectrumSpec,
    problem_from_dict,
)
from .report_service import DETERMINISTIC, STOCHASTIC, RunReport, parseval_table, points_table, spectrum_table
from .subspace_service import (
    BlockDecomposition,
    candidate_translates,
    check_corollary_conditions,
    check_invariant_translate,
    check_theorem_conditions,
    decompose,
    default_lambda1,
    fixed_digits,
    subspace_spectrum,
    trace_escape,
)
from .utils import format_vector

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"
ORTHOGONALITY_TOL = 1e-8
CONJUGATION_TOL = 1e-10
PARTITION_TOL = 1e-12

# The worked example in two dimensions. M conjugates V_2 onto R × {0}.
EXAMPLE51 = {
    "name": "example51",
    "dimension": 2,
    "R": [[4, 0], [0, 4]],
    "B": [[0, 0], [0, 2], [1, 4], [1, 6]],
    "L": [[0, 0], [2, 0], [2, 1], [0, 5]],
    "M": [[4, -1], [1, 0]],
}


def _run_stage(report: RunReport, name: str, func: Callable[[], Tuple[object, Optional[str]]],
               kind: str = DETERMINISTIC):
    """Runs one stage, recording its payload, verdict, kind and wall time on the report."""
    started = time.perf_counter()
    payload, verdict = func()
    report.add_stage(name, payload, verdict, kind, time.perf_counter() - started)
    logger.info(f"[{report.subcommand}] stage '{name}': {verdict or 'done'}.")
    return payload


def _param(problem: ProblemFile, key: str, value=None, setting: Optional[str] = None, default=None):
    """A run parameter: explicit flag, then the problem file's params, then settings."""
    if value is not None:
        return value
    if problem.param(key) is not None:
        return problem.param(key)
    if setting is not None:
        return spectral_setting(setting)
    return default


def _new_report(subcommand: str, problem: ProblemFile, seed: Optional[int] = None, **inputs) -> RunReport:
    echo = {"problem": problem.to_dict()}
    echo.update({k: v for k, v in inputs.items() if v is not None})
    return RunReport(subcommand=subcommand, inputs=echo, seed=seed)


def _linspace_grid(dim: int, lo: float, hi: float, steps: int) -> np.ndarray:
    axes = np.meshgrid(*[np.linspace(lo, hi, steps)] * dim, indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=1)


def _random_points(dim: int, count: int, seed: int, *stream: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=stream))
    return rng.random((count, dim))


# --- check_hadamard ---

def _hadamard_stage(triple: HadamardTriple, tol: float):
    H = triple.matrix()
    accepted = triple.is_accepted(tol)
    payload = {
        "matrix": H.tolist(),
        "unitarity_defect": triple.defect,
        "tolerance": tol,
        "accepted": accepted,
        "L_incongruent_mod_S": check_incongruence(triple.L, triple.S),
    }
    return payload, PASS if accepted else FAIL


def _partition_stage(triple: HadamardTriple, seed: int):
    xs = default_grid(triple.dim, count=100, seed=seed)
    residuals = partition_residual(triple.B, triple.L, triple.S, xs)
    worst = float(np.max(residuals))
    payload = {
        "points": len(xs),
        "max_residual": worst,
        "residual_at_zero": float(residuals[0]),
    }
    return payload, PASS if worst < PARTITION_TOL else FAIL


def run_check_hadamard(problem: ProblemFile, tol: Optional[float] = None, search: bool = False,
                       seed: Optional[int] = None) -> RunReport:
    tol = _param(problem, "tol_unitary", tol, "TOL_UNITARY")
    seed = _param(problem, "seed", seed, "SEED")
    triple = problem.triple
    report = _new_report("check_hadamard", problem, seed, tol_unitary=tol, search=search)
    _run_stage(report, "hadamard", lambda: _hadamard_stage(triple, tol))
    _run_stage(report, "partition", lambda: _partition_stage(triple, seed))
    if search:
        _run_stage(report, "completions", lambda: (
            [L.to_list() for L in search_completions(triple.R, triple.B, tol=tol)], None,
        ))
    return report


# --- attractor ---

def run_attractor(problem: ProblemFile, depth: int, side: str = "B", strict: bool = False,
                  samples: Optional[int] = None, seed: Optional[int] = None) -> RunReport:
    """The depth-K cloud of the forward (side B) or dual (side L) attractor, with its bounding box."""
    if side not in ("B", "L"):
        raise ValidationError(f"side must be 'B' or 'L', got {side!r}")
    seed = _param(problem, "seed", seed, "SEED")
    ifs = problem.triple.forward_ifs() if side == "B" else problem.triple.dual_ifs()
    report = _new_report("attractor", problem, seed, depth=depth, side=side, strict=strict, samples=samples)

    def cloud_stage():
        cloud = attractor_cloud(ifs, depth, strict=strict)
        report.tables["points"] = points_table(cloud.as_array().tolist())
        return {
            "requested_depth": cloud.requested_depth,
            "depth": cloud.depth,
            "size": len(cloud),
            "hausdorff_bound": cloud.hausdorff_bound,
            "bounding_box": bounding_box(ifs).to_list(),
        }, None

    _run_stage(report, "cloud", cloud_stage)
    if samples:
        t = np.ones(ifs.dim)

        def invariance_stage():
            residual = invariance_residual(ifs, t, depth, samples, seed)
            payload = {"t": t.tolist(), "residual": residual.residual, "stderr": residual.stderr}
            return payload, PASS if residual.passed else FAIL

        _run_stage(report, "invariance", invariance_stage, STOCHASTIC)
    return report


# --- mu_hat ---

def run_mu_hat(problem: ProblemFile, points: Optional[Sequence[Sequence[float]]] = None,
               grid: Optional[Tuple[float, float, int]] = None, depth: Optional[int] = None) -> RunReport:
    """μ̂ at explicit points or on a regular grid [lo, hi]^d with `steps` points per axis."""
    triple = problem.triple
    if points:
        xs = np.asarray(points, dtype=float)
    elif grid:
        xs = _linspace_grid(triple.dim, *grid)
    else:
        raise ValidationError("mu_hat needs --point or --grid")
    depth = _param(problem, "product_depth", depth)
    report = _new_report("mu_hat", problem, points=xs.tolist(), depth=depth)

    def values_stage():
        batch = mu_hat_batch(triple.R, triple.B, xs, depth=depth)
        header = [f"x{i + 1}" for i in range(triple.dim)] + ["re", "im", "abs"]
        rows = [list(x) + [float(v.real), float(v.imag), float(abs(v))] for x, v in zip(xs, batch.values)]
        report.tables["values"] = (header, rows)
        return {"depth": batch.depth, "tail_bound": batch.tail_bound, "values": batch.values}, None

    _run_stage(report, "mu_hat", values_stage)
    return report


# --- find_cycles ---

def _gamma_stage(triple: HadamardTriple):
    try:
        gamma = dual_lattice(triple.B)
    except RankDeficient as e:
        return {"basis": None, "reason": str(e)}, None
    return {"basis": gamma.to_list()}, None


def run_find_cycles(problem: ProblemFile, m_max: Optional[int] = None, use_filter: bool = True,
                    spectrum_depth: Optional[int] = None) -> RunReport:
    m_max = _param(problem, "cycle_max_len", m_max, default=4)
    triple = problem.triple
    report = _new_report("find_cycles", problem, m_max=m_max, use_filter=use_filter, spectrum_depth=spectrum_depth)
    _run_stage(report, "gamma", lambda: _gamma_stage(triple))

    def cycles_stage():
        cycles = enumerate_wb_cycles(triple, m_max, use_candidate_filter=use_filter)
        payload = {"count": len(cycles), "cycles": [c.to_dict() for c in cycles]}
        if spectrum_depth is not None:
            payload["spectra"] = [cycle_spectrum(c, triple.S, triple.L, spectrum_depth).to_dict() for c in cycles]
        return payload, PASS if cycles else FAIL

    _run_stage(report, "cycles", cycles_stage)
    _run_stage(report, "candidates", lambda: ([r.to_dict() for r in candidate_report(triple)], None))
    return report


# --- build_spectrum / certify ---

def build_lambda1(decomposition: BlockDecomposition, spec: Lambda1Spec, l2: Sequence[int]) -> SpectrumApprox:
    """Λ1 from an explicit generator, falling back to S1 and the digits L1(l2) for whatever is omitted."""
    if spec.scale is None and spec.digits is None:
        return default_lambda1(decomposition, l2, spec.depth)
    scale = spec.scale or decomposition.S1_matrix
    digits = spec.digits or DigitSet(decomposition.first_digits(l2), "L1", require_zero=False)
    return generate_spectrum(
        scale, digits, [tuple([0] * decomposition.r)], spec.depth,
        provenance={"kind": "lambda1", "scale": scale.to_list(), "digits": digits.to_list()},
    )


def build_spectrum(problem: ProblemFile, spec: SpectrumSpec, seed: Optional[int] = None) -> Tuple[SpectrumApprox, Dict]:
    """The candidate spectrum a spec describes, with any side results (the cycle or the condition report)."""
    triple = problem.triple
    if spec.kind == "cycle":
        cycle = cycle_from_word(triple, spec.word)
        return cycle_spectrum(cycle, triple.S, triple.L, spec.depth), {"cycle": cycle.to_dict()}
    if spec.kind == "subspace":
        if spec.r is None:
            raise ValidationError("a subspace spectrum needs 'r'")
        y0 = spec.y0 if spec.y0 is not None else tuple([Fraction(0)] * (triple.dim - spec.r))
        decomposition = decompose(triple, spec.r)
        fixed = fixed_digits(triple, spec.r, y0)
        if not fixed:
            raise NoFixedDigit(f"no digit fixes y0 = {format_vector(y0)}")
        lambda1 = build_lambda1(decomposition, spec.lambda1 or Lambda1Spec(None, None, 6), decomposition.second(fixed[0]))
        conditions = check_theorem_conditions(triple, spec.r, y0, lambda1, seed=seed)
        spectrum = subspace_spectrum(triple, spec.r, y0, lambda1, spec.depth, report=conditions)
        return spectrum, {"lambda1": lambda1.to_dict(), "conditions": conditions.to_dict()}
    if spec.kind == "explicit":
        return generate_spectrum(triple.S, triple.L, spec.points, 0, provenance={"kind": "explicit"}), {}
    return generate_spectrum(triple.S, triple.L, spec.points, spec.depth,
                             provenance={"kind": "generated", "seed": [format_vector(p) for p in spec.points]}), {}


def run_build_spectrum(problem: ProblemFile, spec: SpectrumSpec, seed: Optional[int] = None) -> RunReport:
    seed = _param(problem, "seed", seed, "SEED")
    report = _new_report("build_spectrum", problem, seed, spectrum=spec.to_dict())

    def spectrum_stage():
        spectrum, extras = build_spectrum(problem, spec, seed)
        report.tables["spectrum"] = spectrum_table(spectrum)
        return {"spectrum": spectrum.to_dict(), **extras}, None

    _run_stage(report, "spectrum", spectrum_stage)
    return report


def run_certify(problem: ProblemFile, spec: SpectrumSpec, grid_steps: Optional[int] = None,
                grid_count: int = 20, product_depth: Optional[int] = None, tol: Optional[float] = None,
                orthogonality_radius: Optional[float] = None, seed: Optional[int] = None,
                extrapolate: bool = False) -> RunReport:
    """
    Builds the spectrum, then checks Parseval sums on a grid in [0,1]^d (random points,
    or a regular grid with grid_steps per axis) and optionally orthogonality within a radius.
    """
    triple = problem.triple
    tol = _param(problem, "tol_certify", tol, "TOL_CERTIFY")
    seed = _param(problem, "seed", seed, "SEED")
    product_depth = _param(problem, "product_depth", product_depth)
    report = _new_report("certify", problem, seed, spectrum=spec.to_dict(), grid_steps=grid_steps,
                         grid_count=grid_count, product_depth=product_depth, tol_certify=tol,
                         orthogonality_radius=orthogonality_radius, extrapolate=extrapolate)

    built: Dict[str, SpectrumApprox] = {}

    def spectrum_stage():
        built["spectrum"], extras = build_spectrum(problem, spec, seed)
        return {"spectrum": built["spectrum"].to_dict(), **extras}, None

    _run_stage(report, "spectrum", spectrum_stage)
    spectrum = built["spectrum"]
    grid = (_linspace_grid(triple.dim, 0.0, 1.0, grid_steps) if grid_steps
            else default_grid(triple.dim, count=grid_count, seed=seed))

    def parseval_stage():
        certification = parseval_certify(triple.R, triple.B, spectrum, grid, product_depth, tol,
                                         seed=seed, orthogonality_radius=orthogonality_radius,
                                         extrapolate=extrapolate)
        report.tables["parseval"] = parseval_table(certification)
        return certification, certification.verdict

    certification = _run_stage(report, "parseval", parseval_stage)
    if certification.orthogonality is not None:
        defect = certification.orthogonality.defect
        report.verdicts["orthogonality"] = PASS if defect < ORTHOGONALITY_TOL else FAIL
    return report


# --- analyze_invariant ---

def _analyze_triple(triple: HadamardTriple, analysis: AnalysisSpec, seed: Optional[int]) -> Tuple[Dict, List[bool]]:
    r = analysis.r
    candidates = candidate_translates(triple, r, analysis.grid_denominator)
    if analysis.y0 is not None:
        translates = [analysis.y0]
    else:
        zero = tuple([Fraction(0)] * (triple.dim - r))
        translates = sorted(set(candidates) | {zero})

    decomposition = decompose(triple, r)
    entries, outcomes = [], []
    for y0 in translates:
        translate = check_invariant_translate(triple, r, y0, seed)
        entry = {
            "translate": translate.to_dict(),
            "trace": trace_escape(triple, r, y0, analysis.max_steps, candidates).to_dict(),
        }
        if translate.invariant:
            fixed = fixed_digits(triple, r, y0)
            if not fixed:
                entry["conditions"] = {"status": "no fixed digit"}
                outcomes.append(False)
            else:
                lambda1 = build_lambda1(decomposition, analysis.lambda1, decomposition.second(fixed[0]))
                conditions = check_theorem_conditions(triple, r, y0, lambda1, seed=seed)
                entry["conditions"] = conditions.to_dict()
                outcomes.append(conditions.passed)
        entries.append(entry)
    payload = {
        "decomposition": decomposition.to_dict(),
        "candidates": [format_vector(y) for y in candidates],
        "translates": entries,
    }
    return payload, outcomes


def run_analyze_invariant(problem: ProblemFile, analysis: AnalysisSpec, seed: Optional[int] = None) -> RunReport:
    """
    Invariant translates R^r × {y0}: invariance witness, escape trace and, for invariant
    translates, the conditions for a subspace spectrum. With M the analysis is repeated
    on the conjugated triple.
    """
    seed = _param(problem, "seed", seed, "SEED")
    report = _new_report("analyze_invariant", problem, seed, analysis=analysis.to_dict())
    outcomes: List[bool] = []

    def stage(triple: HadamardTriple):
        def run():
            payload, passed = _analyze_triple(triple, analysis, seed)
            outcomes.extend(passed)
            return payload, (PASS if all(passed) else FAIL) if passed else None
        return run

    _run_stage(report, "original", stage(problem.triple))
    if analysis.M is not None:
        conjugated = conjugate_triple(analysis.M, problem.triple)
        report.results["conjugated_triple"] = {
            "R": conjugated.R.to_list(), "B": conjugated.B.to_list(), "L": conjugated.L.to_list(),
            "unitarity_defect": conjugated.defect,
        }
        _run_stage(report, "conjugated", stage(conjugated))
    return report


# --- simulate_paths ---

def run_simulate_paths(problem: ProblemFile, sets_file: InvariantSetsFile, paths: Optional[int] = None,
                       steps: Optional[int] = None, seed: Optional[int] = None, ruelle: bool = True) -> RunReport:
    triple = problem.triple
    paths = _param(problem, "paths", paths, "PATHS")
    steps = _param(problem, "steps", steps, "STEPS")
    seed = _param(problem, "seed", seed, "SEED")
    report = _new_report("simulate_paths", problem, seed, paths=paths, steps=steps,
                         sets=[s.to_dict() for s in sets_file.sets])
    starts = np.asarray(sets_file.starts, dtype=float) if sets_file.starts else _random_points(triple.dim, 5, seed, 0)
    spectra = [build_spectrum(problem, spec, seed)[0] for spec in sets_file.spectra] or None
    rows: List[list] = []

    def stage(index: int, x: np.ndarray):
        def run():
            ensemble = simulate_paths(x, triple, steps, paths, seed, stream=(index,))
            estimates = {}
            for spec in sets_file.sets:
                label = spec.label or spec.kind
                estimate = estimate_hF(x, triple, spec, ensemble=ensemble)
                estimates[label] = estimate.to_dict()
                rows.append([str(index), label, estimate.estimate, estimate.stderr])
            mass = total_mass_check(x, triple, sets_file.sets, intersections=sets_file.intersections,
                                    spectra=spectra, ensemble=ensemble)
            payload = {"x": x.tolist(), "hF": estimates, "mass": mass.to_dict()}
            passed = mass.passed
            if ruelle:
                reports = {
                    spec.label or spec.kind: ruelle_residual(x, triple, spec, ensemble=ensemble)
                    for spec in sets_file.sets if spec.kind not in ("full", "empty")
                }
                payload["ruelle"] = {label: r.to_dict() for label, r in reports.items()}
                passed = passed and all(r.passed for r in reports.values())
            return payload, PASS if passed else FAIL
        return run

    for index, x in enumerate(starts):
        _run_stage(report, f"start{index}", stage(index, x), STOCHASTIC)
    report.tables["hits"] = (["start", "set", "estimate", "stderr"], rows)
    return report


# --- conjugate ---

def conjugation_check(triple: HadamardTriple, M: UnimodularMatrix, xs: np.ndarray) -> Dict:
    """Compares defects and μ̂_{MB}(M^{-T}x) with μ̂_B(x) at the points xs."""
    conjugated = conjugate_triple(M, triple)
    original = mu_hat_batch(triple.R, triple.B, xs)
    moved = xs @ np.array(M.inverse_transpose(), dtype=float).T
    image = mu_hat_batch(conjugated.R, conjugated.B, moved, depth=original.depth)
    mu_gap = float(np.max(np.abs(image.values - original.values)))
    defect_gap = abs(conjugated.defect - triple.defect)
    return {
        "M": M.to_list(),
        "R": conjugated.R.to_list(),
        "B": conjugated.B.to_list(),
        "L": conjugated.L.to_list(),
        "defect": conjugated.defect,
        "defect_gap": defect_gap,
        "mu_hat_gap": mu_gap,
        "passed": defect_gap < CONJUGATION_TOL and mu_gap < CONJUGATION_TOL,
    }


def run_conjugate(problem: ProblemFile, M: Optional[UnimodularMatrix] = None, random_count: int = 0,
                  points: int = 20, seed: Optional[int] = None) -> RunReport:
    seed = _param(problem, "seed", seed, "SEED")
    triple = problem.triple
    M = M or problem.M
    if M is None and not random_count:
        raise ValidationError("conjugate needs --matrix, an 'M' in the problem file, or --random")
    report = _new_report("conjugate", problem, seed, M=M.to_list() if M else None, random=random_count, points=points)
    xs = _random_points(triple.dim, points, seed, 1)

    if M is not None:
        def given_stage():
            check = conjugation_check(triple, M, xs)
            return check, PASS if check["passed"] else FAIL

        _run_stage(report, "given", given_stage)
    if random_count:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2,)))

        def random_stage():
            checks = [conjugation_check(triple, random_unimodular(triple.dim, rng), xs) for _ in range(random_count)]
            return checks, PASS if all(c["passed"] for c in checks) else FAIL

        _run_stage(report, "random", random_stage)
    return report


# --- example51 ---

def run_example51_pipeline(problem: Optional[ProblemFile] = None, skip_montecarlo: bool = False,
                           spectrum_depth: Optional[int] = None, lambda1_depth: Optional[int] = None,
                           cycle_max_len: Optional[int] = None, paths: Optional[int] = None,
                           steps: Optional[int] = None, seed: Optional[int] = None,
                           product_depth: Optional[int] = None, tol_certify: Optional[float] = None,
                           tol_unitary: Optional[float] = None) -> RunReport:
    """
    The worked example end to end: Hadamard check, Γ, invariant translates (R×{0}
    invariant, every conjugated candidate escapes), W_B-cycles, Λ(R×{0}) from the
    corollary conditions, Parseval on a 5×5 grid (judged with the extrapolated tail,
    since the truncated mass decays by about half per depth) and path-measure statistics.
    A FAIL at the Hadamard stage stops the run.
    """
    problem = problem or problem_from_dict(EXAMPLE51, source="builtin")
    triple = problem.triple
    spectrum_depth = _param(problem, "spectrum_depth", spectrum_depth, default=6)
    lambda1_depth = _param(problem, "lambda1_depth", lambda1_depth, default=6)
    cycle_max_len = _param(problem, "cycle_max_len", cycle_max_len, default=4)
    paths = _param(problem, "paths", paths, "PATHS")
    steps = _param(problem, "steps", steps, "STEPS")
    seed = _param(problem, "seed", seed, "SEED")
    tol_unitary = _param(problem, "tol_unitary", tol_unitary, "TOL_UNITARY")
    tol_certify = _param(problem, "tol_certify", tol_certify, "TOL_CERTIFY")
    product_depth = _param(problem, "product_depth", product_depth)
    report = _new_report(
        "example51", problem, seed, skip_montecarlo=skip_montecarlo, spectrum_depth=spectrum_depth,
        lambda1_depth=lambda1_depth, cycle_max_len=cycle_max_len, paths=paths, steps=steps,
        product_depth=product_depth, tol_certify=tol_certify, tol_unitary=tol_unitary,
    )

    def finish() -> RunReport:
        report.verdict_label = "SPECTRAL-EVIDENCE" if report.passed else FAIL
        logger.info(f"Example pipeline verdict: {report.verdict}.")
        return report

    _run_stage(report, "hadamard", lambda: _hadamard_stage(triple, tol_unitary))
    if report.verdicts["hadamard"] == FAIL:
        logger.warning(f"Hadamard stage failed with defect {triple.defect:.3e}; stopping.")
        return finish()

    _run_stage(report, "gamma", lambda: _gamma_stage(triple))

    def invariant_stage():
        zero = (Fraction(0),) * (triple.dim - 1)
        translate = check_invariant_translate(triple, 1, zero, seed)
        payload = {"R_x_0": translate.to_dict()}
        passed = translate.invariant
        if problem.M is not None:
            conjugated = conjugate_triple(problem.M, triple)
            candidates = candidate_translates(conjugated, 1)
            traces = [trace_escape(conjugated, 1, y, 10, candidates) for y in candidates]
            payload["conjugated"] = {
                "M": problem.M.to_list(),
                "L": conjugated.L.to_list(),
                "B": conjugated.B.to_list(),
                "candidates": [format_vector(y) for y in candidates],
                "traces": [t.to_dict() for t in traces],
            }
            passed = passed and all(t.status == "ESCAPED" for t in traces)
        return payload, PASS if passed else FAIL

    _run_stage(report, "invariant", invariant_stage)

    def cycles_stage():
        cycles = enumerate_wb_cycles(triple, cycle_max_len)
        on_subspace = all(p[1:] == (0,) * (triple.dim - 1) for c in cycles for p in c.points)
        payload = {
            "cycles": [c.to_dict() for c in cycles],
            "candidates": [r.to_dict() for r in candidate_report(triple)],
        }
        return payload, PASS if cycles and on_subspace else FAIL

    _run_stage(report, "cycles", cycles_stage)

    built: Dict[str, SpectrumApprox] = {}

    def spectrum_stage():
        decomposition = decompose(triple, 1)
        zero = (Fraction(0),) * (triple.dim - 1)
        fixed = fixed_digits(triple, 1, zero)
        lambda1 = default_lambda1(decomposition, decomposition.second(fixed[0]), lambda1_depth)
        conditions = check_corollary_conditions(triple, 1, lambda1, seed=seed)
        payload = {"lambda1": lambda1.to_dict(), "conditions": conditions.to_dict()}
        if not conditions.passed:
            return payload, FAIL
        built["spectrum"] = subspace_spectrum(triple, 1, zero, lambda1, spectrum_depth, report=conditions)
        payload["spectrum"] = built["spectrum"].to_dict()
        return payload, PASS

    _run_stage(report, "spectrum", spectrum_stage)

    if "spectrum" in built:
        def parseval_stage():
            certification = parseval_certify(triple.R, triple.B, built["spectrum"], _linspace_grid(triple.dim, 0.0, 1.0, 5),
                                             product_depth, tol_certify, seed=seed, extrapolate=True)
            report.tables["parseval"] = parseval_table(certification)
            verdict = PASS if certification.passed and certification.monotone else FAIL
            return certification, verdict

        _run_stage(report, "parseval", parseval_stage)

    if skip_montecarlo:
        report.add_stage("montecarlo", {"skipped": True}, SKIPPED, STOCHASTIC)
        return finish()

    def montecarlo_stage():
        subspace = InvariantSetSpec.subspace(1, [0] * (triple.dim - 1))
        starts = _random_points(triple.dim, 5, seed, 51)
        entries, passed = [], True
        for index, x in enumerate(starts):
            ensemble = simulate_paths(x, triple, steps, paths, seed, stream=(51, index))
            hit = estimate_hF(x, triple, subspace, ensemble=ensemble)
            mass = total_mass_check(x, triple, [subspace], ensemble=ensemble)
            ruelle = ruelle_residual(x, triple, subspace, ensemble=ensemble)
            hit_ok = abs(1.0 - hit.estimate) <= 3 * hit.stderr + 1e-12
            passed = passed and hit_ok and mass.passed and ruelle.passed
            entries.append({"x": x.tolist(), "hF": hit.to_dict(), "hF_passed": hit_ok,
                            "mass": mass.to_dict(), "ruelle": ruelle.to_dict()})
        return {"set": subspace.to_dict(), "starts": entries}, PASS if passed else FAIL

    _run_stage(report, "montecarlo", montecarlo_stage, STOCHASTIC)
    return finish()
