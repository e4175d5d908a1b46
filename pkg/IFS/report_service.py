# --- Python Standard Library Imports ---
import csv
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import metadata
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

# --- Third-Party Library Imports ---
import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

# --- Local Application Imports ---
from .fourier_service import CertificationReport, SpectrumApprox
from .utils import format_fraction, fraction_to_decimal

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

DETERMINISTIC = "deterministic"
STOCHASTIC = "seeded-stochastic"

# A CSV side table: header and rows.
Table = Tuple[List[str], Iterable[Sequence]]


class ReportEncoder(DjangoJSONEncoder):
    """Rationals as 'p/q' strings, numpy scalars and arrays as plain JSON, complex numbers as [re, im]."""

    def default(self, o):
        if isinstance(o, Fraction):
            return format_fraction(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, (complex, np.complexfloating)):
            return [float(o.real), float(o.imag)]
        if hasattr(o, "to_dict"):
            return o.to_dict()
        return super().default(o)


def package_versions() -> Dict[str, str]:
    # Local import: the app package imports this module indirectly.
    from . import __version__

    versions = {"IFS": __version__}
    for package in ("Django", "numpy", "sympy", "djangorestframework"):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "not installed"
    return versions


@dataclass
class RunReport:
    """
    Everything one command run produced. Stages record whether they are
    deterministic or seeded-stochastic; timing is kept apart so two runs with the
    same seed and inputs serialize identically once timing is dropped.
    """
    subcommand: str
    inputs: Dict
    seed: Optional[int] = None
    results: Dict = field(default_factory=dict)
    verdicts: Dict[str, str] = field(default_factory=dict)
    stages: Dict[str, str] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=package_versions)
    verdict_label: Optional[str] = None
    # CSV side tables; not part of the JSON report.
    tables: Dict[str, Table] = field(default_factory=dict, repr=False)

    def add_stage(self, name: str, payload, verdict: Optional[str] = None, kind: str = DETERMINISTIC,
                  elapsed: Optional[float] = None):
        self.results[name] = payload
        self.stages[name] = kind
        if verdict is not None:
            self.verdicts[name] = verdict
        if elapsed is not None:
            self.timing[name] = round(elapsed, 6)

    @property
    def passed(self) -> bool:
        return all(v in ("PASS", "SKIPPED") for v in self.verdicts.values())

    @property
    def verdict(self) -> str:
        if self.verdict_label:
            return self.verdict_label
        return "PASS" if self.passed else "FAIL"

    def to_dict(self, include_timing: bool = True) -> Dict:
        data = {
            "subcommand": self.subcommand,
            "inputs": self.inputs,
            "seed": self.seed,
            "results": self.results,
            "verdicts": self.verdicts,
            "verdict": self.verdict,
            "stages": self.stages,
            "versions": self.versions,
        }
        if include_timing:
            data["timing"] = self.timing
        return data

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), cls=ReportEncoder, sort_keys=True, indent=2) + "\n"

    def to_record_payload(self) -> Dict:
        """The report as plain JSON types, ready for a JSONField."""
        return json.loads(self.to_json())


def write_report(report: RunReport, out: Optional[Union[str, Path]] = None) -> str:
    text = report.to_json()
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"Report written to {out}.")
    return text


# --- CSV side files ---

def write_rows_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence],
                   precision: Optional[int] = None) -> Path:
    """Writes rows of numbers with every value rendered as a fixed-precision decimal."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([
                value if isinstance(value, str) else fraction_to_decimal(_plain(value), precision)
                for value in row
            ])
            count += 1
    logger.info(f"Wrote {count} rows to {path}.")
    return path


def _plain(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def points_table(points: Sequence[Sequence], prefix: str = "x") -> Table:
    dim = len(points[0]) if len(points) else 0
    return [f"{prefix}{i + 1}" for i in range(dim)], points


def spectrum_table(spectrum: SpectrumApprox) -> Table:
    """One row per element: the generation depth at which it first appeared, then its coordinates."""
    header = ["first_depth"] + [f"lambda{i + 1}" for i in range(spectrum.dim)]
    order = np.lexsort(spectrum.numerators.T[::-1])
    order = order[np.argsort(spectrum.first_depth[order], kind="stable")]
    rows = [
        [str(int(spectrum.first_depth[i]))] + [Fraction(int(v), spectrum.denominator) for v in spectrum.numerators[i]]
        for i in order
    ]
    return header, rows


def parseval_table(report: CertificationReport) -> Table:
    """Grid point, partial sums s_0 … s_n and the final deviation |s_n - 1|, one row per grid point."""
    dim = report.grid.shape[1]
    depths = report.partial_sums.shape[1]
    header = [f"x{i + 1}" for i in range(dim)] + [f"s{k}" for k in range(depths)] + ["deviation"]
    rows = [
        list(map(float, x)) + list(map(float, s)) + [abs(float(s[-1]) - 1.0)]
        for x, s in zip(report.grid, report.partial_sums)
    ]
    return header, rows


def write_csv_side_files(out: Union[str, Path], tables: Dict[str, Table], precision: Optional[int] = None) -> List[Path]:
    """Side files next to `out`: <stem>.<table>.csv for each table."""
    out = Path(out)
    return [
        write_rows_csv(out.with_name(f"{out.stem}.{name}.csv"), header, rows, precision)
        for name, (header, rows) in tables.items()
    ]
