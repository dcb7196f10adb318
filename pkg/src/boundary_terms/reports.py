"""Report bundles and their CSV / JSON encodings.

Each bundle holds rows of one kind.  Every row carries ``metric``,
``tolerance`` and ``verdict`` with ``verdict == "PASS"`` iff
``metric <= tolerance``; criterion rows instead carry their individual
checks.  Floats are written with ``repr`` so both encodings round-trip.

CSV headers (first line of each file, exactly):

* audit: ``scenario,observable,formal_re,...,verdict`` (see ``HEADERS``)
* hf, flux, superposition, berry, criterion: likewise
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AuditError, IntegrityError

HEADERS: dict[str, tuple[str, ...]] = {
    "audit": (
        "scenario", "observable", "formal_re", "formal_im", "boundary_re", "boundary_im",
        "explicit_re", "explicit_im", "observed_re", "observed_im", "residual_re", "residual_im",
        "n", "h", "dt", "metric", "tolerance", "verdict",
    ),
    "hf": (
        "k", "band", "dE_dk_spectral", "mean_dHdk_re", "mean_dHdk_im", "boundary_re", "boundary_im",
        "dE_dk_corrected_re", "dE_dk_corrected_im", "momentum_slope", "residual_corrected_spectral",
        "residual_corrected_momentum", "residual_spectral_momentum", "metric", "tolerance", "verdict",
    ),
    "flux": (
        "flux", "vector_potential", "boundary_re", "boundary_im", "residual_re", "residual_im",
        "ground_energy", "metric", "tolerance", "verdict",
    ),
    "superposition": (
        "time", "propagated", "series_re", "series_im", "predicted_re", "predicted_im",
        "residual_re", "residual_im", "metric", "tolerance", "verdict",
    ),
    "berry": (
        "time", "connection_1", "connection_2", "connection_3", "scalar_potential", "energy",
        "curvature_1", "curvature_2", "curvature_3", "electric_1", "electric_2", "electric_3",
        "residual_1", "residual_2", "residual_3", "metric", "tolerance", "verdict",
    ),
    "criterion": ("id", "name", "verdict", "checks"),
}


class ReportIOError(AuditError, OSError):
    """A report could not be written or read."""


def verdict(metric: float, tolerance: float) -> str:
    return "PASS" if metric <= tolerance else "FAIL"


def split_complex(prefix: str, z) -> dict:
    z = complex(z)
    return {f"{prefix}_re": z.real, f"{prefix}_im": z.imag}


def spread(prefix: str, values, width: int = 3) -> dict:
    v = np.atleast_1d(np.asarray(values, dtype=float))
    return {f"{prefix}_{i + 1}": (float(v[i]) if i < v.size else None) for i in range(width)}


def plain(value):
    """Convert numpy scalars/arrays to JSON-native values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


@dataclass
class ReportBundle:
    row_kind: str
    metadata: dict
    rows: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.row_kind not in HEADERS:
            raise ValueError(f"unknown row kind {self.row_kind!r}")
        self.metadata = plain(self.metadata)
        self.rows = [plain(r) for r in self.rows]

    @property
    def passed(self) -> bool:
        return all(r.get("verdict") == "PASS" for r in self.rows)

    def check_verdicts(self) -> None:
        """Recompute every verdict from the stored numbers; raise if any disagrees."""
        for i, row in enumerate(self.rows):
            if self.row_kind == "criterion":
                expected = "PASS" if all(c["passed"] for c in row["checks"]) else "FAIL"
                for c in row["checks"]:
                    lo = -np.inf if c["lower"] is None else c["lower"]
                    hi = np.inf if c["upper"] is None else c["upper"]
                    if c["scalable"] and c["upper"] is not None:
                        hi = hi * self.metadata.get("tolerance_scale", 1.0)
                    if c["passed"] != bool(lo <= c["value"] <= hi):
                        raise IntegrityError(f"row {i}: check {c['name']!r} verdict does not match its value")
            else:
                expected = verdict(row["metric"], row["tolerance"])
            if row["verdict"] != expected:
                raise IntegrityError(f"row {i}: stored verdict {row['verdict']} but terms give {expected}")

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "row_kind": self.row_kind, "rows": self.rows}

    @classmethod
    def from_dict(cls, data: dict) -> "ReportBundle":
        return cls(data["row_kind"], data["metadata"], data["rows"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        header = HEADERS[self.row_kind]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in self.rows:
            writer.writerow([_cell(row.get(col)) for col in header])
        return buf.getvalue()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def emit_reports(bundle: ReportBundle, fmt: str, out_dir: str | Path, stem: str = "report") -> Path:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    path = out / f"{stem}.{fmt}"
    try:
        out.mkdir(parents=True, exist_ok=True)
        path.write_text(bundle.to_csv() if fmt == "csv" else bundle.to_json())
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc.strerror}") from None
    return path


def load_bundle(path: str | Path) -> ReportBundle:
    try:
        return ReportBundle.from_dict(json.loads(Path(path).read_text()))
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc.strerror}") from None
