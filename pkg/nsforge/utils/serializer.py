"""
Report, table and field persistence for run outputs
"""

import csv
import hashlib
import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import yaml

from .. import __version__
from ..core.fourier_field import Arity, SpectralField
from ..errors import IntegrityError

logger = logging.getLogger(__name__)

FIELD_FORMAT = "nsforge-sf2"
FIELD_LAYOUT = "rfft2-halfplane-rowmajor"
REPORT_FORMAT = "nsforge-report"

PathLike = Union[str, Path]


def to_plain(value: Any) -> Any:
    """JSON-ready copy: numpy scalars unwrapped, Fractions as strings, non-finite floats as strings"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Arity):
        return value.value
    return value


def _metadata() -> Dict[str, str]:
    # no timestamp: identical runs give identical bytes
    return {"version": __version__, "library": "nsforge", "format": REPORT_FORMAT}


class ReportSerializer:
    """Saving and loading run reports and their tables"""

    @staticmethod
    def save_to_json(report_data: Dict[str, Any], file_path: PathLike) -> bool:
        try:
            data = to_plain(report_data)
            data["metadata"] = _metadata()
            with open(file_path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2, ensure_ascii=False)
                f.write("\n")
            return True
        except (OSError, TypeError, ValueError) as e:
            logger.error("Error saving JSON report %s: %s", file_path, e)
            return False

    @staticmethod
    def load_from_json(file_path: PathLike) -> Optional[Dict[str, Any]]:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            logger.error("Error loading JSON report %s: %s", file_path, e)
            return None
        if ReportSerializer._validate_report_data(data):
            return data
        logger.error("Invalid report file format: %s", file_path)
        return None

    @staticmethod
    def save_to_yaml(report_data: Dict[str, Any], file_path: PathLike) -> bool:
        try:
            data = to_plain(report_data)
            data["metadata"] = _metadata()
            with open(file_path, "w", encoding="utf-8") as f:
                yaml.safe_dump(data, f, default_flow_style=False, allow_unicode=True, sort_keys=False)
            return True
        except (OSError, yaml.YAMLError) as e:
            logger.error("Error saving YAML report %s: %s", file_path, e)
            return False

    @staticmethod
    def load_from_yaml(file_path: PathLike) -> Optional[Dict[str, Any]]:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            logger.error("Error loading YAML report %s: %s", file_path, e)
            return None
        if ReportSerializer._validate_report_data(data):
            return data
        logger.error("Invalid report file format: %s", file_path)
        return None

    @staticmethod
    def _validate_report_data(data: Any) -> bool:
        if not isinstance(data, dict):
            return False
        for key in ("params", "base", "steps"):
            if key not in data:
                return False
        if not isinstance(data["steps"], list):
            return False
        for block in [data["base"]] + data["steps"]:
            if not isinstance(block, dict) or "checks" not in block:
                return False
            if not isinstance(block["checks"].get("items"), list):
                return False
        return True

    @staticmethod
    def _check_items(report_data: Dict[str, Any]) -> List[Dict[str, Any]]:
        blocks = [report_data.get("base", {})] + list(report_data.get("steps", []))
        return [item for block in blocks for item in block.get("checks", {}).get("items", [])]

    @staticmethod
    def get_report_statistics(report_data: Dict[str, Any]) -> Dict[str, Any]:
        items = ReportSerializer._check_items(report_data)
        gates = [i for i in items if i.get("gate")]
        by_item: Dict[str, int] = {}
        for i in items:
            by_item[i.get("item", "?")] = by_item.get(i.get("item", "?"), 0) + 1
        return {
            "steps": len(report_data.get("steps", [])),
            "lambdas": [s.get("lambda") for s in report_data.get("steps", [])],
            "total_checks": len(items),
            "gates": len(gates),
            "passed": sum(1 for i in items if i.get("pass")),
            "failed_gates": [i["name"] for i in gates if not i.get("pass")],
            "checks_per_item": by_item,
            "converged": report_data.get("converged", False),
        }

    @staticmethod
    def merge_reports(reports: Sequence[Dict[str, Any]], key: str = "sweep") -> Dict[str, Any]:
        """One document holding several reports, e.g. a parameter sweep"""
        merged = {key: [to_plain(r) for r in reports]}
        merged["metadata"] = dict(_metadata(), merged_count=len(reports))
        return merged


def save_table_csv(rows: Sequence[Dict[str, Any]], file_path: PathLike,
                   sidecar: Optional[Dict[str, Any]] = None) -> bool:
    """CSV of rows (union of keys, first-seen order) plus <name>.json with the metadata"""
    path = Path(file_path)
    columns: List[str] = []
    for row in rows:
        for name in row:
            if name not in columns:
                columns.append(name)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                plain = to_plain(row)
                writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in plain.items()})
        meta = dict(_metadata(), columns=columns, rows=len(rows))
        meta.update(to_plain(sidecar or {}))
        with open(path.with_suffix(".json"), "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=2)
            f.write("\n")
        return True
    except OSError as e:
        logger.error("Error saving table %s: %s", path, e)
        return False


def load_table_csv(file_path: PathLike) -> Optional[List[Dict[str, str]]]:
    try:
        with open(file_path, "r", encoding="utf-8", newline="") as f:
            return list(csv.DictReader(f))
    except OSError as e:
        logger.error("Error loading table %s: %s", file_path, e)
        return None


def _payload(field: SpectralField) -> bytes:
    return np.ascontiguousarray(field.coeffs).astype("<c16").tobytes()


def field_header(field: SpectralField) -> Dict[str, Any]:
    payload = _payload(field)
    return {
        "format": FIELD_FORMAT,
        "arity": field.arity.value,
        "n": field.n,
        "components": field.components,
        "band": field.band,
        "layout": FIELD_LAYOUT,
        "count": int(field.coeffs.size),
        "sha256": hashlib.sha256(payload).hexdigest(),
    }


def save_field(field: SpectralField, file_path: PathLike) -> Dict[str, Any]:
    """Write a .sf2 dump: one JSON header line, then little-endian (re, im) float64 pairs"""
    header = field_header(field)
    with open(file_path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        f.write(_payload(field))
    logger.debug("dumped %r to %s", field, file_path)
    return header


def load_field(file_path: PathLike) -> SpectralField:
    """Read a .sf2 dump; raises IntegrityError on any mismatch"""
    try:
        raw = Path(file_path).read_bytes()
    except OSError as e:
        raise IntegrityError(f"Cannot read field dump {file_path}: {e}") from e
    line, sep, payload = raw.partition(b"\n")
    if not sep:
        raise IntegrityError(f"{file_path}: missing header line")
    try:
        header = json.loads(line.decode("utf-8"))
        arity = Arity(header["arity"])
        n, count, band = int(header["n"]), int(header["count"]), int(header["band"])
    except (ValueError, KeyError, TypeError) as e:
        raise IntegrityError(f"{file_path}: unreadable header ({e})") from e
    if header.get("format") != FIELD_FORMAT or header.get("layout") != FIELD_LAYOUT:
        raise IntegrityError(f"{file_path}: unknown format {header.get('format')!r}")
    if count != arity.components * n * (n // 2 + 1) or header.get("components") != arity.components:
        raise IntegrityError(f"{file_path}: count {count} does not match {arity.value} on grid {n}")
    if len(payload) != 16 * count:
        raise IntegrityError(f"{file_path}: payload has {len(payload)} bytes, expected {16 * count}")
    if hashlib.sha256(payload).hexdigest() != header.get("sha256"):
        raise IntegrityError(f"{file_path}: checksum mismatch")
    coeffs = np.frombuffer(payload, dtype="<c16").astype(np.complex128).reshape(arity.components, n, n // 2 + 1)
    try:
        return SpectralField(arity, coeffs.copy(), band, not np.any(coeffs[:, 0, 0]))
    except Exception as e:
        raise IntegrityError(f"{file_path}: {e}") from e


def save_state(state, directory: PathLike) -> Dict[str, Any]:
    """Directory with state.json and one .sf2 per field of the state"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {"u": "u.sf2", "R": "R.sf2", "base_velocity": "w_0.sf2"}
    files.update({f"w_{i + 1}": f"w_{i + 1}.sf2" for i in range(len(state.increments))})
    fields = {"u": state.u, "R": state.R, "base_velocity": state.base_velocity}
    fields.update({f"w_{i + 1}": w for i, w in enumerate(state.increments)})
    checksums = {}
    for name, f in fields.items():
        checksums[name] = save_field(f, directory / files[name])["sha256"]
    manifest = dict(to_plain(state.summary()), params=state.params.to_dict(),
                    files=files, checksums=checksums, metadata=_metadata())
    with open(directory / "state.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return manifest


def load_state(directory: PathLike):
    """Rebuild an IterationState from save_state output; IntegrityError on mismatch"""
    from ..iteration.params import IterationParams, IterationState

    directory = Path(directory)
    try:
        with open(directory / "state.json", "r", encoding="utf-8") as f:
            manifest = json.load(f)
        files, checksums = manifest["files"], manifest["checksums"]
        lambdas = tuple(int(v) for v in manifest["lambdas"])
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise IntegrityError(f"Unreadable state manifest in {directory}: {e}") from e
    loaded = {}
    for name, file_name in files.items():
        f = load_field(directory / file_name)
        if field_header(f)["sha256"] != checksums.get(name):
            raise IntegrityError(f"{file_name} does not match the manifest checksum")
        loaded[name] = f
    increments = tuple(loaded[f"w_{i + 1}"] for i in range(len(lambdas)))
    return IterationState(
        q=int(manifest["q"]),
        u=loaded["u"],
        R=loaded["R"],
        C=float(manifest["C"]),
        params=IterationParams.from_dict(manifest["params"]),
        base_velocity=loaded["base_velocity"],
        lambdas=lambdas,
        eps_history=tuple(Fraction(e) for e in manifest["eps_history"]),
        shells=tuple(int(s) for s in manifest["shells"]),
        increments=increments,
        pressure=float(manifest.get("pressure", 0.0)),
    )


def save_family(family, directory: PathLike, radius: Optional[float] = None) -> Dict[str, Any]:
    """One .sf2 per Mikado direction plus manifest.json"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = dict(family.manifest(), files=[], checksums=[], metadata=_metadata())
    for k in range(len(family.profiles)):
        name = f"rho_{k}.sf2"
        header = save_field(family.rho(k, radius), directory / name)
        manifest["files"].append(name)
        manifest["checksums"].append(header["sha256"])
    with open(directory / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(to_plain(manifest), f, indent=2)
        f.write("\n")
    return manifest
