"""
Command-line harness: run, mikado, probe-hl, probe-hhl, check, norms
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import yaml

from .core.fourier_field import Arity, SpectralField, from_modes, grid_limit, random_band_limited
from .core.mikado import build_family, check_items, lp_scaling_sweep, tail_sweep
from .core.norms import NormTable
from .errors import CapExceeded, GridError, IntegrityError, NSForgeError, ParameterError
from .iteration.checks import check_inductive, weak_form_residual
from .iteration.driver import run
from .iteration.increment import reynolds_trend
from .iteration.params import IterationParams, as_fraction
from .iteration.probes import decay_probe_hhl, decay_probe_hl
from .utils.events import HarnessEvents, event_manager, emit
from .utils.images import emit_image
from .utils.presets import preset_manager
from .utils.serializer import (ReportSerializer, load_field, load_state, save_family, save_state,
                               save_table_csv, to_plain)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3
EXIT_CAP = 4

# flag name -> IterationParams field
PARAM_FLAGS = {
    "beta": "beta",
    "lambda0": "lambda0",
    "eps_gamma": "eps_gamma",
    "amp": "amplitude",
    "qmax": "q_max",
    "lambda_cap": "lambda_cap",
    "gap": "gap",
    "grid_max": "grid_max",
}

RUN_KEYS = ("out", "dump_fields", "emit_images", "sweep", "probes", "log_level", "seed")


@dataclass
class RunConfig:
    """IterationParams plus everything about where results go"""
    params: IterationParams
    out: Path = Path("nsforge-out")
    dump_fields: bool = False
    emit_images: bool = False
    sweep: List[int] = field(default_factory=list)
    probes: List[str] = field(default_factory=list)
    log_level: str = "WARNING"
    seed: int = 0
    preset: str = "desk"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "out": str(self.out),
            "dump_fields": self.dump_fields,
            "emit_images": self.emit_images,
            "sweep": list(self.sweep),
            "probes": list(self.probes),
            "log_level": self.log_level,
            "seed": self.seed,
            "preset": self.preset,
        }


def _parse_sweep(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(v, 0) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParameterError(f"--sweep expects integers, got {text!r}") from exc


def _parse_tables(value: Any) -> List[str]:
    if value is None:
        return []
    names = value.replace(",", " ").split() if isinstance(value, str) else [str(v) for v in value]
    unknown = [name for name in names if name not in DECAY_TABLES]
    if unknown:
        raise ParameterError(f"Unknown decay tables {unknown}, choose from {sorted(DECAY_TABLES)}")
    return names


def load_config_file(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as exc:
        raise ParameterError(f"Cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError(f"Config {path} must hold a mapping")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Preset, then config file, then flags; later sources win"""
    overrides: Dict[str, Any] = {}
    run_values: Dict[str, Any] = {}
    if args.config:
        for key, value in load_config_file(Path(args.config)).items():
            name = key.replace("-", "_")
            if name in RUN_KEYS:
                run_values[name] = value
            else:
                overrides[name] = value
    for flag, name in PARAM_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    params = preset_manager.params_for(args.preset, overrides)

    sweep = _parse_sweep(getattr(args, "sweep", None))
    config = RunConfig(
        params=params,
        out=Path(args.out or run_values.get("out", "nsforge-out")),
        dump_fields=bool(args.dump_fields or run_values.get("dump_fields", False)),
        emit_images=bool(args.emit_images or run_values.get("emit_images", False)),
        sweep=sweep if sweep is not None else [int(v) for v in run_values.get("sweep", [])],
        probes=_parse_tables(getattr(args, "probes", None) or run_values.get("probes")),
        log_level=(args.log_level or run_values.get("log_level", "WARNING")).upper(),
        seed=int(args.seed if args.seed is not None else run_values.get("seed", 0)),
        preset=args.preset,
    )
    emit(HarnessEvents.CONFIG_LOADED, "cli", config.to_dict())
    return config


def _forward_event(event):
    logger.debug("event %s #%d %s", event.event_type, event.sequence, event.data)


def setup_logging(level: str):
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    event_manager.remove_global_handler(_forward_event)
    event_manager.register_global_handler(_forward_event)


def _save_report(data: Dict[str, Any], path: Path):
    if not ReportSerializer.save_to_json(data, path):
        raise IntegrityError(f"Could not write {path}")
    emit(HarnessEvents.REPORT_SAVED, "cli", {"path": str(path)})


def _save_table(rows, path: Path, sidecar: Optional[Dict[str, Any]] = None):
    if not save_table_csv(rows, path, sidecar):
        raise IntegrityError(f"Could not write {path}")


def _probe_fields():
    a = from_modes(Arity.SCALAR, {(0, 0): 1.0, (1, 0): 0.25})
    V = from_modes(Arity.SCALAR, {(0, 1): -0.5j})
    return a, V


def _write_decay_hl(config: RunConfig, lambdas: Optional[Sequence[int]] = None) -> Path:
    a, V = _probe_fields()
    with grid_limit(config.params.grid_max):
        result = decay_probe_hl(a, V, lambdas or (2, 4, 8, 16))
    path = config.out / "probe_hl.csv"
    _save_table(result["rows"], path, {k: v for k, v in result.items() if k != "rows"})
    return path


def _write_decay_hhl(config: RunConfig, lambdas: Optional[Sequence[int]] = None) -> Path:
    alpha, V = _probe_fields()
    with grid_limit(config.params.grid_max):
        result = decay_probe_hhl(alpha, V, lambdas or None, beta=config.params.beta,
                                 target_eps=config.params.eps_gamma)
    path = config.out / "probe_hhl.csv"
    _save_table(result["rows"], path, {k: v for k, v in result.items() if k != "rows"})
    return path


DECAY_TABLES = {"hl": _write_decay_hl, "hhl": _write_decay_hhl}


def cmd_run(config: RunConfig) -> int:
    states, report = run(config.params)
    out = config.out
    data = report.to_dict()
    # no output path: identical runs give identical bytes wherever they are written
    data["config"] = {k: v for k, v in config.to_dict().items() if k != "out"}
    if config.sweep:
        data["reynolds_trend"] = reynolds_trend(states[0], config.sweep)
    _save_report(data, out / "report.json")

    rows = []
    for block in [report.base] + report.steps:
        rows.append({"q": block["q"], "lambda": block.get("lambda"), "shell": block.get("shell", 0),
                     "stress_h_minus_2": block["stress_h_minus_2"], "stress_bound": block["stress_bound"],
                     "velocity_lp": block["velocity_lp"], "velocity_l2": block["velocity_l2"],
                     "residual": block["residual"]["relative"], "passed": block["checks"]["passed"]})
    _save_table(rows, out / "norms.csv", {"grid_max": config.params.grid_max, "residual_tolerance": 1e-9})
    paraproduct = report.diagnostics["paraproduct"]
    cells = [{"j": j, "j_prime": jp, "value": v} for j, jp, v in paraproduct["nonzero_cells"]]
    _save_table(cells, out / "paraproduct.csv",
                {"s": paraproduct["s"], "j_max": paraproduct["j_max"], "partial_sums": paraproduct["partial_sums"]})

    final = states[-1]
    if config.dump_fields:
        save_state(final, out / "state")
        emit(HarnessEvents.FIELD_DUMPED, "cli", {"path": str(out / "state")})
    if config.emit_images:
        for name, f in (("vorticity", final.u), ("stress", final.R)):
            path = emit_image(f, out / f"{name}_q{final.q}.pgm")
            emit(HarnessEvents.IMAGE_WRITTEN, "cli", {"path": str(path)})
    for name in config.probes:
        DECAY_TABLES[name](config)

    if report.cap_exceeded:
        logger.error("frequency search exhausted: %s", report.failure["last_failure"])
        return EXIT_CAP
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_mikado(config: RunConfig, lam: int) -> int:
    eps = config.params.eps_gamma
    family = build_family(lam, eps)
    items = check_items(family)
    out = config.out
    _save_table([c.to_row() for c in items], out / "mikado_items.csv", family.manifest())
    if config.sweep:
        scaling = lp_scaling_sweep(config.sweep, eps)
        _save_table(scaling["rows"], out / "mikado_lp.csv", {"ratio_band": scaling["ratio_band"],
                                                             "spread": scaling["spread"]})
        _save_table(tail_sweep(config.sweep, eps), out / "mikado_tail.csv")
    if config.dump_fields:
        save_family(family, out / "family")
        emit(HarnessEvents.FIELD_DUMPED, "cli", {"path": str(out / "family")})
    hard = [c for c in items if c.gate]
    return EXIT_OK if all(c.passed for c in hard) else EXIT_CHECK_FAILED


def cmd_probe_hl(config: RunConfig) -> int:
    _write_decay_hl(config, config.sweep)
    return EXIT_OK


def cmd_probe_hhl(config: RunConfig) -> int:
    _write_decay_hhl(config, config.sweep)
    return EXIT_OK


def cmd_check(config: RunConfig, state_dir: Path) -> int:
    state = load_state(state_dir)
    checks = check_inductive(state)
    data = {"params": state.params.to_dict(), "state": state.summary(),
            "checks": checks.to_dict(), "weak_form": weak_form_residual(state)}
    if not ReportSerializer.save_to_json(data, config.out / "check.json"):
        raise IntegrityError(f"Could not write {config.out / 'check.json'}")
    passed = checks.passed and all(r["pass"] for r in data["weak_form"])
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_norms(config: RunConfig, field_path: Optional[Path]) -> int:
    if field_path is not None:
        f: SpectralField = load_field(field_path)
        label = field_path.name
    else:
        f = random_band_limited(Arity.VECTOR2, 16, seed=config.seed)
        label = f"random_seed_{config.seed}"
    table = NormTable()
    for p in (1, 2, float("inf")):
        table.add_lp(f, p, label)
    for s in (-2.0, -1.0, 0.0, 1.0):
        table.add_sobolev(f, s, label)
    for s in (-0.6, -0.75):
        table.add_besov(f, s, label)
    _save_table(table.to_rows(), config.out / "norms.csv",
                {"field": label, "arity": f.arity.value, "n": f.n, "band": f.band})
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=int)
    common.add_argument("--lambda0", type=int)
    common.add_argument("--eps-gamma", type=as_fraction, help="exact rational, e.g. 1/3")
    common.add_argument("--amp", type=as_fraction, help="base amplitude A, e.g. 1e-4")
    common.add_argument("--qmax", type=int)
    common.add_argument("--lambda-cap", type=int)
    common.add_argument("--gap", type=int)
    common.add_argument("--grid-max", type=int)
    common.add_argument("--out")
    common.add_argument("--dump-fields", action="store_true")
    common.add_argument("--emit-images", action="store_true")
    common.add_argument("--sweep", help="comma-separated lambda values")
    common.add_argument("--probes", help="decay tables written by run: hl, hhl or both")
    common.add_argument("--config", help="YAML file with parameters and run options")
    common.add_argument("--preset", default="desk")
    common.add_argument("--log-level")
    common.add_argument("--seed", type=int)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="nsforge",
                                     description="Nash iteration experiments for stationary Navier-Stokes on T^2")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="full iteration with report")
    mikado = sub.add_parser("mikado", parents=[common], help="Mikado family checks and sweeps")
    mikado.add_argument("--lambda", dest="lam", type=int, default=16)
    sub.add_parser("probe-hl", parents=[common], help="low-high decay probe table")
    sub.add_parser("probe-hhl", parents=[common], help="three-factor decay probe table")
    check = sub.add_parser("check", parents=[common], help="re-verify a dumped state")
    check.add_argument("state", help="directory written with --dump-fields")
    norms = sub.add_parser("norms", parents=[common], help="norm table for a dumped field")
    norms.add_argument("field", nargs="?", help=".sf2 file; a seeded random field when omitted")
    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    try:
        if args.command == "mikado":
            # the family lambda doubles as lambda0 so that lambda^eps is checked against it
            if args.eps_gamma is None:
                args.eps_gamma = Fraction(1, 2)
            if args.lambda0 is None:
                args.lambda0 = args.lam
            if args.lambda_cap is None:
                args.lambda_cap = max(64, args.lam)
        config = build_config(args)
        setup_logging(config.log_level)
        config.out.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "mikado":
            return cmd_mikado(config, args.lam)
        if args.command == "probe-hl":
            return cmd_probe_hl(config)
        if args.command == "probe-hhl":
            return cmd_probe_hhl(config)
        if args.command == "check":
            return cmd_check(config, Path(args.state))
        return cmd_norms(config, Path(args.field) if args.field else None)
    except (ParameterError, GridError) as exc:
        _report_error(exc)
        return EXIT_CONFIG
    except (IntegrityError, OSError) as exc:
        _report_error(exc)
        return EXIT_INTEGRITY
    except CapExceeded as exc:
        _report_error(exc)
        return EXIT_CAP
    except NSForgeError as exc:
        _report_error(exc)
        return EXIT_CHECK_FAILED


def _report_error(exc: Exception):
    emit(HarnessEvents.ERROR_OCCURRED, "cli", to_plain({"type": type(exc).__name__, "message": str(exc)}))
    print(f"nsforge: {type(exc).__name__}: {exc}", file=sys.stderr)


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
