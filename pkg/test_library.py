#!/usr/bin/env python3
"""
Test script to verify nsforge persistence, presets, images and the command line
"""

import sys
import os
import json
import tempfile
from pathlib import Path

import numpy as np

# Add current directory to path to import the library
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def _base_report():
    from nsforge.iteration.driver import run
    from nsforge.iteration.params import IterationParams

    states, report = run(IterationParams(q_max=0))
    return states[0], report.to_dict()


def test_report_serialization():
    """Test JSON and YAML report round trips"""
    print("Testing report serialization...")

    from nsforge.utils.serializer import ReportSerializer, to_plain

    _, data = _base_report()
    with tempfile.TemporaryDirectory() as tmp:
        json_path = Path(tmp) / "report.json"
        assert ReportSerializer.save_to_json(data, json_path)
        loaded = ReportSerializer.load_from_json(json_path)
        assert loaded is not None
        assert loaded["metadata"]["library"] == "nsforge"
        assert loaded["base"] == to_plain(data["base"])
        print("✅ JSON round trip")

        yaml_path = Path(tmp) / "report.yaml"
        assert ReportSerializer.save_to_yaml(data, yaml_path)
        loaded_yaml = ReportSerializer.load_from_yaml(yaml_path)
        assert loaded_yaml is not None
        assert loaded_yaml["params"] == loaded["params"]
        assert loaded_yaml["base"]["checks"]["passed"] is True
        print("✅ YAML round trip")

        broken = Path(tmp) / "broken.json"
        broken.write_text(json.dumps({"params": {}, "steps": []}), encoding="utf-8")
        assert ReportSerializer.load_from_json(broken) is None
        assert ReportSerializer.load_from_json(Path(tmp) / "missing.json") is None
        print("✅ Invalid reports rejected")

    stats = ReportSerializer.get_report_statistics(to_plain(data))
    assert stats["steps"] == 0 and stats["lambdas"] == []
    assert stats["total_checks"] == len(data["base"]["checks"]["items"])
    assert stats["failed_gates"] == []
    merged = ReportSerializer.merge_reports([data, data])
    assert len(merged["sweep"]) == 2 and merged["metadata"]["merged_count"] == 2
    print(f"✅ Statistics: {stats['total_checks']} checks, {stats['gates']} gates")


def test_table_output():
    """Test CSV tables with their JSON sidecar"""
    print("\nTesting tables...")

    from nsforge.utils.serializer import load_table_csv, save_table_csv

    rows = [{"lambda": 2, "value": 0.5}, {"lambda": 4, "value": 0.125, "note": "extra"}]
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "probe.csv"
        assert save_table_csv(rows, path, {"ratio": 0.25})
        loaded = load_table_csv(path)
        assert [r["lambda"] for r in loaded] == ["2", "4"]
        assert loaded[0]["note"] == "" and loaded[1]["note"] == "extra"
        sidecar = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        assert sidecar["columns"] == ["lambda", "value", "note"]
        assert sidecar["rows"] == 2 and sidecar["ratio"] == 0.25
        assert load_table_csv(Path(tmp) / "missing.csv") is None
    print("✅ CSV and sidecar")


def test_field_dumps():
    """Test .sf2 field dumps and their integrity checks"""
    print("\nTesting field dumps...")

    from nsforge.core.fourier_field import Arity, random_band_limited
    from nsforge.utils.serializer import load_field, save_field
    from nsforge.errors import IntegrityError

    f = random_band_limited(Arity.SYMTENSOR2, 12, seed=3)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "R.sf2"
        header = save_field(f, path)
        assert header["arity"] == "symtensor2" and header["band"] == 12
        g = load_field(path)
        assert g.arity is Arity.SYMTENSOR2 and g.band == f.band
        assert np.array_equal(g.coeffs, f.coeffs)
        print("✅ Coefficients restored bit for bit")

        raw = path.read_bytes()
        corrupted = bytearray(raw)
        corrupted[-1] ^= 0x01
        for name, content in (("flipped.sf2", bytes(corrupted)), ("short.sf2", raw[:-16]),
                              ("headless.sf2", raw[raw.index(b"\n") + 1:][:8])):
            target = Path(tmp) / name
            target.write_bytes(content)
            try:
                load_field(target)
                assert False, f"{name} should fail"
            except IntegrityError:
                pass
        try:
            load_field(Path(tmp) / "missing.sf2")
            assert False, "missing dump should fail"
        except IntegrityError:
            pass
    print("✅ Corrupted, truncated and missing dumps raise IntegrityError")


def test_state_dumps():
    """Test saving and reloading an iteration state"""
    print("\nTesting state dumps...")

    from nsforge.iteration.checks import check_inductive
    from nsforge.utils.serializer import load_state, save_state
    from nsforge.errors import IntegrityError

    state, _ = _base_report()
    with tempfile.TemporaryDirectory() as tmp:
        directory = Path(tmp) / "state"
        manifest = save_state(state, directory)
        assert set(manifest["files"]) == {"u", "R", "base_velocity"}
        assert (directory / "w_0.sf2").exists() and (directory / "state.json").exists()

        restored = load_state(directory)
        assert restored.q == 0 and restored.C == state.C
        assert restored.params == state.params
        assert np.array_equal(restored.u.coeffs, state.u.coeffs)
        assert check_inductive(restored).passed
        print("✅ State round trip passes the checks again")

        (directory / "R.sf2").write_bytes((directory / "u.sf2").read_bytes())
        try:
            load_state(directory)
            assert False, "swapped fields should fail"
        except IntegrityError:
            pass
    print("✅ Manifest checksums enforced")


def test_presets():
    """Test built-in and custom presets"""
    print("\nTesting presets...")

    from nsforge.utils.presets import PresetManager
    from nsforge.errors import ParameterError

    manager = PresetManager()
    available = manager.get_available_presets()
    assert {"desk", "smoke", "strict", "asymptotic"} <= set(available)
    assert manager.params_for("smoke").q_max == 0
    assert manager.params_for("strict").enforce_stress_bound
    assert manager.params_for("desk", {"q_max": 0}).q_max == 0
    assert manager.params_for("asymptotic").beta == 6
    try:
        manager.params_for("nope")
        assert False, "unknown preset should fail"
    except ParameterError:
        pass
    print(f"✅ {len(available)} presets available")

    manager.create_custom_preset("quick", "Quick", {"q_max": 0, "grid_max": 512})
    assert manager.params_for("quick").grid_max == 512
    try:
        manager.create_custom_preset("bad", "Bad", {"beta": 2})
        assert False, "invalid custom preset should fail"
    except ParameterError:
        pass

    with tempfile.TemporaryDirectory() as tmp:
        for suffix in (".yaml", ".json"):
            path = Path(tmp) / f"quick{suffix}"
            assert manager.export_preset("quick", path)
            assert manager.import_preset(path, f"quick{suffix}")
            assert manager.params_for(f"quick{suffix}").grid_max == 512
        bad = Path(tmp) / "bad.yaml"
        bad.write_text("name: Bad\nparams:\n  beta: 2\n", encoding="utf-8")
        assert not manager.import_preset(bad, "bad")
        assert not manager.export_preset("nope", Path(tmp) / "nope.yaml")

    assert manager.delete_custom_preset("quick")
    assert not manager.delete_custom_preset("quick")
    print("✅ Custom presets created, exported, imported and deleted")


def test_images():
    """Test graymap snapshots"""
    print("\nTesting images...")

    from PIL import Image

    from nsforge.core.fourier_field import Arity, from_modes, plane_wave
    from nsforge.utils.images import emit_image, to_gray

    assert np.all(to_gray(np.zeros((4, 4))) == 128)
    gray = to_gray(np.array([[-1.0, 0.0, 1.0]]))
    assert gray[0, 0] == 0 and gray[0, 2] == 255
    assert to_gray(np.array([[0.0, 2.0]]))[0, 1] == 255
    print("✅ Gray levels")

    u = from_modes(Arity.VECTOR2, {(0, 1): (-0.5j, 0.0)})
    with tempfile.TemporaryDirectory() as tmp:
        path = emit_image(u, Path(tmp) / "vorticity.pgm", 32)
        with Image.open(path) as image:
            assert image.size == (32, 32) and image.mode == "L"
        path = emit_image(plane_wave("cos", (1, 0)), Path(tmp) / "wave.pgm")
        with Image.open(path) as image:
            assert image.size == (4, 4)
    print("✅ PGM snapshots written")


def test_event_system():
    """Test the events the driver emits during a run"""
    print("\nTesting event system...")

    from nsforge.iteration.driver import run
    from nsforge.iteration.params import IterationParams
    from nsforge.utils.events import IterationEvents, event_manager

    seen = []

    def record(event):
        seen.append((event.event_type, event.sequence))

    event_manager.register_global_handler(record)
    try:
        run(IterationParams(q_max=0))
    finally:
        event_manager.remove_global_handler(record)
    assert [name for name, _ in seen] == [IterationEvents.RUN_STARTED, IterationEvents.BASE_READY,
                                         IterationEvents.RUN_FINISHED]
    numbers = [number for _, number in seen]
    assert numbers == sorted(numbers)
    print("✅ Base-only run emits start, base and finish in order")


def test_cli():
    """Test subcommands and exit codes"""
    print("\nTesting command line...")

    from nsforge.cli import build_parser, cli_main
    from nsforge.utils.serializer import load_table_csv

    args = build_parser().parse_args(["mikado", "--lambda", "64", "--eps-gamma", "1/2"])
    assert args.lam == 64 and str(args.eps_gamma) == "1/2"
    assert cli_main(["frobnicate"]) == 2
    print("✅ Parser")

    with tempfile.TemporaryDirectory() as tmp:
        out = str(Path(tmp) / "out")
        assert cli_main(["run", "--preset", "nope", "--out", out]) == 2
        assert cli_main(["run", "--preset", "smoke", "--beta", "2", "--out", out]) == 2
        assert cli_main(["mikado", "--lambda", "16", "--eps-gamma", "1/3", "--out", out]) == 2
        print("✅ Configuration errors exit with 2")

        assert cli_main(["probe-hl", "--out", out]) == 0
        rows = load_table_csv(Path(out) / "probe_hl.csv")
        assert [int(r["lambda"]) for r in rows] == [2, 4, 8, 16]
        assert cli_main(["norms", "--out", out, "--seed", "7"]) == 0
        assert (Path(out) / "norms.csv").exists()
        print("✅ Probe and norm tables")

        config = Path(tmp) / "smoke.yaml"
        config.write_text("q_max: 0\ndump_fields: true\nemit_images: true\n", encoding="utf-8")
        assert cli_main(["run", "--preset", "smoke", "--config", str(config), "--out", out]) == 0
        report = json.loads((Path(out) / "report.json").read_text(encoding="utf-8"))
        assert report["passed"] and report["config"]["dump_fields"]
        assert (Path(out) / "paraproduct.csv").exists()
        assert (Path(out) / "vorticity_q0.pgm").exists()
        print("✅ Smoke run exits with 0")

        assert cli_main(["check", str(Path(out) / "state"), "--out", out]) == 0
        check = json.loads((Path(out) / "check.json").read_text(encoding="utf-8"))
        assert check["checks"]["passed"]
        dumped = Path(out) / "state" / "u.sf2"
        dumped.write_bytes(dumped.read_bytes()[:-1])
        assert cli_main(["check", str(Path(out) / "state"), "--out", out]) == 3
        print("✅ Corrupted state exits with 3")

        assert cli_main(["run", "--lambda0", "4", "--eps-gamma", "1/2", "--lambda-cap", "4",
                         "--out", out]) == 4
        report = json.loads((Path(out) / "report.json").read_text(encoding="utf-8"))
        assert report["failure"]["kind"] == "cap_exceeded"
        print("✅ Exhausted frequency search exits with 4")


def test_run_decay_tables_and_report_bytes():
    """Test decay tables requested from run and output-independent reports"""
    print("\nTesting run outputs...")

    from nsforge.cli import cli_main
    from nsforge.utils.serializer import load_table_csv

    with tempfile.TemporaryDirectory() as tmp:
        first = Path(tmp) / "first"
        second = Path(tmp) / "elsewhere" / "second"
        config = Path(tmp) / "smoke.yaml"
        config.write_text("q_max: 0\nprobes: [hl]\n", encoding="utf-8")

        assert cli_main(["run", "--preset", "smoke", "--config", str(config), "--out", str(first)]) == 0
        assert cli_main(["run", "--preset", "smoke", "--probes", "hl", "--out", str(second)]) == 0
        for out in (first, second):
            rows = load_table_csv(out / "probe_hl.csv")
            assert [int(r["lambda"]) for r in rows] == [2, 4, 8, 16]
            assert not (out / "probe_hhl.csv").exists()
        print("✅ Listed decay tables written by run")

        report = json.loads((first / "report.json").read_text(encoding="utf-8"))
        assert "out" not in report["config"] and report["config"]["probes"] == ["hl"]
        assert (first / "report.json").read_bytes() == (second / "report.json").read_bytes()
        print("✅ Reports identical across output directories")

        assert cli_main(["run", "--preset", "smoke", "--probes", "hl,bogus", "--out", str(first)]) == 2
        print("✅ Unknown table name exits with 2")


def main():
    """Run all library tests"""
    print("🧪 Testing nsforge library")
    print("=" * 60)

    tests = [
        test_report_serialization,
        test_table_output,
        test_field_dumps,
        test_state_dumps,
        test_presets,
        test_images,
        test_event_system,
        test_cli,
        test_run_decay_tables_and_report_bytes,
    ]

    passed = 0
    total = len(tests)

    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"❌ Error in {test.__name__}: {e}")
            import traceback
            traceback.print_exc()

    print("\n" + "=" * 60)
    print(f"Library Test Results: {passed}/{total} tests passed")

    if passed == total:
        print("🎉 All library tests passed!")
        return 0
    else:
        print(f"⚠️  {total - passed} tests failed. Check the output above.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
