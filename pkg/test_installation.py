#!/usr/bin/env python3
"""
Test script to verify nsforge installation and basic functionality
"""

import sys
import os
from pathlib import Path

# Add current directory to path to import the library
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

ROOT = Path(__file__).parent


def test_imports():
    """Test that all modules can be imported correctly"""
    print("🔍 Testing imports...")

    import nsforge
    print("✅ nsforge - OK")

    from nsforge.core import Arity, Grid2, SpectralField, NormTable, FRAME, MikadoFamily
    print("✅ Core modules - OK")

    from nsforge.iteration import IterationParams, run, check_inductive, decay_probe_hl
    print("✅ Iteration modules - OK")

    from nsforge.utils import ReportSerializer, PresetManager, EventManager
    print("✅ Utility modules - OK")

    from nsforge import create_run
    from nsforge.cli import cli_main
    print("✅ Convenience functions - OK")

    assert nsforge.__version__ == "1.0.0"
    assert set(nsforge.__all__) >= {"SpectralField", "IterationParams", "run", "create_run"}


def test_dependencies():
    """Test that the declared dependencies import"""
    print("\n📦 Testing dependencies...")

    import numpy
    import scipy.fft
    import scipy.optimize
    import yaml
    import PIL

    requirements = (ROOT / "requirements.txt").read_text(encoding="utf-8").split()
    names = {line.split(">=")[0] for line in requirements}
    assert names == {"numpy", "scipy", "PyYAML", "Pillow"}
    print(f"✅ numpy {numpy.__version__}, PIL {PIL.__version__}")


def test_setup_manifest():
    """Test the package metadata in setup.py"""
    print("\n🛠️ Testing setup.py...")

    text = (ROOT / "setup.py").read_text(encoding="utf-8")
    assert 'name="nsforge"' in text
    assert 'version="1.0.0"' in text
    assert '"nsforge=nsforge.cli:main"' in text
    print("✅ Console script nsforge registered")


def test_create_run():
    """Test the convenience entry point on the smoke preset"""
    print("\n🚀 Testing create_run...")

    from nsforge import create_run

    states, report = create_run("smoke")
    assert len(states) == 1 and report.passed
    print("✅ Smoke preset passes its checks")


def main():
    """Run all installation tests"""
    print("🧪 nsforge Installation Test")
    print("=" * 50)

    tests = [
        test_imports,
        test_dependencies,
        test_setup_manifest,
        test_create_run,
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

    print("\n" + "=" * 50)
    print(f"📊 Test Results: {passed}/{total} tests passed")

    if passed == total:
        print("🎉 All tests passed! nsforge is ready to use.")
        print("\n📚 Next steps:")
        print("   - Run 'nsforge run --preset smoke' for a first report")
        print("   - Check QUICK_START.md for the command line")
        return 0
    else:
        print("⚠️  Some tests failed. Please check the installation.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
