#!/usr/bin/env python3
"""
Test script to verify the Mikado building blocks of nsforge
"""

import sys
import os
import math
from fractions import Fraction

import numpy as np

# Add current directory to path to import the library
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def test_pulse_arithmetic():
    """Test integer pulse counts and exponent selection"""
    print("Testing pulse arithmetic...")

    from nsforge.core.mikado import concentration_for, pulses_for
    from nsforge.errors import ParameterError

    assert pulses_for(16, Fraction(1, 2)) == 4
    assert pulses_for(8, Fraction(1, 3)) == 2
    assert pulses_for(64, "1/2") == 8
    for lam, eps in ((8, Fraction(1, 2)), (12, Fraction(1, 2)), (16, Fraction(3, 2))):
        try:
            pulses_for(lam, eps)
            assert False, f"lambda={lam}, eps={eps} should be rejected"
        except ParameterError:
            pass
    print("✅ lambda^eps must be an integer")

    assert concentration_for(16, Fraction(1, 3)) == Fraction(1, 4)
    assert concentration_for(64, Fraction(1, 3)) == Fraction(1, 3)
    assert concentration_for(64, Fraction(1, 2)) == Fraction(1, 2)
    print("✅ Closest admissible exponent")


def test_profile_structure():
    """Test the pulse train of a single direction"""
    print("\nTesting profile structure...")

    from nsforge.core.mikado import build_profile
    from nsforge.core.tensor_geometry import FRAME
    from nsforge.errors import ParameterError

    axis = build_profile(16, Fraction(1, 2), FRAME.directions[0])
    tilted = build_profile(16, Fraction(1, 2), FRAME.directions[1])
    assert axis.lattice == (1, 0)
    assert tilted.lattice == (3, 4)
    assert axis.pulses == 4 and abs(axis.width - 3 / 64) < 1e-15
    assert abs(np.mean(axis.samples ** 2) - 1.0) < 1e-12
    assert abs(np.mean(axis.samples)) < 1e-12
    assert abs(axis.coeffs[0]) < 1e-12
    assert np.all(axis.coeffs[np.arange(axis.resolution) % axis.pulses != 0] == 0)
    print("✅ Normalized, mean-zero, energy only at multiples of the pulse count")

    assert abs(axis.lp(2) - 1.0) < 1e-12
    assert axis.lp(1) < 1.0 < axis.lp(math.inf)
    print("✅ L^1 < L^2 = 1 < L^inf")

    try:
        build_profile(4, Fraction(1, 2), FRAME.directions[1])
        assert False, "pulses of width 3/16 cannot fit a spacing of 1/10"
    except ParameterError:
        pass
    print("✅ Overlapping pulses rejected")


def test_mikado_items():
    """Test the structural items for lambda in {16, 64} at eps = 1/2"""
    print("\nTesting Mikado items...")

    from nsforge.core.mikado import build_family, check_items

    for lam in (16, 64):
        family = build_family(lam, Fraction(1, 2))
        items = check_items(family)
        names = {c.item for c in items}
        assert names == {"divergence_free", "stationary_euler", "mean_square", "mean_zero",
                         "periodicity", "support_fraction", "tail_mass"}
        failed = [(c.item, c.direction, c.measured) for c in items if c.gate and not c.passed]
        assert not failed, failed
        for c in items:
            if c.item == "mean_square":
                assert c.measured <= 1e-8
            if c.item == "mean_zero":
                assert c.measured <= 1e-12
            if c.item == "tail_mass":
                assert not c.gate and c.passed is None and c.measured >= 0
        print(f"✅ All items pass at lambda={lam}")

    row = items[0].to_row()
    assert set(row) == {"item", "direction", "measured", "bound", "pass", "gate", "note"}
    print("✅ Item rows serialize")


def test_offset_profile_items():
    """Test that a pulse train with a nonzero mean fails the mean items"""
    print("\nTesting items on an offset pulse train...")

    from dataclasses import replace

    from nsforge.core.mikado import MikadoFamily, build_family, check_items

    family = build_family(16, Fraction(1, 2))
    shifted = []
    for profile in family.profiles:
        coeffs = profile.coeffs.copy()
        coeffs[0] += 0.5
        shifted.append(replace(profile, samples=profile.samples + 0.5, coeffs=coeffs))
    offset = MikadoFamily(family.lam, family.eps, family.frame, shifted)

    items = check_items(offset)
    mean_zero = [c for c in items if c.item == "mean_zero"]
    assert len(mean_zero) == 3
    for c in mean_zero:
        assert not c.passed
        assert abs(c.measured - 0.5) < 1e-12
    mean_square = [c for c in items if c.item == "mean_square"]
    assert all(not c.passed and abs(c.measured - 0.25) < 1e-10 for c in mean_square)
    print("✅ Mean and mean square measured from the samples")

    divergence = [c for c in items if c.item == "divergence_free"]
    assert all(c.passed for c in divergence)
    print("✅ The 2D flow keeps only the mean-free part")


def test_family_fields():
    """Test 2D fields built from the family"""
    print("\nTesting family fields...")

    from nsforge.core.fourier_field import Arity, divergence_ratio
    from nsforge.core.mikado import build_family

    family = build_family(16, Fraction(1, 2))
    assert family.pulses == 4
    rho = family.rho(1, 64)
    assert rho.mean_zero
    modes = rho.nonzero_wavenumbers()
    assert np.all(modes % 4 == 0)
    assert np.all(modes[:, 0] * 4 == modes[:, 1] * 3)
    print("✅ Tilted profile lives on the lattice 4 (3, 4) Z")

    W = family.velocity(1, 64)
    assert W.arity is Arity.VECTOR2
    assert divergence_ratio(W) <= 1e-12
    low = family.lowpassed(0)
    assert low.band <= 16 * 16 - 1
    manifest = family.manifest()
    assert manifest["pulses"] == 4 and manifest["periods"] == ["1", "1/5", "1/5"]
    print("✅ Velocity, lowpass and manifest")


def test_lp_scaling_and_tails():
    """Test the L^p scaling sweep and the tail and cross-direction tables"""
    print("\nTesting L^p scaling and tails...")

    from nsforge.core.mikado import build_family, cross_direction_mass, lp_scaling_sweep, tail_mass, tail_sweep

    sweep = lp_scaling_sweep((16, 64), Fraction(1, 2))
    assert len(sweep["rows"]) == 6
    for row in sweep["rows"]:
        if row["p"] == 2.0:
            assert abs(row["measured"] - 1.0) < 1e-12
            assert row["predicted"] == 1.0
    for p, spread in sweep["spread"].items():
        assert spread < 8.0, (p, spread)
    print("✅ L^p ratios stay within a factor 8 across the sweep")

    family = build_family(16, Fraction(1, 2))
    tails = tail_mass(family)
    assert len(tails) == 3 and all(t >= 0 for t in tails)
    masses = cross_direction_mass(family)
    assert set(masses) == {(0, 1), (0, 2), (1, 2)}
    assert all(0 <= m < 1 for m in masses.values())
    rows = tail_sweep((16, 64), Fraction(1, 2))
    assert [r["lambda"] for r in rows] == [16, 64]
    print("✅ Tail and cross-direction tables")


def main():
    """Run all Mikado tests"""
    print("🧪 Testing nsforge Mikado flows")
    print("=" * 60)

    tests = [
        test_pulse_arithmetic,
        test_profile_structure,
        test_mikado_items,
        test_offset_profile_items,
        test_family_fields,
        test_lp_scaling_and_tails,
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
    print(f"Mikado Test Results: {passed}/{total} tests passed")

    if passed == total:
        print("🎉 All Mikado tests passed!")
        return 0
    else:
        print(f"⚠️  {total - passed} tests failed. Check the output above.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
