#!/usr/bin/env python3
"""
Test script to verify nsforge core functionality: spectral fields, norms and tensor geometry
"""

import sys
import os
import math
from fractions import Fraction

import numpy as np

# Add current directory to path to import the library
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def test_grid_and_transforms():
    """Test grid sizing, grid limits and exact transforms"""
    print("Testing grids and transforms...")

    from nsforge.core.fourier_field import (Arity, Grid2, forward_transform, get_max_grid, grid_limit,
                                            inverse_transform, random_band_limited)
    from nsforge.errors import GridError

    assert Grid2.for_band(0).n == 4
    assert Grid2.for_band(3).n == 8
    assert Grid2.for_band(4).n == 16
    try:
        Grid2(12)
        assert False, "Grid2(12) should be rejected"
    except GridError:
        pass
    print("✅ Grid sizing correct")

    limit = get_max_grid()
    with grid_limit(16):
        try:
            Grid2.for_band(20)
            assert False, "band 20 should not fit a 16 grid limit"
        except GridError:
            pass
    assert get_max_grid() == limit
    print("✅ Grid limit restored after context")

    f = random_band_limited(Arity.VECTOR2, 5, seed=1)
    assert f.coeffs.shape == (2, 16, 9)
    assert f.mean_zero
    g = forward_transform(inverse_transform(f), Arity.VECTOR2, band=5)
    assert np.abs(g.coeffs - f.coeffs).max() < 1e-12
    assert np.array_equal(f.resample(32).resample(16).coeffs, f.coeffs)
    print("✅ Transform and resample round trips exact")


def test_plane_waves_and_modulation():
    """Test plane waves and exact modulation"""
    print("\nTesting plane waves and modulation...")

    from nsforge.core.fourier_field import (Arity, Grid2, modulate, multiply, plane_wave,
                                            random_band_limited, sample_plane_wave)
    from nsforge.errors import FieldError

    s = plane_wave("sin", (0, 1))
    assert s.coeffs[0, 0, 1] == -0.5j
    _, x2 = Grid2(s.n).points()
    assert np.allclose(s.samples()[0], np.sin(2 * np.pi * x2), atol=1e-14)
    print("✅ sin(2 pi x_2) has the expected coefficient")

    f = random_band_limited(Arity.SCALAR, 3, seed=7)
    shifted = modulate(f, (2, 1), "cos")
    product = multiply(f, plane_wave("cos", (2, 1)))
    assert shifted.band == 5
    assert (shifted - product).max_coeff() < 1e-14
    print("✅ Modulation matches the dealiased product")

    wave = sample_plane_wave("cos", 8, (Fraction(3, 5), Fraction(4, 5)))
    modes = [tuple(int(v) for v in row) for row in wave.nonzero_wavenumbers()]
    assert modes == [(6, 8)], modes
    print("✅ Sample plane wave sits at (5/4) mu k")

    try:
        modulate(f, (Fraction(1, 2), 0))
        assert False, "non-integer wavenumber should fail"
    except FieldError:
        pass
    print("✅ Non-integer wavenumber rejected")


def test_calculus():
    """Test spectral derivatives"""
    print("\nTesting spectral calculus...")

    from nsforge.core.fourier_field import (Arity, deformation, divergence, laplacian, perp_gradient,
                                            plane_wave, random_band_limited, vorticity)

    psi = random_band_limited(Arity.SCALAR, 6, seed=2)
    u = perp_gradient(psi)
    assert divergence(u).max_coeff() <= 1e-12 * u.max_coeff()
    print("✅ Perp-gradient is divergence-free")

    s = plane_wave("sin", (0, 1))
    assert (laplacian(s) + s * (4 * math.pi ** 2)).max_coeff() < 1e-12
    print("✅ Laplacian of sin(2 pi x_2)")

    omega = vorticity(u)
    assert (omega - laplacian(psi)).max_coeff() <= 1e-10 * omega.max_coeff()
    v = random_band_limited(Arity.VECTOR2, 4, seed=3)
    sym = deformation(v)
    trace = sym.component(0) + sym.component(2)
    assert (trace - divergence(v) * 2.0).max_coeff() <= 1e-12 * max(trace.max_coeff(), 1.0)
    lap = laplacian(u)
    assert (divergence(deformation(u)) - lap).max_coeff() <= 1e-12 * lap.max_coeff()
    print("✅ Vorticity and deformation identities")


def test_products_and_shells():
    """Test alias-free products and Littlewood-Paley projections"""
    print("\nTesting products and shells...")

    from nsforge.core.fourier_field import (SHELL, Arity, constant_field, from_modes, highpass, lowpass,
                                            multiply, outer, plane_wave, random_band_limited,
                                            shell_project)
    from nsforge.errors import FieldError

    s = plane_wave("sin", (0, 1))
    square = multiply(s, s)
    assert abs(square.mean[0] - 0.5) < 1e-14
    assert abs(square.coeffs[0, 0, 2] + 0.25) < 1e-14
    print("✅ sin^2 = 1/2 - cos(4 pi x_2)/2")

    u = from_modes(Arity.VECTOR2, {(0, 1): (-0.5j, 0.0), (1, 0): (0.0, 1.0)})
    uu = outer(u, u)
    assert uu.arity is Arity.SYMTENSOR2
    assert (uu.component(1) - multiply(u.component(0), u.component(1))).max_coeff() < 1e-14
    print("✅ Vector product stores the symmetric 12 entry")

    assert np.allclose(SHELL.profile(np.array([1.0, 1.5, 12 / 7])), 1.0)
    assert np.all(SHELL.profile(np.array([0.5, 0.85, 2.0, 3.0])) == 0.0)
    print("✅ Shell profile plateau and support")

    f = random_band_limited(Arity.SCALAR, 8, seed=3)
    total = shell_project(f, 0)
    for j in range(1, 6):
        total = total + shell_project(f, j)
    assert (total - f).max_coeff() < 1e-14
    print("✅ Shells sum to the mean-free field")

    g = random_band_limited(Arity.SCALAR, 8, seed=4, mean_zero=False)
    rebuilt = lowpass(g, 4) + highpass(g, 4) + constant_field(g.mean[0])
    assert (rebuilt - g).max_coeff() < 1e-14
    assert lowpass(g, 1).is_zero()
    low = lowpass(g, 4, include_mean=True)
    assert low.band <= 3 and low.mean[0] == g.mean[0]
    try:
        lowpass(g, 3)
        assert False, "non-dyadic cutoff should fail"
    except FieldError:
        pass
    print("✅ lowpass + highpass + mean reassembles the field")


def test_norms():
    """Test L^p, Sobolev and Besov norms and the paraproduct table"""
    print("\nTesting norms...")

    from nsforge.core.fourier_field import Arity, from_modes, identity_tensor, plane_wave
    from nsforge.core.norms import (NormTable, besov_norm, inner_product, lp_norm, paraproduct_table,
                                    sobolev_norm)
    from nsforge.errors import ParameterError

    s = plane_wave("sin", (0, 1))
    half = 1 / math.sqrt(2)
    assert abs(sobolev_norm(s, 0.0) - half) < 1e-15
    assert abs(sobolev_norm(s, -2.0) - half) < 1e-15
    assert abs(lp_norm(s, 2) - half) < 1e-14
    assert abs(lp_norm(s, "inf") - 1.0) < 1e-12
    assert abs(inner_product(s, s) - 0.5) < 1e-15
    print("✅ Norms of sin(2 pi x_2)")

    f = from_modes(Arity.SCALAR, {(3, 4): 1.0})
    assert abs(sobolev_norm(f, -2.0) - math.sqrt(2) / 25) < 1e-15
    A = 1e-4
    R0 = from_modes(Arity.SYMTENSOR2, {(0, 1): (0.0, -math.pi * A, 0.0)})
    assert abs(sobolev_norm(R0, -2.0) - 2 * math.pi * A) <= 1e-12 * 2 * math.pi * A
    assert sobolev_norm(identity_tensor(3.0), -2.0) == 0.0
    assert abs(inner_product(identity_tensor(), identity_tensor()) - 2.0) < 1e-15
    print("✅ H^-2 of single modes and of the base stress")

    assert abs(besov_norm(s, -0.6) - 1.0) < 1e-12
    try:
        lp_norm(s, 0.5)
        assert False, "p < 1 should fail"
    except ParameterError:
        pass

    table = NormTable()
    table.add_lp(s, 2, "sin")
    table.add_sobolev(s, -2.0, "sin")
    assert len(table) == 2
    assert abs(table.lookup("lp", 2, "sin").value - half) < 1e-14
    assert table.to_rows()[1]["kind"] == "sobolev"
    print("✅ Norm table and Besov norm")

    paraproduct = paraproduct_table(s, s, -2.0, 3)
    cells = paraproduct.nonzero_cells()
    expected = 0.5 * sobolev_norm(plane_wave("cos", (0, 2)), -2.0)
    assert len(cells) == 1 and cells[0][:2] == (0, 0)
    assert abs(cells[0][2] - expected) < 1e-10
    sums = paraproduct.partial_sums
    assert all(b >= a for a, b in zip(sums, sums[1:]))
    assert abs(sums[-1] - expected) < 1e-10
    print("✅ Paraproduct table has one cell with the hand value")


def test_capped_quadrature():
    """Test that L^p quadrature over the grid cap is flagged and logged"""
    print("\nTesting capped L^p quadrature...")

    import logging

    from nsforge.core.fourier_field import Arity, from_modes, grid_limit
    from nsforge.core.norms import NormTable, lp_quadrature

    records = []

    class Collect(logging.Handler):
        def emit(self, record):
            records.append(record)

    handler = Collect(level=logging.WARNING)
    norms_logger = logging.getLogger("nsforge.core.norms")
    norms_logger.addHandler(handler)
    try:
        f = from_modes(Arity.SCALAR, {(0, 1): 1.0})
        result = lp_quadrature(f, 2)
        assert not result.capped and result.grid == 8 and result.error is not None
        assert not records
        print("✅ Refined grid within the cap")

        with grid_limit(16):
            g = from_modes(Arity.SCALAR, {(0, 6): 1.0})
            result = lp_quadrature(g, 4)
            assert result.capped and result.grid == g.n == 16
            assert result.error is None
            assert len(records) == 1 and records[0].levelno == logging.WARNING
            table = NormTable()
            entry = table.add_lp(g, 4, "band6")
            assert entry.note and table.to_rows()[0]["note"] == entry.note
        print("✅ Capped grid logged and noted in the table")
    finally:
        norms_logger.removeHandler(handler)


def test_tensor_geometry():
    """Test frame coefficients, the admissible radius and the amplitude fields"""
    print("\nTesting tensor geometry...")

    from nsforge.core.fourier_field import Arity, from_modes, zeros
    from nsforge.core.tensor_geometry import (SymMatrix2, admissible_radius, amplitude_fields,
                                              gamma_coefficients, gamma_squared, op_norm_entries,
                                              reconstruct)
    from nsforge.errors import NotPositive, ZeroStress

    solution = gamma_squared(SymMatrix2.identity())
    assert np.allclose(solution.c, (7 / 8, 25 / 16, 25 / 16), rtol=0, atol=1e-12)
    assert solution.residual < 1e-12
    print("✅ gamma^2(I) = (7/8, 25/16, 25/16)")

    assert abs(admissible_radius() - 7 / 25) < 1e-9
    print("✅ Admissible radius is 7/25")

    rng = np.random.default_rng(0)
    E = rng.uniform(-1.0, 1.0, size=(3, 100000))
    E /= op_norm_entries(E)
    identity = np.array([1.0, 0.0, 1.0])[:, None]
    for eps, positive in ((1 / 3, False), (0.27, True)):
        R = identity + eps * rng.uniform(0.0, 1.0, size=100000) * E
        c = gamma_coefficients(R)
        assert np.abs(reconstruct(c) - R).max() < 1e-12
        if positive:
            assert c.min() > 0
    print("✅ Reconstruction exact on 10^5 random matrices, positive inside the radius")

    try:
        gamma_squared(SymMatrix2(1.0, 0.0, 0.0))
        assert False, "diag(1, 0) should not be positive"
    except NotPositive as exc:
        assert exc.solution.c[0] < 0

    A = 1e-4
    R0 = from_modes(Arity.SYMTENSOR2, {(0, 1): (0.0, -math.pi * A, 0.0)})
    fields = amplitude_fields(R0, Fraction(1, 3))
    assert abs(fields.norm_inf - 2 * math.pi * A) <= 1e-12 * 2 * math.pi * A
    assert fields.min_coefficient > 0
    assert fields.identity_residual() < 1e-10
    try:
        amplitude_fields(zeros(Arity.SYMTENSOR2), Fraction(1, 3))
        assert False, "zero stress should be reported"
    except ZeroStress:
        pass
    print("✅ Amplitude fields rebuild eps^-1 ||R|| I - R")


def test_event_system_core():
    """Test event management system"""
    print("\nTesting event system...")

    from nsforge.utils.events import EventManager, IterationEvents

    manager = EventManager()
    received = []

    def broken(event):
        raise RuntimeError("listener failure")

    manager.register_global_handler(lambda e: received.append(("global", e.event_type)))
    manager.register_event(IterationEvents.LAMBDA_TRIED, broken)
    manager.register_event(IterationEvents.LAMBDA_TRIED, lambda e: received.append(("tried", e.data["lambda"])))

    first = manager.emit_event(IterationEvents.LAMBDA_TRIED, "test", {"lambda": 8})
    assert received == [("global", IterationEvents.LAMBDA_TRIED), ("tried", 8)]
    print("✅ Global handlers first, failing handlers skipped")

    last = manager.emit_event(IterationEvents.RUN_FINISHED)
    assert last.sequence > first.sequence
    assert manager.get_handler_count(IterationEvents.LAMBDA_TRIED) == 2
    assert manager.get_handler_count() == 3
    manager.remove_event_handler(IterationEvents.LAMBDA_TRIED, broken)
    assert manager.get_handler_count(IterationEvents.LAMBDA_TRIED) == 1
    print("✅ Numbered events and handler removal")


def main():
    """Run all core tests"""
    print("🧪 Testing nsforge (Core Components)")
    print("=" * 60)

    tests = [
        test_grid_and_transforms,
        test_plane_waves_and_modulation,
        test_calculus,
        test_products_and_shells,
        test_norms,
        test_capped_quadrature,
        test_tensor_geometry,
        test_event_system_core,
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
    print(f"Core Test Results: {passed}/{total} tests passed")

    if passed == total:
        print("🎉 All core tests passed!")
        return 0
    else:
        print(f"⚠️  {total - passed} tests failed. Check the output above.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
