import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rydcavity.core import PhysicalParams, angular
from rydcavity.errors import GeometryError, InvalidInput, SingularResponse
from rydcavity.gate import (
    ForsterModel,
    ScanAxis,
    ScanSpec,
    auto_two_photon_resonance,
    build_geometry,
    fidelity,
    forster_coupling,
    gate_quantities,
    reflection_blocked,
    reflection_blocked_from_couplings,
    reflection_unblocked,
    scan,
    two_photon_resonance_shift,
)

# the documented gate test configuration: cubic array, exchange coefficient
# c3 = 2pi x 1000 MHz um^3 (a test value, not a claimed physical constant)
ARRAY_DIMS = (10, 10, 10)
SPACING_UM = 0.37
C3_TEST = angular(1000.0)

GATE_BASE = PhysicalParams(
    omega_rabi=angular(100),
    g_collective=angular(0.5) * math.sqrt(1000),
    g_single=angular(0.5),
    delta_e=angular(1000),
    gamma_e=angular(1),
    gamma_r=angular(0.01),
    gamma_p=angular(0.01),
    kappa=angular(1),
    n_atoms=1000,
)


@pytest.fixture(scope="module")
def geometry():
    return build_geometry(ARRAY_DIMS, SPACING_UM).with_forster(ForsterModel(C3_TEST))


class TestGeometry:
    def test_cubic_array(self):
        geom = build_geometry(ARRAY_DIMS, SPACING_UM)
        assert geom.n_atoms == 1000
        for axis in range(3):
            extent = geom.atom_positions[:, axis].max() - geom.atom_positions[:, axis].min()
            assert extent == pytest.approx(9 * SPACING_UM)

    def test_single_site(self):
        geom = build_geometry((1, 1, 1), 0.5)
        assert geom.atom_positions == pytest.approx(np.zeros((1, 3)))

    def test_qubit_height(self):
        geom = build_geometry(ARRAY_DIMS, SPACING_UM, qubit_offset_sites=1.5)
        z_top = geom.atom_positions[:, 2].max()
        assert geom.qubit_position[2] - z_top == pytest.approx(0.555)
        assert geom.qubit_position[:2] == pytest.approx([0.0, 0.0])

    def test_qubit_on_site_rejected(self):
        with pytest.raises(GeometryError):
            build_geometry((1, 1, 1), 0.5, qubit_offset_sites=0.0)


class TestForsterCoupling:
    def test_inverse_cube(self):
        geom1 = build_geometry((1, 1, 1), 1.0, qubit_offset_sites=1.0)
        geom2 = build_geometry((1, 1, 1), 1.0, qubit_offset_sites=2.0)
        model = ForsterModel(C3_TEST)
        v1 = forster_coupling(geom1, model)[0]
        v2 = forster_coupling(geom2, model)[0]
        assert abs(v1) / abs(v2) == pytest.approx(8.0)

    def test_unit_distance_value(self):
        geom = build_geometry((1, 1, 1), 1.0, qubit_offset_sites=1.0)
        v = forster_coupling(geom, ForsterModel(angular(1000)))
        assert abs(v[0]) == pytest.approx(angular(1000))

    def test_equidistant_atoms_equal(self, geometry):
        r = geometry.distances()
        v = np.abs(geometry.v_m)
        order = np.argsort(r)
        r_s, v_s = r[order], v[order]
        same = np.abs(np.diff(r_s)) < 1e-12
        assert np.all(np.abs(np.diff(v_s))[same] < 1e-9 * v_s[:-1][same])

    def test_magnitude_decreasing_with_distance(self, geometry):
        r = geometry.distances()
        v = np.abs(geometry.v_m)
        order = np.argsort(r)
        dv = np.diff(v[order])
        dr = np.diff(r[order])
        assert np.all(dv[dr > 1e-12] < 0)

    def test_angular_factor_table(self):
        geom = build_geometry((1, 1, 1), 1.0, qubit_offset_sites=1.0)
        # the single atom sits straight below the qubit: polar angle pi
        model = ForsterModel(C3_TEST, angular_factors=((0.0, 1.0), (math.pi, 0.25)))
        v = forster_coupling(geom, model)
        assert abs(v[0]) == pytest.approx(0.25 * C3_TEST)

    def test_c3_positive(self):
        with pytest.raises(InvalidInput):
            ForsterModel(0.0)


class TestGateQuantities:
    def test_blockade_shift_value(self):
        p = PhysicalParams(gamma_p=angular(0.01), delta_e=angular(1))
        q = gate_quantities(p, 0.0, np.array([angular(100)]))
        assert q.b_m[0] == pytest.approx(angular(2e6))
        assert q.b_m[0].imag == 0.0

    def test_no_drive(self):
        p = GATE_BASE.replace(omega_rabi=0.0, delta_r=angular(3))
        q = gate_quantities(p, 0.0, np.array([angular(100)]))
        assert q.eta == 0
        assert q.delta_dr == pytest.approx(-angular(3))

    def test_real_dressed_offset_without_linewidth(self):
        p = GATE_BASE.replace(gamma_e=0.0, delta_r=angular(2))
        q = gate_quantities(p, 0.0, np.array([angular(100)]))
        expected = -angular(2) + abs(p.omega_rabi) ** 2 / (4 * p.delta_e)
        assert q.delta_dr == pytest.approx(expected)
        assert q.delta_dr.imag == pytest.approx(0.0, abs=1e-12)

    def test_light_shift_sign(self):
        q = gate_quantities(GATE_BASE, 0.0, np.array([angular(100)]))
        assert q.delta_ac.imag >= 0.0


class TestReflections:
    def test_bare_resonant_cavity(self):
        p = PhysicalParams(kappa=angular(0.5), omega_rabi=angular(100), delta_e=angular(1))
        assert reflection_unblocked(p.replace(g_collective=0.0), 0.0) == -1.0

    def test_fully_blocked_resonant_cavity(self):
        # enormous exchange shift and negligible light shift recover a bare cavity
        p = GATE_BASE.replace(delta_e=angular(1e9))
        v = np.full(1000, angular(1e9))
        r = reflection_blocked_from_couplings(p, 0.0, np.full(1000, p.g_single), v)
        assert r == pytest.approx(-1.0, abs=1e-5)

    def test_far_detuned_transparency(self):
        p = GATE_BASE
        for delta in (1e6 * p.kappa, -1e6 * p.kappa):
            assert reflection_unblocked(p, delta) == pytest.approx(1.0, abs=1e-4)

    def test_far_detuned_rate(self):
        p = GATE_BASE
        d1, d2 = 1e6 * p.kappa, 1e7 * p.kappa
        r1 = abs(reflection_unblocked(p, d1) - 1.0)
        r2 = abs(reflection_unblocked(p, d2) - 1.0)
        assert r1 / r2 == pytest.approx(10.0, rel=0.2)

    def test_high_precision_reevaluation(self, geometry):
        # independent evaluation of the blocked response with 50-digit complex
        # arithmetic, straight from the definitions
        p = auto_two_photon_resonance(GATE_BASE)
        got = reflection_blocked(p, 0.0, geometry)

        mpmath.mp.dps = 50
        om2 = mpmath.mpf(abs(p.omega_rabi)) ** 2
        de = mpmath.mpf(p.delta_e)
        ge = mpmath.mpf(p.gamma_e)
        gr = mpmath.mpf(p.gamma_r)
        gp = mpmath.mpf(p.gamma_p)
        kap = mpmath.mpf(p.kappa)
        dr = mpmath.mpf(p.delta_r)
        g2 = mpmath.mpf(p.g_single) ** 2
        d_ac = -mpmath.mpf(p.g_collective) ** 2 / (de + mpmath.mpc(0, ge / 2))
        eta = om2 / 4 / (mpmath.mpc(0, de) - ge / 2) ** 2
        d_dr = -dr - mpmath.mpc(0, 1) / 4 * om2 / (ge / 2 - mpmath.mpc(0, de))
        total = mpmath.mpc(0)
        for v in np.abs(geometry.v_m):
            b = mpmath.mpf(float(v)) ** 2 / (gp / 2)
            total += g2 / (gr / 2 + mpmath.mpc(0, 1) * d_dr + b)
        den = kap / 2 - mpmath.mpc(0, 1) * d_ac - eta * total
        oracle = complex(1 - kap / den)
        assert got == pytest.approx(oracle, abs=1e-10)

    def test_passivity_on_dense_probe_grid(self, geometry):
        p = auto_two_photon_resonance(GATE_BASE)
        deltas = np.concatenate(
            [np.linspace(-angular(50), angular(50), 401), np.linspace(-angular(2), angular(2), 401)]
        )
        for delta in deltas:
            assert abs(reflection_unblocked(p, float(delta))) <= 1 + 1e-12
            assert abs(reflection_blocked(p, float(delta), geometry)) <= 1 + 1e-12

    def test_singular_response_reported(self):
        p = PhysicalParams(g_collective=angular(1), kappa=0.0, gamma_r=0.0)
        with pytest.raises(SingularResponse) as err:
            reflection_unblocked(p.replace(omega_rabi=angular(1), delta_e=angular(10), delta_r=0.0), 0.0)
        assert err.value.delta == 0.0


class TestFidelity:
    def test_ideal_gate(self):
        assert fidelity(1.0, -1.0) == 1.0

    def test_no_conditional_phase(self):
        assert fidelity(1.0, 1.0) == 0.25

    def test_quadrature_case(self):
        assert fidelity(1.0, 1j) == pytest.approx(10.0 / 16.0)

    def test_rejects_active_reflection(self):
        with pytest.raises(InvalidInput):
            fidelity(1.2, -1.0)

    @given(
        st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
        st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
    )
    @settings(max_examples=100, deadline=None)
    def test_conjugation_invariance(self, r1, r2):
        assert fidelity(r1.conjugate(), r2.conjugate()) == pytest.approx(
            fidelity(r1, r2), rel=1e-12, abs=1e-12
        )


class TestTwoPhotonResonance:
    def test_without_linewidth(self):
        p = GATE_BASE.replace(gamma_e=0.0)
        out = auto_two_photon_resonance(p)
        assert out.delta_r == pytest.approx(abs(p.omega_rabi) ** 2 / (4 * p.delta_e))

    def test_without_drive(self):
        out = auto_two_photon_resonance(GATE_BASE.replace(omega_rabi=0.0))
        assert out.delta_r == 0.0

    def test_refinement_never_hurts(self, geometry):
        analytic = auto_two_photon_resonance(GATE_BASE)
        refined = auto_two_photon_resonance(GATE_BASE, refine=True, geom=geometry)
        f_a = fidelity(
            reflection_unblocked(analytic, 0.0), reflection_blocked(analytic, 0.0, geometry)
        )
        f_r = fidelity(
            reflection_unblocked(refined, 0.0), reflection_blocked(refined, 0.0, geometry)
        )
        assert f_r >= f_a - 1e-12

    def test_zero_offset_dressed_shift(self):
        p = auto_two_photon_resonance(GATE_BASE)
        q = gate_quantities(p, 0.0, np.zeros(1))
        assert q.delta_dr.real == pytest.approx(0.0, abs=1e-9)


class TestBlockadeMonotonicity:
    def test_fidelity_nondecreasing_in_exchange_scale(self, geometry):
        p = auto_two_photon_resonance(GATE_BASE)
        ru = reflection_unblocked(p, 0.0)
        g_m = np.full(geometry.n_atoms, p.g_single)
        prev = -1.0
        for scale in (1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6):
            rb = reflection_blocked_from_couplings(p, 0.0, g_m, geometry.v_m * scale)
            f = fidelity(ru, rb)
            assert f >= prev - 1e-12
            prev = f


class TestIdealLimit:
    def test_fidelity_approaches_unity(self):
        kap = angular(1)
        gamma_e, gamma_r, gamma_p = angular(1), angular(0.01), angular(0.01)
        prev = 0.0
        for k in (1.0, 2.0, 4.0):
            g = angular(30) * k
            g2 = g * g
            delta_e = 1e3 * g2 / kap
            omega = delta_e / 10
            delta = kap / 100
            shift = 1e3 * g2 / kap
            v = math.sqrt(shift * 0.5 * gamma_p)
            p = PhysicalParams(
                omega_rabi=omega,
                g_collective=g,
                g_single=g,
                delta_e=delta_e,
                gamma_e=gamma_e,
                gamma_r=gamma_r,
                gamma_p=gamma_p,
                kappa=kap,
                n_atoms=1,
            )
            p = auto_two_photon_resonance(p)
            # all three ideality ratios at or beyond 1e3
            assert g2 / (delta * kap) >= 1e3
            assert shift * kap / g2 >= 1e3 * 0.999
            assert delta_e * kap / g2 >= 1e3 * 0.999
            f = fidelity(
                reflection_unblocked(p, delta),
                reflection_blocked_from_couplings(p, delta, np.array([g]), np.array([v])),
            )
            assert f > 0.99
            assert f > prev
            prev = f


class TestScan:
    def test_single_point(self, geometry):
        spec = ScanSpec(
            base=GATE_BASE,
            axes=(ScanAxis("g0", (0.5,)),),
            geometry=geometry,
        )
        table = scan(spec)
        assert len(table.rows) == 1
        assert table.rows[0][-1] == "ok"
        assert 0 <= table.rows[0][-2] <= 1

    def test_monotone_coupling_sweep(self, geometry):
        spec = ScanSpec(
            base=GATE_BASE,
            axes=(ScanAxis("g0", tuple(np.linspace(0.05, 0.2, 4))),),
            geometry=geometry,
        )
        fz = scan(spec).column("F_z")
        assert np.all(np.diff(fz) > 0)

    def test_grid_order_and_header(self, geometry, tmp_path):
        spec = ScanSpec(
            base=GATE_BASE,
            axes=(ScanAxis("delta_e", (800.0, 1200.0)), ScanAxis("omega", (60.0, 100.0))),
            geometry=geometry,
        )
        table = scan(spec)
        assert [r[:2] for r in table.rows] == [
            (800.0, 60.0),
            (800.0, 100.0),
            (1200.0, 60.0),
            (1200.0, 100.0),
        ]
        path = tmp_path / "scan.csv"
        table.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == (
            "delta_e,omega,re_R_unblocked,im_R_unblocked,re_R_blocked,im_R_blocked,F_z,status"
        )

    def test_singular_rows_flagged_and_scan_continues(self, geometry):
        # zero linewidths exactly on two-photon resonance: the collective
        # response denominator vanishes at delta = 0
        lossless = GATE_BASE.replace(gamma_e=0.0, gamma_r=0.0)
        base = lossless.replace(delta_r=two_photon_resonance_shift(lossless))
        spec = ScanSpec(
            base=base,
            axes=(ScanAxis("g0", (0.1, 0.2)),),
            geometry=geometry,
            delta_r_mode="fixed",
        )
        table = scan(spec)
        assert len(table.rows) == 2
        assert all(r[-1].startswith("singular:") for r in table.rows)
