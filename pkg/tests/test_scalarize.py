import numpy as np
import pytest

from fuchsreduce import catalog, expr as fe, scalarize, verify
from fuchsreduce.catalog import LaxPair
from fuchsreduce.expr import Binding, T, X

LAX_IDS = ["PII.y0", "PII.y_inv_t", "PIII.y1", "PIV.y_m2t", "PIV.y_m2t3",
           "PV.y_lin", "PV.y_m1"]


def hand_frobenius_pii(x, t, y_const):
    """Independent oracle: assemble dA/dt - dB/dx + [A, B] with plain numpy
    from the hand-substituted second-family matrices (y constant, z = -t/2,
    u = 1, theta = 1/2)."""
    y = y_const
    A = np.array([[x**2, x - y], [t * x - 1 + y * t, -(x**2)]], dtype=complex)
    At = np.array([[0.0, 0.0], [x + y, 0.0]], dtype=complex)
    B = np.array([[x / 2, 0.5], [t / 2, -x / 2]], dtype=complex)
    Bx = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
    R = At - Bx + A @ B - B @ A
    return float(np.max(np.abs(R)))


def zero_lax():
    z = fe.const(0)
    grid = ((z, z), (z, z))
    return LaxPair(grid, grid)


class TestFrobenius:
    def test_zero_system(self):
        assert scalarize.frobenius_residual(zero_lax(), 0.3, 1.2) == 0.0

    def test_pii_y0_matches_hand_assembly(self):
        lp, _ = catalog.instantiate("PII.y0")
        got = scalarize.frobenius_residual(lp, 1.3, 0.7)
        oracle = hand_frobenius_pii(1.3, 0.7, y_const=0.0)
        assert got == pytest.approx(oracle, abs=1e-13)
        assert got <= 1e-12

    def test_negative_control_fails(self):
        lp, _ = catalog.instantiate("negative.PII_bad_y1")
        got = scalarize.frobenius_residual(lp, 1.3, 0.7)
        oracle = hand_frobenius_pii(1.3, 0.7, y_const=1.0)
        assert got == pytest.approx(oracle, rel=1e-10)
        assert got >= 1e-2

    @pytest.mark.parametrize("entry_id", LAX_IDS)
    def test_probe_grid_25_points(self, entry_id):
        entry = catalog.lookup(entry_id)
        worst = scalarize.frobenius_residual_grid(entry.lax, entry.grid_points(5))
        assert worst <= 1e-10


class TestScalarCoefficients:
    def test_pii_y0_closed_forms(self):
        lp, entry = catalog.instantiate("PII.y0")
        sp = scalarize.scalar_coefficients(lp, "first", probes=entry.probe_bindings())
        for x, t in ((1.4, 0.6), (2.2 + 0.1j, 1.1 - 0.1j)):
            b = Binding(x=x, t=t, params=entry.params)
            assert fe.evaluate(sp.p1, b) == pytest.approx(-1 / x)
            assert fe.evaluate(sp.q1, b) == pytest.approx(-(x**2) * (x**2 + t))
            assert fe.evaluate(sp.p2, b) == pytest.approx(2 * x)
            assert abs(fe.evaluate(sp.q2, b)) <= 1e-13

    def test_piv_q2(self):
        lp, entry = catalog.instantiate("PIV.y_m2t")
        sp = scalarize.scalar_coefficients(lp, "first")
        b = Binding(x=1.7, t=0.8, params=entry.params)
        assert fe.evaluate(sp.q2, b) == pytest.approx(-1 / (2 * 1.7))

    def test_piii_displayed_equation(self):
        # The full second-order equation at theta_inf = 5/2.
        lp, entry = catalog.instantiate("PIII.y1")
        sp = scalarize.scalar_coefficients(lp, "first")
        thi = 2.5
        for x, t in ((1.7 + 0.1j, 0.9 - 0.05j), (2.3, 1.2)):
            b = Binding(x=x, t=t, params=entry.params)
            assert fe.evaluate(sp.p1, b) == pytest.approx(2 / x - 1 / (x + 1), rel=1e-10)
            q1_disp = (-t**2 / 4 + 1 / (4 * (x + 1))
                       + (2 * t * (thi - 1) - 1) / (4 * x)
                       + (8 * t**2 + 16 * (thi - 1) * t + 3) / (16 * x**2)
                       + (thi - 1) * t / (2 * x**3) - t**2 / (4 * x**4))
            assert fe.evaluate(sp.q1, b) == pytest.approx(q1_disp, rel=1e-10)
            assert fe.evaluate(sp.p2, b) == pytest.approx(
                t * (x + 1) / (x * (x - 1)), rel=1e-10)
            q2_disp = ((thi - 1) / (2 * x) - (2 * thi - 1) / (2 * (x - 1))
                       - t * (x + 1) / (x * (x - 1)))
            assert fe.evaluate(sp.q2, b) == pytest.approx(q2_disp, rel=1e-10)

    def test_piv_m2t3_displayed_equation(self):
        lp, entry = catalog.instantiate("PIV.y_m2t3")
        sp = scalarize.scalar_coefficients(lp, "first")
        x, t = 1.6 + 0.08j, 1.05 - 0.04j
        b = Binding(x=x, t=t, params=entry.params)
        assert fe.evaluate(sp.p1, b) == pytest.approx(t / (x * (3 * x + t)), rel=1e-10)
        q1_disp = -(7 / (36 * x**2) - t / (6 * x**2 * (3 * x + t))
                    + (3 * x + t) ** 2 * (3 * x + 4 * t) / (27 * x))
        assert fe.evaluate(sp.q1, b) == pytest.approx(q1_disp, rel=1e-10)
        q2_disp = -1 / (6 * x) + (2 * t / 3) * (1 + t / (3 * x))
        assert fe.evaluate(sp.q2, b) == pytest.approx(q2_disp, rel=1e-10)

    def test_pv_lin_displayed_equation(self):
        lp, entry = catalog.instantiate("PV.y_lin")
        sp = scalarize.scalar_coefficients(lp, "first")
        th1 = 3.0
        x, t = 1.8 - 0.06j, 0.8 + 0.03j
        b = Binding(x=x, t=t, params=entry.params)
        assert fe.evaluate(sp.p1, b) == pytest.approx(1 / (x - 1), rel=1e-10)
        q1_disp = -(t**2 / 4 + t * (th1 - 1) / (2 * (x - 1)) + th1**2 / (4 * (x - 1) ** 2))
        assert fe.evaluate(sp.q1, b) == pytest.approx(q1_disp, rel=1e-10)
        assert fe.evaluate(sp.p2, b) == pytest.approx(t / (x - 1), rel=1e-10)
        q2_disp = -((2 - th1) / (2 * (x - 1)) + t / (2 * (x - 1)))
        assert fe.evaluate(sp.q2, b) == pytest.approx(q2_disp, rel=1e-10)

    def test_second_component_mirrors_first(self):
        # The second-component scalar pair of the 1/t solution coincides
        # with the first-component pair of the flat solution.
        lp0, e0 = catalog.instantiate("PII.y0")
        lp1, e1 = catalog.instantiate("PII.y_inv_t")
        sp0 = scalarize.scalar_coefficients(lp0, "first")
        sp1 = scalarize.scalar_coefficients(lp1, "second")
        for x, t in ((1.5, 0.8), (2.1 + 0.1j, 1.2 - 0.1j)):
            b0 = Binding(x=x, t=t, params=e0.params)
            b1 = Binding(x=x, t=t, params=e1.params)
            for name in ("p1", "q1", "p2", "q2"):
                v0 = fe.evaluate(getattr(sp0, name), b0)
                v1 = fe.evaluate(getattr(sp1, name), b1)
                assert v1 == pytest.approx(v0, rel=1e-12, abs=1e-12), name

    def test_constant_offdiagonal_gives_zero_p1(self):
        one = fe.const(1)
        zero = fe.const(0)
        lp = LaxPair(((X, one), (X * T, fe.neg(X))),
                     ((zero, one), (zero, zero)))
        sp = scalarize.scalar_coefficients(lp, "first")
        b = Binding(x=1.3, t=0.4)
        assert fe.evaluate(sp.p1, b) == 0

    def test_vanishing_offdiagonal_rejected(self):
        probes = [Binding(x=1.0 + 0.2 * k, t=0.5) for k in range(8)]
        with pytest.raises(scalarize.VanishingOffDiagonalError):
            scalarize.scalar_coefficients(zero_lax(), "first", probes=probes)

    @pytest.mark.parametrize("entry_id", LAX_IDS)
    def test_q2_integrability_identity(self, entry_id):
        # q2 must also equal the half-difference form forced by the
        # integrability condition on the off-diagonal entries.
        entry = catalog.lookup(entry_id)
        sp = scalarize.scalar_coefficients(entry.lax, entry.component)
        aoff, boff = sp.off_diag
        core = sp.q2_decomposable()
        if entry.component == "first":
            alt = (fe.differentiate(boff, "x") / boff
                   - fe.differentiate(aoff, "t") / boff) / 2
        else:
            alt = (fe.differentiate(aoff, "t") / boff
                   - fe.differentiate(boff, "x") / boff) / 2
        for b in entry.probe_bindings(9):
            v1 = fe.evaluate(core, b)
            v2 = fe.evaluate(alt, b)
            assert abs(v1 - v2) <= 1e-9 * (1 + abs(v2))


class TestScalarResidual:
    def test_zero_system_constant_solution(self):
        zero = fe.const(0)
        sp = scalarize.ScalarPair(p1=zero, q1=zero, p2=fe.const(1), q2=zero)
        r = scalarize.scalar_residual(sp, lambda x, t: 1.0 + 0j, 1.0, 1.0)
        assert r == 0.0

    @pytest.mark.parametrize("entry_id,x,t", [
        ("PII.y0", 1.5, 0.5),
        ("PII.y_inv_t", 1.5, 0.8),
        ("PIII.y1", 2.0, 0.9),
        ("PIV.y_m2t", 1.4, 0.9),
        ("PIV.y_m2t3", 1.4, 1.1),
        ("PV.y_lin", 2.0, 0.9),
        ("PV.y_m1", 1.8, 0.9),
    ])
    def test_joint_solution_satisfies_both_equations(self, prep, entry_id, x, t):
        p = prep(entry_id)
        phi = verify.joint_solution(p, p.entry.basepoint_x, t)
        assert scalarize.scalar_residual(p.sp, phi, x, t) <= 1e-7

    @pytest.mark.parametrize("entry_id", LAX_IDS)
    def test_p2_is_offdiagonal_ratio(self, entry_id):
        entry = catalog.lookup(entry_id)
        sp = scalarize.scalar_coefficients(entry.lax, entry.component)
        aoff, boff = sp.off_diag
        for b in entry.probe_bindings(10):
            ratio = fe.evaluate(aoff, b) / fe.evaluate(boff, b)
            got = fe.evaluate(sp.p2, b)
            assert abs(got - ratio) <= 1e-10 * (1 + abs(ratio))
