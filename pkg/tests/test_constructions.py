import math

import numpy as np
import pytest

from pucci_lab.constructions import (
    ParamsN2,
    ParamsN3,
    ParamsSmallNorm,
    build,
    classify_coefficient,
    g1_annulus,
    instance_from_json,
    params_from_dict,
    reference_g1_measure,
    scale_instance,
    shell_volume,
    unit_sphere_area,
    validate_params,
)
from pucci_lab.pucci import EllipticityPair
from pucci_lab.radial import CoefficientField, InducedCoefficientError, interface_report

E = EllipticityPair(1.0, 2.0)


class TestGeometry:
    def test_sphere_areas(self):
        assert unit_sphere_area(2) == pytest.approx(2 * math.pi, abs=1e-12)
        assert unit_sphere_area(3) == pytest.approx(4 * math.pi, abs=1e-12)

    def test_gamma_plumbing(self):
        assert math.gamma(0.5) == pytest.approx(math.sqrt(math.pi), abs=1e-12)
        for n in range(1, 11):
            assert math.gamma(n) == pytest.approx(math.factorial(n - 1), abs=1e-12)

    def test_ball_volume(self):
        assert shell_volume(3, 0.0, 1.0) == pytest.approx(4 * math.pi / 3)


class TestParams:
    def test_n3_sum_constraint(self):
        with pytest.raises(ValueError, match="c \\+ d"):
            ParamsN3(3, E, 2.0, 0.5, 0.1)
        p = ParamsN3.from_d(3, E, 1.0, 0.25)
        assert (p.c, p.d) == (2.0, 1.0)

    def test_n3_rejects(self):
        with pytest.raises(ValueError):
            ParamsN3.from_d(2, E, 0.5, 0.1)
        with pytest.raises(ValueError):
            ParamsN3.from_d(3, E, 2.0, 0.1)  # d > c
        with pytest.raises(ValueError):
            ParamsN3.from_d(3, E, 1.0, 1.0)

    def test_k_values(self):
        p = ParamsN3.from_d(3, E, 1.0, 0.25)
        assert p.k1 == pytest.approx(192.0)
        assert p.k2 == pytest.approx(-20.0)

    def test_n2_rejects(self):
        with pytest.raises(ValueError):
            ParamsN2(E, 0.5, 1e-3)  # K below log(alpha^2)
        with pytest.raises(ValueError):
            ParamsN2(E, 10.0, 0.1)  # 2 log eps + K >= 0

    def test_small_rbar(self):
        p = ParamsSmallNorm(3, E, 10)
        assert p.rbar == 2.0

    def test_from_dict(self):
        p = params_from_dict("n2", {"lam": 1, "Lam": 2, "K": 10})
        assert p.epsilon == pytest.approx(math.exp(-10))
        with pytest.raises(ValueError):
            params_from_dict("other", {"lam": 1, "Lam": 2})


class TestBuilds:
    @pytest.mark.parametrize("p", [
        ParamsN3.from_d(3, E, 1.0, 0.25),
        ParamsN3.from_d(4, E, 0.5, 0.05),
        ParamsN2(E, 10.0, 1e-3),
        ParamsSmallNorm(3, E, 10),
        ParamsSmallNorm(2, EllipticityPair(1.0, 3.0), 1),
    ])
    def test_continuity_and_boundary(self, p):
        inst = build(p)
        assert interface_report(inst.u).max_relative_gap <= 1e-10
        assert abs(inst.u(np.array(inst.domain_radius))) <= 1e-12

    def test_n3_middle_coefficient(self):
        p = ParamsN3.from_d(3, E, 1.0, 0.25)
        a = build(p).a
        r = np.array([0.3, 0.6, 0.9])
        np.testing.assert_allclose(a(r), 2.0 / r**2, rtol=1e-12)
        np.testing.assert_allclose(a(np.array([1.5])), [0.0], atol=1e-14)

    def test_small_middle_coefficient(self):
        p = ParamsSmallNorm(3, E, 10)
        a = build(p).a
        r = np.array([0.5, 2.0])
        np.testing.assert_allclose(a(r), 2.0 / (10 * r) - 2.0 / 100, rtol=1e-12)

    def test_small_kinks(self):
        rep = interface_report(build(ParamsSmallNorm(3, E, 10)).u)
        kinks = rep.kinks()
        assert [k.kink_class for k in kinks] == ["concave", "concave"]
        assert kinks[0].radius == pytest.approx(2.0 / 11)

    def test_fatal_window(self):
        p = ParamsN3.from_d(3, E, 1.0, 0.6)
        with pytest.raises(InducedCoefficientError) as info:
            build(p)
        assert info.value.radius == pytest.approx(math.sqrt(0.18), rel=1e-9)
        assert validate_params(p).fatal

    def test_json_round_trip(self):
        inst = build(ParamsSmallNorm(3, E, 10))
        back = instance_from_json(inst.to_json())
        assert back.u == inst.u
        r = np.linspace(0.01, 2.9, 50)
        np.testing.assert_array_equal(back.a(r), inst.a(r))

    def test_scale_instance(self):
        inst = build(ParamsSmallNorm(3, E, 10))
        s = scale_instance(inst, 2.0)
        assert s.domain_radius == 2 * inst.domain_radius
        r = np.array([0.5, 1.2, 2.5])
        np.testing.assert_allclose(s.a(2 * r), inst.a(r) / 4, rtol=1e-12)


class TestValidity:
    def test_n3_k2_finding(self):
        rep = validate_params(ParamsN3.from_d(3, E, 1.0, 0.25))
        assert not rep.fatal
        assert rep.checks["k2"] < 0
        assert rep.findings

    def test_n2_misprint_finding(self):
        rep = validate_params(ParamsN2(E, 10.0, 1e-3))
        assert not rep.fatal
        assert any("1/alpha" in f or "third" in f.lower() or "row" in f for f in rep.findings)

    def test_small_clean(self):
        assert not validate_params(ParamsSmallNorm(3, E, 10)).fatal


class TestClassification:
    def test_constants(self):
        assert classify_coefficient(CoefficientField.constant(2.0, 2, 1.0)).cls == "P_g"
        assert classify_coefficient(CoefficientField.constant(0.5, 2, 1.0)).cls == "P_l"

    def test_small_g1(self):
        p = ParamsSmallNorm(3, E, 10)
        rep = classify_coefficient(build(p).a)
        lo, hi = g1_annulus(p)
        assert rep.cls == "neither"
        assert rep.g1_intervals[0][0] == pytest.approx(lo, abs=1e-12)
        assert rep.g1_intervals[0][1] == pytest.approx(hi, abs=1e-12)
        assert rep.g1_measure + rep.l1_measure == pytest.approx(shell_volume(3, 0, 2 * p.rbar), rel=1e-8)
        assert rep.g1_measure / reference_g1_measure(p) == pytest.approx(1 / 3, rel=1e-9)
