import numpy as np
import pytest
from scipy.integrate import quad

from effvel.errors import ConfigError, DensityFloorError
from effvel.grid import Grid
from effvel.operators import gradient_1d
from effvel.state import (
    AugmentedState,
    InitialDataSpec,
    PressureLaw,
    Profile,
    effective_velocity,
    enthalpy_F,
    initial_state,
    mollify_initial_data,
    momentum_from,
    pressure,
    pressure_derivative,
    pressure_potential_Pi,
    velocity_from,
)


def test_pressure_examples():
    one = np.ones(4)
    np.testing.assert_array_equal(pressure(one, PressureLaw(1, 2)), 1.0)
    np.testing.assert_array_equal(pressure_derivative(one, PressureLaw(1, 2)), 2.0)
    np.testing.assert_array_equal(pressure(2 * one, PressureLaw(1, 1)), 2.0)
    np.testing.assert_array_equal(pressure_derivative(2 * one, PressureLaw(1, 1)), 1.0)
    np.testing.assert_array_equal(pressure(3 * one, PressureLaw(0.5, 2)), 4.5)


@pytest.mark.parametrize("fn", [pressure, pressure_derivative, enthalpy_F, pressure_potential_Pi])
def test_nonpositive_density_rejected(fn):
    with pytest.raises(DensityFloorError):
        fn(np.array([1.0, 0.0, 2.0]), PressureLaw())


def test_invalid_laws():
    with pytest.raises(ValueError):
        PressureLaw(a=-1.0)
    with pytest.raises(ValueError):
        PressureLaw(gamma=0.5)


def test_enthalpy_examples():
    assert enthalpy_F(np.array([1.0]), PressureLaw(1, 1))[0] == 0.0
    assert enthalpy_F(np.array([2.0]), PressureLaw(1, 2))[0] == 4.0


def test_enthalpy_gradient_matches_pressure_ratio():
    law = PressureLaw(1.3, 1.4)
    errs = []
    for n in (128, 256, 512):
        g = Grid.line(n, 0.0, 2 * np.pi)
        rho = 1.0 + 0.3 * np.sin(g.x)
        lhs = gradient_1d(enthalpy_F(rho, law), g)
        rhs = pressure_derivative(rho, law) / rho * 0.3 * np.cos(g.x)
        errs.append(np.max(np.abs(lhs - rhs)))
    assert np.all(np.log2(np.array(errs[:-1]) / errs[1:]) >= 1.9)


def _pi_by_quadrature(s, law):
    # Pi(s) = s (int_1^s P(z)/z^2 dz - P(1)), shifted by Pi(1) = -P(1)
    P = lambda z: law.a * z**law.gamma
    integral = quad(lambda z: P(z) / z**2, 1.0, s)[0]
    return s * (integral - P(1.0)) + P(1.0)


@pytest.mark.parametrize("law", [PressureLaw(1, 2), PressureLaw(1, 1), PressureLaw(0.7, 1.4), PressureLaw(2, 3)])
def test_pressure_potential_matches_definition(law):
    rho = np.array([0.5, 1.0, 2.0, 3.0, 5.0])
    expected = [_pi_by_quadrature(s, law) for s in rho]
    np.testing.assert_allclose(pressure_potential_Pi(rho, law), expected, rtol=1e-10, atol=1e-14)


def test_pressure_potential_examples_and_convexity():
    assert pressure_potential_Pi(np.array([3.0]), PressureLaw(1, 2))[0] == 4.0
    assert pressure_potential_Pi(np.array([2.0]), PressureLaw(1, 1))[0] == pytest.approx(0.386294, abs=1e-6)
    for law in (PressureLaw(1, 1), PressureLaw(1, 1.5), PressureLaw(1, 2)):
        vals = pressure_potential_Pi(np.array([0.5, 1.0, 2.0, 5.0]), law)
        assert vals[1] == 0.0
        assert np.all(vals[[0, 2, 3]] > 0.0)


def test_effective_velocity_examples():
    g = Grid.line(512, 0.0, 2 * np.pi)
    x = g.x
    u = np.sin(3 * x)
    np.testing.assert_array_equal(effective_velocity(np.full(512, 2.0), u, 0.5, g), u)
    rho = np.exp(np.sin(x))
    v = effective_velocity(rho, np.zeros(512), 0.5, g)
    assert np.max(np.abs(v - np.cos(x))) < 1e-4
    u = -2 * 0.5 * gradient_1d(rho, g) / rho
    np.testing.assert_allclose(effective_velocity(rho, u, 0.5, g), 0.0, atol=1e-15)


def test_momentum_examples_and_round_trip():
    g = Grid.line(512, 0.0, 2 * np.pi)
    x = g.x
    np.testing.assert_array_equal(momentum_from(np.ones(512), np.zeros(512), 0.5, g), 0.0)
    rho = np.exp(np.sin(x))
    m = momentum_from(rho, np.zeros(512), 0.5, g)
    assert np.max(np.abs(m + np.exp(np.sin(x)) * np.cos(x))) < 1e-3
    errs = []
    for n in (128, 256, 512):
        g = Grid.line(n, 0.0, 2 * np.pi)
        rho = 1.5 + np.cos(g.x)
        u = np.sin(2 * g.x)
        m = momentum_from(rho, effective_velocity(rho, u, 0.4, g), 0.4, g)
        errs.append(np.max(np.abs(m - rho * u)))
    assert max(errs) < 1e-12  # the same stencil on both sides cancels exactly
    v = effective_velocity(rho, velocity_from(rho, momentum_from(rho, u, 0.4, g)), 0.4, g)
    np.testing.assert_allclose(v, u, atol=1e-12)


def test_velocity_from_floor():
    with pytest.raises(DensityFloorError):
        velocity_from(np.array([1.0, 1e-12]), np.zeros(2))


def test_state_is_immutable_and_compatible():
    g = Grid.line(64, 0.0, 1.0)
    s = AugmentedState.from_rho_v(0.0, 1 + 0.1 * np.sin(2 * np.pi * g.x), np.zeros(64), 0.5, g)
    assert s.compatibility_residual() == 0.0
    with pytest.raises(ValueError):
        s.rho[0] = 5.0


def test_profiles():
    g = Grid.line(20, -1.0, 1.0)
    p = Profile.from_dict({"kind": "piecewise", "pieces": [[-1, 0, 2.0], [0, 1, 1.0]]})
    vals = p.evaluate(g)
    assert vals[0] == 2.0 and vals[-1] == 1.0
    assert Profile.from_dict(3.0).evaluate(g)[5] == 3.0
    e = Profile.from_dict({"kind": "expr", "expr": "1 + 0.5*sin(pi*x)"})
    np.testing.assert_allclose(e.evaluate(g), 1 + 0.5 * np.sin(np.pi * g.x))
    assert Profile.from_dict(p.to_dict()) == p
    with pytest.raises(ConfigError):
        Profile.from_dict({"kind": "piecewise", "pieces": [[-1, 0, 2.0], [0.5, 1, 1.0]]}).evaluate(g)
    with pytest.raises(ConfigError):
        Profile.from_dict({"kind": "piecewise", "pieces": [[-0.5, 1, 2.0]]}).evaluate(g)


def test_initial_spec_validation():
    with pytest.raises(ConfigError):
        InitialDataSpec(Profile("constant", value=-1.0), Profile("constant"), 0.5, PressureLaw())
    with pytest.raises(ConfigError):
        InitialDataSpec(Profile("constant", value=1.0), Profile("constant"), 0.5, PressureLaw(), mollify_n=0)


def _spec(density, v0=0.0, n=None, variant="A"):
    return InitialDataSpec(Profile.from_dict(density), Profile.from_dict(v0), 0.5, PressureLaw(),
                           mollify_n=n, variant=variant)


def test_mollify_constant_density():
    g = Grid.line(400, -20.0, 20.0, boundary="farfield")
    n = 4
    sC = mollify_initial_data(_spec(1.0), g, n, "C")
    np.testing.assert_array_equal(sC.rho, 1.0)
    sA = mollify_initial_data(_spec(1.0), g, n, "A")
    inner = np.abs(g.x) <= n
    np.testing.assert_allclose(sA.rho[inner], 1.0 + 1.0 / n, rtol=1e-14)
    assert np.min(sA.rho) >= 1.0 / n


def test_mollify_shock_bounds_and_convergence():
    dens = {"kind": "piecewise", "pieces": [[-20, -1, 1.0], [-1, 1, 2.0], [1, 20, 1.0]]}
    g = Grid.line(2000, -20.0, 20.0)
    rho0 = Profile.from_dict(dens).evaluate(g)
    errs = []
    for n in (2, 4, 8, 16):
        s = mollify_initial_data(_spec(dens, v0=0.3, n=n), g, n, "A")
        assert np.max(s.rho) <= 2.0 + 1.0 / n + 1e-14
        assert np.min(s.rho) >= 1.0 / n
        c = mollify_initial_data(_spec(dens, n=n), g, n, "C")
        assert np.min(c.rho) >= 1.0 - 1e-14
        window = np.abs(g.x) <= n
        errs.append(np.sum(np.abs(c.rho - rho0)[window]) * g.h)
    assert errs[-1] < errs[0] / 4


def test_mollify_radial_variant_b_keeps_axis_zero():
    g = Grid.radial(200, 10.0, 3)
    s = mollify_initial_data(_spec({"kind": "expr", "expr": "1 + exp(-r**2)"}, v0={"kind": "expr", "expr": "r*exp(-r**2)"}, n=3), g, 3, "B")
    assert s.v[0] == 0.0
    assert np.all(s.rho > 0.0)


def test_initial_state_without_mollification():
    g = Grid.radial(16, 2.0, 2)
    s = initial_state(_spec(1.0, v0=1.0), g)
    assert s.v[0] == 0.0 and s.t == 0.0


def test_mollify_rejects_zero_level():
    g = Grid.line(20, 0, 1)
    with pytest.raises(ConfigError):
        mollify_initial_data(_spec(1.0), g, 0)
