import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from motivic.hecke import (
    Q_E, QM1, X_E, DensityFn, GPoly, HeckeElem, ModuleElem, TruncationError, act, annihilates,
    annulus_integral, basis_change_and_inverse, center_membership, check_J_relations, commutator,
    convolve, finite_oracle, four_subspace_check, intertwiner_J, intertwiner_on_e0, module_to_hecke,
    closed_form_G, parse_hecke, q_power, random_element, resolvent_G, symbolic_constants, verify_G,
)

R, T = HeckeElem.R(), HeckeElem.T
e0, f0 = ModuleElem.e0(), ModuleElem.f0()


def bernstein_rhs(a):
    a = F(a)
    corr = HeckeElem.integral(-a, a, QM1) if a > 0 else -HeckeElem.integral(a, -a, QM1)
    return T(-a) * R + corr


# -- presentation ------------------------------------------------------------------

def test_translations_compose():
    assert T(1) * T(-1) == HeckeElem.scalar(1)
    assert T(F(1, 2)) * T(F(1, 3)) == T(F(5, 6))


def test_quadratic_relation():
    assert R * R == R.scale(QM1) + Q_E
    assert str(R * R) == "(q-1)*R + q"
    # (R - q)(R + 1) = 0
    assert ((R - Q_E) * (R + 1)).is_zero()


@pytest.mark.parametrize("a", [2, 1, F(1, 2), F(-1, 2), -1, -2])
def test_bernstein_relation(a):
    assert R * T(a) == bernstein_rhs(a)


def test_bernstein_text():
    assert str(R * T(1)) == "T(-1)*R + (q-1)*int((-1,1])"


def test_negative_side_sign_convention():
    # for a < 0 the correction is minus the density on (a, -a]
    diff = R * T(-1) - T(1) * R
    assert diff == HeckeElem.integral(-1, 1, -QM1)


def test_associativity_corpus():
    rnd = random.Random(11)
    for _ in range(12):
        X, Y, Z = (random_element(rnd, 2) for _ in range(3))
        assert (X * Y) * Z == X * (Y * Z)


# -- density convolution ------------------------------------------------------------

def test_convolution_trivial_cases():
    f = DensityFn.interval(0, 1, Q_E) + DensityFn.point(F(1, 2), 3)
    assert convolve(DensityFn.point(0), f) == f
    assert convolve(DensityFn.point(2), DensityFn.interval(0, 3)) == DensityFn.interval(2, 5)


def test_indicator_self_convolution():
    c = convolve(DensityFn.interval(0, 1), DensityFn.interval(0, 1))
    # tent in the formal length: g - 1 on (0,1], 2x + 1 - g on (1,2]
    assert c.value(1) == X_E - 1
    assert (c.value(2) - 1).is_zero()
    assert repr(c) == "DensityFn(int((0,1], g-1) + int((1,2], -g+2*x+1))"


def _grid_density(rnd, m):
    d = DensityFn()
    for _ in range(rnd.randint(1, 3)):
        lo = F(rnd.randint(-2 * m, 2 * m), m)
        hi = lo + F(rnd.randint(1, 2 * m), m)
        d = d + DensityFn.interval(lo, hi, rnd.choice([1, 2, Q_E, QM1]))
    if rnd.random() < 0.5:
        lo = F(rnd.randint(-m, m), m)
        d = d + DensityFn.piece(lo, lo + 1, GPoly.linear(1, rnd.randint(-2, 2)))
    if rnd.random() < 0.5:
        d = d + DensityFn.point(F(rnd.randint(-m, m), m), rnd.choice([1, -1, Q_E]))
    return d


@pytest.mark.parametrize("m", range(1, 7))
def test_convolution_discrete_shadow(m):
    """x -> m with supports on (1/m)Z turns convolution into sequence convolution."""
    rnd = random.Random(100 + m)
    for _ in range(3):
        f, h = _grid_density(rnd, m), _grid_density(rnd, m)
        c = convolve(f, h)
        sf = {n: f.value(F(n, m)).at(x=m, q=3) for n in range(-6 * m, 6 * m + 1)}
        sh = {n: h.value(F(n, m)).at(x=m, q=3) for n in range(-6 * m, 6 * m + 1)}
        for n in range(-9 * m, 9 * m + 1):
            want = sum(v * sh.get(n - a, 0) for a, v in sf.items())
            assert c.value(F(n, m)).at(x=m, q=3) == want


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_convolution_commutative_associative(seed):
    rnd = random.Random(seed)
    f, g, h = (_grid_density(rnd, 2) for _ in range(3))
    assert convolve(f, g) == convolve(g, f)
    assert convolve(convolve(f, g), h) == convolve(f, convolve(g, h))


# -- module action ------------------------------------------------------------------

def test_action_table():
    assert act(e0, R) == f0
    assert act(f0, R) == e0.scale(Q_E) + f0.scale(QM1)
    assert act(e0, T(2)) == ModuleElem(DensityFn.point(2))
    assert act(f0, T(2)) == ModuleElem(None, DensityFn.point(-2))


def test_quadratic_relation_on_module():
    want = e0.scale(Q_E) + f0.scale(QM1)
    assert act(act(e0, R), R) == want
    assert act(e0, R.scale(QM1) + Q_E) == want


def test_action_respects_products():
    rnd = random.Random(3)
    for _ in range(10):
        X, Y = random_element(rnd, 2), random_element(rnd, 2)
        assert act(act(e0, X), Y) == act(e0, X * Y)


def test_faithfulness_route():
    rnd = random.Random(4)
    for _ in range(10):
        X, Y = random_element(rnd, 2), random_element(rnd, 2)
        assert module_to_hecke(act(e0, X * Y)) == X * Y


def test_basis_change_images():
    images, G = basis_change_and_inverse()
    # e_0 R_{-1} = e_{-1} + ((q-1)/q) f on (-1, 1]
    want = ModuleElem(DensityFn.point(-1), DensityFn.interval(-1, 1, QM1 / Q_E))
    assert images("R", -1) == want
    assert images("R-", 0) == f0
    assert G.at(-1) == closed_form_G().at(-1)


# -- intertwiner ---------------------------------------------------------------------

def test_J_relations():
    b = F(1, 3)
    assert check_J_relations([(a, b) for a in (1, -1, F(1, 2), F(-1, 2))])


def test_J_needs_positive_b():
    with pytest.raises(ValueError):
        intertwiner_J(0)


def test_intertwiner_on_e0_matches_truncated_expansion():
    lhs, rhs = intertwiner_on_e0(F(1, 3), 5)
    assert lhs == rhs


@pytest.mark.parametrize("c", [0, 1, F(-1, 2), 3])
def test_one_minus_Tb_does_not_annihilate(c):
    assert not annihilates(F(1, 3), T(c))
    assert not annihilates(F(1, 3), R * T(c) + HeckeElem.integral(c, c + 1))


# -- center --------------------------------------------------------------------------

def test_center_examples():
    assert center_membership(T(1) + T(-1))
    assert center_membership(HeckeElem.scalar(1))
    assert not center_membership(T(1))
    assert not commutator(R, T(1)).is_zero()


def test_symmetric_density_is_central():
    Z = HeckeElem.integral(-2, 2, Q_E, lo_closed=True) + T(F(1, 2)) + T(F(-1, 2))
    assert center_membership(Z)
    # the half-open interval reflects to [-2, 2), so it is not of symmetric form
    assert not center_membership(HeckeElem.integral(-2, 2, Q_E))


def test_four_subspace_decomposition():
    rnd = random.Random(9)
    for _ in range(6):
        assert four_subspace_check(random_element(rnd, 2), rnd.choice([1, F(1, 2), 2]))


# -- inverse kernel --------------------------------------------------------------------

@pytest.mark.parametrize("z", [-3, -1, F(-1, 2)])
def test_resolvent_solves_kernel_equation(z):
    assert verify_G(z, resolvent_G()).is_zero()


def test_resolvent_closed_form():
    # ((q-1)/(q+1)) (q^-z - q^z)
    G = resolvent_G()
    for z in (-2, F(-1, 3)):
        want = QM1 / (Q_E + 1) * (q_power(-z) - q_power(z))
        assert G.at(z) == want


def test_verify_G_rejects_nonnegative_z():
    with pytest.raises(ValueError):
        verify_G(0)


def test_annulus_displays():
    # int_{x in (z,0)} O_o^{z-x} [x,0)  and its mirror, at a sample z
    z = F(-2)
    iz = X_E * z
    qq = (QM1 * QM1)
    first = iz * Q_E / QM1 - Q_E / qq + Q_E * q_power(-z) / qq
    assert annulus_integral(1, None).at(z) == first
    second = -iz / QM1 - Q_E / qq + Q_E * q_power(z) / qq
    assert annulus_integral(-1, None).at(z) == second


def test_annulus_shadow_at_integer_points():
    # at x = 1 (counting measure on Z) the integral is a finite geometric sum
    for z in (-1, -2, -3):
        for sign in (1, -1):
            got = annulus_integral(sign, None).at(z).at(x=1, q=3)
            want = sum(F(3) ** (-sign * (z - w)) * (-w) for w in range(z + 1, 0))
            assert got == want


# -- finite oracle ---------------------------------------------------------------------

@pytest.mark.parametrize("q0", [2, 3])
def test_oracle_matches_table(q0):
    got = finite_oracle(q0, 3, -1)
    want = {k: v.at(q=q0) for k, v in symbolic_constants(-1).items()}
    assert got == want


def test_oracle_q2_values():
    got = finite_oracle(2, 3, -1)
    assert got["e0.R_-1:f_0"] == F(1, 2)
    assert got["e0.R_-1:e_-1"] == 1
    assert (got["f0.R:e_0"], got["f0.R:f_0"]) == (2, 1)


def test_oracle_preconditions():
    with pytest.raises(TruncationError):
        finite_oracle(2, 2, -1)
    with pytest.raises(ValueError):
        finite_oracle(5, 3, -1)
    with pytest.raises(ValueError):
        finite_oracle(2, 3, 1)


# -- parser --------------------------------------------------------------------------

def test_parse_hecke():
    assert parse_hecke("R*R") == R.scale(QM1) + Q_E
    assert str(parse_hecke("T(1)*T(-1)")) == "1"
    assert parse_hecke("R*T(1) - T(-1)*R") == HeckeElem.integral(-1, 1, QM1)
    assert parse_hecke("int([0,1))") == HeckeElem.integral(0, 1, 1, True, False)
    assert parse_hecke("(q-1)*R^2") == (R * R).scale(QM1)


@pytest.mark.parametrize("text", ["T(", "R R", "int((0,1]", "T(1)^x"])
def test_parse_hecke_errors(text):
    with pytest.raises(ValueError):
        parse_hecke(text)
