import dataclasses
import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from goodbsq.dynamics import nonlinearity_N
from goodbsq.normal_form import (
    SignTriple,
    _exact_symbol,
    apply_T,
    assemble_h,
    err_term,
    free_minus,
    free_plus,
    gauged_h_and_err,
    resonance_denominator,
    symbol_value,
)
from goodbsq.spectral_core import (
    DomainError,
    ModelParams,
    SpectralField,
    bracket,
    mu,
)

from conftest import random_complex, smooth_field

ALL_SIGNS = list(itertools.product((1, -1), repeat=3))


# -- oracles -----------------------------------------------------------------------

def test_resonance_examples():
    assert resonance_denominator(1, 1, (1, 1, 1)) == pytest.approx(
        2 * math.sqrt(2) - 2 * math.sqrt(5), abs=1e-14)
    assert resonance_denominator(1, 1, (1, 1, 1)) == pytest.approx(-1.6437, abs=1e-4)
    d = resonance_denominator(3, -2, (1, 1, -1))
    assert d == pytest.approx(3 * math.sqrt(10) - 2 * math.sqrt(5) - math.sqrt(2), abs=1e-14)
    assert d == pytest.approx(3.6005, abs=1e-4)


@given(xi=st.integers(-300, 300), eta=st.integers(-300, 300), signs=st.sampled_from(ALL_SIGNS))
def test_resonance_symmetric(xi, eta, signs):
    s = SignTriple(*signs)
    if xi * eta * (xi + eta) == 0:
        return
    swapped = SignTriple(s.eps, s.eps2, s.eps1)
    assert resonance_denominator(xi, eta, s) == resonance_denominator(eta, xi, swapped)


def test_resonant_inputs_rejected():
    for xi, eta in ((0, 3), (2, 0), (1, -1)):
        with pytest.raises(DomainError):
            resonance_denominator(xi, eta, (1, 1, 1))
        with pytest.raises(DomainError):
            symbol_value(xi, eta, "exact", (1, 1, 1), 0.25)


def test_sign_triple_validation():
    with pytest.raises(ValueError):
        SignTriple(1, 0, 1)


def test_apply_T_examples():
    N = 3
    u = SpectralField.from_modes(N, {1: 1.0})
    v = SpectralField.from_modes(N, {-1: 1.0})
    assert np.all(apply_T(u, v, (1, 1, 1), 0.2).coeffs == 0)

    u = SpectralField.from_modes(N, {3: 1.0})
    v = SpectralField.from_modes(N, {-2: 1.0})
    out = apply_T(u, v, (1, 1, -1), 0.0)
    expect = -0.5 / (math.sqrt(2) * resonance_denominator(3, -2, (1, 1, -1)))
    assert out.mode(1) == pytest.approx(expect, abs=1e-15)
    assert np.count_nonzero(out.coeffs) == 1
    assert out.mode(1).real == pytest.approx(-0.09820, abs=1e-5)


def test_apply_T_matches_double_sum():
    N, alpha, s = 6, 0.3, SignTriple(1, 1, -1)
    u, v = random_complex(N, 1), random_complex(N, 2)
    ref = np.zeros(2 * N + 1, complex)
    for xi in range(-N, N + 1):
        for eta in range(-N, N + 1):
            k = xi + eta
            if xi * eta * k == 0 or abs(k) > N:
                continue
            sig = -0.5 * abs(k) * bracket(xi) ** alpha * bracket(eta) ** alpha / (
                bracket(k) ** (1 + alpha) * resonance_denominator(xi, eta, s))
            ref[k + N] += sig * u.mode(xi) * v.mode(eta)
    out = apply_T(u, v, s, alpha).coeffs
    assert np.allclose(out, ref, rtol=0, atol=1e-14)
    assert out[N] == 0


@given(seed=st.integers(0, 2 ** 31), signs=st.sampled_from(ALL_SIGNS), c=st.complex_numbers(max_magnitude=10))
def test_apply_T_bilinear(seed, signs, c):
    N = 8
    u, u2, v = random_complex(N, seed), random_complex(N, seed + 1), random_complex(N, seed + 2)
    lhs = apply_T(u * c + u2, v, signs, 0.25).coeffs
    rhs = c * apply_T(u, v, signs, 0.25).coeffs + apply_T(u2, v, signs, 0.25).coeffs
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)
    assert np.allclose(apply_T(u * 2.0, v, signs, 0.25).coeffs,
                       2 * apply_T(u, v, signs, 0.25).coeffs, rtol=0, atol=1e-14)


def test_symbol_value_examples():
    assert symbol_value(1, 1, "asym_pp", (1, 1, 1), 0.0) == pytest.approx(0.5, abs=1e-15)
    r = symbol_value(10, 10, "exact", (1, 1, 1), 0.25) / symbol_value(10, 10, "asym_pp", (1, 1, 1), 0.25)
    assert 1 / 16 <= r <= 16
    with pytest.raises(ValueError):
        symbol_value(1, 2, "nope", (1, 1, 1), 0.0)


def test_non_resonance_floor():
    K = 512
    x = np.arange(-K, K + 1)[:, None]
    y = np.arange(-K, K + 1)[None, :]
    ok = (x != 0) & (y != 0) & (x + y != 0) & (np.abs(x + y) <= K)
    floor = np.inf
    for e, e1, e2 in ALL_SIGNS:
        d = e1 * mu(x) + e2 * mu(y) - e * mu(x + y)
        floor = min(floor, float(np.abs(d[ok]).min()))
    assert floor >= 0.5
    # attained at (1, 1) with signs (+; +, +)
    assert floor == pytest.approx(2 * math.sqrt(5) - 2 * math.sqrt(2), rel=1e-12)


# exact symbol for eps = +1 against the size model of the matching sign pair
VARIANT_SIGNS = {"asym_mm": (1, -1, -1), "asym_pp": (1, 1, 1), "asym_pm": (1, 1, -1)}


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.375])
@pytest.mark.parametrize("variant", sorted(VARIANT_SIGNS))
def test_symbol_comparability(variant, alpha):
    K = 512
    x = np.arange(-K, K + 1)[:, None].astype(float)
    y = np.arange(-K, K + 1)[None, :].astype(float)
    k = x + y
    ok = (x != 0) & (y != 0) & (k != 0) & (np.abs(k) <= K)
    bx, by, bk = bracket(x), bracket(y), bracket(k)
    with np.errstate(divide="ignore", invalid="ignore"):
        ex = np.abs(_exact_symbol(x, y, SignTriple(*VARIANT_SIGNS[variant]), alpha))
        if variant == "asym_mm":
            size = bx ** alpha * by ** alpha / (bk ** alpha * np.maximum(x * x, y * y))
        elif variant == "asym_pp":
            size = 1 / (bk ** alpha * bx ** (1 - alpha) * by ** (1 - alpha))
        else:
            size = bx ** alpha / (bk ** (alpha + 1) * by ** (1 - alpha))
    ratio = (ex / size)[ok]
    C = max(ratio.max(), 1 / ratio.min())
    assert C <= 32
    # spot check the scalar path against the sweep
    assert symbol_value(7, -3, variant, VARIANT_SIGNS[variant], alpha) == pytest.approx(
        size[K + 7, K - 3], rel=1e-13)


# -- h and Err -------------------------------------------------------------------------

def test_h_gauge_trivial_cases():
    N = 16
    f, g = smooth_field(N, 1), smooth_field(N, 2)
    p0 = ModelParams(alpha=0.25, trunc=N)
    p1 = ModelParams(alpha=0.25, trunc=N, A0=0.7, A1=-0.4)
    for eps in (1, -1):
        plain = assemble_h(f, g, 0.3, eps, p0, gauged=False).coeffs
        assert np.array_equal(assemble_h(f, g, 0.3, eps, p0, gauged=True).coeffs, plain)
        a = assemble_h(f, g, 0.0, eps, p1, gauged=True).coeffs
        b = assemble_h(f, g, 0.0, eps, p1, gauged=False).coeffs
        assert np.allclose(a, b, rtol=0, atol=1e-15)


def test_h_six_term_hand_sum():
    N = 4
    f = SpectralField.from_modes(N, {1: 0.5, -1: 0.5})
    g = SpectralField.zeros(N)
    h = assemble_h(f, g, 0.0, 1, ModelParams(alpha=0.0, trunc=N))
    expect = np.zeros(2 * N + 1, complex)
    # L = Lbar = cos(x)/2 at t = 0, modes +-1 with weight 1/4
    for c, signs in ((1, (1, 1, 1)), (2, (1, 1, -1)), (1, (1, -1, -1))):
        for xi in (1, -1):
            k = 2 * xi
            sig = -0.5 * abs(k) / (bracket(k) * resonance_denominator(xi, xi, signs))
            expect[k + N] += c * sig * 0.25 * 0.25
    assert np.allclose(h.coeffs, expect, rtol=0, atol=1e-15)


def test_h_requires_mean_zero():
    N = 4
    f = SpectralField.from_modes(N, {0: 1.0})
    with pytest.raises(DomainError):
        assemble_h(f, SpectralField.zeros(N), 0.0, 1, ModelParams(alpha=0.1, trunc=N))


def test_err_zero_without_mean():
    N = 16
    f, g = smooth_field(N, 3), smooth_field(N, 4)
    e = err_term(f, g, 0.4, 1, ModelParams(alpha=0.2, trunc=N))
    assert np.all(e.coeffs == 0)


def test_err_quadratic_in_data():
    N = 16
    f, g = smooth_field(N, 3), smooth_field(N, 4)
    p = ModelParams(alpha=0.2, trunc=N, A0=0.5, A1=0.3)
    e1 = err_term(f, g, 0.4, 1, p).coeffs
    e2 = err_term(f * 2.0, g * 2.0, 0.4, 1, p).coeffs
    assert np.allclose(e2, 4 * e1, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("eps", [1, -1])
def test_err_is_gauge_time_derivative(eps):
    """Err is d/dtau of the gauged h with the gauge frozen at tau and the free flow at t.

    With A1 = 0 the gauge at time tau equals the gauge at time t with
    A0 replaced by A0 * tau / t, so the derivative is a difference in A0.
    """
    N, t, A0 = 16, 0.3, 0.8
    f, g = smooth_field(N, 5), smooth_field(N, 6)
    p = ModelParams(alpha=0.25, trunc=N, A0=A0)

    def H(tau):
        return assemble_h(f, g, t, eps, dataclasses.replace(p, A0=A0 * tau / t), gauged=True).coeffs

    target = err_term(f, g, t, eps, p).coeffs
    errs = []
    for d in (1e-3, 5e-4):
        fd = (H(t + d) - H(t - d)) / (2 * d)
        errs.append(np.linalg.norm(fd - target))
    assert errs[1] < 1e-6 * np.linalg.norm(target)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_normal_form_identity():
    N, alpha, t = 32, 0.25, 0.3
    f, g = smooth_field(N, 1), smooth_field(N, 2)
    p = ModelParams(alpha=alpha, trunc=N)
    L, Lb = free_plus(f, g, t), free_minus(f, g, t)
    Q = (nonlinearity_N(L, L, alpha) + nonlinearity_N(L, Lb, alpha) * 2.0
         + nonlinearity_N(Lb, Lb, alpha)).coeffs
    m = mu(f.n)
    for eps in (1, -1):
        errs = []
        for dt in (2e-4, 1e-4):
            dh = (assemble_h(f, g, t + dt, eps, p).coeffs - assemble_h(f, g, t - dt, eps, p).coeffs) / (2 * dt)
            resid = dh - 1j * eps * m * assemble_h(f, g, t, eps, p).coeffs - 0.5j * Q
            errs.append(np.linalg.norm(resid))
        assert errs[1] < 1e-4 * np.linalg.norm(Q)
        assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_h_and_err_share_evaluations():
    N = 12
    f, g = smooth_field(N, 7), smooth_field(N, 8)
    p = ModelParams(alpha=0.3, trunc=N, A0=0.2, A1=0.5)
    h, e = gauged_h_and_err(f, g, 0.2, -1, p)
    assert np.array_equal(h.coeffs, assemble_h(f, g, 0.2, -1, p, gauged=True).coeffs)
    assert np.array_equal(e.coeffs, err_term(f, g, 0.2, -1, p).coeffs)
