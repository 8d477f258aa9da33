"""Bilinear normal-form operator ``T^{eps; eps1, eps2}`` and the correction ``h^eps``.

``T`` is a direct double sum over frequency pairs.  Its symbol does not
factor, so it is tabulated once per ``(N, alpha, signs)`` as a matrix indexed
by (input frequency ``xi``, output frequency ``k = xi + eta``) and contracted
against ``u`` and a sliding window of ``v``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .spectral_core import (
    DomainError,
    ModelParams,
    SpectralField,
    TruncationMismatch,
    bracket,
    gauge_symbol,
    mu,
    p_symbol,
)

__all__ = [
    "SignTriple",
    "SYMBOL_VARIANTS",
    "resonance_denominator",
    "symbol_value",
    "symbol_matrix",
    "apply_T",
    "free_plus",
    "free_minus",
    "assemble_h",
    "err_term",
    "gauged_h_and_err",
]

SYMBOL_VARIANTS = ("exact", "asym_mm", "asym_pp", "asym_pm")

# rows of xi processed per block in apply_T
_BLOCK = 512


@dataclass(frozen=True)
class SignTriple:
    eps: int
    eps1: int
    eps2: int

    def __post_init__(self):
        for name in ("eps", "eps1", "eps2"):
            if getattr(self, name) not in (1, -1):
                raise ValueError(f"{name} must be +1 or -1, got {getattr(self, name)}")

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.eps, self.eps1, self.eps2)


def _signs(signs) -> SignTriple:
    return signs if isinstance(signs, SignTriple) else SignTriple(*signs)


def _resonance(xi, eta, s: SignTriple):
    return s.eps1 * mu(xi) + s.eps2 * mu(eta) - s.eps * mu(np.asarray(xi) + np.asarray(eta))


def resonance_denominator(xi: int, eta: int, signs) -> float:
    """``eps1 |xi|<xi> + eps2 |eta|<eta> - eps |xi+eta|<xi+eta>``."""
    s = _signs(signs)
    if xi * eta * (xi + eta) == 0:
        raise DomainError(f"resonant pair (xi, eta) = ({xi}, {eta})")
    d = float(_resonance(xi, eta, s))
    if d == 0.0:
        raise DomainError(f"vanishing denominator at ({xi}, {eta})")
    return d


def _exact_symbol(xi, eta, s: SignTriple, alpha: float):
    xi = np.asarray(xi, float)
    eta = np.asarray(eta, float)
    k = xi + eta
    num = np.abs(k) * bracket(xi) ** alpha * bracket(eta) ** alpha
    return -0.5 * num / (bracket(k) ** (1.0 + alpha) * _resonance(xi, eta, s))


def symbol_value(xi: int, eta: int, variant: str, signs, alpha: float) -> float:
    """Magnitude of the T symbol, or one of its size models.

    ``asym_mm``, ``asym_pp`` and ``asym_pm`` are the size models for the sign
    pairs ``(-,-)``, ``(+,+)`` and ``(+,-)``; they ignore ``signs``.
    """
    if xi * eta * (xi + eta) == 0:
        raise DomainError(f"resonant pair (xi, eta) = ({xi}, {eta})")
    bx, be, bk = bracket(xi), bracket(eta), bracket(xi + eta)
    if variant == "exact":
        return float(abs(_exact_symbol(xi, eta, _signs(signs), alpha)))
    if variant == "asym_mm":
        return float(bx**alpha * be**alpha / (bk**alpha * max(xi * xi, eta * eta)))
    if variant == "asym_pp":
        return float(1.0 / (bk**alpha * bx ** (1 - alpha) * be ** (1 - alpha)))
    if variant == "asym_pm":
        return float(bx**alpha / (bk ** (alpha + 1) * be ** (1 - alpha)))
    raise ValueError(f"unknown symbol variant {variant!r}")


@lru_cache(maxsize=32)
def symbol_matrix(N: int, signs: Tuple[int, int, int], alpha: float, weight: str = "plain") -> np.ndarray:
    """``S[i, j] = sigma(xi, k - xi)`` with ``xi = i - N``, ``k = j - N``.

    Entries with ``|k - xi| > N`` or ``xi eta k = 0`` are zero.  ``weight="p"``
    multiplies by ``p(xi) + p(eta)`` (the symbol of ``T(Pu, v) + T(u, Pv)``).
    """
    s = SignTriple(*signs)
    n = np.arange(-N, N + 1)
    xi = n[:, None].astype(float)
    k = n[None, :].astype(float)
    eta = k - xi
    valid = (np.abs(eta) <= N) & (xi != 0) & (eta != 0) & (k != 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(valid, _exact_symbol(xi, eta, s, alpha), 0.0)
    if weight == "p":
        S = S * (p_symbol(xi) + p_symbol(eta))
    elif weight != "plain":
        raise ValueError(f"unknown weight {weight!r}")
    S.setflags(write=False)
    return S


def _contract(S: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``out[k] = sum_xi S[xi, k] u[xi] v[k - xi]``."""
    N = (u.size - 1) // 2
    v_ext = np.zeros(4 * N + 1, complex)
    v_ext[N: 3 * N + 1] = v
    # window row r starts at v_ext[r]; row for xi (index i) starts at 2N - i
    windows = sliding_window_view(v_ext, 2 * N + 1)[::-1]
    out = np.zeros(2 * N + 1, complex)
    nz = np.nonzero(u)[0]
    if nz.size == 0:
        return out
    lo, hi = nz[0], nz[-1] + 1
    for b in range(lo, hi, _BLOCK):
        e = min(b + _BLOCK, hi)
        out += u[b:e] @ (S[b:e] * windows[b:e])
    return out


def apply_T(u: SpectralField, v: SpectralField, signs, alpha: float) -> SpectralField:
    if u.trunc != v.trunc:
        raise TruncationMismatch(f"truncation {u.trunc} vs {v.trunc}")
    s = _signs(signs)
    S = symbol_matrix(u.trunc, s.as_tuple(), float(alpha))
    return SpectralField(u.trunc, _contract(S, u.coeffs, v.coeffs), False)


# -- free flows and the correction h ---------------------------------------------

def _require_mean_zero(*fields: SpectralField):
    for fld in fields:
        if fld.mean != 0:
            raise DomainError(f"mean-zero data required (c_0 = {fld.mean})")


def _linv_coeffs(g: SpectralField) -> np.ndarray:
    m = mu(g.n)
    return np.divide(g.coeffs, m, out=np.zeros_like(g.coeffs), where=(g.n != 0))


def free_plus(f: SpectralField, g: SpectralField, t: float) -> SpectralField:
    """``1/2 e^{itL} f + 1/(2i) e^{itL} L^{-1} g``."""
    ph = np.exp(1j * t * mu(f.n))
    return SpectralField(f.trunc, ph * (0.5 * f.coeffs - 0.5j * _linv_coeffs(g)), False)


def free_minus(f: SpectralField, g: SpectralField, t: float) -> SpectralField:
    """Backward-flow partner ``1/2 e^{-itL} f - 1/(2i) e^{-itL} L^{-1} g``.

    For real ``f, g`` this is the complex conjugate of :func:`free_plus`.
    """
    ph = np.exp(-1j * t * mu(f.n))
    return SpectralField(f.trunc, ph * (0.5 * f.coeffs + 0.5j * _linv_coeffs(g)), False)


def gauged_h_and_err(f: SpectralField, g: SpectralField, t: float, eps: int,
                     params: ModelParams, gauged: bool = True):
    """Return ``(h^eps, Err^eps)`` at time ``t`` sharing the three ``T`` evaluations.

    ``h^eps = sum_j c_j G_- T^{eps; s_j}(G_+ a_j, G_+ b_j)`` over the terms
    ``(L, L; +,+; 1)``, ``(L, Lbar; +,-; 2)``, ``(Lbar, Lbar; -,-; 1)``.
    ``Err^eps`` collects every term produced when ``d/dt`` hits a gauge factor:
    the outer ``-(A0 + A1 t) P`` and the inner ``(A0 + A1 t) T(P a, b) + T(a, P b)``.
    """
    _require_mean_zero(f, g)
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    N = f.trunc
    alpha = float(params.alpha)
    n = f.n
    lp = free_plus(f, g, t).coeffs
    lm = free_minus(f, g, t).coeffs
    use_gauge = gauged and (params.A0 != 0 or params.A1 != 0)
    rate = params.gauge_rate(t) if use_gauge else 0.0
    if use_gauge:
        gp = gauge_symbol(n, t, params.A0, params.A1, 1)
        gm = 1.0 / gp
        lp, lm = gp * lp, gp * lm
    terms = ((lp, lp, (eps, 1, 1), 1.0), (lp, lm, (eps, 1, -1), 2.0), (lm, lm, (eps, -1, -1), 1.0))
    h = np.zeros(2 * N + 1, complex)
    inner = np.zeros(2 * N + 1, complex)
    for a, b, signs, c in terms:
        h += c * _contract(symbol_matrix(N, signs, alpha), a, b)
        if rate != 0.0:
            inner += c * _contract(symbol_matrix(N, signs, alpha, "p"), a, b)
    if use_gauge:
        err = gm * (rate * inner - rate * p_symbol(n) * h)
        h = gm * h
    else:
        err = np.zeros_like(h)
    return SpectralField(N, h, False), SpectralField(N, err, False)


def assemble_h(f: SpectralField, g: SpectralField, t: float, eps: int,
               params: ModelParams, gauged: bool = False) -> SpectralField:
    """``T^{eps;+,+}(L, L) + 2 T^{eps;+,-}(L, Lbar) + T^{eps;-,-}(Lbar, Lbar)`` at time ``t``."""
    return gauged_h_and_err(f, g, t, eps, params, gauged)[0]


def err_term(f: SpectralField, g: SpectralField, t: float, eps: int,
             params: ModelParams) -> SpectralField:
    return gauged_h_and_err(f, g, t, eps, params, True)[1]
