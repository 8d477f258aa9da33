"""Fourier-coefficient representation of 2*pi-periodic functions.

A field is stored densely over the modes ``n = -N, ..., N``; entry ``i`` of the
coefficient array holds the coefficient of ``exp(i*n*x)`` with ``n = i - N``.
All multipliers act coefficient-wise.  Quadratic products are computed on a
zero-padded grid of length at least ``4N + 1`` so that no aliasing occurs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft

__all__ = [
    "DomainError",
    "TruncationMismatch",
    "SpectralField",
    "ModelParams",
    "Multiplier",
    "L",
    "Linv",
    "P",
    "AbsDeriv",
    "BracketPow",
    "Gauge",
    "wavenumbers",
    "bracket",
    "mu",
    "p_symbol",
    "gauge_symbol",
    "apply_multiplier",
    "sobolev_norm",
    "quadratic_product",
    "free_evolution",
    "half_wave",
    "random_sobolev_field",
    "conj_reflect",
    "ROUGH_DATA_SLACK",
]

#: Exponent slack used by :func:`random_sobolev_field`.
ROUGH_DATA_SLACK = 0.01


class DomainError(ValueError):
    """Operation evaluated outside its domain (nonzero mean, resonant frequency, ...)."""


class TruncationMismatch(ValueError):
    """Two fields with different truncations were combined."""


def wavenumbers(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


def bracket(n):
    """Japanese bracket ``<n> = sqrt(1 + n^2)``."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(1.0 + n * n)


def mu(n):
    """Dispersion ``|n| <n>``, the symbol of ``L = sqrt(d^4 - d^2)``."""
    n = np.asarray(n, dtype=float)
    return np.abs(n) * np.sqrt(1.0 + n * n)


def p_symbol(n):
    """Symbol ``-|n|/<n>`` of ``P = L^{-1} d_xx`` (zero at ``n = 0``)."""
    n = np.asarray(n, dtype=float)
    return -np.abs(n) / np.sqrt(1.0 + n * n)


def gauge_exponent(t: float, A0: float, A1: float) -> float:
    return A0 * t + 0.5 * A1 * t * t


def gauge_symbol(n, t: float, A0: float, A1: float, sign: int = 1):
    """Symbol of ``exp(sign * (A0 t + A1 t^2/2) P)``."""
    return np.exp(sign * gauge_exponent(t, A0, A1) * p_symbol(n))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Truncated Fourier series ``sum_{|n|<=N} c_n exp(inx)``.

    ``real_flag`` asserts Hermitian symmetry ``c_{-n} = conj(c_n)``; it is
    checked at construction.
    """

    trunc: int
    coeffs: np.ndarray
    real_flag: bool = False

    def __post_init__(self):
        if int(self.trunc) < 0:
            raise ValueError(f"trunc must be nonnegative, got {self.trunc}")
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * self.trunc + 1,):
            raise ValueError(
                f"expected {2 * self.trunc + 1} coefficients for trunc={self.trunc}, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "trunc", int(self.trunc))
        object.__setattr__(self, "coeffs", c)
        if self.real_flag:
            scale = max(np.max(np.abs(c), initial=0.0), 1e-300)
            if np.max(np.abs(c - np.conj(c[::-1])), initial=0.0) > 1e-12 * scale:
                raise ValueError("real_flag set but coefficients are not Hermitian-symmetric")

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, N: int, real: bool = True) -> "SpectralField":
        return cls(N, np.zeros(2 * N + 1, complex), real)

    @classmethod
    def from_modes(cls, N: int, modes: dict, real: Optional[bool] = None) -> "SpectralField":
        """Build from ``{n: c_n}``; Hermitian symmetry is detected if ``real`` is None."""
        c = np.zeros(2 * N + 1, complex)
        for n, val in modes.items():
            if abs(n) > N:
                raise ValueError(f"mode {n} exceeds truncation {N}")
            c[n + N] = val
        if real is None:
            real = bool(np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-15))
        return cls(N, c, real)

    @classmethod
    def from_grid(cls, values: np.ndarray, N: int) -> "SpectralField":
        """Coefficients of samples ``values[j] = f(2 pi j / M)`` truncated to ``N``."""
        values = np.asarray(values)
        M = values.shape[0]
        if M < 2 * N + 1:
            raise ValueError("grid too coarse for requested truncation")
        F = scipy.fft.fft(values) / M
        c = np.concatenate([F[M - N:], F[: N + 1]]) if N > 0 else F[:1]
        real = bool(np.isrealobj(values) or np.all(np.abs(np.imag(values)) == 0))
        if real:
            c = 0.5 * (c + np.conj(c[::-1]))
        return cls(N, c, real)

    # -- access -------------------------------------------------------------
    @property
    def n(self) -> np.ndarray:
        return wavenumbers(self.trunc)

    def mode(self, n: int) -> complex:
        if abs(n) > self.trunc:
            return 0j
        return complex(self.coeffs[n + self.trunc])

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[self.trunc])

    def with_coeffs(self, coeffs: np.ndarray, real: Optional[bool] = None) -> "SpectralField":
        return SpectralField(self.trunc, coeffs, self.real_flag if real is None else real)

    def without_mean(self) -> "SpectralField":
        c = self.coeffs.copy()
        c[self.trunc] = 0.0
        return self.with_coeffs(c)

    def resize(self, N: int) -> "SpectralField":
        """Zero-pad or truncate to a new truncation."""
        c = np.zeros(2 * N + 1, complex)
        m = min(N, self.trunc)
        c[N - m: N + m + 1] = self.coeffs[self.trunc - m: self.trunc + m + 1]
        return SpectralField(N, c, self.real_flag)

    def grid_values(self, M: Optional[int] = None) -> np.ndarray:
        """Samples on the equispaced grid of ``M >= 2N+1`` points."""
        N = self.trunc
        M = 2 * N + 1 if M is None else M
        if M < 2 * N + 1:
            raise ValueError("grid too coarse for this truncation")
        buf = np.zeros(M, complex)
        buf[: N + 1] = self.coeffs[N:]
        if N:
            buf[M - N:] = self.coeffs[:N]
        vals = scipy.fft.ifft(buf) * M
        return vals.real if self.real_flag else vals

    # -- arithmetic -----------------------------------------------------------
    def _check(self, other: "SpectralField"):
        if other.trunc != self.trunc:
            raise TruncationMismatch(f"truncation {self.trunc} vs {other.trunc}")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.trunc, self.coeffs + other.coeffs, self.real_flag and other.real_flag)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.trunc, self.coeffs - other.coeffs, self.real_flag and other.real_flag)

    def __neg__(self):
        return SpectralField(self.trunc, -self.coeffs, self.real_flag)

    def __mul__(self, scalar):
        scalar = complex(scalar)
        return SpectralField(self.trunc, self.coeffs * scalar, self.real_flag and scalar.imag == 0)

    __rmul__ = __mul__

    def conj_reflect(self) -> "SpectralField":
        """The field ``conj(u(x))``: coefficients ``conj(c_{-n})``."""
        return SpectralField(self.trunc, np.conj(self.coeffs[::-1]), self.real_flag)

    # -- serialization ----------------------------------------------------------
    def to_record(self) -> np.ndarray:
        """Flat record ``[N, re_{-N}, im_{-N}, ..., re_N, im_N]``."""
        rec = np.empty(1 + 2 * self.coeffs.size)
        rec[0] = self.trunc
        rec[1::2] = self.coeffs.real
        rec[2::2] = self.coeffs.imag
        return rec

    @classmethod
    def from_record(cls, record: Sequence[float], real: Optional[bool] = None) -> "SpectralField":
        rec = np.asarray(record, dtype=float)
        N = int(rec[0])
        if rec.size != 2 + 4 * N + 1:
            raise ValueError(f"record of length {rec.size} does not match trunc {N}")
        c = rec[1::2] + 1j * rec[2::2]
        if real is None:
            real = bool(np.array_equal(c, np.conj(c[::-1])))
        return cls(N, c, real)

    def to_bytes(self) -> bytes:
        return self.to_record().astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes, real: Optional[bool] = None) -> "SpectralField":
        return cls.from_record(np.frombuffer(blob, dtype="<f8"), real)


def conj_reflect(u: SpectralField) -> SpectralField:
    return u.conj_reflect()


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of a run.

    ``beta`` and ``gamma`` are tied by ``beta = gamma - alpha``; pass either
    one and the other is filled in.
    """

    alpha: float
    trunc: int = 64
    dt: float = 1e-4
    horizon: float = 0.25
    gamma: Optional[float] = None
    beta: Optional[float] = None
    delta: float = 0.01
    A0: float = 0.0
    A1: float = 0.0

    def __post_init__(self):
        problems = []
        if not (0.0 <= self.alpha < 0.5):
            problems.append(f"alpha={self.alpha} outside [0, 1/2)")
        if not (0.0 < self.delta <= 0.1):
            problems.append(f"delta={self.delta} outside (0, 0.1]")
        if int(self.trunc) != self.trunc or self.trunc < 4:
            problems.append(f"trunc={self.trunc} must be an integer >= 4")
        if not self.dt > 0:
            problems.append(f"dt={self.dt} must be positive")
        if not self.horizon > 0:
            problems.append(f"horizon={self.horizon} must be positive")
        if problems:
            raise ValueError("; ".join(problems))
        g, b = self.gamma, self.beta
        if g is None and b is not None:
            object.__setattr__(self, "gamma", b + self.alpha)
        elif b is None and g is not None:
            object.__setattr__(self, "beta", g - self.alpha)
        elif g is not None and b is not None and abs(b - (g - self.alpha)) > 1e-12:
            raise ValueError(f"beta={b} inconsistent with gamma - alpha = {g - self.alpha}")
        object.__setattr__(self, "trunc", int(self.trunc))

    def gauge_rate(self, t: float) -> float:
        """Derivative ``A0 + A1 t`` of the gauge exponent."""
        return self.A0 + self.A1 * t


# -- multipliers ----------------------------------------------------------------

@dataclass(frozen=True)
class Multiplier:
    """A named Fourier multiplier; see the module-level constructors."""

    tag: str
    s: float = 0.0
    t: float = 0.0
    A0: float = 0.0
    A1: float = 0.0
    sign: int = 1

    def symbol(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n)
        if self.tag == "L":
            return mu(n)
        if self.tag == "Linv":
            m = mu(n)
            out = np.zeros_like(m)
            np.divide(1.0, m, out=out, where=(n != 0))
            return out
        if self.tag == "P":
            return p_symbol(n)
        if self.tag == "BracketPow":
            return (1.0 + np.asarray(n, float) ** 2) ** (self.s / 2.0)
        if self.tag == "AbsDeriv":
            return np.abs(n).astype(float)
        if self.tag == "Gauge":
            return gauge_symbol(n, self.t, self.A0, self.A1, self.sign)
        raise ValueError(f"unknown multiplier {self.tag!r}")

    @property
    def needs_mean_zero(self) -> bool:
        return self.tag in ("Linv", "AbsDeriv")


L = Multiplier("L")
Linv = Multiplier("Linv")
P = Multiplier("P")
AbsDeriv = Multiplier("AbsDeriv")


def BracketPow(s: float) -> Multiplier:
    return Multiplier("BracketPow", s=float(s))


def Gauge(t: float, A0: float, A1: float, sign: int = 1) -> Multiplier:
    """``sign=+1``: ``exp((A0 t + A1 t^2/2) P)``; ``sign=-1`` is its inverse."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return Multiplier("Gauge", t=float(t), A0=float(A0), A1=float(A1), sign=int(sign))


def apply_multiplier(u: SpectralField, m: Multiplier) -> SpectralField:
    if m.needs_mean_zero and u.mean != 0:
        raise DomainError(f"{m.tag} requires a mean-zero field (c_0 = {u.mean})")
    return SpectralField(u.trunc, u.coeffs * m.symbol(u.n), u.real_flag)


def sobolev_norm(u: SpectralField, s: float) -> float:
    w = (1.0 + u.n.astype(float) ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(u.coeffs) ** 2)))


def _padded_length(N: int) -> int:
    return scipy.fft.next_fast_len(4 * N + 1)


def _to_padded(c: np.ndarray, N: int, M: int) -> np.ndarray:
    buf = np.zeros(M, complex)
    buf[: N + 1] = c[N:]
    if N:
        buf[M - N:] = c[:N]
    return buf


def quadratic_product(u: SpectralField, v: SpectralField) -> SpectralField:
    """Coefficients of ``u * v``, truncated to ``|n| <= N``, alias-free."""
    if u.trunc != v.trunc:
        raise TruncationMismatch(f"truncation {u.trunc} vs {v.trunc}")
    N = u.trunc
    M = _padded_length(N)
    gu = scipy.fft.ifft(_to_padded(u.coeffs, N, M)) * M
    gv = gu if v is u else scipy.fft.ifft(_to_padded(v.coeffs, N, M)) * M
    F = scipy.fft.fft(gu * gv) / M
    c = np.concatenate([F[M - N:], F[: N + 1]]) if N else F[:1]
    real = u.real_flag and v.real_flag
    if real:
        # round-off only; the exact product of Hermitian sequences is Hermitian
        c = 0.5 * (c + np.conj(c[::-1]))
    return SpectralField(N, c, real)


def free_evolution(f: SpectralField, g: SpectralField, t: float) -> SpectralField:
    """``cos(tL) f + sin(tL) L^{-1} g`` with the zero mode ``f_0 + t g_0``."""
    if f.trunc != g.trunc:
        raise TruncationMismatch(f"truncation {f.trunc} vs {g.trunc}")
    m = mu(f.n)
    c = np.cos(t * m) * f.coeffs
    ratio = np.where(f.n == 0, t, np.sin(t * m) / np.where(m == 0, 1.0, m))
    c = c + ratio * g.coeffs
    return SpectralField(f.trunc, c, f.real_flag and g.real_flag)


def half_wave(u: SpectralField, t: float, sign: int) -> SpectralField:
    """``exp(i sign t L) u``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return SpectralField(u.trunc, np.exp(1j * sign * t * mu(u.n)) * u.coeffs, False)


def random_sobolev_field(s: float, N: int, seed: int) -> SpectralField:
    """Real mean-zero field with ``|c_n| = <n>^{-s-1/2-0.01}`` and random phases."""
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(seed)
    k = np.arange(1, N + 1)
    amp = bracket(k) ** (-s - 0.5 - ROUGH_DATA_SLACK)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=N)
    pos = amp * np.exp(1j * phases)
    c = np.concatenate([np.conj(pos[::-1]), [0.0], pos])
    return SpectralField(N, c, True)
