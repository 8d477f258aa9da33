"""Time evolution of the periodic good Boussinesq equation

    u_tt + u_xxxx - u_xx + (u^2)_xx = 0

in the half-wave variables ``w^+-`` of ``w = <D>^{-alpha}(u - mean)``:

    (d_t - i L) w^+ =  (i/2) [2 A(t) P w + N(w, w)]
    (d_t + i L) w^- = -(i/2) [2 A(t) P w + N(w, w)],      w = w^+ + w^-,

where ``A(t) = mean(u0) + t mean(u1)`` is the exactly known zero mode.

Two integrators are provided.  :func:`integrate_direct` steps ``w^+-``;
:func:`integrate_decomposed` steps the remainders ``Psi^+-`` of the splitting
``w^+- = G_+(t)[free^+- + h^+- + Psi^+-]`` with ``G_+ = exp((A0 t + A1 t^2/2) P)``.
Both use a fourth-order Lawson (integrating-factor Runge-Kutta) scheme in which
``exp(+-itL)`` is applied exactly.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
import scipy.fft
from scipy import stats

from .normal_form import free_minus, free_plus, gauged_h_and_err
from .spectral_core import (
    BracketPow,
    ModelParams,
    SpectralField,
    TruncationMismatch,
    _padded_length,
    apply_multiplier,
    bracket,
    free_evolution,
    gauge_symbol,
    mu,
    p_symbol,
    quadratic_product,
    random_sobolev_field,
    sobolev_norm,
)

__all__ = [
    "NumericalInstability",
    "ReducedData",
    "Trajectory",
    "reduce_initial_data",
    "nonlinearity_N",
    "gauged_nonlinearity",
    "integrate_direct",
    "integrate_decomposed",
    "remainder_z",
    "gauged_free_part",
    "smoothing_scan",
    "SmoothingReport",
    "loglog_slope",
    "default_dt",
]


class NumericalInstability(RuntimeError):
    """Norm guard tripped during time stepping."""


@dataclass(frozen=True)
class ReducedData:
    f: SpectralField
    g: SpectralField
    A0: float
    A1: float


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: List[SpectralField]
    zero_mode: np.ndarray
    norms: Dict[float, np.ndarray]
    companions: Dict[str, List[SpectralField]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if len({s.trunc for s in self.states}) > 1:
            raise TruncationMismatch("states do not share one truncation")

    @property
    def trunc(self) -> int:
        return self.states[0].trunc

    def rows(self):
        """``(t, s, norm)`` rows for CSV export."""
        for i, t in enumerate(self.times):
            for s in sorted(self.norms):
                yield float(t), float(s), float(self.norms[s][i])


def reduce_initial_data(u0: SpectralField, u1: SpectralField, alpha: float) -> ReducedData:
    """Strip the means and apply ``<D>^{-alpha}``."""
    if u0.trunc != u1.trunc:
        raise TruncationMismatch(f"truncation {u0.trunc} vs {u1.trunc}")
    A0 = float(u0.mean.real)
    A1 = float(u1.mean.real)
    B = BracketPow(-alpha)
    f = apply_multiplier(u0.without_mean(), B)
    g = apply_multiplier(u1.without_mean(), B)
    return ReducedData(f, g, A0, A1)


# -- nonlinearity ---------------------------------------------------------------

class _Kernels:
    """Per-(N, alpha) symbol arrays and padded-FFT helpers on raw coefficient arrays."""

    def __init__(self, N: int, alpha: float):
        self.N = N
        self.alpha = alpha
        n = np.arange(-N, N + 1)
        self.n = n
        self.mu = mu(n)
        self.p = p_symbol(n)
        self.up = bracket(n) ** alpha
        nf = n.astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.nsym = np.where(n != 0, -nf * nf / (bracket(n) ** alpha * self.mu), 0.0)
        self.M = _padded_length(N)

    def _grid(self, c):
        N, M = self.N, self.M
        buf = np.zeros(M, complex)
        buf[: N + 1] = c[N:]
        buf[M - N:] = c[:N]
        return scipy.fft.ifft(buf, overwrite_x=True) * M

    def _coeffs(self, vals):
        N, M = self.N, self.M
        F = scipy.fft.fft(vals) / M
        return np.concatenate([F[M - N:], F[: N + 1]])

    def N_op(self, u, v=None):
        """Coefficients of ``L^{-1} <D>^{-a} d_x^2 (<D>^a u <D>^a v)``."""
        gu = self._grid(self.up * u)
        gv = gu if v is None else self._grid(self.up * v)
        return self.nsym * self._coeffs(gu * gv)

    def N_pair(self, a, b):
        """``(N(a, a), N(a, b), N(b, b))`` with three forward FFTs."""
        ga = self._grid(self.up * a)
        gb = self._grid(self.up * b)
        return (self.nsym * self._coeffs(ga * ga),
                self.nsym * self._coeffs(ga * gb),
                self.nsym * self._coeffs(gb * gb))


def nonlinearity_N(u: SpectralField, v: SpectralField, alpha: float) -> SpectralField:
    """``N(u, v) = L^{-1} <D>^{-alpha} d_x^2 (<D>^alpha u <D>^alpha v)``; mean-zero output."""
    if u.trunc != v.trunc:
        raise TruncationMismatch(f"truncation {u.trunc} vs {v.trunc}")
    B = BracketPow(alpha)
    prod = quadratic_product(apply_multiplier(u, B), apply_multiplier(v, B))
    k = _Kernels(u.trunc, alpha)
    return SpectralField(u.trunc, k.nsym * prod.coeffs, prod.real_flag)


def gauged_nonlinearity(u: SpectralField, v: SpectralField, t: float, params: ModelParams) -> SpectralField:
    """``G_- N(G_+ u, G_+ v)`` with ``G_+- = exp(+-(A0 t + A1 t^2/2) P)``."""
    n = u.n
    gp = gauge_symbol(n, t, params.A0, params.A1, 1)
    a = SpectralField(u.trunc, gp * u.coeffs, u.real_flag)
    b = SpectralField(v.trunc, gp * v.coeffs, v.real_flag)
    out = nonlinearity_N(a, b, params.alpha)
    return SpectralField(out.trunc, out.coeffs / gp, out.real_flag)


# -- time stepping ------------------------------------------------------------------

def default_dt(N: int, safety: float = 0.4) -> float:
    """``safety / mu_N``; the integrating factor removes the linear stiffness."""
    return safety / float(mu(N))


def _lawson_rk4(y0: np.ndarray, lam: np.ndarray, rhs: Callable, T: float, dt: float,
                n_out: int, on_output: Callable, guard: float):
    """Integrate ``y' = lam * y + rhs(y, t)`` with ``exp(lam t)`` treated exactly.

    ``n_steps`` is rounded up to a multiple of ``n_out``; ``on_output(y, t)`` is
    called at ``t = 0`` and after every ``n_steps / n_out`` steps.
    """
    per = max(1, math.ceil(T / (dt * n_out)))
    n_steps = per * n_out
    h = T / n_steps
    E = np.exp(lam * h)
    E2 = np.exp(lam * (0.5 * h))
    y = y0.copy()
    ref = max(float(np.linalg.norm(y0)), 1e-300)
    on_output(y, 0.0)
    for step in range(n_steps):
        t = step * h
        k1 = rhs(y, t)
        k2 = rhs(E2 * (y + 0.5 * h * k1), t + 0.5 * h)
        k3 = rhs(E2 * y + 0.5 * h * k2, t + 0.5 * h)
        k4 = rhs(E * y + h * (E2 * k3), t + h)
        y = E * y + (h / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)
        if (step + 1) % per == 0:
            nrm = float(np.linalg.norm(y))
            if not np.isfinite(nrm) or (nrm > guard * ref and nrm > guard * 1e-12):
                raise NumericalInstability(
                    f"norm grew from {ref:.3e} to {nrm:.3e} by t = {t + h:.6g} (dt = {h:.3e})"
                )
            on_output(y, t + h)
    return y


def _check_data(u0: SpectralField, u1: SpectralField, params: ModelParams):
    if u0.trunc != u1.trunc:
        raise TruncationMismatch(f"truncation {u0.trunc} vs {u1.trunc}")
    if u0.trunc != params.trunc:
        raise TruncationMismatch(f"data truncation {u0.trunc} vs params.trunc {params.trunc}")


class _Recorder:
    def __init__(self, N, alpha, A0, A1, norm_s, real):
        self.N = N
        self.up = bracket(np.arange(-N, N + 1)) ** alpha
        self.A0, self.A1 = A0, A1
        self.norm_s = tuple(norm_s)
        self.real = real
        self.times: List[float] = []
        self.states: List[SpectralField] = []
        self.zero: List[complex] = []
        self.comp: Dict[str, List[SpectralField]] = {}

    def add(self, t: float, w: np.ndarray, **companions):
        c = self.up * w
        c[self.N] = self.A0 + t * self.A1
        self.times.append(t)
        self.zero.append(complex(c[self.N]))
        fld = SpectralField(self.N, c, False)
        if self.real:
            try:
                fld = SpectralField(self.N, c, True)
            except ValueError:
                pass
        self.states.append(fld)
        for name, arr in companions.items():
            self.comp.setdefault(name, []).append(SpectralField(self.N, arr, False))

    def build(self) -> Trajectory:
        norms = {float(s): np.array([sobolev_norm(u, s) for u in self.states]) for s in self.norm_s}
        return Trajectory(np.array(self.times), self.states, np.array(self.zero), norms, self.comp)


def integrate_direct(u0: SpectralField, u1: SpectralField, params: ModelParams, *,
                     n_out: int = 10, norm_s: Sequence[float] = (0.0,), guard: float = 1e6,
                     keep_halfwaves: bool = False) -> Trajectory:
    """Evolve the half-wave system for ``w^+-`` and reconstruct ``u``.

    ``companions`` holds ``w_plus``/``w_minus`` when ``keep_halfwaves`` is set.
    """
    _check_data(u0, u1, params)
    red = reduce_initial_data(u0, u1, params.alpha)
    N = u0.trunc
    K = _Kernels(N, params.alpha)
    A0, A1 = red.A0, red.A1
    wp0 = free_plus(red.f, red.g, 0.0).coeffs
    wm0 = free_minus(red.f, red.g, 0.0).coeffs
    y0 = np.stack([wp0, wm0])
    lam = np.stack([1j * K.mu, -1j * K.mu])

    def rhs(y, t):
        w = y[0] + y[1]
        q = 2.0 * (A0 + A1 * t) * K.p * w + K.N_op(w)
        q = 0.5j * q
        return np.stack([q, -q])

    rec = _Recorder(N, params.alpha, A0, A1, norm_s, u0.real_flag and u1.real_flag)

    def out(y, t):
        extra = {"w_plus": y[0].copy(), "w_minus": y[1].copy()} if keep_halfwaves else {}
        rec.add(t, y[0] + y[1], **extra)

    _lawson_rk4(y0, lam, rhs, params.horizon, params.dt, n_out, out, guard)
    return rec.build()


def integrate_decomposed(u0: SpectralField, u1: SpectralField, params: ModelParams, *,
                         gauged: bool = True, n_out: int = 10, norm_s: Sequence[float] = (0.0,),
                         guard: float = 1e6) -> Tuple[Trajectory, Trajectory]:
    """Evolve ``Psi^+-`` and reconstruct ``u``.

    Returns ``(psi_traj, u_traj)``.  ``psi_traj.states`` holds ``Psi^+`` and
    ``psi_traj.companions["psi_minus"]`` holds ``Psi^-``; its norms are those of
    ``Psi^+``.  ``u_traj`` carries ``h_plus`` as a companion.

    The Psi equations are an exact rewriting of the half-wave system: besides
    the gauged nonlinear terms and ``-Err`` they keep the residual linear drift
    ``+-i A(t) P W - (A0 + A1 t) P w~^+-`` that the real gauge does not absorb.
    """
    _check_data(u0, u1, params)
    red = reduce_initial_data(u0, u1, params.alpha)
    N = u0.trunc
    K = _Kernels(N, params.alpha)
    A0, A1 = red.A0, red.A1
    prm = dataclasses.replace(params, A0=A0, A1=A1)
    use_gauge = gauged and (A0 != 0.0 or A1 != 0.0)
    real = u0.real_flag and u1.real_flag
    f, g = red.f, red.g

    def forcing_parts(t):
        hp, ep = gauged_h_and_err(f, g, t, 1, prm, gauged=use_gauge)
        if real:
            hm_c = np.conj(hp.coeffs[::-1])
            em_c = -np.conj(ep.coeffs[::-1])
        else:
            hm, em = gauged_h_and_err(f, g, t, -1, prm, gauged=use_gauge)
            hm_c, em_c = -hm.coeffs, em.coeffs
        return hp.coeffs, hm_c, ep.coeffs, em_c

    def gauge_arrays(t):
        if not use_gauge:
            return None, None
        gp = gauge_symbol(K.n, t, A0, A1, 1)
        return gp, 1.0 / gp

    def rhs(y, t):
        lp = free_plus(f, g, t).coeffs
        lm = free_minus(f, g, t).coeffs
        hp, hm, ep, em = forcing_parts(t)
        Z = hp + hm + y[0] + y[1]
        Ls = lp + lm
        gp, gm = gauge_arrays(t)
        if gp is None:
            nLZ = K.N_op(Ls, Z)
            nZZ = K.N_op(Z)
            q = 2.0 * nLZ + nZZ
        else:
            nLZ = gm * K.N_op(gp * Ls, gp * Z)
            nZZ = gm * K.N_op(gp * Z)
            q = 2.0 * nLZ + nZZ
        A = A0 + A1 * t
        W = Ls + Z
        dp = 0.5j * q - ep + 1j * A * K.p * W
        dm = -0.5j * q + em - 1j * A * K.p * W
        if gp is not None:
            rate = A0 + A1 * t
            dp = dp - rate * K.p * (lp + hp + y[0])
            dm = dm - rate * K.p * (lm + hm + y[1])
        return np.stack([dp, dm])

    hp0, hm0, _, _ = forcing_parts(0.0)
    y0 = np.stack([-hp0, -hm0])
    lam = np.stack([1j * K.mu, -1j * K.mu])

    rec = _Recorder(N, params.alpha, A0, A1, norm_s, real)
    psi_p: List[SpectralField] = []
    psi_m: List[SpectralField] = []
    times: List[float] = []

    def out(y, t):
        lp = free_plus(f, g, t).coeffs
        lm = free_minus(f, g, t).coeffs
        hp, hm, _, _ = forcing_parts(t)
        wt = lp + lm + hp + hm + y[0] + y[1]
        gp, _ = gauge_arrays(t)
        w = wt if gp is None else gp * wt
        rec.add(t, w, h_plus=hp)
        times.append(t)
        psi_p.append(SpectralField(N, y[0].copy(), False))
        psi_m.append(SpectralField(N, y[1].copy(), False))

    _lawson_rk4(y0, lam, rhs, params.horizon, params.dt, n_out, out, guard)
    psi_norms = {float(s): np.array([sobolev_norm(p, s) for p in psi_p]) for s in norm_s}
    psi_traj = Trajectory(np.array(times), psi_p, np.zeros(len(times), complex), psi_norms,
                          {"psi_minus": psi_m})
    return psi_traj, rec.build()


# -- remainder and smoothing ---------------------------------------------------------

def gauged_free_part(u0: SpectralField, u1: SpectralField, t: float) -> SpectralField:
    """``G_+(t)[cos(tL)(u0 - mean) + sin(tL) L^{-1}(u1 - mean)]``."""
    A0, A1 = float(u0.mean.real), float(u1.mean.real)
    lin = free_evolution(u0.without_mean(), u1.without_mean(), t)
    gp = gauge_symbol(lin.n, t, A0, A1, 1)
    return SpectralField(lin.trunc, gp * lin.coeffs, lin.real_flag)


def remainder_z(traj: Trajectory, u0: SpectralField, u1: SpectralField, params: ModelParams,
                betas: Sequence[float] = (0.0,), return_fields: bool = False):
    """``||z(t)||_{H^beta}`` for ``z = u - (u0_0 + t u1_0) - G_+[free evolution]``.

    Returns ``{beta: array over traj.times}`` (and the list of ``z`` fields if
    ``return_fields``).
    """
    N = traj.trunc
    table = {float(b): np.empty(len(traj.times)) for b in betas}
    fields = []
    for i, (t, u) in enumerate(zip(traj.times, traj.states)):
        free = gauged_free_part(u0, u1, float(t))
        c = u.coeffs - free.coeffs
        c = c.copy()
        c[N] -= u0.mean + t * u1.mean
        z = SpectralField(N, c, False)
        fields.append(z)
        for b in table:
            table[b][i] = sobolev_norm(z, b)
    return (table, fields) if return_fields else table


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> Tuple[float, Tuple[float, float]]:
    """Least-squares slope of ``log y`` against ``log x`` with a 95% interval."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if lx.size < 2:
        raise ValueError("need at least two points for a slope")
    res = stats.linregress(lx, ly)
    if lx.size > 2:
        q = stats.t.ppf(0.975, lx.size - 2)
        half = q * res.stderr
    else:
        half = float("nan")
    return float(res.slope), (float(res.slope - half), float(res.slope + half))


@dataclass
class SmoothingReport:
    alpha: float
    N_list: List[int]
    betas: List[float]
    sup_z: Dict[float, List[float]]
    sup_free: Dict[float, List[float]]
    z_slope: Dict[float, float]
    free_slope: Dict[float, float]
    verdict: Dict[float, str]
    threshold: float = 0.1

    def rows(self):
        for b in self.betas:
            for j, N in enumerate(self.N_list):
                yield {"alpha": self.alpha, "beta": b, "gamma": b + self.alpha, "N": N,
                       "sup_z": self.sup_z[b][j], "sup_free": self.sup_free[b][j],
                       "z_slope": self.z_slope[b], "free_slope": self.free_slope[b],
                       "verdict": self.verdict[b]}


def _smoothing_cell(params: ModelParams, N: int, betas, seed: int, amplitude: float,
                    dt_safety: float, n_out: int):
    u0 = random_sobolev_field(-params.alpha, N, seed) * amplitude
    u1 = SpectralField.zeros(N)
    dt = min(params.dt, default_dt(N, dt_safety))
    prm = dataclasses.replace(params, trunc=N, dt=dt)
    traj = integrate_direct(u0, u1, prm, n_out=n_out, norm_s=())
    z = remainder_z(traj, u0, u1, prm, betas)
    sup_z = {b: float(np.max(z[b])) for b in z}
    sup_free = {}
    for b in z:
        sup_free[b] = max(sobolev_norm(gauged_free_part(u0, u1, float(t)), b) for t in traj.times)
    return sup_z, sup_free


def smoothing_scan(params: ModelParams, N_list: Sequence[int], beta_list: Sequence[float], seed: int, *,
                   amplitude: float = 1.0, dt_safety: float = 0.4, n_out: int = 10,
                   threshold: float = 0.1, executor=None) -> SmoothingReport:
    """Growth in ``N`` of ``sup_t ||z||_{H^beta}`` against that of the free part.

    Rough data ``u0 = amplitude * random_sobolev_field(-alpha, N, seed)``,
    ``u1 = 0``.  The step is ``min(params.dt, default_dt(N, dt_safety))``.
    """
    N_list = [int(N) for N in N_list]
    betas = [float(b) for b in beta_list]
    args = [(params, N, betas, seed, amplitude, dt_safety, n_out) for N in N_list]
    if executor is None:
        cells = [_smoothing_cell(*a) for a in args]
    else:
        cells = list(executor.map(lambda a: _smoothing_cell(*a), args))
    sup_z = {b: [c[0][b] for c in cells] for b in betas}
    sup_free = {b: [c[1][b] for c in cells] for b in betas}
    z_slope, free_slope, verdict = {}, {}, {}
    for b in betas:
        z_slope[b] = loglog_slope(N_list, sup_z[b])[0]
        free_slope[b] = loglog_slope(N_list, sup_free[b])[0]
        verdict[b] = "bounded" if z_slope[b] <= threshold else "growing"
    return SmoothingReport(params.alpha, N_list, betas, sup_z, sup_free, z_slope, free_slope,
                           verdict, threshold)
