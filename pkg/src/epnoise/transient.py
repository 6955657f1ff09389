"""Exceptional-point transients of the first moments and the transient characteristic function.

At an exceptional point the effective Hamiltonian is defective: the general
solution of i d|a>/dt = h|a> + |F> picks up a secular t * exp(-i lam t) term
along the single eigenvector instead of a second exponential.  A classical
ensemble of such trajectories, each dressed with the stationary quadratic
form, solves the full characteristic-function equation of motion; the
finite-difference residual checker at the bottom verifies exactly that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import NotAtEP, SingularParameters, UnnormalizedEnsemble
from .model import (
    DEFAULT_TOL,
    StationaryGaussian,
    SystemParams,
    build_heff,
    classify_regime,
)
from .moments import chi_stationary_formal

__all__ = [
    "EpModeData",
    "TransientEnsemble",
    "ep_mode_data",
    "order_parameter_ep",
    "order_parameter_general",
    "fit_constants",
    "transient_chi",
    "transient_chi_formal",
    "transient_chi_evaluator",
    "stationary_chi_evaluator",
    "chi_pde_residual",
]


@dataclass(frozen=True)
class EpModeData:
    """Degenerate mode data at an exceptional point.

    Attributes
    ----------
    lam : complex
        The doubly degenerate eigenvalue delta - i (gamma2 - gamma1) / 4.
    b : (2,) complex ndarray
        The single eigenvector (1, -i) / sqrt(2).
    kappa : complex
        Coupling constant sqrt(8) i / (gamma1 + gamma2) multiplying the
        drain-mode basis vector (0, 1) in the secular solution.
    """

    lam: complex
    b: np.ndarray
    kappa: complex


@dataclass(frozen=True)
class TransientEnsemble:
    """Finite convex mixture of transient trajectories.

    Each point is (c0, c1, weight): the two complex integration constants of
    the exceptional-point solution and a nonnegative weight.  Weights must sum
    to one within 1e-12.
    """

    points: tuple[tuple[complex, complex, float], ...]

    def __post_init__(self):
        if not self.points:
            raise UnnormalizedEnsemble("ensemble must contain at least one point")
        total = 0.0
        for c0, c1, w in self.points:
            if w < 0.0:
                raise UnnormalizedEnsemble(f"negative ensemble weight {w}")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise UnnormalizedEnsemble(f"ensemble weights sum to {total!r}, not 1")

    @classmethod
    def single(cls, c0: complex, c1: complex) -> "TransientEnsemble":
        return cls(points=((complex(c0), complex(c1), 1.0),))


def _require_ep(p: SystemParams, tol: float) -> None:
    if not classify_regime(p, tol=tol).on_ep_line:
        raise NotAtEP(
            f"gamma1 + gamma2 = {p.gamma1 + p.gamma2:g} is not 2 j = {2 * p.j:g} "
            "within tolerance"
        )


def ep_mode_data(p: SystemParams, tol: float = DEFAULT_TOL) -> EpModeData:
    """Eigenvalue, eigenvector, and secular coupling at the exceptional point."""
    _require_ep(p, tol)
    lam = p.delta - 0.25j * (p.gamma2 - p.gamma1)
    b = np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2.0)
    kappa = math.sqrt(8.0) * 1.0j / (p.gamma1 + p.gamma2)
    return EpModeData(lam=lam, b=b, kappa=kappa)


def _stationary_displacement(p: SystemParams) -> np.ndarray:
    """q = -h^-1 |F>, defined whenever the effective Hamiltonian is invertible."""
    h = build_heff(p).h
    det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    if abs(det) <= 1e-14 * max(p.j**2, 1.0):
        raise SingularParameters(
            "effective Hamiltonian is singular; no stationary displacement"
        )
    f_vec = np.array([0.0, p.f], dtype=complex)
    return -np.linalg.solve(h, f_vec)


def order_parameter_ep(
    p: SystemParams, c0: complex, c1: complex, t: float, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Closed-form first moments at an exceptional point.

        a(t) = q + (c0 b + kappa c1 e2) e^{-i lam t} + c1 t e^{-i lam t} b

    with e2 = (0, 1) and kappa = sqrt(8) i / (gamma1 + gamma2).

    Raises NotAtEP away from gamma1 + gamma2 = 2 j.
    """
    mode = ep_mode_data(p, tol=tol)
    q = _stationary_displacement(p)
    e2 = np.array([0.0, 1.0], dtype=complex)
    phase = np.exp(-1.0j * mode.lam * t)
    return q + (c0 * mode.b + mode.kappa * c1 * e2) * phase + c1 * t * phase * mode.b


def fit_constants(
    p: SystemParams, a0, tol: float = DEFAULT_TOL
) -> tuple[complex, complex]:
    """Integration constants (c0, c1) reproducing the initial moments ``a0``.

    Inverts a0 - q = c0 b + kappa c1 e2 exactly (the 2x2 system is never
    singular: b and e2 are linearly independent and kappa != 0).
    """
    mode = ep_mode_data(p, tol=tol)
    a0 = np.asarray(a0, dtype=complex)
    d = a0 - _stationary_displacement(p)
    c0 = math.sqrt(2.0) * d[0]
    c1 = (d[1] + 1.0j * d[0]) / mode.kappa
    return complex(c0), complex(c1)


def order_parameter_general(p: SystemParams, a0, t: float) -> np.ndarray:
    """First moments at any parameter point by matrix exponentiation.

    Propagates the affine system d/dt (a, 1) = [[-i h, -i F], [0, 0]] (a, 1)
    with one 3x3 matrix exponential, which is exact and remains well-defined
    for defective or singular effective Hamiltonians alike.  Unstable growth
    is legitimate output, not an error.
    """
    a0 = np.asarray(a0, dtype=complex)
    if a0.shape != (2,):
        raise ValueError(f"expected a complex 2-vector, got shape {a0.shape}")
    h = build_heff(p).h
    gen = np.zeros((3, 3), dtype=complex)
    gen[:2, :2] = -1.0j * h
    gen[:2, 2] = -1.0j * np.array([0.0, p.f])
    z = scipy.linalg.expm(gen * t) @ np.array([a0[0], a0[1], 1.0], dtype=complex)
    return z[:2]


def transient_chi_formal(
    p: SystemParams,
    g: StationaryGaussian,
    ens: TransientEnsemble,
    t: float,
    v,
    tol: float = DEFAULT_TOL,
) -> complex:
    """Transient chi on four formal variables v = (a1, a2, a1*, a2*).

    chi(t) = sum_k w_k exp(<a_k(t)|alpha> - <alpha|a_k(t)> + <alpha|m|alpha>)
    where each a_k(t) is the exceptional-point trajectory for (c0_k, c1_k).
    """
    _require_ep(p, tol)
    v = np.asarray(v, dtype=complex)
    if v.shape != (4,):
        raise ValueError(f"expected 4 formal variables, got shape {v.shape}")
    ket, bra = v[:2], v[2:]
    quad = bra @ (g.m @ ket)
    total = 0.0 + 0.0j
    for c0, c1, w in ens.points:
        a_t = order_parameter_ep(p, c0, c1, t, tol=tol)
        lin = np.conj(a_t) @ ket - bra @ a_t
        total += w * np.exp(lin + quad)
    return complex(total)


def transient_chi(
    p: SystemParams,
    g: StationaryGaussian,
    ens: TransientEnsemble,
    t: float,
    alpha,
    tol: float = DEFAULT_TOL,
) -> complex:
    """Transient characteristic function at the complex pair ``alpha``."""
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (2,):
        raise ValueError(f"expected a complex 2-vector, got shape {alpha.shape}")
    v = np.concatenate([alpha, np.conj(alpha)])
    return transient_chi_formal(p, g, ens, t, v, tol=tol)


def transient_chi_evaluator(
    p: SystemParams,
    g: StationaryGaussian,
    ens: TransientEnsemble,
    tol: float = DEFAULT_TOL,
) -> Callable[[float, Sequence[complex]], complex]:
    """Black-box (t, v4) -> chi evaluator for the residual checker."""

    def evaluate(t: float, v) -> complex:
        return transient_chi_formal(p, g, ens, t, v, tol=tol)

    return evaluate


def stationary_chi_evaluator(
    g: StationaryGaussian,
) -> Callable[[float, Sequence[complex]], complex]:
    """Time-independent evaluator wrapping the stationary chi."""

    def evaluate(t: float, v) -> complex:
        return chi_stationary_formal(g, v)

    return evaluate


def chi_pde_residual(
    p: SystemParams,
    chi_eval: Callable[[float, Sequence[complex]], complex],
    t: float,
    alpha,
    step: float = 1e-4,
) -> float:
    """Finite-difference residual of the chi equation of motion.

    Checks |dchi/dt - RHS| at one point, where

        RHS = -i (<alpha| h |d_chi_ket> - <d_chi_bra| h+ |alpha>)
              + i f (alpha2 + alpha2*) chi
              - gamma2 alpha2 alpha2* chi

    and every derivative (the four formal alpha-derivatives and the time
    derivative) is a central difference with the same ``step``.  The drain
    noise coefficient is the full gamma2: that, and only that, makes the
    stationary Gaussian an exact zero of the right-hand side (the residual of
    a correct evaluator sits at the O(step^2) discretization floor).

    Parameters
    ----------
    p : SystemParams
    chi_eval : callable
        (t, v4) -> complex on four independent formal variables.
    t : float
    alpha : complex 2-vector
        Evaluation point; formal variables are (alpha, conj(alpha)).
    step : float
        Central-difference step.

    Returns
    -------
    float : absolute residual.
    """
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (2,):
        raise ValueError(f"expected a complex 2-vector, got shape {alpha.shape}")
    v0 = np.concatenate([alpha, np.conj(alpha)])
    h = build_heff(p).h

    def d_var(k: int) -> complex:
        vp = v0.copy()
        vm = v0.copy()
        vp[k] += step
        vm[k] -= step
        return (chi_eval(t, vp) - chi_eval(t, vm)) / (2.0 * step)

    grad = np.array([d_var(k) for k in range(4)], dtype=complex)
    d_t = (chi_eval(t + step, v0) - chi_eval(t - step, v0)) / (2.0 * step)
    chi0 = chi_eval(t, v0)

    ket, bra = v0[:2], v0[2:]
    d_ket = grad[2:]  # derivatives in the starred slots
    d_bra = grad[:2]  # derivatives in the unstarred slots
    drift = -1.0j * (bra @ (h @ d_ket) - d_bra @ (np.conj(h.T) @ ket))
    drive = 1.0j * p.f * (v0[1] + v0[3]) * chi0
    noise = -p.gamma2 * v0[1] * v0[3] * chi0
    return float(abs(d_t - (drift + drive + noise)))
