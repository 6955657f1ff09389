"""Stationary characteristic function, operator moments, observables, and Husimi density.

Everything here evaluates the closed-form Gaussian stationary state produced by
:func:`epnoise.model.stationary_gaussian`.  Operator expectation values are
extracted from the antinormally ordered characteristic function

    chi(alpha) = exp(<q|alpha> - <alpha|q> + <alpha|m|alpha>)

by exact jet differentiation at alpha = 0:

    <a1^n1 a2^n2 a1+^m1 a2+^m2> =
        (-d/dalpha1*)^n1 (-d/dalpha2*)^n2 (d/dalpha1)^m1 (d/dalpha2)^m2 chi | 0

with the four variables treated as formal independents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import OrderTooLarge, SingularParameters
from .jets import Jet4
from .model import StationaryGaussian, SystemParams, stationary_gaussian

__all__ = [
    "ObservableSet",
    "chi_stationary",
    "chi_stationary_formal",
    "chi_exponent_jet",
    "chi_jet",
    "antinormal_moment",
    "observables",
    "intensity_dispersion_from_moments",
    "husimi_density",
    "snr_limit_checks",
    "MAX_MOMENT_ORDER",
]

# Default jet truncation: total moment order n1+n2+m1+m2 up to 8.
MAX_MOMENT_ORDER = 8


@dataclass(frozen=True)
class ObservableSet:
    """Stationary observables of the two resonators.

    Attributes
    ----------
    mean_a : (2,) complex ndarray
        First moments <a_n> (equal to the displacement q).
    rho : (2, 2) complex ndarray
        Single-particle covariance rho[n, k] = <a_k+ a_n> = (q q+ - m - I)[n, k].
    intensity : (2,) float ndarray
        Mean occupations I_n = rho[n, n].
    dispersion : (2,) float ndarray
        Intensity variances D_n = <n_n^2> - I_n^2 in closed form.
    snr1 : (2,) float ndarray
        Amplitude signal-to-noise |q_n| / sqrt(I_n - |q_n|^2); +inf where the
        incoherent occupation vanishes with q_n nonzero, nan for 0/0.
    snr2 : (2,) float ndarray
        Intensity signal-to-noise I_n / sqrt(D_n); nan for 0/0 (vacuum).
    """

    mean_a: np.ndarray
    rho: np.ndarray
    intensity: np.ndarray
    dispersion: np.ndarray
    snr1: np.ndarray
    snr2: np.ndarray


def _exponent_formal(g: StationaryGaussian, v: np.ndarray) -> complex:
    """Exponent of chi on the four formal variables v = (a1, a2, a1s, a2s)."""
    ket = v[:2]
    bra = v[2:]
    lin = np.conj(g.q) @ ket - bra @ g.q
    quad = bra @ (g.m @ ket)
    return complex(lin + quad)


def chi_stationary_formal(g: StationaryGaussian, v) -> complex:
    """chi evaluated on four independent formal variables (a1, a2, a1*, a2*).

    The starred slots are not required to be numerical conjugates of the
    unstarred ones; this is what finite-difference derivative checks need.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (4,):
        raise ValueError(f"expected 4 formal variables, got shape {v.shape}")
    return complex(np.exp(_exponent_formal(g, v)))


def chi_stationary(g: StationaryGaussian, alpha) -> complex:
    """Stationary antinormal characteristic function at the complex pair ``alpha``."""
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (2,):
        raise ValueError(f"expected a complex 2-vector, got shape {alpha.shape}")
    v = np.concatenate([alpha, np.conj(alpha)])
    return chi_stationary_formal(g, v)


def chi_exponent_jet(g: StationaryGaussian, order: int) -> Jet4:
    """The chi exponent as a jet in (a1, a2, a1s, a2s); linear plus quadratic terms."""
    coeffs: dict[tuple[int, int, int, int], complex] = {
        (1, 0, 0, 0): np.conj(g.q[0]),
        (0, 1, 0, 0): np.conj(g.q[1]),
        (0, 0, 1, 0): -g.q[0],
        (0, 0, 0, 1): -g.q[1],
        (1, 0, 1, 0): g.m[0, 0],
        (0, 1, 1, 0): g.m[0, 1],
        (1, 0, 0, 1): g.m[1, 0],
        (0, 1, 0, 1): g.m[1, 1],
    }
    return Jet4(order, coeffs)


def chi_jet(g: StationaryGaussian, order: int) -> Jet4:
    """Jet of chi itself; exact for all moments of total order <= order."""
    return chi_exponent_jet(g, order).exp()


def antinormal_moment(
    g: StationaryGaussian,
    n1: int,
    n2: int,
    m1: int,
    m2: int,
    max_order: int = MAX_MOMENT_ORDER,
) -> complex:
    """Antinormally ordered moment <a1^n1 a2^n2 a1+^m1 a2+^m2>.

    Parameters
    ----------
    g : StationaryGaussian
    n1, n2 : int
        Annihilation powers (left block of the ordering).
    m1, m2 : int
        Creation powers (right block).
    max_order : int
        Jet truncation; total order above this raises OrderTooLarge.
    """
    orders = (n1, n2, m1, m2)
    if any(k < 0 for k in orders):
        raise ValueError(f"moment orders must be >= 0, got {orders}")
    total = n1 + n2 + m1 + m2
    if total > max_order:
        raise OrderTooLarge(
            f"total moment order {total} exceeds configured maximum {max_order}"
        )
    jet = chi_jet(g, total)
    # chi coefficient slots: (alpha1^m1, alpha2^m2, alpha1s^n1, alpha2s^n2)
    value = jet.derivative_at_zero((m1, m2, n1, n2))
    return (-1.0) ** (n1 + n2) * value


def _snr_arrays(q: np.ndarray, intensity: np.ndarray, dispersion: np.ndarray):
    """SNR pairs with 0/0 -> nan and x/0 -> inf semantics."""
    amp = np.abs(q)
    incoherent = np.maximum(intensity - amp**2, 0.0)
    snr1 = np.empty(2)
    snr2 = np.empty(2)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr1[:] = amp / np.sqrt(incoherent)
        snr2[:] = intensity / np.sqrt(np.maximum(dispersion, 0.0))
    return snr1, snr2


def observables(g: StationaryGaussian, p: SystemParams) -> ObservableSet:
    """All stationary observables of the pair, from the closed forms.

    The covariance is rho = q q+ - m - I; its diagonal equals the closed-form
    intensities identically.  Dispersions use the displaced-thermal closed
    forms (cross-checked elsewhere against fourth jet moments):

        D1 = |q1|^2 (2 j g2 m0 - 1) + j g2 m0 (j g2 m0 - 1)
        D2 = |q2|^2 (2 j g1 m0 + 1) + j g1 m0 (j g1 m0 + 1)
    """
    rho = np.outer(g.q, np.conj(g.q)) - g.m - np.eye(2)
    intensity = rho.diagonal().real.copy()
    n_th1 = p.j * p.gamma2 * g.m0 - 1.0  # thermal part of mode 1
    n_th2 = p.j * p.gamma1 * g.m0  # thermal part of mode 2
    q2abs = np.abs(g.q) ** 2
    dispersion = np.array(
        [
            q2abs[0] * (2.0 * n_th1 + 1.0) + n_th1 * (n_th1 + 1.0),
            q2abs[1] * (2.0 * n_th2 + 1.0) + n_th2 * (n_th2 + 1.0),
        ]
    )
    snr1, snr2 = _snr_arrays(g.q, intensity, dispersion)
    return ObservableSet(
        mean_a=g.q.copy(),
        rho=rho,
        intensity=intensity,
        dispersion=dispersion,
        snr1=snr1,
        snr2=snr2,
    )


def intensity_dispersion_from_moments(g: StationaryGaussian, mode: int) -> float:
    """Intensity variance of one mode from fourth antinormal moments.

    Independent of the closed forms in :func:`observables`: uses
    <n^2> = <a^2 a+^2> - 3 <a a+> + 1 and I = <a a+> - 1.
    """
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode}")
    if mode == 1:
        a4 = antinormal_moment(g, 2, 0, 2, 0)
        a2 = antinormal_moment(g, 1, 0, 1, 0)
    else:
        a4 = antinormal_moment(g, 0, 2, 0, 2)
        a2 = antinormal_moment(g, 0, 1, 0, 1)
    n_sq = a4 - 3.0 * a2 + 1.0
    intensity = a2 - 1.0
    return float((n_sq - intensity**2).real)


def husimi_density(g: StationaryGaussian, a) -> float:
    """Joint Husimi quasiprobability density Q(a1, a2).

    Closed form of the 4-dimensional Fourier transform of chi:

        Q(a) = exp(-(a-q)+ (-m)^-1 (a-q)) / (pi^2 det(-m))

    normalized so that integral Q d^2a1 d^2a2 = 1; the vacuum peaks at 1/pi^2.
    """
    a = np.asarray(a, dtype=complex)
    if a.shape != (2,):
        raise ValueError(f"expected a complex 2-vector, got shape {a.shape}")
    neg_m = -g.m
    eigvals = np.linalg.eigvalsh(neg_m)
    if eigvals.min() <= 0.0:
        raise SingularParameters(
            "covariance matrix -m is not positive definite; Husimi density undefined"
        )
    w = a - g.q
    quad = np.conj(w) @ np.linalg.solve(neg_m, w)
    det = float(np.linalg.det(neg_m).real)
    return float(np.exp(-quad.real) / (math.pi**2 * det))


def snr_limit_checks(
    params: Iterable[SystemParams] | Sequence[SystemParams],
    kind: int,
    mode: int,
    tol: float = 1e-9,
) -> np.ndarray:
    """Evaluate one SNR along a parameter sequence (for asymptotics checks).

    Parameters
    ----------
    params : iterable of SystemParams
        A sequence approaching a limit (a stability boundary, or growing f).
    kind : int
        1 for the amplitude SNR |q_n|/sqrt(I_n - |q_n|^2), 2 for the intensity
        SNR I_n/sqrt(D_n).
    mode : int
        Resonator index, 1 or 2.

    Returns
    -------
    (len,) float ndarray of SNR values in sequence order.
    """
    if kind not in (1, 2):
        raise ValueError(f"kind must be 1 or 2, got {kind}")
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode}")
    out = []
    for p in params:
        obs = observables(stationary_gaussian(p, tol=tol), p)
        seq = obs.snr1 if kind == 1 else obs.snr2
        out.append(seq[mode - 1])
    return np.array(out)
