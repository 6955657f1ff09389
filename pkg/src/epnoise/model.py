"""Model parameters, effective non-Hermitian dynamics, and the stationary Gaussian data.

Two coupled single-mode bosonic resonators in the frame rotating with the
drive: resonator 1 is pumped incoherently at rate ``gamma1``, resonator 2
decays radiatively at rate ``gamma2`` and carries the coherent drive ``f``.
First moments evolve under a 2x2 non-Hermitian matrix whose two eigenvalues
collide on the line ``gamma1 + gamma2 = 2*j`` (an exceptional point: the
matrix becomes defective, not merely degenerate).  Inside the stability
domain ``gamma2 > gamma1`` and ``j**2 > gamma1*gamma2`` the Lindblad dynamics
has a unique Gaussian stationary state, described here in closed form by the
displacement ``q`` and the quadratic matrix ``m`` of the antinormally ordered
characteristic function ``chi(alpha) = exp(<q|alpha> - <alpha|q> + <alpha|m|alpha>)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularParameters, Unstable

__all__ = [
    "SystemParams",
    "EffectiveHamiltonian",
    "RegimeReport",
    "HeffSpectrum",
    "StationaryGaussian",
    "build_heff",
    "heff_spectrum",
    "classify_regime",
    "stationary_gaussian",
    "DEFAULT_TOL",
]

# Relative tolerance (in units of j resp. j**2) deciding membership of the
# singular manifolds gamma2 = gamma1 and j**2 = gamma1*gamma2, and of the
# exceptional-point line gamma1 + gamma2 = 2 j.
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """The five model parameters.

    Attributes
    ----------
    delta : float
        Detuning of the (degenerate) resonators from the drive frequency.
    j : float
        Tunneling matrix element between the resonators; strictly positive.
        All other rates are naturally measured in units of ``j``.
    f : float
        Drive amplitude reaching resonator 2; nonnegative (a drive phase can
        be absorbed into the mode operators).
    gamma1 : float
        Incoherent pump rate of resonator 1; nonnegative.
    gamma2 : float
        Radiative decay rate of resonator 2; nonnegative.
    """

    delta: float
    j: float
    f: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        vals = (self.delta, self.j, self.f, self.gamma1, self.gamma2)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"parameters must be finite, got {vals}")
        if self.j <= 0.0:
            raise ValueError(f"tunneling element j must be > 0, got {self.j}")
        if self.f < 0.0:
            raise ValueError(f"drive amplitude f must be >= 0, got {self.f}")
        if self.gamma1 < 0.0 or self.gamma2 < 0.0:
            raise ValueError(
                f"rates must be >= 0, got gamma1={self.gamma1}, gamma2={self.gamma2}"
            )


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Non-Hermitian generator of the first-moment dynamics, i d|a>/dt = h|a> + |F>.

    Attributes
    ----------
    h : (2, 2) complex ndarray
        ``[[delta + i*gamma1/2, j/2], [j/2, delta - i*gamma2/2]]``.
    e1, e2 : complex
        The diagonal entries (complex mode frequencies).
    """

    h: np.ndarray
    e1: complex
    e2: complex


@dataclass(frozen=True)
class RegimeReport:
    """Stability/EP classification of a parameter point.

    ``boundary_distance`` is min(|gamma2-gamma1|, |j**2 - gamma1*gamma2|) / j**2,
    the dimensionless margin to the nearest singular manifold.
    """

    stable: bool
    on_ep_line: bool
    pt_symmetric: bool
    boundary_distance: float


@dataclass(frozen=True)
class HeffSpectrum:
    """Eigensystem of the effective Hamiltonian.

    Attributes
    ----------
    eigenvalues : (2,) complex ndarray
        ``mean +/- sqrt(disc)`` with disc = j**2/4 - (gamma1+gamma2)**2/16;
        both entries equal at an exceptional point.
    defective : bool
        True when the discriminant vanishes within tolerance; the matrix then
        has a single eigenvector (Jordan block), not two.
    eigenvectors : (n, 2) complex ndarray
        Rows are unit-norm eigenvectors with the first nonzero component made
        real positive; n = 1 when defective, else 2 (ordered like eigenvalues).
    """

    eigenvalues: np.ndarray
    defective: bool
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class StationaryGaussian:
    """Closed-form stationary characteristic-function data.

    chi(alpha) = exp(<q|alpha> - <alpha|q> + <alpha|m|alpha>) with
    <q|alpha> = sum_n conj(q_n) alpha_n and <alpha|m|alpha> = sum_nk
    conj(alpha_n) m[n,k] alpha_k.

    Attributes
    ----------
    m0 : float
        Overall scale j / ((gamma2-gamma1) * (j**2 - gamma1*gamma2)); positive
        inside the stability domain and divergent on its boundary.
    m : (2, 2) complex ndarray
        Hermitian, negative definite; -m - I is the thermal covariance.
    q : (2,) complex ndarray
        Stationary first moments <a_n>.
    """

    m0: float
    m: np.ndarray
    q: np.ndarray


def build_heff(p: SystemParams) -> EffectiveHamiltonian:
    """Assemble the effective non-Hermitian Hamiltonian for ``p``."""
    e1 = p.delta + 0.5j * p.gamma1
    e2 = p.delta - 0.5j * p.gamma2
    h = np.array([[e1, p.j / 2.0], [p.j / 2.0, e2]], dtype=complex)
    return EffectiveHamiltonian(h=h, e1=e1, e2=e2)


def heff_spectrum(p: SystemParams, tol: float = DEFAULT_TOL) -> HeffSpectrum:
    """Eigenvalues and eigenvectors of the effective Hamiltonian, in closed form.

    The eigenvalues are lam = delta + i(gamma1-gamma2)/4 +/- sqrt(disc) with the
    real discriminant disc = j**2/4 - (gamma1+gamma2)**2/16.  Defectiveness is
    decided from |disc| <= tol * j**2 (never from numerically computed
    eigenvector angles, which lose half the digits at an exceptional point).

    Parameters
    ----------
    p : SystemParams
    tol : float
        Relative discriminant tolerance for declaring the matrix defective.

    Returns
    -------
    HeffSpectrum
    """
    heff = build_heff(p)
    mean = 0.5 * (heff.e1 + heff.e2)  # delta + i(gamma1-gamma2)/4
    disc = p.j**2 / 4.0 - (p.gamma1 + p.gamma2) ** 2 / 16.0
    if abs(disc) <= tol * p.j**2:
        lam = mean
        vec = np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2.0)
        return HeffSpectrum(
            eigenvalues=np.array([lam, lam], dtype=complex),
            defective=True,
            eigenvectors=vec[np.newaxis, :],
        )
    root = np.emath.sqrt(disc)  # real or purely imaginary
    lams = np.array([mean + root, mean - root], dtype=complex)
    vecs = []
    for lam in lams:
        v = np.array([p.j / 2.0, lam - heff.e1], dtype=complex)
        v = v / np.linalg.norm(v)
        # first component j/2 > 0 stays real positive under the real rescaling
        vecs.append(v)
    return HeffSpectrum(
        eigenvalues=lams, defective=False, eigenvectors=np.array(vecs)
    )


def classify_regime(p: SystemParams, tol: float = DEFAULT_TOL) -> RegimeReport:
    """Classify ``p`` against the stability domain and the singular manifolds.

    Stability requires strictly gamma2 > gamma1 and j**2 > gamma1*gamma2 (both
    first and second moments then relax).  The exceptional-point line is
    gamma1 + gamma2 = 2 j within ``tol * j``; PT symmetry is gamma1 = gamma2
    within the same tolerance.
    """
    stable = (p.gamma2 > p.gamma1) and (p.j**2 > p.gamma1 * p.gamma2)
    on_ep = abs(p.gamma1 + p.gamma2 - 2.0 * p.j) <= tol * p.j
    pt = abs(p.gamma1 - p.gamma2) <= tol * p.j
    dist = min(abs(p.gamma2 - p.gamma1), abs(p.j**2 - p.gamma1 * p.gamma2)) / p.j**2
    return RegimeReport(
        stable=stable, on_ep_line=on_ep, pt_symmetric=pt, boundary_distance=dist
    )


def stationary_gaussian(p: SystemParams, tol: float = DEFAULT_TOL) -> StationaryGaussian:
    """Closed-form stationary Gaussian state of the driven gain-loss pair.

    Parameters
    ----------
    p : SystemParams
        Must lie strictly inside the stability domain, away from the singular
        manifolds by more than ``tol``.
    tol : float
        Relative margin below which the point is treated as singular.

    Returns
    -------
    StationaryGaussian

    Raises
    ------
    SingularParameters
        If |gamma2 - gamma1| <= tol*j or |j**2 - gamma1*gamma2| <= tol*j**2
        (the closed form divides by both factors), checked before stability.
    Unstable
        If the point lies outside the stability domain.
    """
    if abs(p.gamma2 - p.gamma1) <= tol * p.j:
        raise SingularParameters(
            f"gamma2 - gamma1 = {p.gamma2 - p.gamma1:g} is within tolerance of the "
            "PT-symmetric manifold; no stationary Gaussian exists there"
        )
    if abs(p.j**2 - p.gamma1 * p.gamma2) <= tol * p.j**2:
        raise SingularParameters(
            f"j**2 - gamma1*gamma2 = {p.j**2 - p.gamma1 * p.gamma2:g} is within "
            "tolerance of the singular manifold j**2 = gamma1*gamma2"
        )
    if not ((p.gamma2 > p.gamma1) and (p.j**2 > p.gamma1 * p.gamma2)):
        raise Unstable(
            "no normalizable stationary state outside the stability domain "
            f"(gamma1={p.gamma1}, gamma2={p.gamma2}, j={p.j})"
        )

    m0 = p.j / ((p.gamma2 - p.gamma1) * (p.j**2 - p.gamma1 * p.gamma2))
    gg = p.gamma1 * p.gamma2
    m = m0 * np.array(
        [[-p.j * p.gamma2, -1.0j * gg], [1.0j * gg, -p.j * p.gamma1]], dtype=complex
    )
    m[1, 1] -= 1.0

    # q solves h_eff q = -(0, f); the closed form below is that solution.
    e1 = p.delta + 0.5j * p.gamma1
    e2 = p.delta - 0.5j * p.gamma2
    denom = p.j**2 - 4.0 * e1 * e2
    if abs(denom) <= tol * p.j**2:
        raise SingularParameters(
            "effective Hamiltonian is singular (j**2 = 4 E1 E2); the stationary "
            "displacement is undefined"
        )
    q = (2.0 * p.f / denom) * np.array([-p.j, 2.0 * e1], dtype=complex)
    return StationaryGaussian(m0=m0, m=m, q=q)
