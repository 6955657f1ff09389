"""Brute-force oracle in a truncated two-mode Fock space.

Everything here is deliberately independent of the analytic layer: the
Lindblad generator is assembled as a sparse matrix acting on column-stacked
density matrices, steady states come from a preconditioned sparse solve, and
transients from Krylov evaluation of the matrix exponential.  Agreement with
the closed forms is therefore evidence, not tautology.

Conventions: cutoffs may differ per mode (the gain mode needs more levels);
dim = nc1 * nc2, joint index n1 * nc2 + n2 from the kron order
A1 = a (x) 1, A2 = 1 (x) a; vec() stacks columns, so
vec(A X B) = (B^T (x) A) vec(X).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CutoffTooSmall, DivergenceDetected, Unstable
from .model import SystemParams, build_heff, classify_regime
from .moments import ObservableSet, _snr_arrays

__all__ = [
    "FockConfig",
    "FockState",
    "CutoffScanReport",
    "ladder",
    "build_liouvillian",
    "steady_state",
    "evolve",
    "moment_ode_evolve",
    "intensity_doubling_onset",
    "cutoff_scan",
    "vacuum_state",
    "coherent_state",
    "displaced_thermal_state",
    "chi_from_state",
    "fock_observables",
    "save_density_csv",
    "load_density_csv",
]

CutoffLike = Union[int, tuple]


def _as_cutoffs(cutoff: CutoffLike) -> tuple[int, int]:
    if isinstance(cutoff, (tuple, list)):
        nc1, nc2 = int(cutoff[0]), int(cutoff[1])
    else:
        nc1 = nc2 = int(cutoff)
    if nc1 < 2 or nc2 < 2:
        raise ValueError(f"cutoffs must be at least 2 per mode, got {(nc1, nc2)}")
    return nc1, nc2


@dataclass(frozen=True)
class FockConfig:
    """Resource limits for the truncated-space oracle.

    Attributes
    ----------
    cutoff : int or (int, int)
        Fock levels retained per mode (occupations 0 .. cutoff-1).  The gain
        mode usually needs more levels than the drained mode.
    tail_tol : float
        Maximum admissible population in the top Fock layer of either mode.
    dim2_budget : int
        Hard ceiling on (nc1 * nc2)**2, the linear dimension of the
        Liouvillian.
    """

    cutoff: CutoffLike = 16
    tail_tol: float = 1e-6
    dim2_budget: int = 600_000

    def __post_init__(self):
        _as_cutoffs(self.cutoff)
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")

    @property
    def cutoffs(self) -> tuple[int, int]:
        return _as_cutoffs(self.cutoff)

    def check_budget(self) -> None:
        nc1, nc2 = self.cutoffs
        dim2 = (nc1 * nc2) ** 2
        if dim2 > self.dim2_budget:
            raise CutoffTooSmall(
                f"cutoffs {(nc1, nc2)} need a {dim2}-dimensional Liouvillian, "
                f"over the budget of {self.dim2_budget}"
            )

    def grown(self, step: int) -> "FockConfig":
        nc1, nc2 = self.cutoffs
        return FockConfig(
            cutoff=(nc1 + step, nc2 + step),
            tail_tol=self.tail_tol,
            dim2_budget=self.dim2_budget,
        )


@dataclass(frozen=True)
class FockState:
    """Dense two-mode density matrix on the truncated joint space."""

    rho: np.ndarray
    cutoffs: tuple[int, int]

    def __post_init__(self):
        nc1, nc2 = _as_cutoffs(self.cutoffs)
        object.__setattr__(self, "cutoffs", (nc1, nc2))
        dim = nc1 * nc2
        if self.rho.shape != (dim, dim):
            raise ValueError(
                f"density matrix shape {self.rho.shape} does not match "
                f"cutoffs {(nc1, nc2)} (expected {(dim, dim)})"
            )

    @property
    def dim(self) -> int:
        return self.cutoffs[0] * self.cutoffs[1]

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def populations(self) -> np.ndarray:
        """Joint occupation probabilities, shape (nc1, nc2)."""
        return np.diag(self.rho).real.reshape(self.cutoffs)

    def tail_mass(self) -> float:
        """Population in the highest retained Fock layer of either mode."""
        pop = self.populations()
        return float(pop[-1, :].sum() + pop[:, -1].sum() - pop[-1, -1])


@dataclass(frozen=True)
class CutoffScanReport:
    """Outcome of a convergence-in-cutoff check of the steady state.

    ``observables_hi`` and ``state_hi`` expose the larger run in full, so a
    caller who accepts the scan can consume its observables without solving
    again.
    """

    cutoffs_lo: tuple[int, int]
    cutoffs_hi: tuple[int, int]
    values_lo: dict = field(repr=False)
    values_hi: dict = field(repr=False)
    max_rel_diff: float
    tail_mass: float
    converged: bool
    observables_hi: "ObservableSet" = field(repr=False)
    state_hi: "FockState" = field(repr=False)


def ladder(cutoff: int) -> sp.csr_matrix:
    """Single-mode annihilation operator, a[n-1, n] = sqrt(n)."""
    n = np.arange(1, cutoff)
    return sp.diags(np.sqrt(n.astype(float)), offsets=1, format="csr", dtype=complex)


def _mode_operators(cutoffs: tuple[int, int]) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    nc1, nc2 = cutoffs
    a1 = sp.kron(ladder(nc1), sp.identity(nc2, dtype=complex), format="csr")
    a2 = sp.kron(sp.identity(nc1, dtype=complex), ladder(nc2), format="csr")
    return a1, a2


def _hamiltonian(p: SystemParams, cutoffs: tuple[int, int]) -> sp.csr_matrix:
    a1, a2 = _mode_operators(cutoffs)
    n1 = (a1.getH() @ a1).tocsr()
    n2 = (a2.getH() @ a2).tocsr()
    h = p.delta * (n1 + n2)
    h = h + 0.5 * p.j * (a2.getH() @ a1 + a1.getH() @ a2)
    h = h + p.f * (a2 + a2.getH())
    return h.tocsr()


def _dissipator(op: sp.csr_matrix, dim: int) -> sp.csr_matrix:
    """vec form of D[op] rho = op rho op+ - (op+ op rho + rho op+ op) / 2."""
    eye = sp.identity(dim, format="csr", dtype=complex)
    opd_op = (op.getH() @ op).tocsr()
    out = sp.kron(op.conjugate(), op)
    out = out - 0.5 * sp.kron(eye, opd_op)
    out = out - 0.5 * sp.kron(opd_op.transpose(), eye)
    return out.tocsr()


def build_liouvillian(p: SystemParams, cutoff: CutoffLike) -> sp.csr_matrix:
    """Sparse Lindblad generator on column-stacked density matrices.

    Gain on mode 1 at rate gamma1 (jump a1+), drain on mode 2 at rate gamma2
    (jump a2), coherent part from the driven beam-splitter Hamiltonian.
    """
    cutoffs = _as_cutoffs(cutoff)
    dim = cutoffs[0] * cutoffs[1]
    h = _hamiltonian(p, cutoffs)
    eye = sp.identity(dim, format="csr", dtype=complex)
    lv = -1.0j * (sp.kron(eye, h) - sp.kron(h.transpose(), eye))
    a1, a2 = _mode_operators(cutoffs)
    if p.gamma1 > 0:
        lv = lv + p.gamma1 * _dissipator(a1.getH().tocsr(), dim)
    if p.gamma2 > 0:
        lv = lv + p.gamma2 * _dissipator(a2, dim)
    return lv.tocsr()


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape((dim, dim), order="F")


def _trace_indices(dim: int) -> np.ndarray:
    return np.arange(dim) * (dim + 1)


def _steady_system(p: SystemParams, cutoffs: tuple[int, int]):
    """Liouvillian with the trace constraint spliced in as the first row."""
    dim = cutoffs[0] * cutoffs[1]
    lv = build_liouvillian(p, cutoffs).tocoo()
    keep = lv.row != 0
    rows = np.concatenate([lv.row[keep], np.zeros(dim, dtype=lv.row.dtype)])
    cols = np.concatenate([lv.col[keep], _trace_indices(dim)])
    data = np.concatenate([lv.data[keep], np.ones(dim, dtype=complex)])
    a_mat = sp.csc_matrix((data, (rows, cols)), shape=lv.shape)
    b = np.zeros(dim * dim, dtype=complex)
    b[0] = 1.0
    return a_mat, b


def _solve_steady(a_mat: sp.csc_matrix, b: np.ndarray) -> np.ndarray:
    """Direct-quality solve of the trace-constrained system.

    Incomplete-LU-preconditioned LGMRES is an order of magnitude cheaper in
    time and memory than a full sparse LU here; the full LU stays as a
    fallback for the rare preconditioner breakdown.
    """
    try:
        ilu = spla.spilu(a_mat, fill_factor=10.0, drop_tol=1e-4)
        precond = spla.LinearOperator(a_mat.shape, ilu.solve)
        x, info = spla.lgmres(
            a_mat, b, M=precond, rtol=1e-13, atol=1e-14, maxiter=400
        )
        if info == 0 and np.abs(a_mat @ x - b).max() < 1e-9:
            return x
    except RuntimeError:
        pass  # singular incomplete factor; fall through to the exact LU
    lu = spla.splu(a_mat)
    x = lu.solve(b)
    x += lu.solve(b - a_mat @ x)
    return x


def steady_state(p: SystemParams, config: FockConfig) -> FockState:
    """Unique steady state of the truncated Lindblad generator.

    Raises
    ------
    Unstable
        If the parameters are outside the stability region (the truncated
        problem would still have a solution, but a meaningless one).
    CutoffTooSmall
        If the budget is exceeded or the top Fock layer holds more than
        ``config.tail_tol`` population.
    """
    if not classify_regime(p).stable:
        raise Unstable(
            "no stationary state: need gamma2 > gamma1 and j**2 > gamma1*gamma2"
        )
    config.check_budget()
    cutoffs = config.cutoffs
    dim = cutoffs[0] * cutoffs[1]
    a_mat, b = _steady_system(p, cutoffs)
    x = _solve_steady(a_mat, b)

    rho = _unvec(x, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    state = FockState(rho=rho, cutoffs=cutoffs)
    tail = state.tail_mass()
    if tail > config.tail_tol:
        raise CutoffTooSmall(
            f"top Fock layer holds {tail:.3e} population at cutoffs "
            f"{cutoffs} (tolerance {config.tail_tol:.1e})"
        )
    return state


def _total_intensity(state: FockState) -> float:
    pop = state.populations()
    nc1, nc2 = state.cutoffs
    return float(
        pop.sum(axis=1) @ np.arange(nc1, dtype=float)
        + pop.sum(axis=0) @ np.arange(nc2, dtype=float)
    )


def intensity_doubling_onset(
    times: Sequence[float],
    intensities: Sequence[float],
    baseline_floor: float = 0.5,
) -> float | None:
    """First time the total intensity doubles past its baseline and keeps rising.

    The rule used by :func:`evolve` to flag divergence, factored out so that
    intensity records from any source (the moment transients, saved sweeps)
    can be judged identically: flag once the value exceeds twice
    ``max(intensities[0], baseline_floor)`` and has risen for three
    consecutive checkpoints.  Returns the first time of that streak, or None.
    """
    vals = [float(v) for v in intensities]
    if not vals:
        return None
    baseline = max(vals[0], baseline_floor)
    streak: list[tuple[float, float]] = []
    for t, v in zip(times, vals):
        rising = not streak or v > streak[-1][1]
        if v > 2.0 * baseline and rising:
            streak.append((float(t), v))
        else:
            streak = []
        if len(streak) >= 3:
            return streak[0][0]
    return None


def evolve(
    p: SystemParams,
    state0: FockState,
    times: Sequence[float],
    config: FockConfig | None = None,
    detect_divergence: bool = True,
) -> list[FockState]:
    """Propagate a truncated density matrix through the Lindblad dynamics.

    Returns one FockState per entry of ``times`` (which must be nonnegative
    and nondecreasing; the initial state is reused for t = 0).  Uses Krylov
    evaluation of exp(t L) on the stacked density matrix.

    When ``detect_divergence`` is set, raises DivergenceDetected once the
    total intensity has exceeded twice max(I(0), 0.5) and kept rising for
    three consecutive checkpoints; the exception carries the onset time.
    """
    if config is None:
        config = FockConfig(cutoff=state0.cutoffs)
    if config.cutoffs != state0.cutoffs:
        raise ValueError("config cutoffs do not match the initial state")
    config.check_budget()
    times = [float(t) for t in times]
    if any(t < 0 for t in times) or any(
        t1 > t2 for t1, t2 in zip(times, times[1:])
    ):
        raise ValueError("times must be nonnegative and nondecreasing")

    lv = build_liouvillian(p, config.cutoffs).tocsc()
    dim = state0.dim
    out: list[FockState] = []
    log_t = [0.0]
    log_i = [_total_intensity(state0)]

    v = _vec(state0.rho).astype(complex)
    t_prev = 0.0
    for t in times:
        if t > t_prev:
            v = spla.expm_multiply(lv * (t - t_prev), v)
            t_prev = t
        rho = _unvec(v, dim)
        rho = 0.5 * (rho + rho.conj().T)
        state = FockState(rho=rho, cutoffs=config.cutoffs)
        out.append(state)
        if detect_divergence:
            log_t.append(t)
            log_i.append(_total_intensity(state))
            onset = intensity_doubling_onset(log_t, log_i)
            if onset is not None:
                raise DivergenceDetected(
                    f"total intensity {log_i[-1]:.3g} kept doubling past the "
                    f"baseline {max(log_i[0], 0.5):.3g} from t = {onset:g}",
                    onset=onset,
                )
    return out


def moment_ode_evolve(
    p: SystemParams, a0, rho0, times: Sequence[float]
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact first- and second-moment transients by one 9x9 matrix exponential.

    State vector z = (a, conj(a), vec(rho), 1) with rho[n, k] = <a_k+ a_n>,
    propagated through the closed linear system

        da/dt   = -i h a - i |F>
        drho/dt = -i (h rho - rho h+) + i (|a(t)><F| - |F><a(t)|) + gamma1 |1><1|

    which follows from the master equation without any Gaussian assumption.
    Returns [(a(t), rho(t))] per requested time.
    """
    a0 = np.asarray(a0, dtype=complex).reshape(2)
    rho0 = np.asarray(rho0, dtype=complex).reshape(2, 2)
    h = build_heff(p).h
    f_vec = np.array([0.0, p.f], dtype=complex)
    eye2 = np.eye(2, dtype=complex)

    gen = np.zeros((9, 9), dtype=complex)
    gen[0:2, 0:2] = -1.0j * h
    gen[0:2, 8] = -1.0j * f_vec
    gen[2:4, 2:4] = 1.0j * np.conj(h)
    gen[2:4, 8] = 1.0j * f_vec
    # vec(h rho) = (1 (x) h) vec, vec(rho h+) = (conj(h) (x) 1) vec
    gen[4:8, 4:8] = -1.0j * (np.kron(eye2, h) - np.kron(np.conj(h), eye2))
    # i |a><F| depends linearly on a, -i |F><a| on conj(a)
    gen[4:8, 0:2] = 1.0j * np.kron(f_vec.reshape(2, 1), eye2)
    gen[4:8, 2:4] = -1.0j * np.kron(eye2, f_vec.reshape(2, 1))
    gen[4, 8] = p.gamma1  # gain feeds <a1+ a1>

    z0 = np.concatenate([a0, np.conj(a0), rho0.reshape(-1, order="F"), [1.0]])
    out = []
    for t in times:
        z = scipy.linalg.expm(gen * float(t)) @ z0
        out.append((z[0:2].copy(), z[4:8].reshape((2, 2), order="F").copy()))
    return out


def cutoff_scan(
    p: SystemParams, config: FockConfig, step: int = 4
) -> CutoffScanReport:
    """Compare steady-state observables at cutoffs and cutoffs + step.

    Convergence means every one of (I1, I2, D1, D2) moves by less than
    ``sqrt(config.tail_tol)`` in relative terms between the two runs and the
    larger run keeps its top-layer population under tail_tol.
    """
    relaxed_lo = FockConfig(
        cutoff=config.cutoffs, tail_tol=math.inf, dim2_budget=config.dim2_budget
    )
    hi = relaxed_lo.grown(step)  # judged on the report, not raised mid-scan
    hi.check_budget()
    obs_lo = fock_observables(steady_state(p, relaxed_lo))
    state_hi = steady_state(p, hi)
    obs_hi = fock_observables(state_hi)

    def pack(obs: ObservableSet) -> dict:
        return {
            "I1": obs.intensity[0],
            "I2": obs.intensity[1],
            "D1": obs.dispersion[0],
            "D2": obs.dispersion[1],
        }

    values_lo, values_hi = pack(obs_lo), pack(obs_hi)
    rel = max(
        abs(values_hi[k] - values_lo[k]) / max(abs(values_hi[k]), 1e-12)
        for k in values_lo
    )
    tail = state_hi.tail_mass()
    converged = rel < config.tail_tol**0.5 and tail <= config.tail_tol
    return CutoffScanReport(
        cutoffs_lo=relaxed_lo.cutoffs,
        cutoffs_hi=hi.cutoffs,
        values_lo=values_lo,
        values_hi=values_hi,
        max_rel_diff=float(rel),
        tail_mass=float(tail),
        converged=bool(converged),
        observables_hi=obs_hi,
        state_hi=state_hi,
    )


def vacuum_state(cutoff: CutoffLike) -> FockState:
    cutoffs = _as_cutoffs(cutoff)
    dim = cutoffs[0] * cutoffs[1]
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return FockState(rho=rho, cutoffs=cutoffs)


def _coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    if alpha == 0:
        vec = np.zeros(cutoff, dtype=complex)
        vec[0] = 1.0
        return vec
    n = np.arange(cutoff)
    log_fact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, cutoff)))])
    log_mag = n * np.log(abs(alpha)) - 0.5 * log_fact - 0.5 * abs(alpha) ** 2
    vec = np.exp(log_mag) * np.exp(1.0j * n * np.angle(alpha))
    return vec / np.linalg.norm(vec)


def coherent_state(alpha, cutoff: CutoffLike) -> FockState:
    """Product of two coherent states |alpha1> (x) |alpha2> (renormalized)."""
    alpha = np.asarray(alpha, dtype=complex).reshape(2)
    cutoffs = _as_cutoffs(cutoff)
    psi = np.kron(
        _coherent_vector(alpha[0], cutoffs[0]),
        _coherent_vector(alpha[1], cutoffs[1]),
    )
    return FockState(rho=np.outer(psi, psi.conj()), cutoffs=cutoffs)


def _displacement(alpha: complex, cutoff: int) -> np.ndarray:
    a = ladder(cutoff).toarray()
    return scipy.linalg.expm(alpha * a.conj().T - np.conj(alpha) * a)


def displaced_thermal_state(alpha, nbar, cutoff: CutoffLike) -> FockState:
    """Product of per-mode displaced thermal states D(alpha) rho_th D+(alpha)."""
    alpha = np.asarray(alpha, dtype=complex).reshape(2)
    nbar = np.asarray(nbar, dtype=float).reshape(2)
    if np.any(nbar < 0):
        raise ValueError("thermal occupations must be nonnegative")
    cutoffs = _as_cutoffs(cutoff)
    factors = []
    for al, nb, nc in zip(alpha, nbar, cutoffs):
        n = np.arange(nc)
        if nb == 0:
            pops = np.zeros(nc)
            pops[0] = 1.0
        else:
            pops = (nb / (1.0 + nb)) ** n / (1.0 + nb)
            pops /= pops.sum()  # renormalize the truncated geometric series
        d = _displacement(al, nc)
        factors.append(d @ np.diag(pops).astype(complex) @ d.conj().T)
    rho = np.kron(factors[0], factors[1])
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return FockState(rho=rho, cutoffs=cutoffs)


def chi_from_state(state: FockState, alpha) -> complex:
    """Antinormally ordered characteristic function from the density matrix.

    chi(alpha) = tr(rho e^{-alpha1* a1} e^{-alpha2* a2} e^{alpha1 a1+} e^{alpha2 a2+})

    evaluated with dense truncated exponentials; accurate while
    |alpha|**2 stays well below the cutoff.
    """
    alpha = np.asarray(alpha, dtype=complex).reshape(2)
    ops = []
    for al, nc in zip(alpha, state.cutoffs):
        a = ladder(nc).toarray()
        ops.append(
            scipy.linalg.expm(-np.conj(al) * a) @ scipy.linalg.expm(al * a.conj().T)
        )
    op = np.kron(ops[0], ops[1])
    return complex(np.trace(state.rho @ op))


def fock_observables(state: FockState) -> ObservableSet:
    """First moments, occupation matrix, intensities, dispersions, SNRs.

    The occupation matrix follows rho[n, k] = <a_k+ a_n> to match the
    analytic layer; dispersions are Var(a_n+ a_n).
    """
    a1, a2 = _mode_operators(state.cutoffs)
    modes = (a1, a2)
    rho = state.rho
    mean_a = np.array([np.trace(rho @ op.toarray()) for op in modes])
    second = np.empty((2, 2), dtype=complex)
    for n in range(2):
        for k in range(2):
            op = (modes[k].getH() @ modes[n]).toarray()
            second[n, k] = np.trace(rho @ op)
    intensity = second.diagonal().real.copy()
    dispersion = np.empty(2)
    pop = state.populations()
    for n in range(2):
        occ = np.arange(state.cutoffs[n], dtype=float)
        marg = pop.sum(axis=1 - n)
        dispersion[n] = marg @ occ**2 - intensity[n] ** 2
    snr1, snr2 = _snr_arrays(np.abs(mean_a), intensity, dispersion)
    return ObservableSet(
        mean_a=mean_a,
        rho=second,
        intensity=intensity,
        dispersion=dispersion,
        snr1=snr1,
        snr2=snr2,
    )


def save_density_csv(state: FockState, path) -> None:
    """Write nonnegligible density-matrix entries as (row, col, re, im) rows."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# cutoffs={state.cutoffs[0]},{state.cutoffs[1]}\n")
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        for i in range(state.dim):
            for k in range(state.dim):
                z = state.rho[i, k]
                if abs(z) > 1e-16:
                    writer.writerow([i, k, repr(float(z.real)), repr(float(z.imag))])


def load_density_csv(path) -> FockState:
    """Inverse of save_density_csv."""
    cutoffs = None
    entries = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "cutoffs":
                    parts = value.split(",")
                    cutoffs = (int(parts[0]), int(parts[1]))
                continue
            entries.append(line)
    if cutoffs is None:
        raise ValueError(f"{path} lacks the '# cutoffs=' header line")
    dim = cutoffs[0] * cutoffs[1]
    rho = np.zeros((dim, dim), dtype=complex)
    reader = csv.reader(entries)
    header = next(reader)
    if header[:4] != ["row", "col", "re", "im"]:
        raise ValueError(f"unexpected density CSV header {header!r}")
    for row in reader:
        if not row:
            continue
        i, k = int(row[0]), int(row[1])
        rho[i, k] = float(row[2]) + 1.0j * float(row[3])
    return FockState(rho=rho, cutoffs=cutoffs)
