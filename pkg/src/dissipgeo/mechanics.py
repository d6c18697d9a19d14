"""Classical dissipative mechanics.

Linear second-order systems m q'' + gamma q' + omega q = 0 with their
representative matrix G = [[0, I], [-m^-1 omega, -m^-1 gamma]], the
odd-trace Hamiltonianity criterion, and the bivector-span obstruction to
the existence of any Lagrangian.  Contact Euler-Lagrange dynamics on
(q, q', S):

    d/dt dL/dq'_j - dL/dq_j = -(dh/dS) D_j,
    S' = L - h(S)                          (D_j = dL/dq'_j)
    S' = q'_j dF/dq'_j - (E_L + h(S))      (D_j = dF/dq'_j, Rayleigh F)

with Lagrangian energy E_L = q'_j dL/dq'_j - L, plus single and coupled
RLC circuit builders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .integrators import rk4_path

HESSIAN_DET_TOL = 1e-10
MASS_DET_TOL = 1e-12


class ImplicitSystemError(RuntimeError):
    """Singular mass matrix or velocity Hessian; carries ``.state``."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class LinearSecondOrderSystem:
    """m q'' + gamma q' + omega q = 0 with numerical n x n matrices."""

    n: int
    m: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray


def coupled_damped_oscillators(omega1, omega2, gamma1, gamma2, kappa, delta):
    """Two oscillators with position coupling kappa and velocity coupling
    delta (unit masses)."""
    return LinearSecondOrderSystem(
        n=2, m=np.eye(2),
        gamma=np.array([[gamma1, delta], [delta, gamma2]], dtype=float),
        omega=np.array([[omega1 ** 2, kappa], [kappa, omega2 ** 2]],
                       dtype=float))


def representative_matrix(sys):
    """G with [[0, I], [-m^-1 omega, -m^-1 gamma]] block structure."""
    if abs(np.linalg.det(sys.m)) <= MASS_DET_TOL:
        raise ImplicitSystemError("singular mass matrix: implicit system")
    m_inv = np.linalg.inv(sys.m)
    n = sys.n
    g = np.zeros((2 * n, 2 * n))
    g[:n, n:] = np.eye(n)
    g[n:, :n] = -m_inv @ sys.omega
    g[n:, n:] = -m_inv @ sys.gamma
    return g


@dataclass(frozen=True)
class HamiltonianityResult:
    """Odd power traces of G and the resulting verdict.

    verdict is one of "hamiltonian-admissible", "not-hamiltonian" or
    "inconclusive-non-generic" (repeated eigenvalues void the criterion).
    """

    odd_traces: np.ndarray
    verdict: str
    generic: bool

    @property
    def admissible(self):
        return self.verdict == "hamiltonian-admissible"


def hamiltonianity_criterion(g, rel_tol=1e-9):
    """Constant-Poisson Hamiltonian description exists iff every odd power
    of the (generic) representative matrix is traceless."""
    g = np.asarray(g, dtype=float)
    dim = g.shape[0]
    if g.shape != (dim, dim) or dim % 2 != 0:
        raise ValueError("representative matrix must be square of even size")
    scale = float(np.linalg.norm(g, 2))
    eigs = np.linalg.eigvals(g)
    gaps = np.abs(eigs[:, None] - eigs[None, :])
    np.fill_diagonal(gaps, np.inf)
    generic = bool(np.min(gaps) > 1e-8 * max(scale, 1.0))
    traces = []
    power = g.copy()
    g2 = g @ g
    for _ in range(dim):
        traces.append(float(np.trace(power)))
        power = power @ g2
    traces = np.array(traces)
    bounds = np.array([max(scale, 1e-30) ** (2 * k + 1) for k in range(dim)])
    traceless = bool(np.all(np.abs(traces) < rel_tol * bounds))
    if not traceless:
        verdict = "not-hamiltonian"
    elif generic:
        verdict = "hamiltonian-admissible"
    else:
        verdict = "inconclusive-non-generic"
    return HamiltonianityResult(odd_traces=traces, verdict=verdict,
                                generic=generic)


def traceless_decomposition(g):
    """Split G = A + D with A traceless and the canonical remainder
    D = (Tr G / 2n) I; any other split differs by a traceless shift."""
    g = np.asarray(g, dtype=float)
    d = (np.trace(g) / g.shape[0]) * np.eye(g.shape[0])
    return g - d, d


def _antisym_basis_indices(dim):
    return [(i, j) for i in range(dim) for j in range(i + 1, dim)]


def _vectorize_antisym(mat, idx):
    return np.array([mat[i, j] for i, j in idx])


def bivector_span_dimension(g, tol=1e-10):
    """Dimension of the Lie-derivative span of the velocity bivectors.

    Seeds with d/dq'_i ^ d/dq'_j, iterates B -> G B + B G^T, and
    rank-counts inside the n(2n-1)-dimensional space of antisymmetric
    matrices.  A maximal span forces every invariant Lagrangian two-form
    to vanish, so no Lagrangian exists; for n = 1 maximality proves
    nothing and the verdict is "test-inapplicable".

    Returns (dimension, verdict) with verdict in {"lagrangian-possible",
    "no-lagrangian", "test-inapplicable"}.
    """
    g = np.asarray(g, dtype=float)
    dim = g.shape[0]
    n = dim // 2
    if not (np.allclose(g[:n, :n], 0.0, atol=1e-12)
            and np.allclose(g[:n, n:], np.eye(n), atol=1e-12)):
        raise ValueError("G lacks second-order [[0, I], [*, *]] structure")
    idx = _antisym_basis_indices(dim)
    max_dim = n * (2 * n - 1)
    seeds = []
    for i in range(n, dim):
        for j in range(i + 1, dim):
            b = np.zeros((dim, dim))
            b[i, j], b[j, i] = 1.0, -1.0
            seeds.append(b)
    if not seeds:
        # n = 1: there is no velocity-velocity pair, the constraint set is
        # vacuous and maximality proves nothing
        return 0, "test-inapplicable"
    vectors = []
    frontier = seeds
    scale = max(1.0, float(np.linalg.norm(g, 2)))
    for _ in range(2 * max_dim):
        vectors.extend(_vectorize_antisym(b, idx) for b in frontier)
        rank = np.linalg.matrix_rank(np.stack(vectors), tol=tol * scale)
        frontier = [g @ b + b @ g.T for b in frontier]
        new_rank = np.linalg.matrix_rank(
            np.stack(vectors + [_vectorize_antisym(b, idx)
                                for b in frontier]), tol=tol * scale)
        if new_rank == rank:
            break
    span = int(np.linalg.matrix_rank(np.stack(vectors), tol=tol * scale))
    if n == 1:
        verdict = "test-inapplicable"
    elif span == max_dim:
        verdict = "no-lagrangian"
    else:
        verdict = "lagrangian-possible"
    return span, verdict


def _zero_h(s):
    return 0.0


@dataclass(frozen=True)
class ContactLagrangianSystem:
    """Lagrangian with dissipation data on (q, q', S).

    dissipation selects the force covector D: "none" (conservative),
    "caldirola-kanai" (D = dL/dq') or "rayleigh" (D = dF/dq' from the
    velocity-dependent function rayleigh_f).  The velocity Hessian must
    stay invertible along trajectories.  domain_guard, when set, stops
    integration cleanly once it returns False.
    """

    n: int
    lagrangian: Callable
    d_l_dq: Callable
    d_l_dqd: Callable
    hess_qd: Callable
    mixed_hess: Optional[Callable] = None
    h: Callable = _zero_h
    dh_ds: Callable = _zero_h
    dissipation: str = "none"
    rayleigh_f: Optional[Callable] = None
    d_f_dqd: Optional[Callable] = None
    domain_guard: Optional[Callable] = None

    def __post_init__(self):
        if self.dissipation not in ("none", "caldirola-kanai", "rayleigh"):
            raise ValueError(f"unknown dissipation form {self.dissipation!r}")
        if self.dissipation == "rayleigh" and (self.rayleigh_f is None
                                               or self.d_f_dqd is None):
            raise ValueError("rayleigh dissipation needs rayleigh_f and d_f_dqd")

    def energy(self, q, qd):
        """Lagrangian energy E_L = q'_j dL/dq'_j - L."""
        return float(np.dot(qd, self.d_l_dqd(q, qd))
                     - self.lagrangian(q, qd))


def _mixed_hessian(sys, q, qd, step=1e-6):
    cols = []
    for k in range(sys.n):
        e = np.zeros(sys.n)
        e[k] = step
        cols.append((np.asarray(sys.d_l_dqd(q + e, qd))
                     - np.asarray(sys.d_l_dqd(q - e, qd))) / (2.0 * step))
    return np.stack(cols, axis=1)  # [j, k] = d^2 L / dq_k dq'_j


def _force_covector(sys, q, qd):
    if sys.dissipation == "none":
        return np.zeros(sys.n)
    if sys.dissipation == "caldirola-kanai":
        return np.asarray(sys.d_l_dqd(q, qd), dtype=float)
    return np.asarray(sys.d_f_dqd(q, qd), dtype=float)


def contact_el_field(sys, state):
    """(q', q'', S') at state = (q, q', S)."""
    q, qd, s = state
    q = np.atleast_1d(np.asarray(q, dtype=float))
    qd = np.atleast_1d(np.asarray(qd, dtype=float))
    hess = np.atleast_2d(np.asarray(sys.hess_qd(q, qd), dtype=float))
    if abs(np.linalg.det(hess)) <= HESSIAN_DET_TOL:
        raise ImplicitSystemError("singular velocity Hessian",
                                  state=(q.copy(), qd.copy(), s))
    if sys.mixed_hess is not None:
        mixed = np.atleast_2d(np.asarray(sys.mixed_hess(q, qd), dtype=float))
    else:
        mixed = _mixed_hessian(sys, q, qd)
    dh = float(sys.dh_ds(s))
    rhs = np.asarray(sys.d_l_dq(q, qd), dtype=float) - mixed @ qd \
        - dh * _force_covector(sys, q, qd)
    qdd = np.linalg.solve(hess, rhs)
    lag = float(sys.lagrangian(q, qd))
    if sys.dissipation == "rayleigh":
        s_dot = float(qd @ np.asarray(sys.d_f_dqd(q, qd), dtype=float)) \
            - (sys.energy(q, qd) + float(sys.h(s)))
    else:
        s_dot = lag - float(sys.h(s))
    return qd, qdd, s_dot


@dataclass(frozen=True)
class ContactTrajectory:
    times: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    s: np.ndarray
    energy: np.ndarray       # Lagrangian energy E_L
    energy_mech: np.ndarray  # |q'|^2 / 2
    stopped_early: bool = False


def analytic_energy_rate(sys, q, qd, s):
    """-(dh/dS) q'_j D_j, the exact rate of the Lagrangian energy."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    qd = np.atleast_1d(np.asarray(qd, dtype=float))
    return -float(sys.dh_ds(s)) * float(qd @ _force_covector(sys, q, qd))


def integrate_contact(sys, state0, t_end, dt=1e-3):
    """RK4 trajectory of the contact Euler-Lagrange field with per-step
    Lagrangian-energy diagnostics."""
    q0, qd0, s0 = state0
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    qd0 = np.atleast_1d(np.asarray(qd0, dtype=float))
    y0 = np.concatenate([q0, qd0, [float(s0)]])
    n = sys.n

    def unpack(y):
        return y[:n], y[n:2 * n], y[2 * n]

    def field(y):
        q, qd, s = unpack(y)
        dq, dqd, ds = contact_el_field(sys, (q, qd, s))
        return np.concatenate([dq, dqd, [ds]])

    guard = None
    if sys.domain_guard is not None:
        guard = lambda y: bool(sys.domain_guard(y[:n], y[n:2 * n]))
    result = rk4_path(field, y0, t_end, dt, guard=guard)
    stopped = False
    if guard is None:
        times, states = result
    else:
        times, states, stopped = result
    qs = states[:, :n]
    qds = states[:, n:2 * n]
    ss = states[:, 2 * n]
    energy = np.array([sys.energy(qs[i], qds[i]) for i in range(len(times))])
    e_mech = 0.5 * np.einsum("ij,ij->i", qds, qds)
    return ContactTrajectory(times=times, q=qs, qd=qds, s=ss, energy=energy,
                             energy_mech=e_mech, stopped_early=stopped)


def projectability_check(sys, s_samples=None, tol=1e-10, step=1e-4):
    """True iff the contact dynamics projects to a second-order flow on
    (q, q'): h must be linear in S (the force and S' then decouple from
    S); the dissipation one-forms here never depend on S by construction.
    """
    if s_samples is None:
        s_samples = np.linspace(-2.0, 2.0, 10)
    for s in s_samples:
        second = (float(sys.dh_ds(s + step)) - float(sys.dh_ds(s - step))) \
            / (2.0 * step)
        if abs(second) > tol:
            return False
    return True


def rlc_single(resistance, inductance, capacitance):
    """Series RLC circuit as a contact Lagrangian system.

    L = (1/2) L_ind I'^2 - I^2 / (2C) with Caldirola-Kanai dissipation
    h(S) = (R / L_ind) S, so the flow solves L_ind I'' + R I' + I/C = 0.
    """
    if inductance <= 0 or capacitance <= 0:
        raise ValueError("need inductance > 0 and capacitance > 0")
    if resistance < 0:
        raise ValueError("need resistance >= 0")
    l_ind, cap = float(inductance), float(capacitance)
    rate = float(resistance) / l_ind
    return ContactLagrangianSystem(
        n=1,
        lagrangian=lambda q, qd: 0.5 * l_ind * qd[0] ** 2
        - q[0] ** 2 / (2.0 * cap),
        d_l_dq=lambda q, qd: np.array([-q[0] / cap]),
        d_l_dqd=lambda q, qd: np.array([l_ind * qd[0]]),
        hess_qd=lambda q, qd: np.array([[l_ind]]),
        mixed_hess=lambda q, qd: np.zeros((1, 1)),
        h=lambda s: rate * s,
        dh_ds=lambda s: rate,
        dissipation="caldirola-kanai")


def rlc_coupled(l1, l2, c1, c2, r1, r2, r_coupling):
    """Two RLC circuits coupled in parallel through a resistance.

    L = (1/2) I'^T L I' - (1/2) I^T C I with L = diag(L1, L2),
    C = diag(1/C1, 1/C2), Rayleigh function F = (1/2) I'^T R I' for
    R = [[R1, R], [R, R2]] and h(S) = S, giving Kirchhoff's equations
    L I'' + R I' + C I = 0; the circuits decouple as R -> 0.
    """
    if l1 <= 0 or l2 <= 0 or c1 <= 0 or c2 <= 0:
        raise ValueError("inductances and capacitances must be positive")
    l_mat = np.diag([float(l1), float(l2)])
    c_mat = np.diag([1.0 / float(c1), 1.0 / float(c2)])
    r_mat = np.array([[float(r1), float(r_coupling)],
                      [float(r_coupling), float(r2)]])
    return ContactLagrangianSystem(
        n=2,
        lagrangian=lambda q, qd: 0.5 * float(qd @ l_mat @ qd)
        - 0.5 * float(q @ c_mat @ q),
        d_l_dq=lambda q, qd: -(c_mat @ q),
        d_l_dqd=lambda q, qd: l_mat @ qd,
        hess_qd=lambda q, qd: l_mat,
        mixed_hess=lambda q, qd: np.zeros((2, 2)),
        h=lambda s: s,
        dh_ds=lambda s: 1.0,
        dissipation="rayleigh",
        rayleigh_f=lambda q, qd: 0.5 * float(qd @ r_mat @ qd),
        d_f_dqd=lambda q, qd: r_mat @ qd)


def friction_system(gamma):
    """Local Lagrangian L = q' ln q' - gamma q for q'' = -gamma q'.

    Valid on the chart q' > 0 only; integration stops cleanly if the
    velocity falls below 1e-10.  Conserves E_L = q' + gamma q while the
    mechanical energy q'^2 / 2 decays at rate -gamma q'^2.
    """
    gamma = float(gamma)
    return ContactLagrangianSystem(
        n=1,
        lagrangian=lambda q, qd: qd[0] * np.log(qd[0]) - gamma * q[0],
        d_l_dq=lambda q, qd: np.array([-gamma]),
        d_l_dqd=lambda q, qd: np.array([np.log(qd[0]) + 1.0]),
        hess_qd=lambda q, qd: np.array([[1.0 / qd[0]]]),
        mixed_hess=lambda q, qd: np.zeros((1, 1)),
        domain_guard=lambda q, qd: qd[0] > 1e-10)
