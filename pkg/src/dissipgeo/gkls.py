"""GKLS dynamics on the coherence-vector chart.

The generator acts on density matrices as

    L(rho) = i[rho, H] + sum_j v_j rho v_j^dag - (1/2){V, rho},

with V = sum_j v_j^dag v_j.  The half-anticommutator prefactor is the
unique choice making Tr L(rho) = 0, which fixes the normalization of the
"2 rho (.) V" damping term once and for all.  Through xi = I/n + x^j tau_j
the generator becomes the affine field dx/dt = A x + B, which splits into
Hamiltonian, Gradient and Jump parts A = Hmat - Vmat + Kmat:

    Hmat[j, l] = Tr(i[tau_l, H] tau_j)        (isospectral rotation)
    Vmat[j, l] = Tr({V, tau_l} tau_j) / 2     (rank-preserving damping)
    Kmat[j, l] = Tr(sum_k v_k tau_l v_k^dag tau_j)
    B[j]       = (Tr(sum_k v_k v_k^dag tau_j) - Tr(V tau_j)) / n.

The Gradient and Jump *vector fields* carry an extra nonlinear term
-e_V(x) x with e_V(x) = Tr V / n + V_j x^j; the two copies cancel in the
sum X_H - Y_V + Z_K, leaving the affine field.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .algebra import (SuBasis, build_su_basis, is_hermitian,
                      to_coherence_vector)
from .integrators import rk4_path

RANK_EIG_TOL = 1e-9


class UnsupportedModelError(ValueError):
    """Operation requires a homogeneous (B = 0) affine field."""


@dataclass(frozen=True)
class GklsModel:
    """Hamiltonian, jump operators and the derived affine field (A, B)."""

    basis: SuBasis
    H: np.ndarray
    jumps: tuple
    V: np.ndarray
    A: np.ndarray
    B: np.ndarray

    @property
    def n(self):
        return self.basis.n


@dataclass(frozen=True)
class FieldDecomposition:
    """Hamiltonian/Gradient/Jump matrices with A = Hmat - Vmat + Kmat."""

    Hmat: np.ndarray
    Vmat: np.ndarray
    Kmat: np.ndarray
    B: np.ndarray
    V_vec: np.ndarray      # Tr(V tau_j)
    calV_vec: np.ndarray   # Tr(sum_k v_k v_k^dag tau_j)


@dataclass(frozen=True)
class Trajectory:
    """Coherence-vector path with per-point spectral diagnostics."""

    times: np.ndarray
    points: np.ndarray
    traces: np.ndarray
    min_eigenvalues: np.ndarray
    spectra: np.ndarray
    ranks: np.ndarray


def _apply_generator_matrix(H, jumps, V, rho):
    out = 1j * (rho @ H - H @ rho)
    for v in jumps:
        out = out + v @ rho @ v.conj().T
    out = out - 0.5 * (V @ rho + rho @ V)
    return out


def apply_generator(model, rho):
    """L(rho) for a density (or any trace-one Hermitian) matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.n, model.n):
        raise ValueError(f"shape {rho.shape} does not match n={model.n}")
    return _apply_generator_matrix(model.H, model.jumps, model.V, rho)


def build_affine_field(basis, H, jumps, V):
    """(A, B) of the affine field by pushing L through the chart.

    L is linear in rho, so B is the image of I/n and the columns of A are
    the images of the basis elements.  This route is independent of the
    structure-constant formulas, which the decomposition tests then have
    to reproduce.
    """
    size = basis.size
    b_mat = _apply_generator_matrix(H, jumps, V,
                                    np.eye(basis.n, dtype=complex) / basis.n)
    B = np.einsum("jab,ba->j", basis.tau, b_mat).real
    A = np.empty((size, size))
    for l in range(size):
        col = _apply_generator_matrix(H, jumps, V, basis.tau[l])
        A[:, l] = np.einsum("jab,ba->j", basis.tau, col).real
    return A, B


def build_model(basis, H, jumps=()):
    """Assemble a GklsModel; warns when the jump count exceeds n^2 - 1."""
    H = np.asarray(H, dtype=complex)
    if not is_hermitian(H):
        raise ValueError("H must be Hermitian")
    if H.shape != (basis.n, basis.n):
        raise ValueError(f"H shape {H.shape} does not match n={basis.n}")
    jumps = tuple(np.asarray(v, dtype=complex) for v in jumps)
    for v in jumps:
        if v.shape != (basis.n, basis.n):
            raise ValueError(f"jump shape {v.shape} does not match n={basis.n}")
    if len(jumps) > basis.size:
        warnings.warn(f"{len(jumps)} jump operators exceed n^2 - 1 = "
                      f"{basis.size}; proceeding anyway", stacklevel=2)
    V = np.zeros((basis.n, basis.n), dtype=complex)
    for v in jumps:
        V = V + v.conj().T @ v
    A, B = build_affine_field(basis, H, jumps, V)
    return GklsModel(basis=basis, H=H, jumps=jumps, V=V, A=A, B=B)


def phase_damping_model(gamma):
    """Qubit phase damping: H = 0, single jump sqrt(gamma) sigma_3.

    The affine field is A = diag(-2 gamma, -2 gamma, 0), B = 0: the two
    off-diagonal coherences decay while populations stand still.
    """
    if gamma <= 0:
        raise ValueError(f"need gamma > 0, got {gamma}")
    basis = build_su_basis(2)
    sigma3 = np.diag([1.0, -1.0]).astype(complex)
    return build_model(basis, np.zeros((2, 2)), [np.sqrt(gamma) * sigma3])


def decompose_field(model):
    """Hamiltonian/Gradient/Jump split of the affine field.

    Hmat is the pushforward of i[., H]; Vmat is the full half-
    anticommutator matrix with V (its Tr(V)/n multiple of the identity is
    what makes A = Hmat - Vmat + Kmat hold entrywise).
    """
    tau = model.basis.tau
    comm = 1j * (np.einsum("lab,bc->lac", tau, model.H)
                 - np.einsum("ab,lbc->lac", model.H, tau))
    Hmat = np.einsum("lab,jba->jl", comm, tau).real
    anti = np.einsum("ab,lbc->lac", model.V, tau) \
        + np.einsum("lab,bc->lac", tau, model.V)
    Vmat = 0.5 * np.einsum("lab,jba->jl", anti, tau).real
    ktau = np.zeros_like(tau)
    cal = np.zeros((model.n, model.n), dtype=complex)
    for v in model.jumps:
        ktau = ktau + np.einsum("ab,lbc,cd->lad", v, tau, v.conj().T)
        cal = cal + v @ v.conj().T
    Kmat = np.einsum("lab,jba->jl", ktau, tau).real
    V_vec = np.einsum("jab,ba->j", tau, model.V).real
    calV_vec = np.einsum("jab,ba->j", tau, cal).real
    B = (calV_vec - V_vec) / model.n
    return FieldDecomposition(Hmat=Hmat, Vmat=Vmat, Kmat=Kmat, B=B,
                              V_vec=V_vec, calV_vec=calV_vec)


def expectation_of_v(model, dec, x):
    """e_V(x) = Tr V / n + V_j x^j."""
    return float(np.trace(model.V).real) / model.n + float(dec.V_vec @ x)


def evaluate_component_fields(model, dec, x):
    """(X_H, Y_V, Z_K) at a coherence vector x.

    X_H - Y_V + Z_K = A x + B: the -e_V(x) x terms of Y and Z cancel.
    """
    x = np.asarray(x, dtype=float)
    e_v = expectation_of_v(model, dec, x)
    xh = dec.Hmat @ x
    yv = dec.Vmat @ x + dec.V_vec / model.n - e_v * x
    zk = dec.Kmat @ x + dec.calV_vec / model.n - e_v * x
    return xh, yv, zk


def hamiltonian_gradient_field(basis, H, V):
    """Closure for the jump-free field X_H - Y_V at coherence vectors.

    Takes the H and V matrices directly (V need not come from jump
    operators, nor be positive), which is what the pure-state projection
    comparisons need.
    """
    H = np.asarray(H, dtype=complex)
    V = np.asarray(V, dtype=complex)
    tau = basis.tau
    comm = 1j * (np.einsum("lab,bc->lac", tau, H)
                 - np.einsum("ab,lbc->lac", H, tau))
    Hmat = np.einsum("lab,jba->jl", comm, tau).real
    anti = np.einsum("ab,lbc->lac", V, tau) + np.einsum("lab,bc->lac", tau, V)
    Vmat = 0.5 * np.einsum("lab,jba->jl", anti, tau).real
    V_vec = np.einsum("jab,ba->j", tau, V).real
    tr_v = float(np.trace(V).real)
    n = basis.n

    def field(x):
        e_v = tr_v / n + V_vec @ x
        return Hmat @ x - (Vmat @ x + V_vec / n - e_v * x)

    return field


def _diagnostics(basis, points):
    xi = np.eye(basis.n, dtype=complex) / basis.n \
        + np.einsum("tj,jab->tab", points, basis.tau)
    spectra = np.linalg.eigvalsh(xi)
    traces = np.einsum("taa->t", xi).real
    return traces, spectra[:, 0], spectra, \
        (spectra >= RANK_EIG_TOL).sum(axis=1)


def integrate_coherence_field(field, x0, t_end, dt, basis):
    """RK4 a coherence-vector field and attach spectral diagnostics."""
    times, points = rk4_path(field, np.asarray(x0, dtype=float), t_end, dt)
    traces, min_eig, spectra, ranks = _diagnostics(basis, points)
    return Trajectory(times=times, points=points, traces=traces,
                      min_eigenvalues=min_eig, spectra=spectra, ranks=ranks)


def integrate(model, rho0, t_end, dt=1e-3):
    """RK4 trajectory of dx/dt = A x + B from a density matrix."""
    x0 = to_coherence_vector(np.asarray(rho0, dtype=complex), model.basis)
    a, b = model.A, model.B
    return integrate_coherence_field(lambda x: a @ x + b, x0, t_end, dt,
                                     model.basis)


def pulled_back_bracket(model, j, k, tau_t, x):
    """Flow pullback of the Poisson bivector Lambda^{jk}(x) = c^{jk}_l x^l.

    For the linear flow Phi_t = exp(A t) the pullback at x is

        [exp(-A t)]^j_p [exp(-A t)]^k_q c^{pq}_l [exp(A t) x]^l,

    which requires B = 0.  As t grows some entries decay and others
    survive or grow; the *relative* bracket structure degenerates, which
    is the algebra-contraction phenomenon.
    """
    if float(np.max(np.abs(model.B))) > 1e-12:
        raise UnsupportedModelError(
            "closed-form pullback needs a homogeneous field (B = 0)")
    x = np.asarray(x, dtype=float)
    fwd = expm(model.A * tau_t)
    back = expm(-model.A * tau_t)
    lam = np.tensordot(fwd @ x, model.basis.c, axes=(0, 0))
    return float(back[j] @ lam @ back[k])


def asymptotic_pulled_back_bracket(model, j, k, x, tau_probe=40.0):
    """Value of the pulled-back bracket at a large probe time."""
    return pulled_back_bracket(model, j, k, tau_probe, x)
