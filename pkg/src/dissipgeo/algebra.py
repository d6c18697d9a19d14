"""Operator algebra for n-level systems.

Builds orthonormal traceless Hermitian bases (generalized Gell-Mann
matrices scaled to Tr(tau_j tau_k) = delta_jk, so the dual basis equals
the basis itself), their antisymmetric/symmetric structure tensors, and
the coherence-vector chart xi = I/n + x^j tau_j on trace-one Hermitian
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-12


class InvalidDimensionError(ValueError):
    """Basis requested for a dimension below 2."""


class TraceMismatchError(ValueError):
    """A matrix expected to have unit trace does not; carries ``.trace``."""

    def __init__(self, trace):
        super().__init__(f"expected unit trace, got {trace!r}")
        self.trace = trace


class BasisCorruptionError(RuntimeError):
    """Structure constants came out non-real beyond tolerance."""


def is_hermitian(a, tol=HERMITICITY_TOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and \
        float(np.max(np.abs(a - a.conj().T))) < tol


@dataclass(frozen=True)
class SuBasis:
    """Orthonormal traceless Hermitian basis of an n-level system.

    tau has shape (n**2 - 1, n, n).  The structure tensors are indexed
    with the lower index first:

        c[l, j, k] = i Tr([tau_j, tau_k] tau_l)   (antisymmetric in j, k)
        d[l, j, k] = Tr({tau_j, tau_k} tau_l)     (symmetric in j, k)

    Immutable after construction; safe to share between threads.
    """

    n: int
    tau: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def size(self):
        return self.n * self.n - 1


def _gell_mann_stack(n):
    """Symmetric pairs, antisymmetric pairs, then diagonals, each
    lexicographic in (row, col); all with Tr(tau_j tau_k) = delta_jk."""
    mats = []
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = m[k, j] = inv_sqrt2
            mats.append(m)
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = -1j * inv_sqrt2
            m[k, j] = 1j * inv_sqrt2
            mats.append(m)
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1.0
        diag[l] = -float(l)
        mats.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1.0)))
    return np.stack(mats)


def structure_constants(basis):
    """Structure tensors (c, d) of an orthonormal traceless basis.

    Accepts a SuBasis (returns the cached tensors) or a raw (N, n, n)
    stack of basis matrices.  Raises BasisCorruptionError if the
    imaginary residue of either tensor exceeds 1e-12.
    """
    if isinstance(basis, SuBasis):
        return basis.c, basis.d
    tau = np.asarray(basis)
    # T[j, k, l] = Tr(tau_j tau_k tau_l)
    t = np.einsum("jab,kbc,lca->jkl", tau, tau, tau)
    c_raw = 1j * (t - t.transpose(1, 0, 2))
    d_raw = t + t.transpose(1, 0, 2)
    residue = max(float(np.max(np.abs(c_raw.imag))),
                  float(np.max(np.abs(d_raw.imag))))
    if residue > IMAG_RESIDUE_TOL:
        raise BasisCorruptionError(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:.0e}")
    # reorder to [l, j, k]
    return (np.ascontiguousarray(c_raw.real.transpose(2, 0, 1)),
            np.ascontiguousarray(d_raw.real.transpose(2, 0, 1)))


def build_su_basis(n):
    """Orthonormal traceless Hermitian basis of su(n) with cached
    structure constants.  n = 2 gives the Pauli matrices over sqrt(2)."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidDimensionError(f"need integer n >= 2, got {n!r}")
    tau = _gell_mann_stack(int(n))
    c, d = structure_constants(tau)
    return SuBasis(n=int(n), tau=tau, c=c, d=d)


def to_coherence_vector(a, basis):
    """Coherence vector x^j = Tr(a tau_j) of a trace-one Hermitian matrix."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (basis.n, basis.n):
        raise ValueError(f"shape {a.shape} does not match n={basis.n}")
    trace = complex(np.trace(a))
    if abs(trace - 1.0) > TRACE_TOL:
        raise TraceMismatchError(trace)
    return np.einsum("jab,ba->j", basis.tau, a).real


def from_coherence_vector(x, basis):
    """Reconstruct xi = I/n + x^j tau_j."""
    x = np.asarray(x, dtype=float)
    if x.shape != (basis.size,):
        raise ValueError(f"coherence vector length {x.shape} != {basis.size}")
    return np.eye(basis.n, dtype=complex) / basis.n \
        + np.einsum("j,jab->ab", x, basis.tau)


def expectation(a, x, basis):
    """Tr(a xi(x)), the expectation value of observable a at the point x.

    Equals Tr(a)/n + a_j x^j with a_j = Tr(a tau_j).
    """
    a = np.asarray(a, dtype=complex)
    if a.shape != (basis.n, basis.n):
        raise ValueError(f"shape {a.shape} does not match n={basis.n}")
    return float(np.trace(a @ from_coherence_vector(x, basis)).real)


def min_eigenvalue(a):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(np.asarray(a))[0])


def assert_density_matrix(rho, basis=None, psd_tol=1e-10):
    """Validate trace one, Hermiticity and positive semidefiniteness."""
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > TRACE_TOL:
        raise TraceMismatchError(trace)
    if min_eigenvalue(rho) < -psd_tol:
        raise ValueError(f"matrix has eigenvalue below -{psd_tol:.0e}")
    return rho
