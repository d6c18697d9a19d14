"""Named invariant suites for every module, runnable from the CLI.

Each suite re-verifies the structural identities of its module on seeded
random data and returns one CheckResult per declared invariant.  Seeds
are fixed so repeated runs are deterministic; suites are merged in
sorted order by name.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import purestate as ps
from .algebra import build_su_basis, from_coherence_vector, to_coherence_vector
from .contact import (ScalarField, contact_hamiltonian_field, darboux_chart,
                      generalized_contact_field, homomorphism_residual,
                      jacobi_bracket, nondegeneracy_determinant, reeb_field)
from .gkls import (apply_generator, build_model, decompose_field,
                   evaluate_component_fields, hamiltonian_gradient_field,
                   integrate, integrate_coherence_field)
from .integrators import rk4_path
from .mechanics import (analytic_energy_rate, coupled_damped_oscillators,
                        friction_system, hamiltonianity_criterion,
                        integrate_contact, representative_matrix, rlc_single)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float


def _result(name, residual, tol):
    return CheckResult(name=name, passed=bool(residual < tol),
                       residual=float(residual))


def _random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def _random_density(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _random_model(rng, n, n_jumps=2, scale=0.6):
    basis = build_su_basis(n)
    jumps = [scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
             for _ in range(n_jumps)]
    return build_model(basis, _random_hermitian(rng, n), jumps)


def algebra_suite():
    rng = np.random.default_rng(101)
    results = []
    gram_res, trace_res, jacobi_res, trip_res, affine_res = 0, 0, 0, 0, 0
    for n in (2, 3, 4):
        basis = build_su_basis(n)
        size = n * n - 1
        gram = np.einsum("jab,kba->jk", basis.tau, basis.tau).real
        gram_res = max(gram_res, float(np.max(np.abs(gram - np.eye(size)))))
        trace_res = max(trace_res, float(np.max(np.abs(
            np.einsum("jaa->j", basis.tau)))))
        cyc = np.einsum("mjk,rml->jklr", basis.c, basis.c)
        jacobi_res = max(jacobi_res, float(np.max(np.abs(
            cyc + cyc.transpose(1, 2, 0, 3) + cyc.transpose(2, 0, 1, 3)))))
        for _ in range(20):
            a = _random_hermitian(rng, n)
            a = a + (1.0 - np.trace(a).real) * np.eye(n) / n
            x = to_coherence_vector(a, basis)
            trip_res = max(trip_res, float(np.max(np.abs(
                from_coherence_vector(x, basis) - a))))
        obs = _random_hermitian(rng, n)
        a0 = np.trace(obs).real / n
        a_vec = np.einsum("jab,ba->j", basis.tau, obs).real
        for _ in range(10):
            x = rng.normal(size=size)
            direct = np.trace(obs @ from_coherence_vector(x, basis)).real
            affine_res = max(affine_res, abs(direct - (a0 + a_vec @ x)))
    results.append(_result("algebra/basis-orthonormality", gram_res, 1e-12))
    results.append(_result("algebra/basis-traceless", trace_res, 1e-12))
    results.append(_result("algebra/structure-jacobi-identity",
                           jacobi_res, 1e-10))
    results.append(_result("algebra/coherence-round-trip", trip_res, 1e-12))
    results.append(_result("algebra/expectation-affine", affine_res, 1e-12))
    return results


def gkls_suite():
    rng = np.random.default_rng(202)
    results = []
    trace_res, sum_res, cancel_res = 0.0, 0.0, 0.0
    for n in (2, 3):
        for _ in range(5):
            m = _random_model(rng, n)
            dec = decompose_field(m)
            sum_res = max(sum_res, float(np.max(np.abs(
                m.A - (dec.Hmat - dec.Vmat + dec.Kmat)))))
            for _ in range(20):
                rho = _random_density(rng, n)
                trace_res = max(trace_res, abs(np.trace(
                    apply_generator(m, rho))))
                x = rng.normal(size=n * n - 1)
                xh, yv, zk = evaluate_component_fields(m, dec, x)
                cancel_res = max(cancel_res, float(np.max(np.abs(
                    xh - yv + zk - (m.A @ x + m.B)))))
    results.append(_result("gkls/trace-preservation", trace_res, 1e-10))
    results.append(_result("gkls/decomposition-sum-identity", sum_res, 1e-12))
    results.append(_result("gkls/nonlinear-cancellation", cancel_res, 1e-12))

    basis = build_su_basis(3)
    m = build_model(basis, _random_hermitian(rng, 3))
    traj = integrate(m, _random_density(rng, 3), t_end=10.0, dt=5e-3)
    spectrum_res = float(np.max(np.abs(traj.spectra - traj.spectra[0])))
    results.append(_result("gkls/unitary-spectrum-invariance",
                           spectrum_res, 1e-8))

    psi = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi /= np.linalg.norm(psi)
    field = hamiltonian_gradient_field(basis, _random_hermitian(rng, 3),
                                       _random_hermitian(rng, 3, 0.5))
    traj = integrate_coherence_field(
        field, to_coherence_vector(np.outer(psi, psi.conj()), basis),
        2.0, 2e-3, basis)
    rank_res = float(np.max(np.abs(traj.ranks - 1)))
    results.append(_result("gkls/gradient-flow-rank-constancy",
                           rank_res, 0.5))

    m = _random_model(rng, 2, scale=0.5)
    traj = integrate(m, _random_density(rng, 2), t_end=5.0, dt=2e-3)
    pos_res = max(0.0, -float(np.min(traj.min_eigenvalues)))
    results.append(_result("gkls/positivity", pos_res, 1e-8))
    return results


def purestate_suite():
    rng = np.random.default_rng(303)
    results = []
    kaehler_res = 0.0
    for n in (2, 3):
        omega, g, j = ps.ambient_tensors(n)
        kaehler_res = max(kaehler_res, float(np.max(np.abs(j.T @ omega - g))))
    results.append(_result("purestate/kaehler-compatibility",
                           kaehler_res, 1e-14))

    tangency_res, residual_res, commute_res, rank_bad = 0.0, 0.0, 0.0, 0.0
    for n in (2, 3):
        for _ in range(10):
            a = _random_hermitian(rng, n)
            b = _random_hermitian(rng, n)
            psi = rng.normal(size=n) + 1j * rng.normal(size=n)
            psi /= np.linalg.norm(psi)
            z = ps.to_chart(psi)
            for vec in (ps.hamiltonian_field(a, z), ps.gradient_field(b, z),
                        ps.phase_field(z)):
                tangency_res = max(tangency_res, abs(float(z @ vec)))
            residual_res = max(residual_res,
                               max(ps.contact_residuals(a, b, z)))
            step = 1e-5
            dim = 2 * n
            jac_g = np.zeros((dim, dim))
            jac_p = np.zeros((dim, dim))
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = step
                jac_g[:, i] = (ps.gradient_field(b, z + e)
                               - ps.gradient_field(b, z - e)) / (2 * step)
                jac_p[:, i] = (ps.phase_field(z + e)
                               - ps.phase_field(z - e)) / (2 * step)
            bracket = jac_g @ ps.phase_field(z) - jac_p \
                @ ps.gradient_field(b, z)
            commute_res = max(commute_res, float(np.max(np.abs(bracket))))
            eta0, _ = ps.contact_form(z)
            stack = np.vstack([ps.pullback_omega0(z), eta0, z])
            if np.linalg.matrix_rank(stack, tol=1e-10) != dim:
                rank_bad = 1.0
    results.append(_result("purestate/sphere-tangency", tangency_res, 1e-12))
    results.append(_result("purestate/contact-residuals", residual_res, 1e-9))
    results.append(_result("purestate/gradient-projectability",
                           commute_res, 1e-9))
    results.append(_result("purestate/contact-volume-rank", rank_bad, 0.5))

    basis = build_su_basis(2)
    a = _random_hermitian(rng, 2, 0.7)
    b = _random_hermitian(rng, 2, 0.4)
    psi0 = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi0 /= np.linalg.norm(psi0)
    times, psis = ps.integrate_sphere_flow(a, b, psi0, 2.0, 2e-3)
    field = hamiltonian_gradient_field(basis, -a, -2.0 * b)
    traj = integrate_coherence_field(field, ps.project_to_bloch(psi0, basis),
                                     2.0, 2e-3, basis)
    proj_res = 0.0
    for idx in (len(times) // 2, len(times) - 1):
        bloch = ps.project_to_bloch(psis[idx], basis)
        proj_res = max(proj_res, float(np.max(np.abs(
            bloch - traj.points[idx]))))
    results.append(_result("purestate/projection-consistency",
                           proj_res, 1e-6))
    return results


def contact_suite():
    rng = np.random.default_rng(404)
    results = []
    chart = darboux_chart(1)

    def quadratic(seed_rng):
        c0 = seed_rng.normal()
        lin = seed_rng.normal(size=3)
        quad = seed_rng.normal(size=(3, 3))
        quad = (quad + quad.T) / 2
        return ScalarField(value=lambda p: c0 + lin @ p + 0.5 * p @ quad @ p,
                           gradient=lambda p: lin + quad @ p)

    reeb_res, eta_res, antisym_res, reduce_res, homo_res = 0, 0, 0, 0, 0
    nondeg_bad, exact_res = 0.0, 0.0
    for _ in range(20):
        point = rng.normal(size=3)
        xi = reeb_field(chart, point)
        w = np.asarray(chart.omega(point))
        reeb_res = max(reeb_res, float(np.max(np.abs(w.T @ xi))),
                       abs(chart.eta(point) @ xi - 1.0))
        if nondegeneracy_determinant(chart, point) <= 1e-12:
            nondeg_bad = 1.0
        exact_res = max(exact_res, float(np.max(np.abs(
            np.asarray(chart.omega(point)) - np.asarray(chart.deta(point))))))
        f = quadratic(rng)
        g = quadratic(rng)
        vec = contact_hamiltonian_field(chart, f, point)
        eta_res = max(eta_res, abs(chart.eta(point) @ vec - f(point)))
        antisym_res = max(antisym_res, abs(
            jacobi_bracket(chart, f, g, point)
            + jacobi_bracket(chart, g, f, point)))
        gen = generalized_contact_field(chart, f, f.grad, point)
        reduce_res = max(reduce_res, float(np.max(np.abs(
            gen - f(point) * xi))))
    for _ in range(5):
        point = 0.5 * rng.normal(size=3)
        homo_res = max(homo_res, homomorphism_residual(
            chart, quadratic(rng), quadratic(rng), point))
    results.append(_result("contact/reeb-defining-equations",
                           reeb_res, 1e-10))
    results.append(_result("contact/nondegeneracy", nondeg_bad, 0.5))
    results.append(_result("contact/exact-chart-consistency",
                           exact_res, 1e-12))
    results.append(_result("contact/eta-contraction", eta_res, 1e-10))
    results.append(_result("contact/jacobi-antisymmetry",
                           antisym_res, 1e-10))
    results.append(_result("contact/alpha-df-degeneracy", reduce_res, 1e-12))
    results.append(_result("contact/bracket-homomorphism", homo_res, 1e-5))
    return results


def mechanics_suite():
    rng = np.random.default_rng(505)
    results = []
    soundness_res = 0.0
    count = 0
    while count < 10:
        raw = rng.normal(size=(4, 4))
        lam = raw - raw.T
        if abs(np.linalg.det(lam)) < 1e-6:
            continue
        sym = rng.normal(size=(4, 4))
        g = lam @ (sym + sym.T)
        scale = np.linalg.norm(g, 2)
        res = hamiltonianity_criterion(g)
        bounds = np.array([scale ** (2 * k + 1) for k in range(4)])
        soundness_res = max(soundness_res, float(np.max(
            np.abs(res.odd_traces) / bounds)))
        count += 1
    results.append(_result("mechanics/odd-trace-soundness",
                           soundness_res, 1e-10))

    damped = hamiltonianity_criterion(representative_matrix(
        coupled_damped_oscillators(1.0, 2.0, 0.3, 0.7, 0.1, 0.2)))
    results.append(CheckResult(
        name="mechanics/damped-oscillators-not-hamiltonian",
        passed=damped.verdict == "not-hamiltonian",
        residual=float(abs(damped.odd_traces[0]))))

    dt = 1e-3
    sys = rlc_single(0.4, 1.2, 0.9)
    traj = integrate_contact(sys, ([1.0], [0.0], 0.0), 3.0, dt)
    measured = (-traj.energy[4:] + 8 * traj.energy[3:-1]
                - 8 * traj.energy[1:-3] + traj.energy[:-4]) / (12 * dt)
    analytic = np.array([analytic_energy_rate(sys, traj.q[i], traj.qd[i],
                                              traj.s[i])
                         for i in range(len(traj.times))])[2:-2]
    scale = max(1.0, float(np.max(np.abs(analytic))))
    results.append(_result("mechanics/energy-rate-identity",
                           float(np.max(np.abs(measured - analytic))) / scale,
                           1e-6))

    gamma = 0.5
    fric = friction_system(gamma)
    traj = integrate_contact(fric, ([0.0], [1.0], 0.0), 8.0, dt)
    e_l = traj.qd[:, 0] + gamma * traj.q[:, 0]
    results.append(_result("mechanics/friction-energy-conservation",
                           float(np.max(np.abs(e_l - e_l[0]))), 1e-8))
    mech_rate = (-traj.energy_mech[4:] + 8 * traj.energy_mech[3:-1]
                 - 8 * traj.energy_mech[1:-3]
                 + traj.energy_mech[:-4]) / (12 * dt)
    results.append(_result(
        "mechanics/friction-mechanical-dissipation",
        float(np.max(np.abs(mech_rate + gamma * traj.qd[2:-2, 0] ** 2))),
        1e-6))

    # projectable contact flow vs reduced second-order dynamics
    v_coeff, gam = 1.1, 0.3
    contact_sys = rlc_single(gam, 1.0, 1.0 / v_coeff)
    ctraj = integrate_contact(contact_sys, ([1.0], [0.0], 0.2), 4.0, dt)
    _, reduced = rk4_path(
        lambda y: np.array([y[1], -v_coeff * y[0] - gam * y[1]]),
        np.array([1.0, 0.0]), 4.0, dt)
    results.append(_result(
        "mechanics/contact-reduction-consistency",
        float(np.max(np.abs(ctraj.q[:, 0] - reduced[:, 0]))), 1e-8))
    return results


SUITES = {
    "algebra": algebra_suite,
    "contact": contact_suite,
    "gkls": gkls_suite,
    "mechanics": mechanics_suite,
    "purestate": purestate_suite,
}


def run_checks(module_filter=None):
    """Run the selected suites, merged deterministically by suite name."""
    names = sorted(SUITES)
    if module_filter is not None:
        if module_filter not in SUITES:
            raise KeyError(f"unknown module {module_filter!r}; "
                           f"choose from {names}")
        names = [module_filter]
    results = []
    for name in names:
        results.extend(SUITES[name]())
    return results
