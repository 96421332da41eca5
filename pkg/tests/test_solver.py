import math
import warnings

import numpy as np
import pytest

from beamwaves.errors import DomainError, NonConvergenceError
from beamwaves.params import TorusGeometry
from beamwaves.exact import Radical
from beamwaves.resonance import bifurcation_matrix, critical_frequencies
from beamwaves.solver import (
    Branch,
    PathSpec,
    RangeContext,
    WaveSolution,
    bifurcation_residual,
    continue_branch,
    cubic_damping_oracle,
    full_residual,
    reduced_residual_1d,
    solve_range,
    solve_wave,
)
from beamwaves.spectral import FourierField, apply_linear, kernel_field, nonlinearity, sobolev_norm


def star(params, geom):
    return critical_frequencies(params, geom).omega_star


def test_range_trivial_and_axis(example):
    params, geom = example
    w0 = star(params, geom)
    assert solve_range((0, 0), w0, 0, 0, params, geom).max_abs() == 0
    w = solve_range((0, 1e-2), w0, 0, 0, params, geom)
    N = w.N
    J1 = np.arange(-N, N + 1)[:, None] * np.ones((1, 2 * N + 1))
    assert np.max(np.abs(w.coeffs[J1 != 0])) < 1e-12
    assert w.max_abs() > 0


def test_range_norm_scales_cubically(example):
    params, geom = example
    w0 = star(params, geom)
    rhos = [1e-3, 10 ** -2.5, 1e-2]
    norms = [sobolev_norm(solve_range((r, r), w0, 0, 0, params, geom), 0) for r in rhos]
    slope = np.polyfit(np.log(rhos), np.log(norms), 1)[0]
    assert abs(slope - 3) < 0.1


def test_bifurcation_residual_at_origin(example):
    params, geom = example
    om = star(params, geom)
    r = bifurcation_residual((0, 0), om, 0, 0, FourierField(16), params, geom)
    assert abs(r[0]) < 1e-14 and abs(r[2]) < 1e-14
    # the difference quotient at h = 1e-6 leaves the cubic term h^2 * 6 w_k^3 j_k^3
    h2 = 1e-12
    assert abs(r[1]) <= 2 * h2 * 6 * om[0] ** 3
    assert abs(r[3]) <= 2 * h2 * 6 * (2 * om[1]) ** 3


def _quadrature_G(rho, omega, params, jstar, n=256):
    # independent route: cubic of the kernel velocity projected by a plain grid mean
    t = 2 * np.pi * np.arange(n) / n
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    j1, j2 = jstar
    ut = -2 * rho[0] * omega[0] * j1 * np.sin(j1 * T1) - 2 * rho[1] * omega[1] * j2 * np.sin(j2 * T2)
    F = params.lam * ut ** 3
    return (np.mean(F * np.cos(j1 * T1)), np.mean(F * np.sin(j1 * T1)),
            np.mean(F * np.cos(j2 * T2)), np.mean(F * np.sin(j2 * T2)))


def test_cubic_projection_leading_order(example):
    params, geom = example
    om = star(params, geom)
    j1, j2 = params.jstar
    rho = (2e-3, 3e-3)
    r = bifurcation_residual(rho, om, 0, 0, FourierField(16), params, geom)
    quad = _quadrature_G(rho, om, params, params.jstar)
    symbolic = -3 * om[0] * j1 * (rho[0] ** 2 * om[0] ** 2 * j1 ** 2 + 2 * rho[1] ** 2 * om[1] ** 2 * j2 ** 2)
    assert -r[1] == pytest.approx(symbolic, rel=1e-12)
    assert -r[1] == pytest.approx(quad[1] / rho[0], rel=1e-12)
    assert -r[3] == pytest.approx(quad[3] / rho[1], rel=1e-12)
    assert abs(r[0]) < 1e-15 and abs(quad[0]) < 1e-15


def test_zero_amplitude_uses_difference_quotient(example):
    params, geom = example
    om = star(params, geom)
    ctx = RangeContext().resolved(params, geom)
    r = bifurcation_residual((1e-2, 0.0), om, 0, 0, FourierField(16), params, geom, ctx)
    j2 = params.jstar[1]
    # d/drho2 of G2-, at rho2 = 0: -6 w2 j2 rho1^2 w1^2 j1^2
    expected = -6 * om[1] * j2 * (1e-2) ** 2 * om[0] ** 2
    assert -r[3] == pytest.approx(expected, rel=1e-3)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        bifurcation_residual((1e-2, 1e-14), om, 0, 0, FourierField(16), params, geom)
    assert any("treated as zero" in str(w.message) for w in rec)


def test_trivial_wave(example):
    params, geom = example
    sol = solve_wave((0, 0), params, geom)
    assert sol.omega == star(params, geom)
    assert sol.alpha == sol.gamma == 0 and sol.w.max_abs() == 0 and sol.residual_full == 0
    with pytest.raises(DomainError):
        solve_wave((-1e-3, 0), params, geom)


def test_residual_certificate(wave_diag, example):
    params, geom = example
    s = wave_diag
    assert s.residual_full <= 1e-10
    assert full_residual(s.rho, s.omega, s.alpha, s.gamma, s.w, params, geom, N=32) <= 1e-9
    assert full_residual(s.rho, s.omega, s.alpha, s.gamma, s.w, params, geom) == pytest.approx(s.residual_full,
                                                                                           abs=1e-15)


def test_damping_matches_cubic_oracle(example):
    params, geom = example
    rho = (1e-3, 1e-3)
    sol = solve_wave(rho, params, geom)
    a, g = cubic_damping_oracle(rho, params, geom)
    assert a == pytest.approx(106.5 * 1e-6, rel=1e-12)
    assert g == pytest.approx(-3 * 1e-6, rel=1e-12)
    assert sol.alpha == pytest.approx(a, rel=0.05)
    assert sol.gamma == pytest.approx(g, rel=0.05)
    assert max(sol.alpha, sol.gamma) > 0


def test_exchange_symmetry(example, wave_diag):
    params, geom = example
    rho = (1e-2, 5e-3)
    a = solve_wave(rho, params, geom)
    b = solve_wave(rho[::-1], params.swapped(), geom.swapped())
    assert b.omega[0] == pytest.approx(a.omega[1], abs=1e-10)
    assert b.omega[1] == pytest.approx(a.omega[0], abs=1e-10)
    assert b.alpha == pytest.approx(a.alpha, abs=1e-10)
    assert b.gamma == pytest.approx(a.gamma, abs=1e-10)


def test_phase_translation_keeps_residual(example, wave_diag):
    params, geom = example
    s = wave_diag

    def defect(phi):
        r = apply_linear(phi, s.omega, s.alpha, s.gamma, params, geom) - nonlinearity(phi, s.omega, params)
        return sobolev_norm(r, 0)

    base = defect(s.phi)
    for c in ((0.3, 0.0), (1.1, -2.5), (math.pi, 0.7)):
        assert abs(defect(s.phi.translated(*c)) - base) <= 1e-12


def test_axis_wave_properties(example, wave_axis):
    params, geom = example
    s = wave_axis
    N = s.N
    J2 = np.ones((2 * N + 1, 1)) * np.arange(-N, N + 1)[None, :]
    assert np.max(np.abs(s.w.coeffs[J2 != 0])) <= 1e-12
    assert reduced_residual_1d(s, params, geom) <= 1e-10
    assert max(s.alpha, s.gamma) > 0


def test_axis_wave_independent_of_nu2(example, wave_axis):
    params, geom = example
    other = TorusGeometry.from_nu(1, Radical(1, 3, 4))
    t = solve_wave((1e-2, 0.0), params, other)
    s = wave_axis
    nu14, j1 = 1.0, params.jstar[0]
    assert t.omega[0] == pytest.approx(s.omega[0], abs=1e-10)
    assert t.alpha + t.gamma * nu14 * j1 ** 4 == pytest.approx(s.alpha + s.gamma * nu14 * j1 ** 4, abs=1e-10)
    assert np.max(np.abs(t.w.coeffs - s.w.coeffs)) <= 1e-11


def test_jacobian_seed_matches_matrix(example):
    params, geom = example
    om = star(params, geom)
    ctx = RangeContext().resolved(params, geom)
    A = bifurcation_matrix(params, geom).entries
    x0 = np.array([*om, 0.0, 0.0])

    def res(x):
        w = solve_range((0, 0), (x[0], x[1]), x[2], x[3], params, geom)
        return bifurcation_residual((0, 0), (x[0], x[1]), x[2], x[3], w, params, geom, ctx)

    h = 1e-6
    J = np.column_stack([(res(x0 + h * e) - res(x0 - h * e)) / (2 * h) for e in np.eye(4)])
    scale = np.max(np.abs(A))
    assert np.all(np.abs(J - A) <= 1e-6 * np.abs(A) + 1e-6 * scale * (A == 0))


def test_wave_json_round_trip(wave_diag):
    s = wave_diag
    t = WaveSolution.from_json(s.to_json())
    assert t.rho == s.rho and t.omega == s.omega and t.alpha == s.alpha and t.gamma == s.gamma
    assert np.array_equal(t.w.coeffs, s.w.coeffs)


def test_continuation_axis1(example):
    params, geom = example
    br = continue_branch(PathSpec.linear("axis1", 1e-2, 10), params, geom)
    assert br.status == "complete" and len(br) == 11 and br.origin == "trivial"
    for s in br.points:
        N = s.N
        assert np.max(np.abs(s.w.coeffs[:, np.arange(2 * N + 1) != N])) <= 1e-12
        assert s.residual_full <= 1e-10
    assert len(br.rows()[0]) == len(Branch.CSV_HEADER)


def test_continuation_edge_cases(example):
    params, geom = example
    assert len(continue_branch(PathSpec.linear("diagonal", 1e-2, 0), params, geom)) == 0
    with pytest.raises(DomainError):
        continue_branch(PathSpec("custom", points=((1e-3, 1e-3),)), params, geom)


def test_diagonal_frequency_shift_exponent(example):
    params, geom = example
    br = continue_branch(PathSpec.geometric("diagonal", 10 ** -2.5, 1e-2, 4), params, geom)
    om = np.array(star(params, geom))
    sig = np.array([s.rho[0] for s in br.points[1:]])
    shift = np.array([np.linalg.norm(np.array(s.omega) - om) for s in br.points[1:]])
    assert np.polyfit(np.log(sig), np.log(shift), 1)[0] >= 1.9


def test_non_convergence_reports_diagnostics(example):
    params, geom = example
    with pytest.raises(NonConvergenceError) as exc:
        solve_wave((0.5, 0.5), params, geom, max_iter=3)
    assert "history" in exc.value.diagnostics and "x" in exc.value.diagnostics
    assert exc.value.last_residual > 0 or math.isnan(exc.value.last_residual)
