import numpy as np
import pytest
from numpy.testing import assert_allclose

from pluriflow import engine
from pluriflow import nilflow as nf
from pluriflow.brackets import (
    InnerProductConvention,
    LieBracket,
    basis_change_action,
    bracket_inner_product,
    bracket_norm,
)
from pluriflow.catalog import kodaira_bracket
from pluriflow.hermitian import HermitianFrame
from pluriflow.sampling import random_two_step_skt


def test_ricci_zero_bracket():
    assert np.abs(nf.ricci_endomorphism(LieBracket.zero(4))).max() == 0.0


def test_ricci_kodaira_diagonal():
    mu, _ = kodaira_bracket()
    assert_allclose(nf.ricci_endomorphism(mu), np.diag([-0.5, -0.5, 0.5, 0.0]), atol=1e-14)


def test_ricci_matches_koszul_oracle(rng):
    for blocks in (1, 2):
        mu, _ = random_two_step_skt(rng, blocks=blocks, dim_z=2)
        assert np.abs(nf.ricci_endomorphism(mu) - nf.ricci_koszul(mu)).max() < 1e-11


def test_splitting_rejects_non_two_step():
    # solvable non-nilpotent bracket
    from pluriflow.almostabelian import build_bracket
    from pluriflow.catalog import s_ab_data

    mu = build_bracket(s_ab_data(1.0, 2.0))
    frame = HermitianFrame.antidiagonal(6)
    with pytest.raises(ValueError):
        nf.NilpotentSplitting.from_bracket(mu, frame)


def test_splitting_rejects_abelian():
    with pytest.raises(ValueError):
        nf.NilpotentSplitting.from_bracket(LieBracket.zero(4), HermitianFrame.pairwise(4))


def test_p_endomorphism_trace_identity(rng):
    for blocks in (1, 2):
        mu, frame = random_two_step_skt(rng, blocks=blocks, dim_z=2)
        split = nf.NilpotentSplitting.from_bracket(mu, frame)
        p = nf.p_endomorphism_nil(split)
        n2 = bracket_inner_product(mu, mu)
        assert abs(np.trace(p) + 0.5 * n2) < 1e-12 * n2


def test_moment_map_defining_identity(rng):
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    split = nf.NilpotentSplitting.from_bracket(mu, frame)
    d = mu.dim
    n2 = bracket_inner_product(mu, mu)
    from pluriflow.brackets import infinitesimal_action

    for group, project in (("gl", None), ("gl_v_j", split)):
        m = nf.moment_map(mu, group, split)
        for _ in range(50):
            a = rng.standard_normal((d, d))
            a = 0.5 * (a + a.T)
            if group == "gl_v_j":
                # restrict to the symmetric J-commuting block subalgebra
                pv = split.v_basis @ split.v_basis.T
                a = pv @ a @ pv
                a = 0.5 * (a - frame.J @ a @ frame.J)
            lhs = float(np.sum(m * a)) * n2
            rhs = bracket_inner_product(infinitesimal_action(a, mu), mu)
            assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_moment_map_projection_relation(rng):
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    split = nf.NilpotentSplitting.from_bracket(mu, frame)
    m_full = nf.moment_map(mu, "gl", split)
    m_vj = nf.moment_map(mu, "gl_v_j", split)
    pv = split.v_basis @ split.v_basis.T
    q = pv @ m_full @ pv
    proj = 0.5 * (q - frame.J @ q @ frame.J)
    assert np.abs(m_vj - proj).max() < 1e-12


def test_moment_map_scale_invariance(rng):
    mu, frame = random_two_step_skt(rng, blocks=1, dim_z=2)
    split = nf.NilpotentSplitting.from_bracket(mu, frame)
    scaled = LieBracket(3.7 * mu.coeffs)
    assert np.abs(nf.moment_map(mu, "gl", split) - nf.moment_map(scaled, "gl", split)).max() < 1e-12


def test_moment_map_zero_bracket_raises():
    with pytest.raises(ValueError):
        nf.moment_map(LieBracket.zero(4), "gl")


def test_convention_pin():
    mu, _ = kodaira_bracket()
    res = nf.verify_moment_convention(mu)
    assert res[InnerProductConvention.ORDERED_PAIRS] < 1e-12
    assert res[InnerProductConvention.UNORDERED_PAIRS] > 0.1


def test_functional_scale_invariance_and_lower_bound(rng):
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    split = nf.NilpotentSplitting.from_bracket(mu, frame)
    f1 = nf.functional_F(split, mu)
    f2 = nf.functional_F(split, LieBracket(2.3 * mu.coeffs))
    assert abs(f1 - f2) < 1e-12 * f1
    assert f1 >= 4.0 / split.dim_v - 1e-12


def test_flow_preserves_center_and_skt(rng):
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    traj = nf.integrate_nil_flow(mu, frame, 30.0, "none")
    d = traj.diagnostics()
    assert d["center_drift"].max() < 1e-8
    assert d["skt_residual"].max() < 1e-8
    assert np.all(np.diff(d["mu_norm"]) < 0)


def test_unnormalized_norm_decay_law(rng):
    # d/dt |mu|^2 = -8 |P|^2, checked against finite differences of records
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    mu = LieBracket(mu.coeffs / bracket_norm(mu))
    samples = np.linspace(0.0, 2.0, 201)
    cfg = engine.IntegratorConfig(sample_times=samples)
    traj = nf.integrate_nil_flow(mu, frame, 2.0, "none", cfg)
    split = traj.flow.split
    n2 = np.array([bracket_norm(b) ** 2 for b in traj.brackets()])
    dt = samples[1] - samples[0]
    fd = (n2[2:] - n2[:-2]) / (2 * dt)
    for i, b in enumerate(traj.brackets()[1:-1], start=1):
        p = nf.p_endomorphism_nil(split, b)
        want = -8.0 * float(np.sum(p * p))
        assert abs(fd[i - 1] - want) < 5e-4 * max(1.0, abs(want))


def test_unit_norm_flow_converges_to_soliton(rng):
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    traj = nf.integrate_nil_flow(mu, frame, 500.0, "unit_norm")
    assert traj.raw.terminal_event == engine.FIXED_POINT
    x = nf.refine_fixed_point(traj.flow, traj.raw.final_state)
    nu = traj.flow.decode(x)
    split = traj.flow.split
    cert = nf.soliton_limit_certificate(nu, frame, split=split)
    assert cert.residual < 1e-8
    assert cert.alpha < 0
    assert abs(np.trace(nf.p_endomorphism_nil(split, nu)) + 0.5) < 1e-9
    d = traj.diagnostics()
    assert np.all(np.diff(d["F"]) <= 1e-12)
    assert d["F"][0] - d["F"][-1] > 0.1  # strict decrease away from fixed points


def test_gradient_equivalence(rng):
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    x = mu.to_coords()
    nu = LieBracket.from_coords(mu.dim, x / np.linalg.norm(x))
    split = nf.NilpotentSplitting.from_bracket(mu, frame)
    out = nf.gradient_equivalence_check(nu, split)
    assert out["angle"] < 1e-4
    assert abs(out["ratio"] - 16.0) < 1e-6


def test_gradient_equivalence_requires_unit_norm(rng):
    mu, frame = random_two_step_skt(rng, blocks=1, dim_z=2)
    split = nf.NilpotentSplitting.from_bracket(mu, frame)
    with pytest.raises(ValueError):
        nf.gradient_equivalence_check(mu, split)


def test_soliton_certificate_abelian():
    cert = nf.soliton_limit_certificate(LieBracket.zero(4), HermitianFrame.pairwise(4))
    assert cert.alpha == 0.0
    assert np.abs(cert.derivation).max() < 1e-12
    assert cert.residual < 1e-12


def test_non_soliton_has_large_residual(rng):
    # a genuinely flowing initial state is not an algebraic soliton
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    x = mu.to_coords()
    nu = LieBracket.from_coords(mu.dim, x / np.linalg.norm(x))
    split = nf.NilpotentSplitting.from_bracket(nu, frame)
    cert = nf.soliton_limit_certificate(nu, frame, split=split)
    assert cert.residual > 1e-3


def test_equivariance_of_moment_map(rng):
    mu, frame = random_two_step_skt(rng, blocks=2, dim_z=2)
    q, _ = np.linalg.qr(rng.standard_normal((mu.dim, mu.dim)))
    moved = basis_change_action(q, mu)
    lhs = nf.moment_map(moved, "gl")
    rhs = q @ nf.moment_map(mu, "gl") @ q.T
    assert np.abs(lhs - rhs).max() < 1e-12
