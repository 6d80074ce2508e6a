"""Tests for superchannel validation, representations, and realization."""

import numpy as np
import pytest

from superchan.channels import (
    ChoiRep,
    KrausRep,
    apply_channel,
    choi_from_kraus,
    compose_channels,
    random_channel,
    random_density_matrix,
    validate_channel,
)
from superchan.errors import (
    DimensionMismatch,
    NotAValidSuperchannel,
)
from superchan.operators import LabeledOperator, kron, partial_trace, vec
from superchan.superchannels import (
    SuperchannelChoi,
    SuperchannelDims,
    apply_to_channel,
    choi_from_gour,
    f_theta_channel,
    gour_from_choi,
    kraus_apply,
    liouville_apply,
    memory_cost,
    n_operators,
    q_apply_to_state,
    random_superchannel,
    realize,
    stinespring_apply_to_state,
    super_liouville,
    super_stinespring,
    superchannel_from_parts,
    validate_superchannel,
)

QUBIT = SuperchannelDims(2, 2, 2, 2)


def identity_part(in_label, out_labels, dims):
    """Choi of the channel that relays one system into (possibly) two."""
    d_in = dims[0]
    k = LabeledOperator(
        np.eye(d_in),
        [(in_label, d_in)],
        list(zip(out_labels, dims[1:])),
    )
    return choi_from_kraus(KrausRep((k,)))


def identity_superchannel(d=2):
    pre = identity_part("A1", ("E1", "B1"), (d, 1, d))
    k = LabeledOperator(np.eye(d), [("E1", 1), ("A2", d)], [("B2", d)])
    post = choi_from_kraus(KrausRep((k,)))
    return superchannel_from_parts(pre, post)


def copy_pre_superchannel():
    """Qubit superchannel whose pre stage copies the basis into the memory."""
    v = np.zeros((4, 2), dtype=complex)
    v[0, 0] = 1.0  # |0> -> |0>_E1 |0>_B1
    v[3, 1] = 1.0  # |1> -> |1>_E1 |1>_B1
    pre = choi_from_kraus(
        KrausRep((LabeledOperator(v, [("A1", 2)], [("E1", 2), ("B1", 2)]),))
    )
    post_ops = tuple(
        LabeledOperator(
            np.kron(e.reshape(1, 2), np.eye(2)), [("E1", 2), ("A2", 2)], [("B2", 2)]
        )
        for e in np.eye(2)
    )
    post = choi_from_kraus(KrausRep(post_ops))
    return superchannel_from_parts(pre, post)


def random_input_channel(seed, d_in=2, d_out=2, rank=2):
    return choi_from_kraus(random_channel(d_in, d_out, rank, seed=seed))


class TestFromPartsAndValidate:
    def test_identity_superchannel_choi(self):
        theta = identity_superchannel(2)
        g = np.eye(2).reshape(4, 1)
        gamma_proj = g @ g.conj().T
        expected = np.kron(gamma_proj, gamma_proj).reshape(
            [2, 2, 2, 2] * 2
        )  # (A1, B1, A2, B2) tensor, row/col
        expected = expected.transpose([0, 2, 1, 3, 4, 6, 5, 7]).reshape(16, 16)
        assert np.allclose(theta.op.matrix, expected)

    def test_identity_is_valid(self):
        report = validate_superchannel(identity_superchannel(2))
        assert report.valid
        assert report.tp_deviation <= 1e-12
        assert report.ns_deviation <= 1e-12

    def test_copy_pre_is_valid(self):
        assert validate_superchannel(copy_pre_superchannel()).valid

    def test_random_parts_sweep(self):
        for seed in range(30):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            report = validate_superchannel(theta)
            assert report.valid, f"seed {seed}: {report}"

    def test_scaling_breaks_tp_only(self):
        theta = random_superchannel(QUBIT, memory_dim=2, seed=1)
        doubled = LabeledOperator(
            2 * theta.op.matrix, theta.op.in_systems, theta.op.out_systems
        )
        report = validate_superchannel(doubled)
        assert report.cp and report.ns and not report.tp

    def test_backward_signaling_breaks_ns_only(self):
        # Gamma pairs joining A1 with B2 and A2 with B1 signal backwards
        g = np.eye(2).reshape(4, 1)
        gamma_proj = g @ g.conj().T
        op = np.kron(gamma_proj, gamma_proj).reshape([2, 2, 2, 2] * 2)
        # built on (A1, B2, A2, B1); reorder to (A1, A2, B1, B2)
        perm = [0, 2, 3, 1]
        op = op.transpose(perm + [p + 4 for p in perm]).reshape(16, 16)
        systems = QUBIT.systems()
        report = validate_superchannel(LabeledOperator(op, systems, systems))
        assert report.cp and report.tp and not report.ns
        assert report.ns_deviation > 1e-3

    def test_mixing_beyond_one_breaks_cp_only(self):
        theta = identity_superchannel(2).op.matrix
        mixer = random_superchannel(QUBIT, memory_dim=1, seed=5).op.matrix
        eps = 0.1
        systems = QUBIT.systems()
        op = LabeledOperator((1 + eps) * theta - eps * mixer, systems, systems)
        report = validate_superchannel(op)
        assert not report.cp and report.tp and report.ns

    def test_invalid_part_rejected(self):
        k = LabeledOperator(0.5 * np.eye(2), [("A1", 2)], [("E1", 1), ("B1", 2)])
        bad_pre = choi_from_kraus(KrausRep((k,)))
        k2 = LabeledOperator(np.eye(2), [("E1", 1), ("A2", 2)], [("B2", 2)])
        post = choi_from_kraus(KrausRep((k2,)))
        with pytest.raises(NotAValidSuperchannel):
            superchannel_from_parts(bad_pre, post)

    def test_memory_dim_mismatch(self):
        pre = identity_part("A1", ("E1", "B1"), (2, 1, 2))
        k = LabeledOperator(np.eye(4), [("E1", 2), ("A2", 2)], [("B2", 4)])
        post = choi_from_kraus(KrausRep((k,)))
        with pytest.raises(DimensionMismatch):
            superchannel_from_parts(pre, post)


class TestApplyToChannel:
    def test_identity_superchannel_preserves(self):
        theta = identity_superchannel(2)
        for seed in range(5):
            e = random_input_channel(seed)
            out = apply_to_channel(theta, e)
            assert np.max(np.abs(out.op.matrix - e.op.matrix)) <= 1e-12

    def test_memoryless_parts_compose(self):
        pre = identity_part("A1", ("E1", "B1"), (2, 1, 2))
        pre_chan = random_channel(2, 2, 2, seed=11)
        pre = choi_from_kraus(
            KrausRep(
                tuple(
                    LabeledOperator(
                        k.matrix, [("A1", 2)], [("E1", 1), ("B1", 2)]
                    )
                    for k in pre_chan.ops
                )
            )
        )
        post_chan = random_channel(2, 2, 2, seed=13)
        post = choi_from_kraus(
            KrausRep(
                tuple(
                    LabeledOperator(
                        k.matrix, [("E1", 1), ("A2", 2)], [("B2", 2)]
                    )
                    for k in post_chan.ops
                )
            )
        )
        theta = superchannel_from_parts(pre, post)
        e = random_input_channel(17)
        got = apply_to_channel(theta, e).op.matrix
        pre_plain = choi_from_kraus(pre_chan)
        post_plain = choi_from_kraus(post_chan)
        want = compose_channels(
            post_plain, compose_channels(e.relabeled({"A": "B", "B": "C"}), pre_plain)
        ).op.matrix
        assert np.max(np.abs(got - want)) <= 1e-10

    def test_outputs_are_channels(self):
        for seed in range(20):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            e = random_input_channel(1000 + seed)
            out = apply_to_channel(theta, e)
            assert validate_channel(out).valid

    def test_side_system_passes_through(self):
        # causal map B1 -> (R, A2): prepare a fixed state on R alongside
        rng = np.random.default_rng(3)
        sigma = random_density_matrix(2, seed=rng)
        e = random_input_channel(7)
        side = LabeledOperator(sigma, [("R", 2)], [("R", 2)])
        j_big = kron(e.op, side)
        kappa = ChoiRep(
            permute_systems_for_test(j_big, ("A",), ("R", "B")),
            ("A",),
            ("R", "B"),
        )
        theta = random_superchannel(QUBIT, memory_dim=2, seed=21)
        out = apply_to_channel(theta, kappa)
        assert out.output_labels[-1] == "B2"
        assert "R" in out.output_labels
        # tracing the side system matches acting on the bare channel
        traced = partial_trace(out.op, ["R"])
        bare = apply_to_channel(theta, e).op
        assert np.max(np.abs(traced.matrix - bare.matrix)) <= 1e-10

    def test_invalid_input_channel_rejected(self):
        theta = random_superchannel(QUBIT, memory_dim=1, seed=2)
        bad = ChoiRep(
            LabeledOperator(
                2 * np.eye(4), [("A", 2), ("B", 2)], [("A", 2), ("B", 2)]
            ),
            ("A",),
            ("B",),
        )
        with pytest.raises(NotAValidSuperchannel):
            apply_to_channel(theta, bad)


def permute_systems_for_test(op, in_order, out_order):
    from superchan.operators import permute_systems

    return permute_systems(op, in_order + out_order, in_order + out_order)


class TestGour:
    def test_identity_superchannel_permutes_exactly(self):
        theta = identity_superchannel(2)
        g = gour_from_choi(theta)
        from superchan.operators import permute_systems

        want = permute_systems(
            theta.op, ("B1", "A2", "A1", "B2"), ("B1", "A2", "A1", "B2")
        )
        assert np.array_equal(g.matrix, want.matrix)

    def test_dual_path_agreement_random(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            g = gour_from_choi(theta)  # raises if the two paths disagree
            assert g.in_systems.labels == ("B1", "A2", "A1", "B2")

    def test_round_trip_exact(self):
        theta = random_superchannel(QUBIT, memory_dim=2, seed=31)
        back = choi_from_gour(gour_from_choi(theta))
        assert np.array_equal(back.op.matrix, theta.op.matrix)


class TestOperatorFamily:
    def test_identity_superchannel_single_operator(self):
        family = n_operators(identity_superchannel(2))
        assert len(family) == 1
        # the single operator is the relabeling identity up to phase
        n = family.n_ops[0].matrix
        phase = n[0, 0] / abs(n[0, 0])
        assert np.allclose(n / phase, np.eye(4))

    def test_family_rebuilds_choi(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            family = n_operators(theta)
            rebuilt = sum(
                vec(n).matrix @ vec(n).matrix.conj().T for n in family.n_ops
            )
            assert (
                np.linalg.norm(rebuilt - theta.op.matrix)
                <= 1e-10 * np.linalg.norm(theta.op.matrix)
            )

    def test_q_completeness_relation(self):
        # Tr_B1[sum_i Q_i† Q_i] = identity on A1 A2
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=100 + seed)
            family = n_operators(theta)
            acc = sum(
                (q.adjoint() @ q).matrix for q in family.q_ops
            )
            sys_q = family.q_ops[0].in_systems
            traced = partial_trace(
                LabeledOperator(acc, sys_q, sys_q), ["B1"]
            ).matrix
            assert np.linalg.norm(traced - np.eye(4)) <= 1e-10


class TestFourApplicationPaths:
    def test_kraus_path_matches_link(self):
        for seed in range(15):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            e = random_input_channel(2000 + seed)
            family = n_operators(theta)
            via_link = apply_to_channel(theta, e).op.matrix
            via_kraus = kraus_apply(family, e).op.matrix
            assert np.max(np.abs(via_link - via_kraus)) <= 1e-10

    def test_q_path_matches_output_channel_action(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            e = random_input_channel(3000 + seed)
            family = n_operators(theta)
            out = apply_to_channel(theta, e)
            for s in range(3):
                rho = random_density_matrix(2, seed=10 * seed + s)
                want = apply_channel(out, rho).matrix
                got = q_apply_to_state(family, e, rho)
                assert np.max(np.abs(got - want)) <= 1e-10

    def test_state_preparation_special_case(self):
        # trivial first time step: the Q operators act as plain Kraus ops
        dims = SuperchannelDims(1, 2, 1, 2)
        theta = random_superchannel(dims, memory_dim=1, seed=41)
        family = n_operators(theta)
        rho = random_density_matrix(2, seed=7)
        e = ChoiRep(
            LabeledOperator(rho, [("B1", 1), ("A2", 2)], [("B1", 1), ("A2", 2)]),
            ("B1",),
            ("A2",),
        )
        got = q_apply_to_state(family, e, np.eye(1))
        want = sum(
            q.matrix.reshape(2, 2) @ rho @ q.matrix.reshape(2, 2).conj().T
            for q in family.q_ops
        )
        assert np.max(np.abs(got - want)) <= 1e-12

    def test_stinespring_path(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            e = random_input_channel(4000 + seed)
            family = n_operators(theta)
            v_s = super_stinespring(family)
            out = apply_to_channel(theta, e)
            for s in range(3):
                rho = random_density_matrix(2, seed=20 * seed + s)
                want = apply_channel(out, rho).matrix
                got = stinespring_apply_to_state(v_s, family, e, rho)
                assert np.max(np.abs(got - want)) <= 1e-10

    def test_stinespring_relaxed_normalization(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=500 + seed)
            family = n_operators(theta)
            v_s = super_stinespring(family)
            prod = LabeledOperator(
                v_s.matrix.conj().T @ v_s.matrix,
                v_s.in_systems,
                v_s.in_systems,
            )
            traced = partial_trace(prod, ["B1"]).matrix
            assert np.linalg.norm(traced - np.eye(4)) <= 1e-10

    def test_stinespring_trivial_first_step_is_isometry(self):
        dims = SuperchannelDims(1, 2, 1, 2)
        theta = random_superchannel(dims, memory_dim=1, seed=43)
        family = n_operators(theta)
        v_s = super_stinespring(family)
        assert np.allclose(
            v_s.matrix.conj().T @ v_s.matrix, np.eye(2), atol=1e-10
        )

    def test_identity_superchannel_env_dim_one(self):
        family = n_operators(identity_superchannel(2))
        v_s = super_stinespring(family)
        assert v_s.out_systems.dim_of("E") == 1

    def test_liouville_path(self):
        for seed in range(15):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            e = random_input_channel(5000 + seed)
            family = n_operators(theta)
            k = super_liouville(family)
            via_link = apply_to_channel(theta, e).op.matrix
            via_liou = liouville_apply(k, family, e).op.matrix
            assert np.max(np.abs(via_link - via_liou)) <= 1e-10

    def test_identity_superchannel_liouville_is_permutation(self):
        family = n_operators(identity_superchannel(2))
        k = super_liouville(family).matrix
        # permutation matrix: entries in {0, 1}, orthogonal
        assert np.allclose(np.abs(k) * (1 - np.abs(k)), 0.0, atol=1e-12)
        assert np.allclose(k @ k.conj().T, np.eye(16), atol=1e-12)

    def test_liouville_linearity(self):
        theta = random_superchannel(QUBIT, memory_dim=2, seed=61)
        family = n_operators(theta)
        k = super_liouville(family).matrix
        e1 = random_input_channel(62).op.matrix
        e2 = random_input_channel(63).op.matrix
        a, b = 0.3, 0.7
        lhs = k @ (a * e1.T.reshape(-1) + b * e2.T.reshape(-1))
        rhs = a * (k @ e1.T.reshape(-1)) + b * (k @ e2.T.reshape(-1))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


class TestFThetaAndMemory:
    def test_identity_superchannel_f_theta(self):
        f = f_theta_channel(identity_superchannel(2))
        g = np.eye(2).reshape(4, 1)
        assert np.allclose(f.choi.op.matrix, g @ g.conj().T, atol=1e-12)
        assert f.rank == 1

    def test_unitary_pre_f_theta(self):
        rng = np.random.default_rng(71)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q, r = np.linalg.qr(g)
        u = q * (np.diag(r) / np.abs(np.diag(r)))
        pre = choi_from_kraus(
            KrausRep((LabeledOperator(u, [("A1", 2)], [("E1", 1), ("B1", 2)]),))
        )
        post_chan = random_channel(
            2, 2, 2, seed=73,
            in_systems=[("E1", 1), ("A2", 2)],
            out_systems=[("B2", 2)],
        )
        theta = superchannel_from_parts(pre, choi_from_kraus(post_chan))
        f = f_theta_channel(theta)
        uvec = vec(LabeledOperator(u, [("A1", 2)], [("B1", 2)])).matrix
        assert np.allclose(f.choi.op.matrix, uvec @ uvec.conj().T, atol=1e-10)
        assert f.rank == 1

    def test_f_theta_always_cptp(self):
        for seed in range(25):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            f = f_theta_channel(theta)
            report = validate_channel(f.choi, tol=1e-9)
            assert report.valid

    def test_f_theta_routes_agree(self):
        # partial trace of the Choi vs assembly from the operator slices
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            via_trace = f_theta_channel(theta)
            via_family = f_theta_channel(n_operators(theta))
            assert np.max(
                np.abs(via_trace.choi.op.matrix - via_family.choi.op.matrix)
            ) <= 1e-10
            assert via_trace.rank == via_family.rank

    def test_memory_cost_identity(self):
        assert memory_cost(identity_superchannel(2)) == 1

    def test_memory_cost_copy_pre(self):
        assert memory_cost(copy_pre_superchannel()) == 2

    def test_memory_cost_memoryless(self):
        theta = random_superchannel(QUBIT, memory_dim=1, seed=83, pre_rank=1)
        assert memory_cost(theta) == 1

    def test_memory_cost_bounds(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            d = memory_cost(theta)
            assert 1 <= d <= 4  # d_A1 * d_B1


class TestRealize:
    def test_identity_superchannel(self):
        r = realize(identity_superchannel(2))
        assert r.e1_dim == 1
        assert r.reconstruction_residual <= 1e-12
        # V = |0>_E1 ⊗ identity, W the relabeled identity
        assert np.allclose(np.abs(r.v.matrix), np.eye(2), atol=1e-9)
        assert r.w.matrix.shape == (2, 2)
        assert np.allclose(r.w.matrix @ r.w.matrix.conj().T, np.eye(2), atol=1e-9)

    def test_copy_pre(self):
        r = realize(copy_pre_superchannel())
        assert r.e1_dim == 2
        assert r.reconstruction_residual <= 1e-8

    def test_isometries(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=seed)
            r = realize(theta)
            v = r.v.matrix
            w = r.w.matrix
            assert np.linalg.norm(v.conj().T @ v - np.eye(2)) <= 1e-8
            assert (
                np.linalg.norm(w.conj().T @ w - np.eye(r.e1_dim * 2)) <= 1e-8
            )

    def test_round_trip_memory_bound(self):
        for seed in range(10):
            theta = random_superchannel(QUBIT, memory_dim=2, seed=300 + seed)
            r = realize(theta)
            assert r.reconstruction_residual <= 1e-8
            assert r.e1_dim <= 2 * 2  # never above d_A1 * d_B1
            assert r.e1_dim == memory_cost(theta)

    def test_invalid_superchannel_rejected(self):
        systems = QUBIT.systems()
        bogus = LabeledOperator(np.eye(16), systems, systems)
        with pytest.raises(NotAValidSuperchannel):
            realize(SuperchannelChoi(bogus))


class TestRandomSuperchannel:
    def test_deterministic(self):
        a = random_superchannel(QUBIT, memory_dim=2, seed=91)
        b = random_superchannel(QUBIT, memory_dim=2, seed=91)
        assert np.array_equal(a.op.matrix, b.op.matrix)

    def test_memoryless_ns_residual(self):
        theta = random_superchannel(QUBIT, memory_dim=1, seed=93)
        report = validate_superchannel(theta)
        assert report.ns_deviation <= 1e-12

    def test_qutrit_systems(self):
        dims = SuperchannelDims(3, 2, 2, 3)
        theta = random_superchannel(dims, memory_dim=2, seed=95)
        assert validate_superchannel(theta).valid
