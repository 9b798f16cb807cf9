import numpy as np
import pytest

from zerograph.channel import (GraphConditionError, TracePreservationError, apply, build_pseudo_diagonal,
                               channels_equal, choi, choi_rank, complementary, default_psis, make_channel,
                               measure_prepare, minimal_env_dim, ncgraph, positive_basis, tensor_channels,
                               trace_deviation, validate_positive_basis)
from zerograph.opalg import TAU_EXACT, DimensionError, hs_norm, partial_trace, span
from zerograph.superact import make_graph, paper_kraus, paper_povm, paper_psis

from conftest import random_density, random_hermitian, random_kraus, random_unitary


def identity_channel(n):
    return make_channel([np.eye(n)])


def test_make_channel_identity():
    ch = identity_channel(2)
    assert ch.env_dim == 1 and ch.dim_in == ch.dim_out == 2


def test_make_channel_printed_kraus():
    ch = paper_kraus()
    assert (ch.env_dim, ch.dim_out, ch.dim_in) == (3, 12, 4)
    assert trace_deviation(ch.kraus) <= TAU_EXACT


def test_make_channel_rejects_non_trace_preserving():
    with pytest.raises(TracePreservationError) as exc:
        make_channel([np.eye(2) / 2])
    assert exc.value.deviation == pytest.approx(np.sqrt(2) * 0.75)


def test_make_channel_rejects_mixed_shapes():
    with pytest.raises(DimensionError):
        make_channel([np.eye(2), np.eye(3)])


def test_apply_identity(rng):
    rho = random_density(rng, 3)
    np.testing.assert_allclose(apply(identity_channel(3), rho), rho)


def test_apply_printed_channel():
    ch = paper_kraus()
    out = apply(ch, np.eye(4) / 4)
    assert out.shape == (12, 12)
    assert np.isclose(np.trace(out), 1, atol=TAU_EXACT)
    e1 = np.zeros((4, 1))
    e1[0] = 1
    rho = e1 @ e1.T
    expected = sum(v @ rho @ v.conj().T for v in ch.kraus)
    np.testing.assert_allclose(apply(ch, rho), expected, atol=TAU_EXACT)


def test_apply_preserves_trace_and_hermiticity(rng):
    ch = make_channel(random_kraus(rng, 3, 4, 5))
    out = ch(random_density(rng, 3))
    assert np.isclose(np.trace(out), 1)
    assert hs_norm(out - out.conj().T) <= TAU_EXACT


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply(paper_kraus(), np.eye(3))


def test_complementary_of_identity(rng):
    comp = complementary(identity_channel(2))
    assert comp.dim_out == 1
    rho = random_density(rng, 2)
    np.testing.assert_allclose(comp(rho), [[1.0]])


def test_complementary_entries(rng):
    ch = make_channel(random_kraus(rng, 3, 2, 4))
    rho = random_density(rng, 3)
    out = complementary(ch)(rho)
    for k in range(4):
        for l in range(4):
            want = np.trace(ch.kraus[l].conj().T @ ch.kraus[k] @ rho)
            assert np.isclose(out[k, l], want)


def test_complementary_from_stinespring(rng):
    """Tracing the output of V = sum_k K_k (x) |k> gives the complementary channel."""
    ch = make_channel(random_kraus(rng, 2, 3, 2))
    v = np.einsum("kij->ikj", ch.kraus).reshape(6, 2)
    rho = random_density(rng, 2)
    big = v @ rho @ v.conj().T
    np.testing.assert_allclose(partial_trace(big, 3, 2, "B"), complementary(ch)(rho), atol=1e-12)
    np.testing.assert_allclose(partial_trace(big, 3, 2, "A"), ch(rho), atol=1e-12)


def test_complementary_twice_returns_channel(rng):
    ch = make_channel(random_kraus(rng, 2, 3, 3))
    assert channels_equal(complementary(complementary(ch)), ch)


def test_complementary_printed_dims():
    comp = complementary(paper_kraus())
    assert comp.dim_in == 4 and comp.dim_out == 3


def test_ncgraph_identity():
    assert ncgraph(identity_channel(3)).dim == 1


def test_ncgraph_random_channels_have_graph_structure():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n_in, extra, k = (int(x) for x in rng.integers(1, 4, size=3))
        g = ncgraph(make_channel(random_kraus(rng, n_in, n_in + extra - 1, k)))
        assert g.contains_identity() and g.is_adjoint_closed()


def test_ncgraph_of_printed_kraus_is_printed_span():
    # the printed Kraus triple realizes the span of the printed POVM
    assert ncgraph(paper_kraus()).equals(paper_povm().span())


def test_ncgraph_of_built_l3():
    l3 = make_graph("Ln", 3)
    ch = build_pseudo_diagonal(positive_basis(l3), m=4)
    assert ch.env_dim == 4
    assert ncgraph(ch).equals(l3) and ncgraph(ch).dim == 10


def test_tensor_identity_channels():
    assert channels_equal(tensor_channels(identity_channel(2), identity_channel(2)), identity_channel(4))


def test_tensor_printed_dims():
    sq = tensor_channels(paper_kraus(), paper_kraus())
    assert (sq.dim_in, sq.dim_out, sq.env_dim) == (16, 144, 9)


def test_tensor_graph_dimension(l0):
    ch = build_pseudo_diagonal(positive_basis(l0), paper_psis())
    g = ncgraph(tensor_channels(ch, ch))
    assert g.dim == 25
    elementary = span([np.kron(a, b) for a in l0.basis for b in l0.basis])
    assert g.equals(elementary)


def test_choi_identity():
    c = choi(identity_channel(2))
    omega = np.zeros(4)
    omega[[0, 3]] = 1
    np.testing.assert_allclose(c, np.outer(omega, omega))
    assert choi_rank(identity_channel(2)) == 1


def test_choi_printed_rank():
    assert choi_rank(paper_kraus()) == 3


def test_choi_properties(rng):
    ch = make_channel(random_kraus(rng, 3, 2, 4))
    c = choi(ch)
    assert np.linalg.eigvalsh(c)[0] >= -TAU_EXACT
    np.testing.assert_allclose(partial_trace(c, 3, 2, "A"), np.eye(3), atol=TAU_EXACT)


def test_choi_of_tensor_is_permuted_tensor(rng):
    a = make_channel(random_kraus(rng, 2, 3, 2))
    b = make_channel(random_kraus(rng, 3, 2, 3))
    c = choi(tensor_channels(a, b)).reshape(2, 3, 3, 2, 2, 3, 3, 2)
    c = c.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(36, 36)
    np.testing.assert_allclose(c, np.kron(choi(a), choi(b)), atol=TAU_EXACT)


def test_choi_invariant_under_environment_isometry(l0):
    ch = build_pseudo_diagonal(positive_basis(l0), paper_psis())
    w = random_unitary(np.random.default_rng(1), 5)[:, :3]  # isometry C^3 -> C^5
    redressed = make_channel(np.einsum("jk,kab->jab", w, ch.kraus))
    assert redressed.env_dim == 5
    assert channels_equal(ch, redressed)


def test_positive_basis_identity():
    pb = positive_basis(span([np.eye(3)]))
    assert pb.count == 1
    np.testing.assert_allclose(pb.ops[0], np.eye(3))


def test_positive_basis_l0_matches_graph(l0):
    pb = positive_basis(l0)
    assert pb.count == 5 and pb.span().equals(l0)


def test_positive_basis_invariants():
    l3 = make_graph("Ln", 3)
    pb = positive_basis(l3)
    assert pb.count == 10
    for a in pb.ops:
        assert np.linalg.eigvalsh(a)[0] >= -TAU_EXACT
    assert hs_norm(pb.ops.sum(axis=0) - np.eye(6)) <= TAU_EXACT
    assert pb.span().equals(l3)


def test_positive_basis_rejects_bad_spaces():
    e12 = np.zeros((2, 2))
    e12[0, 1] = 1
    with pytest.raises(GraphConditionError, match="adjoint"):
        positive_basis(span([np.eye(2), e12]))
    with pytest.raises(GraphConditionError, match="identity"):
        positive_basis(span([np.diag([1.0, 0.0])]))


def test_positive_basis_random_hermitian_spaces(rng):
    for d in range(2, 7):
        space = span([np.eye(4)] + [random_hermitian(rng, 4) for _ in range(d - 1)])
        pb = positive_basis(space)
        assert pb.count == d and pb.span().equals(space)


def test_validate_positive_basis_flags():
    with pytest.raises(ValueError, match="dependent"):
        validate_positive_basis([np.eye(2) / 2, np.eye(2) / 2])
    with pytest.raises(ValueError, match="positive"):
        validate_positive_basis([np.diag([2.0, 1.0]), np.diag([-1.0, 0.0])])


def test_default_psis_printed_choice():
    for got, want in zip(default_psis(5, 3), paper_psis()):
        np.testing.assert_allclose(got, want)


def test_minimal_env_dim():
    assert [minimal_env_dim(d) for d in (1, 2, 4, 5, 6, 9, 10, 16, 17)] == [1, 2, 2, 3, 3, 3, 4, 4, 5]


def test_build_from_printed_basis():
    ch = build_pseudo_diagonal(paper_povm(), paper_psis())
    assert (ch.env_dim, ch.dim_out, ch.dim_in) == (3, 12, 4)


def test_build_trivial_is_noiseless(rng):
    ch = build_pseudo_diagonal(validate_positive_basis([np.eye(3)]), [np.array([1.0])])
    assert ch.env_dim == 1
    w = ch.kraus[0]
    np.testing.assert_allclose(w.conj().T @ w, np.eye(3), atol=TAU_EXACT)
    rho = random_density(rng, 3)
    np.testing.assert_allclose(ch(rho), w @ rho @ w.conj().T)


def test_build_complementary_is_measure_prepare(l0, rng):
    basis = positive_basis(l0)
    ch = build_pseudo_diagonal(basis, paper_psis())
    psi_map = measure_prepare(basis, paper_psis())
    for _ in range(5):
        rho = random_density(rng, 4)
        np.testing.assert_allclose(complementary(ch)(rho), psi_map(rho), atol=TAU_EXACT)
    assert ncgraph(ch).equals(l0)


def test_build_rejects_bad_vectors(l0):
    basis = positive_basis(l0)
    with pytest.raises(ValueError, match="C\\^2"):
        build_pseudo_diagonal(basis, m=2)
    with pytest.raises(ValueError, match="dependent"):
        build_pseudo_diagonal(basis, [np.eye(3)[0]] * 5)
    with pytest.raises(ValueError, match="unit"):
        build_pseudo_diagonal(basis, [2 * p for p in paper_psis()])
