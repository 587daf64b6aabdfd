import numpy as np
import pytest

from distnet.errors import IndefiniteMatrixError, PortDisconnectedError
from distnet.graph import Edge, Graph, Port, laplacian, port_matrix
from distnet.hinf import (
    NetworkSystem,
    SymmetricSystem,
    argmax_c_check,
    corollary_bound,
    default_grid,
    deflated_system,
    freq_response,
    hinf_general,
    hinf_network,
    hinf_sweep,
    hinf_symmetric,
    lmi_feasible,
    lmi_feasible_schur,
    riccati_check,
)
from helpers import FIVE_OPT, FIVE_PORTS, complete, five_node, path, random_connected, random_ports

K2 = Graph(2, (Edge(0, 1, 2.0),))
K2_PORT = [Port(0, 1)]


def gamma_oracle(L, E):
    # independent route: numpy's SVD-based pseudo-inverse
    M = E.T @ np.linalg.pinv(L) @ E
    return np.linalg.eigvalsh(0.5 * (M + M.T)).max()


def test_k2_gain():
    cert = hinf_network(NetworkSystem.from_ports(K2, K2_PORT))
    assert cert.gamma == pytest.approx(0.5, abs=1e-14)
    assert abs(np.linalg.norm(cert.witness) - 1) < 1e-14


def test_five_node_optimal_gain():
    sys = NetworkSystem.from_ports(five_node(FIVE_OPT), FIVE_PORTS)
    assert hinf_network(sys).gamma == pytest.approx(1.0, abs=1e-12)


def test_zero_ports():
    g = five_node()
    assert hinf_network(NetworkSystem(g, np.zeros((5, 0)))).gamma == 0
    assert hinf_network(NetworkSystem(g, np.zeros((5, 2)))).gamma == 0


def test_gain_matches_pinv_oracle_random():
    rng = np.random.default_rng(10)
    for _ in range(60):
        n = int(rng.integers(2, 10))
        g = random_connected(rng, n)
        E = port_matrix(random_ports(rng, n, int(rng.integers(1, 4))), n)
        got = hinf_network(NetworkSystem(g, E)).gamma
        assert got == pytest.approx(gamma_oracle(laplacian(g), E), rel=1e-9)


def test_gain_on_disconnected_graph_per_component():
    g = Graph.from_one_based(6, [(1, 2, 1), (2, 3, 1), (4, 5, 2), (5, 6, 2)])
    E = port_matrix([Port(0, 2), Port(3, 5)], 6)
    # series resistances 2 and 1, no coupling
    assert hinf_network(NetworkSystem(g, E)).gamma == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(PortDisconnectedError) as exc:
        hinf_network(NetworkSystem(g, port_matrix([Port(0, 5)], 6)))
    assert exc.value.offending == (0,)


def test_scaling_law():
    rng = np.random.default_rng(11)
    g = random_connected(rng, 7)
    E = port_matrix(random_ports(rng, 7, 2), 7)
    base = hinf_network(NetworkSystem(g, E)).gamma
    for a in (0.5, 2, 10):
        scaled = hinf_network(NetworkSystem(g.with_weights(a * g.weights), E)).gamma
        assert scaled == pytest.approx(base / a, rel=1e-9)


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        NetworkSystem(Graph(2, (Edge(0, 1, -1.0),)), np.array([1.0, -1.0]))


def test_lmi_k2_boundary():
    L = laplacian(K2)
    E = port_matrix(K2_PORT, 2)
    assert lmi_feasible(L, E, 0.5).feasible
    assert abs(lmi_feasible(L, E, 0.5).margin) < 1e-12
    assert not lmi_feasible(L, E, 0.4).feasible
    # direct 3x3 block eigenvalues
    M = np.block([[L, E], [E.T, 0.4 * np.eye(1)]])
    assert lmi_feasible(L, E, 0.4).margin == pytest.approx(np.linalg.eigvalsh(M).min())
    assert not lmi_feasible(L, E, 0.0).feasible
    assert not lmi_feasible_schur(L, E, 0.0)


def test_lmi_five_node():
    L = laplacian(five_node(FIVE_OPT))
    E = port_matrix(FIVE_PORTS, 5)
    assert lmi_feasible(L, E, 1.0).feasible and lmi_feasible_schur(L, E, 1.0)
    assert not lmi_feasible(L, E, 0.99).feasible and not lmi_feasible_schur(L, E, 0.99)


def test_riccati_examples():
    r = riccati_check(SymmetricSystem(-np.eye(3), np.eye(3)), 1.0)
    assert r.satisfied and np.abs(r.residual).max() == 0
    r = riccati_check(SymmetricSystem(np.array([[-2.0]]), np.array([[1.0]])), 0.25)
    assert not r.satisfied
    assert hinf_symmetric(SymmetricSystem(np.array([[-2.0]]), np.array([[1.0]]))) == pytest.approx(0.5)


def test_riccati_residual_formula():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(4, 4))
    A = -(X @ X.T + 0.5 * np.eye(4))
    B = rng.normal(size=(4, 2))
    g = 0.7
    full = g * A + A * g + B @ B.T + (1 / g**2) * (g * np.eye(4)) @ B @ B.T @ (g * np.eye(4))
    assert np.allclose(riccati_check(SymmetricSystem(A, B), g).residual, full)


def test_riccati_on_deflated_five_node():
    ds = deflated_system(laplacian(five_node(FIVE_OPT)), port_matrix(FIVE_PORTS, 5))
    assert riccati_check(ds, 1.0).satisfied
    assert not riccati_check(ds, 0.99).satisfied
    assert hinf_symmetric(ds) == pytest.approx(1.0, abs=1e-12)


def test_hinf_symmetric_examples():
    assert hinf_symmetric(SymmetricSystem(-np.eye(2), np.eye(2))) == pytest.approx(1.0)
    sys = SymmetricSystem(-np.diag([1.0, 2.0]), np.array([[1.0], [1.0]]))
    assert hinf_symmetric(sys) == pytest.approx(1.5)
    # frequency-sweep oracle: G(jw) = sum 1/(jw + a_i)
    w = np.r_[0, np.logspace(-3, 3, 500)]
    G = 1 / (1j * w + 1) + 1 / (1j * w + 2)
    assert np.abs(G).max() == pytest.approx(1.5)


def test_symmetric_system_rejects_indefinite():
    with pytest.raises(IndefiniteMatrixError):
        SymmetricSystem(np.diag([-1.0, 0.0]), np.eye(2))
    with pytest.raises(ValueError):
        riccati_check(SymmetricSystem(-np.eye(1), np.eye(1)), 0.0)


def test_freq_response_k2():
    L = laplacian(K2)
    E = port_matrix(K2_PORT, 2)
    assert freq_response(L, E, omega=0.0)[1] == pytest.approx(0.5)
    assert freq_response(L, E, omega=4.0)[1] == pytest.approx(2 / np.sqrt(32), rel=1e-12)
    assert freq_response(L, E, omega=1e9)[1] < 1e-8
    G, _ = freq_response(L, E, omega=4.0)
    direct = E.T @ np.linalg.solve(4j * np.eye(2) + L, E)
    assert np.allclose(G, direct)


def test_freq_response_disconnected_at_zero():
    g = Graph.from_one_based(4, [(1, 2), (3, 4)])
    with pytest.raises(PortDisconnectedError):
        freq_response(laplacian(g), port_matrix([Port(0, 2)], 4), omega=0.0)


def test_sweep_k2_and_five_node():
    L = laplacian(K2)
    E = port_matrix(K2_PORT, 2)
    grid = np.r_[0, np.logspace(-3, 3, 399)]
    sw = hinf_sweep(L, E, grid=grid)
    assert sw.sigma_max == pytest.approx(0.5) and sw.omega_argmax == 0
    sw = hinf_sweep(laplacian(five_node(FIVE_OPT)), port_matrix(FIVE_PORTS, 5))
    assert sw.sigma_max == pytest.approx(1.0, abs=1e-12) and sw.omega_argmax == 0
    assert hinf_sweep(L, np.zeros((2, 1))).sigma_max == 0


def test_sweep_matches_pointwise_solve():
    rng = np.random.default_rng(13)
    g = random_connected(rng, 6)
    L = laplacian(g)
    E = port_matrix(random_ports(rng, 6, 2), 6)
    grid = default_grid(L, 30)
    sw = hinf_sweep(L, E, grid=grid)
    ref = [freq_response(L, E, omega=w)[1] for w in grid]
    assert np.allclose(sw.sigmas, ref, rtol=1e-10)


def test_default_grid():
    L = laplacian(complete(3))
    grid = default_grid(L, 400)
    assert grid[0] == 0 and len(grid) == 401
    assert grid[1] == pytest.approx(3e-3) and grid[-1] == pytest.approx(3e3)
    assert default_grid(L, 0).tolist() == [0.0]


def test_hinf_general_against_dense_sweep():
    rng = np.random.default_rng(14)
    for _ in range(5):
        g = random_connected(rng, 6)
        L = laplacian(g)
        E = port_matrix(random_ports(rng, 6, 1), 6)
        C = rng.normal(size=(1, 6))
        C -= C.mean()
        val = hinf_general(L, E, C)
        dense = max(freq_response(L, E, C, w)[1] for w in np.r_[0, np.logspace(-4, 4, 4000)])
        assert val >= dense - 1e-7
        assert val == pytest.approx(dense, rel=1e-3)


def test_corollary_examples():
    L = laplacian(Graph(2, (Edge(0, 1, 1.0),)))
    e = np.array([1.0, -1.0])
    assert corollary_bound(L, e, e) == pytest.approx(1.0)
    assert hinf_general(L, e, e) == pytest.approx(1.0)
    L3 = laplacian(complete(3))
    e3 = np.array([1.0, -1.0, 0.0])
    assert corollary_bound(L3, e3, e3) == pytest.approx(2 / 3)
    assert hinf_general(L3, e3, e3) == pytest.approx(2 / 3)
    P3 = laplacian(path(3))
    ep = np.array([1.0, 0.0, -1.0])
    assert corollary_bound(P3, ep, ep) == pytest.approx(2.0)
    assert hinf_general(P3, ep, ep) == pytest.approx(2.0)


def test_corollary_rejects():
    L = laplacian(Graph.from_one_based(4, [(1, 2), (3, 4)]))
    e = np.array([1.0, -1.0, 0, 0])
    with pytest.raises(PortDisconnectedError):
        corollary_bound(L, e, e)
    with pytest.raises(ValueError):
        corollary_bound(laplacian(complete(3)), np.array([1.0, 0, 0]), np.array([1.0, -1.0, 0]))


def test_argmax_c():
    L4 = laplacian(complete(4))
    e = np.array([1.0, -1.0, 0, 0])
    assert argmax_c_check(L4, e, trials=500)
    assert hinf_general(L4, e, -e) == pytest.approx(hinf_general(L4, e, e))
    with pytest.raises(ValueError):
        argmax_c_check(laplacian(path(4)), e)
