import numpy as np
import pytest

from linsubmod import InvalidParam, InvalidSpec, LogDetObjective
from linsubmod import instances as inst
from linsubmod.instances import FIX_A, FIXTURE_SEED


def test_graph_edge_count_n10000_seed7():
    nodes, edges = inst.random_graph_with_hubs(10000, 7)
    assert nodes == 10020
    assert len(edges) == 10000 + 20 * 50
    assert len(set(edges)) == len(edges)
    assert all(a != b for a, b in edges)


def test_graph_hubs_have_degree_50():
    nodes, edges = inst.random_graph_with_hubs(500, 1)
    deg = np.bincount(np.array(edges).ravel(), minlength=nodes)
    assert (deg[500:] == 50).all()


def test_generators_are_deterministic():
    assert inst.random_graph_with_hubs(300, 4) == inst.random_graph_with_hubs(300, 4)
    assert inst.random_graph_with_hubs(300, 4) != inst.random_graph_with_hubs(300, 5)
    assert np.array_equal(inst.random_psd_kernel(6, 2), inst.random_psd_kernel(6, 2))
    assert inst.random_coverage(20, 9) == inst.random_coverage(20, 9)


def test_graph_validation():
    with pytest.raises(InvalidParam):
        inst.random_graph_with_hubs(1, 0)
    with pytest.raises(InvalidParam):
        inst.random_graph_with_hubs(30, 0)  # hub degree 50 > 30 nodes


def test_coverage_fixture_pin():
    assert inst.random_coverage(3, FIXTURE_SEED) == [set(s) for s in FIX_A]
    assert all(inst.random_coverage(10, 3))


def test_psd_kernel_cholesky():
    K = inst.random_psd_kernel(5, 0)
    assert np.allclose(K, K.T)
    np.linalg.cholesky(K + np.eye(5))
    assert np.linalg.eigvalsh(K).min() > -1e-12


def test_similarity_matrix():
    X = np.array([[0.0, 0.0], [3.0, 4.0]])
    M = inst.similarity_matrix(X, 0.5)
    assert M[0, 0] == 1 and M[0, 1] == pytest.approx(np.exp(-2.5))


@pytest.mark.parametrize("kind", inst.GEN_KINDS)
def test_generate_caches_files(tmp_path, kind):
    p1 = inst.generate(kind, 60, {}, 3, tmp_path)
    stamp = p1.stat().st_mtime_ns
    p2 = inst.generate(kind, 60, {}, 3, tmp_path)
    assert p1 == p2 and p2.stat().st_mtime_ns == stamp
    assert inst.generate(kind, 60, {}, 4, tmp_path) != p1
    assert not list(tmp_path.glob("*.tmp"))


def test_generate_unknown_kind(tmp_path):
    with pytest.raises(InvalidParam):
        inst.generate("nope", 5, {}, 0, tmp_path)


def test_edge_list_round_trip(tmp_path):
    path = tmp_path / "g.edges"
    inst.write_edge_list(path, 6, [(0, 1), (1, 2)])
    assert inst.load_edge_list(path) == (6, [(0, 1), (1, 2)])
    f = inst.load_objective("graph", path)
    assert f.n == 6 and f([1]) == 3 and f([5]) == 1


def test_coverage_round_trip(tmp_path):
    path = tmp_path / "c.csv"
    inst.write_coverage(path, FIX_A)
    f = inst.load_objective("coverage", path)
    assert f.n == 3 and f([0, 1]) == 3 and f([0, 1, 2]) == 4


def test_generated_files_load(tmp_path):
    K = inst.load_objective("kernel-logdet", inst.generate("random-psd-kernel", 6, {}, 0, tmp_path))
    assert isinstance(K, LogDetObjective) and K.n == 6
    F = inst.load_objective("facility", inst.generate("random-feature-cloud", 7, {}, 0, tmp_path))
    assert F.n == 7 and F(range(7)) >= F([0])
    L = inst.load_objective("logdet", inst.generate("random-feature-cloud", 7, {}, 0, tmp_path))
    assert L([0, 1]) >= L([0]) >= 0


def test_sqrt_coverage_loader(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("word,element,score\n0,0,4\n0,1,5\n1,1,9\n")
    f = inst.load_objective("sqrt-coverage", path)
    assert f([0]) == pytest.approx(2) and f([0, 1]) == pytest.approx(3 + 3)


def test_costs_and_partition_loaders(tmp_path):
    c = tmp_path / "costs.csv"
    c.write_text("element,c1,c2\n0,0.5,0.1\n2,0.25,1\n")
    C = inst.load_costs(c, 4)
    assert C.shape == (2, 4) and C[0, 2] == 0.25 and C[1, 1] == 0
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n1,1,2\n")
    with pytest.raises(InvalidSpec):
        inst.load_costs(bad)
    p = tmp_path / "parts.csv"
    p.write_text("element,part\n0,0\n1,0\n2,1\n")
    M = inst.load_partition(p, 1, 3)
    assert M.is_independent([0, 2]) and not M.is_independent([0, 1])


def test_unknown_objective_kind(tmp_path):
    with pytest.raises(InvalidSpec):
        inst.load_objective("nope", tmp_path / "x")
