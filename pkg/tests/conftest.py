import pytest

from packlab import embedding as em
from packlab import packing as pk
from packlab import triangulation as tr

# desk-scale instances shared across test modules; packing the largest
# member once per session keeps the suite fast


@pytest.fixture(scope="session")
def lat4_seq():
    return tr.lattice_ball(4)


@pytest.fixture(scope="session")
def lat8_seq():
    return tr.lattice_ball(8)


@pytest.fixture(scope="session")
def hyp75_seq():
    return tr.hyperbolic_ball(7, 5)


@pytest.fixture(scope="session")
def tube516_seq():
    return tr.tube(5, 16)


@pytest.fixture(scope="session")
def tree543_seq():
    return tr.tree_of_tubes(5, 4, 3)


@pytest.fixture(scope="session")
def lat4_emb(lat4_seq):
    return em.embed_complex(lat4_seq.largest)


@pytest.fixture(scope="session")
def lat8_embs(lat8_seq):
    return em.embed_exhaustion(lat8_seq)


@pytest.fixture(scope="session")
def hyp75_embs(hyp75_seq):
    return em.embed_exhaustion(hyp75_seq)


@pytest.fixture(scope="session")
def tube516_embs(tube516_seq):
    return em.embed_exhaustion(tube516_seq)


@pytest.fixture(scope="session")
def tree543_embs(tree543_seq):
    return em.embed_exhaustion(tree543_seq)


@pytest.fixture(scope="session")
def lat8_layout(lat8_seq):
    return pk.pack(lat8_seq.largest)


@pytest.fixture(scope="session")
def hyp75_layout(hyp75_seq):
    return pk.pack(hyp75_seq.largest)


@pytest.fixture(scope="session")
def acceptance_embs(lat4_emb, lat8_embs, hyp75_embs, tube516_embs,
                    tree543_embs):
    """Largest embedded member of every acceptance instance, by label."""
    return {
        "lattice_ball(4)": lat4_emb,
        "lattice_ball(8)": lat8_embs[-1],
        "hyperbolic_ball(7,5)": hyp75_embs[-1],
        "tube(5,16)": tube516_embs[-1],
        "tree_of_tubes(5,4,3)": tree543_embs[-1],
    }
