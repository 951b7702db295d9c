import pytest

from qdnet.bandit import build_nanodm
from qdnet.cnf import EXAMPLE_FORMULA, planted_3sat, to_dimacs
from qdnet.model import build_standard_network
from qdnet.seeding import derive_rng
from qdnet.simulate import transfer_profile

# Master seed for the generated satisfiable instance sets.  The sets
# stand in for the public uf20-91 / uf50-218 benchmark suites: same
# variable and clause counts, satisfiability guaranteed by construction.
INSTANCE_SEED = 11


def make_instances(num_vars: int, num_clauses: int, count: int = 20):
    out = []
    for k in range(count):
        name = f"uf{num_vars}-{num_clauses}-{k:02d}"
        formula, _ = planted_3sat(
            num_vars, num_clauses, derive_rng(INSTANCE_SEED, "uf", num_vars, k), name=name
        )
        out.append((name, formula))
    return out


@pytest.fixture(scope="session")
def standard_network():
    return build_standard_network()


@pytest.fixture(scope="session")
def profile_g1(standard_network):
    return transfer_profile(standard_network)


@pytest.fixture(scope="session")
def phi_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cnf") / "phi.cnf"
    path.write_text(to_dimacs(EXAMPLE_FORMULA))
    return path


@pytest.fixture(scope="session")
def uf20_instances():
    return make_instances(20, 91)


@pytest.fixture(scope="session")
def uf50_instances():
    return make_instances(50, 218)


@pytest.fixture(scope="session")
def nanodm_model():
    return build_nanodm()
