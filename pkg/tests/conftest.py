import pytest

from moltraverse.dataset import load_dataset
from moltraverse.grammar import load_default_grammar, load_grammar
from moltraverse.latent import GrammarLogitDecoder, ProjectionEncoder
from moltraverse.traversal import HeuristicWeights, build_index, build_poi_graph

TOY_GRAMMAR = "S -> 'a'\nS -> '(' S ')'\n"


@pytest.fixture(scope="session")
def toy_grammar():
    return load_grammar(TOY_GRAMMAR)


@pytest.fixture(scope="session")
def grammar():
    return load_default_grammar()


@pytest.fixture(scope="session")
def corpus(grammar):
    from importlib import resources

    with resources.as_file(
        resources.files("moltraverse.data").joinpath("corpus.csv")
    ) as path:
        result = load_dataset(path, grammar)
    assert not result.rejected
    return result.records


@pytest.fixture(scope="session")
def encoder(grammar):
    return ProjectionEncoder(grammar)


@pytest.fixture(scope="session")
def index(corpus, encoder):
    return build_index(corpus, encoder)


@pytest.fixture(scope="session")
def decoder(grammar, index):
    return GrammarLogitDecoder(grammar, latent_dim=index.dim)


@pytest.fixture(scope="session")
def poi_graph(index, decoder):
    return build_poi_graph(index, decoder, 8, HeuristicWeights())
