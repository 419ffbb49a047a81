import pytest

from mconcave import default_corpus, matroid_rank_fn, uniform_matroid


@pytest.fixture(scope="session")
def corpus():
    return default_corpus()


@pytest.fixture(scope="session")
def corpus_by_id(corpus):
    return {inst.instance_id: inst for inst in corpus}


@pytest.fixture()
def rank_u24():
    return matroid_rank_fn(uniform_matroid(4, 2))
