import pytest

import greenledger as gl
from greenledger.classifiers import classical as classical_mod


@pytest.fixture(scope="session")
def tax():
    return gl.compose_all(gl.canonical_taxonomy(), gl.canonical_naics_texts())


@pytest.fixture(scope="session")
def small_corpus(tax):
    return gl.synth_generate(tax, n_per_class=6, seed=7)


@pytest.fixture(scope="session")
def small_split(small_corpus):
    return gl.split(small_corpus, seed=7)


# Frozen acceptance-scale dataset: 40 per class, seed 7, 70:20:10.
@pytest.fixture(scope="session")
def acceptance_split(tax):
    corpus = gl.synth_generate(tax, n_per_class=40, seed=7)
    return gl.split(corpus, seed=7)


@pytest.fixture(scope="session")
def classical_tfidf_model(acceptance_split):
    featurizer = gl.fit_tfidf([ex.text for ex in acceptance_split.train])
    return classical_mod.train_classical(
        list(acceptance_split.train) + list(acceptance_split.validation),
        featurizer,
        seed=7,
    )
