"""Full-pipeline stemmer vectors, each traced by hand through all steps."""

import pytest

from skybench.metrics.stem import porter_stem

VECTORS = [
    # plurals and -ed/-ing
    ("caresses", "caress"),
    ("ponies", "poni"),
    ("ties", "ti"),
    ("cats", "cat"),
    ("feed", "feed"),
    ("agreed", "agre"),
    ("plastered", "plaster"),
    ("motoring", "motor"),
    ("hopping", "hop"),
    ("falling", "fall"),
    ("filing", "file"),
    ("sized", "size"),
    ("happy", "happi"),
    ("sky", "sky"),
    # suffix chains
    ("relational", "relat"),
    ("conditional", "condit"),
    ("rational", "ration"),
    ("electricity", "electr"),
    ("vietnamization", "vietnam"),
    ("predication", "predic"),
    ("operator", "oper"),
    ("feudalism", "feudal"),
    ("decisiveness", "decis"),
    ("hopefulness", "hope"),
    ("callousness", "callous"),
    ("formality", "formal"),
    ("sensitivity", "sensit"),
    ("triplicate", "triplic"),
    ("formative", "form"),
    ("formalize", "formal"),
    ("electrical", "electr"),
    ("hopeful", "hope"),
    ("goodness", "good"),
    ("revival", "reviv"),
    ("allowance", "allow"),
    ("inference", "infer"),
    ("airliner", "airlin"),
    ("adjustable", "adjust"),
    ("defensible", "defens"),
    ("irritant", "irrit"),
    ("replacement", "replac"),
    ("adjustment", "adjust"),
    ("dependent", "depend"),
    ("adoption", "adopt"),
    ("communism", "commun"),
    ("activate", "activ"),
    ("effective", "effect"),
    ("bowdlerize", "bowdler"),
    ("probate", "probat"),
    ("cease", "ceas"),
    ("controlling", "control"),
    ("roll", "roll"),
]


@pytest.mark.parametrize("word,expected", VECTORS)
def test_vectors(word, expected):
    assert porter_stem(word) == expected


def test_short_words_unchanged():
    for word in ("a", "is", "by", "to"):
        assert porter_stem(word) == word


def test_idempotent_on_vectors():
    for _, stem in VECTORS:
        assert porter_stem(porter_stem(stem)) == porter_stem(stem)
