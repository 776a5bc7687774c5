import sys
from pathlib import Path

import pytest

from euslem.analyzer import AnalyzerConfig
from euslem.lexicon import parse_lexicon
from euslem.pipeline import build_network, default_path, read_text
from euslem.tagset import load_tagset
from euslem.twolevel import parse_rules

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def tagset():
    return load_tagset(read_text(default_path("tagset")))


@pytest.fixture(scope="session")
def rules():
    return parse_rules(read_text(default_path("rules")))


@pytest.fixture(scope="session")
def lexicon(tagset):
    return parse_lexicon(read_text(default_path("lexicon")),
                         categories=tagset.categories + tuple(tagset.derived_categories))


@pytest.fixture(scope="session")
def net(tagset):
    return build_network(default_path("lexicon"), default_path("rules"), 2, tagset)


@pytest.fixture(scope="session")
def cfg(tagset):
    return AnalyzerConfig(derivation_map=tagset.derivation_map)
