import pytest

from synth import fixture
from transrl.conll import read_json_corpus


@pytest.fixture(scope="session")
def train_corpus():
    return read_json_corpus(fixture("train.json"))


@pytest.fixture(scope="session")
def dev_corpus():
    return read_json_corpus(fixture("dev.json"))


@pytest.fixture(scope="session")
def tiny_corpus():
    return read_json_corpus(fixture("tiny.json"))


@pytest.fixture(scope="session")
def trained_small(train_corpus):
    """A small model after a few epochs: peaked enough that beam and greedy can differ."""
    from transrl.scorer import ModelConfig
    from transrl.trainer import TrainConfig, train
    return train(train_corpus, [], TrainConfig(lr=1e-2, l2=0.0, max_epochs=8, patience=100),
                 ModelConfig.small()).model


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda x: int(x.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
