import pytest

from protcascade.cascade import TrainConfig, train_bundle
from protcascade.seqio import LabeledCorpus
from protcascade.synth import SynthSpec, gen_synth

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def small_split():
    corpus, motifs = gen_synth(
        SynthSpec(families=3, per_family=24, len_min=30, len_max=60, motifs=2, motif_len=5, seed=7)
    )
    train, test = [], []
    for seq, label in corpus.records:
        index = int(seq.id.rsplit("_", 1)[1])
        (train if index <= 16 else test).append((seq, label))
    return LabeledCorpus(train), LabeledCorpus(test), motifs


@pytest.fixture(scope="session")
def small_bundle(small_split):
    train, _, _ = small_split
    return train_bundle(train, TrainConfig(hidden=16, epochs=150, top_k=8))


@pytest.fixture
def acceptance():
    """Record one pass/fail line per criterion; printed in the terminal summary."""

    def record(criterion: str, passed: bool, detail: str = "") -> bool:
        ACCEPTANCE_RESULTS.append((criterion, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {criterion}  {detail}".rstrip())
