from pathlib import Path

import pytest

from cacmod import load_file, load_signature, parse_term

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus(name):
    return load_file(CORPUS / f"{name}.cac")


def term(sig, text):
    return parse_term(text, sig)


NAT = """
symbol nat : *
symbol zero : nat
symbol s : nat => nat
symbol plus : nat => nat => nat
rule [x:nat] plus x zero -> x
rule [x:nat, y:nat] plus x (s y) -> s (plus x y)
"""

COMM = "eq [x:nat, y:nat] plus x y = plus y x\n"
ASSOC = "eq [x:nat, y:nat, z:nat] plus x (plus y z) = plus (plus x y) z\n"


@pytest.fixture(scope="session")
def nat_ac():
    return corpus("nat_ac")


@pytest.fixture(scope="session")
def lists():
    return corpus("lists")


@pytest.fixture(scope="session")
def sets():
    return corpus("sets")


@pytest.fixture(scope="session")
def nat_rules():
    return load_signature(NAT)


@pytest.fixture(scope="session")
def nat_comm():
    return load_signature(NAT + COMM)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
