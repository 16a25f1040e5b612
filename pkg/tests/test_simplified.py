import numpy as np
import pytest

from secbroadcast.errors import DomainError
from secbroadcast.protocol.simplified import run_simplified_session
from secbroadcast.trace import first_difference, read_trace, render_trace, write_trace

STATES = ["B", "BC", "C", "C", "B", "C", "B", "BC", "C", "None", "B", "B", "BC", "BC"]

# the worked example, transcribed row by row
ALICE_SENDS = [
    "X_1 random", "X_2 random", "X_3 random", "X_4 random", "X_5 random",
    "X_6=W_{1,1}⊕K_{B,1}", "X_7=W_{1,2}⊕K_{B,2}", "X_8=W_{1,3}⊕K_{B,2}",
    "X_9=W_{2,1}⊕K_{C,1}", "X_10=W_{2,2}⊕K_{C,1}", "X_11=X_10", "X_12=W_{2,3}⊕K_{C,2}",
    "X_13=X_6⊕X_11", "X_14=X_12",
]


@pytest.fixture(scope="module")
def example():
    return run_simplified_session(STATES, 3, 3, key_sizes=(2, 2), q=256, L=2)


def test_alice_sends_column(example):
    assert example.alice_sends == ALICE_SENDS
    assert example.complete


def test_keys_come_from_exclusive_receptions(example):
    # Bob: X_1, X_5; Calvin: X_3, X_4; X_2 seen by both is discarded
    assert example.bob_keys == [1, 5]
    assert example.calvin_keys == [3, 4]


def test_decoded_columns(example):
    assert example.bob_decoded == ["W_{1,2}", "W_{1,3}", "W_{1,1}"]
    assert example.calvin_decoded == ["W_{2,1}", "W_{2,2}", "W_{2,3}"]


def test_values_follow_the_expressions(example):
    x = example.x
    col = lambda i: x[:, i - 1]  # noqa: E731
    assert np.array_equal(col(11), col(10))
    assert np.array_equal(col(14), col(12))
    assert np.array_equal(col(13), col(6) ^ col(11))
    # K_{B,1} = X_1, so X_6 xor X_1 is W_{1,1}, a fixed function of the seed
    again = run_simplified_session(STATES, 3, 3, key_sizes=(2, 2), q=256, L=2)
    assert np.array_equal(again.x, x)


def test_empty_messages_empty_trace():
    tr = run_simplified_session([], 0, 0, key_sizes=(0, 0))
    assert len(tr) == 0 and tr.complete


def test_all_both_states_generate_no_keys():
    tr = run_simplified_session(["BC"] * 12, 2, 2, key_sizes=(1, 1))
    assert tr.bob_keys == [] and tr.calvin_keys == []
    assert not tr.complete
    assert all(s == "random" for s in tr.exprs)


def test_running_out_marks_incomplete():
    tr = run_simplified_session(STATES[:9], 3, 3, key_sizes=(2, 2))
    assert not tr.complete and len(tr) == 9


def test_needs_binary_field():
    with pytest.raises(DomainError):
        run_simplified_session(STATES, 3, 3, key_sizes=(2, 2), q=13)


def test_trace_roundtrip(example, tmp_path):
    path = tmp_path / "t.csv"
    text = write_trace(path, example)
    header, rows = read_trace(path)
    assert header == {"q": 256, "L": 2, "N1": 3, "N2": 3, "seed": 0}
    assert [r["S"] for r in rows] == STATES
    assert rows[0]["y2_hex"] == "⊥" and rows[0]["y1_hex"] == rows[0]["x_hex"]
    assert rows[9]["y1_hex"] == rows[9]["y2_hex"] == "⊥"
    assert len(rows[0]["x_hex"]) == 4
    assert first_difference(text, render_trace(example)) is None


def test_first_difference():
    assert first_difference("a\nb\n", "a\nc\n") == 2
    assert first_difference("a\n", "a\nb\n") == 2
    assert first_difference("", "") is None
