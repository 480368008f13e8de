import pytest
from hypothesis import given, strategies as st

from mdqa.lcs import lcs_len, lcs_len_bitparallel, lcs_len_dp
from mdqa.textproc import Level, TokenSeq, normalize, tokenize_chars, tokenize_words
from oracles import lcs_brute, lcs_table

seqs = st.lists(st.sampled_from("abcd"), max_size=12)
wide = st.lists(st.integers(0, 300), max_size=120)


def chars(s: str) -> TokenSeq:
    return tokenize_chars(normalize(s, strict=True))


def test_textbook_example():
    assert lcs_brute("ABCBDAB", "BDCABA") == 4
    for method in ("dp", "bitparallel", "auto"):
        assert lcs_len(chars("ABCBDAB"), chars("BDCABA"), method=method) == 4


@pytest.mark.parametrize("s", ["", "a", "hello", "mississippi"])
def test_identity_and_empty(s):
    assert lcs_len(chars(s), chars(s)) == len(s)
    assert lcs_len(chars(s), chars("")) == 0


def test_level_mismatch_rejected():
    with pytest.raises(ValueError):
        lcs_len(tokenize_words("a b"), tokenize_chars("ab"))


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        lcs_len(chars("a"), chars("a"), method="fast")


def test_word_level_sequences():
    a = tokenize_words("the cat sat on the mat")
    b = tokenize_words("the dog sat on a mat")
    assert lcs_len(a, b) == lcs_len(a, b, method="dp") == 4


def test_bitparallel_crosses_machine_word_boundaries():
    a = ("ab" * 70)[:131]
    b = ("ba" * 70)[:129]
    assert lcs_len_bitparallel(a, b) == lcs_table(a, b)


@given(seqs, seqs)
def test_dp_matches_enumeration(a, b):
    assert lcs_len_dp(a, b) == lcs_brute(a, b)


@given(wide, wide)
def test_bitparallel_matches_dp(a, b):
    assert lcs_len_bitparallel(a, b) == lcs_len_dp(a, b) == lcs_table(a, b)


@given(seqs, seqs, st.sampled_from("abcdxyz"))
def test_lcs_properties(a, b, tok):
    ta, tb = TokenSeq(tuple(a), Level.CHAR), TokenSeq(tuple(b), Level.CHAR)
    n = lcs_len(ta, tb)
    assert n == lcs_len(tb, ta)
    assert n <= min(len(a), len(b))
    extended = lcs_len(TokenSeq(ta.tokens + (tok,), Level.CHAR), TokenSeq(tb.tokens + (tok,), Level.CHAR))
    assert extended == n + 1
