import unicodedata

from hypothesis import given, strategies as st

from mdqa.textproc import Level, is_cjk_ideograph, normalize, tokenize_chars, tokenize_words


def test_normalize_examples():
    assert normalize("  Hello\tWorld ").normalized == "hello world"
    assert normalize("").normalized == ""
    # fullwidth Latin sits at a fixed 0xFEE0 offset from ASCII
    fullwidth = "ＡＢＣ"
    expected = "".join(chr(ord(c) - 0xFEE0) for c in fullwidth).lower()
    assert normalize(fullwidth).normalized == expected == "abc"


def test_normalize_keeps_original():
    t = normalize(" X ")
    assert t.original == " X "


def test_strict_mode_only_collapses_whitespace():
    assert normalize("  ＡB\n c", strict=True).normalized == "ＡB c"


def test_tokenize_words_examples():
    assert tokenize_words(normalize("the cat sat")).tokens == ("the", "cat", "sat")
    assert tokenize_words(normalize("")).tokens == ()
    tokens = tokenize_words(normalize("我爱nlp")).tokens
    classes = ["CJK" if unicodedata.name(c).startswith("CJK UNIFIED IDEOGRAPH") else "other" for c in "我爱nlp"]
    assert classes == ["CJK", "CJK", "other", "other", "other"]
    assert tokens == ("我", "爱", "nlp")


def test_punctuation_is_kept_in_words():
    assert tokenize_words(normalize("hi, there!")).tokens == ("hi,", "there!")


def test_tokenize_chars_examples():
    assert tokenize_chars(normalize("ab c")).tokens == ("a", "b", "c")
    assert tokenize_chars(normalize("")).tokens == ()
    assert tokenize_chars(normalize("猫坐")).tokens == ("猫", "坐")


def test_cjk_detection_agrees_with_unicode_names():
    for cp in list(range(0x3300, 0x3500)) + list(range(0x4DB0, 0x4E10)) + list(range(0x9FF0, 0xA010)):
        ch = chr(cp)
        name = unicodedata.name(ch, "")
        if not name:
            continue  # unassigned in this Python's Unicode database
        assert is_cjk_ideograph(ch) == name.startswith("CJK UNIFIED IDEOGRAPH"), hex(cp)


@given(st.text())
def test_normalize_is_idempotent(raw):
    once = normalize(raw)
    assert normalize(once.normalized).normalized == once.normalized


@given(st.text())
def test_normalized_whitespace_shape(raw):
    n = normalize(raw).normalized
    assert "  " not in n
    assert n == n.strip()
    assert all(c == " " or not c.isspace() for c in n)


@given(st.text())
def test_token_invariants(raw):
    t = normalize(raw)
    words = tokenize_words(t)
    chars = tokenize_chars(t)
    assert words.level is Level.WORD and chars.level is Level.CHAR
    assert "".join(chars.tokens) == t.normalized.replace(" ", "")
    assert all(len(c) == 1 and not c.isspace() for c in chars.tokens)
    assert all(w and not any(c.isspace() for c in w) for w in words.tokens)
    assert all(len(w) == 1 for w in words.tokens if any(is_cjk_ideograph(c) for c in w))
    assert len(words) <= len(chars)
