import random
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from mdqa.corpus import Sample, Turn
from mdqa.docfilter import Action, DocScorecard, FilterConfig, apply_filter, compute_flags, score_corpus, score_documents
from mdqa.errors import CardMismatch, ConfigError

Q = "what is the capital city of france"


def one(doc, question=Q, **cfg):
    return score_documents(Sample("s", question, documents=(doc,)), FilterConfig(**cfg))[0]


def test_question_duplicate_is_high_on_every_indicator():
    c = one(Q)
    assert (c.cos_q, c.wrl_q, c.crl_q) == (1.0, 1.0, 1.0)
    assert {"high:cos_q", "high:wrl_q", "high:crl_q"} <= c.flags
    strictest = FilterConfig(thresholds={k: (1.0, 0.5) for k in ("cos", "wrl", "crl")})
    assert {"high:cos_q", "high:wrl_q", "high:crl_q"} <= compute_flags(c, strictest)


def test_overlap_free_document_is_low_on_lexical_indicators():
    c = one("βγδ ζηθ", thresholds={"wrl": (0.9, 0.01), "crl": (0.9, 0.01)})
    assert c.wrl_q == c.crl_q == 0.0
    assert {"low:wrl_q", "low:crl_q"} <= c.flags


def test_low_threshold_zero_disables_low_flags():
    c = one("βγδ ζηθ")
    assert not {"low:wrl_q", "low:crl_q"} & c.flags


def test_mid_band_document_is_unflagged():
    # found by brute-force search over permutations of small word sets
    c = one("paris is")
    assert 0.05 < c.cos_q < 0.95
    assert 0.0 < c.wrl_q < 0.9 and 0.0 < c.crl_q < 0.9
    assert c.flags == frozenset()


def test_history_variants():
    s = Sample("s", "capital?", (Turn("tell me about france", "it is in europe"),), ("france is in europe",))
    plain = score_documents(s, FilterConfig())[0]
    hist = score_documents(s, FilterConfig(embed_with_history=True, lexical_with_history=True))[0]
    assert plain.cos_qh == hist.cos_qh and plain.cos_qh > plain.cos_q
    assert hist.wrl_q > plain.wrl_q
    assert not any(f.endswith(":cos_q") for f in hist.flags)


def test_scores_are_deterministic():
    s = Sample("s", Q, documents=("paris", "lyon is a city", Q))
    assert score_documents(s, FilterConfig()) == score_documents(s, FilterConfig())


def test_no_documents():
    assert score_documents(Sample("s", Q), FilterConfig()) == []


@pytest.mark.parametrize("pair", [(0.5, 0.5), (0.2, 0.6), (1.1, 0.0), (0.9, -0.1)])
def test_threshold_validation(pair):
    with pytest.raises(ConfigError):
        FilterConfig(thresholds={"cos": pair})


def test_unknown_indicator():
    with pytest.raises(ConfigError):
        FilterConfig(thresholds={"bleu": (0.9, 0.1)})


def _corpus():
    return [
        Sample("a", Q, documents=("paris is", Q, "paris is the capital")),
        Sample("b", "who wrote hamlet", documents=("shakespeare wrote it", "xyz")),
    ]


def test_report_only_leaves_samples_unchanged():
    samples = _corpus()
    cfg = FilterConfig()
    res = apply_filter(samples, score_corpus(samples, cfg), cfg)
    assert res.kept == samples
    assert res.report.n_dropped == 0
    assert res.report.n_flagged == sum(bool(c.flags) for c in score_corpus(samples, cfg)) > 0


def test_drop_preserves_order():
    samples = [Sample("a", Q, documents=("d0", "d1", "d2"))]
    cards = [DocScorecard("a", i, 0.5, 0.5, 0.5, 0.5) for i in range(3)]
    cards[1] = replace(cards[1], cos_q=0.99)
    res = apply_filter(samples, cards, FilterConfig(action=Action.DROP))
    assert res.kept[0].documents == ("d0", "d2")
    assert res.report.n_dropped == 1
    assert res.report.by_flag == {"high:cos_q": 1}
    assert samples[0].documents == ("d0", "d1", "d2")


def test_no_flags_anywhere():
    samples = [Sample("a", Q, documents=("d0", "d1"))]
    cards = [DocScorecard("a", i, 0.5, 0.5, 0.5, 0.5) for i in range(2)]
    res = apply_filter(samples, cards, FilterConfig(action="drop"))
    assert res.kept == samples
    assert res.report.to_dict() == {"flagged": [], "n_flagged": 0, "n_dropped": 0, "by_flag": {}}


def test_card_mismatch():
    samples = _corpus()
    cards = score_corpus(samples, FilterConfig())
    with pytest.raises(CardMismatch):
        apply_filter(samples, cards[:-1], FilterConfig())
    with pytest.raises(CardMismatch):
        apply_filter(samples, cards + cards[:1], FilterConfig())
    with pytest.raises(CardMismatch):
        apply_filter(samples, cards + [DocScorecard("zz", 0, 0, 0, 0, 0)], FilterConfig())


def test_report_json_shape():
    samples = _corpus()
    res = apply_filter(samples, score_corpus(samples, FilterConfig()), FilterConfig())
    d = res.report.to_dict()
    assert set(d) == {"flagged", "n_flagged", "n_dropped", "by_flag"}
    entry = d["flagged"][0]
    assert set(entry) == {"sample_id", "doc_index", "scores", "flags"}
    assert set(entry["scores"]) == {"cos_q", "cos_qh", "wrl_q", "crl_q"}


unit = st.floats(0, 1)


@given(st.tuples(unit, unit, unit, unit), st.tuples(unit, unit), st.tuples(unit, unit))
def test_flag_monotonicity(scores, base, delta):
    lo, hi = sorted(base)
    if not lo < hi:
        return
    card = DocScorecard("s", 0, *scores)
    cfg = FilterConfig(thresholds={k: (hi, lo) for k in ("cos", "wrl", "crl")})
    new_lo = min(lo + delta[0] * (hi - lo), hi)
    new_hi = max(hi - delta[1] * (hi - new_lo), new_lo)
    if not new_lo < new_hi:
        return
    tighter = FilterConfig(thresholds={k: (new_hi, new_lo) for k in ("cos", "wrl", "crl")})
    assert compute_flags(card, cfg) <= compute_flags(card, tighter)


def test_score_corpus_worker_invariance():
    rng = random.Random(3)
    samples = [
        Sample(f"s{i}", " ".join(rng.choice("abcdef") for _ in range(6)),
               documents=tuple(" ".join(rng.choice("abcdefgh") for _ in range(rng.randint(1, 8))) for _ in range(3)))
        for i in range(12)
    ]
    assert score_corpus(samples, FilterConfig(), workers=1) == score_corpus(samples, FilterConfig(), workers=2)
