import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arocorpus.align import (
    AlignConfig,
    SplitterRules,
    align_documents,
    align_dp,
    align_many,
    document_alignment,
    greedy_matching,
    match_documents,
    pair_verse_tables,
    pair_verses,
    split_sentences,
)
from arocorpus.corpus import DocumentPair
from arocorpus.embeddings import MockProvider, ProviderConfig
from oracles import best_alignment_score


def check_path(path, sim, cfg):
    n, m = np.shape(sim)
    rows = [i for i, _ in path.matches]
    cols = [j for _, j in path.matches]
    assert rows == sorted(set(rows)) and cols == sorted(set(cols))
    assert sorted(rows + path.skipped_src) == list(range(n))
    assert sorted(cols + path.skipped_tgt) == list(range(m))
    assert all(sim[i][j] >= cfg.min_sim for i, j in path.matches)
    assert path.score == pytest.approx(sum(sim[i][j] - cfg.match_penalty for i, j in path.matches), abs=1e-9)


# -- splitter -----------------------------------------------------------------

@pytest.mark.parametrize(
    "text,expected",
    [
        ("Una. Doua. Trei.", ["Una.", "Doua.", "Trei."]),
        ("fara terminator", ["fara terminator"]),
        ("El a zis: «Da.» Apoi a plecat.", ["El a zis: «Da.»", "Apoi a plecat."]),
        ("Vini? «Nu!» Ama...", ["Vini?", "«Nu!»", "Ama..."]),
        ("pi 3.14 ditu. ama lower case", ["pi 3.14 ditu. ama lower case"]),
        ("", []),
    ],
)
def test_split_examples(text, expected):
    assert split_sentences(text) == expected


def test_abbreviations_do_not_end_sentences():
    rules = SplitterRules(abbreviations=frozenset({"Dl.", "cap"}))
    assert split_sentences("Dl. Popescu veni. Cap. 3 Aclo.", rules) == ["Dl. Popescu veni.", "Cap. 3 Aclo."]
    assert len(split_sentences("Dl. Popescu veni.")) == 2


def test_require_space_flag():
    assert split_sentences("Una.Doua.") == ["Una.Doua."]
    assert split_sentences("Una.Doua.", SplitterRules(require_space=False)) == ["Una.", "Doua."]


def test_terminators_must_not_be_empty():
    with pytest.raises(ValueError):
        SplitterRules(terminators=frozenset())


@settings(max_examples=400, deadline=None)
@given(st.text(alphabet="aB .!?…«»\"\n\t", max_size=60))
def test_split_reconstructs_input(text):
    parts = split_sentences(text)
    assert " ".join(" ".join(parts).split()) == " ".join(text.split())
    assert all(p == p.strip() and p for p in parts)


# -- align_dp -----------------------------------------------------------------

def test_identity_matrix():
    path = align_dp(np.eye(3))
    assert path.matches == [(0, 0), (1, 1), (2, 2)]
    assert path.score == pytest.approx(2.1)
    assert path.skipped_src == [] and path.skipped_tgt == []


def test_below_threshold():
    path = align_dp([[0.4]], AlignConfig(min_sim=0.5))
    assert path.matches == [] and path.skipped_src == [0] and path.skipped_tgt == [0]
    assert path.score == 0


def test_empty_matrix():
    path = align_dp(np.zeros((0, 3)))
    assert path.matches == [] and path.skipped_tgt == [0, 1, 2] and path.score == 0


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        align_dp([[np.nan]])
    with pytest.raises(ValueError):
        align_dp([1.0, 2.0])


@pytest.mark.parametrize("fields", [{"min_sim": 1.5}, {"match_penalty": -0.1}])
def test_config_validation(fields):
    with pytest.raises(ValueError):
        AlignConfig(**fields)


def test_tie_break_prefers_match():
    # (0,0) and (0,1) both score 0.7; at the final cell a match beats skip-tgt
    path = align_dp([[1.0, 1.0]])
    assert path.matches == [(0, 1)]
    # at the final cell a match beats skip-src too
    assert align_dp([[1.0], [1.0]]).matches == [(1, 0)]
    assert path.score == pytest.approx(0.7)
    # with a zero-gain match, matching is preferred over skipping
    path = align_dp([[0.5]], AlignConfig(min_sim=0.5, match_penalty=0.5))
    assert path.matches == [(0, 0)]


def test_crossing_pairs_resolved_monotonically():
    sim = [[0.1, 0.9], [0.8, 0.1]]
    path = align_dp(sim)
    assert len(path.matches) == 1 and path.matches == [(0, 1)]


def test_random_6x7_matches_enumeration():
    rng = np.random.default_rng(67)
    sim = rng.uniform(-1, 1, (6, 7))
    path = align_dp(sim)
    assert path.score == best_alignment_score(sim.tolist(), 0.5, 0.3)
    check_path(path, sim, AlignConfig())


@settings(max_examples=150, deadline=None)
@given(
    st.integers(0, 6),
    st.integers(0, 6),
    st.floats(0, 1),
    st.floats(-1, 1),
    st.integers(0, 2**32 - 1),
)
def test_dp_matches_enumeration(n, m, penalty, min_sim, seed):
    sim = np.random.default_rng(seed).uniform(-1, 1, (n, m))
    cfg = AlignConfig(min_sim=min_sim, match_penalty=penalty)
    path = align_dp(sim, cfg)
    assert path.score == best_alignment_score(sim.tolist(), min_sim, penalty)
    check_path(path, sim, cfg)


def test_raising_penalty_never_adds_matches():
    rng = np.random.default_rng(3)
    for _ in range(200):
        sim = rng.uniform(-1, 1, tuple(rng.integers(1, 12, 2)))
        counts = [len(align_dp(sim, AlignConfig(0.0, lam)).matches) for lam in np.linspace(0, 1, 11)]
        assert counts == sorted(counts, reverse=True)


# -- documents ----------------------------------------------------------------

def _keyed():
    # "rup|3" and "ron|3" share the key "3" and so embed identically
    return MockProvider(dim=256, key=lambda t: t.split("|", 1)[1])


def test_identical_documents_align_fully():
    sents = [f"s|{i}" for i in range(4)]
    pairs = align_documents(DocumentPair(sents, sents, "a", "b"), provider=ProviderConfig())
    assert [(p.rup, p.ron) for p in pairs] == [(s, s) for s in sents]
    assert [p.id for p in pairs] == ["a:0-b:0", "a:1-b:1", "a:2-b:2", "a:3-b:3"]


def test_deleted_sentence_is_skipped():
    src = [f"rup|{i}" for i in range(6)]
    tgt = [f"ron|{i}" for i in range(6) if i != 2]
    doc = DocumentPair(src, tgt, "r", "o")
    path = document_alignment(doc, provider=_keyed())
    assert path.skipped_src == [2] and path.skipped_tgt == []
    assert path.matches == [(0, 0), (1, 1), (3, 2), (4, 3), (5, 4)]
    pairs = align_documents(doc, provider=_keyed(), source="radio", genre="news")
    assert len(pairs) == 5
    assert all(p.rup.split("|")[1] == p.ron.split("|")[1] for p in pairs)
    assert {p.source for p in pairs} == {"radio"}


def test_disjoint_documents_mostly_skipped():
    provider = MockProvider(dim=32)
    src = [f"unrelated source {i}" for i in range(20)]
    tgt = [f"other target {i}" for i in range(20)]
    doc = DocumentPair(src, tgt, "a", "b")
    path = document_alignment(doc, provider=provider)
    assert len(path.skipped_src) >= 15
    # a small slice still agrees with the exhaustive oracle
    small = DocumentPair(src[:7], tgt[:7], "a", "b")
    sim = provider.embed(src[:7]) @ provider.embed(tgt[:7]).T
    assert document_alignment(small, provider=provider).score == best_alignment_score(sim.tolist(), 0.5, 0.3)


def test_align_many_keeps_input_order():
    docs = [
        DocumentPair([f"rup|{k}-{i}" for i in range(k + 1)], [f"ron|{k}-{i}" for i in range(k + 1)], str(k), str(k))
        for k in range(6)
    ]
    serial = align_many(docs, provider=_keyed(), jobs=1)
    parallel = align_many(docs, provider=_keyed(), jobs=4)
    assert [p.matches for p in serial] == [p.matches for p in parallel]
    assert [len(p.matches) for p in parallel] == [1, 2, 3, 4, 5, 6]


def test_empty_document_rejected():
    with pytest.raises(ValueError):
        DocumentPair([], ["x"], "a", "b")


# -- greedy matching ----------------------------------------------------------

def test_greedy_examples():
    assert greedy_matching([[0.9, 0.1], [0.85, 0.2]], 0.5) == [(0, 0)]
    assert greedy_matching([[0.1, 0.2], [0.3, 0.4]], 0.5) == []
    assert greedy_matching(np.eye(3), 0.5) == [(0, 0), (1, 1), (2, 2)]


def test_greedy_ties_break_by_index():
    assert greedy_matching([[0.7, 0.7], [0.7, 0.7]], 0.5) == [(0, 0), (1, 1)]
    assert greedy_matching([[0.6, 0.8], [0.8, 0.1]], 0.5) == [(0, 1), (1, 0)]


def test_match_documents_identical_titles():
    titles = ["Nveasta di dimãndari", "Lumea", "Sportu"]
    assert match_documents(titles, titles) == [(0, 0), (1, 1), (2, 2)]


def test_greedy_is_a_partial_matching():
    rng = np.random.default_rng(5)
    for _ in range(100):
        sim = rng.uniform(-1, 1, tuple(rng.integers(1, 10, 2)))
        result = greedy_matching(sim, 0.2)
        assert len({a for a, _ in result}) == len(result) == len({b for _, b in result})
        assert all(sim[a, b] >= 0.2 for a, b in result)
        assert result == sorted(result)


# -- verses -------------------------------------------------------------------

def test_pair_verses_examples():
    assert pair_verses("A. B.", "X. Y.") == [("A.", "X."), ("B.", "Y.")]
    assert pair_verses("A. B.", "X.") is None
    assert pair_verses("A", "X") == [("A", "X")]


def test_pair_verse_tables_reports_drops():
    a = [("1:1", "A. B."), ("1:2", "C."), ("1:3", "D."), ("9:9", "Z.")]
    b = [("1:1", "X. Y."), ("1:2", "U. V."), ("1:3", "W.")]
    pairs, report = pair_verse_tables(a, b)
    assert pairs == [("1:1", 0, "A.", "X."), ("1:1", 1, "B.", "Y."), ("1:3", 0, "D.", "W.")]
    assert report.as_dict() == {"verses": 3, "paired": 2, "dropped": 1, "unmatched_ids": 1, "pairs": 3}
