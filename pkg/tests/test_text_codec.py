import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facetok.corpus import build_lexicon, generate_corpus
from facetok.text_codec import (
    BOS,
    EOS,
    MOT_BEGIN,
    MOT_END,
    N_SPECIALS,
    PAD,
    QUESTION_BANK,
    SEP,
    UNK,
    Vocabulary,
    build_vocab,
    extract_keywords,
    normalize,
)


@pytest.fixture(scope="module")
def vocab():
    return Vocabulary(["head", "nodding", "woman", "young"], k_geometry=8)


class TestSpecials:
    def test_fixed_ids(self):
        assert (PAD, BOS, EOS, SEP, UNK, MOT_BEGIN, MOT_END) == (0, 1, 2, 3, 4, 5, 6)
        assert N_SPECIALS == 7


class TestNormalize:
    def test_lowercase_and_punctuation(self):
        assert normalize("A Young WOMAN, nodding!") == ["a", "young", "woman", "nodding"]

    def test_keeps_apostrophes_and_digits(self):
        assert normalize("it's 25 fps") == ["it's", "25", "fps"]

    def test_empty(self):
        assert normalize("   ") == []


class TestVocabulary:
    def test_layout(self, vocab):
        # words sorted and packed after specials; geometry ids at the top
        assert vocab.word_to_id["head"] == 7
        assert vocab.text_end == 7 + 4
        assert vocab.size == 7 + 4 + 8
        assert vocab.geometry_id(0) == vocab.text_end
        assert vocab.geometry_id(7) == vocab.size - 1

    def test_encode_decode_round_trip(self, vocab):
        ids = vocab.encode_text("young woman nodding")
        assert vocab.decode_text(ids) == "young woman nodding"

    def test_unknown_word_becomes_unk(self, vocab):
        ids = vocab.encode_text("young zebra")
        assert ids[1] == UNK
        assert vocab.decode_text(ids) == "young <unk>"

    def test_geometry_range_checks(self, vocab):
        with pytest.raises(ValueError):
            vocab.geometry_id(8)
        with pytest.raises(ValueError):
            vocab.geometry_id(-1)
        with pytest.raises(ValueError):
            vocab.geometry_token(vocab.text_end - 1)

    def test_is_text_is_geometry_partition(self, vocab):
        for i in range(vocab.size):
            assert vocab.is_geometry(i) != (i < vocab.text_end)

    def test_decode_rejects_geometry_ids(self, vocab):
        with pytest.raises(ValueError):
            vocab.decode_text([vocab.geometry_id(0)])

    def test_save_load_round_trip(self, vocab, tmp_path):
        path = tmp_path / "vocab.json"
        vocab.save(path)
        back = Vocabulary.load(path)
        assert back.words == vocab.words
        assert back.k_geometry == vocab.k_geometry
        assert back.encode_text("young woman") == vocab.encode_text("young woman")

    @given(st.text(alphabet="abc xyz'0", max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_encode_never_emits_specials_or_geometry(self, vocab, text):
        for i in vocab.encode_text(text):
            assert i == UNK or N_SPECIALS <= i < vocab.text_end


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("tc") / "c"
    generate_corpus(out, n_clips=288, seed=11)
    return out


class TestBuildVocab:

    def test_covers_prompts_and_questions(self, corpus_dir):
        vocab = build_vocab(corpus_dir, k_geometry=16)
        from facetok.corpus import load_corpus

        for rec in load_corpus(corpus_dir):
            for text in [rec.prompt.text, *rec.prompt.paraphrases]:
                assert UNK not in vocab.encode_text(text), text
        for q in QUESTION_BANK:
            assert UNK not in vocab.encode_text(q)

    def test_words_sorted_and_deterministic(self, corpus_dir):
        v1 = build_vocab(corpus_dir, k_geometry=16)
        v2 = build_vocab(corpus_dir, k_geometry=16)
        assert v1.words == v2.words == sorted(v1.words)


@pytest.fixture(scope="module")
def keyword_map():
    return build_lexicon(16).keyword_map


class TestExtractKeywords:

    def test_finds_all_fields(self, keyword_map):
        found = extract_keywords(keyword_map, "a young woman intensely grinning and nodding")
        assert found == {"emotion": "grin", "intensity": "high", "motion": "nod"}

    def test_first_match_wins(self, keyword_map):
        found = extract_keywords(keyword_map, "grinning then frowning")
        assert found["emotion"] == "grin"

    def test_missing_fields_absent(self, keyword_map):
        assert extract_keywords(keyword_map, "hello there") == {}
