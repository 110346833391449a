import random

import pytest

from citescreen import preprocess
from citescreen.preprocess import (
    expand_abbreviations,
    max_window,
    normalize_token,
    segment_sentences,
    stem_and_filter,
)


class TestSegmentation:
    def test_basic_split(self):
        out = segment_sentences("First sentence here. Second one follows.")
        assert out == ["First sentence here.", "Second one follows."]

    def test_question_and_exclamation(self):
        out = segment_sentences("Does it work? Yes! It does.")
        assert out == ["Does it work?", "Yes!", "It does."]

    def test_protected_tokens(self):
        text = "Group A vs. Placebo showed benefit. Dr. Smith agreed."
        out = segment_sentences(text)
        assert out == ["Group A vs. Placebo showed benefit.", "Dr. Smith agreed."]

    def test_eg_not_split(self):
        text = "Common drugs, e.g. Furosemide, were allowed. Dosing varied."
        assert len(segment_sentences(text)) == 2

    def test_decimals_not_split(self):
        out = segment_sentences("The dose was 2.5 mg daily. Titration followed.")
        assert out[0] == "The dose was 2.5 mg daily."

    def test_digit_starts_sentence(self):
        out = segment_sentences("We enrolled many. 120 completed follow-up.")
        assert out == ["We enrolled many.", "120 completed follow-up."]

    def test_empty_text(self):
        assert segment_sentences("") == []
        assert segment_sentences("   ") == []


class TestMaxWindow:
    @pytest.mark.parametrize("n,expected", [
        (2, 4), (3, 6), (4, 8), (5, 10), (6, 11),
        (7, 12), (8, 13), (9, 14), (10, 15),
    ])
    def test_formula(self, n, expected):
        assert max_window("X" * n) == expected

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            max_window("")


class TestAbbreviationExpansion:
    def test_afib_declaration(self):
        sentences = [
            "Patients with atrial fibrillation (AFib) were enrolled.",
            "AFib recurred in ten cases.",
        ]
        out, entries = expand_abbreviations(sentences)
        assert out == [
            "Patients with atrial fibrillation were enrolled.",
            "atrial fibrillation recurred in ten cases.",
        ]
        assert len(entries) == 1
        assert entries[0].short_form == "AFib"
        assert entries[0].long_form == "atrial fibrillation"

    def test_slvd_declaration(self):
        sentences = [
            "Aldosterone blockade reduced hospitalization for heart failure"
            " in patients with systolic left ventricular dysfunction (SLVD)"
            " due to chronic heart failure and in patients with SLVD post"
            " acute myocardial infarction.",
        ]
        out, entries = expand_abbreviations(sentences)
        assert entries[0].short_form == "SLVD"
        assert entries[0].long_form == "systolic left ventricular dysfunction"
        assert out == [
            "Aldosterone blockade reduced hospitalization for heart failure"
            " in patients with systolic left ventricular dysfunction"
            " due to chronic heart failure and in patients with systolic"
            " left ventricular dysfunction post acute myocardial infarction.",
        ]

    def test_first_char_must_match(self):
        out, entries = expand_abbreviations(
            ["The ejection fraction (BNP) was measured."]
        )
        assert entries == []
        assert out == ["The ejection fraction (BNP) was measured."]

    def test_replacement_is_case_sensitive(self):
        out, _ = expand_abbreviations([
            "Heart failure (HF) admissions rose.",
            "The hf subtype label stayed lower-case.",
        ])
        assert out[1] == "The hf subtype label stayed lower-case."

    def test_no_partial_word_replacement(self):
        out, _ = expand_abbreviations([
            "Heart failure (HF) admissions rose.",
            "Shift workers and HFpEF cohorts differ; HF does not.",
        ])
        assert "HFpEF" in out[1]
        assert "heart failure does not" in out[1].lower()

    def test_idempotent_on_randomized_sentences(self):
        rng = random.Random(20240817)
        nouns = ["patients", "therapy", "outcomes", "dosing", "admissions",
                 "heart failure", "atrial fibrillation", "renal function"]
        verbs = ["improved", "declined", "was measured", "persisted"]
        declarations = [
            ("atrial fibrillation", "AF"),
            ("heart failure", "HF"),
            ("left ventricular ejection fraction", "LVEF"),
            ("chronic kidney disease", "CKD"),
        ]
        for _ in range(1000):
            parts = []
            for _ in range(rng.randint(1, 4)):
                noun = rng.choice(nouns)
                if rng.random() < 0.4:
                    long, short = rng.choice(declarations)
                    parts.append(f"Records of {long} ({short}) and {noun}"
                                 f" {rng.choice(verbs)}.")
                    if rng.random() < 0.5:
                        parts.append(f"Later {short} {rng.choice(verbs)}.")
                else:
                    parts.append(f"The {noun} {rng.choice(verbs)}.")
            once, _ = expand_abbreviations(parts)
            twice, again = expand_abbreviations(once)
            assert twice == once
            assert again == []


class TestNormalization:
    def test_lowercase_and_punctuation(self):
        assert normalize_token("Heart-Failure,") == "heart failure"
        assert normalize_token("ACE/ARB") == "ace arb"
        assert normalize_token("(beta-blockers)") == "beta blockers"

    def test_whitespace_collapse(self):
        assert normalize_token("  two   words ") == "two words"

    def test_stem_and_filter_drops_stopwords(self):
        out = stem_and_filter(["patients", "with", "heart", "failure"])
        assert out == ["patient", "heart", "failur"]

    def test_stem_and_filter_custom_stopwords(self):
        out = stem_and_filter(["alpha", "beta"], stopwords=frozenset({"beta"}))
        assert out == ["alpha"]


def test_default_stopwords_loaded():
    words = preprocess.load_stopwords()
    assert {"the", "of", "with", "who"} <= words
