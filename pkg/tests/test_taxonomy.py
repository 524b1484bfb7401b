import pytest
from hypothesis import given, strategies as st

from chattox.errors import ParseFailure
from chattox.taxonomy import (
    CATEGORIES,
    DEFINITIONS,
    SUBCLASSES,
    Category,
    Subclass,
    canonical_string,
    category_of,
    find_subclasses,
    parse_category,
    parse_subclass,
    subclasses_of,
)


def test_shape():
    assert len(CATEGORIES) == 4
    assert len(SUBCLASSES) == 8
    assert sum(len(subclasses_of(c)) for c in CATEGORIES) == 8
    assert set(DEFINITIONS) == set(SUBCLASSES)


@pytest.mark.parametrize("sub, cat", [
    (Subclass.BULLYING, Category.HARASSMENT),
    (Subclass.SWEARING, Category.PROFANITY),
    (Subclass.MISOGYNY, Category.DISCRIMINATION),
    (Subclass.SEX_BASED_TERMS, Category.SEXUAL_CONTENT),
])
def test_parent_category(sub, cat):
    assert category_of(sub) is cat
    assert sub.category is cat


@pytest.mark.parametrize("text, sub", [
    ("bullying", Subclass.BULLYING),
    ("Race, ethnicity, or religion", Subclass.RACE_ETHNICITY_RELIGION),
    ("RaceEthnicityReligion", Subclass.RACE_ETHNICITY_RELIGION),
    ("race_ethnicity_religion", Subclass.RACE_ETHNICITY_RELIGION),
    ("  SWEARING ", Subclass.SWEARING),
    ("Sexuality, sex, or gender", Subclass.SEXUALITY_GENDER),
    ("sex-based terms", Subclass.SEX_BASED_TERMS),
])
def test_parse_subclass(text, sub):
    assert parse_subclass(text) is sub


@pytest.mark.parametrize("text", ["friendly", "", "bullying swearing", "harass"])
def test_parse_subclass_rejects(text):
    with pytest.raises(ParseFailure):
        parse_subclass(text)


def test_parse_category():
    assert parse_category("Discrimination and Slurs") is Category.DISCRIMINATION
    assert parse_category("sexual content") is Category.SEXUAL_CONTENT
    with pytest.raises(ParseFailure):
        parse_category("spam")


def test_find_prefers_longest_phrase():
    assert find_subclasses("race, ethnicity, or religion and then bullying") == [
        Subclass.RACE_ETHNICITY_RELIGION, Subclass.BULLYING]
    assert find_subclasses("nothing to see") == []


@given(st.sampled_from(SUBCLASSES))
def test_canonical_round_trip(sub):
    assert parse_subclass(canonical_string(sub)) is sub
    assert parse_subclass(sub.display_name) is sub
    assert parse_subclass(sub.display_name.upper()) is sub
    assert find_subclasses(f"label: {sub.display_name}.") == [sub]
