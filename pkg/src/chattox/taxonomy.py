"""Twitch's moderation taxonomy: 4 categories, 8 subclasses."""

from __future__ import annotations

import enum
import re

from .errors import ParseFailure


class Category(str, enum.Enum):
    HARASSMENT = "harassment"
    DISCRIMINATION = "discrimination"
    SEXUAL_CONTENT = "sexual_content"
    PROFANITY = "profanity"

    def __str__(self) -> str:
        return self.value

    @property
    def display_name(self) -> str:
        return _CATEGORY_DISPLAY[self]


class Subclass(str, enum.Enum):
    AGGRESSION = "aggression"
    BULLYING = "bullying"
    DISABILITY = "disability"
    SEXUALITY_GENDER = "sexuality_gender"
    MISOGYNY = "misogyny"
    RACE_ETHNICITY_RELIGION = "race_ethnicity_religion"
    SEX_BASED_TERMS = "sex_based_terms"
    SWEARING = "swearing"

    def __str__(self) -> str:
        return self.value

    @property
    def category(self) -> Category:
        return _PARENT[self]

    @property
    def display_name(self) -> str:
        return _SUBCLASS_DISPLAY[self]

    @property
    def definition(self) -> str:
        return DEFINITIONS[self]


SUBCLASSES: tuple[Subclass, ...] = tuple(Subclass)
CATEGORIES: tuple[Category, ...] = tuple(Category)

_PARENT = {
    Subclass.AGGRESSION: Category.HARASSMENT,
    Subclass.BULLYING: Category.HARASSMENT,
    Subclass.DISABILITY: Category.DISCRIMINATION,
    Subclass.SEXUALITY_GENDER: Category.DISCRIMINATION,
    Subclass.MISOGYNY: Category.DISCRIMINATION,
    Subclass.RACE_ETHNICITY_RELIGION: Category.DISCRIMINATION,
    Subclass.SEX_BASED_TERMS: Category.SEXUAL_CONTENT,
    Subclass.SWEARING: Category.PROFANITY,
}

_CATEGORY_DISPLAY = {
    Category.HARASSMENT: "Harassment",
    Category.DISCRIMINATION: "Discrimination and Slurs",
    Category.SEXUAL_CONTENT: "Sexual Content",
    Category.PROFANITY: "Profanity",
}

_SUBCLASS_DISPLAY = {
    Subclass.AGGRESSION: "Aggression",
    Subclass.BULLYING: "Bullying",
    Subclass.DISABILITY: "Disability",
    Subclass.SEXUALITY_GENDER: "Sexuality, sex, or gender",
    Subclass.MISOGYNY: "Misogyny",
    Subclass.RACE_ETHNICITY_RELIGION: "Race, ethnicity, or religion",
    Subclass.SEX_BASED_TERMS: "Sex-based terms",
    Subclass.SWEARING: "Swearing",
}

# Twitch AutoMod definitions, verbatim.
DEFINITIONS = {
    Subclass.AGGRESSION: "Threatening, inciting, or promoting violence or other harm",
    Subclass.BULLYING: "Name-calling, insults, or antagonization",
    Subclass.DISABILITY: (
        "Demonstrating hatred or prejudice based on perceived or actual "
        "mental or physical abilities"
    ),
    Subclass.SEXUALITY_GENDER: (
        "Demonstrating hatred or prejudice based on sexual identity, sexual "
        "orientation, gender identity, or gender expression"
    ),
    Subclass.MISOGYNY: (
        "Demonstrating hatred or prejudice against women, including sexual "
        "objectification"
    ),
    Subclass.RACE_ETHNICITY_RELIGION: (
        "Demonstrating hatred or prejudice based on race, ethnicity, or religion"
    ),
    Subclass.SEX_BASED_TERMS: "Sexual acts, anatomy",
    Subclass.SWEARING: "Swear words, &^#$%*",
}

_ALIASES = {
    Subclass.AGGRESSION: ["aggression"],
    Subclass.BULLYING: ["bullying"],
    Subclass.DISABILITY: ["disability"],
    Subclass.SEXUALITY_GENDER: [
        "sexuality or gender",
        "sexuality sex or gender",
        "sexuality gender",
        "sexuality and gender",
    ],
    Subclass.MISOGYNY: ["misogyny"],
    Subclass.RACE_ETHNICITY_RELIGION: [
        "race",
        "race ethnicity or religion",
        "race ethnicity religion",
        "race religion",
    ],
    Subclass.SEX_BASED_TERMS: ["sex based terms", "sexual content"],
    Subclass.SWEARING: ["swearing", "profanity", "profanity targeted"],
}

_WORD = re.compile(r"[a-z0-9]+")


def _words(text: str) -> tuple[str, ...]:
    return tuple(_WORD.findall(text.lower()))


def _build_phrase_table() -> dict[tuple[str, ...], Subclass]:
    table: dict[tuple[str, ...], Subclass] = {}
    for sub in SUBCLASSES:
        phrases = [sub.value.replace("_", " "), sub.name.replace("_", " "),
                   sub.display_name, *_ALIASES[sub]]
        for phrase in phrases:
            key = _words(phrase)
            prev = table.setdefault(key, sub)
            assert prev is sub, f"alias {phrase!r} is ambiguous"
        # enum-style spelling, e.g. "RaceEthnicityReligion"
        table.setdefault((sub.name.replace("_", "").lower(),), sub)
    return table


_PHRASES = _build_phrase_table()
_MAX_PHRASE = max(len(k) for k in _PHRASES)


def category_of(sub: Subclass) -> Category:
    return _PARENT[sub]


def subclasses_of(cat: Category) -> tuple[Subclass, ...]:
    return tuple(s for s in SUBCLASSES if _PARENT[s] is cat)


def canonical_string(label: Subclass | Category) -> str:
    return label.value


def parse_subclass(text: str) -> Subclass:
    """Match a whole label string against canonical names and aliases.

    Matching ignores case and punctuation, so ``"Race, ethnicity, or religion"``,
    ``"race_ethnicity_religion"`` and ``"RaceEthnicityReligion"`` all resolve.
    Raises :class:`ParseFailure` for anything else.
    """
    key = _words(text)
    try:
        return _PHRASES[key]
    except KeyError:
        raise ParseFailure(f"not a toxicity subclass: {text!r}") from None


def parse_category(text: str) -> Category:
    norm = "_".join(_words(text))
    for cat in CATEGORIES:
        if norm in (cat.value, "_".join(_words(cat.display_name))):
            return cat
    raise ParseFailure(f"not a toxicity category: {text!r}")


def find_subclasses(text: str) -> list[Subclass]:
    """All subclass mentions in free text, in reading order.

    Scans word by word and takes the longest alias starting at each position,
    so ``"race, ethnicity, or religion"`` is one mention, not a bare ``race``.
    """
    words = _words(text)
    found = []
    i = 0
    while i < len(words):
        for n in range(min(_MAX_PHRASE, len(words) - i), 0, -1):
            sub = _PHRASES.get(words[i:i + n])
            if sub is not None:
                found.append(sub)
                i += n
                break
        else:
            i += 1
    return found
