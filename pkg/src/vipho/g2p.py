"""Grapheme-to-phoneme analysis and phonemic tokenization.

Two parsers live here.  `analyze_orthographic` segments a written syllable
into initial + glide + vowel + final + tone and is used to build
pronunciation dictionaries.  `parse_ipa` walks a dictionary transcription
with greedy longest-symbol matching (tone suffix first, then initial,
glide, vowel, final) and is the path the tokenizer takes at runtime.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import MalformedIpa, NotASyllable, OutOfDictionary
from .inventory import (
    Final,
    Glide,
    Initial,
    PhonemeInventory,
    Syllable,
    SyllableTriplet,
    TONE_MARKS,
    Tone,
    Vocabulary,
    Vowel,
    build_inventory,
)

ALPHABET = frozenset("aăâbcdđeêghiklmnoôơpqrstuưvxy")

# Letters that turn a preceding letter into a written glide.
_GLIDE_O_BEFORE = frozenset({"a", "ă", "e"})
_GLIDE_U_BEFORE = frozenset({"y", "ê", "â", "ơ"})

# Two-letter diphthong forms: the long shapes only occur before a final,
# the short shapes only occur rhyme-finally.
_NEEDS_FINAL = frozenset({"iê", "yê", "uô", "ươ"})
_NEEDS_NO_FINAL = frozenset({"ia", "ya", "ua", "ưa"})

_TONE_MARK_SET = frozenset(TONE_MARKS)
_EDGE_JUNK = re.compile(r"^[\W_]+|[\W_]+$")


def _form_table(phonemes) -> tuple[tuple[str, object], ...]:
    pairs = [(form, p) for p in phonemes for form in p.forms]
    pairs.sort(key=lambda fp: (-len(fp[0]), fp[0]))
    return tuple(pairs)


@lru_cache(maxsize=1)
def _grapheme_tables(inv: PhonemeInventory):
    initials = _form_table(inv.initials)
    vowels = _form_table(inv.vowels)
    finals = {form: p for p in inv.finals for form in p.forms}
    return initials, vowels, finals


@dataclass(frozen=True)
class Segmentation:
    """Phonemes of a toneless written syllable plus the tone-mark anchor."""

    initial: Initial | None
    glide: Glide | None
    vowel: Vowel
    final: Final | None
    nucleus_index: int  # index in the base string of the letter taking the mark


def _segment(base: str, inv: PhonemeInventory) -> Segmentation:
    if not base or not set(base) <= ALPHABET:
        raise NotASyllable(f"{base!r} contains letters outside the alphabet")
    initial_table, vowel_table, final_table = _grapheme_tables(inv)

    initial: Initial | None = None
    rest = base
    offset = 0
    for form, phon in initial_table:
        if base.startswith(form):
            initial, rest, offset = phon, base[len(form):], len(form)
            break

    glide: Glide | None = None
    if initial is not None and offset and base[:offset] == "q":
        # q is always followed by the glide letter u
        if not rest.startswith("u"):
            raise NotASyllable(f"{base!r}: q without a u glide")
        glide, rest, offset = inv.glide, rest[1:], offset + 1
    elif initial is not None and base[:offset] == "gi":
        # gi may absorb the leading i of its rhyme: gì, gìn, giếng
        if not rest or rest[0] == "ê" or rest[0] not in "aăâeôơouyưi":
            rest, offset = "i" + rest, offset - 1

    if glide is None:
        if len(rest) >= 2 and rest[0] == "o" and rest[1] in _GLIDE_O_BEFORE:
            glide, rest, offset = inv.glide, rest[1:], offset + 1
        elif len(rest) >= 2 and rest[0] == "u" and rest[1] in _GLIDE_U_BEFORE:
            glide, rest, offset = inv.glide, rest[1:], offset + 1

    vowel: Vowel | None = None
    vowel_form = ""
    for form, phon in vowel_table:
        if not rest.startswith(form):
            continue
        tail = rest[len(form):]
        if form in _NEEDS_FINAL and not tail:
            continue
        if form in _NEEDS_NO_FINAL and tail:
            continue
        if form == "a" and tail in ("y", "u"):
            phon = inv.vowel_by_ipa["ă"]
        vowel, vowel_form = phon, form
        break
    if vowel is None:
        raise NotASyllable(f"{base!r} has no vowel nucleus")
    nucleus_index = offset + (1 if len(vowel_form) == 2 and vowel_form not in _NEEDS_NO_FINAL else 0)
    rest = rest[len(vowel_form):]

    final: Final | None = None
    if rest:
        final = final_table.get(rest)
        if final is None:
            raise NotASyllable(f"{base!r} does not end in a single final")

    return Segmentation(initial, glide, vowel, final, nucleus_index)


def split_tone(word: str, inventory: PhonemeInventory | None = None) -> tuple[str, Tone]:
    """Strip the tone diacritic from a written syllable.

    Returns the toneless base (NFC) and the tone.  More than one mark is
    rejected; letter diacritics such as breves and horns are untouched.
    """
    inv = inventory or build_inventory()
    decomposed = unicodedata.normalize("NFD", word)
    marks = [c for c in decomposed if c in _TONE_MARK_SET]
    if len(marks) > 1:
        raise NotASyllable(f"{word!r} carries more than one tone mark")
    base = unicodedata.normalize(
        "NFC", "".join(c for c in decomposed if c not in _TONE_MARK_SET))
    tone = inv.tone_by_mark[marks[0]] if marks else inv.flat_tone
    return base, tone


def analyze_orthographic(word: str, inventory: PhonemeInventory | None = None) -> Syllable:
    """Parse one written word into a Syllable, or raise NotASyllable."""
    inv = inventory or build_inventory()
    word = unicodedata.normalize("NFC", word).lower()
    base, tone = split_tone(word, inv)
    seg = _segment(base, inv)
    return Syllable(seg.initial, seg.glide, seg.vowel, seg.final, tone)


@dataclass(frozen=True)
class Normalized:
    words: tuple[str, ...]
    dropped: int


def normalize_text(text: str, inventory: PhonemeInventory | None = None) -> Normalized:
    """Lowercase, NFC-normalize and split a transcript, dropping non-syllables.

    Edge punctuation is stripped per token; any token that still fails to
    parse as a Vietnamese syllable is counted in `dropped`.
    """
    inv = inventory or build_inventory()
    words: list[str] = []
    dropped = 0
    for token in unicodedata.normalize("NFC", text).lower().split():
        token = _EDGE_JUNK.sub("", token)
        if not token:
            dropped += 1
            continue
        try:
            analyze_orthographic(token, inv)
        except NotASyllable:
            dropped += 1
            continue
        words.append(unicodedata.normalize("NFC", token))
    return Normalized(tuple(words), dropped)


class Dictionary:
    """Pronunciations for written words, serialized as two-column TSV."""

    def __init__(self, entries: dict[str, str]) -> None:
        self.entries = dict(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __getitem__(self, word: str) -> str:
        return self.entries[word]

    def get(self, word: str, default=None):
        return self.entries.get(word, default)

    def items(self):
        return self.entries.items()

    def values(self):
        return self.entries.values()

    def to_tsv(self) -> str:
        return "".join(f"{w}\t{ipa}\n" for w, ipa in sorted(self.entries.items()))

    @classmethod
    def from_tsv(cls, text: str) -> "Dictionary":
        entries: dict[str, str] = {}
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise MalformedIpa(f"dictionary line {n}: expected 'word<TAB>ipa'")
            entries[unicodedata.normalize("NFC", fields[0])] = \
                unicodedata.normalize("NFC", fields[1])
        return cls(entries)


def build_dictionary(words, inventory: PhonemeInventory | None = None
                     ) -> tuple[Dictionary, list[str]]:
    """Transcribe a wordlist; returns the dictionary and the unparseable words."""
    inv = inventory or build_inventory()
    entries: dict[str, str] = {}
    skipped: list[str] = []
    for raw in words:
        word = unicodedata.normalize("NFC", raw.strip()).lower()
        if not word:
            continue
        try:
            entries[word] = analyze_orthographic(word, inv).ipa()
        except NotASyllable:
            skipped.append(word)
    return Dictionary(entries), skipped


def example_words() -> tuple[str, ...]:
    """The packaged seed wordlist (single syllables, NFC, lowercase)."""
    text = resources.files("vipho").joinpath("data/example_words.txt") \
        .read_text(encoding="utf-8")
    return tuple(w for w in text.splitlines() if w and not w.startswith("#"))


@lru_cache(maxsize=1)
def default_dictionary() -> Dictionary:
    dictionary, skipped = build_dictionary(example_words())
    if skipped:
        raise NotASyllable(f"seed lexicon contains non-syllables: {skipped}")
    return dictionary


# --- IPA cursor operations over dictionary transcriptions ---

def get_tone(s: str, inventory: PhonemeInventory | None = None) -> tuple[Tone, str]:
    """Strip the tone contour suffix; absence of a contour is the flat tone."""
    inv = inventory or build_inventory()
    for tone in inv.tones_by_length:
        if s.endswith(tone.contour):
            return tone, s[:len(s) - len(tone.contour)]
    return inv.flat_tone, s


def get_initial(s: str, inventory: PhonemeInventory | None = None
                ) -> tuple[Initial | None, str]:
    inv = inventory or build_inventory()
    for p in inv.initials_by_length:
        if s.startswith(p.ipa):
            return p, s[len(p.ipa):]
    return None, s


def get_glide(s: str, inventory: PhonemeInventory | None = None
              ) -> tuple[Glide | None, str]:
    inv = inventory or build_inventory()
    if s.startswith(inv.glide.ipa):
        return inv.glide, s[len(inv.glide.ipa):]
    return None, s


def get_vowel(s: str, inventory: PhonemeInventory | None = None) -> tuple[Vowel, str]:
    inv = inventory or build_inventory()
    for p in inv.vowels_by_length:
        if s.startswith(p.ipa):
            return p, s[len(p.ipa):]
    raise MalformedIpa(f"no vowel at {s!r}")


def get_final(s: str, inventory: PhonemeInventory | None = None) -> Final | None:
    inv = inventory or build_inventory()
    if not s:
        return None
    final = inv.final_by_ipa.get(s)
    if final is None:
        raise MalformedIpa(f"trailing symbols {s!r} are not a final")
    return final


def parse_ipa(s: str, inventory: PhonemeInventory | None = None) -> Syllable:
    """Decompose one dictionary transcription into a Syllable."""
    inv = inventory or build_inventory()
    if not s:
        raise MalformedIpa("empty transcription")
    tone, s = get_tone(s, inv)
    initial, s = get_initial(s, inv)
    glide, s = get_glide(s, inv)
    vowel, s = get_vowel(s, inv)
    final = get_final(s, inv)
    return Syllable(initial, glide, vowel, final, tone)


@dataclass(frozen=True)
class TokenizedTranscript:
    words: tuple[str, ...]
    triplets: tuple[SyllableTriplet, ...]
    dropped: int


def tokenize(text: str, dictionary: Dictionary, vocab: Vocabulary,
             on_oov: str = "skip") -> TokenizedTranscript:
    """Normalize a transcript and map each retained word to id triplets.

    `on_oov` is "skip" (drop out-of-dictionary words, counting them) or
    "fail" (raise OutOfDictionary).  `words` and `triplets` stay aligned.
    """
    if on_oov not in ("skip", "fail"):
        raise ValueError(f"on_oov must be 'skip' or 'fail', got {on_oov!r}")
    inv = vocab.inventory
    norm = normalize_text(text, inv)
    words: list[str] = []
    triplets: list[SyllableTriplet] = []
    dropped = norm.dropped
    for word in norm.words:
        ipa = dictionary.get(word)
        if ipa is None:
            if on_oov == "fail":
                raise OutOfDictionary(f"{word!r} has no dictionary entry")
            dropped += 1
            continue
        triplets.append(vocab.encode_syllable(parse_ipa(ipa, inv)))
        words.append(word)
    return TokenizedTranscript(tuple(words), tuple(triplets), dropped)
