"""Phoneme inventory for Vietnamese syllables.

A syllable is an optional initial consonant, a rhyme (optional glide /w̯/,
a mandatory vowel nucleus, an optional final), and one of six tones.  The
tables below carry, for every phoneme, its writing forms ordered longest
first plus a short context-rule id saying when each form applies; the
rendering logic that consumes the rule ids lives in p2g.

Tones are realised orthographically as combining diacritics.  The glottal
stop initial is phonologically real for vowel-initial words but is never
written, so it carries zero writing forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import EmptyDictionary, UnknownId

# Combining marks, one per non-flat tone.
GRAVE = "̀"
ACUTE = "́"
TILDE = "̃"
HOOK_ABOVE = "̉"
DOT_BELOW = "̣"

TONE_MARKS = (GRAVE, ACUTE, TILDE, HOOK_ABOVE, DOT_BELOW)


@dataclass(frozen=True)
class Initial:
    ipa: str
    forms: tuple[str, ...]
    rule: str = "-"


@dataclass(frozen=True)
class Glide:
    ipa: str
    forms: tuple[str, ...]
    rule: str = "-"


@dataclass(frozen=True)
class Vowel:
    ipa: str
    forms: tuple[str, ...]
    diphthong: bool = False
    rule: str = "-"


@dataclass(frozen=True)
class Final:
    ipa: str
    forms: tuple[str, ...]
    rule: str = "-"


@dataclass(frozen=True)
class Tone:
    name: str
    contour: str  # IPA tone letters; empty for the flat tone
    mark: str     # combining diacritic; empty for the flat tone


@dataclass(frozen=True)
class Rhyme:
    glide: Glide | None
    vowel: Vowel
    final: Final | None

    def ipa(self) -> str:
        parts = [p.ipa for p in (self.glide, self.vowel, self.final) if p is not None]
        return "".join(parts)


@dataclass(frozen=True)
class Syllable:
    initial: Initial | None
    glide: Glide | None
    vowel: Vowel
    final: Final | None
    tone: Tone

    @property
    def rhyme(self) -> Rhyme:
        return Rhyme(self.glide, self.vowel, self.final)

    def ipa(self) -> str:
        """Dictionary transcription: initial, glide, vowel, final, contour."""
        head = "" if self.initial is None else self.initial.ipa
        return head + self.rhyme.ipa() + self.tone.contour

    def phonemes(self) -> tuple[str, ...]:
        """Flat phoneme tokens in canonical order; tone always present."""
        parts = [p.ipa for p in (self.initial, self.glide, self.vowel, self.final)
                 if p is not None]
        parts.append(self.tone.name)
        return tuple(parts)


_INITIALS = (
    Initial("b", ("b",)),
    Initial("t", ("t",)),
    Initial("tʰ", ("th",)),
    Initial("k", ("k", "q", "c"), rule="k_front_q_glide"),
    Initial("f", ("ph",)),
    Initial("d", ("đ",)),           # đ
    Initial("ɣ", ("gh", "g"), rule="gh_front"),
    Initial("z", ("gi",)),
    Initial("j", ("d",)),
    Initial("s", ("x",)),
    Initial("ʂ", ("s",)),
    Initial("c͡ɕ", ("ch",)),
    Initial("t͡ʂ", ("tr",)),
    Initial("ŋ", ("ngh", "ng"), rule="ngh_front"),
    Initial("x", ("kh",)),
    Initial("v", ("v",)),
    Initial("n", ("n",)),
    Initial("m", ("m",)),
    Initial("ɲ", ("nh",)),
    Initial("r", ("r",)),
    Initial("l", ("l",)),
    Initial("h", ("h",)),
    Initial("ʔ", (), rule="unwritten"),  # glottal stop, vowel-initial words
)

_GLIDE = Glide("w̯", ("u", "o"), rule="o_before_open")

_VOWELS = (
    Vowel("ie", ("iê", "yê", "ia", "ya"), diphthong=True, rule="four_way"),
    Vowel("uo", ("uô", "ua"), diphthong=True, rule="short_no_final"),
    Vowel("ɯə", ("ươ", "ưa"), diphthong=True, rule="short_no_final"),
    Vowel("i", ("i", "y"), rule="bare_y"),
    Vowel("e", ("ê",)),
    Vowel("ɛ", ("e",)),
    Vowel("ɯ", ("ư",)),
    Vowel("ə", ("ơ",)),
    Vowel("ə̆", ("â",)),
    Vowel("a", ("a",)),
    Vowel("ă", ("ă", "a"), rule="a_before_y_u"),
    Vowel("u", ("u",)),
    Vowel("o", ("ô",)),
    Vowel("ɔ", ("o",)),
    Vowel("ɔː", ("oo",)),
)

_FINALS = (
    Final("m", ("m",)),
    Final("n", ("n",)),
    Final("ŋ", ("ng",)),
    Final("ɲ", ("nh",)),
    Final("p", ("p",)),
    Final("t", ("t",)),
    Final("k", ("c",)),
    Final("c", ("ch",)),
    Final("u̯", ("u", "o"), rule="o_after_open"),
    Final("i̯", ("i", "y"), rule="y_after_short"),
)

_TONES = (
    Tone("flat", "", ""),
    Tone("low_falling", "˨˨˩˩", GRAVE),
    Tone("mid_raising", "˧˧˥˥", ACUTE),
    Tone("mid_falling", "˧˧˩˩", HOOK_ABOVE),
    Tone("mid_glottal_raising", "˧˧ʔ˥˥", DOT_BELOW),
    Tone("mid_glottal_falling", "˧˧ʔ˩˩", TILDE),
)


class PhonemeInventory:
    """All phonemes plus the lookup maps the parsers and renderers need."""

    def __init__(self) -> None:
        self.initials: tuple[Initial, ...] = _INITIALS
        self.glide: Glide = _GLIDE
        self.vowels: tuple[Vowel, ...] = _VOWELS
        self.finals: tuple[Final, ...] = _FINALS
        self.tones: tuple[Tone, ...] = _TONES

        self.initial_by_ipa = {p.ipa: p for p in self.initials}
        self.vowel_by_ipa = {p.ipa: p for p in self.vowels}
        self.final_by_ipa = {p.ipa: p for p in self.finals}
        self.tone_by_name = {t.name: t for t in self.tones}
        self.tone_by_mark = {t.mark: t for t in self.tones if t.mark}
        self.flat_tone = self.tone_by_name["flat"]

        # Longest-symbol-first orders for greedy prefix matching on IPA.
        self.initials_by_length = tuple(
            sorted(self.initials, key=lambda p: (-len(p.ipa), p.ipa)))
        self.vowels_by_length = tuple(
            sorted(self.vowels, key=lambda p: (-len(p.ipa), p.ipa)))
        self.tones_by_length = tuple(
            sorted((t for t in self.tones if t.contour),
                   key=lambda t: (-len(t.contour), t.contour)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PhonemeInventory)

    def __hash__(self) -> int:
        return hash(PhonemeInventory)


@lru_cache(maxsize=1)
def build_inventory() -> PhonemeInventory:
    """Construct the inventory; repeated calls return the same object."""
    return PhonemeInventory()


def export_rule_table(inventory: PhonemeInventory | None = None) -> str:
    """Render the inventory as a TSV rule table for documentation and diffing."""
    inv = inventory or build_inventory()
    lines = ["class\tsymbol\tforms\trule"]
    for p in inv.initials:
        lines.append(f"initial\t{p.ipa}\t{','.join(p.forms)}\t{p.rule}")
    g = inv.glide
    lines.append(f"glide\t{g.ipa}\t{','.join(g.forms)}\t{g.rule}")
    for v in inv.vowels:
        lines.append(f"vowel\t{v.ipa}\t{','.join(v.forms)}\t{v.rule}")
    for f in inv.finals:
        lines.append(f"final\t{f.ipa}\t{','.join(f.forms)}\t{f.rule}")
    for t in inv.tones:
        shown = "a" + t.mark if t.mark else "a"
        lines.append(f"tone\t{t.contour}\t{shown}\t{t.name}")
    return "\n".join(lines) + "\n"


# --- id space shared by the tokenizer and the decoder ---

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
NONE_ID = 3
SPECIAL_SYMBOLS = ("<pad>", "<bos>", "<eos>", "<none>")


class SyllableTriplet(tuple):
    """Ids of (initial, rhyme, tone) in their respective vocabulary tables."""

    __slots__ = ()

    def __new__(cls, initial_id: int, rhyme_id: int, tone_id: int):
        return super().__new__(cls, (initial_id, rhyme_id, tone_id))

    @property
    def initial_id(self) -> int:
        return self[0]

    @property
    def rhyme_id(self) -> int:
        return self[1]

    @property
    def tone_id(self) -> int:
        return self[2]


class Vocabulary:
    """Three id tables: initials, rhymes, tones.

    Ids 0..3 are the specials <pad>, <bos>, <eos>, <none> in every table;
    content ids follow, sorted lexicographically by IPA symbol.  The rhyme
    table holds only rhymes attested in the dictionary the vocabulary was
    built from, keyed by the concatenated glide+vowel+final symbol.
    """

    def __init__(self, inventory: PhonemeInventory,
                 initial_symbols: tuple[str, ...],
                 rhyme_symbols: tuple[str, ...],
                 rhyme_parts: dict[str, tuple[str | None, str, str | None]],
                 tone_symbols: tuple[str, ...]) -> None:
        self.inventory = inventory
        self.initial_symbols = SPECIAL_SYMBOLS + initial_symbols
        self.rhyme_symbols = SPECIAL_SYMBOLS + rhyme_symbols
        self.tone_symbols = SPECIAL_SYMBOLS + tone_symbols
        self._rhyme_parts = rhyme_parts
        self._initial_ids = {s: i for i, s in enumerate(self.initial_symbols)}
        self._rhyme_ids = {s: i for i, s in enumerate(self.rhyme_symbols)}
        self._tone_ids = {s: i for i, s in enumerate(self.tone_symbols)}

    @property
    def n_initials(self) -> int:
        return len(self.initial_symbols)

    @property
    def n_rhymes(self) -> int:
        return len(self.rhyme_symbols)

    @property
    def n_tones(self) -> int:
        return len(self.tone_symbols)

    def encode_syllable(self, syllable: Syllable) -> SyllableTriplet:
        if syllable.initial is None:
            initial_id = NONE_ID
        else:
            initial_id = self._content_id(self._initial_ids, syllable.initial.ipa, "initial")
        rhyme_id = self._content_id(self._rhyme_ids, syllable.rhyme.ipa(), "rhyme")
        tone_id = self._content_id(self._tone_ids, syllable.tone.name, "tone")
        return SyllableTriplet(initial_id, rhyme_id, tone_id)

    def decode_triplet(self, triplet: SyllableTriplet | tuple[int, int, int]) -> Syllable:
        initial_id, rhyme_id, tone_id = triplet
        inv = self.inventory
        if initial_id == NONE_ID:
            initial = None
        else:
            initial = inv.initial_by_ipa[self._symbol(self.initial_symbols, initial_id, "initial")]
        glide_s, vowel_s, final_s = self._rhyme_parts[
            self._symbol(self.rhyme_symbols, rhyme_id, "rhyme")]
        tone = inv.tone_by_name[self._symbol(self.tone_symbols, tone_id, "tone")]
        return Syllable(
            initial=initial,
            glide=inv.glide if glide_s is not None else None,
            vowel=inv.vowel_by_ipa[vowel_s],
            final=inv.final_by_ipa[final_s] if final_s is not None else None,
            tone=tone,
        )

    @staticmethod
    def _content_id(table: dict[str, int], symbol: str, kind: str) -> int:
        try:
            return table[symbol]
        except KeyError:
            raise UnknownId(f"{kind} symbol {symbol!r} not in vocabulary") from None

    @staticmethod
    def _symbol(symbols: tuple[str, ...], idx: int, kind: str) -> str:
        if not 4 <= idx < len(symbols):
            raise UnknownId(f"{kind} id {idx} is not a content id "
                            f"(table size {len(symbols)})")
        return symbols[idx]


def build_vocabulary(dictionary, inventory: PhonemeInventory | None = None) -> Vocabulary:
    """Derive the id tables from a pronunciation dictionary.

    The initial and tone tables cover the whole inventory; the rhyme table
    covers exactly the rhymes observed in the dictionary's transcriptions.
    """
    from .g2p import parse_ipa  # late import; g2p depends on this module

    inv = inventory or build_inventory()
    entries = dict(dictionary.items() if hasattr(dictionary, "items") else dictionary)
    if not entries:
        raise EmptyDictionary("cannot build a vocabulary from an empty dictionary")

    rhyme_parts: dict[str, tuple[str | None, str, str | None]] = {}
    for word, ipa in entries.items():
        syl = parse_ipa(ipa, inv)
        rhyme = syl.rhyme
        rhyme_parts[rhyme.ipa()] = (
            rhyme.glide.ipa if rhyme.glide else None,
            rhyme.vowel.ipa,
            rhyme.final.ipa if rhyme.final else None,
        )

    initial_symbols = tuple(sorted(p.ipa for p in inv.initials))
    rhyme_symbols = tuple(sorted(rhyme_parts))
    tone_symbols = tuple(sorted((t.name for t in inv.tones)))
    return Vocabulary(inv, initial_symbols, rhyme_parts=rhyme_parts,
                      rhyme_symbols=rhyme_symbols, tone_symbols=tone_symbols)
