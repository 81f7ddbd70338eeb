"""Phoneme-to-grapheme rendering: the inverse of orthographic analysis.

Every choose_* function picks one writing form for a phoneme from the
context carried by the rest of the syllable.  Rendering then concatenates
the forms, merges the shared i of gi-initials, and attaches the tone mark
to the nucleus letter (second letter of a long diphthong shape, first
letter of a short one, the vowel letter itself otherwise).
"""

from __future__ import annotations

import unicodedata

from .errors import NoNucleus, NotASyllable
from .g2p import _segment
from .inventory import (
    Final,
    Glide,
    Initial,
    PhonemeInventory,
    Rhyme,
    Syllable,
    Tone,
    Vocabulary,
    Vowel,
    build_inventory,
)

# Front vowels select k / gh / ngh spellings of /k/, /ɣ/, /ŋ/.
_FRONT = frozenset({"i", "e", "ɛ", "ie"})
# Open vowels take the o spelling of the glide and of the final /u̯/.
_OPEN_FOR_GLIDE = frozenset({"a", "ă", "ɛ"})
_OPEN_FOR_FINAL = frozenset({"a", "ɛ"})
# Short central vowels take the y spelling of the final /i̯/.
_SHORT_CENTRAL = frozenset({"ă", "ə̆"})


def choose_initial_grapheme(initial: Initial, rhyme: Rhyme) -> str:
    if initial.ipa == "k":
        if rhyme.glide is not None:
            return "q"
        return "k" if rhyme.vowel.ipa in _FRONT else "c"
    if initial.ipa == "ɣ":
        return "gh" if rhyme.vowel.ipa in _FRONT else "g"
    if initial.ipa == "ŋ":
        return "ngh" if rhyme.vowel.ipa in _FRONT else "ng"
    if not initial.forms:  # the unwritten glottal stop
        return ""
    return initial.forms[0]


def choose_glide_grapheme(glide: Glide, vowel: Vowel, initial: Initial | None = None) -> str:
    if initial is not None and initial.ipa == "k":
        return "u"  # spelled qu- regardless of the vowel
    return "o" if vowel.ipa in _OPEN_FOR_GLIDE else "u"


def choose_vowel_grapheme(vowel: Vowel, rhyme: Rhyme, initial: Initial | None = None) -> str:
    v = vowel.ipa
    if v == "ie":
        if rhyme.glide is not None:
            return "yê" if rhyme.final else "ya"
        if initial is None:
            return "yê" if rhyme.final else "ia"
        return "iê" if rhyme.final else "ia"
    if v == "uo":
        return "uô" if rhyme.final else "ua"
    if v == "ɯə":
        return "ươ" if rhyme.final else "ưa"
    if v == "i":
        if rhyme.glide is not None:
            return "y"
        if rhyme.final is not None:
            return "i"
        return "y" if initial is None or initial.ipa in ("k", "l") else "i"
    if v == "ă":
        semivowel = rhyme.final is not None and rhyme.final.ipa in ("i̯", "u̯")
        return "a" if semivowel else "ă"
    return vowel.forms[0]


def choose_final_grapheme(final: Final, vowel: Vowel) -> str:
    if final.ipa == "u̯":
        return "o" if vowel.ipa in _OPEN_FOR_FINAL else "u"
    if final.ipa == "i̯":
        return "y" if vowel.ipa in _SHORT_CENTRAL else "i"
    return final.forms[0]


def place_tone_mark(base: str, tone: Tone,
                    inventory: PhonemeInventory | None = None) -> str:
    """Attach a tone's diacritic to the nucleus letter of a toneless syllable."""
    if not tone.mark:
        return base
    inv = inventory or build_inventory()
    try:
        seg = _segment(base, inv)
    except NotASyllable as exc:
        raise NoNucleus(f"cannot place a tone mark on {base!r}") from exc
    i = seg.nucleus_index
    return unicodedata.normalize("NFC", base[:i + 1] + tone.mark + base[i + 1:])


def render_syllable(syllable: Syllable,
                    inventory: PhonemeInventory | None = None) -> str:
    """Write a Syllable back out as orthography."""
    inv = inventory or build_inventory()
    rhyme = syllable.rhyme
    final_g = choose_final_grapheme(syllable.final, syllable.vowel) if syllable.final else ""
    vowel_g = choose_vowel_grapheme(syllable.vowel, rhyme, syllable.initial)
    glide_g = choose_glide_grapheme(syllable.glide, syllable.vowel, syllable.initial) \
        if syllable.glide else ""
    initial_g = choose_initial_grapheme(syllable.initial, rhyme) if syllable.initial else ""
    if initial_g == "gi" and vowel_g.startswith("i"):
        vowel_g = vowel_g[1:]  # the i is shared: gi + iêng -> giêng, gi + i -> gi
    base = initial_g + glide_g + vowel_g + final_g
    return place_tone_mark(base, syllable.tone, inv)


def detokenize(triplets, vocab: Vocabulary) -> str:
    """Render id triplets back to space-separated words."""
    inv = vocab.inventory
    return " ".join(render_syllable(vocab.decode_triplet(t), inv) for t in triplets)
