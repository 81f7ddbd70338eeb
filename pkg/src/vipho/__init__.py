"""Vietnamese phonemic tokenization, ASR error metrics, and a syllable decoder."""

from .errors import (
    AllPadded,
    DegenerateInput,
    EmptyDictionary,
    EmptyInput,
    EmptyReference,
    MalformedIpa,
    NoNucleus,
    NonFinite,
    NotASyllable,
    OutOfDictionary,
    ShapeMismatch,
    UnknownId,
    ViphoError,
)
from .inventory import (
    BOS_ID,
    EOS_ID,
    NONE_ID,
    PAD_ID,
    PhonemeInventory,
    Rhyme,
    Syllable,
    SyllableTriplet,
    Vocabulary,
    build_inventory,
    build_vocabulary,
    export_rule_table,
)
from .g2p import (
    Dictionary,
    TokenizedTranscript,
    analyze_orthographic,
    build_dictionary,
    default_dictionary,
    example_words,
    normalize_text,
    parse_ipa,
    tokenize,
)
from .metrics import (
    AlignmentTrace,
    ClassificationScores,
    ErrorCounts,
    EvalReport,
    FrequencyBias,
    align,
    char_error_rate,
    classification_metrics,
    component_error_counts,
    component_error_rates,
    error_rate,
    frequency_bias,
    grouped_report,
    phone_error_rate,
    unique_correct_words,
    word_error_rate,
)
from .p2g import detokenize, place_tone_mark, render_syllable

__version__ = "0.1.0"

__all__ = [
    "AllPadded", "DegenerateInput", "EmptyDictionary", "EmptyInput",
    "EmptyReference", "MalformedIpa", "NoNucleus", "NonFinite",
    "NotASyllable", "OutOfDictionary", "ShapeMismatch", "UnknownId",
    "ViphoError",
    "BOS_ID", "EOS_ID", "NONE_ID", "PAD_ID",
    "PhonemeInventory", "Rhyme", "Syllable", "SyllableTriplet", "Vocabulary",
    "build_inventory", "build_vocabulary", "export_rule_table",
    "Dictionary", "TokenizedTranscript", "analyze_orthographic",
    "build_dictionary", "default_dictionary", "example_words",
    "normalize_text", "parse_ipa", "tokenize",
    "AlignmentTrace", "ClassificationScores", "ErrorCounts", "EvalReport",
    "FrequencyBias", "align", "char_error_rate", "classification_metrics",
    "component_error_counts", "component_error_rates", "error_rate",
    "frequency_bias", "grouped_report", "phone_error_rate",
    "unique_correct_words", "word_error_rate",
    "detokenize", "place_tone_mark", "render_syllable",
    "__version__",
]
