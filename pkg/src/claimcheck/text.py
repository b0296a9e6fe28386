"""Language-aware text primitives: token estimation, sentence splitting,
and the search tokenizer.

The corpus here is mixed Chinese/English, so nothing in this module may
assume whitespace-delimited words. Token estimation and tokenization use
character classes instead of a dictionary: every CJK character stands on
its own, and runs of alphanumeric characters form single units.
"""

from __future__ import annotations

import functools
import re
import unicodedata
from importlib import resources

# Character ranges treated as CJK "letters": each one is meaningful on its
# own and participates in unigram/bigram tokenization.
_CJK_LETTER_RANGES = (
    (0x3040, 0x30FF),  # hiragana, katakana
    (0x3400, 0x4DBF),  # CJK extension A
    (0x4E00, 0x9FFF),  # CJK unified ideographs
    (0xAC00, 0xD7AF),  # hangul syllables
    (0xF900, 0xFAFF),  # CJK compatibility ideographs
)

# Wider net used only for token counting: fullwidth forms and CJK
# punctuation also cost one token apiece. U+3000 (ideographic space) is
# excluded because whitespace is checked first anyway.
_CJK_WIDE_RANGES = _CJK_LETTER_RANGES + (
    (0x3001, 0x303F),  # CJK symbols and punctuation
    (0xFF01, 0xFF9F),  # fullwidth forms, halfwidth katakana
)

_SENTENCE_ENDERS = "。！？!?."  # 。！？ ! ? .

# A sentence is any run of non-terminator characters followed by one or
# more terminators and any trailing whitespace. Matches partition the
# input exactly; a final unterminated stretch is handled separately.
_SENTENCE_RE = re.compile(
    "[^%(e)s]*[%(e)s]+\\s*" % {"e": re.escape(_SENTENCE_ENDERS)}
)

_WS_RE = re.compile(r"\s+")


def _in_ranges(cp: int, ranges: tuple[tuple[int, int], ...]) -> bool:
    for lo, hi in ranges:
        if lo <= cp <= hi:
            return True
    return False


def _ranges_to_class(ranges: tuple[tuple[int, int], ...]) -> str:
    return "".join("%s-%s" % (chr(lo), chr(hi)) for lo, hi in ranges)

_CJK_WIDE_CLASS = _ranges_to_class(_CJK_WIDE_RANGES)
_CJK_CHAR_RE = re.compile("[%s]" % _CJK_WIDE_CLASS)
# A countable run: consecutive characters that are neither whitespace nor
# CJK. Runs split on either, so each match costs exactly one token.
_RUN_RE = re.compile("[^\\s%s]+" % _CJK_WIDE_CLASS)


def is_cjk_char(ch: str) -> bool:
    """True for characters counted one-per-token (ideographs, kana,
    hangul, CJK punctuation, fullwidth forms)."""
    return _in_ranges(ord(ch), _CJK_WIDE_RANGES)


def _is_cjk_letter(ch: str) -> bool:
    return _in_ranges(ord(ch), _CJK_LETTER_RANGES)


def estimate_tokens(text: str) -> int:
    """Estimate the model-token cost of ``text``.

    Each CJK character counts as one token; each contiguous run of other
    non-whitespace characters counts as one. The estimate is deterministic
    and grows monotonically under concatenation: joining two strings never
    yields a smaller estimate than either part alone, because at most the
    two runs touching the seam can merge.
    """
    return len(_CJK_CHAR_RE.findall(text)) + len(_RUN_RE.findall(text))


def split_sentences(text: str) -> list[str]:
    """Split ``text`` into sentences on 。！？!?. terminators.

    The pieces concatenate back to ``text`` exactly; trailing whitespace
    after a terminator stays attached to its sentence, and any final
    unterminated stretch is returned as the last piece.
    """
    pieces = []
    pos = 0
    for m in _SENTENCE_RE.finditer(text):
        # finditer with this pattern always advances contiguously, but be
        # explicit about gaps so the exact-partition guarantee is local.
        if m.start() != pos:
            pieces.append(text[pos:m.start()])
        pieces.append(m.group(0))
        pos = m.end()
    if pos < len(text):
        pieces.append(text[pos:])
    return pieces


def collapse_whitespace(text: str) -> str:
    """Normalize every whitespace run to one space and strip the ends."""
    return _WS_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Produce search terms from mixed-script text.

    The text is NFKC-normalized and lowercased. CJK letters yield
    unigrams plus bigrams of adjacent pairs; runs of other alphanumeric
    characters yield one term per run; everything else delimits. No
    dictionary is involved, so segmentation never depends on vocabulary.
    """
    norm = unicodedata.normalize("NFKC", text).lower()
    tokens: list[str] = []
    run: list[str] = []
    prev_cjk = ""

    def flush_run() -> None:
        if run:
            tokens.append("".join(run))
            run.clear()

    for ch in norm:
        if _is_cjk_letter(ch):
            flush_run()
            tokens.append(ch)
            if prev_cjk:
                tokens.append(prev_cjk + ch)
            prev_cjk = ch
        elif ch.isalnum():
            run.append(ch)
            prev_cjk = ""
        else:
            flush_run()
            prev_cjk = ""
    flush_run()
    return tokens


def load_stopwords(path: str) -> frozenset[str]:
    """Read a stopword list: one term per line, # comments, blanks ignored.

    Terms pass through the same normalization as the tokenizer so that
    lookups agree with tokenized text.
    """
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = line.strip()
            if not term or term.startswith("#"):
                continue
            words.add(unicodedata.normalize("NFKC", term).lower())
    return frozenset(words)


@functools.lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """The stopword list shipped with the package."""
    ref = resources.files("claimcheck").joinpath("data/stopwords.txt")
    words = set()
    for line in ref.read_text(encoding="utf-8").splitlines():
        term = line.strip()
        if not term or term.startswith("#"):
            continue
        words.add(unicodedata.normalize("NFKC", term).lower())
    return frozenset(words)
