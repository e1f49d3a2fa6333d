"""Byte-level BPE tokenizer with a fixed context window.

Implements the CLIP-family tokenizer convention: 256 byte units plus the
same units with an end-of-word suffix form the base alphabet (512
symbols), ranked pair merges extend it, and two special markers
(start-of-text, end-of-text) close the vocabulary. Encoding lowercases,
collapses whitespace, splits into word/punctuation chunks, byte-encodes
each chunk and greedily merges by lowest rank, then wraps the ids with
the markers and pads or truncates to the context length.
"""

from __future__ import annotations

import gzip
import io
import os
import re
from dataclasses import dataclass, field

from anatomy.errors import MergeParseError, ValidationError
from anatomy.kernels import merge_word

WORD_END = "</w>"
SOT_TOKEN = "<|startoftext|>"
EOT_TOKEN = "<|endoftext|>"

# Word/punctuation chunking applied after lowercasing. Mirrors the
# common CLIP pattern: contractions, letter runs, single digits,
# punctuation runs.
_CHUNK_RE = re.compile(r"'s|'t|'re|'ve|'m|'ll|'d|[^\W\d_]+|\d|(?:[^\s\w]|_)+")

_WS_RE = re.compile(r"\s+")


def _bytes_to_units() -> list[str]:
    """The 256 byte -> printable-unicode unit mapping used by byte BPE."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    units = [""] * 256
    for b, c in zip(bs, cs):
        units[b] = chr(c)
    return units

BYTE_UNITS = _bytes_to_units()
UNIT_TO_BYTE = {u: b for b, u in enumerate(BYTE_UNITS)}


def normalize_text(text: str) -> str:
    """Lowercase and collapse consecutive whitespace."""
    return _WS_RE.sub(" ", text.lower()).strip()


@dataclass(frozen=True)
class MergeTable:
    """Immutable merge table; safe to share across concurrent encodes."""

    base_tokens: tuple[str, ...]
    merges: tuple[tuple[str, str], ...]
    encoder: dict[str, int]
    decoder: tuple[str, ...]
    ranks: dict[tuple[str, str], int]
    _word_cache: dict[str, tuple[int, ...]] = field(
        default_factory=dict, repr=False, compare=False
    )

    @property
    def vocab_size(self) -> int:
        return 512 + len(self.merges) + 2

    @property
    def sot_id(self) -> int:
        return self.vocab_size - 2

    @property
    def eot_id(self) -> int:
        return self.vocab_size - 1

    @property
    def pad_id(self) -> int:
        return 0

    def word_ids(self, word: str) -> tuple[int, ...]:
        """Token ids of one pre-split chunk, merge results cached."""
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        data = word.encode("utf-8")
        units = [BYTE_UNITS[b] for b in data]
        units[-1] += WORD_END
        ids = tuple(self.encoder[s] for s in merge_word(tuple(units), self.ranks))
        self._word_cache[word] = ids
        return ids


@dataclass(frozen=True)
class TokenSequence:
    """A padded or truncated token window of fixed length."""

    ids: tuple[int, ...]
    content_len: int
    truncated: bool
    dropped_tokens: int

    @property
    def context_len(self) -> int:
        return len(self.ids)

    @property
    def content_ids(self) -> tuple[int, ...]:
        """Ids between the start and end markers."""
        return self.ids[1 : self.content_len - 1]


def _read_source(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, bytes):
        raw = source
    elif isinstance(source, io.TextIOBase):
        raw = source.read().encode("utf-8")
    else:
        raw = source.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw.decode("utf-8")


def build_table(merges) -> MergeTable:
    """Assemble a MergeTable from an ordered list of merge pairs."""
    merges = [tuple(p) for p in merges]
    base = tuple(BYTE_UNITS) + tuple(u + WORD_END for u in BYTE_UNITS)
    vocab = list(base) + ["".join(p) for p in merges] + [SOT_TOKEN, EOT_TOKEN]
    encoder = {tok: i for i, tok in enumerate(vocab)}
    ranks = {pair: i for i, pair in enumerate(merges)}
    return MergeTable(
        base_tokens=base,
        merges=tuple(merges),
        encoder=encoder,
        decoder=tuple(vocab),
        ranks=ranks,
    )


def load_merges(source) -> MergeTable:
    """Parse a merge file (path, bytes, or file object; gzip detected).

    Format: one "left right" pair per line, rank = line order; a first
    line starting with '#' is a header and is skipped.
    """
    text = _read_source(source)
    lines = text.split("\n")
    start = 1 if lines and lines[0].startswith("#") else 0

    merges: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for line_no, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MergeParseError(line_no, line)
        pair = (parts[0], parts[1])
        if pair in seen:
            raise ValidationError(f"duplicate merge pair {pair} at line {line_no}")
        seen.add(pair)
        merges.append(pair)

    return build_table(merges)


def content_token_ids(table: MergeTable, text: str) -> list[int]:
    """Content ids of a prompt, without markers, padding or truncation."""
    ids: list[int] = []
    for word in _CHUNK_RE.findall(normalize_text(text)):
        ids.extend(table.word_ids(word))
    return ids


def encode(table: MergeTable, text: str, context_len: int) -> TokenSequence:
    """Tokenize a prompt into a fixed window of ``context_len`` ids.

    The window is [SOT] + content + [EOT] + padding; when the content
    overflows, trailing content tokens are dropped so the end marker
    stays at the final position.
    """
    if context_len < 3:
        raise ValidationError(f"context length must be >= 3, got {context_len}")
    content = content_token_ids(table, text)
    room = context_len - 2
    dropped = max(len(content) - room, 0)
    if dropped:
        content = content[:room]
    ids = [table.sot_id] + content + [table.eot_id]
    ids.extend([table.pad_id] * (context_len - len(ids)))
    return TokenSequence(
        ids=tuple(ids),
        content_len=2 + len(content),
        truncated=dropped > 0,
        dropped_tokens=dropped,
    )


def decode(table: MergeTable, seq) -> str:
    """Invert ``encode`` up to lowercasing and whitespace normalization.

    Accepts a TokenSequence or a plain id sequence; markers and padding
    are dropped.
    """
    if isinstance(seq, TokenSequence):
        ids = list(seq.content_ids)
    else:
        ids = list(seq)
        for i, tok in enumerate(ids):
            if tok == table.eot_id:
                ids = ids[:i]
                break
        if ids and ids[0] == table.sot_id:
            ids = ids[1:]
    vocab_size = table.vocab_size
    for tok in ids:
        if not 0 <= tok < vocab_size:
            raise ValidationError(f"token id {tok} out of range [0, {vocab_size})")
    text = "".join(table.decoder[tok] for tok in ids if tok not in (table.sot_id, table.eot_id))
    data = bytes(UNIT_TO_BYTE[ch] for ch in text)
    return data.decode("utf-8", errors="replace").replace(WORD_END, " ").strip()
