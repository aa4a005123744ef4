"""Text normalization and tokenization for Italian clinical terminology.

Every textual attribute (titles, entry terms, glossary terms, queries) goes
through the same pipeline so that index-time and query-time tokens always
agree:

1. accent folding (NFKD decomposition, combining marks dropped)
2. lowercase
3. split on any non-alphanumeric character (hyphens split)
4. stop-word removal (fixed shipped list, see ``STOP_WORDS``)

The pipeline is pure and deterministic: equal input strings always produce
equal token sequences.
"""

from __future__ import annotations

import re
import unicodedata

# Fixed Italian stop-word list: articles, simple and articulated prepositions,
# common conjunctions and a few bare function words. The list is part of the
# index contract; changing it changes every index built from the same sources.
STOP_WORDS: frozenset[str] = frozenset(
    """
    il lo la i gli le l un uno una
    di a da in con su per tra fra senza
    al allo alla ai agli alle all
    dal dallo dalla dai dagli dalle dall
    del dello della dei degli delle dell
    nel nello nella nei negli nelle nell
    sul sullo sulla sui sugli sulle sull
    col coi
    e ed o od ma se che ne anche come
    si cui non piu tutto tutti tutta tutte
    """.split()
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def fold(text: str) -> str:
    """Lowercase ``text`` and strip diacritics ("obesità" -> "obesita").

    Decomposition runs before lowercasing so compatibility characters that
    decompose to cased letters still come out lowercase.
    """
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch)).lower()


def split_tokens(text: str) -> list[str]:
    """Folded tokens of ``text``, stop words retained."""
    return _TOKEN_RE.findall(fold(text))


def tokenize(text: str) -> list[str]:
    """Folded tokens of ``text`` with stop words removed.

    >>> tokenize("Anomalie cutanee del pigmento, congenite")
    ['anomalie', 'cutanee', 'pigmento', 'congenite']
    """
    return [t for t in split_tokens(text) if t not in STOP_WORDS]
