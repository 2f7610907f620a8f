"""Corpus ingestion: tokenization, multiword-name joining, vocabulary building."""

from collections import Counter
from typing import Iterable, Iterator, Optional

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
BOS_ID = 0
EOS_ID = 1
UNK_ID = 2

SPECIALS = (BOS, EOS, UNK)


def tokenize(line: str) -> list[str]:
    """Lowercase and whitespace-split a line into tokens."""
    return line.lower().split()


class PhraseList:
    """Multiword names to be joined into single underscore-linked tokens.

    Phrases are stored as token tuples of length >= 2, deduplicated.
    """

    def __init__(self, phrases: Iterable[Iterable[str]] = ()):
        seen = set()
        self.phrases: list[tuple[str, ...]] = []
        for p in phrases:
            t = tuple(p)
            if len(t) < 2:
                raise ValueError("phrase must have at least 2 tokens: %r" % (t,))
            if t not in seen:
                seen.add(t)
                self.phrases.append(t)
        # first token -> phrases sorted longest-first, for greedy matching
        self._by_head: dict[str, list[tuple[str, ...]]] = {}
        for t in self.phrases:
            self._by_head.setdefault(t[0], []).append(t)
        for head in self._by_head:
            self._by_head[head].sort(key=len, reverse=True)

    def __len__(self):
        return len(self.phrases)

    @classmethod
    def from_file(cls, path) -> "PhraseList":
        phrases = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                toks = tokenize(line)
                if toks:
                    phrases.append(toks)
        return cls(phrases)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for t in self.phrases:
                f.write(" ".join(t) + "\n")


def join_phrases(tokens: list[str], phrases: PhraseList) -> list[str]:
    """Greedy left-to-right longest-match replacement of phrases by joined tokens.

    Matches do not overlap; a single pass over the sentence.
    """
    out = []
    i = 0
    n = len(tokens)
    while i < n:
        cands = phrases._by_head.get(tokens[i])
        matched = None
        if cands:
            for cand in cands:  # longest first
                if tuple(tokens[i:i + len(cand)]) == cand:
                    matched = cand
                    break
        if matched is not None:
            out.append("_".join(matched))
            i += len(matched)
        else:
            out.append(tokens[i])
            i += 1
    return out


class Vocabulary:
    """Bidirectional word<->id map with counts; specials pinned to ids 0, 1, 2."""

    def __init__(self, words: Iterable[str], counts: Optional[dict] = None):
        counts = counts or {}
        self.id_to_word: list[str] = list(SPECIALS)
        self.word_to_id: dict[str, int] = {w: i for i, w in enumerate(SPECIALS)}
        for w in words:
            if w in self.word_to_id:
                continue
            self.word_to_id[w] = len(self.id_to_word)
            self.id_to_word.append(w)
        self.counts: dict[str, int] = {w: int(counts.get(w, 0)) for w in self.id_to_word}

    def __len__(self):
        return len(self.id_to_word)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id

    def id(self, word: str) -> int:
        return self.word_to_id.get(word, UNK_ID)

    def word(self, idx: int) -> str:
        return self.id_to_word[idx]

    def count(self, word: str) -> int:
        return self.counts.get(word, 0)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for w in self.id_to_word:
                f.write("%s\t%d\n" % (w, self.counts.get(w, 0)))

    @classmethod
    def from_file(cls, path) -> "Vocabulary":
        words, counts = [], {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError("%s:%d: expected 'word<TAB>count'" % (path, lineno))
                words.append(parts[0])
                counts[parts[0]] = int(parts[1])
        if words[:3] != list(SPECIALS):
            raise ValueError("vocabulary file must start with %s" % (SPECIALS,))
        return cls(words[3:], counts)


def word_counts(corpus: Iterable[list[str]]) -> Counter:
    """Exact token counts over a sentence stream."""
    counts = Counter()
    for sent in corpus:
        counts.update(sent)
    return counts


def build_vocab(corpus: Iterable[list[str]], min_count: int = 1,
                max_size: Optional[int] = None) -> Vocabulary:
    """Build a vocabulary from a (phrase-joined) sentence stream.

    Words with count >= min_count are kept, truncated to max_size by
    descending count with lexicographic tie-break. min_count defaults to 1
    so rare words stay in the vocabulary.
    """
    counts = word_counts(corpus)
    if not counts:
        raise ValueError("empty corpus")
    kept = [w for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda w: (-counts[w], w))
    if max_size is not None:
        kept = kept[:max(0, max_size - len(SPECIALS))]
    return Vocabulary(kept, counts)


def encode(tokens: list[str], vocab: Vocabulary) -> list[int]:
    """Map a sentence to ids framed with bos/eos; OOV tokens map to unk."""
    return [BOS_ID] + [vocab.id(t) for t in tokens] + [EOS_ID]


def decode(ids: list[int], vocab: Vocabulary) -> list[str]:
    """Inverse of encode for in-vocabulary sentences; strips bos/eos framing."""
    toks = [vocab.word(i) for i in ids]
    if toks and toks[0] == BOS:
        toks = toks[1:]
    if toks and toks[-1] == EOS:
        toks = toks[:-1]
    return toks


def read_corpus(path) -> Iterator[list[str]]:
    """Stream tokenized sentences from a UTF-8 one-sentence-per-line file."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            yield tokenize(line)
