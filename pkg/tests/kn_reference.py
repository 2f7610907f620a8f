"""Brute-force reference implementation of interpolated modified Kneser-Ney.

Deliberately naive: counts are recomputed by scanning the corpus and the
probability recursion is evaluated directly from counts, without back-off
tables. Used as an oracle for the table-based model.
"""

import math
from collections import Counter

BOS_ID = 0


def window_occurrences(sentences, gram):
    """How many times the id tuple occurs as a contiguous window."""
    n = 0
    k = len(gram)
    for sent in sentences:
        for i in range(len(sent) - k + 1):
            if tuple(sent[i:i + k]) == gram:
                n += 1
    return n


def left_extensions(sentences, gram):
    """Distinct ids v such that (v,) + gram occurs as a window."""
    k = len(gram)
    seen = set()
    for sent in sentences:
        for i in range(1, len(sent) - k + 1):
            if tuple(sent[i:i + k]) == gram:
                seen.add(sent[i - 1])
    return seen


def ref_count(sentences, gram, order):
    """The modified KN count of a gram in an order-n model."""
    k = len(gram)
    if k == order:
        return window_occurrences(sentences, gram)
    if k == 1 and gram[0] == BOS_ID:
        return 0
    cont = len(left_extensions(sentences, gram))
    if k >= 2 and gram[0] == BOS_ID:
        return cont + window_occurrences(sentences, gram)
    return cont


def all_grams_of_order(sentences, k, order):
    """Every gram of length k with a nonzero modified count."""
    grams = set()
    for sent in sentences:
        for i in range(len(sent) - k + 1):
            grams.add(tuple(sent[i:i + k]))
    return {g for g in grams if ref_count(sentences, g, order) > 0}


def ref_discounts(sentences, k, order):
    """(d1, d2, d3plus) for order k, with the 0.75 degenerate fallback."""
    cc = Counter()
    for g in all_grams_of_order(sentences, k, order):
        c = ref_count(sentences, g, order)
        if 1 <= c <= 4:
            cc[c] += 1
    n1, n2, n3, n4 = cc[1], cc[2], cc[3], cc[4]
    if n1 == 0 or n2 == 0 or n3 == 0 or n4 == 0:
        return (0.75, 0.75, 0.75)
    y = n1 / (n1 + 2.0 * n2)
    ds = (1.0 - 2.0 * y * n2 / n1,
          2.0 - 3.0 * y * n3 / n2,
          3.0 - 4.0 * y * n4 / n3)
    if min(ds) < 0.0:
        return (0.75, 0.75, 0.75)
    return ds


def _disc(ds, c):
    if c >= 3:
        return ds[2]
    if c == 2:
        return ds[1]
    if c == 1:
        return ds[0]
    return 0.0


def ref_prob(sentences, word, history, order, vocab_size, discounts=None):
    """Directly evaluated interpolated modified-KN probability.

    discounts, when given, maps order -> (d1, d2, d3plus); otherwise they
    are estimated per order from the corpus.
    """
    history = tuple(history[-(order - 1):]) if order > 1 else ()
    k = len(history) + 1
    if k == 1:
        ds = discounts[1] if discounts else ref_discounts(sentences, 1, order)
        total = 0.0
        gamma_num = 0.0
        for g in all_grams_of_order(sentences, 1, order):
            c = ref_count(sentences, g, order)
            total += c
            gamma_num += _disc(ds, c)
        c = ref_count(sentences, (word,), order)
        return (c - _disc(ds, c)) / total + (gamma_num / total) / vocab_size

    # total events and per-count-class tallies under this history
    ds = discounts[k] if discounts else ref_discounts(sentences, k, order)
    total = 0.0
    gamma_num = 0.0
    for g in all_grams_of_order(sentences, k, order):
        if g[:-1] == history:
            c = ref_count(sentences, g, order)
            total += c
            gamma_num += _disc(ds, c)
    lower = ref_prob(sentences, word, history[1:], order, vocab_size, discounts)
    if total == 0.0:
        return lower
    c = ref_count(sentences, history + (word,), order)
    return (c - _disc(ds, c)) / total + (gamma_num / total) * lower


def ref_sentence_logprob(sentences, ids, order, vocab_size, discounts=None):
    total = 0.0
    for t in range(1, len(ids)):
        h = tuple(ids[max(0, t - order + 1):t])
        total += math.log10(ref_prob(sentences, ids[t], h, order, vocab_size, discounts))
    return total
