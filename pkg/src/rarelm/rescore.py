"""N-best hypothesis rescoring with a neural LM, optionally interpolated
with a Kneser-Ney n-gram model in the probability domain."""

import math
from dataclasses import dataclass, field

from .neural import NeuralLM, forward_step
from .textcorpus import encode


@dataclass
class Hypothesis:
    rank: int
    am_score: float
    words: list[str]
    total_score: float = 0.0


@dataclass
class NBestList:
    utt_id: str
    hypotheses: list[Hypothesis] = field(default_factory=list)


@dataclass
class RescoreConfig:
    lm_weight: float = 1.0          # lambda
    interp_weight: float = 0.0      # mu, probability mass on the KN model
    word_penalty: float = 0.0       # gamma, per-word insertion bonus

    def validate(self):
        if not (0.0 <= self.interp_weight <= 1.0):
            raise ValueError("interp_weight must be in [0, 1]")
        if self.lm_weight < 0:
            raise ValueError("lm_weight must be >= 0")


def lm_score_hypothesis(nlm: NeuralLM, kn, words: list[str],
                        interp_weight: float = 0.0) -> float:
    """log10 probability of a hypothesis under (1-mu)*P_nlm + mu*P_kn.

    The mix is linear in the probability domain per position. State is
    reset for every hypothesis; OOV words map to unk.
    """
    if interp_weight > 0.0 and kn is None:
        raise ValueError("interp_weight > 0 requires an n-gram model")
    ids = encode(words, nlm.vocab)
    mu = interp_weight
    st = nlm.zero_state()
    total = 0.0
    for t in range(len(ids) - 1):
        p_vec, st = forward_step(nlm, ids[t], st)
        p = p_vec[ids[t + 1]]
        if mu > 0.0:
            h = tuple(ids[max(0, t - kn.order + 2):t + 1])
            p = (1.0 - mu) * p + mu * kn.prob(ids[t + 1], h)
        total += math.log10(p)
    return total


def rescore_nbest(nb: NBestList, nlm: NeuralLM, kn,
                  cfg: RescoreConfig) -> NBestList:
    """Re-rank one n-best list by am + lambda*lm_log10prob + gamma*|words|.

    Ties are broken by original rank (lower wins). Returns a new list; the
    chosen top hypothesis is element 0.
    """
    cfg.validate()
    if not nb.hypotheses:
        raise ValueError("empty n-best list for %s" % nb.utt_id)
    scored = []
    for hyp in nb.hypotheses:
        lm = lm_score_hypothesis(nlm, kn, hyp.words, cfg.interp_weight)
        total = hyp.am_score + cfg.lm_weight * lm + cfg.word_penalty * len(hyp.words)
        scored.append(Hypothesis(hyp.rank, hyp.am_score, list(hyp.words), total))
    scored.sort(key=lambda h: (-h.total_score, h.rank))
    return NBestList(nb.utt_id, scored)


class NBestFormatError(ValueError):
    pass


def read_nbest(path) -> list[NBestList]:
    """Parse `utt_id<TAB>rank<TAB>am_score<TAB>words...` lines into lists.

    Utterances must be contiguous with ranks ascending from 1.
    """
    lists = []
    current = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise NBestFormatError(
                    "%s:%d: expected 4 tab-separated fields, got %d"
                    % (path, lineno, len(parts)))
            utt, rank_s, am_s, text = parts
            try:
                rank = int(rank_s)
                am = float(am_s)
            except ValueError:
                raise NBestFormatError("%s:%d: bad rank or score" % (path, lineno))
            if not math.isfinite(am):
                raise NBestFormatError("%s:%d: non-finite am_score" % (path, lineno))
            if current is None or current.utt_id != utt:
                if any(l.utt_id == utt for l in lists):
                    raise NBestFormatError(
                        "%s:%d: utterance %s is not contiguous" % (path, lineno, utt))
                current = NBestList(utt)
                lists.append(current)
            expected = len(current.hypotheses) + 1
            if rank != expected:
                raise NBestFormatError(
                    "%s:%d: rank %d, expected %d" % (path, lineno, rank, expected))
            current.hypotheses.append(Hypothesis(rank, am, text.split()))
    return lists


def _fmt(x: float) -> str:
    return "%.10g" % x


def write_nbest(lists, path) -> None:
    """Write lists back in the 4-field input format."""
    with open(path, "w", encoding="utf-8") as f:
        for nb in lists:
            for h in nb.hypotheses:
                f.write("%s\t%d\t%s\t%s\n"
                        % (nb.utt_id, h.rank, _fmt(h.am_score), " ".join(h.words)))


def write_rescored(lists, path) -> None:
    """Write rescored lists with the extra total_score column."""
    with open(path, "w", encoding="utf-8") as f:
        for nb in lists:
            for pos, h in enumerate(nb.hypotheses, 1):
                f.write("%s\t%d\t%s\t%s\t%s\n"
                        % (nb.utt_id, pos, _fmt(h.am_score), _fmt(h.total_score),
                           " ".join(h.words)))


def write_onebest(lists, path) -> None:
    """Write the chosen transcript per utterance: `utt_id<TAB>words`."""
    with open(path, "w", encoding="utf-8") as f:
        for nb in lists:
            f.write("%s\t%s\n" % (nb.utt_id, " ".join(nb.hypotheses[0].words)))


def read_onebest(path) -> dict:
    """Read `utt_id<TAB>transcript` lines into utt -> token list."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise NBestFormatError("%s:%d: expected 'utt<TAB>text'" % (path, lineno))
            out[parts[0]] = parts[1].split()
    return out
