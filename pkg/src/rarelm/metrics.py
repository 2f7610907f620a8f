"""WER via Levenshtein alignment and rare-word recognition accuracy."""

from dataclasses import dataclass, field

MATCH, SUB, INS, DEL = "match", "sub", "ins", "del"
GAP = "-"


@dataclass
class WerReport:
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    ref_word_count: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        if self.ref_word_count == 0:
            return 0.0
        return self.errors / self.ref_word_count


@dataclass
class RareAccuracyReport:
    tracked: set
    occurrences: int = 0
    correct: int = 0

    @property
    def defined(self) -> bool:
        return self.occurrences > 0

    @property
    def accuracy(self) -> float:
        if not self.defined:
            raise ValueError("accuracy undefined: tracked words never occur")
        return self.correct / self.occurrences


def align(ref: list[str], hyp: list[str]) -> list[tuple]:
    """Minimal-cost alignment with unit costs.

    Returns (tag, ref_token_or_-, hyp_token_or_-) ops. Backtrace ties are
    resolved preferring match > sub > del > ins, making output deterministic.
    """
    n, m = len(ref), len(hyp)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        d[i][0] = i
    for j in range(1, m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ri = ref[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ri == hyp[j - 1] else 1)
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)
    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and d[i][j] == d[i - 1][j - 1]:
            ops.append((MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + 1:
            ops.append((SUB, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            ops.append((DEL, ref[i - 1], GAP))
            i -= 1
        else:
            ops.append((INS, GAP, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return ops


def alignment_cost(ops) -> int:
    return sum(1 for tag, _, _ in ops if tag != MATCH)


def sentence_wer_counts(ref, hyp) -> WerReport:
    ops = align(ref, hyp)
    r = WerReport(ref_word_count=len(ref))
    for tag, _, _ in ops:
        if tag == SUB:
            r.substitutions += 1
        elif tag == INS:
            r.insertions += 1
        elif tag == DEL:
            r.deletions += 1
    return r


def corpus_wer(refs: dict, hyps: dict) -> WerReport:
    """Totals over utterances; every hyp utt_id must have a reference."""
    total = WerReport()
    for utt in sorted(hyps):
        if utt not in refs:
            raise KeyError("no reference for utterance %s" % utt)
        r = sentence_wer_counts(refs[utt], hyps[utt])
        total.substitutions += r.substitutions
        total.insertions += r.insertions
        total.deletions += r.deletions
        total.ref_word_count += r.ref_word_count
    return total


def rare_word_accuracy(refs: dict, hyps: dict, tracked) -> RareAccuracyReport:
    """Each tracked-word reference occurrence counts as correct iff its
    alignment op is an exact match. Zero occurrences gives a flagged
    (undefined-accuracy) report, not an error."""
    tracked = set(tracked)
    report = RareAccuracyReport(tracked=tracked)
    for utt in sorted(hyps):
        if utt not in refs:
            raise KeyError("no reference for utterance %s" % utt)
        for tag, rtok, _ in align(refs[utt], hyps[utt]):
            if rtok in tracked:
                report.occurrences += 1
                if tag == MATCH:
                    report.correct += 1
    return report


def format_wer_report(r: WerReport) -> str:
    lines = [
        "%-14s %d" % ("ref_words", r.ref_word_count),
        "%-14s %d" % ("substitutions", r.substitutions),
        "%-14s %d" % ("insertions", r.insertions),
        "%-14s %d" % ("deletions", r.deletions),
        "%-14s %.4f" % ("wer", r.wer),
        "",
        "ref_words\t%d" % r.ref_word_count,
        "substitutions\t%d" % r.substitutions,
        "insertions\t%d" % r.insertions,
        "deletions\t%d" % r.deletions,
        "wer\t%.6f" % r.wer,
    ]
    return "\n".join(lines) + "\n"
