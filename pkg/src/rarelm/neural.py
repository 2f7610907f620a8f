"""Single-layer LSTM language model trained from scratch with truncated BPTT.

The model keeps an input embedding matrix S (d_s x |V|), one LSTM layer
with gate order (input, forget, cell, output), and an output embedding
matrix U (d_h x |V|) applied as a pure inner product: y = U^T h, no output
bias. Parameters live in float64; checkpoints store float32.
"""

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .textcorpus import BOS_ID, SPECIALS, Vocabulary

MAGIC = b"RLM1"
CHECKPOINT_VERSION = 1
LOG10 = math.log(10.0)


@dataclass
class LMState:
    """Recurrent state: hidden/context vector h and LSTM cell c."""
    h: np.ndarray
    c: np.ndarray


@dataclass
class TrainConfig:
    learning_rate: float = 1.0
    clip_norm: float = 5.0
    bptt_len: int = 32
    dropout_p: float = 0.2
    epochs: int = 20
    seed: int = 0
    lr_decay: float = 0.5
    batch_size: int = 16

    def validate(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0.0 <= self.dropout_p < 1.0):
            raise ValueError("dropout_p must be in [0, 1)")
        if self.bptt_len < 1:
            raise ValueError("bptt_len must be >= 1")
        if self.clip_norm <= 0:
            raise ValueError("clip_norm must be > 0")


class NeuralLM:
    """Container for the three parameter groups S, (W, b), U."""

    def __init__(self, vocab: Vocabulary, d_s: int, d_h: int,
                 S: np.ndarray, W: np.ndarray, b: np.ndarray, U: np.ndarray):
        self.vocab = vocab
        self.d_s = d_s
        self.d_h = d_h
        self.S = S  # (d_s, |V|)
        self.W = W  # (4*d_h, d_s + d_h), gate order i, f, g, o
        self.b = b  # (4*d_h,)
        self.U = U  # (d_h, |V|)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def zero_state(self, batch: int = 1) -> LMState:
        return LMState(np.zeros((batch, self.d_h)), np.zeros((batch, self.d_h)))

    def copy(self) -> "NeuralLM":
        return NeuralLM(self.vocab, self.d_s, self.d_h,
                        self.S.copy(), self.W.copy(), self.b.copy(), self.U.copy())


def init_model(vocab: Vocabulary, d_s: int = 32, d_h: int = 64,
               seed: int = 0) -> NeuralLM:
    """Seeded uniform(-0.05, 0.05) init; forget-gate bias slice set to 1."""
    if d_s < 1 or d_h < 1:
        raise ValueError("embedding and hidden sizes must be >= 1")
    rng = np.random.default_rng(seed)
    nv = len(vocab)
    S = rng.uniform(-0.05, 0.05, (d_s, nv))
    W = rng.uniform(-0.05, 0.05, (4 * d_h, d_s + d_h))
    U = rng.uniform(-0.05, 0.05, (d_h, nv))
    b = np.zeros(4 * d_h)
    b[d_h:2 * d_h] = 1.0  # forget gate
    return NeuralLM(vocab, d_s, d_h, S, W, b, U)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _softmax_rows(y):
    y = y - y.max(axis=-1, keepdims=True)
    e = np.exp(y)
    return e / e.sum(axis=-1, keepdims=True)


def _cell(m: NeuralLM, x, h_prev, c_prev):
    """One batched LSTM step. x: (B, d_s); returns gates and new (h, c)."""
    dh = m.d_h
    z = np.concatenate([x, h_prev], axis=1) @ m.W.T + m.b
    i = _sigmoid(z[:, :dh])
    f = _sigmoid(z[:, dh:2 * dh])
    g = np.tanh(z[:, 2 * dh:3 * dh])
    o = _sigmoid(z[:, 3 * dh:])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return i, f, g, o, c, h


def forward_step(m: NeuralLM, word: int, state: LMState,
                 dropout_p: float = 0.0, rng=None):
    """One inference step: returns (probability vector over V, new state).

    The input state is never mutated. Dropout (inverted scaling) is applied
    to the embedding and to h before the output projection when requested.
    """
    if not (0 <= word < m.vocab_size):
        raise IndexError("word id %d out of range for |V|=%d" % (word, m.vocab_size))
    x = m.S[:, word][None, :]
    if dropout_p > 0.0:
        x = x * (rng.random(x.shape) >= dropout_p) / (1.0 - dropout_p)
    _, _, _, _, c, h = _cell(m, x, state.h, state.c)
    h_out = h
    if dropout_p > 0.0:
        h_out = h * (rng.random(h.shape) >= dropout_p) / (1.0 - dropout_p)
    y = h_out @ m.U
    p = _softmax_rows(y)[0]
    return p, LMState(h, c)


def nn_sentence_logprob(m: NeuralLM, ids: list[int]) -> float:
    """Total log10 probability of a bos/eos-framed sentence, state reset first."""
    st = m.zero_state()
    total = 0.0
    for t in range(len(ids) - 1):
        p, st = forward_step(m, ids[t], st)
        total += math.log10(p[ids[t + 1]])
    return total


def nn_perplexity(m: NeuralLM, corpus) -> float:
    """Perplexity over framed sentences; eos counted, bos not."""
    total = 0.0
    nwords = 0
    for ids in corpus:
        total += nn_sentence_logprob(m, ids)
        nwords += len(ids) - 1
    if nwords == 0:
        raise ValueError("empty corpus")
    return 10.0 ** (-total / nwords)


def loss_and_grads(m: NeuralLM, inputs, targets, h0, c0,
                   dropout_p: float = 0.0, rng=None):
    """Sum of cross-entropy (nats) over a (B, T) segment plus gradients.

    Returns (loss, grads dict with keys S/W/b/U, final h, final c). The
    final state is detached: gradients do not flow past the segment start.
    """
    B, T = inputs.shape
    dh, ds = m.d_h, m.d_s
    h, c = h0, c0
    cache = []
    loss = 0.0
    for t in range(T):
        x = m.S[:, inputs[:, t]].T  # (B, d_s)
        if dropout_p > 0.0:
            mx = (rng.random(x.shape) >= dropout_p) / (1.0 - dropout_p)
            x = x * mx
        else:
            mx = None
        i, f, g, o, c_new, h_new = _cell(m, x, h, c)
        if dropout_p > 0.0:
            mh = (rng.random(h_new.shape) >= dropout_p) / (1.0 - dropout_p)
            h_out = h_new * mh
        else:
            mh = None
            h_out = h_new
        y = h_out @ m.U
        p = _softmax_rows(y)
        loss -= np.log(p[np.arange(B), targets[:, t]]).sum()
        cache.append((x, mx, i, f, g, o, c, c_new, h, h_out, mh, p))
        h, c = h_new, c_new

    grads = {"S": np.zeros_like(m.S), "W": np.zeros_like(m.W),
             "b": np.zeros_like(m.b), "U": np.zeros_like(m.U)}
    dh_next = np.zeros((B, dh))
    dc_next = np.zeros((B, dh))
    for t in range(T - 1, -1, -1):
        x, mx, i, f, g, o, c_prev, c_new, h_prev, h_out, mh, p = cache[t]
        dy = p.copy()
        dy[np.arange(B), targets[:, t]] -= 1.0
        grads["U"] += h_out.T @ dy
        dhout = dy @ m.U.T
        if mh is not None:
            dhout = dhout * mh
        dhid = dhout + dh_next
        tc = np.tanh(c_new)
        do = dhid * tc
        dc = dhid * o * (1.0 - tc * tc) + dc_next
        df = dc * c_prev
        di = dc * g
        dg = dc * i
        dc_next = dc * f
        dz = np.concatenate([di * i * (1.0 - i),
                             df * f * (1.0 - f),
                             dg * (1.0 - g * g),
                             do * o * (1.0 - o)], axis=1)
        xh = np.concatenate([x, h_prev], axis=1)
        grads["W"] += dz.T @ xh
        grads["b"] += dz.sum(axis=0)
        dxh = dz @ m.W
        dx = dxh[:, :ds]
        if mx is not None:
            dx = dx * mx
        np.add.at(grads["S"].T, inputs[:, t], dx)
        dh_next = dxh[:, ds:]
    return loss, grads, h, c


def clip_gradients(grads: dict, clip_norm: float) -> float:
    """Scale all gradients in place so the global norm is <= clip_norm."""
    total = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > clip_norm:
        scale = clip_norm / total
        for g in grads.values():
            g *= scale
    return total


class TrainingDiverged(RuntimeError):
    pass


def _batch_stream(corpus_ids, batch_size):
    """Concatenate framed sentences and fold the stream into batch rows."""
    stream = []
    for ids in corpus_ids:
        stream.extend(ids)
    stream = np.asarray(stream, dtype=np.int64)
    nbatch = (len(stream) - 1) // batch_size
    if nbatch < 1:
        raise ValueError("corpus too small for batch_size=%d" % batch_size)
    inputs = stream[:nbatch * batch_size].reshape(batch_size, nbatch)
    targets = stream[1:nbatch * batch_size + 1].reshape(batch_size, nbatch)
    return inputs, targets


def train(m: NeuralLM, corpus_ids, cfg: TrainConfig, val_ids=None,
          log=None) -> tuple[NeuralLM, list[dict]]:
    """Train a copy of the model; returns (trained model, per-epoch log).

    corpus_ids: list of bos/eos-framed id sequences. Validation perplexity
    defaults to the epoch's training-stream perplexity when val_ids is
    None; the learning rate is multiplied by lr_decay whenever it fails to
    improve. Deterministic given cfg.seed.
    """
    cfg.validate()
    corpus_ids = list(corpus_ids)
    if not corpus_ids:
        raise ValueError("empty corpus")
    m = m.copy()
    rng = np.random.default_rng(cfg.seed)
    inputs, targets = _batch_stream(corpus_ids, cfg.batch_size)
    B, N = inputs.shape
    lr = cfg.learning_rate
    best_val = float("inf")
    history = []
    for epoch in range(1, cfg.epochs + 1):
        h = np.zeros((B, m.d_h))
        c = np.zeros((B, m.d_h))
        total_loss = 0.0
        total_tokens = 0
        for bi, start in enumerate(range(0, N, cfg.bptt_len)):
            seg_in = inputs[:, start:start + cfg.bptt_len]
            seg_tg = targets[:, start:start + cfg.bptt_len]
            loss, grads, h, c = loss_and_grads(
                m, seg_in, seg_tg, h, c, dropout_p=cfg.dropout_p, rng=rng)
            ntok = seg_in.size
            if not math.isfinite(loss):
                raise TrainingDiverged(
                    "non-finite loss at epoch %d batch %d" % (epoch, bi))
            # SGD on the mean per-token loss
            for g in grads.values():
                g /= ntok
            clip_gradients(grads, cfg.clip_norm)
            m.S -= lr * grads["S"]
            m.W -= lr * grads["W"]
            m.b -= lr * grads["b"]
            m.U -= lr * grads["U"]
            total_loss += loss
            total_tokens += ntok
        train_ppl = math.exp(total_loss / total_tokens)
        if val_ids is not None:
            val_ppl = nn_perplexity(m, val_ids)
        else:
            val_ppl = train_ppl
        history.append({"epoch": epoch, "lr": lr,
                        "train_ppl": train_ppl, "val_ppl": val_ppl})
        if log:
            log("epoch %d lr %.4g train_ppl %.2f val_ppl %.2f"
                % (epoch, lr, train_ppl, val_ppl))
        if val_ppl < best_val:
            best_val = val_ppl
        else:
            lr *= cfg.lr_decay
    return m, history


def save_model(m: NeuralLM, path) -> None:
    """Write the RLM1 checkpoint: magic, JSON header, float32 LE payloads."""
    header = {
        "version": CHECKPOINT_VERSION,
        "d_s": m.d_s,
        "d_h": m.d_h,
        "vocab_size": m.vocab_size,
        "gate_order": "ifgo",
        "vocab": m.vocab.id_to_word,
        "counts": [m.vocab.counts.get(w, 0) for w in m.vocab.id_to_word],
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(hbytes)))
        f.write(hbytes)
        for arr in (m.S, m.W, m.b, m.U):
            f.write(arr.astype("<f4").tobytes())


class CheckpointError(ValueError):
    pass


def load_model(path) -> NeuralLM:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise CheckpointError("bad magic: not an RLM1 checkpoint")
    if len(data) < 8:
        raise CheckpointError("truncated checkpoint header")
    (hlen,) = struct.unpack("<I", data[4:8])
    if len(data) < 8 + hlen:
        raise CheckpointError("truncated checkpoint header")
    try:
        header = json.loads(data[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError("unreadable checkpoint header: %s" % e)
    if header.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError("unsupported checkpoint version %r" % header.get("version"))
    d_s, d_h, nv = header["d_s"], header["d_h"], header["vocab_size"]
    words = header["vocab"]
    if len(words) != nv or words[:3] != list(SPECIALS):
        raise CheckpointError("checkpoint vocabulary is inconsistent")
    counts = dict(zip(words, header.get("counts", [])))
    vocab = Vocabulary(words[3:], counts)
    shapes = [(d_s, nv), (4 * d_h, d_s + d_h), (4 * d_h,), (d_h, nv)]
    need = sum(int(np.prod(s)) for s in shapes) * 4
    payload = data[8 + hlen:]
    if len(payload) != need:
        raise CheckpointError(
            "payload length %d does not match header dims (expected %d)"
            % (len(payload), need))
    arrays = []
    off = 0
    for s in shapes:
        n = int(np.prod(s)) * 4
        arrays.append(np.frombuffer(payload[off:off + n], dtype="<f4")
                      .astype(np.float64).reshape(s))
        off += n
    S, W, b, U = arrays
    return NeuralLM(vocab, d_s, d_h, S, W, b, U)
