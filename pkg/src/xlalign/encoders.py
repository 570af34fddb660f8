"""Sentence embedding producers.

Two routes to a fixed-width sentence vector:

  * a single-layer bidirectional LSTM with temporal max-pooling (dimension 2H),
    shared by the reconstruction, translation, inference and transfer
    objectives;
  * smooth-inverse-frequency weighted word averaging (dimension D), the
    bottom-up baseline.

Batched encoding pads to the longest sentence; padded steps copy the previous
LSTM state through and are excluded from the max-pool, so a sentence's
embedding does not depend on what it was batched with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .text import PAD, sif_weight

MASK_FILL = ad.MASK_FILL


@dataclass
class LSTMParams:
    w_in: np.ndarray   # (input_dim, 4H), gate layout [i, f, g, o]
    w_rec: np.ndarray  # (H, 4H)
    bias: np.ndarray   # (4H,)

    @property
    def hidden_size(self):
        return self.w_rec.shape[0]

    @property
    def input_size(self):
        return self.w_in.shape[0]


def init_lstm(input_dim, hidden, rng):
    """Uniform in [-1/sqrt(H), 1/sqrt(H)]; forget-gate bias starts at 1.0."""
    bound = 1.0 / np.sqrt(hidden)
    w_in = rng.uniform(-bound, bound, size=(input_dim, 4 * hidden))
    w_rec = rng.uniform(-bound, bound, size=(hidden, 4 * hidden))
    bias = np.zeros(4 * hidden)
    bias[hidden:2 * hidden] = 1.0
    return LSTMParams(w_in, w_rec, bias)


@dataclass
class EncoderParams:
    embeddings: np.ndarray  # (V, D)
    fwd: LSTMParams
    bwd: LSTMParams
    lang: str

    @property
    def vocab_size(self):
        return self.embeddings.shape[0]

    @property
    def dim(self):
        return self.embeddings.shape[1]

    @property
    def hidden_size(self):
        return self.fwd.hidden_size

    @property
    def output_dim(self):
        return 2 * self.hidden_size

    def named_arrays(self, prefix=""):
        return {
            f"{prefix}emb": self.embeddings,
            f"{prefix}fwd.w_in": self.fwd.w_in, f"{prefix}fwd.w_rec": self.fwd.w_rec,
            f"{prefix}fwd.bias": self.fwd.bias,
            f"{prefix}bwd.w_in": self.bwd.w_in, f"{prefix}bwd.w_rec": self.bwd.w_rec,
            f"{prefix}bwd.bias": self.bwd.bias,
        }


def new_encoder(vocab_size, dim, hidden, lang, seed, pretrained=None):
    """Fresh encoder; `pretrained` optionally seeds the word-embedding table
    (rows beyond the pretrained matrix stay random).
    """
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(dim)
    emb = rng.uniform(-bound, bound, size=(vocab_size, dim))
    if pretrained is not None:
        pretrained = np.asarray(pretrained, dtype=np.float64)
        if pretrained.shape[1] != dim:
            raise ValueError(f"pretrained dim {pretrained.shape[1]} != encoder dim {dim}")
        n = min(vocab_size, pretrained.shape[0])
        emb[:n] = pretrained[:n]
    return EncoderParams(emb, init_lstm(dim, hidden, rng), init_lstm(dim, hidden, rng), lang)


def copy_encoder(enc):
    return EncoderParams(
        enc.embeddings.copy(),
        LSTMParams(enc.fwd.w_in.copy(), enc.fwd.w_rec.copy(), enc.fwd.bias.copy()),
        LSTMParams(enc.bwd.w_in.copy(), enc.bwd.w_rec.copy(), enc.bwd.bias.copy()),
        enc.lang,
    )


@dataclass
class SentenceEmbedding:
    vector: np.ndarray
    producer: str  # e.g. "bilstm:en" or "sif:en"

    @property
    def dim(self):
        return self.vector.shape[0]


# ---------------------------------------------------------------------------
# BiLSTM + max-pool
# ---------------------------------------------------------------------------

def pad_batch(id_seqs):
    """Right-pad with PAD; returns (ids (B,T), mask (B,T) float, lengths)."""
    if not id_seqs:
        raise ValueError("empty batch")
    lengths = [len(s) for s in id_seqs]
    if min(lengths) == 0:
        raise ValueError("cannot encode an empty sentence")
    t_max = max(lengths)
    ids = np.full((len(id_seqs), t_max), PAD, dtype=np.int64)
    mask = np.zeros((len(id_seqs), t_max))
    for i, seq in enumerate(id_seqs):
        ids[i, :len(seq)] = seq
        mask[i, :len(seq)] = 1.0
    return ids, mask, lengths


class EncoderTensors:
    """Graph-side view of an encoder's parameter arrays (one wrap per step)."""

    def __init__(self, enc, trainable=True):
        mk = ad.leaf if trainable else ad.constant
        self.emb = mk(enc.embeddings)
        self.fwd = tuple(mk(a) for a in (enc.fwd.w_in, enc.fwd.w_rec, enc.fwd.bias))
        self.bwd = tuple(mk(a) for a in (enc.bwd.w_in, enc.bwd.w_rec, enc.bwd.bias))
        self.hidden = enc.hidden_size
        self.names = list(enc.named_arrays())
        self.tensors = [self.emb, *self.fwd, *self.bwd]

    def gradients(self):
        return {name: t.grad for name, t in zip(self.names, self.tensors) if t.grad is not None}


def _scan(ids, mask, emb, cell, hidden, reverse):
    """Run one LSTM direction over a padded batch.

    Padded steps copy h/c through unchanged, so with trailing padding the
    backward direction starts each sentence from a zero state regardless of
    batch width. Returns the per-timestep hidden states in input order.
    """
    b, t_max = ids.shape
    w_in, w_rec, bias = cell
    h = ad.constant(np.zeros((b, hidden)))
    c = ad.constant(np.zeros((b, hidden)))
    steps = range(t_max - 1, -1, -1) if reverse else range(t_max)
    states = [None] * t_max
    for t in steps:
        x = ad.gather_rows(emb, ids[:, t])
        h_new, c_new = ad.lstm_step(x, h, c, w_in, w_rec, bias)
        m = ad.constant(mask[:, t:t + 1])
        keep = ad.constant(1.0 - mask[:, t:t + 1])
        h = ad.add(ad.mul(h_new, m), ad.mul(h, keep))
        c = ad.add(ad.mul(c_new, m), ad.mul(c, keep))
        states[t] = h
    return states


def encode_batch(ids, mask, enc_tensors):
    """BiLSTM + masked temporal max-pool over a padded id batch -> (B, 2H)."""
    fwd_states = _scan(ids, mask, enc_tensors.emb, enc_tensors.fwd, enc_tensors.hidden, False)
    bwd_states = _scan(ids, mask, enc_tensors.emb, enc_tensors.bwd, enc_tensors.hidden, True)
    pooled = None
    for t in range(ids.shape[1]):
        state = ad.concat([fwd_states[t], bwd_states[t]], axis=1)
        state = ad.masked_fill(state, mask[:, t:t + 1], MASK_FILL)
        pooled = state if pooled is None else ad.maximum(pooled, state)
    return pooled


def encode_sentences(sentences, vocab, enc, trainable=False):
    """Encode token sequences to a (n, 2H) array (forward pass only)."""
    tensors = EncoderTensors(enc, trainable=False)
    out = np.empty((len(sentences), enc.output_dim))
    step = 64
    for lo in range(0, len(sentences), step):
        batch = sentences[lo:lo + step]
        ids, mask, _ = pad_batch([vocab.encode(s) for s in batch])
        _check_ids(ids, enc.vocab_size)
        out[lo:lo + len(batch)] = encode_batch(ids, mask, tensors).data
    return out


def _check_ids(ids, vocab_size):
    if ids.size and ids.max() >= vocab_size:
        raise ValueError(f"token id {int(ids.max())} out of range for vocabulary of {vocab_size}")


def encode_bilstm_maxpool(tokens_or_ids, enc, vocab=None):
    """Embed one sentence; returns a SentenceEmbedding of dimension 2H."""
    if not tokens_or_ids:
        raise ValueError("cannot encode an empty sentence")
    if isinstance(tokens_or_ids[0], str):
        if vocab is None:
            raise ValueError("a vocabulary is required to encode surface tokens")
        ids = vocab.encode(tokens_or_ids)
    else:
        ids = list(tokens_or_ids)
    arr, mask, _ = pad_batch([ids])
    _check_ids(arr, enc.vocab_size)
    vec = encode_batch(arr, mask, EncoderTensors(enc, trainable=False)).data[0]
    return SentenceEmbedding(vec, f"bilstm:{enc.lang}")


# ---------------------------------------------------------------------------
# SIF weighted averaging
# ---------------------------------------------------------------------------

def encode_sif(tokens, table, vocab, a=1e-3):
    """Length-normalised SIF-weighted sum of word vectors -> dimension D."""
    if not tokens:
        raise ValueError("cannot encode an empty sentence")
    total = vocab.total_count
    acc = np.zeros(table.shape[1])
    for tok in tokens:
        wid = vocab.id_of(tok)
        acc += sif_weight(vocab.frequencies[wid], total, a) * table[wid]
    return SentenceEmbedding(acc / len(tokens), "sif")


def encode_sif_matrix(sentences, table, vocab, a=1e-3, remove_pc=False):
    out = np.stack([encode_sif(s, table, vocab, a).vector for s in sentences])
    if remove_pc:
        out = remove_principal_component(out)
    return out


def remove_principal_component(x):
    """Subtract each row's projection onto the first right singular vector.

    Off by default in the pipelines; provided for experimentation.
    """
    x = np.asarray(x, dtype=np.float64)
    _, _, vt = np.linalg.svd(x - x.mean(axis=0), full_matrices=False)
    pc = vt[0]
    return x - np.outer(x @ pc, pc)


def dump_sentence_embeddings(path, matrix):
    """word2vec-style dump with the sentence index in place of the word."""
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for i, row in enumerate(matrix):
            fh.write(str(i) + " " + " ".join(repr(float(v)) for v in row) + "\n")
