"""Training objectives and loops.

Four procedures share the BiLSTM encoder:

  * denoising reconstruction (noisy input, clean target, same language);
  * translation without attention (source input, pivot-language target);
  * joint training of several encoders against one shared decoder,
    alternating the batch language round-robin;
  * cross-lingual inference classification with a single shared softmax head,
    premise and hypothesis languages drawn independently per batch;
  * frozen-pivot representation transfer with an L1 regression loss.

The decoder is conditioned by concatenating the sentence embedding to the
previous-token embedding at every step; there is no attention. All loops are
deterministic functions of (seed, data, schedule).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .encoders import (EncoderParams, EncoderTensors, LSTMParams, encode_batch,
                       encode_sentences, init_lstm, pad_batch, _check_ids)
from .optim import Adam
from .rand import Xorshift64Star
from .text import BOS, EOS, PAD, NoiseParams, corrupt

TRACE_HEADER = "step,objective,language_pair,value"


@dataclass
class TrainSchedule:
    batch_size: int = 16
    steps: int = 100
    lr: float = 1e-3
    language_order: list = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")


def write_trace(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRACE_HEADER + "\n")
        for step, objective, pair, value in rows:
            fh.write(f"{step},{objective},{pair},{value!r}\n")


# ---------------------------------------------------------------------------
# decoder
# ---------------------------------------------------------------------------

@dataclass
class DecoderParams:
    embeddings: np.ndarray  # (V, D) previous-token table, untied from encoders
    cell: LSTMParams        # input dim D + sentence_dim
    w_out: np.ndarray       # (H, V)
    b_out: np.ndarray       # (V,)
    lang: str

    @property
    def vocab_size(self):
        return self.w_out.shape[1]

    @property
    def sentence_dim(self):
        return self.cell.input_size - self.embeddings.shape[1]

    def named_arrays(self, prefix="dec."):
        return {
            f"{prefix}emb": self.embeddings,
            f"{prefix}cell.w_in": self.cell.w_in, f"{prefix}cell.w_rec": self.cell.w_rec,
            f"{prefix}cell.bias": self.cell.bias,
            f"{prefix}w_out": self.w_out, f"{prefix}b_out": self.b_out,
        }


def new_decoder(vocab_size, dim, sentence_dim, hidden, lang, seed):
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(dim)
    emb = rng.uniform(-bound, bound, size=(vocab_size, dim))
    cell = init_lstm(dim + sentence_dim, hidden, rng)
    w_out = rng.uniform(-1.0 / np.sqrt(hidden), 1.0 / np.sqrt(hidden), size=(hidden, vocab_size))
    return DecoderParams(emb, cell, w_out, np.zeros(vocab_size), lang)


class DecoderTensors:
    def __init__(self, dec, trainable=True):
        mk = ad.leaf if trainable else ad.constant
        self.emb = mk(dec.embeddings)
        self.cell = tuple(mk(a) for a in (dec.cell.w_in, dec.cell.w_rec, dec.cell.bias))
        self.w_out = mk(dec.w_out)
        self.b_out = mk(dec.b_out)
        self.hidden = dec.cell.hidden_size
        self.names = list(dec.named_arrays())
        self.tensors = [self.emb, *self.cell, self.w_out, self.b_out]

    def gradients(self):
        return {name: t.grad for name, t in zip(self.names, self.tensors) if t.grad is not None}


def teacher_forcing_arrays(target_ids, append_eos=True):
    """Build decoder input/target/mask arrays for a batch of target sentences.

    Step k predicts target token k from [BOS, y_1, .., y_{k-1}]; with
    append_eos the final step predicts EOS.
    """
    extra = 1 if append_eos else 0
    lengths = [len(s) + extra for s in target_ids]
    k_max = max(lengths)
    dec_in = np.full((len(target_ids), k_max), PAD, dtype=np.int64)
    targets = np.full((len(target_ids), k_max), PAD, dtype=np.int64)
    mask = np.zeros((len(target_ids), k_max))
    for i, seq in enumerate(target_ids):
        row_in = [BOS] + list(seq[:len(seq) - 1 + extra])
        row_tgt = list(seq) + ([EOS] if append_eos else [])
        dec_in[i, :len(row_in)] = row_in
        targets[i, :len(row_tgt)] = row_tgt
        mask[i, :len(row_tgt)] = 1.0
    return dec_in, targets, mask


def decode_ce_sum(sent_emb, dec_tensors, dec_in, targets, mask):
    """Teacher-forced cross-entropy summed over unmasked target tokens."""
    b = dec_in.shape[0]
    h = ad.constant(np.zeros((b, dec_tensors.hidden)))
    c = ad.constant(np.zeros((b, dec_tensors.hidden)))
    total = None
    for k in range(dec_in.shape[1]):
        prev = ad.gather_rows(dec_tensors.emb, dec_in[:, k])
        x = ad.concat([prev, sent_emb], axis=1)
        h, c = ad.lstm_step(x, h, c, *dec_tensors.cell)
        logits = ad.add(ad.matmul(h, dec_tensors.w_out), dec_tensors.b_out)
        ce = ad.softmax_cross_entropy_sum(logits, targets[:, k], mask[:, k])
        total = ce if total is None else ad.add(total, ce)
    return total


@dataclass
class LossGraph:
    loss: ad.Tensor
    enc_tensors: EncoderTensors
    dec_tensors: DecoderTensors
    n_tokens: int


def seq2seq_loss(inputs, targets, enc, dec, src_vocab, tgt_vocab,
                 denoise=None, noise_rng=None, append_eos=True,
                 enc_trainable=True, dec_trainable=True):
    """Token-level cross-entropy of reconstructing/translating `targets` from
    the sentence embeddings of `inputs`, averaged over non-PAD target tokens.

    With `denoise` set the encoder sees corrupted inputs while the loss still
    targets the clean sentences (inputs and targets are then the same batch).
    """
    if len(inputs) != len(targets):
        raise ValueError(f"batch sides differ: {len(inputs)} inputs vs {len(targets)} targets")
    if denoise is not None:
        rng = noise_rng if noise_rng is not None else Xorshift64Star(denoise.seed)
        inputs = [corrupt(s, denoise, rng) for s in inputs]
    in_ids, in_mask, _ = pad_batch([src_vocab.encode(s) for s in inputs])
    _check_ids(in_ids, enc.vocab_size)
    if any(not s for s in targets):
        raise ValueError("cannot decode an empty target sentence")
    tgt_ids = [tgt_vocab.encode(s) for s in targets]
    top = max(max(s) for s in tgt_ids)
    if top >= dec.vocab_size:
        raise ValueError(
            f"target vocabulary mismatch: id {top} outside decoder table of {dec.vocab_size}")

    enc_tensors = EncoderTensors(enc, trainable=enc_trainable)
    dec_tensors = DecoderTensors(dec, trainable=dec_trainable)
    sent = encode_batch(in_ids, in_mask, enc_tensors)
    dec_in, tgt_arr, mask = teacher_forcing_arrays(tgt_ids, append_eos)
    n_tokens = int(mask.sum())
    ce = decode_ce_sum(sent, dec_tensors, dec_in, tgt_arr, mask)
    return LossGraph(ad.scale(ce, 1.0 / n_tokens), enc_tensors, dec_tensors, n_tokens)


# ---------------------------------------------------------------------------
# joint encoder-decoder training
# ---------------------------------------------------------------------------

@dataclass
class JointResult:
    encoders: dict
    decoder: DecoderParams
    trace: list


def train_joint_seq2seq(parallel, encoders, decoder, vocabs, pivot_lang, sched,
                        noise=None, log_every=1):
    """Alternate batch languages round-robin against one shared decoder.

    Pivot-language batches run the denoising reconstruction objective on the
    pivot side of the corpus; every other language runs translation into the
    pivot. The decoder parameter arrays are updated in place, so a single
    shared set persists across all steps.
    """
    order = sched.language_order or sorted(encoders)
    for lang in order:
        if lang not in encoders:
            raise ValueError(f"no encoder for scheduled language {lang!r}")
    noise = noise if noise is not None else NoiseParams(seed=sched.seed)
    noise_rng = Xorshift64Star(noise.seed ^ 0x5DEECE66D)
    rng = np.random.default_rng(sched.seed)
    opt = Adam(lr=sched.lr)

    params = dict(decoder.named_arrays())
    for lang, enc in encoders.items():
        params.update(enc.named_arrays(f"enc.{lang}."))

    pivot_sents = parallel.target_sentences()
    pairs = parallel.pairs
    trace = []
    for step in range(sched.steps):
        lang = order[step % len(order)]
        idx = rng.integers(0, len(pairs), size=sched.batch_size)
        if lang == pivot_lang:
            batch = [pivot_sents[i] for i in idx]
            graph = seq2seq_loss(batch, batch, encoders[lang], decoder,
                                 vocabs[lang], vocabs[pivot_lang],
                                 denoise=noise, noise_rng=noise_rng)
            objective, pair = "sdae", f"{lang}>{lang}"
        else:
            src = [pairs[i][0] for i in idx]
            tgt = [pairs[i][1] for i in idx]
            graph = seq2seq_loss(src, tgt, encoders[lang], decoder,
                                 vocabs[lang], vocabs[pivot_lang])
            objective, pair = "nmt", f"{lang}>{pivot_lang}"
        ad.backward(graph.loss)
        grads = {f"enc.{lang}.{k}": g for k, g in graph.enc_tensors.gradients().items()}
        grads.update(graph.dec_tensors.gradients())
        opt.apply(params, grads)
        if step % log_every == 0:
            trace.append((step, objective, pair, float(graph.loss.data)))
    return JointResult(encoders, decoder, trace)


# ---------------------------------------------------------------------------
# inference classifier
# ---------------------------------------------------------------------------

@dataclass
class ClassifierHead:
    w1: np.ndarray  # (4 * sentence_dim, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden, 3)
    b2: np.ndarray

    @property
    def n_classes(self):
        return self.w2.shape[1]

    def named_arrays(self, prefix="head."):
        return {f"{prefix}w1": self.w1, f"{prefix}b1": self.b1,
                f"{prefix}w2": self.w2, f"{prefix}b2": self.b2}


def new_head(sentence_dim, hidden=128, seed=0):
    rng = np.random.default_rng(seed)
    fan_in = 4 * sentence_dim
    w1 = rng.uniform(-1, 1, size=(fan_in, hidden)) / np.sqrt(fan_in)
    w2 = rng.uniform(-1, 1, size=(hidden, 3)) / np.sqrt(hidden)
    return ClassifierHead(w1, np.zeros(hidden), w2, np.zeros(3))


class HeadTensors:
    def __init__(self, head, trainable=True):
        mk = ad.leaf if trainable else ad.constant
        self.w1, self.b1 = mk(head.w1), mk(head.b1)
        self.w2, self.b2 = mk(head.w2), mk(head.b2)
        self.names = list(head.named_arrays())
        self.tensors = [self.w1, self.b1, self.w2, self.b2]

    def gradients(self):
        return {name: t.grad for name, t in zip(self.names, self.tensors) if t.grad is not None}


def pair_features(u, v):
    """[u; v; |u - v|; u*v] along the last axis."""
    return ad.concat([u, v, ad.absolute(ad.sub(u, v)), ad.mul(u, v)], axis=-1)


@dataclass
class InferSentLossGraph:
    loss: ad.Tensor
    logits: ad.Tensor
    premise_tensors: "EncoderTensors"
    hypothesis_tensors: "EncoderTensors"
    head_tensors: "HeadTensors"


def infersent_loss(premises, hypotheses, labels, enc_p, enc_h, head,
                   vocab_p, vocab_h, trainable=True):
    """Three-way cross-entropy of the shared classifier over a sentence-pair
    batch; the two sides may use different encoders (and share one when
    enc_p is enc_h).
    """
    labels = np.asarray(labels, dtype=np.int64)
    enc_tensors_p = EncoderTensors(enc_p, trainable)
    enc_tensors_h = enc_tensors_p if enc_h is enc_p else EncoderTensors(enc_h, trainable)
    head_tensors = HeadTensors(head, trainable)
    u = _encode_for(enc_tensors_p, enc_p, vocab_p, premises)
    v = _encode_for(enc_tensors_h, enc_h, vocab_h, hypotheses)
    logits = head_logits(u, v, head_tensors)
    loss = ad.scale(ad.softmax_cross_entropy_sum(logits, labels), 1.0 / len(labels))
    return InferSentLossGraph(loss, logits, enc_tensors_p, enc_tensors_h, head_tensors)


def head_logits(u, v, head_tensors):
    feats = pair_features(u, v)
    hidden = ad.tanh(ad.add(ad.matmul(feats, head_tensors.w1), head_tensors.b1))
    return ad.add(ad.matmul(hidden, head_tensors.w2), head_tensors.b2)


def infersent_classify(u, v, head):
    """Probability triple over {entailment, contradiction, neutral}."""
    u = np.asarray(getattr(u, "vector", u), dtype=np.float64)
    v = np.asarray(getattr(v, "vector", v), dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"embedding dimensions differ: {u.shape} vs {v.shape}")
    if 4 * u.shape[-1] != head.w1.shape[0]:
        raise ValueError(
            f"feature dim {4 * u.shape[-1]} does not match classifier input {head.w1.shape[0]}")
    logits = head_logits(ad.constant(u), ad.constant(v), HeadTensors(head, trainable=False))
    return ad.softmax_rows(logits.data)


@dataclass
class NLIDataset:
    premises: list
    hypotheses: list
    labels: list

    def __post_init__(self):
        if not (len(self.premises) == len(self.hypotheses) == len(self.labels)):
            raise ValueError("premises, hypotheses and labels must be index-aligned")
        bad = [l for l in self.labels if l not in (0, 1, 2)]
        if bad:
            raise ValueError(f"labels outside {{0,1,2}}: {sorted(set(bad))[:5]}")


@dataclass
class InferSentResult:
    encoders: dict
    head: ClassifierHead
    trace: list
    language_draws: list  # (premise_lang, hypothesis_lang) per step


def draw_language_pair(rng, langs):
    """Premise and hypothesis languages, independent and uniform."""
    return langs[int(rng.integers(len(langs)))], langs[int(rng.integers(len(langs)))]


def train_joint_infersent(datasets, encoders, head, vocabs, sched, log_every=1):
    """Premise and hypothesis languages are drawn independently and uniformly
    per batch; a single classifier head is shared across all languages.
    """
    langs = sorted(datasets)
    for lang in langs:
        if lang not in encoders:
            raise ValueError(f"no encoder for language {lang!r}")
    n = len(datasets[langs[0]].premises)
    rng = np.random.default_rng(sched.seed)
    opt = Adam(lr=sched.lr)
    params = dict(head.named_arrays())
    for lang, enc in encoders.items():
        params.update(enc.named_arrays(f"enc.{lang}."))

    trace, draws = [], []
    for step in range(sched.steps):
        p_lang, h_lang = draw_language_pair(rng, langs)
        draws.append((p_lang, h_lang))
        idx = rng.integers(0, n, size=sched.batch_size)
        labels = np.array([datasets[p_lang].labels[i] for i in idx])

        graph = infersent_loss([datasets[p_lang].premises[i] for i in idx],
                               [datasets[h_lang].hypotheses[i] for i in idx],
                               labels, encoders[p_lang], encoders[h_lang], head,
                               vocabs[p_lang], vocabs[h_lang])
        ad.backward(graph.loss)

        grads = dict(graph.head_tensors.gradients())
        grads.update({f"enc.{p_lang}.{k}": g
                      for k, g in graph.premise_tensors.gradients().items()})
        if h_lang != p_lang:
            grads.update({f"enc.{h_lang}.{k}": g
                          for k, g in graph.hypothesis_tensors.gradients().items()})
        opt.apply(params, grads)

        if step % log_every == 0:
            acc = float((graph.logits.data.argmax(axis=1) == labels).mean())
            trace.append((step, "infersent_loss", f"{p_lang}|{h_lang}", float(graph.loss.data)))
            trace.append((step, "infersent_acc", f"{p_lang}|{h_lang}", acc))
    return InferSentResult(encoders, head, trace, draws)


def _encode_for(enc_tensors, enc, vocab, sentences):
    ids, mask, _ = pad_batch([vocab.encode(s) for s in sentences])
    _check_ids(ids, enc.vocab_size)
    return encode_batch(ids, mask, enc_tensors)


def infersent_accuracy(datasets, encoders, head, vocabs, p_lang, h_lang, batch=64):
    """Classification accuracy over a full dataset for one language pairing."""
    data_p, data_h = datasets[p_lang], datasets[h_lang]
    head_tensors = HeadTensors(head, trainable=False)
    hits = 0
    for lo in range(0, len(data_p.premises), batch):
        sl = slice(lo, lo + batch)
        u = _encode_for(EncoderTensors(encoders[p_lang], trainable=False),
                        encoders[p_lang], vocabs[p_lang], data_p.premises[sl])
        v = _encode_for(EncoderTensors(encoders[h_lang], trainable=False),
                        encoders[h_lang], vocabs[h_lang], data_h.hypotheses[sl])
        logits = head_logits(u, v, head_tensors)
        hits += int((logits.data.argmax(axis=1) == np.array(data_p.labels[sl])).sum())
    return hits / len(data_p.premises)


# ---------------------------------------------------------------------------
# representation transfer
# ---------------------------------------------------------------------------

def transfer_l1_loss(sentences, target_embeddings, enc, vocab, trainable=True):
    """Mean (per pair) L1 distance between the encoder's embeddings of the
    sentences and fixed target embeddings. Returns (loss, encoder tensors).
    """
    enc_tensors = EncoderTensors(enc, trainable)
    ids, mask, _ = pad_batch([vocab.encode(s) for s in sentences])
    _check_ids(ids, enc.vocab_size)
    emb = encode_batch(ids, mask, enc_tensors)
    diff = ad.absolute(ad.sub(emb, ad.constant(target_embeddings)))
    return ad.scale(ad.tsum(diff), 1.0 / len(sentences)), enc_tensors


@dataclass
class TransferResult:
    new_encoder: EncoderParams
    trace: list


def train_transfer(parallel, pivot_enc, new_enc, src_vocab, tgt_vocab, sched,
                   log_every=1):
    """Regress the new encoder's embeddings onto the frozen pivot encoder's
    embeddings of the parallel translations (L1 loss, Adam).

    The pivot encoder is never touched; its embeddings of the target side are
    precomputed once.
    """
    if pivot_enc.output_dim != new_enc.output_dim:
        raise ValueError(
            f"embedding dimension mismatch: pivot {pivot_enc.output_dim} vs new {new_enc.output_dim}")
    targets = encode_sentences(parallel.target_sentences(), tgt_vocab, pivot_enc)
    rng = np.random.default_rng(sched.seed)
    opt = Adam(lr=sched.lr)
    params = dict(new_enc.named_arrays("enc."))

    trace = []
    src_sents = parallel.source_sentences()
    for step in range(sched.steps):
        idx = rng.integers(0, len(src_sents), size=sched.batch_size)
        loss, enc_tensors = transfer_l1_loss([src_sents[i] for i in idx], targets[idx],
                                             new_enc, src_vocab)
        ad.backward(loss)
        opt.apply(params, {f"enc.{k}": g for k, g in enc_tensors.gradients().items()})
        if step % log_every == 0:
            trace.append((step, "transfer_l1", f"{parallel.src_lang}>{parallel.tgt_lang}",
                          float(loss.data)))
    return TransferResult(new_enc, trace)
