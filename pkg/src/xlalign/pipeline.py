"""Config-driven experiment pipelines: data, training, alignment, reports.

Seeds for the individual components are derived from the experiment seed by
fixed offsets, so a config + seed pins every random draw in the run.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .cipher import gen_cipher_corpus, write_corpus_files
from .config import ConfigError
from .encoders import (EncoderParams, LSTMParams, encode_sentences,
                       encode_sif_matrix, new_encoder)
from .evaluation import (accuracy_curve, neighbor_report, retrieval_accuracy,
                         write_curve_csv, write_retrieval_csv)
from .mapping import fit_orthogonal_map, fit_word_dictionary_map, save_map
from .objectives import (ClassifierHead, DecoderParams, TrainSchedule, new_decoder,
                         new_head, train_joint_infersent, train_joint_seq2seq,
                         train_transfer, write_trace)
from .text import (NoiseParams, ParallelCorpus, build_vocab, load_dictionary,
                   load_parallel, load_word2vec, make_splits)

SEED_PIVOT_ENC, SEED_NEW_ENC, SEED_DECODER, SEED_HEAD = 1, 2, 3, 4
SEED_PRETRAIN, SEED_TRAIN, SEED_INFERSENT = 10, 11, 12
SEED_TABLE_SRC, SEED_TABLE_TGT = 20, 21
SEED_NOISE = 30


@dataclass
class ExperimentData:
    train_corpus: ParallelCorpus
    test_pairs: list
    vocabs: dict           # lang -> Vocabulary
    cipher: object | None  # CipherCorpus when corpus=cipher
    tables: dict           # lang -> word-embedding matrix for SIF / ingest


def materialize(cfg):
    """Generate or load the corpus, hold out the test tail, build vocabularies."""
    pivot, other = cfg.pivot_lang(), cfg.other_lang()
    cc = None
    if cfg.corpus == "cipher":
        nli = cfg.nli_size if cfg.framework == "joint_infersent" else 0
        cc = gen_cipher_corpus(cfg.cipher_vocab, cfg.cipher_sentences + cfg.test_size,
                               (cfg.cipher_min_len, cfg.cipher_max_len), cfg.seed,
                               nli_size=nli, src_lang=other, tgt_lang=pivot)
        corpus = cc.corpus
    else:
        corpus = load_parallel(cfg.src_path, cfg.tgt_path, other, pivot)
    if len(corpus) <= cfg.test_size:
        raise ConfigError(f"corpus of {len(corpus)} pairs cannot spare {cfg.test_size} test pairs")
    train_pairs = corpus.pairs[:-cfg.test_size]
    test_pairs = corpus.pairs[-cfg.test_size:]
    train_corpus = ParallelCorpus(train_pairs, other, pivot)

    extra = {other: [], pivot: []}
    if cc is not None and cc.nli:
        for lang in (other, pivot):
            extra[lang] = cc.nli[lang].premises + cc.nli[lang].hypotheses
    vocabs = {
        other: build_vocab(train_corpus.source_sentences() + extra[other], cfg.min_count),
        pivot: build_vocab(train_corpus.target_sentences() + extra[pivot], cfg.min_count),
    }
    tables = {
        other: _word_table(cfg, vocabs[other], cfg.embeddings_src, cfg.seed + SEED_TABLE_SRC),
        pivot: _word_table(cfg, vocabs[pivot], cfg.embeddings_tgt, cfg.seed + SEED_TABLE_TGT),
    }
    return ExperimentData(train_corpus, test_pairs, vocabs, cc, tables)


def _word_table(cfg, vocab, path, seed):
    rng = np.random.default_rng(seed)
    table = rng.uniform(-1, 1, size=(len(vocab), cfg.dim)) / np.sqrt(cfg.dim)
    if path:
        words, matrix = load_word2vec(path)
        if matrix.shape[1] != cfg.dim:
            raise ConfigError(f"embedding file {path} has dim {matrix.shape[1]}, config says {cfg.dim}")
        for w, row in zip(words, matrix):
            wid = vocab.token_to_id.get(w)
            if wid is not None:
                table[wid] = row
    return table


def pretrain_sdae(sentences, vocab, cfg, lang, enc_seed):
    """Monolingual denoising pretraining (reconstruction of the clean input)."""
    enc = new_encoder(len(vocab), cfg.dim, cfg.hidden, lang, enc_seed)
    dec = new_decoder(len(vocab), cfg.dim, enc.output_dim, cfg.hidden, lang,
                      cfg.seed + SEED_DECODER)
    mono = ParallelCorpus([(s, s) for s in sentences], lang, lang)
    sched = TrainSchedule(cfg.batch, cfg.pivot_steps, cfg.lr, [lang], cfg.seed + SEED_PRETRAIN)
    noise = NoiseParams(cfg.p_del, cfg.p_swap, cfg.seed + SEED_NOISE)
    result = train_joint_seq2seq(mono, {lang: enc}, dec, {lang: vocab}, lang, sched, noise)
    return enc, result.trace


# ---------------------------------------------------------------------------
# per-framework embedder factories
# ---------------------------------------------------------------------------

class Experiment:
    """Builds (embed_src, embed_tgt) factories for the configured framework
    and stashes the artifacts of the largest split for saving.
    """

    def __init__(self, cfg, data):
        self.cfg = cfg
        self.data = data
        self.stash = {}
        self.pretrain_traces = {}
        self._embedders = {}  # split size -> (embed_src, embed_tgt)
        pivot, other = cfg.pivot_lang(), cfg.other_lang()
        self.pivot, self.other = pivot, other

        if cfg.framework == "transfer":
            self.pivot_enc, trace = pretrain_sdae(
                data.train_corpus.target_sentences(), data.vocabs[pivot], cfg, pivot,
                cfg.seed + SEED_PIVOT_ENC)
            self.pretrain_traces[pivot] = trace
        elif cfg.framework == "sentence_map" and cfg.encoder == "bilstm_maxpool":
            self.mono_encs = {}
            for lang, sentences, seed in (
                    (pivot, data.train_corpus.target_sentences(), cfg.seed + SEED_PIVOT_ENC),
                    (other, data.train_corpus.source_sentences(), cfg.seed + SEED_NEW_ENC)):
                self.mono_encs[lang], trace = pretrain_sdae(
                    sentences, data.vocabs[lang], cfg, lang, seed)
                self.pretrain_traces[lang] = trace
        elif cfg.framework == "joint_infersent":
            self._train_infersent()
        elif cfg.framework == "word_dict_map":
            self._fit_word_map()

    # -- constant-per-split models -------------------------------------------------

    def _train_infersent(self):
        cfg, data = self.cfg, self.data
        encoders = {
            self.pivot: new_encoder(len(data.vocabs[self.pivot]), cfg.dim, cfg.hidden,
                                    self.pivot, cfg.seed + SEED_PIVOT_ENC),
            self.other: new_encoder(len(data.vocabs[self.other]), cfg.dim, cfg.hidden,
                                    self.other, cfg.seed + SEED_NEW_ENC),
        }
        head = new_head(2 * cfg.hidden, cfg.infersent_hidden, cfg.seed + SEED_HEAD)
        sched = TrainSchedule(cfg.batch, cfg.steps, cfg.lr, [], cfg.seed + SEED_INFERSENT)
        result = train_joint_infersent(data.cipher.nli, encoders, head, data.vocabs, sched)
        self.stash["infersent"] = result

    def _fit_word_map(self):
        cfg, data = self.cfg, self.data
        if cfg.dict_path:
            pairs = load_dictionary(cfg.dict_path)
        elif data.cipher is not None:
            pairs = [(c, b) for b, c in sorted(data.cipher.cipher.items())]
        else:
            raise ConfigError("word_dict_map needs dict_path when corpus=files")
        self.word_map = fit_word_dictionary_map(
            pairs,
            data.vocabs[self.other].id_to_token, data.tables[self.other],
            data.vocabs[self.pivot].id_to_token, data.tables[self.pivot],
            src_space=f"words:{self.other}", tgt_space=f"words:{self.pivot}")
        self.stash["map"] = self.word_map

    # -- factory -------------------------------------------------------------------

    def factory(self, train_pairs):
        size = len(train_pairs)
        if size not in self._embedders:
            self._embedders[size] = self._build(train_pairs)
        return self._embedders[size]

    def _build(self, train_pairs):
        cfg, data = self.cfg, self.data
        size = len(train_pairs)
        split = ParallelCorpus(list(train_pairs), self.other, self.pivot)
        sched = TrainSchedule(cfg.batch, cfg.steps, cfg.lr, [], cfg.seed + SEED_TRAIN)

        if cfg.framework == "transfer":
            new_enc = new_encoder(len(data.vocabs[self.other]), cfg.dim, cfg.hidden,
                                  self.other, cfg.seed + SEED_NEW_ENC)
            result = train_transfer(split, self.pivot_enc, new_enc,
                                    data.vocabs[self.other], data.vocabs[self.pivot], sched)
            self.stash[size] = result
            return (self._bilstm_fn(new_enc, self.other),
                    self._bilstm_fn(self.pivot_enc, self.pivot))

        if cfg.framework == "joint_seq2seq":
            encoders = {
                self.pivot: new_encoder(len(data.vocabs[self.pivot]), cfg.dim, cfg.hidden,
                                        self.pivot, cfg.seed + SEED_PIVOT_ENC),
                self.other: new_encoder(len(data.vocabs[self.other]), cfg.dim, cfg.hidden,
                                        self.other, cfg.seed + SEED_NEW_ENC),
            }
            decoder = new_decoder(len(data.vocabs[self.pivot]), cfg.dim, 2 * cfg.hidden,
                                  cfg.hidden, self.pivot, cfg.seed + SEED_DECODER)
            sched.language_order = [self.pivot, self.other]
            noise = NoiseParams(cfg.p_del, cfg.p_swap, cfg.seed + SEED_NOISE)
            result = train_joint_seq2seq(split, encoders, decoder, data.vocabs,
                                         self.pivot, sched, noise)
            self.stash[size] = result
            return (self._bilstm_fn(encoders[self.other], self.other),
                    self._bilstm_fn(encoders[self.pivot], self.pivot))

        if cfg.framework == "joint_infersent":
            result = self.stash["infersent"]
            return (self._bilstm_fn(result.encoders[self.other], self.other),
                    self._bilstm_fn(result.encoders[self.pivot], self.pivot))

        if cfg.framework == "sentence_map":
            embed_src, embed_tgt = self._mono_embedders()
            m = fit_orthogonal_map(embed_src(split.source_sentences()),
                                   embed_tgt(split.target_sentences()),
                                   src_space=self.other, tgt_space=self.pivot)
            self.stash[size] = m
            return (lambda sentences: embed_src(sentences) @ m.w), embed_tgt

        if cfg.framework == "word_dict_map":
            embed_src, embed_tgt = self._mono_embedders()
            m = self.word_map
            return (lambda sentences: embed_src(sentences) @ m.w), embed_tgt

        raise ConfigError(f"framework {cfg.framework!r} has no pipeline")

    def _bilstm_fn(self, enc, lang):
        vocab = self.data.vocabs[lang]
        return lambda sentences: encode_sentences(sentences, vocab, enc)

    def _mono_embedders(self):
        cfg, data = self.cfg, self.data
        if cfg.encoder == "sif":
            def sif_fn(lang):
                table, vocab = data.tables[lang], data.vocabs[lang]
                return lambda sentences: encode_sif_matrix(sentences, table, vocab, cfg.sif_a)
            return sif_fn(self.other), sif_fn(self.pivot)
        return (self._bilstm_fn(self.mono_encs[self.other], self.other),
                self._bilstm_fn(self.mono_encs[self.pivot], self.pivot))


# ---------------------------------------------------------------------------
# checkpoint helpers for composite parameter sets
# ---------------------------------------------------------------------------

def save_encoder(path, enc):
    save_checkpoint(path, enc.named_arrays("enc."), comments=[f"lang={enc.lang}"])


def load_encoder(path, lang=None):
    tensors, comments = load_checkpoint(path)
    fields = dict(item.split("=", 1) for line in comments for item in line.split())
    return EncoderParams(
        tensors["enc.emb"],
        LSTMParams(tensors["enc.fwd.w_in"], tensors["enc.fwd.w_rec"], tensors["enc.fwd.bias"]),
        LSTMParams(tensors["enc.bwd.w_in"], tensors["enc.bwd.w_rec"], tensors["enc.bwd.bias"]),
        lang or fields.get("lang", "xx"))


def save_decoder(path, dec):
    save_checkpoint(path, dec.named_arrays("dec."), comments=[f"lang={dec.lang}"])


def load_decoder(path):
    tensors, comments = load_checkpoint(path)
    fields = dict(item.split("=", 1) for line in comments for item in line.split())
    return DecoderParams(
        tensors["dec.emb"],
        LSTMParams(tensors["dec.cell.w_in"], tensors["dec.cell.w_rec"], tensors["dec.cell.bias"]),
        tensors["dec.w_out"], tensors["dec.b_out"], fields.get("lang", "xx"))


def save_head(path, head):
    save_checkpoint(path, head.named_arrays("head."))


def load_head(path):
    tensors, _ = load_checkpoint(path)
    return ClassifierHead(tensors["head.w1"], tensors["head.b1"],
                          tensors["head.w2"], tensors["head.b2"])


# ---------------------------------------------------------------------------
# full experiment run
# ---------------------------------------------------------------------------

def run_experiment(cfg):
    """train -> align -> evaluate; writes the artifacts and the manifest.

    Returns the list of files written (relative to cfg.out_dir).
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    produced = []

    def out(name):
        produced.append(name)
        return os.path.join(cfg.out_dir, name)

    data = materialize(cfg)
    if data.cipher is not None:
        for path in write_corpus_files(os.path.join(cfg.out_dir, "corpus"), data.cipher):
            produced.append(os.path.relpath(path, cfg.out_dir))

    exp = Experiment(cfg, data)
    plan = make_splits(len(data.train_corpus), cfg.splits)
    directions = [(exp.other, exp.pivot), (exp.pivot, exp.other)]
    points = accuracy_curve(exp.factory, data.train_corpus, plan, directions,
                            data.test_pairs, model_tag=cfg.framework)
    write_curve_csv(out("curve.csv"), points)

    largest = cfg.splits[-1]
    embed_src, embed_tgt = exp.factory(data.train_corpus.pairs[:largest])
    test_src = [s for s, _ in data.test_pairs]
    test_tgt = [t for _, t in data.test_pairs]
    x, y = embed_src(test_src), embed_tgt(test_tgt)
    reports = [retrieval_accuracy(x, y, f"{exp.other}>{exp.pivot}"),
               retrieval_accuracy(y, x, f"{exp.pivot}>{exp.other}")]
    write_retrieval_csv(out("retrieval.csv"), reports)

    queries = [(" ".join(test_src[i]), x[i]) for i in range(min(5, len(test_src)))]
    pools = {exp.other: ([" ".join(s) for s in test_src], x),
             exp.pivot: ([" ".join(t) for t in test_tgt], y)}
    with open(out("neighbors.txt"), "w", encoding="utf-8") as fh:
        fh.write(neighbor_report(queries, pools))

    _save_artifacts(cfg, exp, out, largest)

    produced.append("manifest.txt")
    with open(os.path.join(cfg.out_dir, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write("XLALIGN-MANIFEST 1\n")
        fh.write(f"config_hash={cfg.digest()}\n")
        for line in cfg.as_lines():
            fh.write(line + "\n")
        fh.write("# files\n")
        for name in produced:
            fh.write(name + "\n")
    return produced


def _save_artifacts(cfg, exp, out, largest):
    for lang, trace in exp.pretrain_traces.items():
        write_trace(out(f"pretrain.{lang}.csv"), trace)
    if cfg.framework == "transfer":
        result = exp.stash[largest]
        save_encoder(out(f"encoder.{exp.pivot}.ckpt"), exp.pivot_enc)
        save_encoder(out(f"encoder.{exp.other}.ckpt"), result.new_encoder)
        write_trace(out("train.csv"), result.trace)
    elif cfg.framework == "joint_seq2seq":
        result = exp.stash[largest]
        for lang, enc in sorted(result.encoders.items()):
            save_encoder(out(f"encoder.{lang}.ckpt"), enc)
        save_decoder(out("decoder.ckpt"), result.decoder)
        write_trace(out("train.csv"), result.trace)
    elif cfg.framework == "joint_infersent":
        result = exp.stash["infersent"]
        for lang, enc in sorted(result.encoders.items()):
            save_encoder(out(f"encoder.{lang}.ckpt"), enc)
        save_head(out("head.ckpt"), result.head)
        write_trace(out("train.csv"), result.trace)
    elif cfg.framework == "sentence_map":
        save_map(out("map.ckpt"), exp.stash[largest])
        if cfg.encoder == "bilstm_maxpool":
            for lang, enc in sorted(exp.mono_encs.items()):
                save_encoder(out(f"encoder.{lang}.ckpt"), enc)
    elif cfg.framework == "word_dict_map":
        save_map(out("map.ckpt"), exp.stash["map"])
