"""Command-line driver.

Subcommands: gen-corpus, train, transfer, fit-map, eval-retrieval, eval-cldc,
curve, neighbors, run. Exit codes: 0 success, 1 validation error, 2
runtime/numeric failure. Output paths are taken relative to --out-dir.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .autodiff import NonFiniteError
from .cipher import gen_cipher_corpus, gen_cldc_docs, write_corpus_files
from .config import ConfigError, load_config, parse_config
from .evaluation import (cldc_train_eval, neighbor_report, retrieval_accuracy,
                         write_cldc_csv, write_curve_csv, write_retrieval_csv)
from .linalg import SvdConvergenceError
from .mapping import apply_map, load_map
from .pipeline import Experiment, materialize, run_experiment
from .text import load_word2vec, make_splits


def _load_cfg(args):
    overrides = list(args.set or [])
    if args.out_dir:
        overrides.append(f"out_dir={args.out_dir}")
    if args.config:
        return load_config(args.config, overrides)
    return parse_config("", overrides)


def _final_embedders(cfg):
    data = materialize(cfg)
    exp = Experiment(cfg, data)
    embed_src, embed_tgt = exp.factory(data.train_corpus.pairs[:cfg.splits[-1]])
    return data, exp, embed_src, embed_tgt


def cmd_gen_corpus(args):
    cc = gen_cipher_corpus(args.vocab_size, args.sentences,
                           (args.min_len, args.max_len), args.seed,
                           nli_size=args.nli_size,
                           src_lang=args.src_lang, tgt_lang=args.tgt_lang)
    paths = write_corpus_files(args.out_dir, cc)
    for p in paths:
        print(p)
    return 0


def _expect_framework(cfg, allowed, command):
    if cfg.framework not in allowed:
        raise ConfigError(
            f"{command} expects framework in {allowed}, config says {cfg.framework!r}")


def cmd_train(args):
    cfg = _load_cfg(args)
    _expect_framework(cfg, ("joint_seq2seq", "joint_infersent"), "train")
    run_experiment(cfg)
    print(f"trained {cfg.framework}; artifacts in {cfg.out_dir}")
    return 0


def cmd_transfer(args):
    cfg = _load_cfg(args)
    _expect_framework(cfg, ("transfer",), "transfer")
    run_experiment(cfg)
    print(f"transfer training done; artifacts in {cfg.out_dir}")
    return 0


def cmd_fit_map(args):
    cfg = _load_cfg(args)
    _expect_framework(cfg, ("sentence_map", "word_dict_map"), "fit-map")
    run_experiment(cfg)
    print(f"alignment map fitted; artifacts in {cfg.out_dir}")
    return 0


def cmd_run(args):
    cfg = _load_cfg(args)
    produced = run_experiment(cfg)
    print(f"run complete; {len(produced)} files in {cfg.out_dir}")
    return 0


def cmd_curve(args):
    cfg = _load_cfg(args)
    from .evaluation import accuracy_curve

    data = materialize(cfg)
    exp = Experiment(cfg, data)
    plan = make_splits(len(data.train_corpus), cfg.splits)
    points = accuracy_curve(exp.factory, data.train_corpus, plan,
                            [(exp.other, exp.pivot), (exp.pivot, exp.other)],
                            data.test_pairs, model_tag=cfg.framework)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "curve.csv")
    write_curve_csv(path, points)
    print(path)
    return 0


def cmd_neighbors(args):
    cfg = _load_cfg(args)
    data, exp, embed_src, embed_tgt = _final_embedders(cfg)
    test_src = [s for s, _ in data.test_pairs]
    test_tgt = [t for _, t in data.test_pairs]
    x, y = embed_src(test_src), embed_tgt(test_tgt)
    queries = [(" ".join(test_src[i]), x[i]) for i in range(min(args.queries, len(test_src)))]
    pools = {exp.other: ([" ".join(s) for s in test_src], x),
             exp.pivot: ([" ".join(t) for t in test_tgt], y)}
    report = neighbor_report(queries, pools, k=args.k)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "neighbors.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report)
    print(report)
    return 0


def cmd_eval_retrieval(args):
    _, x = load_word2vec(args.src_emb)
    _, y = load_word2vec(args.tgt_emb)
    if args.map:
        m = load_map(args.map)
        x = apply_map(x, m, reverse=args.reverse_map)
    report = retrieval_accuracy(np.asarray(x), np.asarray(y), direction=args.direction)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        write_retrieval_csv(os.path.join(args.out_dir, "retrieval.csv"), [report])
    print(f"{report.direction} accuracy={report.accuracy:.4f} n={report.n_queries}")
    return 0


def cmd_eval_cldc(args):
    cfg = _load_cfg(args)
    data, exp, embed_src, embed_tgt = _final_embedders(cfg)
    if data.cipher is None:
        raise ConfigError("eval-cldc needs the synthetic corpus (corpus=cipher)")
    docs = gen_cldc_docs(data.cipher, args.docs, seed=cfg.seed + 40)
    split = args.docs // 2
    embedders = {exp.other: lambda s: embed_src([s])[0],
                 exp.pivot: lambda s: embed_tgt([s])[0]}
    reports = []
    for train_lang, test_lang in ((exp.pivot, exp.other), (exp.other, exp.pivot)):
        reports.append(cldc_train_eval(
            docs[train_lang][:split], docs[test_lang][split:], embedders,
            train_lang=train_lang, test_lang=test_lang, seed=cfg.seed + 41))
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "cldc.csv")
    write_cldc_csv(path, reports)
    for r in reports:
        print(f"{r.train_lang}->{r.test_lang} accuracy={r.accuracy:.4f}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="xlalign",
        description="Cross-lingual sentence embedding alignment toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_cfg_flags(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration key")
        p.add_argument("--out-dir", help="output directory (overrides config)")

    p = sub.add_parser("gen-corpus", help="generate a synthetic bilingual corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--vocab-size", type=int, default=50)
    p.add_argument("--sentences", type=int, default=1000)
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nli-size", type=int, default=0)
    p.add_argument("--src-lang", default="lb")
    p.add_argument("--tgt-lang", default="la")
    p.set_defaults(func=cmd_gen_corpus)

    for name, func, desc in (
            ("train", cmd_train, "train a joint model per the config"),
            ("transfer", cmd_transfer, "frozen-pivot transfer training"),
            ("fit-map", cmd_fit_map, "fit an orthogonal alignment map"),
            ("curve", cmd_curve, "retrieval accuracy vs parallel-corpus size"),
            ("run", cmd_run, "full train/align/evaluate pipeline")):
        p = sub.add_parser(name, help=desc)
        add_cfg_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("neighbors", help="nearest-neighbor inspection report")
    add_cfg_flags(p)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--queries", type=int, default=5)
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("eval-retrieval", help="retrieval accuracy from embedding dumps")
    p.add_argument("--src-emb", required=True)
    p.add_argument("--tgt-emb", required=True)
    p.add_argument("--map", help="alignment-map checkpoint applied to the source side")
    p.add_argument("--reverse-map", action="store_true")
    p.add_argument("--direction", default="src>tgt")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_eval_retrieval)

    p = sub.add_parser("eval-cldc", help="cross-lingual document classification")
    add_cfg_flags(p)
    p.add_argument("--docs", type=int, default=400)
    p.set_defaults(func=cmd_eval_cldc)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NonFiniteError, SvdConvergenceError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
