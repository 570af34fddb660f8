"""Evaluation harness: translation retrieval, neighbor reports, CLDC, curves."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .optim import Adam


def _normalize_rows(x, side):
    x = np.asarray(x, dtype=np.float64)
    norms = np.sqrt((x * x).sum(axis=1))
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        raise ValueError(f"zero-norm embedding at {side} row {int(bad[0])}: cosine undefined")
    return x / norms[:, None]


@dataclass
class RetrievalReport:
    direction: str
    accuracy: float
    n_queries: int
    gold_ranks: list | None = None  # 1-based rank of the gold translation per query


def retrieval_accuracy(src, tgt, direction="src>tgt", store_ranks=False):
    """Fraction of source rows whose cosine-nearest target row is row i.

    Ties break toward the lowest index. Row i of src must be the translation
    of row i of tgt.
    """
    xs = _normalize_rows(src, "source")
    ys = _normalize_rows(tgt, "target")
    if xs.shape != ys.shape:
        raise ValueError(f"paired matrices must share shape, got {xs.shape} and {ys.shape}")
    if xs.shape[0] < 2:
        raise ValueError("retrieval needs at least two pairs")
    sims = xs @ ys.T
    best = sims.argmax(axis=1)
    hits = int((best == np.arange(xs.shape[0])).sum())
    ranks = None
    if store_ranks:
        gold = sims[np.arange(len(sims)), np.arange(len(sims))]
        # rank = 1 + number of strictly-better rows + earlier equal rows
        ranks = []
        for i, row in enumerate(sims):
            better = int((row > gold[i]).sum())
            equal_before = int((row[:i] == gold[i]).sum())
            ranks.append(1 + better + equal_before)
    return RetrievalReport(direction, hits / xs.shape[0], xs.shape[0], ranks)


def nearest_neighbors(query, pool, texts, k):
    """Top-k pool entries by cosine, descending, lowest index first on ties.

    Returns [(text, cosine), ...].
    """
    q = np.asarray(getattr(query, "vector", query), dtype=np.float64)
    qn = np.linalg.norm(q)
    if qn == 0.0:
        raise ValueError("zero-norm query embedding: cosine undefined")
    pool_n = _normalize_rows(pool, "pool")
    if k > pool_n.shape[0]:
        raise ValueError(f"k={k} exceeds pool size {pool_n.shape[0]}")
    sims = pool_n @ (q / qn)
    # stable sort on negated sims keeps the lowest index first among ties
    order = np.argsort(-sims, kind="stable")[:k]
    return [(texts[i], float(sims[i])) for i in order]


def neighbor_report(queries, pools, k=3):
    """Plain-text report: each query followed by its top-k neighbors per pool.

    queries: [(label, vector), ...]; pools: {name: (texts, matrix)}.
    """
    lines = []
    for label, vec in queries:
        lines.append(f"Query: {label}")
        for name in sorted(pools):
            texts, matrix = pools[name]
            lines.append(f"  [{name}]")
            for text, cos in nearest_neighbors(vec, matrix, texts, k):
                lines.append(f"    {cos:+.4f}  {text}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# cross-lingual document classification
# ---------------------------------------------------------------------------

N_CLDC_CLASSES = 4


@dataclass
class CLDCReport:
    train_lang: str
    test_lang: str
    accuracy: float
    n_classes: int = N_CLDC_CLASSES


@dataclass
class MLPClassifier:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def predict(self, x):
        hidden = np.tanh(np.asarray(x) @ self.w1 + self.b1)
        return (hidden @ self.w2 + self.b2).argmax(axis=1)


def train_mlp(x, y, n_classes, hidden=64, steps=300, lr=1e-3, seed=0):
    """Full-batch Adam on a one-hidden-layer tanh MLP."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    d = x.shape[1]
    clf = MLPClassifier(
        rng.uniform(-1, 1, size=(d, hidden)) / np.sqrt(d), np.zeros(hidden),
        rng.uniform(-1, 1, size=(hidden, n_classes)) / np.sqrt(hidden), np.zeros(n_classes))
    params = {"w1": clf.w1, "b1": clf.b1, "w2": clf.w2, "b2": clf.b2}
    opt = Adam(lr=lr)
    xc = ad.constant(x)
    for _ in range(steps):
        leaves = {name: ad.leaf(arr) for name, arr in params.items()}
        h = ad.tanh(ad.add(ad.matmul(xc, leaves["w1"]), leaves["b1"]))
        logits = ad.add(ad.matmul(h, leaves["w2"]), leaves["b2"])
        loss = ad.scale(ad.softmax_cross_entropy_sum(logits, y), 1.0 / len(y))
        ad.backward(loss)
        opt.apply(params, {name: t.grad for name, t in leaves.items()})
    return clf


def mean_document_embedding(doc, embedder):
    """Document vector = unweighted mean of its sentence embeddings."""
    vecs = [np.asarray(getattr(embedder(s), "vector", embedder(s)), dtype=np.float64)
            for s in doc]
    return np.mean(vecs, axis=0)


def cldc_train_eval(train_docs, test_docs, embedder, train_lang="train", test_lang="test",
                    hidden=64, steps=300, lr=1e-3, seed=0):
    """Train an MLP on documents of one language, test on another.

    train_docs/test_docs: [(doc, label)] with doc a list of sentences and
    labels in range(4). `embedder` maps one sentence to a vector in the shared
    cross-lingual space; pass {lang: callable} when the two sides need
    different encoders.
    """
    train_y = np.array([label for _, label in train_docs])
    present = set(train_y.tolist())
    missing = set(range(N_CLDC_CLASSES)) - present
    if missing:
        raise ValueError(f"classes absent from training set: {sorted(missing)}")
    bad = [l for _, l in list(train_docs) + list(test_docs) if not 0 <= l < N_CLDC_CLASSES]
    if bad:
        raise ValueError(f"labels outside range({N_CLDC_CLASSES}): {sorted(set(bad))[:5]}")

    embed_train = embedder[train_lang] if isinstance(embedder, dict) else embedder
    embed_test = embedder[test_lang] if isinstance(embedder, dict) else embedder
    train_x = np.stack([mean_document_embedding(doc, embed_train) for doc, _ in train_docs])
    test_x = np.stack([mean_document_embedding(doc, embed_test) for doc, _ in test_docs])
    test_y = np.array([label for _, label in test_docs])
    clf = train_mlp(train_x, train_y, N_CLDC_CLASSES, hidden=hidden, steps=steps, lr=lr, seed=seed)
    accuracy = float((clf.predict(test_x) == test_y).mean())
    return CLDCReport(train_lang, test_lang, accuracy)


# ---------------------------------------------------------------------------
# accuracy-vs-corpus-size curves
# ---------------------------------------------------------------------------

@dataclass
class CurvePoint:
    size: int
    model: str
    direction: str
    accuracy: float


def worker_count():
    """Worker cap from XLALIGN_THREADS; defaults to 1 for bit-reproducibility."""
    try:
        return max(1, int(os.environ.get("XLALIGN_THREADS", "1")))
    except ValueError:
        return 1


def accuracy_curve(model_factory, corpus, plan, directions, test_pairs, model_tag="model"):
    """Refit per split size and evaluate each direction on held-out pairs.

    model_factory(train_pairs) must return (embed_src, embed_tgt) callables
    that map a list of sentences into one shared space. The held-out pairs
    must be disjoint from every training split (checked by content).
    """
    largest = set(map(_pair_key, corpus.pairs[:plan.sizes[-1]]))
    overlap = [p for p in test_pairs if _pair_key(p) in largest]
    if overlap:
        raise ValueError(
            f"test set overlaps a training split ({len(overlap)} shared pairs); "
            "hold the evaluation pairs out of every split")

    test_src = [s for s, _ in test_pairs]
    test_tgt = [t for _, t in test_pairs]

    def cell(k):
        size = plan.sizes[k]
        embed_src, embed_tgt = model_factory(corpus.pairs[:size])
        x = embed_src(test_src)
        y = embed_tgt(test_tgt)
        points = []
        for q_lang, p_lang in directions:
            a, b = _orient(x, y, corpus, q_lang, p_lang)
            rep = retrieval_accuracy(a, b, direction=f"{q_lang}>{p_lang}")
            points.append(CurvePoint(size, model_tag, rep.direction, rep.accuracy))
        return points

    n_workers = worker_count()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(cell, range(len(plan.sizes))))
    else:
        results = [cell(k) for k in range(len(plan.sizes))]
    return [p for cell_points in results for p in cell_points]


def _pair_key(pair):
    s, t = pair
    return (tuple(s), tuple(t))


def _orient(x, y, corpus, query_lang, pool_lang):
    if (query_lang, pool_lang) == (corpus.src_lang, corpus.tgt_lang):
        return x, y
    if (query_lang, pool_lang) == (corpus.tgt_lang, corpus.src_lang):
        return y, x
    raise ValueError(f"direction {query_lang}>{pool_lang} does not match corpus "
                     f"languages {corpus.src_lang}/{corpus.tgt_lang}")


def write_curve_csv(path, points):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("size,model,direction,accuracy\n")
        for p in points:
            fh.write(f"{p.size},{p.model},{p.direction},{p.accuracy!r}\n")


def write_cldc_csv(path, reports):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("train_lang,test_lang,accuracy\n")
        for r in reports:
            fh.write(f"{r.train_lang},{r.test_lang},{r.accuracy!r}\n")


def write_retrieval_csv(path, reports):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("direction,accuracy,n_queries\n")
        for r in reports:
            fh.write(f"{r.direction},{r.accuracy!r},{r.n_queries}\n")
