import numpy as np
import pytest

from xlalign.cli import main
from xlalign.encoders import dump_sentence_embeddings
from xlalign.mapping import AlignmentMap, save_map

TOY_TRANSFER = """
framework=transfer
cipher_vocab=30
cipher_sentences=200
dim=10
hidden=10
steps=60
pivot_steps=60
batch=8
splits=40,80
test_size=50
seed=3
"""


@pytest.fixture
def toy_cfg(tmp_path):
    path = tmp_path / "transfer_toy.cfg"
    path.write_text(TOY_TRANSFER)
    return str(path)


def test_gen_corpus_writes_files(tmp_path, capsys):
    out = tmp_path / "corpus"
    assert main(["gen-corpus", "--out-dir", str(out), "--vocab-size", "20",
                 "--sentences", "25", "--nli-size", "9"]) == 0
    assert (out / "la.txt").exists() and (out / "lb.txt").exists()
    assert len((out / "la.txt").read_text().splitlines()) == 25
    assert (out / "dict.la-lb.txt").exists()
    assert (out / "nli.labels.txt").exists()


def test_run_smoke_produces_curve_csv(toy_cfg, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", toy_cfg, "--out-dir", str(out)]) == 0
    assert (out / "curve.csv").exists()
    assert (out / "manifest.txt").exists()
    lines = (out / "curve.csv").read_text().splitlines()
    assert lines[0] == "size,model,direction,accuracy"
    assert len(lines) == 1 + 2 * 2  # two splits x two directions
    manifest = (out / "manifest.txt").read_text().splitlines()
    listed = set(manifest[manifest.index("# files") + 1:])
    for name in ("curve.csv", "retrieval.csv", "neighbors.txt", "manifest.txt"):
        assert name in listed


def test_unknown_framework_is_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("framework=foo\n")
    assert main(["run", "--config", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "framework" in err and "foo" in err


def test_missing_config_file_is_validation_error(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_missing_corpus_file_is_validation_error(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("corpus=files\nsrc_path=/nonexistent/a\ntgt_path=/nonexistent/b\n")
    assert main(["run", "--config", str(cfg)]) == 1


def test_corpus_files_round_trip(tmp_path):
    corpus_dir = tmp_path / "corpus"
    assert main(["gen-corpus", "--out-dir", str(corpus_dir), "--vocab-size", "30",
                 "--sentences", "150", "--seed", "5"]) == 0
    cfg = tmp_path / "files.cfg"
    cfg.write_text(
        "framework=sentence_map\nencoder=sif\ncorpus=files\n"
        f"src_path={corpus_dir / 'lb.txt'}\ntgt_path={corpus_dir / 'la.txt'}\n"
        "dim=12\nsplits=40,80\ntest_size=40\nseed=2\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out-dir", str(out)]) == 0
    assert (out / "map.ckpt").exists()


def test_train_rejects_wrong_framework(toy_cfg, capsys):
    assert main(["train", "--config", toy_cfg]) == 1
    assert "train expects framework" in capsys.readouterr().err


def test_curve_subcommand(toy_cfg, tmp_path, capsys):
    out = tmp_path / "curve_out"
    assert main(["curve", "--config", toy_cfg, "--out-dir", str(out),
                 "--set", "steps=30", "--set", "pivot_steps=30"]) == 0
    assert (out / "curve.csv").exists()


def test_neighbors_subcommand(toy_cfg, tmp_path, capsys):
    out = tmp_path / "nn_out"
    assert main(["neighbors", "--config", toy_cfg, "--out-dir", str(out),
                 "--set", "steps=30", "--set", "pivot_steps=30", "-k", "2"]) == 0
    text = (out / "neighbors.txt").read_text()
    assert text.startswith("Query:")
    assert "[la]" in text and "[lb]" in text


def test_eval_retrieval_from_dumps(tmp_path, capsys, rng):
    x = rng.normal(size=(12, 6))
    w, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    src, tgt = tmp_path / "src.vec", tmp_path / "tgt.vec"
    dump_sentence_embeddings(src, x)
    dump_sentence_embeddings(tgt, x @ w)
    map_path = tmp_path / "map.ckpt"
    save_map(map_path, AlignmentMap(w, "lb", "la", 12, 0.0))
    out = tmp_path / "out"
    assert main(["eval-retrieval", "--src-emb", str(src), "--tgt-emb", str(tgt),
                 "--map", str(map_path), "--out-dir", str(out),
                 "--direction", "lb>la"]) == 0
    assert "accuracy=1.0000" in capsys.readouterr().out
    assert (out / "retrieval.csv").read_text().splitlines()[1].startswith("lb>la,1.0")


def test_eval_cldc_subcommand(tmp_path, capsys):
    cfg = tmp_path / "map.cfg"
    cfg.write_text("framework=sentence_map\nencoder=sif\ncipher_vocab=40\n"
                   "cipher_sentences=300\ndim=16\nsplits=100,200\ntest_size=60\nseed=4\n")
    out = tmp_path / "out"
    assert main(["eval-cldc", "--config", str(cfg), "--out-dir", str(out),
                 "--docs", "80"]) == 0
    lines = (out / "cldc.csv").read_text().splitlines()
    assert lines[0] == "train_lang,test_lang,accuracy"
    assert len(lines) == 3


def test_numeric_failure_exits_2(tmp_path, capsys):
    x = np.zeros((4, 3))  # zero-norm rows make the cosine undefined
    src, tgt = tmp_path / "src.vec", tmp_path / "tgt.vec"
    dump_sentence_embeddings(src, x)
    dump_sentence_embeddings(tgt, x)
    assert main(["eval-retrieval", "--src-emb", str(src), "--tgt-emb", str(tgt)]) == 2
    assert "zero-norm" in capsys.readouterr().err


def test_xlalign_threads_env_caps_workers(monkeypatch):
    from xlalign.evaluation import worker_count

    monkeypatch.setenv("XLALIGN_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("XLALIGN_THREADS", "junk")
    assert worker_count() == 1
    monkeypatch.delenv("XLALIGN_THREADS")
    assert worker_count() == 1
