"""Experiment configuration: flat key=value files plus command-line overrides."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields

FRAMEWORKS = ("joint_seq2seq", "joint_infersent", "transfer", "sentence_map", "word_dict_map")
ENCODER_KINDS = ("bilstm_maxpool", "sif")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    framework: str = "transfer"
    encoder: str = "bilstm_maxpool"
    languages: tuple = ("la", "lb")  # pivot first
    corpus: str = "cipher"           # "cipher" or "files"
    src_path: str = ""               # non-pivot side, one sentence per line
    tgt_path: str = ""               # pivot side
    dict_path: str = ""              # word dictionary for the word-mapping baseline
    embeddings_src: str = ""         # optional word2vec files to ingest
    embeddings_tgt: str = ""

    cipher_vocab: int = 50
    cipher_sentences: int = 1200
    cipher_min_len: int = 3
    cipher_max_len: int = 8
    nli_size: int = 300

    dim: int = 32
    hidden: int = 32
    lr: float = 1e-3
    batch: int = 16
    steps: int = 2000
    pivot_steps: int = 800
    infersent_hidden: int = 128
    sif_a: float = 1e-3
    p_del: float = 0.1
    p_swap: float = 0.1
    min_count: int = 1

    splits: tuple = (100, 200, 500, 1000, 2000)
    test_size: int = 200
    seed: int = 0
    out_dir: str = "out"

    def pivot_lang(self):
        return self.languages[0]

    def other_lang(self):
        return self.languages[1]

    def as_lines(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append(f"{f.name}={v}")
        return out

    def digest(self):
        return hashlib.sha256("\n".join(self.as_lines()).encode("utf-8")).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(name, raw):
    default = getattr(ExperimentConfig(), name)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if name == "splits":
            return tuple(int(x) for x in items)
        return tuple(items)
    return raw


def parse_config(text, overrides=()):
    """Parse key=value lines (# comments allowed) and apply `k=v` overrides."""
    values = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        values[key.strip()] = raw.strip()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        values[key.strip()] = raw.strip()

    cfg = ExperimentConfig()
    for key, raw in values.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            setattr(cfg, key, _coerce(key, raw))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    validate_config(cfg)
    return cfg


def load_config(path, overrides=()):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


def validate_config(cfg):
    if cfg.framework not in FRAMEWORKS:
        raise ConfigError(
            f"framework {cfg.framework!r} is not one of {', '.join(FRAMEWORKS)}")
    if cfg.encoder not in ENCODER_KINDS:
        raise ConfigError(f"encoder {cfg.encoder!r} is not one of {', '.join(ENCODER_KINDS)}")
    if cfg.framework in ("joint_seq2seq", "joint_infersent", "transfer") and cfg.encoder != "bilstm_maxpool":
        raise ConfigError(f"framework {cfg.framework!r} requires encoder bilstm_maxpool")
    if cfg.framework == "word_dict_map" and cfg.encoder != "sif":
        raise ConfigError("framework word_dict_map requires encoder sif")
    if len(cfg.languages) != 2:
        raise ConfigError(f"exactly two languages expected, got {cfg.languages}")
    if cfg.corpus not in ("cipher", "files"):
        raise ConfigError(f"corpus {cfg.corpus!r} must be 'cipher' or 'files'")
    if cfg.corpus == "files" and not (cfg.src_path and cfg.tgt_path):
        raise ConfigError("corpus=files requires src_path and tgt_path")
    if cfg.corpus == "files" and cfg.framework == "joint_infersent":
        raise ConfigError("joint_infersent runs on the synthetic corpus (corpus=cipher)")
    if not cfg.splits:
        raise ConfigError("at least one split size is required")
    if list(cfg.splits) != sorted(set(cfg.splits)):
        raise ConfigError(f"splits must be strictly increasing: {cfg.splits}")
    if cfg.test_size < 2:
        raise ConfigError("test_size must be at least 2")
    return cfg
