"""Config-driven orchestration of the full translation pipeline.

Stages run in dataflow order (filter, truecase/BPE, scorer training,
translator training, back/cycle translation, corpus construction, the model
zoo, n-best decoding, reranking, greedy selection plus combination,
post-processing, evaluation), communicate through files under the work
directory, and record a manifest of inputs, outputs, digests, seeds, and item
counts. A stage whose recorded inputs, config, and outputs all match on disk
is skipped on resume. Stage wall times go to a separate timings file so
manifests stay byte-identical across reruns with the same seeds.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

from . import augment, combine, dataselect, metrics, postprocess, rerank, subword, toymt
from .align import ibm1_train, ibm2_train, load_distortion, load_lexicon, save_distortion, save_lexicon
from .augment import CycleConfig, MixturePlan
from .corpus import (
    Origin,
    Sentence,
    SentencePair,
    TruecaseModel,
    apply_truecase,
    read_pairs_jsonl,
    read_parallel_tsv,
    read_text_corpus,
    tokenize,
    train_truecaser,
    write_pairs_jsonl,
    write_pairs_tsv,
    write_text_corpus,
)
from .dataselect import SelectionConfig
from .ngram_lm import lm_train, load_lm, save_lm
from .rerank import MiraConfig, extract_features, mira_train, rerank_apply, save_weights
from .subword import BpeModel, bpe_apply, bpe_learn, bpe_reverse
from .toymt import Direction, Orientation, decode_corpus, load_translator, save_translator, toy_train

logger = logging.getLogger(__name__)

WORKERS_ENV = "MTKIT_WORKERS"

_LADDER_STAGES = (
    "baseline",
    "+synthetic",
    "+cycle translation",
    "+reranking",
    "+combination",
    "+postprocessing",
)

_CONFIG_KEYS = {
    "data.parallel": ("parallel", str),
    "data.mono": ("mono", str),
    "data.dev": ("dev", str),
    "data.test": ("test", str),
    "data.src_lang": ("src_lang", str),
    "data.tgt_lang": ("tgt_lang", str),
    "workdir": ("workdir", str),
    "seed": ("seed", int),
    "workers": ("workers", int),
    "select.min_len": ("select_min_len", int),
    "select.max_len": ("select_max_len", int),
    "select.optimal_ratio": ("select_optimal_ratio", float),
    "select.ratio_max_deviation": ("select_ratio_max_deviation", float),
    "select.illegal_char_classes": ("select_illegal", str),
    "select.lm_cut": ("select_lm_cut", float),
    "select.align_cut": ("select_align_cut", float),
    "select.t2s_cut": ("select_t2s_cut", float),
    "select.mono_lm_cut": ("select_mono_lm_cut", float),
    "select.mono_dedup": ("select_mono_dedup", bool),
    "bpe.ops": ("bpe_ops", int),
    "lm.order": ("lm_order", int),
    "lm.k": ("lm_k", float),
    "em.ibm1_iters": ("em_ibm1_iters", int),
    "em.ibm2_iters": ("em_ibm2_iters", int),
    "decode.beam": ("decode_beam", int),
    "decode.nbest": ("decode_nbest", int),
    "toy.weight_lex": ("toy_weight_lex", float),
    "toy.weight_lm": ("toy_weight_lm", float),
    "toy.weight_len": ("toy_weight_len", float),
    "cycle.ratio": ("cycle_ratio", float),
    "construct.num_small": ("construct_num_small", int),
    "construct.repeat": ("construct_repeat", int),
    "mira.c": ("mira_c", float),
    "mira.epochs": ("mira_epochs", int),
}


@dataclass(frozen=True)
class PipelineConfig:
    parallel: str = ""
    mono: str = ""
    dev: str = ""
    test: str = ""
    src_lang: str = "src"
    tgt_lang: str = "tgt"
    workdir: str = "run"
    seed: int = 13
    workers: int = 0  # 0 -> MTKIT_WORKERS env var, else 1

    select_min_len: int = 3
    select_max_len: int = 80
    select_optimal_ratio: float = 0.76
    select_ratio_max_deviation: float = 0.5
    select_illegal: str = "control,replacement"
    select_lm_cut: float = 0.0
    select_align_cut: float = 0.0
    select_t2s_cut: float = 0.0
    select_mono_lm_cut: float = 0.0
    select_mono_dedup: bool = True

    bpe_ops: int = 500
    lm_order: int = 3
    lm_k: float = 0.1
    em_ibm1_iters: int = 5
    em_ibm2_iters: int = 5
    decode_beam: int = 10
    decode_nbest: int = 10
    toy_weight_lex: float = 1.0
    toy_weight_lm: float = 0.5
    toy_weight_len: float = 0.1
    cycle_ratio: float = 0.5
    construct_num_small: int = 8
    construct_repeat: int = 13
    mira_c: float = 0.01
    mira_epochs: int = 10

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "PipelineConfig":
        kwargs = {}
        for key, raw in mapping.items():
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            name, typ = _CONFIG_KEYS[key]
            if typ is bool:
                kwargs[name] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                kwargs[name] = typ(raw.strip())
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        mapping = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, _, value = line.partition("=")
                mapping[key.strip()] = value
        return cls.from_mapping(mapping)

    def canonical(self) -> str:
        """Deterministic dump used for the config digest; excludes workdir so
        manifests agree across work directories."""
        by_field = {name: key for key, (name, _t) in _CONFIG_KEYS.items()}
        lines = []
        for f in fields(self):
            if f.name == "workdir":
                continue
            lines.append(f"{by_field[f.name]}={getattr(self, f.name)!r}")
        return "\n".join(sorted(lines)) + "\n"

    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        env = os.environ.get(WORKERS_ENV, "")
        return int(env) if env.isdigit() and int(env) > 0 else 1

    def selection(self, *, mono: bool = False) -> SelectionConfig:
        classes = frozenset(x.strip() for x in self.select_illegal.split(",") if x.strip())
        return SelectionConfig(
            min_len=self.select_min_len,
            max_len=self.select_max_len,
            optimal_ratio=self.select_optimal_ratio,
            ratio_max_deviation=self.select_ratio_max_deviation,
            illegal_char_classes=classes,
            lm_percentile_cut=self.select_mono_lm_cut if mono else self.select_lm_cut,
            align_percentile_cut=self.select_align_cut,
            t2s_percentile_cut=self.select_t2s_cut,
            dedup_mono=self.select_mono_dedup,
        )

    def toy_kwargs(self) -> dict:
        return {
            "ibm1_iters": self.em_ibm1_iters,
            "ibm2_iters": self.em_ibm2_iters,
            "lm_order": self.lm_order,
            "lm_k": self.lm_k,
            "weights": (self.toy_weight_lex, self.toy_weight_lm, self.toy_weight_len),
            "beam": self.decode_beam,
        }


@dataclass
class StageRecord:
    name: str
    inputs: dict[str, str]
    outputs: dict[str, str]
    config_digest: str
    seed: int
    item_counts: dict[str, int]
    wall_time_s: float = 0.0

    def manifest_entry(self) -> dict:
        return {
            "name": self.name,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
            "config_digest": self.config_digest,
            "seed": self.seed,
            "item_counts": dict(sorted(self.item_counts.items())),
        }


@dataclass
class PipelineManifest:
    stages: list[StageRecord] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"stages": [s.manifest_entry() for s in self.stages]},
            ensure_ascii=False,
            sort_keys=True,
            indent=2,
        ) + "\n"

    def timings_json(self) -> str:
        return json.dumps(
            {s.name: round(s.wall_time_s, 3) for s in self.stages},
            ensure_ascii=False,
            sort_keys=True,
            indent=2,
        ) + "\n"

    def stage(self, name: str) -> StageRecord:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


class PipelineError(RuntimeError):
    """A stage failed; carries the stage name and item context."""


class PipelineRun:
    """Executes stages against a work directory, maintaining the manifest."""

    def __init__(self, cfg: PipelineConfig, *, resume: bool = False, dry_run: bool = False):
        self.cfg = cfg
        self.resume = resume
        self.dry_run = dry_run
        self.workdir = Path(cfg.workdir)
        self.manifest = PipelineManifest()
        self.config_digest = hashlib.sha256(cfg.canonical().encode("utf-8")).hexdigest()
        self._previous: dict[str, dict] = {}
        if resume:
            manifest_path = self.workdir / "manifest.json"
            if manifest_path.exists():
                data = json.loads(manifest_path.read_text(encoding="utf-8"))
                self._previous = {s["name"]: s for s in data.get("stages", [])}

    # -- manifest plumbing ---------------------------------------------------

    def _rel(self, path: Path) -> str:
        return str(path.relative_to(self.workdir)) if path.is_relative_to(self.workdir) else str(path)

    def _digest_map(self, paths: Sequence[Path]) -> dict[str, str]:
        return {self._rel(p): _sha256(p) for p in sorted(paths)}

    def path(self, name: str) -> Path:
        return self.workdir / name

    def run_stage(
        self,
        name: str,
        inputs: Sequence[str | Path],
        outputs: Sequence[str | Path],
        builder: Callable[[], dict],
    ) -> StageRecord:
        in_paths = [Path(p) if Path(p).is_absolute() else self.path(str(p)) for p in inputs]
        out_paths = [self.path(str(p)) for p in outputs]
        if self.dry_run:
            record = StageRecord(
                name,
                {self._rel(p): "" for p in in_paths},
                {self._rel(p): "" for p in out_paths},
                self.config_digest,
                self.cfg.seed,
                {},
            )
            self.manifest.stages.append(record)
            return record

        missing = [p for p in in_paths if not p.exists()]
        if missing:
            raise PipelineError(f"stage {name!r}: missing inputs {[str(p) for p in missing]}")
        in_digests = self._digest_map(in_paths)

        prev = self._previous.get(name)
        if (
            self.resume
            and prev is not None
            and prev.get("config_digest") == self.config_digest
            and prev.get("inputs") == in_digests
            and all(self.path(rel).exists() for rel in prev.get("outputs", {}))
            and {rel: _sha256(self.path(rel)) for rel in prev.get("outputs", {})}
            == prev.get("outputs")
        ):
            logger.info("stage %s: up to date, skipping", name)
            record = StageRecord(
                name, prev["inputs"], prev["outputs"], self.config_digest,
                prev.get("seed", self.cfg.seed), prev.get("item_counts", {}),
            )
            self.manifest.stages.append(record)
            return record

        logger.info("stage %s: running", name)
        start = time.monotonic()
        try:
            counts = builder() or {}
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(f"stage {name!r} failed: {exc}") from exc
        wall = time.monotonic() - start
        missing_out = [p for p in out_paths if not p.exists()]
        if missing_out:
            raise PipelineError(f"stage {name!r} did not write {[str(p) for p in missing_out]}")
        record = StageRecord(
            name, in_digests, self._digest_map(out_paths), self.config_digest,
            self.cfg.seed, {k: int(v) for k, v in counts.items()}, wall,
        )
        self.manifest.stages.append(record)
        return record

    # -- shared helpers -------------------------------------------------------

    def _truecase_tgt(self) -> TruecaseModel:
        return TruecaseModel.load(self.path("truecase.tgt.tsv"))

    def _read_tokens(self, name: str, lang: str) -> list[Sentence]:
        return read_text_corpus(self.path(name), lang, pretokenized=True)

    def _finalize_strings(
        self,
        hyps: Sequence[Sentence],
        src_sentences: Sequence[Sentence] | None,
        with_repair: bool,
    ) -> list[str]:
        truecase = self._truecase_tgt()
        out = []
        for i, hyp in enumerate(hyps):
            repair = None
            if with_repair and src_sentences is not None:
                src = src_sentences[i]
                repair = lambda sent, _src=src: postprocess.repair_numbers(_src, sent)
            out.append(postprocess.finalize(hyp, truecase, repair))
        return out

    def _eval_hyps(
        self,
        hyps: Sequence[Sentence],
        raw_refs: Sequence[str],
        src_sentences: Sequence[Sentence] | None = None,
        with_repair: bool = False,
    ) -> float:
        strings = self._finalize_strings(hyps, src_sentences, with_repair)
        return metrics.bleu_corpus(strings, list(raw_refs), self.cfg.tgt_lang)


# ---------------------------------------------------------------------------
# Stage builders
# ---------------------------------------------------------------------------


def _stage_prepare(run: PipelineRun) -> dict:
    cfg = run.cfg
    run.workdir.mkdir(parents=True, exist_ok=True)
    parallel = read_parallel_tsv(cfg.parallel, cfg.src_lang, cfg.tgt_lang)
    mono = read_text_corpus(cfg.mono, cfg.tgt_lang)
    dev = read_parallel_tsv(cfg.dev, cfg.src_lang, cfg.tgt_lang)
    test = read_parallel_tsv(cfg.test, cfg.src_lang, cfg.tgt_lang)

    tc_src = train_truecaser([p.src for p in parallel])
    tc_tgt = train_truecaser([p.tgt for p in parallel] + mono)
    tc_src.save(run.path("truecase.src.tsv"))
    tc_tgt.save(run.path("truecase.tgt.tsv"))

    def tc_pair(p: SentencePair) -> SentencePair:
        return SentencePair(apply_truecase(tc_src, p.src), apply_truecase(tc_tgt, p.tgt), p.origin)

    parallel = [tc_pair(p) for p in parallel]
    mono = [apply_truecase(tc_tgt, s) for s in mono]
    dev_tc = [tc_pair(p) for p in dev]
    test_tc = [tc_pair(p) for p in test]

    write_pairs_tsv(run.path("parallel.tok.tsv"), parallel)
    write_text_corpus(run.path("mono.tok.txt"), mono)
    for split, pairs_tc, raw_path in (("dev", dev_tc, cfg.dev), ("test", test_tc, cfg.test)):
        write_text_corpus(run.path(f"{split}.src.tok.txt"), [p.src for p in pairs_tc])
        write_text_corpus(run.path(f"{split}.ref.tok.txt"), [p.tgt for p in pairs_tc])
        with open(raw_path, encoding="utf-8", newline="") as fh:
            refs = [line.rstrip("\n").split("\t")[1] for line in fh]
        with open(run.path(f"{split}.ref.raw.txt"), "w", encoding="utf-8", newline="") as fh:
            fh.writelines(r + "\n" for r in refs)
    return {"parallel": len(parallel), "mono": len(mono), "dev": len(dev), "test": len(test)}


def _stage_select_parallel(run: PipelineRun) -> dict:
    cfg = run.cfg
    sel_cfg = cfg.selection()
    pairs = read_parallel_tsv(
        run.path("parallel.tok.tsv"), cfg.src_lang, cfg.tgt_lang, pretokenized=True
    )
    mono = run._read_tokens("mono.tok.txt", cfg.tgt_lang)

    rule_ok_pairs = [p for p in pairs if dataselect.rule_filter(p, sel_cfg)[0]]
    rule_ok_mono = [s for s in mono if dataselect.rule_filter(s, sel_cfg)[0]]
    if not rule_ok_pairs:
        raise PipelineError("no parallel pairs survive the rule filters")

    sel_lm = lm_train(
        [p.tgt for p in rule_ok_pairs] + rule_ok_mono, order=cfg.lm_order, k=cfg.lm_k
    )
    lex1 = ibm1_train(rule_ok_pairs, cfg.em_ibm1_iters)
    lex, dist = ibm2_train(rule_ok_pairs, cfg.em_ibm2_iters, lex1)
    t2s_sel = toy_train(
        rule_ok_pairs, Direction.T2S, Orientation.L2R, model_id="select-t2s", **cfg.toy_kwargs()
    )

    retained, report = dataselect.select_parallel(pairs, sel_cfg, sel_lm, lex, dist, t2s_sel)
    write_pairs_jsonl(run.path("parallel.selected.jsonl"), retained)
    _write_json(run.path("select_parallel.report.json"), report.as_dict())
    save_lm(sel_lm, run.path("selection_lm.txt"))
    return {"input": report.input_count, "retained": report.retained}


def _stage_select_mono(run: PipelineRun) -> dict:
    cfg = run.cfg
    mono = run._read_tokens("mono.tok.txt", cfg.tgt_lang)
    sel_lm = load_lm(run.path("selection_lm.txt"))
    retained, report = dataselect.select_mono(mono, cfg.selection(mono=True), sel_lm)
    with open(run.path("mono.selected.jsonl"), "w", encoding="utf-8", newline="") as fh:
        for sent, score in retained:
            fh.write(
                json.dumps({"text": " ".join(sent.tokens), "lm": score}, ensure_ascii=False, sort_keys=True)
                + "\n"
            )
    _write_json(run.path("select_mono.report.json"), report.as_dict())
    return {"input": report.input_count, "retained": report.retained}


def _read_scored_mono(run: PipelineRun) -> list[tuple[Sentence, float]]:
    out = []
    with open(run.path("mono.selected.jsonl"), encoding="utf-8", newline="") as fh:
        for line in fh:
            rec = json.loads(line)
            out.append((Sentence.from_tokens(rec["text"].split(), lang=run.cfg.tgt_lang), rec["lm"]))
    return out


def _stage_subword(run: PipelineRun) -> dict:
    cfg = run.cfg
    selected = read_pairs_jsonl(run.path("parallel.selected.jsonl"), cfg.src_lang, cfg.tgt_lang)
    bpe_src = bpe_learn([p.src for p in selected], cfg.bpe_ops)
    bpe_tgt = bpe_learn([p.tgt for p in selected], cfg.bpe_ops)
    bpe_src.save(run.path("bpe.src.txt"))
    bpe_tgt.save(run.path("bpe.tgt.txt"))

    bpe_pairs = [
        SentencePair(bpe_apply(bpe_src, p.src), bpe_apply(bpe_tgt, p.tgt), p.origin)
        for p in selected
    ]
    write_pairs_tsv(run.path("parallel.bpe.tsv"), bpe_pairs)
    for split in ("dev", "test"):
        src = run._read_tokens(f"{split}.src.tok.txt", cfg.src_lang)
        write_text_corpus(run.path(f"{split}.src.bpe.txt"), [bpe_apply(bpe_src, s) for s in src])
        ref = run._read_tokens(f"{split}.ref.tok.txt", cfg.tgt_lang)
        write_text_corpus(run.path(f"{split}.ref.bpe.txt"), [bpe_apply(bpe_tgt, s) for s in ref])
    return {
        "merges_src": bpe_src.num_operations,
        "merges_tgt": bpe_tgt.num_operations,
        "pairs": len(bpe_pairs),
    }


def _stage_feature_models(run: PipelineRun) -> dict:
    cfg = run.cfg
    pairs = read_parallel_tsv(run.path("parallel.bpe.tsv"), cfg.src_lang, cfg.tgt_lang, pretokenized=True)
    bpe_tgt = BpeModel.load(run.path("bpe.tgt.txt"))
    mono_bpe = [bpe_apply(bpe_tgt, s) for s, _score in _read_scored_mono(run)]
    rerank_lm = lm_train([p.tgt for p in pairs] + mono_bpe, order=cfg.lm_order, k=cfg.lm_k)
    lex1 = ibm1_train(pairs, cfg.em_ibm1_iters)
    lex, dist = ibm2_train(pairs, cfg.em_ibm2_iters, lex1)
    save_lm(rerank_lm, run.path("rerank_lm.txt"))
    save_lexicon(lex, run.path("rerank.lex.txt"))
    save_distortion(dist, run.path("rerank.dist.txt"))
    return {"pairs": len(pairs), "mono": len(mono_bpe)}


def _stage_translators(run: PipelineRun) -> dict:
    cfg = run.cfg
    pairs = read_parallel_tsv(run.path("parallel.bpe.tsv"), cfg.src_lang, cfg.tgt_lang, pretokenized=True)
    t2s = toy_train(pairs, Direction.T2S, Orientation.L2R, model_id="t2s", **cfg.toy_kwargs())
    s2t = toy_train(pairs, Direction.S2T, Orientation.L2R, model_id="s2t-base", **cfg.toy_kwargs())
    save_translator(t2s, run.path("models/t2s"))
    save_translator(s2t, run.path("models/s2t_base"))
    return {"pairs": len(pairs)}


_MODEL_FILES = ("meta.json", "lexicon.txt", "lm.txt")


def _model_paths(name: str) -> list[str]:
    return [f"models/{name}/{f}" for f in _MODEL_FILES]


def _decode_eval_stage(run: PipelineRun, model_name: str, tag: str) -> dict:
    """Decode dev/test with a stored model, write 1-best token files and the
    stage evaluation (finalized, no number repair)."""
    cfg = run.cfg
    spec = load_translator(run.path(f"models/{model_name}"))
    evals = {}
    counts = {}
    for split in ("dev", "test"):
        src_bpe = run._read_tokens(f"{split}.src.bpe.txt", cfg.src_lang)
        lists = decode_corpus(spec, src_bpe, 1)
        word_hyps = [bpe_reverse(Sentence.from_tokens(nl.hyps[0].tokens, lang=cfg.tgt_lang)) for nl in lists]
        write_text_corpus(run.path(f"{tag}.{split}.tokens.txt"), word_hyps)
        raw_refs = [line.rstrip("\n") for line in open(run.path(f"{split}.ref.raw.txt"), encoding="utf-8")]
        evals[f"{split}_bleu"] = run._eval_hyps(word_hyps, raw_refs)
        counts[split] = len(word_hyps)
    _write_json(run.path(f"{tag}.eval.json"), evals)
    return counts


def _stage_baseline(run: PipelineRun) -> dict:
    return _decode_eval_stage(run, "s2t_base", "baseline")


def _backtranslate(run: PipelineRun, mono_records: list[tuple[Sentence, bool]], out_name: str) -> dict:
    """Shared back-translation + synthetic filtering for the plain and
    cycle-translated monolingual corpora."""
    cfg = run.cfg
    t2s = load_translator(run.path("models/t2s"))
    bpe_tgt = BpeModel.load(run.path("bpe.tgt.txt"))
    sentences = [bpe_apply(bpe_tgt, s) for s, _cycled in mono_records]
    origins = [
        Origin.SYNTHETIC_CYCLE if cycled else Origin.SYNTHETIC_BACK
        for _s, cycled in mono_records
    ]
    result = augment.back_translate(t2s, sentences, origins)
    lex = load_lexicon(run.path("rerank.lex.txt"))
    dist = load_distortion(run.path("rerank.dist.txt"))
    retained, report = dataselect.select_synthetic(result.pairs, cfg.selection(), lex, dist)
    write_pairs_jsonl(run.path(out_name), retained)
    _write_json(run.path(out_name.replace(".jsonl", ".report.json")), report.as_dict())
    return {"produced": len(result.pairs), "skipped": result.skipped, "retained": len(retained)}


def _stage_backtranslate(run: PipelineRun) -> dict:
    mono = [(s, False) for s, _score in _read_scored_mono(run)]
    return _backtranslate(run, mono, "synthetic.nc.jsonl")


def _train_small_model(run: PipelineRun, synthetic_file: str, index: int, model_name: str) -> int:
    cfg = run.cfg
    parallel = read_parallel_tsv(run.path("parallel.bpe.tsv"), cfg.src_lang, cfg.tgt_lang, pretokenized=True)
    synthetic = read_pairs_jsonl(run.path(synthetic_file), cfg.src_lang, cfg.tgt_lang)
    plan = MixturePlan(mode="small", num_small_samples=cfg.construct_num_small, seed=cfg.seed)
    corpus = augment.construct_small_sample(parallel, synthetic, plan, index)
    spec = toy_train(corpus, Direction.S2T, Orientation.L2R, model_id=model_name, **cfg.toy_kwargs())
    save_translator(spec, run.path(f"models/{model_name}"))
    return len(corpus)


def _stage_synthetic_model(run: PipelineRun) -> dict:
    size = _train_small_model(run, "synthetic.nc.jsonl", 0, "small0_nc")
    counts = _decode_eval_stage(run, "small0_nc", "synthetic")
    counts["corpus"] = size
    return counts


def _stage_cycle(run: PipelineRun) -> dict:
    cfg = run.cfg
    scored = _read_scored_mono(run)
    t2s = load_translator(run.path("models/t2s"))
    s2t = load_translator(run.path("models/s2t_base"))
    bpe_tgt = BpeModel.load(run.path("bpe.tgt.txt"))
    bpe_scored = [(bpe_apply(bpe_tgt, s), score) for s, score in scored]
    result = augment.cycle_translate(t2s, s2t, bpe_scored, CycleConfig(ratio=cfg.cycle_ratio))
    with open(run.path("mono.ct.jsonl"), "w", encoding="utf-8", newline="") as fh:
        for (orig, score), sent, cycled in zip(scored, result.sentences, result.cycled):
            word = bpe_reverse(sent) if cycled else orig
            rec = {"text": " ".join(word.tokens), "lm": score, "cycled": cycled}
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    return {"replaced": result.replaced, "skipped": result.skipped, "total": len(result.sentences)}


def _stage_backtranslate_ct(run: PipelineRun) -> dict:
    records = []
    with open(run.path("mono.ct.jsonl"), encoding="utf-8", newline="") as fh:
        for line in fh:
            rec = json.loads(line)
            records.append((Sentence.from_tokens(rec["text"].split(), lang=run.cfg.tgt_lang), rec["cycled"]))
    return _backtranslate(run, records, "synthetic.ct.jsonl")


def _stage_cycle_model(run: PipelineRun) -> dict:
    size = _train_small_model(run, "synthetic.ct.jsonl", 0, "small0")
    counts = _decode_eval_stage(run, "small0", "cycle")
    counts["corpus"] = size
    return counts


def _zoo_model_names(cfg: PipelineConfig) -> list[str]:
    return [f"small{i}" for i in range(cfg.construct_num_small)] + ["big", "r2l"]


def _stage_zoo(run: PipelineRun) -> dict:
    cfg = run.cfg
    parallel = read_parallel_tsv(run.path("parallel.bpe.tsv"), cfg.src_lang, cfg.tgt_lang, pretokenized=True)
    synthetic = read_pairs_jsonl(run.path("synthetic.ct.jsonl"), cfg.src_lang, cfg.tgt_lang)
    plan = MixturePlan(
        mode="small",
        num_small_samples=cfg.construct_num_small,
        parallel_repeat=cfg.construct_repeat,
        seed=cfg.seed,
    )
    counts = {}
    for i in range(1, cfg.construct_num_small):
        corpus = augment.construct_small_sample(parallel, synthetic, plan, i)
        spec = toy_train(corpus, Direction.S2T, Orientation.L2R, model_id=f"small{i}", **cfg.toy_kwargs())
        save_translator(spec, run.path(f"models/small{i}"))
        counts[f"small{i}"] = len(corpus)

    big_corpus = augment.construct_big(parallel, synthetic, plan)
    big = toy_train(big_corpus, Direction.S2T, Orientation.L2R, model_id="big", **cfg.toy_kwargs())
    save_translator(big, run.path("models/big"))
    counts["big"] = len(big_corpus)

    r2l_corpus = augment.construct_small_sample(parallel, synthetic, plan, 0)
    r2l = toy_train(r2l_corpus, Direction.S2T, Orientation.R2L, model_id="r2l", **cfg.toy_kwargs())
    save_translator(r2l, run.path("models/r2l"))
    counts["r2l"] = len(r2l_corpus)

    # decode n-best lists for every system; right-to-left hypotheses are
    # stored in natural order
    for name in _zoo_model_names(cfg):
        spec = load_translator(run.path(f"models/{name}"))
        for split in ("dev", "test"):
            src_bpe = run._read_tokens(f"{split}.src.bpe.txt", cfg.src_lang)
            lists = decode_corpus(spec, src_bpe, cfg.decode_nbest)
            if spec.orientation == Orientation.R2L:
                lists = [_unreverse_nbest(nl) for nl in lists]
            toymt.write_nbest_jsonl(run.path(f"nbest/{name}.{split}.jsonl"), lists)
    return counts


def _unreverse_nbest(nl: toymt.NBestList) -> toymt.NBestList:
    hyps = tuple(
        toymt.Hypothesis(tuple(reversed(h.tokens)), h.logscore, dict(h.feature_breakdown))
        for h in nl.hyps
    )
    return toymt.NBestList(nl.source, hyps, nl.model_id)


def _stage_rerank(run: PipelineRun) -> dict:
    cfg = run.cfg
    sel_cfg = cfg.selection()
    r2l = load_translator(run.path("models/r2l"))
    t2s = load_translator(run.path("models/t2s"))
    l2r_for_r2l = load_translator(run.path("models/small0"))
    lm = load_lm(run.path("rerank_lm.txt"))
    lex = load_lexicon(run.path("rerank.lex.txt"))
    dist = load_distortion(run.path("rerank.dist.txt"))
    dev_refs_bpe = run._read_tokens("dev.ref.bpe.txt", cfg.tgt_lang)
    raw_dev_refs = [line.rstrip("\n") for line in open(run.path("dev.ref.raw.txt"), encoding="utf-8")]
    mira_cfg = MiraConfig(C=cfg.mira_c, epochs=cfg.mira_epochs, seed=cfg.seed)

    def ladder_metric(top_token_lists: list[tuple[str, ...]]) -> float:
        # epoch selection on the same detokenized BLEU the ladder reports, so
        # reranking can never lose to the unreranked baseline it starts from
        words = [bpe_reverse(Sentence.from_tokens(toks, lang=cfg.tgt_lang)) for toks in top_token_lists]
        return run._eval_hyps(words, raw_dev_refs)

    counts = {}
    for name in _zoo_model_names(cfg):
        forced_l2r = l2r_for_r2l if name == "r2l" else None
        featured = {}
        for split in ("dev", "test"):
            sources = run._read_tokens(f"{split}.src.bpe.txt", cfg.src_lang)
            lists = toymt.read_nbest_jsonl(run.path(f"nbest/{name}.{split}.jsonl"), sources)
            featured[split] = [
                extract_features(
                    nl, r2l=r2l, t2s=t2s, lm=lm, lex=lex, dist=dist, cfg=sel_cfg, l2r=forced_l2r
                )
                for nl in lists
            ]
        model = mira_train(featured["dev"], dev_refs_bpe, mira_cfg, epoch_metric=ladder_metric)
        save_weights(model, run.path(f"rerank/{name}.weights.tsv"))
        for split in ("dev", "test"):
            best = [rerank_apply(model, fl).hyps[0] for fl in featured[split]]
            words = [bpe_reverse(Sentence.from_tokens(h.tokens, lang=cfg.tgt_lang)) for h in best]
            write_text_corpus(run.path(f"rerank/{name}.{split}.tokens.txt"), words)
        counts[name] = len(featured["dev"])

    evals = {}
    for split in ("dev", "test"):
        hyps = run._read_tokens(f"rerank/small0.{split}.tokens.txt", cfg.tgt_lang)
        raw_refs = [line.rstrip("\n") for line in open(run.path(f"{split}.ref.raw.txt"), encoding="utf-8")]
        evals[f"{split}_bleu"] = run._eval_hyps(hyps, raw_refs)
    _write_json(run.path("rerank.eval.json"), evals)
    return counts


def _stage_combine(run: PipelineRun) -> dict:
    cfg = run.cfg
    names = _zoo_model_names(cfg)
    dev_refs_tok = run._read_tokens("dev.ref.tok.txt", cfg.tgt_lang)
    raw_dev_refs = [line.rstrip("\n") for line in open(run.path("dev.ref.raw.txt"), encoding="utf-8")]
    systems_dev = {name: run._read_tokens(f"rerank/{name}.dev.tokens.txt", cfg.tgt_lang) for name in names}
    pool = combine.SystemPool(systems_dev, dev_refs_tok)

    def ladder_metric(hyps: Sequence[Sentence], _refs: Sequence[Sentence]) -> float:
        return run._eval_hyps(hyps, raw_dev_refs)

    selection = combine.gmse(pool, ladder_metric)
    _write_json(
        run.path("combine.selection.json"),
        {"selected": list(selection.selected), "trace": [[mid, s] for mid, s in selection.trace]},
    )

    evals = {}
    with open(run.path("combine.trace.jsonl"), "w", encoding="utf-8", newline="") as trace_fh:
        for split in ("dev", "test"):
            systems = (
                systems_dev
                if split == "dev"
                else {name: run._read_tokens(f"rerank/{name}.{split}.tokens.txt", cfg.tgt_lang) for name in names}
            )
            combined = combine.combine_corpus(systems, list(selection.selected))
            write_text_corpus(run.path(f"combined.{split}.tokens.txt"), [c.sentence for c in combined])
            raw_refs = [line.rstrip("\n") for line in open(run.path(f"{split}.ref.raw.txt"), encoding="utf-8")]
            evals[f"{split}_bleu"] = run._eval_hyps([c.sentence for c in combined], raw_refs)
            for i, c in enumerate(combined):
                trace_fh.write(
                    json.dumps(
                        {
                            "split": split,
                            "sent_id": i,
                            "backbone": c.backbone_id,
                            "chosen": c.chosen_id,
                            "slots": [
                                [[w, weight] for w, weight in slot.items()] for slot in c.network.slots
                            ],
                        },
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )
    _write_json(run.path("combine.eval.json"), evals)
    return {"systems": len(names), "selected": len(selection.selected)}


def _stage_postprocess(run: PipelineRun) -> dict:
    cfg = run.cfg
    evals = {}
    counts = {}
    for split in ("dev", "test"):
        hyps = run._read_tokens(f"combined.{split}.tokens.txt", cfg.tgt_lang)
        srcs = run._read_tokens(f"{split}.src.tok.txt", cfg.src_lang)
        raw_refs = [line.rstrip("\n") for line in open(run.path(f"{split}.ref.raw.txt"), encoding="utf-8")]
        strings = run._finalize_strings(hyps, srcs, with_repair=True)
        with open(run.path(f"final.{split}.txt"), "w", encoding="utf-8", newline="") as fh:
            fh.writelines(s + "\n" for s in strings)
        evals[f"{split}_bleu"] = metrics.bleu_corpus(strings, raw_refs, cfg.tgt_lang)
        counts[split] = len(strings)
    _write_json(run.path("postprocess.eval.json"), evals)
    return counts


def _stage_report(run: PipelineRun) -> dict:
    ladder = []
    for stage_name, eval_file in zip(
        _LADDER_STAGES,
        ("baseline.eval.json", "synthetic.eval.json", "cycle.eval.json",
         "rerank.eval.json", "combine.eval.json", "postprocess.eval.json"),
    ):
        data = json.loads(run.path(eval_file).read_text(encoding="utf-8"))
        ladder.append({"stage": stage_name, "dev_bleu": data["dev_bleu"], "test_bleu": data["test_bleu"]})
    report = {
        "ladder": ladder,
        "final_dev_bleu": ladder[-1]["dev_bleu"],
        "final_test_bleu": ladder[-1]["test_bleu"],
    }
    _write_json(run.path("report.json"), report)
    return {"stages": len(ladder)}


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def _stage_plan(cfg: PipelineConfig) -> list[tuple[str, list[str], list[str], Callable]]:
    ext = [str(Path(p).resolve()) for p in (cfg.parallel, cfg.mono, cfg.dev, cfg.test)]
    prepare_out = [
        "parallel.tok.tsv", "mono.tok.txt", "truecase.src.tsv", "truecase.tgt.tsv",
        "dev.src.tok.txt", "dev.ref.tok.txt", "dev.ref.raw.txt",
        "test.src.tok.txt", "test.ref.tok.txt", "test.ref.raw.txt",
    ]
    zoo_out = []
    for name in _zoo_model_names(cfg):
        if name not in ("small0",):
            zoo_out.extend(_model_paths(name))
        zoo_out.extend([f"nbest/{name}.dev.jsonl", f"nbest/{name}.test.jsonl"])
    rerank_out = ["rerank.eval.json"]
    for name in _zoo_model_names(cfg):
        rerank_out.append(f"rerank/{name}.weights.tsv")
        rerank_out.extend([f"rerank/{name}.dev.tokens.txt", f"rerank/{name}.test.tokens.txt"])
    return [
        ("prepare", ext, prepare_out, _stage_prepare),
        (
            "select_parallel",
            ["parallel.tok.tsv", "mono.tok.txt"],
            ["parallel.selected.jsonl", "select_parallel.report.json", "selection_lm.txt"],
            _stage_select_parallel,
        ),
        (
            "select_mono",
            ["mono.tok.txt", "selection_lm.txt"],
            ["mono.selected.jsonl", "select_mono.report.json"],
            _stage_select_mono,
        ),
        (
            "subword",
            ["parallel.selected.jsonl", "dev.src.tok.txt", "dev.ref.tok.txt",
             "test.src.tok.txt", "test.ref.tok.txt"],
            ["bpe.src.txt", "bpe.tgt.txt", "parallel.bpe.tsv",
             "dev.src.bpe.txt", "dev.ref.bpe.txt", "test.src.bpe.txt", "test.ref.bpe.txt"],
            _stage_subword,
        ),
        (
            "feature_models",
            ["parallel.bpe.tsv", "mono.selected.jsonl", "bpe.tgt.txt"],
            ["rerank_lm.txt", "rerank.lex.txt", "rerank.dist.txt"],
            _stage_feature_models,
        ),
        (
            "translators",
            ["parallel.bpe.tsv"],
            _model_paths("t2s") + _model_paths("s2t_base"),
            _stage_translators,
        ),
        (
            "baseline",
            _model_paths("s2t_base") + ["dev.src.bpe.txt", "test.src.bpe.txt",
                                        "dev.ref.raw.txt", "test.ref.raw.txt", "truecase.tgt.tsv"],
            ["baseline.dev.tokens.txt", "baseline.test.tokens.txt", "baseline.eval.json"],
            _stage_baseline,
        ),
        (
            "backtranslate",
            _model_paths("t2s") + ["mono.selected.jsonl", "bpe.tgt.txt", "rerank.lex.txt", "rerank.dist.txt"],
            ["synthetic.nc.jsonl", "synthetic.nc.report.json"],
            _stage_backtranslate,
        ),
        (
            "synthetic_model",
            ["parallel.bpe.tsv", "synthetic.nc.jsonl", "dev.src.bpe.txt", "test.src.bpe.txt",
             "dev.ref.raw.txt", "test.ref.raw.txt", "truecase.tgt.tsv"],
            _model_paths("small0_nc") + ["synthetic.dev.tokens.txt", "synthetic.test.tokens.txt",
                                         "synthetic.eval.json"],
            _stage_synthetic_model,
        ),
        (
            "cycle",
            ["mono.selected.jsonl", "bpe.tgt.txt"] + _model_paths("t2s") + _model_paths("s2t_base"),
            ["mono.ct.jsonl"],
            _stage_cycle,
        ),
        (
            "backtranslate_ct",
            _model_paths("t2s") + ["mono.ct.jsonl", "bpe.tgt.txt", "rerank.lex.txt", "rerank.dist.txt"],
            ["synthetic.ct.jsonl", "synthetic.ct.report.json"],
            _stage_backtranslate_ct,
        ),
        (
            "cycle_model",
            ["parallel.bpe.tsv", "synthetic.ct.jsonl", "dev.src.bpe.txt", "test.src.bpe.txt",
             "dev.ref.raw.txt", "test.ref.raw.txt", "truecase.tgt.tsv"],
            _model_paths("small0") + ["cycle.dev.tokens.txt", "cycle.test.tokens.txt", "cycle.eval.json"],
            _stage_cycle_model,
        ),
        (
            "zoo",
            ["parallel.bpe.tsv", "synthetic.ct.jsonl", "dev.src.bpe.txt", "test.src.bpe.txt"]
            + _model_paths("small0"),
            zoo_out,
            _stage_zoo,
        ),
        (
            "rerank",
            [f"nbest/{name}.{split}.jsonl" for name in _zoo_model_names(cfg) for split in ("dev", "test")]
            + ["rerank_lm.txt", "rerank.lex.txt", "rerank.dist.txt", "dev.ref.bpe.txt",
               "dev.src.bpe.txt", "test.src.bpe.txt", "dev.ref.raw.txt", "test.ref.raw.txt",
               "truecase.tgt.tsv"]
            + _model_paths("r2l") + _model_paths("t2s") + _model_paths("small0"),
            rerank_out,
            _stage_rerank,
        ),
        (
            "combine",
            [f"rerank/{name}.{split}.tokens.txt" for name in _zoo_model_names(cfg) for split in ("dev", "test")]
            + ["dev.ref.tok.txt", "dev.ref.raw.txt", "test.ref.raw.txt", "truecase.tgt.tsv"],
            ["combine.selection.json", "combine.trace.jsonl", "combine.eval.json",
             "combined.dev.tokens.txt", "combined.test.tokens.txt"],
            _stage_combine,
        ),
        (
            "postprocess",
            ["combined.dev.tokens.txt", "combined.test.tokens.txt", "dev.src.tok.txt",
             "test.src.tok.txt", "dev.ref.raw.txt", "test.ref.raw.txt", "truecase.tgt.tsv"],
            ["final.dev.txt", "final.test.txt", "postprocess.eval.json"],
            _stage_postprocess,
        ),
        (
            "report",
            ["baseline.eval.json", "synthetic.eval.json", "cycle.eval.json",
             "rerank.eval.json", "combine.eval.json", "postprocess.eval.json"],
            ["report.json"],
            _stage_report,
        ),
    ]


def run_pipeline(
    cfg: PipelineConfig, *, resume: bool = False, dry_run: bool = False
) -> PipelineManifest:
    """Execute the full flow; returns the manifest (also written to the work
    directory together with the timings sidecar)."""
    run = PipelineRun(cfg, resume=resume, dry_run=dry_run)
    run.workdir.mkdir(parents=True, exist_ok=True)
    for name, inputs, outputs, builder in _stage_plan(cfg):
        run.run_stage(name, inputs, outputs, lambda b=builder: b(run))
    (run.workdir / "manifest.json").write_text(run.manifest.to_json(), encoding="utf-8")
    if not dry_run:
        (run.workdir / "timings.json").write_text(run.manifest.timings_json(), encoding="utf-8")
    return run.manifest


@dataclass(frozen=True)
class AblationGrid:
    ratios: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75)

    def __post_init__(self):
        if len(set(self.ratios)) != len(self.ratios):
            raise ValueError("ablation ratios must be distinct")
        if any(not 0.0 <= r <= 1.0 for r in self.ratios):
            raise ValueError("ablation ratios must lie in [0, 1]")


def run_ablation(cfg: PipelineConfig, grid: AblationGrid = AblationGrid()) -> list[dict]:
    """Sweep cycle-translation ratios: each row cycle-translates the selected
    monolingual data at its ratio, back-translates, trains a model on the
    synthetic corpus only, and reports dev BLEU. Base artifacts are reused
    from (or built into) the work directory."""
    run = PipelineRun(cfg, resume=True)
    run.workdir.mkdir(parents=True, exist_ok=True)
    needed = {
        "prepare", "select_parallel", "select_mono", "subword", "feature_models", "translators",
    }
    for name, inputs, outputs, builder in _stage_plan(cfg):
        if name in needed:
            run.run_stage(name, inputs, outputs, lambda b=builder: b(run))

    scored = _read_scored_mono(run)
    t2s = load_translator(run.path("models/t2s"))
    s2t = load_translator(run.path("models/s2t_base"))
    bpe_tgt = BpeModel.load(run.path("bpe.tgt.txt"))
    lex = load_lexicon(run.path("rerank.lex.txt"))
    dist = load_distortion(run.path("rerank.dist.txt"))
    dev_src = run._read_tokens("dev.src.bpe.txt", cfg.src_lang)
    raw_dev_refs = [line.rstrip("\n") for line in open(run.path("dev.ref.raw.txt"), encoding="utf-8")]

    bpe_scored = [(bpe_apply(bpe_tgt, s), score) for s, score in scored]
    rows = []
    for ratio in grid.ratios:
        ct = augment.cycle_translate(t2s, s2t, bpe_scored, CycleConfig(ratio=ratio))
        origins = [
            Origin.SYNTHETIC_CYCLE if cycled else Origin.SYNTHETIC_BACK for cycled in ct.cycled
        ]
        bt = augment.back_translate(t2s, ct.sentences, origins)
        synthetic, _report = dataselect.select_synthetic(bt.pairs, cfg.selection(), lex, dist)
        spec = toy_train(
            synthetic, Direction.S2T, Orientation.L2R,
            model_id=f"ablate-{ratio}", **cfg.toy_kwargs(),
        )
        lists = decode_corpus(spec, dev_src, 1)
        hyps = [bpe_reverse(Sentence.from_tokens(nl.hyps[0].tokens, lang=cfg.tgt_lang)) for nl in lists]
        bleu = run._eval_hyps(hyps, raw_dev_refs)
        rows.append({"ratio": ratio, "dev_bleu": bleu, "synthetic": len(synthetic)})
        logger.info("ablation ratio %.2f: dev BLEU %.2f", ratio, bleu)
    _write_json(run.path("ablation.json"), {"rows": rows})
    return rows
