"""Command-line entry point: one subcommand per pipeline operation."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import augment, combine, dataselect, metrics, postprocess, toymt
from .align import (
    ibm1_train,
    ibm2_train,
    load_distortion,
    load_lexicon,
    save_distortion,
    save_lexicon,
    viterbi_align,
)
from .corpus import (
    Origin,
    Sentence,
    SentencePair,
    TruecaseModel,
    read_pairs_jsonl,
    read_parallel_files,
    read_parallel_tsv,
    read_text_corpus,
    write_pairs_jsonl,
    write_text_corpus,
)
from .ngram_lm import lm_logprob, lm_train, load_lm, per_token_logprob, save_lm
from .pipeline import AblationGrid, PipelineConfig, run_ablation, run_pipeline
from .rerank import MiraConfig, extract_features, load_weights, mira_train, rerank_apply, save_weights
from .subword import BpeModel, bpe_apply, bpe_learn, bpe_reverse
from .toymt import decode_corpus, load_translator, save_translator


def _read_tokens(path: str, lang: str) -> list[Sentence]:
    return read_text_corpus(path, lang, pretokenized=True)


def _selection_config(path: str | None) -> dataselect.SelectionConfig:
    """Flat key=value file mirroring SelectionConfig fields."""
    if path is None:
        return dataselect.SelectionConfig()
    kwargs: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in ("min_len", "max_len"):
                kwargs[key] = int(value)
            elif key == "illegal_char_classes":
                kwargs[key] = frozenset(x.strip() for x in value.split(",") if x.strip())
            elif key == "dedup_mono":
                kwargs[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                kwargs[key] = float(value)
    return dataselect.SelectionConfig(**kwargs)


def _cmd_tokenize(args) -> int:
    from .corpus import tokenize

    sentences = [tokenize(line.rstrip("\n"), args.lang) for line in open(args.input, encoding="utf-8")]
    write_text_corpus(args.output, sentences)
    return 0


def _cmd_bpe_learn(args) -> int:
    corpus = _read_tokens(args.input, args.lang)
    model = bpe_learn(corpus, args.ops)
    model.save(args.model)
    return 0


def _cmd_bpe_apply(args) -> int:
    model = BpeModel.load(args.model)
    corpus = _read_tokens(args.input, args.lang)
    write_text_corpus(args.output, [bpe_apply(model, s) for s in corpus])
    return 0


def _cmd_bpe_reverse(args) -> int:
    corpus = _read_tokens(args.input, args.lang)
    write_text_corpus(args.output, [bpe_reverse(s) for s in corpus])
    return 0


def _cmd_lm_train(args) -> int:
    corpus = _read_tokens(args.input, args.lang)
    lambdas = None
    if args.lambdas:
        lambdas = [float(x) for x in args.lambdas.split(",")]
    model = lm_train(corpus, order=args.order, k=args.k, lambdas=lambdas)
    save_lm(model, args.model)
    return 0


def _cmd_lm_score(args) -> int:
    model = load_lm(args.model)
    corpus = _read_tokens(args.input, args.lang)
    lines = []
    for line_no, sent in enumerate(corpus):
        rec = {
            "line_no": line_no,
            "logprob": lm_logprob(model, sent),
            "per_token_logprob": per_token_logprob(model, sent),
        }
        lines.append(json.dumps(rec, ensure_ascii=False, sort_keys=True))
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _read_pairs(args) -> list[SentencePair]:
    if args.tsv:
        return read_parallel_tsv(args.tsv, args.src_lang, args.tgt_lang, pretokenized=True)
    if args.src and args.tgt:
        return read_parallel_files(args.src, args.tgt, args.src_lang, args.tgt_lang, pretokenized=True)
    raise SystemExit("need --tsv or --src/--tgt")


def _cmd_align_train(args) -> int:
    pairs = _read_pairs(args)
    lex1 = ibm1_train(pairs, args.ibm1_iters)
    lex, dist = ibm2_train(pairs, args.ibm2_iters, lex1)
    save_lexicon(lex, args.lexicon)
    save_distortion(dist, args.distortion)
    return 0


def _cmd_align_score(args) -> int:
    lex = load_lexicon(args.lexicon)
    dist = load_distortion(args.distortion)
    pairs = _read_pairs(args)
    lines = []
    for line_no, pair in enumerate(pairs):
        alignment = viterbi_align(lex, dist, pair)
        rec = {
            "line_no": line_no,
            "score": alignment.score,
            "links": list(alignment.links),
        }
        lines.append(json.dumps(rec, ensure_ascii=False, sort_keys=True))
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_toy_train(args) -> int:
    pairs = _read_pairs(args)
    spec = toymt.toy_train(
        pairs,
        toymt.Direction(args.direction),
        toymt.Orientation(args.orientation),
        ibm1_iters=args.ibm1_iters,
        ibm2_iters=args.ibm2_iters,
        beam=args.beam,
        model_id=args.model_id or Path(args.model).name,
    )
    save_translator(spec, args.model)
    return 0


def _cmd_translate(args) -> int:
    spec = load_translator(args.model)
    corpus = _read_tokens(args.input, spec.input_lang)
    lists = decode_corpus(spec, corpus, args.nbest)
    toymt.write_nbest_jsonl(args.output, lists)
    return 0


def _cmd_filter_parallel(args) -> int:
    cfg = _selection_config(args.config)
    pairs = _read_pairs(args)
    lm = load_lm(args.lm)
    lex = load_lexicon(args.lexicon)
    dist = load_distortion(args.distortion)
    t2s = load_translator(args.t2s)
    retained, report = dataselect.select_parallel(pairs, cfg, lm, lex, dist, t2s)
    write_pairs_jsonl(args.output, retained)
    print(json.dumps(report.as_dict(), ensure_ascii=False, sort_keys=True, indent=2))
    return 0


def _cmd_filter_mono(args) -> int:
    cfg = _selection_config(args.config)
    sentences = _read_tokens(args.input, args.lang)
    lm = load_lm(args.lm)
    retained, report = dataselect.select_mono(sentences, cfg, lm)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        for sent, score in retained:
            fh.write(json.dumps({"text": " ".join(sent.tokens), "lm": score}, ensure_ascii=False, sort_keys=True) + "\n")
    print(json.dumps(report.as_dict(), ensure_ascii=False, sort_keys=True, indent=2))
    return 0


def _cmd_backtranslate(args) -> int:
    t2s = load_translator(args.model)
    mono = _read_tokens(args.input, t2s.input_lang)
    result = augment.back_translate(t2s, mono)
    write_pairs_jsonl(args.output, result.pairs)
    print(json.dumps({"produced": len(result.pairs), "skipped": result.skipped}, sort_keys=True))
    return 0


def _cmd_cycletranslate(args) -> int:
    t2s = load_translator(args.t2s)
    s2t = load_translator(args.s2t)
    scored = []
    with open(args.input, encoding="utf-8", newline="") as fh:
        for line in fh:
            rec = json.loads(line)
            scored.append((Sentence.from_tokens(rec["text"].split(), lang=t2s.input_lang), rec["lm"]))
    result = augment.cycle_translate(t2s, s2t, scored, augment.CycleConfig(ratio=args.ratio))
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        for sent, cycled in zip(result.sentences, result.cycled):
            fh.write(json.dumps({"text": " ".join(sent.tokens), "cycled": cycled}, ensure_ascii=False, sort_keys=True) + "\n")
    print(json.dumps({"replaced": result.replaced, "skipped": result.skipped}, sort_keys=True))
    return 0


def _hash_file(path: str) -> str:
    import hashlib

    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _cmd_construct(args) -> int:
    parallel = read_pairs_jsonl(args.parallel, args.src_lang, args.tgt_lang)
    synthetic = read_pairs_jsonl(args.synthetic, args.src_lang, args.tgt_lang)
    plan = augment.MixturePlan(
        mode=args.mode,
        num_small_samples=args.num_small,
        parallel_repeat=args.repeat,
        seed=args.seed,
    )
    outputs = []
    if args.mode == "small":
        corpora = augment.construct_small(parallel, synthetic, plan)
        for i, corpus in enumerate(corpora):
            out = f"{args.output_prefix}.small{i}.jsonl"
            write_pairs_jsonl(out, corpus)
            outputs.append({"path": out, "pairs": len(corpus)})
    else:
        corpus = augment.construct_big(parallel, synthetic, plan)
        out = f"{args.output_prefix}.big.jsonl"
        write_pairs_jsonl(out, corpus)
        outputs.append({"path": out, "pairs": len(corpus)})
    manifest = {
        "mode": args.mode,
        "seed": args.seed,
        "sizes": augment.mixture_sizes(plan, len(parallel), len(synthetic)),
        "inputs": {
            args.parallel: _hash_file(args.parallel),
            args.synthetic: _hash_file(args.synthetic),
        },
        "outputs": outputs,
    }
    manifest_path = f"{args.output_prefix}.manifest.json"
    Path(manifest_path).write_text(json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(manifest["sizes"], sort_keys=True))
    return 0


def _load_featured(args, split_sources, path):
    lists = toymt.read_nbest_jsonl(path, split_sources)
    cfg = _selection_config(args.config)
    r2l = load_translator(args.r2l)
    t2s = load_translator(args.t2s)
    lm = load_lm(args.lm)
    lex = load_lexicon(args.lexicon)
    dist = load_distortion(args.distortion)
    l2r = load_translator(args.l2r) if args.l2r else None
    return [
        extract_features(nl, r2l=r2l, t2s=t2s, lm=lm, lex=lex, dist=dist, cfg=cfg, l2r=l2r)
        for nl in lists
    ]


def _write_featured(path, featured) -> None:
    from .rerank import FEATURE_NAMES

    with open(path, "w", encoding="utf-8", newline="") as fh:
        for sent_id, fl in enumerate(featured):
            for rank, (hyp, vec) in enumerate(zip(fl.hyps, fl.vectors)):
                rec = {
                    "sent_id": sent_id,
                    "model_id": fl.model_id,
                    "rank": rank,
                    "tokens": list(hyp.tokens),
                    "logscore": hyp.logscore,
                    "features": dict(zip(FEATURE_NAMES, vec.values)),
                }
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _read_featured(path, sources):
    from .rerank import FEATURE_NAMES, FeatureVector, FeaturedNBest

    by_sent: dict[int, list[dict]] = {}
    model_id = ""
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            rec = json.loads(line)
            model_id = rec["model_id"]
            by_sent.setdefault(rec["sent_id"], []).append(rec)
    out = []
    for sent_id in sorted(by_sent):
        recs = sorted(by_sent[sent_id], key=lambda r: r["rank"])
        hyps = tuple(
            toymt.Hypothesis(tuple(r["tokens"]), r["logscore"], {"lex": 0.0, "lm": 0.0, "len": 0.0})
            for r in recs
        )
        vectors = tuple(
            FeatureVector(tuple(r["features"][name] for name in FEATURE_NAMES)) for r in recs
        )
        out.append(FeaturedNBest(sources[sent_id], model_id, hyps, vectors))
    return out


def _cmd_rerank_extract(args) -> int:
    sources = _read_tokens(args.source, args.src_lang)
    featured = _load_featured(args, sources, args.nbest)
    _write_featured(args.output, featured)
    return 0


def _cmd_rerank_train(args) -> int:
    sources = _read_tokens(args.source, args.src_lang)
    featured = _read_featured(args.features, sources)
    refs = _read_tokens(args.refs, args.tgt_lang)
    model = mira_train(featured, refs, MiraConfig(C=args.c, epochs=args.epochs, seed=args.seed))
    save_weights(model, args.weights)
    return 0


def _cmd_rerank_apply(args) -> int:
    sources = _read_tokens(args.source, args.src_lang)
    featured = _read_featured(args.features, sources)
    model = load_weights(args.weights)
    reranked = [rerank_apply(model, fl) for fl in featured]
    if args.best_only:
        write_text_corpus(args.output, [Sentence.from_tokens(fl.hyps[0].tokens, lang=args.tgt_lang) for fl in reranked])
    else:
        _write_featured(args.output, reranked)
    return 0


def _read_system_outputs(paths: list[str], lang: str) -> dict[str, list[Sentence]]:
    systems = {}
    for path in paths:
        name = Path(path).stem
        sents = []
        with open(path, encoding="utf-8", newline="") as fh:
            recs = sorted((json.loads(line) for line in fh if line.strip()), key=lambda r: r["sent_id"])
            for rec in recs:
                sents.append(Sentence.from_tokens(rec["tokens"], lang=lang))
        systems[name] = sents
    return systems


def _cmd_gmse(args) -> int:
    systems = _read_system_outputs(args.systems, args.lang)
    refs = _read_tokens(args.refs, args.lang)
    pool = combine.SystemPool(systems, refs)
    result = combine.gmse(pool)
    out = {"selected": list(result.selected), "trace": [[mid, score] for mid, score in result.trace]}
    print(json.dumps(out, ensure_ascii=False, sort_keys=True, indent=2))
    if args.output:
        Path(args.output).write_text(json.dumps(out, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_combine(args) -> int:
    systems = _read_system_outputs(args.systems, args.lang)
    subset = args.select.split(",") if args.select else list(systems)
    combined = combine.combine_corpus(systems, subset)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        for i, c in enumerate(combined):
            fh.write(json.dumps({"sent_id": i, "tokens": list(c.sentence.tokens)}, ensure_ascii=False, sort_keys=True) + "\n")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            for i, c in enumerate(combined):
                rec = {
                    "sent_id": i,
                    "backbone": c.backbone_id,
                    "chosen": c.chosen_id,
                    "slots": [[[w, weight] for w, weight in slot.items()] for slot in c.network.slots],
                }
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    return 0


def _cmd_postprocess(args) -> int:
    hyps = _read_tokens(args.input, args.lang)
    srcs = _read_tokens(args.src, args.src_lang)
    if len(hyps) != len(srcs):
        raise SystemExit("hypothesis/source line counts differ")
    truecase = TruecaseModel.load(args.truecase) if args.truecase else None
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        for src, hyp in zip(srcs, hyps):
            repair = lambda sent, _src=src: postprocess.repair_numbers(_src, sent)
            fh.write(postprocess.finalize(hyp, truecase, repair) + "\n")
    return 0


def _cmd_bleu(args) -> int:
    hyps = [line.rstrip("\n") for line in open(args.hyp, encoding="utf-8")]
    refs = [line.rstrip("\n") for line in open(args.ref, encoding="utf-8")]
    score = metrics.bleu_corpus_report(hyps, refs, args.lang)
    print(
        json.dumps(
            {
                "bleu": score.bleu,
                "precisions": list(score.precisions),
                "bp": score.bp,
                "hyp_len": score.hyp_len,
                "ref_len": score.ref_len,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_pipeline(args) -> int:
    cfg = PipelineConfig.from_file(args.config)
    if args.action == "ablate":
        ratios = tuple(float(x) for x in args.ratios.split(",")) if args.ratios else (0.0, 0.25, 0.5, 0.75)
        rows = run_ablation(cfg, AblationGrid(ratios))
        print(json.dumps({"rows": rows}, sort_keys=True, indent=2))
        return 0
    manifest = run_pipeline(cfg, resume=args.action == "resume", dry_run=args.dry_run)
    print(json.dumps({"stages": [s.name for s in manifest.stages]}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtkit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    p = add("tokenize", _cmd_tokenize, help="tokenize raw text, one sentence per line")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lang", default="und")

    p = add("bpe-learn", _cmd_bpe_learn, help="learn BPE merges from tokenized text")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--ops", type=int, required=True)
    p.add_argument("--lang", default="und")

    p = add("bpe-apply", _cmd_bpe_apply, help="apply a BPE model")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--lang", default="und")

    p = add("bpe-reverse", _cmd_bpe_reverse, help="undo BPE segmentation")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lang", default="und")

    p = add("lm-train", _cmd_lm_train, help="train the n-gram language model")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--k", type=float, default=0.1)
    p.add_argument("--lambdas", default="")
    p.add_argument("--lang", default="und")

    p = add("lm-score", _cmd_lm_score, help="score sentences with a language model")
    p.add_argument("--input", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--output", default="")
    p.add_argument("--lang", default="und")

    def parallel_args(p):
        p.add_argument("--tsv", default="")
        p.add_argument("--src", default="")
        p.add_argument("--tgt", default="")
        p.add_argument("--src-lang", default="src")
        p.add_argument("--tgt-lang", default="tgt")

    p = add("align-train", _cmd_align_train, help="train IBM 1+2 alignment models")
    parallel_args(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--distortion", required=True)
    p.add_argument("--ibm1-iters", type=int, default=5)
    p.add_argument("--ibm2-iters", type=int, default=5)

    p = add("align-score", _cmd_align_score, help="score pairs with trained alignment models")
    parallel_args(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--distortion", required=True)
    p.add_argument("--output", default="")

    p = add("toy-train", _cmd_toy_train, help="train a toy translator")
    parallel_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--direction", choices=["s2t", "t2s"], default="s2t")
    p.add_argument("--orientation", choices=["l2r", "r2l"], default="l2r")
    p.add_argument("--ibm1-iters", type=int, default=5)
    p.add_argument("--ibm2-iters", type=int, default=5)
    p.add_argument("--beam", type=int, default=10)
    p.add_argument("--model-id", default="")

    p = add("translate", _cmd_translate, help="decode n-best lists with a stored model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--nbest", type=int, default=1)

    p = add("filter-parallel", _cmd_filter_parallel, help="multi-feature parallel data selection")
    parallel_args(p)
    p.add_argument("--config", default=None)
    p.add_argument("--lm", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--distortion", required=True)
    p.add_argument("--t2s", required=True)
    p.add_argument("--output", required=True)

    p = add("filter-mono", _cmd_filter_mono, help="monolingual data selection with LM scores")
    p.add_argument("--input", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--lm", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lang", default="und")

    p = add("backtranslate", _cmd_backtranslate, help="generate synthetic pairs from monolingual text")
    p.add_argument("--model", required=True, help="target-to-source translator directory")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = add("cycletranslate", _cmd_cycletranslate, help="round-trip the low-fluency fraction")
    p.add_argument("--t2s", required=True)
    p.add_argument("--s2t", required=True)
    p.add_argument("--input", required=True, help="JSON lines {text, lm}")
    p.add_argument("--output", required=True)
    p.add_argument("--ratio", type=float, required=True)

    p = add("construct", _cmd_construct, help="build big/small training mixtures")
    p.add_argument("--parallel", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--mode", choices=["small", "big"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--num-small", type=int, default=8)
    p.add_argument("--repeat", type=int, default=13)
    p.add_argument("--output-prefix", required=True)
    p.add_argument("--src-lang", default="src")
    p.add_argument("--tgt-lang", default="tgt")

    def rerank_scorers(p):
        p.add_argument("--r2l", required=True)
        p.add_argument("--t2s", required=True)
        p.add_argument("--l2r", default="")
        p.add_argument("--lm", required=True)
        p.add_argument("--lexicon", required=True)
        p.add_argument("--distortion", required=True)
        p.add_argument("--config", default=None)

    p = add("rerank-extract", _cmd_rerank_extract, help="attach the six rerank features to n-best lists")
    p.add_argument("--nbest", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--src-lang", default="src")
    rerank_scorers(p)

    p = add("rerank-train", _cmd_rerank_train, help="train the k-best batch MIRA ranker")
    p.add_argument("--features", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--c", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--src-lang", default="src")
    p.add_argument("--tgt-lang", default="tgt")

    p = add("rerank-apply", _cmd_rerank_apply, help="reorder n-best lists with trained weights")
    p.add_argument("--features", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--best-only", action="store_true")
    p.add_argument("--src-lang", default="src")
    p.add_argument("--tgt-lang", default="tgt")

    p = add("gmse", _cmd_gmse, help="greedy model selection over system outputs")
    p.add_argument("--systems", nargs="+", required=True, help="JSON lines {sent_id, tokens} per system")
    p.add_argument("--refs", required=True)
    p.add_argument("--output", default="")
    p.add_argument("--lang", default="und")

    p = add("combine", _cmd_combine, help="confusion-network combination of system outputs")
    p.add_argument("--systems", nargs="+", required=True)
    p.add_argument("--select", default="")
    p.add_argument("--output", required=True)
    p.add_argument("--trace", default="")
    p.add_argument("--lang", default="und")

    p = add("postprocess", _cmd_postprocess, help="de-BPE, repair numbers, de-truecase, detokenize")
    p.add_argument("--input", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--truecase", default="")
    p.add_argument("--output", required=True)
    p.add_argument("--lang", default="und")
    p.add_argument("--src-lang", default="src")

    p = add("bleu", _cmd_bleu, help="detokenized case-sensitive corpus BLEU")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--lang", default="und")

    p = add("pipeline", _cmd_pipeline, help="run the full pipeline from a config file")
    p.add_argument("action", choices=["run", "resume", "ablate"])
    p.add_argument("--config", required=True)
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--ratios", default="")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
