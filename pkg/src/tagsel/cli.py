"""Command-line front end.

Subcommands: train-tagger, train-joint, tag, parse, select-features,
select-attrs, eval, compare, reproduce.  Every artifact a run writes
(model file, trace, ids file, JSON report) embeds the resolved run
configuration and the code version, so a run can be replayed from any of
its outputs.  A JSON config file may supply defaults for any flag of the
chosen subcommand; explicit flags win.

Two training regimes are predefined: ``selection`` (tree beam 8,
12 iterations) for the many cheap models of a selection sweep, and
``final`` (tree beam 40, 25 iterations) for the model that ships.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

from tagsel import __version__
from tagsel.corpus import read_conll, split_train_dev, write_conll
from tagsel.evaluation import EvalReport, compare_runs, evaluate, format_report
from tagsel.learner import TrainConfig
from tagsel.parser import (
    BeamConfig,
    load_joint,
    parse_sentence,
    save_joint,
    train_joint,
)
from tagsel.selection import (
    SelectionAborted,
    SelectionConfig,
    build_mi_table,
    greedy_select,
    make_joint_metric,
    make_tagger_metric,
    select_attributes,
)
from tagsel.synth import SynthConfig, generate_treebank
from tagsel.tagger import load_tagger, save_tagger, tag_corpus, train_tagger
from tagsel.templates import builtin_templates, load_template_file

log = logging.getLogger(__name__)

REGIMES = {"selection": (8, 12), "final": (40, 25)}


# ---------------------------------------------------------------- helpers

def _load_templates(path: str | None):
    return load_template_file(path) if path else builtin_templates()


def _parse_ids(value: str, templates) -> list[int]:
    """Template id list: 'all', a comma list, or a file of ids."""
    if value == "all":
        return list(templates.ids)
    if os.path.exists(value):
        ids = []
        with open(value, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    ids.extend(int(p) for p in line.replace(",", " ").split())
        return ids
    return [int(p) for p in value.split(",") if p.strip()]


def _attr_list(value: str | None) -> list[str] | None:
    if value is None:
        return None
    return [a for a in value.split(",") if a]


def _run_config(args: argparse.Namespace) -> dict:
    rc = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "config", "verbose", "quiet"):
            continue
        rc[k] = str(v) if isinstance(v, Path) else v
    rc["code_version"] = __version__
    return rc


def _beam_from_args(args, default_regime: str | None = None) -> tuple[BeamConfig, int]:
    """Resolve (BeamConfig, iterations) from flags and the regime preset."""
    regime = getattr(args, "regime", None) or default_regime
    preset_beam, preset_iters = REGIMES.get(regime, (40, 25))
    tree_beam = args.tree_beam if args.tree_beam is not None else preset_beam
    iters = args.iters if args.iters is not None else preset_iters
    beam = BeamConfig(
        tree_beam=tree_beam,
        tag_variant_beam=args.variant_beam,
        k=args.k,
        alpha=args.alpha,
        variant_scope=args.variant_scope,
    )
    return beam, iters


def _add_joint_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tree-beam", type=int, default=None,
                   help="labeled-tree beam width (default from regime)")
    p.add_argument("--variant-beam", type=int, default=8,
                   help="extra slots for tag variants of kept trees")
    p.add_argument("--k", type=int, default=2, help="tag candidates per token")
    p.add_argument("--alpha", type=float, default=0.25,
                   help="drop candidates scoring below best-alpha")
    p.add_argument("--variant-scope", choices=["global", "per_tree"],
                   default="global")
    p.add_argument("--iters", type=int, default=None,
                   help="training iterations (default from regime)")
    p.add_argument("--regime", choices=sorted(REGIMES), default=None,
                   help="preset: selection = beam 8/12 iters, final = 40/25")
    p.add_argument("--tagger-iters", type=int, default=12)
    p.add_argument("--passes", type=int, default=2,
                   help="tagging passes of the preprocessing tagger")
    p.add_argument("--jackknife-folds", type=int, default=10)


def _write_json(path: str, record: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=_json_safe)
        fh.write("\n")


def _json_safe(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    raise TypeError(f"not JSON-serializable: {x!r}")


def _report_record(report: EvalReport, rc: dict) -> dict:
    rec = report.to_record()
    rec = {k: (None if isinstance(v, float) and math.isnan(v) else v)
           for k, v in rec.items()}
    rec["run_config"] = rc
    return rec


# ------------------------------------------------------------ subcommands

def cmd_train_tagger(args) -> int:
    templates = _load_templates(args.templates)
    active = _parse_ids(args.active, templates)
    train = read_conll(args.train)
    config = TrainConfig(iterations=args.iters, C=args.C, seed=args.seed)
    model = train_tagger(
        train, templates, active, config,
        passes=args.passes, target=args.field,
        attributes=_attr_list(args.attributes),
    )
    save_tagger(args.out, model, extra={"run_config": _run_config(args)})
    print(f"trained {args.field} tagger on {len(train)} sentences "
          f"({len(active)} active templates) -> {args.out}")
    return 0


def cmd_tag(args) -> int:
    model = load_tagger(args.model)
    sentences = read_conll(args.infile)
    t0 = time.perf_counter()
    tagged, nbests = tag_corpus(model, sentences)
    elapsed = time.perf_counter() - t0
    write_conll(tagged, args.out)
    if args.nbest is not None:
        nbest_path = args.nbest_out or args.out + ".nbest"
        with open(nbest_path, "w", encoding="utf-8") as fh:
            for sent_nbest in nbests:
                for token_nbest in sent_nbest:
                    fh.write("\t".join(
                        f"{tag}:{score:.6f}"
                        for tag, score in token_nbest[: args.nbest]
                    ) + "\n")
                fh.write("\n")
        print(f"n-best lists -> {nbest_path}")
    if args.timing:
        print(f"sec/sentence\t{elapsed / max(1, len(sentences)):.6f}")
    print(f"tagged {len(sentences)} sentences -> {args.out}")
    return 0


def cmd_train_joint(args) -> int:
    templates = _load_templates(args.templates)
    active = _parse_ids(args.active, templates)
    train = read_conll(args.train)
    beam, iters = _beam_from_args(args, default_regime="final")
    config = TrainConfig(iterations=iters, C=args.C, seed=args.seed, loss="hamming")
    tagger_config = TrainConfig(iterations=args.tagger_iters, C=args.C, seed=args.seed)
    model = train_joint(
        train, templates, active, config, beam,
        target=args.field, attributes=_attr_list(args.attributes),
        tagger_config=tagger_config, tagger_passes=args.passes,
        jackknife_folds=args.jackknife_folds,
    )
    save_joint(args.out, model, extra={"run_config": _run_config(args)})
    print(f"trained joint {args.field} model on {len(train)} sentences "
          f"(beam {beam.tree_beam}, {iters} iters) -> {args.out}")
    return 0


def cmd_parse(args) -> int:
    model = load_joint(args.model)
    sentences = read_conll(args.infile)
    _, nbests = tag_corpus(model.tagger, sentences)
    t0 = time.perf_counter()
    parsed = [parse_sentence(model, s, nbest=nb) for s, nb in zip(sentences, nbests)]
    elapsed = time.perf_counter() - t0
    write_conll(parsed, args.out, predicted=True)
    if args.timing:
        print(f"sec/sentence\t{elapsed / max(1, len(sentences)):.6f}")
    print(f"parsed {len(sentences)} sentences -> {args.out}")
    return 0


def _write_trace(path, run_config, trace, selected, aborted=None):
    """Line-delimited selection trace; written even for aborted runs."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"run_config": run_config}, sort_keys=True) + "\n")
        fh.write(json.dumps({"initial_metric": trace.initial_metric}) + "\n")
        for row in trace.rows:
            fh.write(json.dumps({
                "iteration": row.iteration,
                "template": row.template_id,
                "metric": row.metric,
                "best": row.best,
                "accepted": row.accepted,
                "ordering": list(row.ordering) if row.ordering else None,
                "elapsed_sec": row.elapsed,
            }) + "\n")
        if aborted is not None:
            fh.write(json.dumps({"aborted": aborted, "selected_so_far": selected}) + "\n")
        else:
            fh.write(json.dumps({"selected": selected}) + "\n")


def cmd_select_features(args) -> int:
    templates = _load_templates(args.templates)
    candidates = _parse_ids(args.candidates, templates)
    train = read_conll(args.train)
    if args.dev:
        dev = read_conll(args.dev)
    else:
        train, dev = split_train_dev(train, args.dev_fraction, args.seed)
    attributes = _attr_list(args.attributes)
    field = args.field or ("morph" if args.metric == "morph" else "pos")
    sel_config = SelectionConfig(
        delta=args.delta, ordering=args.ordering,
        figure1_literal=args.figure1_literal,
        exclude_diagonal=args.exclude_diagonal,
    )
    mi_table = None
    if args.ordering == "mrmr":
        mi_table = build_mi_table(
            train, templates, candidates, target=field, attributes=attributes,
        )
    if args.system == "standalone":
        if args.metric not in ("pos", "morph"):
            raise SystemExit("standalone selection supports --metric pos|morph")
        config = TrainConfig(iterations=args.tagger_iters, C=args.C, seed=args.seed)
        metric_fn = make_tagger_metric(
            train, dev, templates, config,
            passes=args.passes, target=field, attributes=attributes,
        )
    else:
        beam, iters = _beam_from_args(args, default_regime="selection")
        config = TrainConfig(iterations=iters, C=args.C, seed=args.seed,
                             loss="hamming")
        tagger_config = TrainConfig(iterations=args.tagger_iters, C=args.C,
                                    seed=args.seed)
        metric_fn = make_joint_metric(
            train, dev, templates, config, beam,
            metric=args.metric, target=field, attributes=attributes,
            tagger_config=tagger_config, tagger_passes=args.passes,
            jackknife_folds=args.jackknife_folds,
        )
    rc = _run_config(args)
    trace_path = args.trace or args.out + ".trace.jsonl"
    try:
        selected, trace = greedy_select(candidates, metric_fn, sel_config, mi_table)
    except SelectionAborted as abort:
        _write_trace(trace_path, rc, abort.trace, abort.selected, aborted=str(abort.cause))
        log.error("selection aborted after %d candidate(s): %s",
                  len(abort.trace.rows), abort.cause)
        print(f"partial trace -> {trace_path}")
        return 1

    _write_trace(trace_path, rc, trace, selected)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# run_config: {json.dumps(rc, sort_keys=True)}\n")
        for tid in selected:
            fh.write(f"{tid}\n")
    pct = 100.0 * (1.0 - len(selected) / len(candidates)) if candidates else 0.0
    print(f"selected {len(selected)}/{len(candidates)} templates "
          f"({pct:.1f}% reduction) -> {args.out}")
    print(f"trace -> {trace_path}")
    return 0


def cmd_select_attrs(args) -> int:
    templates = _load_templates(args.templates)
    active = _parse_ids(args.active, templates)
    train = read_conll(args.train)
    beam, iters = _beam_from_args(args, default_regime="selection")
    config = TrainConfig(iterations=iters, C=args.C, seed=args.seed, loss="hamming")
    tagger_config = TrainConfig(iterations=args.tagger_iters, C=args.C, seed=args.seed)
    decisions = select_attributes(
        train, templates, active, config, beam,
        attributes=_attr_list(args.attributes),
        folds=args.folds, min_delta=args.min_delta, max_p=args.max_p,
        shuffles=args.shuffles, seed=args.seed,
        tagger_config=tagger_config, tagger_passes=args.passes,
        jackknife_folds=args.jackknife_folds,
    )
    print(f"{'attribute':<16}{'dLAS':>8}{'dUAS':>8}{'p':>10}  verdict")
    for d in decisions:
        verdict = "accept" if d.accepted else "reject"
        print(f"{d.attribute:<16}{d.las_delta:>8.2f}{d.uas_delta:>8.2f}"
              f"{d.p_value:>10.4f}  {verdict}")
    if args.json:
        _write_json(args.json, {
            "run_config": _run_config(args),
            "decisions": [{
                "attribute": d.attribute, "las_delta": d.las_delta,
                "uas_delta": d.uas_delta, "p_value": d.p_value,
                "accepted": d.accepted, "las_with": d.las_with,
                "las_without": d.las_without,
            } for d in decisions],
        })
    return 0


def cmd_eval(args) -> int:
    gold = read_conll(args.gold)
    pred = read_conll(args.pred)
    template_count = full_count = None
    if args.model:
        try:
            m = load_joint(args.model)
        except ValueError:
            m = load_tagger(args.model)
        template_count = len(m.active_ids)
        full_count = len(m.templates.ids)
    report = evaluate(
        gold, pred,
        exclude_punct=args.exclude_punct,
        attributes=_attr_list(args.attributes),
        template_count=template_count,
        full_template_count=full_count,
    )
    print(format_report(report))
    if args.json:
        _write_json(args.json, _report_record(report, _run_config(args)))
    return 0


def cmd_compare(args) -> int:
    gold = read_conll(args.gold)
    attrs = _attr_list(args.attributes)
    ra = evaluate(gold, read_conll(args.a),
                  exclude_punct=args.exclude_punct, attributes=attrs)
    rb = evaluate(gold, read_conll(args.b),
                  exclude_punct=args.exclude_punct, attributes=attrs)
    result = compare_runs(ra, rb, shuffles=args.shuffles, seed=args.seed)
    print(f"{'metric':<8}{'A':>8}{'B':>8}{'delta':>8}{'p':>10}")
    rows = [
        ("POS", ra.pos_accuracy, rb.pos_accuracy, result.pos_delta, result.pos_p),
        ("MORPH", ra.morph_accuracy, rb.morph_accuracy, result.morph_delta,
         result.morph_p),
        ("UAS", ra.uas, rb.uas, result.uas_delta, result.uas_p),
        ("LAS", ra.las, rb.las, result.las_delta, result.las_p),
    ]
    for name, a, b, delta, p in rows:
        print(f"{name:<8}{a:>8.2f}{b:>8.2f}{delta:>+8.2f}{p:>10.4f}")
    if args.json:
        rec = result.to_record()
        rec["run_config"] = _run_config(args)
        _write_json(args.json, rec)
    return 0


# ------------------------------------------------------------- reproduce

_MISSING_DATA_MSG = """\
No treebank found at {path!r}.

This command needs a small dependency treebank in CoNLL format (one
token per line, blank line between sentences, columns: id, form, lemma,
cpos, pos, feats, head, deprel).  Either:

  * download a Universal Dependencies treebank, e.g. from
    https://universaldependencies.org (any *-ud-train.conllu file of a
    few thousand sentences works), and pass it via --data; or
  * pass --synthetic to run the grid on a generated corpus instead.
"""


def _grid_cell(task: dict) -> dict:
    """One reproduce grid cell; module-level so worker processes can run it.

    Returns a JSON-ready record (plus table fields) for the cell.
    """
    system, ordering = task["system"], task["ordering"]
    train, dev = task["train"], task["dev"]
    templates = task["templates"]
    candidates = list(task["candidates"])
    seed = task["seed"]
    tagger_cfg = TrainConfig(iterations=task["tagger_iters"], seed=seed)
    joint_cfg = TrainConfig(iterations=task["iters"], seed=seed, loss="hamming")
    beam = BeamConfig(tree_beam=task["tree_beam"])
    sel_cfg = SelectionConfig(ordering="mrmr" if ordering == "dynamic" else "static")

    trace_rows = None
    if ordering == "none":
        active = candidates
    else:
        mi_table = None
        if ordering == "dynamic":
            mi_table = build_mi_table(train, templates, candidates, target="pos")
        if system == "standalone":
            metric_fn = make_tagger_metric(train, dev, templates, tagger_cfg)
        else:
            metric_fn = make_joint_metric(
                train, dev, templates, joint_cfg, beam,
                tagger_config=tagger_cfg, jackknife_folds=task["jackknife_folds"],
            )
        active, trace = greedy_select(candidates, metric_fn, sel_cfg, mi_table)
        trace_rows = [{
            "iteration": r.iteration, "template": r.template_id,
            "metric": r.metric, "best": r.best, "accepted": r.accepted,
            "ordering": list(r.ordering) if r.ordering else None,
            "elapsed_sec": r.elapsed,
        } for r in trace.rows]

    if system == "standalone":
        model = train_tagger(train, templates, active, tagger_cfg)
        t0 = time.perf_counter()
        pred, _ = tag_corpus(model, dev)
        elapsed = time.perf_counter() - t0
    else:
        model = train_joint(
            train, templates, active, joint_cfg, beam,
            tagger_config=tagger_cfg, jackknife_folds=task["jackknife_folds"],
        )
        _, nbests = tag_corpus(model.tagger, dev)
        t0 = time.perf_counter()
        pred = [parse_sentence(model, s, nbest=nb) for s, nb in zip(dev, nbests)]
        elapsed = time.perf_counter() - t0

    report = evaluate(
        dev, pred,
        sec_per_sentence=elapsed / max(1, len(dev)),
        template_count=len(active),
        full_template_count=len(candidates),
    )
    if system == "standalone":
        report.uas = report.las = float("nan")
    return {
        "system": system, "ordering": ordering, "active": list(active),
        "report": report, "trace": trace_rows,
    }


def cmd_reproduce(args) -> int:
    templates = _load_templates(args.templates)
    candidates = _parse_ids(args.candidates, templates)
    if args.synthetic:
        sentences = generate_treebank(
            SynthConfig(sentences=args.sentences, seed=args.seed)
        )
    else:
        if not args.data or not os.path.exists(args.data):
            sys.stderr.write(_MISSING_DATA_MSG.format(path=args.data or "--data"))
            return 2
        sentences = read_conll(args.data)
    train, dev = split_train_dev(sentences, 0.8, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rc = _run_config(args)

    base = {
        "train": train, "dev": dev, "templates": templates,
        "candidates": candidates, "seed": args.seed,
        "tagger_iters": args.tagger_iters, "iters": args.iters,
        "tree_beam": args.tree_beam, "jackknife_folds": args.jackknife_folds,
    }
    tasks = [dict(base, system=s, ordering=o)
             for s in ("standalone", "joint")
             for o in ("none", "static", "dynamic")]

    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_grid_cell, tasks))
    else:
        results = [_grid_cell(t) for t in tasks]

    records = []
    lines = [f"{'system':<12}{'selection':<10}{'POS':>8}{'MORPH':>8}{'UAS':>8}"
             f"{'LAS':>8}{'sec/sent':>10}{'#tmpl':>7}{'red%':>7}"]
    for res in results:
        r: EvalReport = res["report"]
        name = f"{res['system']}-{res['ordering']}"
        if res["trace"] is not None:
            with open(out_dir / f"{name}.trace.jsonl", "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"run_config": rc, "cell": name},
                                    sort_keys=True) + "\n")
                for row in res["trace"]:
                    fh.write(json.dumps(row) + "\n")
                fh.write(json.dumps({"selected": res["active"]}) + "\n")
            with open(out_dir / f"{name}.ids", "w", encoding="utf-8") as fh:
                fh.write(f"# run_config: {json.dumps(rc, sort_keys=True)}\n")
                for tid in res["active"]:
                    fh.write(f"{tid}\n")

        def fmt(x: float) -> str:
            return "-" if math.isnan(x) else f"{x:.2f}"

        lines.append(
            f"{res['system']:<12}{res['ordering']:<10}{fmt(r.pos_accuracy):>8}"
            f"{fmt(r.morph_accuracy):>8}{fmt(r.uas):>8}{fmt(r.las):>8}"
            f"{r.sec_per_sentence:>10.4f}{r.template_count:>7}"
            f"{r.reduction_pct:>7.1f}"
        )
        rec = _report_record(r, rc)
        rec["system"] = res["system"]
        rec["ordering"] = res["ordering"]
        records.append(rec)

    table = "\n".join(lines) + "\n"
    (out_dir / "report.txt").write_text(table, encoding="utf-8")
    with open(out_dir / "report.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, default=_json_safe) + "\n")
    print(table, end="")
    print(f"artifacts -> {out_dir}")
    return 0


# ------------------------------------------------------------- arg parser

def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    ap = argparse.ArgumentParser(
        prog="tagsel",
        description="morphosyntactic tagging, joint tagging-parsing, and "
                    "feature-template selection",
    )
    ap.add_argument("--version", action="version", version=f"tagsel {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    def add(name: str, func, **kw) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=func)
        p.add_argument("--config", default=None,
                       help="JSON file of default values for this subcommand")
        p.add_argument("--seed", type=int, default=1)
        subparsers[name] = p
        return p

    p = add("train-tagger", cmd_train_tagger, help="train the standalone tagger")
    p.add_argument("--train", required=True)
    p.add_argument("--templates", default=None)
    p.add_argument("--active", default="all")
    p.add_argument("--field", choices=["pos", "morph"], default="pos")
    p.add_argument("--attributes", default=None,
                   help="comma list restricting the morph bundle")
    p.add_argument("--iters", type=int, default=12)
    p.add_argument("--passes", type=int, default=2)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--out", required=True)

    p = add("tag", cmd_tag, help="tag a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--nbest", type=int, default=None,
                   help="also dump top-N tag:score lists, one token per line")
    p.add_argument("--nbest-out", default=None)
    p.add_argument("--timing", action="store_true")

    p = add("train-joint", cmd_train_joint, help="train the joint tagger-parser")
    p.add_argument("--train", required=True)
    p.add_argument("--templates", default=None)
    p.add_argument("--active", default="all")
    p.add_argument("--field", choices=["pos", "morph"], default="pos")
    p.add_argument("--attributes", default=None)
    p.add_argument("--C", type=float, default=1.0)
    _add_joint_flags(p)
    p.add_argument("--out", required=True)

    p = add("parse", cmd_parse, help="tag and parse a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--timing", action="store_true",
                   help="print decoding sec/sentence")

    p = add("select-features", cmd_select_features,
            help="greedy forward template selection")
    p.add_argument("--system", choices=["standalone", "joint"], required=True)
    p.add_argument("--ordering", choices=["static", "mrmr"], default="static")
    p.add_argument("--delta", type=float, default=0.02)
    p.add_argument("--metric", choices=["pos", "morph", "uas", "las"],
                   default="pos")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", default=None)
    p.add_argument("--dev-fraction", type=float, default=0.8,
                   help="train share when --dev is absent")
    p.add_argument("--templates", default=None)
    p.add_argument("--candidates", default="all")
    p.add_argument("--field", choices=["pos", "morph"], default=None)
    p.add_argument("--attributes", default=None)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--figure1-literal", action="store_true",
                   help="best-so-far starts at 0 and the rule is metric+delta>best")
    p.add_argument("--exclude-diagonal", action="store_true",
                   help="redundancy mean over off-diagonal pairs only")
    _add_joint_flags(p)
    p.add_argument("--trace", default=None,
                   help="trace path (default: OUT.trace.jsonl)")
    p.add_argument("--out", default="selected.ids")

    p = add("select-attrs", cmd_select_attrs,
            help="decide which morphological attributes the joint model predicts")
    p.add_argument("--train", required=True)
    p.add_argument("--templates", default=None)
    p.add_argument("--active", default="all")
    p.add_argument("--attributes", default=None)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--min-delta", type=float, default=0.1)
    p.add_argument("--max-p", type=float, default=0.01)
    p.add_argument("--shuffles", type=int, default=10000)
    p.add_argument("--C", type=float, default=1.0)
    _add_joint_flags(p)
    p.add_argument("--json", default=None)

    p = add("eval", cmd_eval, help="score a prediction file against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--exclude-punct", action="store_true",
                   help="skip tokens whose form is all punctuation")
    p.add_argument("--attributes", default=None)
    p.add_argument("--model", default=None,
                   help="model file; adds template-count and reduction fields")
    p.add_argument("--json", default=None)

    p = add("compare", cmd_compare, help="compare two prediction files")
    p.add_argument("--gold", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--exclude-punct", action="store_true")
    p.add_argument("--attributes", default=None)
    p.add_argument("--shuffles", type=int, default=10000)
    p.add_argument("--json", default=None)

    p = add("reproduce", cmd_reproduce,
            help="run the {standalone,joint} x {none,static,dynamic} grid")
    p.add_argument("--data", default=None, help="treebank in CoNLL format")
    p.add_argument("--synthetic", action="store_true",
                   help="generate a synthetic treebank instead of --data")
    p.add_argument("--sentences", type=int, default=200,
                   help="synthetic corpus size")
    p.add_argument("--templates", default=None)
    p.add_argument("--candidates", default="all")
    p.add_argument("--iters", type=int, default=12)
    p.add_argument("--tagger-iters", type=int, default=12)
    p.add_argument("--tree-beam", type=int, default=8)
    p.add_argument("--jackknife-folds", type=int, default=10)
    p.add_argument("--workers", type=int, default=1,
                   help="grid cells run one per worker process when > 1")
    p.add_argument("--out-dir", default="reproduce-out")

    return ap, subparsers


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    ap, subparsers = build_parser()
    # Apply --config as subcommand defaults before the real parse, so that
    # explicit flags still win.
    if "--config" in argv:
        cfg_path = argv[argv.index("--config") + 1]
        with open(cfg_path, encoding="utf-8") as fh:
            cfg = json.load(fh)
        command = next((a for a in argv if a in subparsers), None)
        if command is None:
            ap.error("--config requires a subcommand")
        sp = subparsers[command]
        dests = {a.dest for a in sp._actions}
        unknown = set(cfg) - dests
        if unknown:
            ap.error(f"config keys not recognized by {command}: {sorted(unknown)}")
        sp.set_defaults(**cfg)
    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
