"""Command-line pipeline: synth -> pool -> select -> eval / crossval / doe / serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback

import numpy as np

from . import data as qdata
from .classifiers import TrainingConfig, train_family
from .data import DataView, Dataset, holdout_split, load_csv, load_schema, save_csv, save_schema, synth_generate
from .doe import (
    OperatingPoint,
    build_plan,
    default_operating_point,
    envelope,
    envelope_plot_data,
    factor_effects,
    simulate_plan,
)
from .ensemble import ClassifierPool, generate_pool, mie, select_by_accuracy, select_sad, train_fuser
from .evaluation import (
    confusion,
    crossval,
    mcnemar_u,
    rates,
    render_confusion_table,
    render_rates_table,
)
from .store import ModelRecord, canonical_json, config_digest, load_model, model_id, save_model

DEFAULT_FRACTION = 1202 / 2270  # historical identification/validation proportion


def _write_json(path, obj, canonical=True):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        if canonical:
            fh.write(canonical_json(obj) + "\n")
        else:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _write_text(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _load_config(path):
    if not path:
        return TrainingConfig()
    with open(path, "r", encoding="utf-8") as fh:
        return TrainingConfig.from_dict(json.load(fh))


def _load_dataset(data_path, schema_path):
    return load_csv(data_path, load_schema(schema_path))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args):
    schema = load_schema(args.schema) if args.schema else qdata.default_schema()
    ds = synth_generate(schema, args.n, args.rate, args.seed)
    os.makedirs(args.out, exist_ok=True)
    save_csv(ds, os.path.join(args.out, "data.csv"))
    save_schema(ds.schema, os.path.join(args.out, "schema.json"))
    print(f"wrote {ds.n} rows (defect rate {ds.y.mean():.4f}) to {args.out}/data.csv")
    return 0


def cmd_pool(args):
    config = _load_config(args.config)
    ds = _load_dataset(args.data, args.schema)
    split = holdout_split(ds.n, args.fraction, args.seed + 1)
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    pool = generate_pool(ds, split, families, args.count, args.seed, config=config, workers=args.workers)
    doc = {
        "pool": pool.to_dict(),
        "split": {"train": split.train.tolist(), "validation": split.validation.tolist(), "seed": split.seed},
        # paths kept relative to the pool file so parallel runs stay byte-identical
        "data": os.path.relpath(args.data, args.out),
        "schema": os.path.relpath(args.schema, args.out),
        "fraction": args.fraction,
        "seed": args.seed,
        "config": config.to_dict(),
    }
    _write_json(os.path.join(args.out, "pool.json"), doc)
    errors = pool.errors
    print(
        f"pool of {pool.size} members ({','.join(families)} x {args.count}); "
        f"validation errors {errors.min():.4f}..{errors.max():.4f}"
    )
    return 0


def _read_pool(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    for key in ("data", "schema"):
        if not os.path.isabs(doc[key]):
            doc[key] = os.path.join(base, doc[key])
    pool = ClassifierPool.from_dict(doc["pool"])
    return doc, pool


def cmd_select(args):
    doc, pool = _read_pool(args.pool)
    config = TrainingConfig.from_dict(doc["config"])
    ds = _load_dataset(doc["data"], doc["schema"])
    strategies = ["accuracy", "sad"] if args.strategy == "all" else [args.strategy]
    fusions = ["vote", "mean", "trained"] if args.fusion == "all" else [args.fusion]

    candidates = []
    for fusion in fusions:
        if fusion == "trained":
            train_idx = np.asarray(doc["split"]["train"])
            val_idx = np.asarray(doc["split"]["validation"])
            ens = train_fuser(
                pool,
                DataView(X=ds.X[train_idx], y=ds.y[train_idx]),
                DataView(X=ds.X[val_idx], y=ds.y[val_idx]),
                seed=args.seed,
                config=config,
            )
            candidates.append(ens)
            continue
        for strategy in strategies:
            if strategy == "accuracy":
                candidates.append(select_by_accuracy(pool, fusion))
            else:
                candidates.append(select_sad(pool, fusion, initial_size=args.initial_size))

    best = min(candidates, key=lambda e: e.provenance["validation_error"])
    record = ModelRecord(
        name=args.name,
        encoder=ds.encoder,
        ensemble=best,
        metadata={
            "seed": args.seed,
            "pool_seed": doc["seed"],
            "config_digest": config_digest(doc["config"]),
            "strategy": best.provenance["strategy"],
            "fusion": best.scheme,
        },
    )
    store_dir = args.store or os.path.join(args.out, "store")
    mid = save_model(record, store_dir)
    report = {
        "model_id": mid,
        "chosen": {
            "strategy": best.provenance["strategy"],
            "fusion": best.scheme,
            "size": best.size,
            "validation_error": best.provenance["validation_error"],
        },
        "candidates": [
            {
                "strategy": e.provenance["strategy"],
                "fusion": e.scheme,
                "size": e.size,
                "validation_error": e.provenance["validation_error"],
            }
            for e in candidates
        ],
        "mie": {"value": mie(pool)[0], "member": int(mie(pool)[1])},
    }
    _write_json(os.path.join(args.out, "selection_report.json"), report)
    print(
        f"stored {mid}: {best.provenance['strategy']}/{best.scheme} "
        f"size {best.size}, validation error {best.provenance['validation_error']:.4f}"
    )
    return 0


def cmd_eval(args):
    doc, pool = _read_pool(args.pool)
    store_dir = args.store or os.path.join(args.out, "store")
    record = load_model(store_dir, args.model)
    truth = pool.val_truth

    mie_value, mie_idx = mie(pool)
    member_preds = pool.val_classes[mie_idx]
    ds = _load_dataset(doc["data"], doc["schema"])
    val_idx = np.asarray(doc["split"]["validation"])
    ens_preds, _ = record.ensemble.predict(ds.X[val_idx])

    ens_report = rates(confusion(truth, ens_preds))
    member_report = rates(confusion(truth, member_preds))
    try:
        u, reject = mcnemar_u(truth, ens_preds, member_preds)
        mcnemar = {"u": u, "reject_at_5pct": reject}
    except ValueError as exc:
        mcnemar = {"u": None, "note": str(exc)}

    report = {
        "model_id": args.model,
        "ensemble": ens_report.to_dict(),
        "best_member": {"index": int(mie_idx), "family": pool.families[mie_idx], **member_report.to_dict()},
        "mcnemar_vs_best_member": mcnemar,
        "validation_size": int(len(truth)),
    }
    _write_json(os.path.join(args.out, "eval_report.json"), report)
    tables = [
        render_rates_table(
            [
                (f"ensemble ({record.ensemble.scheme})", ens_report, mcnemar.get("u")),
                (f"best member ({pool.families[mie_idx]})", member_report, None),
            ]
        ),
        "",
        render_confusion_table("ensemble", ens_report.cm),
        "",
        render_confusion_table("best member", member_report.cm),
    ]
    _write_text(os.path.join(args.out, "eval_tables.txt"), "\n".join(tables))
    print(f"ensemble S01 {ens_report.s01:.4f} vs best member {member_report.s01:.4f}")
    return 0


def cmd_crossval(args):
    config = _load_config(args.config)
    ds = _load_dataset(args.data, args.schema)

    def trainer(view, seed):
        if args.family == "mlp":
            inner = holdout_split(view.n, 0.8, seed)
            fit_view = DataView(X=view.X[inner.train], y=view.y[inner.train])
            prune_view = DataView(X=view.X[inner.validation], y=view.y[inner.validation])
            return train_family("mlp", fit_view, seed, config=config, val_view=prune_view)
        return train_family(args.family, view, seed, config=config)

    report = crossval(ds, trainer, args.k, args.seed)
    _write_json(os.path.join(args.out, "crossval.json"), report.to_dict(), canonical=False)
    from .evaluation import render_crossval_table

    _write_text(os.path.join(args.out, "crossval_table.txt"), render_crossval_table([(args.family, report)]))
    agg = report.aggregates
    print(
        f"{args.family} {args.k}-fold: S01 {agg['s01']['mean']:.4f} +- {agg['s01']['std']:.4f}"
    )
    return 0


def cmd_doe(args):
    store_dir = args.store or os.path.join(args.out, "store")
    record = load_model(store_dir, args.model)
    if args.operating_point:
        with open(args.operating_point, "r", encoding="utf-8") as fh:
            op = OperatingPoint(values=json.load(fh)).validate(record.encoder.schema)
    else:
        if not (args.data and args.schema):
            raise ValueError("doe needs either --operating-point or --data/--schema for the default one")
        ds = _load_dataset(args.data, args.schema)
        op = default_operating_point(ds)
    plan = build_plan(record.encoder.schema, op, args.levels)
    incidence = simulate_plan(record.ensemble, plan, op, record.encoder)
    env = envelope(factor_effects(incidence, plan))
    doc = {
        "model_id": args.model,
        "operating_point": op.to_dict(),
        "levels": args.levels,
        "runs": plan.n_runs,
        "members": record.ensemble.size,
        "envelope": env.to_dict(),
    }
    _write_json(os.path.join(args.out, "doe.json"), doc)
    _write_json(os.path.join(args.out, "envelope_plot.json"), envelope_plot_data(env))
    env_dict = doc["envelope"]
    recommended = {
        f.name: env_dict[f.name]["interval"] or env_dict[f.name]["recommended_levels"]
        for f in plan.factors
    }
    print(f"{plan.n_runs} runs x {record.ensemble.size} members; recommended: {recommended}")
    return 0


def cmd_serve(args):
    from .service import serve

    store_dir = args.store or os.path.join(args.out, "store")
    serve(store_dir, bind=args.bind)
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="qualmon", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for this stage")
    common.add_argument("--config", default=None, help="JSON file with training hyperparameters")
    common.add_argument("--out", default=".", help="artifact output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="emit a synthetic CSV + schema pair")
    p.add_argument("--n", type=int, default=2270)
    p.add_argument("--rate", type=float, default=0.12, help="target defect rate")
    p.add_argument("--schema", default=None, help="schema JSON to generate for (default: built-in)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pool", parents=[common], help="train bagged classifier pools")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--families", default="tree,knn,mlp,svm")
    p.add_argument("--count", type=int, default=25, help="members per family")
    p.add_argument("--fraction", type=float, default=DEFAULT_FRACTION)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("select", parents=[common], help="build and store the best ensemble")
    p.add_argument("--pool", required=True, help="pool.json from the pool stage")
    p.add_argument("--strategy", choices=["accuracy", "sad", "all"], default="all")
    p.add_argument("--fusion", choices=["vote", "mean", "trained", "all"], default="all")
    p.add_argument("--initial-size", type=int, default=3, help="seed size for sad selection")
    p.add_argument("--name", default="synthetic-defect", help="defect-type name for the store")
    p.add_argument("--store", default=None, help="model store directory (default OUT/store)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", parents=[common], help="holdout rates + McNemar vs best member")
    p.add_argument("--pool", required=True)
    p.add_argument("--model", required=True, help="store id of the ensemble")
    p.add_argument("--store", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("crossval", parents=[common], help="stratified k-fold report for one family")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--family", choices=["tree", "knn", "mlp", "svm"], required=True)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("doe", parents=[common], help="full-factorial envelope over controllables")
    p.add_argument("--model", required=True)
    p.add_argument("--store", default=None)
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--operating-point", default=None, help="JSON file of uncontrollable values")
    p.add_argument("--data", default=None, help="dataset for the default operating point")
    p.add_argument("--schema", default=None)
    p.set_defaults(func=cmd_doe)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP prediction service")
    p.add_argument("--store", default=None)
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
