"""Command line front end: ``dcelm {synth,extract,train,eval,bench}``.

Every subcommand accepts ``--config FILE`` (a JSON object whose keys are the
long option names with dashes replaced by underscores); explicit flags win over
the file. The merged configuration is echoed into every JSON document written,
and wall-clock timings go to separate ``*.timing.json`` files so that numeric
outputs are byte-identical across reruns.

Exit codes: 0 success, 2 usage or validation error, 3 data error, 4 numeric failure.

Output files
------------
extract   FEATURES (magic ``DCEF``, u32 rows, u32 cols, little-endian f64 row-major)
          FEATURES.json  records (path, label, raw_label, split, augmented) and config
train     MODEL.json     detector, training trace and config
eval      report.json    config, AUC, per-threshold confusion/rates/intervals
          rates.csv      threshold,tp,fn,fp,tn,sensitivity,sensitivity_ci,
                         specificity,specificity_ci,precision,accuracy,accuracy_ci,f1
          roc.csv        threshold,fpr,tpr
          pr.csv         threshold,recall,precision
          epg.csv        index,label,raw_label,epg
          epg_hist.csv   bin_lo,bin_hi,<one count column per raw label>
bench     results.json   per-optimizer final losses and traces, p-value matrix
          pvalues.csv    rank-sum p-values, optimizers x optimizers
"""

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, choa, data, elm, features, metrics, pipeline
from .chaos import ChaoticMap
from .core import OptimizerConfig, SearchSpace
from .errors import DcelmError, InvalidInputError, LoadError, NumericError
from .functions import FUNCTIONS

FORMAT_VERSION = 1
EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4

DEFAULTS = {
    "synth": {"n_train": 200, "n_test": 200, "seed": 0},
    "extract": {"structure": "in_6c_2p_12c_2p", "weights": None, "weights_seed": None,
                "save_weights": None, "size": 32, "augment": False, "augment_seed": 0},
    "train": {"optimizer": "choa", "choa_strategy": "choa2", "chaos_map": "gauss",
              "pop": 50, "iters": 10, "seed": 0, "hidden": 120, "weight_bound": 1.0,
              "target_loss": None, "jobs": 1, "split": "train"},
    "eval": {"thresholds": "0.1,0.2,0.3,0.4", "split": "test", "ci_z": 1.96, "bins": 20},
    "bench": {"function": "sphere", "dim": 5, "optimizers": "choa1,choa2,ga,cs,woa",
              "seeds": 10, "pop": 50, "iters": 200, "chaos_map": "gauss", "jobs": 1},
}
REQUIRED = {
    "synth": ("out",),
    "extract": ("manifest", "out"),
    "train": ("features", "out"),
    "eval": ("model", "features", "out"),
    "bench": ("out",),
}


def build_parser():
    p = argparse.ArgumentParser(prog="dcelm", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog=__doc__.split("Output files\n------------\n")[1])
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    s = sub.add_parser("synth", help="write the built-in synthetic two-Gaussian image dataset")
    s.add_argument("--out", default=S)
    s.add_argument("--n-train", type=int, default=S)
    s.add_argument("--n-test", type=int, default=S)
    s.add_argument("--seed", type=int, default=S)

    s = sub.add_parser("extract", help="run the frozen CNN over a manifest")
    s.add_argument("--manifest", default=S)
    s.add_argument("--structure", default=S, help="e.g. in_6c_2p_12c_2p")
    s.add_argument("--weights", default=S, help="JSON weight file")
    s.add_argument("--weights-seed", type=int, default=S, help="seed for random frozen weights")
    s.add_argument("--save-weights", default=S, help="also write the weights used to this file")
    s.add_argument("--size", type=int, default=S, help="resize side length (default 32)")
    s.add_argument("--augment", action="store_true", default=S,
                   help="x5 augmentation of positive training images")
    s.add_argument("--augment-seed", type=int, default=S)
    s.add_argument("--out", default=S)

    s = sub.add_parser("train", help="fit an (optionally optimized) ELM on cached features")
    s.add_argument("--features", default=S)
    s.add_argument("--optimizer", choices=pipeline.OPTIMIZERS, default=S)
    s.add_argument("--choa-strategy", choices=[m.value for m in choa.Strategy], default=S)
    s.add_argument("--chaos-map", choices=[m.value for m in ChaoticMap], default=S)
    s.add_argument("--pop", type=int, default=S)
    s.add_argument("--iters", type=int, default=S)
    s.add_argument("--seed", type=int, default=S)
    s.add_argument("--hidden", type=int, default=S, help="hidden neurons (default 120)")
    s.add_argument("--weight-bound", type=float, default=S, help="search box [-B, B] for W, b")
    s.add_argument("--target-loss", type=float, default=S)
    s.add_argument("--jobs", type=int, default=S, help="threads for fitness evaluation")
    s.add_argument("--split", choices=sorted(data.SPLITS), default=S)
    s.add_argument("--out", default=S)

    s = sub.add_parser("eval", help="score a detector: rates, intervals, ROC/PR, EPG histograms")
    s.add_argument("--model", default=S)
    s.add_argument("--features", default=S)
    s.add_argument("--thresholds", default=S, help="comma separated, default 0.1,0.2,0.3,0.4")
    s.add_argument("--split", choices=sorted(data.SPLITS), default=S)
    s.add_argument("--ci-z", type=float, default=S, help="interval multiplier (1.96 = 95%%)")
    s.add_argument("--bins", type=int, default=S)
    s.add_argument("--out", default=S)

    s = sub.add_parser("bench", help="compare optimizers on an analytic function")
    s.add_argument("--function", choices=sorted(FUNCTIONS), default=S)
    s.add_argument("--dim", type=int, default=S)
    s.add_argument("--optimizers", default=S, help="comma separated from choa1,choa2,ga,cs,woa")
    s.add_argument("--seeds", type=int, default=S)
    s.add_argument("--pop", type=int, default=S)
    s.add_argument("--iters", type=int, default=S)
    s.add_argument("--chaos-map", choices=[m.value for m in ChaoticMap], default=S)
    s.add_argument("--jobs", type=int, default=S)
    s.add_argument("--out", default=S)

    for name, sp in sub.choices.items():
        sp.add_argument("--config", default=None, help="JSON file of option values")
    return p


def resolve_config(command, args):
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc}") from exc
        # configs echoed inside output documents are accepted as well
        loaded = loaded.get("config", loaded)
        unknown = set(loaded) - set(cfg) - set(REQUIRED[command]) - {"command"}
        if unknown:
            raise InvalidInputError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
        cfg.update({k: v for k, v in loaded.items() if k != "command"})
    cfg.update({k: v for k, v in vars(args).items() if k not in ("command", "config")})
    missing = [k for k in REQUIRED[command] if cfg.get(k) is None]
    if missing:
        raise InvalidInputError(f"{command}: missing required option(s): "
                                + ", ".join("--" + k.replace("_", "-") for k in missing))
    return cfg


def dump_json(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    data.atomic_write(path, buf.getvalue())


def _fmt(v):
    return "" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) else v


def cmd_synth(cfg):
    manifest = data.make_synthetic(cfg["out"], cfg["n_train"], cfg["n_test"], cfg["seed"])
    print(f"wrote {manifest}")


def cmd_extract(cfg):
    spec = features.parse_structure(cfg["structure"], (1, cfg["size"], cfg["size"]))
    if (cfg["weights"] is None) == (cfg["weights_seed"] is None):
        raise InvalidInputError("give exactly one of --weights or --weights-seed")
    store = features.frozen_weights(spec, seed=cfg["weights_seed"], path=cfg["weights"])
    if cfg["save_weights"]:
        data.atomic_write(cfg["save_weights"], json.dumps(store.to_dict(spec)))
    records = data.load_manifest(cfg["manifest"])
    images, meta = [], []
    for i, r in enumerate(records):
        img = data.resize_bilinear(data.load_image(r.path), cfg["size"], cfg["size"])
        variants = [img]
        if cfg["augment"] and r.split == "train" and r.label == 1:
            variants = data.augment(img, cfg["augment_seed"] + i)
        for k, v in enumerate(variants):
            images.append(v)
            meta.append({"path": r.path, "label": r.label, "raw_label": r.raw_label,
                         "split": r.split, "augmented": k})
    F = features.extract_batch(np.stack(images), spec, store)
    data.write_features(cfg["out"], F)
    side = {"format_version": FORMAT_VERSION, "config": cfg, "structure_string": spec.structure,
            "feature_dim": spec.feature_dim, "records": meta}
    data.atomic_write(cfg["out"] + ".json", dump_json(side))
    print(f"wrote {F.shape[0]} x {F.shape[1]} features to {cfg['out']}")


def load_feature_set(path, split):
    F = data.read_features(path)
    try:
        side = json.loads(Path(path + ".json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read feature sidecar {path}.json: {exc}") from exc
    recs = side.get("records", [])
    if len(recs) != F.shape[0]:
        raise LoadError(f"sidecar lists {len(recs)} records but the file has {F.shape[0]} rows")
    keep = np.array([r["split"] == split for r in recs], dtype=bool)
    if not keep.any():
        raise LoadError(f"no {split!r} records in {path}")
    labels = np.array([r["label"] for r in recs])[keep]
    raw = [r.get("raw_label", "") for r, k in zip(recs, keep) if k]
    return F[keep], labels, raw, side


def cmd_train(cfg):
    F, labels, _, side = load_feature_set(cfg["features"], cfg["split"])
    if set(np.unique(labels)) != {0, 1}:
        raise LoadError("training split must contain both classes")
    bound = float(cfg["weight_bound"])
    elm_cfg = elm.ElmConfig(F.shape[1], cfg["hidden"], 2, (-bound, bound))
    opt_cfg = OptimizerConfig(population=cfg["pop"], max_iters=cfg["iters"],
                              target_loss=cfg["target_loss"], seed=cfg["seed"],
                              chaos_map=cfg["chaos_map"], n_jobs=cfg["jobs"])
    det = pipeline.train(F, elm.one_hot(labels), cfg["optimizer"], elm_cfg, opt_cfg,
                         cfg["choa_strategy"], side.get("structure_string"),
                         {"features": side.get("config", {})})
    doc = det.to_dict()
    doc["config"] = cfg
    data.atomic_write(cfg["out"], dump_json(doc))
    data.atomic_write(cfg["out"] + ".timing.json",
                      dump_json({"train_seconds": det.elapsed, "n_samples": int(F.shape[0])}))
    print(f"final loss {det.training['final_loss']:.6g} after {det.training['iterations']} iterations")


def parse_thresholds(text):
    try:
        ths = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"bad thresholds {text!r}") from exc
    if not ths or any(not 0.0 <= t <= 1.0 for t in ths):
        raise InvalidInputError("thresholds must be a non-empty list of values in [0, 1]")
    return ths


def threshold_table(truth, epg, thresholds, z):
    rows = []
    for th in thresholds:
        cm = metrics.confusion(truth, pipeline.classify(epg, th))
        r = metrics.rates(cm)
        ci = {}
        for name, n in (("sensitivity", cm.positives), ("specificity", cm.negatives),
                        ("accuracy", cm.positives + cm.negatives)):
            ci[name] = None if r[name] is None else metrics.confidence_interval(r[name], n, z)
        rows.append({"threshold": th, "confusion": cm.to_dict(), "rates": r, "ci": ci})
    return rows


def epg_histogram(epg, raw_labels, bins):
    edges = np.linspace(0.0, 1.0, bins + 1)
    groups = sorted(set(raw_labels))
    counts = {g: np.histogram(epg[np.array(raw_labels) == g], bins=edges)[0].tolist() for g in groups}
    return edges, groups, counts


def cmd_eval(cfg):
    thresholds = parse_thresholds(cfg["thresholds"])
    try:
        doc = json.loads(Path(cfg["model"]).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read model {cfg['model']}: {exc}") from exc
    det = pipeline.TrainedDetector.from_dict(doc)
    F, truth, raw, _ = load_feature_set(cfg["features"], cfg["split"])
    t0 = time.perf_counter()
    epg = pipeline.predict_epg(det, F)
    test_seconds = time.perf_counter() - t0
    out = Path(cfg["out"])

    table = threshold_table(truth, epg, thresholds, cfg["ci_z"])
    both = len(set(truth.tolist())) == 2
    report = {"format_version": FORMAT_VERSION, "config": cfg, "model_training": det.training,
              "n_samples": int(truth.size), "n_positive": int(truth.sum()),
              "thresholds": table, "auc": metrics.roc_auc(truth, epg) if both else None,
              "files": {}}

    write_csv(out / "rates.csv",
              ["threshold", "tp", "fn", "fp", "tn", "sensitivity", "sensitivity_ci",
               "specificity", "specificity_ci", "precision", "accuracy", "accuracy_ci", "f1"],
              [[_fmt(row["threshold"]), *row["confusion"].values(),
                _fmt(row["rates"]["sensitivity"]), _fmt(row["ci"]["sensitivity"]),
                _fmt(row["rates"]["specificity"]), _fmt(row["ci"]["specificity"]),
                _fmt(row["rates"]["precision"]), _fmt(row["rates"]["accuracy"]),
                _fmt(row["ci"]["accuracy"]), _fmt(row["rates"]["f1"])] for row in table])
    report["files"]["rates"] = "rates.csv"
    if both:
        for kind, cols in (("roc", ["threshold", "fpr", "tpr"]),
                           ("pr", ["threshold", "recall", "precision"])):
            c = metrics.curve(truth, epg, kind)
            write_csv(out / f"{kind}.csv", cols, [[_fmt(v) for v in row] for row in c.rows()])
            report["files"][kind] = f"{kind}.csv"
    write_csv(out / "epg.csv", ["index", "label", "raw_label", "epg"],
              [[i, int(t), r, _fmt(e)] for i, (t, r, e) in enumerate(zip(truth, raw, epg))])
    edges, groups, counts = epg_histogram(epg, raw, cfg["bins"])
    write_csv(out / "epg_hist.csv", ["bin_lo", "bin_hi", *groups],
              [[_fmt(edges[i]), _fmt(edges[i + 1]), *(counts[g][i] for g in groups)]
               for i in range(len(edges) - 1)])
    report["files"].update({"epg": "epg.csv", "epg_hist": "epg_hist.csv", "timing": "timing.json"})
    data.atomic_write(out / "report.json", dump_json(report))
    data.atomic_write(out / "timing.json", dump_json({"test_seconds": test_seconds,
                                                      "n_samples": int(truth.size)}))
    print(f"wrote report for {truth.size} samples to {out}")


def _bench_run(name, space, objective, opt_cfg):
    if name in ("choa1", "choa2"):
        return choa.optimize(space, objective, opt_cfg, name)
    if name in ("ga", "cs", "woa"):
        return baselines.optimize(name, space, objective, opt_cfg)
    raise InvalidInputError(f"unknown optimizer {name!r} for bench")


def cmd_bench(cfg):
    names = [n.strip().lower() for n in str(cfg["optimizers"]).split(",") if n.strip()]
    if not names:
        raise InvalidInputError("no optimizers given")
    fn, (lo, hi) = FUNCTIONS[cfg["function"]]
    space = SearchSpace.box(cfg["dim"], lo, hi)
    results, timing = {}, {}
    for name in names:
        finals, traces, secs = [], [], []
        for seed in range(cfg["seeds"]):
            opt_cfg = OptimizerConfig(population=cfg["pop"], max_iters=cfg["iters"], seed=seed,
                                      chaos_map=cfg["chaos_map"], n_jobs=cfg["jobs"])
            tr = _bench_run(name, space, fn, opt_cfg)
            finals.append(tr.best_loss)
            traces.append(tr.best_losses)
            secs.append(tr.elapsed)
        results[name] = {"final_losses": finals, "median": float(np.median(finals)),
                         "evaluations": tr.evaluations, "traces": traces}
        timing[name] = {"seconds_per_run": secs}
    pmat = [[metrics.wilcoxon_rank_sum(results[a]["final_losses"], results[b]["final_losses"])["p_value"]
             for b in names] for a in names]
    out = Path(cfg["out"])
    doc = {"format_version": FORMAT_VERSION, "config": cfg, "optimizers": names,
           "results": results, "p_values": pmat}
    data.atomic_write(out / "results.json", dump_json(doc))
    write_csv(out / "pvalues.csv", ["optimizer", *names],
              [[a, *(_fmt(p) for p in row)] for a, row in zip(names, pmat)])
    data.atomic_write(out / "timing.json", dump_json(timing))
    for name in names:
        print(f"{name:6s} median final loss {results[name]['median']:.3e}")


COMMANDS = {"synth": cmd_synth, "extract": cmd_extract, "train": cmd_train,
            "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        COMMANDS[args.command](cfg)
    except (InvalidInputError, ValueError) as exc:
        print(f"dcelm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LoadError as exc:
        print(f"dcelm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"dcelm: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DcelmError as exc:
        print(f"dcelm: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
