"""Command-line entry point: ``ccguide {gen,train,eval,cca-fit}``.

Every flag has a config-file twin: ``--config run.json`` may set any option
by its long name (``batch_size`` or ``batch-size``), and flags given on the
command line win over the file. ``CCGUIDE_SEED`` supplies the default seed.

Exit codes: 0 success, 2 invalid input, 3 training divergence, 4
checkpoint or format error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import checkpoint
from .cca import fit_cca, identity_residuals
from .data import (
    gen_classification,
    gen_correlated_gaussian,
    gen_noisy_patterns,
    gen_rul_series,
    load_csv,
    load_dataset,
    save_dataset,
)
from .errors import (
    CheckpointError,
    InsufficientDataError,
    InvalidInputError,
    NumericalFailureError,
    ParseError,
    TrainingDivergedError,
)
from .model import RefreshPolicy, build_ccdnn, evaluate, train, train_dcca_reconstruction
from .nn import TrainConfig

REPORT_SCHEMA = "ccguide-report"
REPORT_VERSION = 1

KINDS = ("correlated-gaussian", "noisy-patterns", "classification", "rul-series")
TRAIN_TASKS = ("reconstruct", "classify", "rul", "dcca-baseline")
MODEL_TASK = {"reconstruct": "reconstruct", "dcca-baseline": "reconstruct",
              "classify": "classify", "rul": "regress"}
DEFAULT_KIND = {"reconstruct": "noisy-patterns", "dcca-baseline": "noisy-patterns",
                "classify": "classification", "rul": "rul-series"}

GEN_DEFAULTS = {
    "n": 2000, "rho": "0.9,0.5", "dim": None, "side": 8, "noise": 1.0,
    "classes": 5, "dims": "16,16", "units": 100, "window": 16, "train_ratio": None,
}
RUN_DEFAULTS = {
    "blocks": 1, "latent": "8", "activation": "tanh", "recon_activation": "identity",
    "without_filter": False, "plain": False, "refresh": "per_epoch", "refresh_k": 1,
    "reference_size": 2048, "absolute_reg": False, "dcca_reg": 1e-2,
    "epochs": 100, "batch_size": 256, "lr": 1e-3, "momentum": 0.9,
}
# settings that worked at desk scale for each task
TASK_DEFAULTS = {
    "reconstruct": {"epochs": 10, "enc_hidden": "64", "head_hidden": "64",
                    "recon_activation": "sigmoid", "reg": 0.1},
    "dcca-baseline": {"epochs": 10, "enc_hidden": "64", "head_hidden": "64",
                      "recon_activation": "sigmoid", "reg": 0.1},
    "classify": {"batch_size": 64, "lr": 1e-2, "enc_hidden": "32", "head_hidden": "32",
                 "reg": 0.1},
    "rul": {"lr": 3e-6, "enc_hidden": "32", "head_hidden": "32", "reg": 1.0},
}


class UsageError(InvalidInputError):
    pass


# --------------------------------------------------------------- parsing

def _ints(text, name):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    elif isinstance(text, int):
        vals = [text]
    else:
        vals = [v for v in str(text).split(",") if v.strip()]
    try:
        return [int(v) for v in vals]
    except (TypeError, ValueError):
        raise UsageError(f"--{name} expects comma-separated integers, got {text!r}") from None


def _floats(text, name):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    elif isinstance(text, (int, float)):
        vals = [text]
    else:
        vals = [v for v in str(text).split(",") if v.strip()]
    try:
        return [float(v) for v in vals]
    except (TypeError, ValueError):
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _strs(text):
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _add_data_args(p):
    g = p.add_argument_group("dataset (one source)")
    g.add_argument("--data", help="directory written by `gen`")
    g.add_argument("--csv", help="headered CSV, rows are samples")
    g.add_argument("--view1-cols", help="comma-separated CSV columns for view 1")
    g.add_argument("--view2-cols", help="comma-separated CSV columns for view 2")
    g.add_argument("--target-cols", help="comma-separated CSV target columns")
    _add_gen_args(g)


def _add_gen_args(g):
    g.add_argument("--kind", choices=KINDS, help="synthetic generator")
    g.add_argument("--n", type=int, help="samples (default 2000)")
    g.add_argument("--rho", help="canonical correlations, e.g. 0.9,0.5")
    g.add_argument("--dim", type=int, help="view width for correlated-gaussian")
    g.add_argument("--side", type=int, help="glyph side length (default 8)")
    g.add_argument("--noise", type=float, help="noise amplitude (default 1.0)")
    g.add_argument("--classes", type=int, help="class count (default 5)")
    g.add_argument("--dims", help="view widths for classification, e.g. 16,16")
    g.add_argument("--units", type=int, help="units for rul-series (default 100)")
    g.add_argument("--window", type=int, help="window length for rul-series (default 16)")
    g.add_argument("--train-ratio", type=float, help="fraction of samples in the train split")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ccguide",
        description="Canonical-correlation guided two-view networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic dataset",
                       description="Write view1.csv, view2.csv, target.csv and dataset.json.")
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--seed", type=int, help="RNG seed (default $CCGUIDE_SEED or 0)")
    p.add_argument("--out", help="output directory")
    _add_gen_args(p)

    p = sub.add_parser("train", help="train a model, write checkpoint and report",
                       description="Train on a dataset and write checkpoint.json and report.json.")
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--task", choices=TRAIN_TASKS)
    p.add_argument("--seed", type=int, help="RNG seed (default $CCGUIDE_SEED or 0)")
    p.add_argument("--out", help="output directory")
    _add_data_args(p)
    g = p.add_argument_group("model")
    g.add_argument("--latent", help="latent widths l,m (one value for both)")
    g.add_argument("--enc-hidden", help="encoder hidden widths, e.g. 64 or 64,32")
    g.add_argument("--head-hidden", help="head/decoder hidden widths")
    g.add_argument("--blocks", type=int, help="stacked CCDNN blocks (default 1)")
    g.add_argument("--activation", choices=("tanh", "relu", "sigmoid"))
    g.add_argument("--recon-activation", choices=("identity", "sigmoid", "tanh", "relu"))
    g.add_argument("--without-filter", action="store_true", default=None,
                   help="CCDNN_wRF ablation: drop the redundancy filter")
    g.add_argument("--plain", action="store_true", default=None,
                   help="no CCA or filter layers at all")
    g = p.add_argument_group("training")
    g.add_argument("--epochs", type=int)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--lr", type=float, help="learning rate")
    g.add_argument("--momentum", type=float)
    g = p.add_argument_group("CCA refresh")
    g.add_argument("--refresh", choices=("per_epoch", "per_k_batches"))
    g.add_argument("--refresh-k", type=int)
    g.add_argument("--reference-size", type=int)
    g.add_argument("--reg", type=float, help="CCA ridge (relative to feature variance)")
    g.add_argument("--absolute-reg", action="store_true", default=None,
                   help="use --reg as an absolute ridge")
    g.add_argument("--dcca-reg", type=float, help="ridge of the DCCA baseline objective")

    p = sub.add_parser("eval", help="evaluate a checkpoint",
                       description="Evaluate a checkpoint; defaults to its training dataset.")
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--checkpoint", help="checkpoint.json written by `train`")
    p.add_argument("--split", choices=("test", "train", "all"))
    p.add_argument("--seed", type=int, help="seed for generated datasets")
    p.add_argument("--out", help="write metrics JSON here as well")
    _add_data_args(p)

    p = sub.add_parser("cca-fit", help="fit linear CCA between the two views",
                       description="Fit CCA and report rho, kappa and identity residuals.")
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--reg", type=float, help="ridge added to both covariances (default 1e-8)")
    p.add_argument("--rank-tol", type=float, help="rank tolerance (default 1e-6)")
    p.add_argument("--split", choices=("all", "train", "test"))
    p.add_argument("--seed", type=int, help="seed for generated datasets")
    p.add_argument("--out", help="write the report JSON here as well")
    _add_data_args(p)
    return parser


def resolve(args, environ=None):
    """Merge defaults, config file, environment and flags into one dict."""
    environ = os.environ if environ is None else environ
    given = {k: v for k, v in vars(args).items() if v is not None}
    command = given.pop("command")
    from_file = {}
    if "config" in given:
        path = given.pop("config")
        try:
            with open(path, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(from_file, dict):
            raise UsageError(f"config file {path} must hold a JSON object")
        from_file = {k.replace("-", "_"): v for k, v in from_file.items()}
        known = set(vars(args)) - {"command", "config"}
        unknown = sorted(set(from_file) - known)
        if unknown:
            raise UsageError(f"unknown option(s) in {path}: {', '.join(unknown)}")
    cfg = dict(GEN_DEFAULTS)
    if command == "train":
        cfg.update(RUN_DEFAULTS)
        task = given.get("task", from_file.get("task"))
        if task is None:
            raise UsageError("train needs --task")
        if task not in TRAIN_TASKS:
            raise UsageError(f"--task must be one of {TRAIN_TASKS}, got {task!r}")
        cfg.update(TASK_DEFAULTS[task])
    if command == "cca-fit":
        cfg.update({"reg": 1e-8, "rank_tol": 1e-6, "split": "all"})
    if command == "eval":
        cfg["split"] = "test"
    env_seed = environ.get("CCGUIDE_SEED")
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"CCGUIDE_SEED must be an integer, got {env_seed!r}") from None
    else:
        cfg["seed"] = 0
    cfg.update(from_file)
    cfg.update(given)
    cfg["command"] = command
    return cfg


# --------------------------------------------------------------- datasets

def _generate(cfg, kind):
    seed = int(cfg["seed"])
    ratio = {} if cfg.get("train_ratio") is None else {"train_ratio": float(cfg["train_ratio"])}
    if kind == "correlated-gaussian":
        rho = _floats(cfg["rho"], "rho")
        dim = len(rho) if cfg.get("dim") is None else int(cfg["dim"])
        params = {"n": int(cfg["n"]), "dim": dim, "rho": rho}
        ds = gen_correlated_gaussian(seed=seed, **params, **ratio)
    elif kind == "noisy-patterns":
        params = {"n": int(cfg["n"]), "side": int(cfg["side"]), "noise": float(cfg["noise"])}
        ds = gen_noisy_patterns(seed=seed, **params, **ratio)
    elif kind == "classification":
        params = {"n": int(cfg["n"]), "classes": int(cfg["classes"]),
                  "dims": tuple(_ints(cfg["dims"], "dims")), "noise": float(cfg["noise"])}
        if len(params["dims"]) != 2:
            raise UsageError("--dims needs two widths, e.g. 16,16")
        ds = gen_classification(seed=seed, **params, **ratio)
    elif kind == "rul-series":
        params = {"n_units": int(cfg["units"]), "window": int(cfg["window"])}
        ds = gen_rul_series(seed=seed, **params, **ratio)
    else:
        raise UsageError(f"--kind must be one of {KINDS}, got {kind!r}")
    params.update(ratio)
    return ds, params


def load_data(cfg, default_kind=None):
    """Dataset named by ``cfg`` plus a JSON-ready description of it."""
    sources = [k for k in ("data", "csv", "kind") if cfg.get(k) is not None]
    if len(sources) > 1:
        raise UsageError(f"give one dataset source, got {', '.join('--' + s for s in sources)}")
    if cfg.get("data") is not None:
        path = cfg["data"]
        if not os.path.isdir(path):
            raise UsageError(f"--data directory not found: {path}")
        return load_dataset(path), {"data": os.path.abspath(path)}
    if cfg.get("csv") is not None:
        path = cfg["csv"]
        if not os.path.isfile(path):
            raise UsageError(f"--csv file not found: {path}")
        if cfg.get("view1_cols") is None or cfg.get("view2_cols") is None:
            raise UsageError("--csv needs --view1-cols and --view2-cols")
        v1, v2 = _strs(cfg["view1_cols"]), _strs(cfg["view2_cols"])
        tc = _strs(cfg["target_cols"]) if cfg.get("target_cols") is not None else None
        ratio = 0.8 if cfg.get("train_ratio") is None else float(cfg["train_ratio"])
        ds = load_csv(path, v1, v2, tc, train_ratio=ratio, seed=int(cfg["seed"]))
        desc = {"csv": os.path.abspath(path), "view1_cols": v1, "view2_cols": v2,
                "target_cols": tc, "train_ratio": ratio, "seed": int(cfg["seed"])}
        return ds, desc
    kind = cfg.get("kind") or default_kind
    if kind is None:
        raise UsageError("no dataset: give --data, --csv or --kind")
    ds, params = _generate(cfg, kind)
    return ds, {"kind": kind, "seed": int(cfg["seed"]), "params": params}


def _data_from_desc(desc):
    if "data" in desc:
        return load_dataset(desc["data"])
    if "csv" in desc:
        return load_csv(desc["csv"], desc["view1_cols"], desc["view2_cols"], desc["target_cols"],
                        train_ratio=desc["train_ratio"], seed=desc["seed"])
    fn = {"correlated-gaussian": gen_correlated_gaussian, "noisy-patterns": gen_noisy_patterns,
          "classification": gen_classification, "rul-series": gen_rul_series}[desc["kind"]]
    params = dict(desc["params"])
    if "dims" in params:
        params["dims"] = tuple(params["dims"])
    return fn(seed=desc["seed"], **params)


def _split(ds, which):
    if which == "train":
        return ds.train()
    if which == "test":
        if ds.test_idx.size == 0:
            raise InsufficientDataError("dataset has an empty test split")
        return ds.test()
    return ds


# --------------------------------------------------------------- commands

def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def cmd_gen(cfg):
    if cfg.get("kind") is None:
        raise UsageError("gen needs --kind")
    if cfg.get("out") is None:
        raise UsageError("gen needs --out")
    ds, params = _generate(cfg, cfg["kind"])
    try:
        save_dataset(ds, cfg["out"], generator=cfg["kind"], params=params)
    except OSError as exc:
        raise UsageError(f"cannot write dataset to {cfg['out']}: {exc.strerror or exc}") from None
    print(f"wrote {ds.n} samples ({ds.dims[0]}+{ds.dims[1]} columns) to {cfg['out']}")
    return 0


def _build_model(cfg, ds):
    task = MODEL_TASK[cfg["task"]]
    latent = _ints(cfg["latent"], "latent")
    if len(latent) == 1:
        latent = latent * 2
    if len(latent) != 2:
        raise UsageError("--latent takes one or two widths")
    out_dim = None
    tmean = tstd = None
    if task != "reconstruct":
        if ds.target is None:
            raise UsageError(f"task {cfg['task']!r} needs targets")
        out_dim = ds.target.shape[0]
    if task == "regress":
        tr = ds.train().target
        tmean, tstd = tr.mean(axis=1), tr.std(axis=1)
        tstd = np.where(tstd > 0, tstd, 1.0)
    dcca = cfg["task"] == "dcca-baseline"
    return build_ccdnn(
        task, ds.dims, latent=tuple(latent),
        enc_hidden=tuple(_ints(cfg["enc_hidden"], "enc-hidden")),
        head_hidden=tuple(_ints(cfg["head_hidden"], "head-hidden")),
        out_dim=out_dim, n_blocks=int(cfg["blocks"]), seed=int(cfg["seed"]),
        use_filter=not cfg["without_filter"], constrained=not (cfg["plain"] or dcca),
        activation=cfg["activation"], recon_activation=cfg["recon_activation"],
        target_mean=tmean, target_std=tstd,
    )


def _run_config(cfg, data_desc):
    keys = ("task", "seed", "latent", "enc_hidden", "head_hidden", "blocks", "activation",
            "recon_activation", "without_filter", "plain", "epochs", "batch_size", "lr",
            "momentum", "refresh", "refresh_k", "reference_size", "reg", "absolute_reg",
            "dcca_reg")
    out = {k: cfg.get(k) for k in keys}
    out["dataset"] = data_desc
    return out


def cmd_train(cfg):
    if cfg.get("out") is None:
        raise UsageError("train needs --out")
    ds, desc = load_data(cfg, DEFAULT_KIND[cfg["task"]])
    model = _build_model(cfg, ds)
    tcfg = TrainConfig(epochs=int(cfg["epochs"]), batch_size=int(cfg["batch_size"]),
                       learning_rate=float(cfg["lr"]), seed=int(cfg["seed"]),
                       momentum=float(cfg["momentum"]))
    policy = RefreshPolicy(mode=cfg["refresh"], k=int(cfg["refresh_k"]),
                           reference_sample_size=int(cfg["reference_size"]),
                           reg=float(cfg["reg"]), relative_reg=not cfg["absolute_reg"])
    run = _run_config(cfg, desc)
    label = "DCCA" if cfg["task"] == "dcca-baseline" else model.label
    try:
        os.makedirs(cfg["out"], exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {cfg['out']}: {exc.strerror or exc}") from None
    report_path = os.path.join(cfg["out"], "report.json")
    doc = {"schema": REPORT_SCHEMA, "version": REPORT_VERSION, "label": label,
           "task": cfg["task"], "config": run, "parameter_count": model.parameter_count}
    try:
        if cfg["task"] == "dcca-baseline":
            rep = train_dcca_reconstruction(model, ds, tcfg, reg=float(cfg["dcca_reg"]))
        else:
            rep = train(model, ds, tcfg, policy)
    except TrainingDivergedError as exc:
        doc["epochs"] = exc.report.epochs if exc.report is not None else []
        doc["diverged_at_epoch"] = exc.epoch
        doc["final"] = None
        _write_json(report_path, doc)
        raise
    doc["epochs"] = rep.epochs
    doc["final"] = {"test": evaluate(model, ds.test()) if ds.test_idx.size else None}
    checkpoint.save(model, os.path.join(cfg["out"], "checkpoint.json"), seed=int(cfg["seed"]),
                    epochs=int(cfg["epochs"]), extra={"label": label, "run": run})
    _write_json(report_path, doc)
    fin = doc["final"]["test"]
    shown = ", ".join(f"{k}={v:.6g}" for k, v in sorted((fin or {}).items()))
    print(f"{label} {cfg['task']}: {len(rep.epochs)} epochs; test {shown or 'n/a'}")
    return 0


def cmd_eval(cfg):
    path = cfg.get("checkpoint")
    if path is None:
        raise UsageError("eval needs --checkpoint")
    if not os.path.isfile(path):
        raise UsageError(f"checkpoint not found: {path}")
    model, env = checkpoint.load(path)
    if any(cfg.get(k) is not None for k in ("data", "csv", "kind")):
        ds, desc = load_data(cfg)
    else:
        try:
            desc = env["extra"]["run"]["dataset"]
        except (KeyError, TypeError):
            raise UsageError("checkpoint records no dataset; pass --data, --csv or --kind") from None
        ds = _data_from_desc(desc)
    if model.task != "reconstruct" and ds.target is None:
        raise UsageError(f"{model.task} checkpoint needs a dataset with targets")
    part = _split(ds, cfg["split"])
    doc = {"checkpoint": os.path.abspath(path), "label": env.get("extra", {}).get("label", model.label),
           "task": model.task, "split": cfg["split"], "dataset": desc,
           "metrics": evaluate(model, part)}
    if cfg.get("out"):
        _write_json(cfg["out"], doc)
    print(json.dumps(doc["metrics"], sort_keys=True))
    return 0


def cmd_cca_fit(cfg):
    ds, desc = load_data(cfg)
    part = _split(ds, cfg["split"])
    res = fit_cca(part.x1, part.x2, reg=float(cfg["reg"]), rank_tol=float(cfg["rank_tol"]))
    doc = {"dataset": desc, "split": cfg["split"], "n": part.n, "dims": list(part.dims),
           "reg": res.reg, "rank_tol": float(cfg["rank_tol"]), "rho": res.rho.tolist(),
           "kappa": res.kappa, "identity_residuals": identity_residuals(res)}
    if cfg.get("out"):
        _write_json(cfg["out"], doc)
    print(json.dumps(doc, sort_keys=True))
    return 0


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "eval": cmd_eval, "cca-fit": cmd_cca_fit}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[cfg["command"]](cfg)
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (InvalidInputError, InsufficientDataError, ParseError, NumericalFailureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
