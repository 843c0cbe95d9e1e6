"""Render harness CSV outputs to image files with testable JSON sidecars.

Kinds:

* ``regret_curves``: per-policy mean cumulative regret with a standard
  error band, from trace CSVs named ``<label>_seed<k>.csv`` (columns
  round, action, loss_or_reward, cum_regret),
* ``effdim_vs_T``: effective dimension as a function of time, from CSVs
  with columns ``T, d``,
* ``regret_vs_param``: bar chart keyed by a parameter (e.g. rho), from a
  CSV with columns ``param, regret``.

Every image gets a ``<image>.json`` sidecar holding the plotted
aggregates, so figures are testable without image diffing.  Rendering is
read-only over its inputs.
"""

import argparse
import csv
import json
import os
import re
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("regret_curves", "effdim_vs_T", "regret_vs_param")
_SEED_RE = re.compile(r"^(?P<label>.+)_seed\d+$")


class SchemaError(ValueError):
    pass


def _read_csv(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaError(f"{path}: missing required column {column!r}")
        return list(reader)


def _label_of(path):
    stem = os.path.splitext(os.path.basename(path))[0]
    match = _SEED_RE.match(stem)
    return match.group("label") if match else stem


def _stderr(values):
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(len(values)))


def _render_regret_curves(inputs, ax):
    by_label = defaultdict(list)
    for path in inputs:
        rows = _read_csv(path, required=("round", "cum_regret"))
        curve = np.array([float(r["cum_regret"]) for r in rows])
        by_label[_label_of(path)].append(curve)
    series = {}
    for label in sorted(by_label):
        curves = np.vstack(by_label[label])
        rounds = np.arange(1, curves.shape[1] + 1)
        mean = curves.mean(axis=0)
        band = curves.std(axis=0, ddof=1) / np.sqrt(len(curves)) if len(curves) > 1 else np.zeros_like(mean)
        ax.plot(rounds, mean, label=f"{label} (n={len(curves)})")
        if len(curves) > 1:
            ax.fill_between(rounds, mean - band, mean + band, alpha=0.25)
        series[label] = {
            "seeds": len(curves),
            "T": int(curves.shape[1]),
            "mean_final_regret": repr(float(curves[:, -1].mean())),
            "stderr": repr(_stderr(curves[:, -1])),
        }
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    return {"series": series}


def _render_effdim(inputs, ax):
    series = {}
    for path in inputs:
        rows = _read_csv(path, required=("T", "d"))
        ts = [float(r["T"]) for r in rows]
        ds = [float(r["d"]) for r in rows]
        label = _label_of(path)
        ax.plot(ts, ds, marker="o", label=label)
        series[label] = {"T": ts, "d": ds}
    ax.set_xscale("log")
    ax.set_xlabel("time horizon T")
    ax.set_ylabel("effective dimension")
    ax.legend()
    return {"series": series}


def _render_regret_vs_param(inputs, ax):
    bars = {}
    for path in inputs:
        rows = _read_csv(path, required=("param", "regret"))
        for r in rows:
            bars[r["param"]] = float(r["regret"])
    keys = list(bars)
    ax.bar(range(len(keys)), [bars[k] for k in keys])
    ax.set_xticks(range(len(keys)), keys)
    ax.set_xlabel("parameter")
    ax.set_ylabel("regret")
    return {"bars": {k: repr(v) for k, v in bars.items()}}


def render(kind, inputs, out_path):
    """Render `inputs` to `out_path` and write the sidecar JSON.

    Returns the sidecar dictionary.
    """
    if kind not in KINDS:
        raise SchemaError(f"unknown plot kind {kind!r}; valid: {KINDS}")
    for path in inputs:
        if not os.path.exists(path):
            raise SchemaError(f"input {path} does not exist")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    try:
        if kind == "regret_curves":
            payload = _render_regret_curves(inputs, ax)
        elif kind == "effdim_vs_T":
            payload = _render_effdim(inputs, ax)
        else:
            payload = _render_regret_vs_param(inputs, ax)
        fig.tight_layout()
        fig.savefig(out_path, dpi=120)
    finally:
        plt.close(fig)
    sidecar = {"kind": kind, "inputs": [os.path.basename(p) for p in sorted(inputs)]}
    sidecar.update(payload)
    with open(out_path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def main(argv=None):
    parser = argparse.ArgumentParser(prog="render", description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="CSV")
    parser.add_argument("--out", required=True, metavar="PNG")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.inputs, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
