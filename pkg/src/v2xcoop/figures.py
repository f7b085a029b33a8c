"""Frozen figure recipes and the qualitative claims checked against them.

A recipe (``recipes/figN.json``) pins every constant the figure needs: a base
configuration, one swept variable, a list of series that each override a few
fields, and the claims to check. Required claims decide the exit status;
informational ones are only reported.
"""

from __future__ import annotations

import json
import os
from importlib import resources

from .runconfig import RunConfig, render
from .runs import game_table, pep_table

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")


def load_recipe(name):
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}")
    text = resources.files("v2xcoop").joinpath("recipes", f"{name}.json").read_text()
    return json.loads(text)


def series_configs(recipe):
    base = dict(recipe["base"])
    base["sweep"] = recipe["sweep"]
    for s in recipe["series"]:
        yield s["label"], RunConfig.from_dict({**base, **s["set"]})


def run_recipe(recipe):
    """Run every series; returns ``{label: (columns, rows)}`` in recipe order."""
    table = game_table if recipe["command"] == "game" else pep_table
    out = {}
    for label, cfg in series_configs(recipe):
        columns, rows, _ = table(cfg)
        out[label] = (columns, rows)
    return out


# --- helpers for claims -----------------------------------------------------

def _column(result, label, name, model=None):
    columns, rows = result[label]
    i = columns.index(name)
    if model is None:
        return [r[i] for r in rows]
    j = columns.index("model")
    return [r[i] for r in rows if r[j] == model]


def _x(result, label, model=None):
    columns, rows = result[label]
    if model is None:
        return [r[0] for r in rows]
    j = columns.index("model")
    return [r[0] for r in rows if r[j] == model]


def _models(recipe):
    m = recipe["base"].get("model", "both")
    return ["cc", "ec"] if m == "both" else [m]


def _ordered(curves, strict_somewhere=False, tol=0.0):
    """``curves[k][i] <= curves[k+1][i]`` for all i; optionally strict at one i."""
    ok = all(a <= b + tol for lo, hi in zip(curves, curves[1:]) for a, b in zip(lo, hi))
    if strict_somewhere:
        ok = ok and all(any(a < b for a, b in zip(lo, hi)) for lo, hi in zip(curves, curves[1:]))
    return ok


def _monotone(values, increasing=True):
    pairs = list(zip(values, values[1:]))
    return all((b >= a) if increasing else (b <= a) for a, b in pairs)


# --- claims -----------------------------------------------------------------

def _claim_increasing_across_series(recipe, result, claim):
    # series are listed in increasing order of their parameter
    labels = claim.get("series", [s["label"] for s in recipe["series"]])
    details = []
    ok = True
    for m in claim.get("models", _models(recipe)):
        curves = [_column(result, lab, f"pep_{m}") for lab in labels]
        if claim.get("direction", "increasing") == "decreasing":
            curves = curves[::-1]
        good = _ordered(curves, strict_somewhere=True)
        ok &= good
        details.append(f"{m}: {'ordered' if good else 'NOT ordered'}")
    return ok, "; ".join(details)


def _claim_monotone_in_sweep(recipe, result, claim):
    ok = True
    bad = []
    inc = claim.get("direction", "increasing") == "increasing"
    for m in claim.get("models", _models(recipe)):
        for lab in [s["label"] for s in recipe["series"]]:
            if not _monotone(_column(result, lab, f"pep_{m}"), inc):
                ok = False
                bad.append(f"{lab}/{m}")
    return ok, "all curves monotone" if ok else "not monotone: " + ", ".join(bad)


def _claim_converge_at_end(recipe, result, claim):
    worst = 0.0
    for m in claim.get("models", _models(recipe)):
        last = [_column(result, s["label"], f"pep_{m}")[-1] for s in recipe["series"]]
        worst = max(worst, max(last) - min(last))
    return worst < claim["tol"], f"spread at the last sweep point {worst:.3g} (tol {claim['tol']:g})"


def _claim_model_order_at_start(recipe, result, claim):
    details = []
    ok = True
    for s in recipe["series"]:
        cc = _column(result, s["label"], "pep_cc")[0]
        ec = _column(result, s["label"], "pep_ec")[0]
        ok &= ec <= cc
        details.append(f"{s['label']}: EC {ec:.4g} vs CC {cc:.4g}")
    return ok, "; ".join(details)


def _claim_value_at(recipe, result, claim):
    xs = _x(result, claim["series"])
    i = min(range(len(xs)), key=lambda k: abs(xs[k] - claim["at"]))
    v = _column(result, claim["series"], claim["column"])[i]
    ok = abs(v - claim["expect"]) <= claim["tol"]
    return ok, f"{claim['column']} = {v:.4g} at {xs[i]:g} (reference {claim['expect']:g} +/- {claim['tol']:g})"


def _claim_utility_dominates(recipe, result, claim):
    m = claim["model"]
    lo = _column(result, claim["below"], "utility_source", m)
    hi = _column(result, claim["above"], "utility_source", m)
    ok = all(b >= a for a, b in zip(lo, hi))
    gap = min(b - a for a, b in zip(lo, hi))
    return ok, f"min U_s({claim['above']}) - U_s({claim['below']}) = {gap:.4g}"


def _db(result, label, model, idx):
    v = _column(result, label, "power_star_db", model)[idx]
    return float("-inf") if v is None else v


def _claim_power_gap(recipe, result, claim):
    m = claim["model"]
    idx = 0 if claim["where"] == "first" else -1
    gap = _db(result, claim["far"], m, idx) - _db(result, claim["near"], m, idx)
    lo, hi = claim["range"]
    ok = lo <= gap <= hi
    return ok, f"P*({claim['far']}) - P*({claim['near']}) = {gap:.3f} dB (range [{lo:g}, {hi:g}])"


def _claim_power_increasing(recipe, result, claim):
    m = claim["model"]
    bad = [s["label"] for s in recipe["series"]
           if not _monotone(_column(result, s["label"], "power_star", m))]
    return not bad, "all curves increasing" if not bad else "not increasing: " + ", ".join(bad)


CHECKS = {
    "ordered_series": _claim_increasing_across_series,
    "monotone_sweep": _claim_monotone_in_sweep,
    "converge_at_end": _claim_converge_at_end,
    "ec_below_cc_at_start": _claim_model_order_at_start,
    "value_at": _claim_value_at,
    "utility_dominates": _claim_utility_dominates,
    "power_gap_db": _claim_power_gap,
    "power_increasing": _claim_power_increasing,
}


def check_claims(recipe, result):
    """List of ``(claim, passed, detail)``."""
    return [(c, *CHECKS[c["check"]](recipe, result, c)) for c in recipe["claims"]]


def caption(recipe, checked):
    lines = [f"{recipe['figure']}: {recipe['title']}", ""]
    if recipe.get("calibration"):
        lines += ["Calibration: " + recipe["calibration"], ""]
    for claim, ok, detail in checked:
        kind = "required" if claim.get("required", True) else "informational"
        lines.append(f"[{'PASS' if ok else 'FAIL'}] ({kind}) {claim['text']} -- {detail}")
    return "\n".join(lines) + "\n"


def long_table(recipe, result):
    """Stack all series into one table with a leading ``series`` column."""
    columns = None
    rows = []
    for label, (cols, rs) in result.items():
        columns = ["series"] + cols
        rows += [[label] + r for r in rs]
    return columns, rows


def reproduce(name, out_dir, fmt="csv"):
    """Run a figure recipe, write its series and caption; return ``(caption, ok)``."""
    recipe = load_recipe(name)
    result = run_recipe(recipe)
    checked = check_claims(recipe, result)
    ok = all(passed for claim, passed, _ in checked if claim.get("required", True))
    columns, rows = long_table(recipe, result)
    header_cfg = RunConfig.from_dict({**recipe["base"], "sweep": recipe["sweep"], "format": fmt})
    text = render("reproduce", header_cfg, columns, rows, extra={"figure": name, "recipe": recipe})
    cap = caption(recipe, checked)
    os.makedirs(out_dir, exist_ok=True)
    ext = "csv" if fmt == "csv" else "jsonl"
    with open(os.path.join(out_dir, f"{name}.{ext}"), "w") as fh:
        fh.write(text)
    with open(os.path.join(out_dir, f"{name}_caption.txt"), "w") as fh:
        fh.write(cap)
    return cap, ok
