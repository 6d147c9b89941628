"""Figure builders for andersonlab experiment outputs.

Rendering never recomputes science: every plotted number comes from the
input files (plus user-supplied constants for the analytic target
curves).  Output is deterministic: fixed fonts, sizes and DPI, scrubbed
metadata, and a pinned SVG hash salt, so the same inputs give
byte-identical image files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import EmptyDataError, Table, expect_table

FIGURE_KINDS = ("tail", "decay", "ct-hist", "dynloc", "msa-targets")

_RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "svg.hashsalt": "andersonplot",
}


@dataclass(frozen=True)
class FigureRequest:
    kind: str
    inputs: tuple[str, ...]
    out: str
    logy: bool = False
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"figure kind must be one of {FIGURE_KINDS}")
        if not self.inputs:
            raise ValueError("at least one input path is required")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))


def render(req: FigureRequest) -> dict:
    """Build the requested figure and write it to ``req.out``.

    Returns a small info dict (series/point counts, annotation values)
    so callers can check what was drawn without re-parsing the image.
    """
    with plt.rc_context(_RC):
        fig, info = build_figure(req)
        try:
            fig.savefig(req.out, metadata=_metadata_for(req.out))
        finally:
            plt.close(fig)
    info["out"] = req.out
    return info


def _metadata_for(path: str) -> dict:
    if str(path).lower().endswith(".svg"):
        return {"Date": None}  # drop the volatile timestamp
    return {"Software": "andersonplot"}


def build_figure(req: FigureRequest):
    builder = {
        "tail": _tail_figure,
        "msa-targets": _msa_targets_figure,
        "decay": _decay_figure,
        "ct-hist": _ct_hist_figure,
        "dynloc": _dynloc_figure,
    }[req.kind]
    return builder(req)


def _errbars(rows):
    ell = np.array([r["L"] for r in rows], dtype=float)
    est = np.array([r["estimate"] for r in rows], dtype=float)
    lo = np.array([r["ci_low"] for r in rows], dtype=float)
    hi = np.array([r["ci_high"] for r in rows], dtype=float)
    order = np.argsort(ell)
    err_lo = np.maximum(est - lo, 0.0)
    err_hi = np.maximum(hi - est, 0.0)
    return ell[order], est[order], err_lo[order], err_hi[order]


def _tail_figure(req: FigureRequest):
    fig, ax = plt.subplots()
    points = 0
    for path in req.inputs:
        table = expect_table(path, "lifshitz", "scales")
        ell, est, err_lo, err_hi = _errbars(table.rows)
        ax.errorbar(
            ell, est, yerr=[err_lo, err_hi], fmt="o", capsize=3, label=_short(path)
        )
        points += ell.size
    target_drawn = _draw_tail_target(ax, req)
    ax.set_xlabel("cube radius L")
    ax.set_ylabel("P{E0 <= 2 C L^(-1/2)}")
    if req.logy:
        ax.set_yscale("log")
    ax.legend(loc="best")
    ax.set_title("finite-volume low-energy tail")
    return fig, {"series": len(req.inputs), "points": points, "target_drawn": target_drawn}


def _draw_tail_target(ax, req: FigureRequest) -> bool:
    """Overlay C1 * L^d * exp(-c * L^(1/4)) for user-supplied constants."""
    consts = req.constants
    if "c" not in consts or "C1" not in consts:
        return False
    c = float(consts["c"])
    c1 = float(consts["C1"])
    d = float(consts.get("d", 1))
    lo, hi = ax.get_xlim()
    ell = np.linspace(max(lo, 1.0), hi, 200)
    curve = c1 * ell**d * np.exp(-c * ell**0.25)
    ax.plot(ell, curve, "--", color="black", label="C1 L^d exp(-c L^(1/4))")
    return True


def _msa_targets_figure(req: FigureRequest):
    fig, ax = plt.subplots()
    points = 0
    for path in req.inputs:
        table = expect_table(path, "msa-initial", "scales")
        ell, est, err_lo, err_hi = _errbars(table.rows)
        ax.errorbar(
            ell, est, yerr=[err_lo, err_hi], fmt="o", capsize=3, label=_short(path)
        )
        targets = np.array(
            [r["target"] for r in sorted(table.rows, key=lambda r: r["L"])], dtype=float
        )
        ax.plot(ell, targets, "--", marker="x", label=f"{_short(path)} target")
        points += ell.size
    ax.set_xlabel("initial scale L0")
    ax.set_ylabel("P{some E <= E* is singular}")
    if req.logy:
        ax.set_yscale("log")
    ax.legend(loc="best")
    ax.set_title("initial-scale singularity estimates vs target")
    return fig, {"series": len(req.inputs), "points": points, "target_drawn": True}


def decay_annotation_value(rows) -> float:
    """The fitted rate quoted on a decay figure (first non-degenerate pair).

    Comes straight from the CSV so the annotation can be checked against
    the stored fit exactly.
    """
    for row in rows:
        if not row["degenerate"]:
            return float(row["fitted_rate"])
    raise EmptyDataError("no non-degenerate decay fits in input")


def _decay_figure(req: FigureRequest):
    fig, ax = plt.subplots()
    profiles = 0
    annotation = None
    for path in req.inputs:
        table = expect_table(path, "eigen-decay", "trials")
        groups: dict = {}
        for row in table.rows:
            groups.setdefault((row["trial"], row["pair"]), []).append(row)
        for (trial, pair), rows in sorted(groups.items()):
            rows = sorted(rows, key=lambda r: r["r"])
            r = [row["r"] for row in rows]
            amp = [row["log_amp"] for row in rows]
            ax.plot(r, amp, marker=".", alpha=0.7, label=f"t{trial}p{pair}")
            profiles += 1
        if annotation is None:
            annotation = decay_annotation_value(table.rows)
    if annotation is not None:
        ax.annotate(
            f"fitted rate {annotation!r}",
            xy=(0.95, 0.95),
            xycoords="axes fraction",
            ha="right",
            va="top",
        )
    ax.set_xlabel("max-norm shell radius r")
    ax.set_ylabel("log max shell amplitude")
    if profiles <= 12:
        ax.legend(loc="best", fontsize=7)
    ax.set_title("eigenfunction decay profiles")
    return fig, {"profiles": profiles, "annotation_value": annotation}


def _ct_hist_figure(req: FigureRequest):
    fig, ax = plt.subplots()
    ratios = []
    for path in req.inputs:
        table = expect_table(path, "ct-check", "trials")
        ratios.extend(float(r["ratio"]) for r in table.rows)
    ax.hist(ratios, bins=min(40, max(5, int(math.sqrt(len(ratios))))))
    ax.axvline(1.0, color="black", linestyle="--", label="bound = 1")
    ax.set_xlabel("|G| / (2 eta^(-1) exp(-eta |x-y| / 12 nu))")
    ax.set_ylabel("instances")
    ax.legend(loc="best")
    ax.set_title("off-diagonal resolvent decay ratios")
    return fig, {"count": len(ratios), "max_ratio": max(ratios)}


def _dynloc_figure(req: FigureRequest):
    fig, ax = plt.subplots()
    series = 0
    bound = None
    for path in req.inputs:
        table = expect_table(path, "dynloc", "trials")
        groups: dict = {}
        for row in table.rows:
            groups.setdefault(row["trial"], []).append(row)
        for trial, rows in sorted(groups.items()):
            rows = sorted(rows, key=lambda r: r["t"])
            ax.plot(
                [r["t"] for r in rows],
                [r["moment"] for r in rows],
                marker=".",
                label=f"trial {trial}",
            )
            series += 1
        bound = max(float(r["bound"]) for r in table.rows)
    if bound is not None:
        ax.axhline(bound, color="black", linestyle="--", label="correlator bound")
    ax.set_xscale("symlog", linthresh=0.1)
    if req.logy:
        ax.set_yscale("log")
    ax.set_xlabel("time t")
    ax.set_ylabel("weighted HS moment M(t)")
    if series <= 10:
        ax.legend(loc="best", fontsize=7)
    ax.set_title("dynamical moment time series")
    return fig, {"series": series, "bound": bound}


def _short(path: str) -> str:
    name = str(path).rsplit("/", 1)[-1]
    return name[:-4] if name.endswith(".csv") else name
