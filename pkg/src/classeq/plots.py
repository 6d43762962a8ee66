"""Figure rendering for experiment results.

One four-panel figure per method (class losses, their gap, validation loss,
validation MF1) plus a cross-method comparison, written as PNGs next to the
delimited output.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_figures"]


def _mean_series(records, pick):
    rows = np.array([[pick(bd) for bd in rec.breakdowns] for rec in records])
    return rows.mean(axis=0), rows


def render_figures(result, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    for method in sorted(result.methods):
        agg = result.methods[method]
        if not agg.records:
            continue
        fig, axes = plt.subplots(2, 2, figsize=(9, 6))
        iters = np.arange(len(agg.records[0].breakdowns))

        mean_ineq, all_ineq = _mean_series(agg.records, lambda bd: bd.l_cls_ineq)
        for row in all_ineq:
            axes[0, 0].plot(iters, row, color="C0", alpha=0.25, lw=0.8)
        axes[0, 0].plot(iters, mean_ineq, color="C0", lw=1.8)
        axes[0, 0].set_title("class loss gap")
        axes[0, 0].set_xlabel("iteration")

        mean_pos, _ = _mean_series(agg.records, lambda bd: bd.l_pos)
        mean_neg, _ = _mean_series(agg.records, lambda bd: bd.l_neg)
        axes[0, 1].plot(iters, mean_pos, label="positive", color="C3")
        axes[0, 1].plot(iters, mean_neg, label="negative", color="C0")
        axes[0, 1].set_title("per-class training loss")
        axes[0, 1].set_xlabel("iteration")
        axes[0, 1].legend()

        for rec in agg.records:
            axes[1, 0].plot(rec.valid_iters, [bd.l_erm for bd in rec.valid_breakdowns],
                            color="C2", alpha=0.25, lw=0.8)
            axes[1, 1].plot(rec.valid_iters, [r.mf1 for r in rec.valid_reports],
                            color="C4", alpha=0.25, lw=0.8)
        v_iters = agg.records[0].valid_iters
        v_loss = np.mean([[bd.l_erm for bd in rec.valid_breakdowns] for rec in agg.records], axis=0)
        v_mf1 = np.mean([[r.mf1 for r in rec.valid_reports] for rec in agg.records], axis=0)
        axes[1, 0].plot(v_iters, v_loss, color="C2", lw=1.8)
        axes[1, 0].set_title("validation loss")
        axes[1, 0].set_xlabel("iteration")
        axes[1, 1].plot(v_iters, v_mf1, color="C4", lw=1.8)
        axes[1, 1].set_title("validation MF1")
        axes[1, 1].set_xlabel("iteration")
        axes[1, 1].set_ylim(0.0, 1.0)

        fig.suptitle(method)
        fig.tight_layout()
        path = os.path.join(out_dir, f"curves_{method}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if len(result.methods) > 1:
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
        for i, method in enumerate(sorted(result.methods)):
            agg = result.methods[method]
            if not agg.records:
                continue
            iters = np.arange(len(agg.records[0].breakdowns))
            mean_ineq, _ = _mean_series(agg.records, lambda bd: bd.l_cls_ineq)
            axes[0].plot(iters, mean_ineq, label=method, color=f"C{i}")
            v_iters = agg.records[0].valid_iters
            v_mf1 = np.mean([[r.mf1 for r in rec.valid_reports] for rec in agg.records], axis=0)
            axes[1].plot(v_iters, v_mf1, label=method, color=f"C{i}")
        axes[0].set_title("class loss gap")
        axes[0].set_xlabel("iteration")
        axes[0].legend()
        axes[1].set_title("validation MF1")
        axes[1].set_xlabel("iteration")
        axes[1].set_ylim(0.0, 1.0)
        axes[1].legend()
        fig.tight_layout()
        path = os.path.join(out_dir, "comparison.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
