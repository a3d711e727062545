"""SVG figures with reproducible structure (fixed hash salt, no date metadata)."""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import atomic_write_bytes  # noqa: E402

_RC = {"svg.hashsalt": "fujita-lab", "svg.fonttype": "path"}


def _save(fig, path):
    buf = io.BytesIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def line_figure(path, x, ys: dict, xlabel: str, ylabel: str, title: str = "", logy: bool = False):
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, y in ys.items():
            ax.plot(x, y, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        if len(ys) > 1:
            ax.legend()
        fig.tight_layout()
    _save(fig, path)


def series_figure(path, state, title: str = ""):
    t = [h.time for h in state.history]
    with matplotlib.rc_context(_RC):
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
        a1.semilogy(t, [h.sup_norm for h in state.history], label="sup norm")
        a1.set_xlabel("time")
        a1.legend()
        for tk, vals in state.snapshots[-4:]:
            a2.plot(state.grid.rho, vals, label=f"t={tk:.4g}")
        a2.set_xlabel("rho")
        a2.legend()
        if title:
            fig.suptitle(title)
        fig.tight_layout()
    _save(fig, path)
