"""SVG figures written next to the data files.

Output is byte-stable: the SVG id salt is fixed and no date is embedded.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SVG_RC = {"svg.hashsalt": "auxskin", "svg.fonttype": "path"}


def _save(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def plot_trace(trace, path, title=None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for branch, style in (("loading", "-"), ("unloading", "--")):
        sel = trace.branch == branch
        if np.any(sel):
            ax.plot(trace.strain[sel] * 100, trace.force[sel], style, label=branch)
    ax.set_xlabel("strain [%]")
    ax.set_ylabel("force [N]")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_profile(x, z, path, title=None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 2.5))
    ax.plot(np.asarray(x) * 100, np.asarray(z) * 100)
    ax.set_xlabel("x [cm]")
    ax.set_ylabel("height [cm]")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_heightmap(hm, path, title=None) -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.pcolormesh(hm.x * 100, hm.y * 100, hm.z * 1000, shading="nearest")
    ax.invert_yaxis()
    ax.set_aspect("equal")
    fig.colorbar(im, ax=ax, label="height [mm]")
    ax.set_xlabel("x [cm]")
    ax.set_ylabel("y [cm]")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
