"""Eigenvalue-curve plots for convergence sweeps, saved as SVG."""

from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# element ids depend only on the figure content
matplotlib.rcParams["svg.hashsalt"] = "gridhodge"


def plot_convergence(
    path: Union[str, Path],
    curves: Sequence[tuple[float, np.ndarray]],
    exact: Optional[np.ndarray] = None,
    title: str = "",
) -> None:
    """One line per (l_g, eigenvalues) curve against the eigenvalue index, exact values dashed."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for l_g, values in curves:
        ax.plot(np.arange(1, len(values) + 1), values, marker=".", linewidth=1.0, label=f"l_g = {l_g:g}")
    if exact is not None and len(exact):
        ax.plot(np.arange(1, len(exact) + 1), exact, "k--", linewidth=1.0, label="exact")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("eigenvalue")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
