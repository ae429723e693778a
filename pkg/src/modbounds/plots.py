"""Figure rendering for the CLI report paths.

Every plotting function takes already-computed results and writes a PNG
next to the delimited output.  Uses the Agg backend so rendering works
headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_BOUND_COLOR = "#222222"
_CI_COLOR = "#9bb7d4"


def save_bounds_figure(path, intervals, ci=None, title="Interval estimates"):
    """Horizontal interval plot: one row per (label, BoundInterval)."""
    labels = [label for label, _ in intervals]
    fig, ax = plt.subplots(figsize=(7, 0.8 + 0.6 * len(intervals)))
    for row, (label, interval) in enumerate(intervals):
        ax.plot(
            [interval.lower, interval.upper],
            [row, row],
            lw=6,
            color=_BOUND_COLOR,
            solid_capstyle="butt",
        )
        if ci is not None and ci.get(label) is not None:
            c = ci[label]
            ax.plot(
                [c.ci_lower, c.ci_upper],
                [row, row],
                lw=1.5,
                color=_BOUND_COLOR,
            )
    ax.axvline(0.0, color="#888888", lw=0.8, ls=":")
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels)
    ax.set_xlabel("interaction")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_gamma_curve_figure(path, rows, title="Sensitivity to moderator shift"):
    """Bounds (and CI ribbon when present) as a function of gamma."""
    gammas = np.array([r["gamma"] for r in rows], dtype=float)
    lower = np.array([r["lower"] for r in rows], dtype=float)
    upper = np.array([r["upper"] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if rows and rows[0].get("ci_lower") is not None:
        ci_lo = np.array([r["ci_lower"] for r in rows], dtype=float)
        ci_hi = np.array([r["ci_upper"] for r in rows], dtype=float)
        ax.fill_between(gammas, ci_lo, ci_hi, color=_CI_COLOR, alpha=0.5,
                        label="95% CI")
    ax.plot(gammas, lower, color=_BOUND_COLOR, lw=1.5)
    ax.plot(gammas, upper, color=_BOUND_COLOR, lw=1.5)
    ax.axhline(0.0, color="#888888", lw=0.8, ls=":")
    ax.set_xlabel("gamma (share of moderator answers shifted)")
    ax.set_ylabel("interaction bounds")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_region_figure(path, region, title="Informative region"):
    """Heatmap of the informative mask over the (gamma, theta) grid."""
    fig, ax = plt.subplots(figsize=(6.5, 5))
    mask = region.informative_mask.astype(float)
    ax.pcolormesh(
        region.thetas,
        region.gammas,
        mask,
        cmap="Greys",
        vmin=0.0,
        vmax=1.0,
        shading="nearest",
    )
    ax.set_xlabel("theta (share primed)")
    ax.set_ylabel("gamma (share of moderator answers shifted)")
    ax.set_title(f"{title} (dark = excludes zero)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_histogram_figure(path, values, title, xlabel="interaction"):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(np.asarray(values), bins=101, color=_CI_COLOR,
            edgecolor="none", density=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trace_figure(path, draws, title="Posterior draws"):
    """Trace and histogram for the interaction draws, colored by chain."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for chain_id in range(draws.n_chains):
        keep = draws.chain == chain_id
        axes[0].plot(
            draws.iteration[keep],
            draws.delta_population[keep],
            lw=0.6,
            alpha=0.8,
        )
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("interaction draw")
    axes[1].hist(draws.delta_population, bins=81, color=_CI_COLOR,
                 density=True)
    axes[1].set_xlabel("interaction")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_study_figure(path, rows, reduction_keys, title):
    """Boxplots of percent variance reductions across replicates."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    data = []
    for key, _ in reduction_keys:
        data.append([r[key] for r in rows if key in r and r[key] == r[key]])
    ax.boxplot(data)
    ax.set_xticks(range(1, len(reduction_keys) + 1))
    ax.set_xticklabels([label for _, label in reduction_keys])
    ax.axhline(0.0, color="#888888", lw=0.8, ls=":")
    ax.set_ylabel("% posterior-variance reduction")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
