"""Matplotlib rendering of the report outputs, saved next to the data files.

Every CLI subcommand that writes delimited output also renders one figure
from the same numbers: pre-log regions as overlaid polygons, MSE profiles
versus data phase, GMI bound curves versus SNR, and decoding error rates.
The Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

from fractions import Fraction

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_PNG_META = {"Software": "fadingmac"}


def _closed(corners):
    xs = [float(Fraction(x)) for x, _ in corners]
    ys = [float(Fraction(y)) for _, y in corners]
    return xs + xs[:1], ys + ys[:1]


def plot_regions(named_corners: dict, path, title: str = "") -> None:
    """Overlay pre-log regions given as {label: corner list}."""
    fig, ax = plt.subplots(figsize=(5.0, 4.5))
    styles = {"joint": dict(ls="--", color="tab:blue"),
              "tdma": dict(ls="-", color="tab:red"),
              "coherent_tdma": dict(ls=":", color="tab:green"),
              "genie": dict(ls="-.", color="tab:gray")}
    for name, corners in named_corners.items():
        xs, ys = _closed(corners)
        ax.plot(xs, ys, label=name, **styles.get(name, {}))
    ax.set_xlabel("user-1 pre-log")
    ax.set_ylabel("user-2 pre-log")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_mse_profiles(rows: list[dict], path) -> None:
    """Per-phase MSE profiles, one panel per user, one line per window T."""
    users = sorted({r["user"] for r in rows})
    fig, axes = plt.subplots(1, len(users), figsize=(5.0 * len(users), 4.0),
                             squeeze=False)
    for ax, user in zip(axes[0], users):
        series = {}
        for r in rows:
            if r["user"] != user:
                continue
            series.setdefault(r["T"], []).append(r)
        for T, pts in sorted(series.items()):
            pts.sort(key=lambda r: r["phase_ell"])
            x = [p["phase_ell"] for p in pts]
            ax.plot(x, [p["analytic_mse"] for p in pts], "o-",
                    label=f"analytic, T={T}")
            if any(p["empirical_mse"] is not None for p in pts):
                ax.errorbar(x, [p["empirical_mse"] for p in pts],
                            yerr=[3 * (p["stderr"] or 0.0) for p in pts],
                            fmt="x", capsize=2, label=f"empirical, T={T}")
        ref = next((r["eps2_asymptotic"] for r in rows
                    if r["user"] == user and r["eps2_asymptotic"] is not None),
                   None)
        if ref is not None:
            ax.axhline(ref, color="k", lw=0.8, ls="--",
                       label="infinite window")
        ax.set_xlabel("data phase")
        ax.set_ylabel("interpolation MSE")
        ax.set_title(f"user {user}")
        ax.set_yscale("log")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_gmi_curves(rows: list[dict], slopes: dict, path) -> None:
    """GMI lower bounds against SNR with the fitted pre-log slopes."""
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for key, label in (("bound_user1", "user 1"), ("bound_user2", "user 2"),
                       ("bound_sum", "sum")):
        x = [r["snr_db"] for r in rows]
        y = [r[key] for r in rows]
        err = [3 * r[f"stderr_{key.split('_')[1]}"] for r in rows]
        slope = slopes.get(key)
        ax.errorbar(x, y, yerr=err, marker="o", capsize=2,
                    label=f"{label} (slope {slope:.3f})"
                    if slope is not None else label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("GMI lower bound (nats / channel use)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_error_rates(reports: list[dict], path) -> None:
    """Decoded error rates with Wilson intervals, per SNR point."""
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for key, label in (("p_err_user1", "user 1"), ("p_err_user2", "user 2"),
                       ("p_err_both", "both")):
        x = [r["snr_db"] for r in reports]
        y = [r[key] for r in reports]
        ax.plot(x, y, "o-", label=label)
    ci_lo = [r["ci_95"]["user1"][0] for r in reports]
    ci_hi = [r["ci_95"]["user1"][1] for r in reports]
    ax.fill_between([r["snr_db"] for r in reports], ci_lo, ci_hi, alpha=0.2)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("message error rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
