"""Figure rendering for the CLI report path.

Uses the Agg backend only; every renderer takes experiment records and
writes a PNG next to the delimited data the CLI emits. Nothing here is
needed by the library proper and importing it pulls in matplotlib, so
the CLI loads it lazily.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render_edge_profile(profile, sweeps, path: str) -> None:
    """Edge-mode panel: |u|, |v| site profiles plus a spectrum inset.

    sweeps is a list of (gamma_p, EdgeProfile) pairs for the inset; the
    main panel shows ``profile``.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.semilogy(profile.sites, profile.u_abs, "o-", ms=3,
                label=r"$|u^{(N)}_j|$")
    ax.semilogy(profile.sites, profile.v_abs, "s-", ms=3,
                label=r"$|v^{(N)}_j|$")
    ax.set_xlabel("site $j$")
    ax.set_ylabel("edge-mode amplitude")
    p = profile.params
    ax.set_title(f"$t_c$={p.t_c:g}, $t_d$={p.t_d:g}, "
                 f"$\\gamma_p$={p.gamma_p:g}, $\\varphi$={p.phi:.3g}, "
                 f"$N$={p.n_sites}")
    ax.legend(loc="upper center")
    inset = ax.inset_axes([0.58, 0.55, 0.38, 0.4])
    for gamma_p, prof in sweeps:
        inset.plot(prof.orders, prof.singular_values, ".", ms=2,
                   label=f"{gamma_p:g}")
    inset.set_xlabel("$n$", fontsize=7)
    inset.set_ylabel("$s_n$", fontsize=7)
    inset.tick_params(labelsize=6)
    if sweeps:
        inset.legend(fontsize=5, title=r"$\gamma_p$", title_fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def render_phase_diagram(diagram, path: str) -> None:
    """Singular-gap heat map with winding hatching and analytic overlays."""
    x = diagram.axis1_values
    y = diagram.axis2_values
    gap = np.array([[pt.delta_s for pt in row] for row in diagram.points])
    winding = np.array([[pt.winding if pt.winding is not None else -1
                         for pt in row] for row in diagram.points])
    fig, ax = plt.subplots(figsize=(6.0, 4.6))
    mesh = ax.pcolormesh(x, y, gap.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=r"$\Delta_s$")
    # outline where the winding is nonzero
    ax.contour(x, y, (winding.T != 0).astype(float), levels=[0.5],
               colors="white", linewidths=0.8, linestyles="dotted")
    styles = {"ti_lower": ("w--", "window edge"),
              "ti_upper": ("w--", None),
              "stability": ("r-", "stability threshold")}
    for name in sorted(diagram.overlays):
        pts = diagram.overlays[name]
        style, label = styles.get(name, ("k-", name))
        keep = ((pts[:, 0] >= x.min()) & (pts[:, 0] <= x.max())
                & (pts[:, 1] >= y.min()) & (pts[:, 1] <= y.max()))
        if np.any(keep):
            ax.plot(pts[keep, 0], pts[keep, 1], style, lw=1.2, label=label)
    ax.set_xlabel(diagram.axis1)
    ax.set_ylabel(diagram.axis2)
    if any(lbl for _, lbl in styles.values()):
        handles, labels = ax.get_legend_handles_labels()
        if handles:
            ax.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def render_disorder(stats, path: str) -> None:
    """Gap vs disorder strength, one error-bar curve per chain length."""
    fig, (ax, ax2) = plt.subplots(
        1, 2, figsize=(8.4, 3.8),
        gridspec_kw={"width_ratios": [1.6, 1.0]})
    lengths = sorted({s.n_sites for s in stats})
    for n in lengths:
        rows = [s for s in stats if s.n_sites == n]
        rows.sort(key=lambda s: s.sigma)
        sig = [s.sigma for s in rows]
        ax.errorbar(sig, [s.mean_gap for s in rows],
                    yerr=[2 * s.stderr_gap for s in rows],
                    marker="o", ms=3, capsize=2, label=f"$N$={n}")
        ax2.plot(sig, [s.mean_log_gain for s in rows], "o-", ms=3,
                 label=f"$N$={n}")
    ax.set_xlabel(r"$\sigma$")
    ax.set_ylabel(r"$\langle \Delta_s \rangle$")
    ax.legend(fontsize=8)
    ax2.set_xlabel(r"$\sigma$")
    ax2.set_ylabel(r"$\langle \log_{10} |\alpha_N| \rangle$")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
