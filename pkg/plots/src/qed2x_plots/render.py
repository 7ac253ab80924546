"""Render qed2x CSV outputs to image files.

Kinds:
    series      any t-indexed CSV (populations, density matrix, ...)
    dicke       Dicke-decomposition panel (bright vs dark manifolds)
    heatmap-xt  field intensity map from the long-format (t, x, intensity) CSV
    heatmap-dl  trapping phase map from the (d, L, P_dark_B) sweep CSV
    jsd         joint spectral density map from the (omega1, omega2, J) CSV

Usage:
    python3 -m qed2x_plots.render --input populations.csv --kind series \
        --output populations.png [--style style.json]
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from . import schema  # noqa: E402

KINDS = ("series", "dicke", "heatmap-xt", "heatmap-dl", "jsd")


def _figure(style):
    fig, ax = plt.subplots(figsize=style.get("figsize", (6.4, 4.2)))
    return fig, ax


def _finish(fig, ax, style, out_path, default_xlabel, default_ylabel):
    ax.set_xlabel(style.get("xlabel", default_xlabel))
    ax.set_ylabel(style.get("ylabel", default_ylabel))
    if "title" in style:
        ax.set_title(style["title"])
    fig.tight_layout()
    fig.savefig(out_path, dpi=style.get("dpi", 150))
    plt.close(fig)


def render_series(in_path, out_path, style):
    cols = schema.load_timeseries(in_path)
    wanted = style.get("columns") or [c for c in cols if c != "t"]
    for name in wanted:
        if name not in cols:
            raise schema.SchemaError(
                f"{in_path}: requested column '{name}' not present")
    fig, ax = _figure(style)
    for name in wanted:
        ax.plot(cols["t"], cols[name], label=name, lw=1.4)
    if style.get("logy"):
        ax.set_yscale("log")
    ax.legend(fontsize=8, ncols=2)
    _finish(fig, ax, style, out_path, "t", "probability")


def render_dicke(in_path, out_path, style):
    cols = schema.load_dicke(in_path)
    fig, ax = _figure(style)
    bright = ["P_Wbar_C", "P_W_B"]
    dark = ["P_D1_C", "P_D2_C", "P_D1_B", "P_D2_B", "P_dark_B"]
    for name in bright:
        ax.plot(cols["t"], cols[name], label=name, lw=1.6)
    for name in dark:
        ax.plot(cols["t"], cols[name], label=name, lw=1.1, ls="--")
    if style.get("logy"):
        ax.set_yscale("log")
    ax.legend(fontsize=8, ncols=2)
    _finish(fig, ax, style, out_path, "t", "manifold population")


def _render_grid(axes_and_grid, out_path, style, xlabel, ylabel, cbar_label):
    x, y, grid = axes_and_grid
    fig, ax = _figure(style)
    mesh = ax.pcolormesh(y, x, grid, shading="nearest",
                         cmap=style.get("cmap", "viridis"),
                         vmin=style.get("vmin"), vmax=style.get("vmax"))
    fig.colorbar(mesh, ax=ax, label=cbar_label)
    _finish(fig, ax, style, out_path, ylabel, xlabel)


def render_heatmap_xt(in_path, out_path, style):
    t, x, inten = schema.load_field_map(in_path)
    _render_grid((t, x, inten), out_path, style,
                 xlabel="t", ylabel="x", cbar_label="intensity")


def render_heatmap_dl(in_path, out_path, style):
    d, length, metric = schema.load_sweep(in_path)
    _render_grid((d, length, metric), out_path, style,
                 xlabel="emitter spacing d", ylabel="slab thickness L",
                 cbar_label="P_dark_B")


def render_jsd(in_path, out_path, style):
    w1, w2, j = schema.load_jsd(in_path)
    _render_grid((w1, w2, j), out_path, style,
                 xlabel="omega_1", ylabel="omega_2", cbar_label="J")


RENDERERS = {
    "series": render_series,
    "dicke": render_dicke,
    "heatmap-xt": render_heatmap_xt,
    "heatmap-dl": render_heatmap_dl,
    "jsd": render_jsd,
}


def render(in_path, out_path, kind, style_path=None):
    style = schema.load_style(style_path)
    RENDERERS[kind](in_path, out_path, style)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="qed2x-plots", description=__doc__)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--style", default=None)
    args = p.parse_args(argv)
    try:
        render(args.input, args.output, args.kind, args.style)
    except schema.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
