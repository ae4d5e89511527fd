"""Render figure analogs from the benchmark CLI's CSV/JSON bundles.

Strictly read-only over the bundle files; the only computation is re-evaluating
the loss closed form on a display grid for contour lines.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

TRACE_COLUMNS = {"t", "f_x", "v_t", "move_inc", "move_cum", "F_t", "regret_cum", "kind"}
SWEEP_COLUMNS = {"T", "regret_final", "move_final", "jumps", "runtime_ms"}

POLICY_LABELS = {
    "greedy": "Greedy",
    "frugal": "Frugal",
    "lsp": "LSP",
    "lsp_sqrt": "LSP (eps=T^-0.5)",
    "lsp_inv": "LSP (eps=1/T)",
}


class BundleError(RuntimeError):
    """A bundle file is missing or malformed."""


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    if not path.exists():
        raise BundleError(f"missing bundle file: {path}")
    with path.open() as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise BundleError(f"empty file: {path}")
        rows = list(reader)
    if not rows:
        raise BundleError(f"no data rows in {path}")
    cols: dict[str, list] = {h: [] for h in header}
    for row in rows:
        if len(row) != len(header):
            raise BundleError(f"ragged row in {path}: {row}")
        for h, v in zip(header, row):
            cols[h].append(v)
    out = {}
    for h, vals in cols.items():
        try:
            out[h] = np.array([float(v) for v in vals])
        except ValueError:
            out[h] = np.array(vals)
    return out


def load_trace(path: Path) -> dict[str, np.ndarray]:
    data = _read_csv(path)
    if not TRACE_COLUMNS <= set(data):
        raise BundleError(
            f"{path} lacks trace columns {sorted(TRACE_COLUMNS - set(data))}"
        )
    return data


def load_sweep(path: Path) -> dict[str, np.ndarray]:
    data = _read_csv(path)
    if not SWEEP_COLUMNS <= set(data):
        raise BundleError(
            f"{path} lacks sweep columns {sorted(SWEEP_COLUMNS - set(data))}"
        )
    return data


def _loss_grid(objective: dict, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    kind = objective.get("kind")
    shift = objective.get("value_shift", 0.0)
    gx, gy = np.meshgrid(xs, ys)
    if kind == "squared_norm":
        return gx**2 + gy**2 + shift
    if kind == "quadratic":
        cx, cy = objective["center"]
        return 0.5 * ((gx - cx) ** 2 + (gy - cy) ** 2) + shift
    if kind == "scaled_norm":
        cx, cy = objective["center"]
        return objective["scale"] * np.hypot(gx - cx, gy - cy) + shift
    if kind == "max_abs":
        return np.maximum(np.abs(gx), np.abs(gy)) + shift
    if kind == "linear_plus_quad":
        return gx + gy + objective["curvature"] * gx**2 + shift
    raise BundleError(f"cannot draw contours for loss kind {kind!r}")


def _load_instance(path: Path) -> dict:
    if not path.exists():
        raise BundleError(f"missing bundle file: {path}")
    return json.loads(path.read_text())


def _domain_window(instance: dict, pad: float = 0.35):
    dom = instance["domain"]["box"]
    lo, hi = np.array(dom["lo"]), np.array(dom["hi"])
    return lo - pad, hi + pad


def _draw_sets_and_contours(ax, instance: dict, geometry: dict[str, np.ndarray]):
    lo, hi = _domain_window(instance)
    xs = np.linspace(lo[0], hi[0], 160)
    ys = np.linspace(lo[1], hi[1], 160)
    zz = _loss_grid(instance["objective"], xs, ys)
    ax.contour(xs, ys, zz, levels=10, colors="silver", linewidths=0.6, zorder=0)
    ts = geometry["t"].astype(int)
    cmap = plt.get_cmap("viridis")
    for t in np.unique(ts):
        sel = ts == t
        vx, vy = geometry["x0"][sel], geometry["x1"][sel]
        poly = np.column_stack([vx, vy])
        color = cmap(0.15 + 0.7 * (t - ts.min()) / max(1, ts.max() - ts.min()))
        ax.fill(
            poly[:, 0], poly[:, 1], facecolor=color, alpha=0.12, edgecolor=color,
            linewidth=1.0, zorder=1,
        )
    for i, m in enumerate(instance["meta"].get("minimizers", [])):
        ax.plot(m[0], m[1], "k.", ms=4, zorder=3)
        ax.annotate(str(i), (m[0], m[1]), fontsize=6, xytext=(2, 2), textcoords="offset points")
    ax.set_xlim(lo[0], hi[0])
    ax.set_ylim(lo[1], hi[1])
    ax.set_aspect("equal")


def render_fig3(input_dir: Path, output: Path) -> Path:
    """Four panels: the revealed sets, then one trajectory per policy."""
    instance = _load_instance(input_dir / "fig3_instance.json")
    geometry = _read_csv(input_dir / "fig3_geometry.csv")
    traces = {
        name: load_trace(input_dir / f"fig3_{name}.csv")
        for name in ("greedy", "frugal", "lsp")
    }
    fig, axes = plt.subplots(1, 4, figsize=(16, 4.2))
    _draw_sets_and_contours(axes[0], instance, geometry)
    axes[0].set_title("(a) input sets and minimizers")
    x_start = instance["x0"]
    x_opt = None
    for ax, (name, tr) in zip(axes[1:], traces.items()):
        _draw_sets_and_contours(ax, instance, geometry)
        px = np.concatenate([[x_start[0]], tr["x0"]])
        py = np.concatenate([[x_start[1]], tr["x1"]])
        ax.plot(px, py, "-o", color="crimson", ms=3.5, lw=1.3, zorder=4)
        if x_opt is None:
            x_opt = (tr["x0"][-1], tr["x1"][-1]) if name == "greedy" else None
        ax.set_title(f"({chr(ord('b') + list(traces).index(name))}) {POLICY_LABELS.get(name, name)}")
    if x_opt is not None:
        for ax in axes[1:]:
            ax.plot(*x_opt, "kx", ms=9, mew=2, zorder=5)
    fig.tight_layout()
    fig.savefig(output, dpi=130)
    plt.close(fig)
    return output


def render_fig4(input_dir: Path, output: Path) -> Path:
    """Final regret and movement against the horizon, one curve per policy."""
    sweeps = {}
    for name in ("greedy", "frugal", "lsp_sqrt", "lsp_inv"):
        sweeps[name] = load_sweep(input_dir / f"fig4_{name}.csv")
    fig, (ax_r, ax_m) = plt.subplots(1, 2, figsize=(11, 4.2))
    for name, table in sweeps.items():
        label = POLICY_LABELS.get(name, name)
        ax_r.plot(table["T"], table["regret_final"], "-o", ms=3, label=label)
        ax_m.plot(table["T"], table["move_final"], "-o", ms=3, label=label)
    ax_r.set_xlabel("T")
    ax_r.set_ylabel("final regret")
    ax_r.set_title("regret vs horizon")
    ax_m.set_xlabel("T")
    ax_m.set_ylabel("movement cost")
    ax_m.set_title("movement vs horizon")
    ax_m.legend(fontsize=8)
    ax_r.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(output, dpi=130)
    plt.close(fig)
    return output


def render_fig5(input_dir: Path, output: Path) -> Path:
    """Cumulative regret and movement over one frozen run, with the first
    budget-forced jump annotated."""
    traces = {}
    for name in ("greedy", "frugal", "lsp_sqrt", "lsp_inv"):
        traces[name] = load_trace(input_dir / f"fig5_{name}.csv")
    fig, (ax_r, ax_m) = plt.subplots(1, 2, figsize=(11, 4.2))
    for name, tr in traces.items():
        label = POLICY_LABELS.get(name, name)
        ax_r.plot(tr["t"], tr["regret_cum"], label=label, lw=1.2)
        ax_m.plot(tr["t"], tr["move_cum"], label=label, lw=1.2)
    frugal = traces["frugal"]
    jump_steps = frugal["t"][frugal["kind"] == "jump"]
    if jump_steps.size:
        t_jump = int(jump_steps[0])
        i = int(np.searchsorted(frugal["t"], t_jump))
        ax_r.axvline(t_jump, color="crimson", ls="--", lw=0.9)
        ax_r.annotate(
            f"jump at t={t_jump}",
            (t_jump, frugal["regret_cum"][i]),
            xytext=(-90, -25),
            textcoords="offset points",
            arrowprops={"arrowstyle": "->", "color": "crimson"},
            color="crimson",
            fontsize=9,
        )
    ax_r.set_xlabel("t")
    ax_r.set_ylabel("cumulative regret")
    ax_r.legend(fontsize=8)
    ax_m.set_xlabel("t")
    ax_m.set_ylabel("cumulative movement")
    ax_m.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(output, dpi=130)
    plt.close(fig)
    return output


RENDERERS = {"fig3": render_fig3, "fig4": render_fig4, "fig5": render_fig5}


def render(spec: str, input_dir, output) -> Path:
    if spec not in RENDERERS:
        raise BundleError(f"unknown figure spec {spec!r}; choose from {sorted(RENDERERS)}")
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    return RENDERERS[spec](Path(input_dir), output)
