"""Output files of a run: CSV trace, key=value summary, echoed config and
figures.  Data files contain no timestamps, so they are reproducible from
the config alone."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import emit_config
from .sim import ScenarioResult, trace_text


def emit_trace(result: ScenarioResult, path) -> Path:
    """CSV with one row per iteration; floats in shortest round-trip form."""
    path = Path(path)
    path.write_text(trace_text(result.records), encoding="utf-8")
    return path


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def summary_text(result: ScenarioResult) -> str:
    lines = [f"name={result.config.name}", f"controller={result.config.controller}"]
    lines += [f"{k}={_fmt(v)}" for k, v in result.summary.items()]
    return "\n".join(lines) + "\n"


def write_summary(result: ScenarioResult, path) -> Path:
    path = Path(path)
    path.write_text(summary_text(result), encoding="utf-8")
    return path


def parse_summary(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out


def plot_result(result: ScenarioResult, out_dir, stem: str) -> list[Path]:
    """Render the figures that go with a run; returns the written files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    recs = result.records
    if len(recs) < 2:
        return []
    t = result.column("t")
    kind = result.config.controller
    written = []

    if kind in ("trifocal", "scripted"):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
        eL = np.hypot(*np.array([r.eL for r in recs]).T)
        eR = np.hypot(*np.array([r.eR for r in recs]).T)
        if kind == "trifocal":
            ax1.semilogy(result.column("iter"), np.maximum(eL, 1e-12), label="left")
            ax1.semilogy(result.column("iter"), np.maximum(eR, 1e-12), label="right")
            ax1.set_ylabel("image error (px)")
        else:
            ax1.plot(result.column("iter"), result.column("side"), label="baseline side")
            ax1.set_ylabel("side of baseline plane")
        ax1.set_xlabel("iteration")
        ax1.legend()
        pL = np.array([r.pL for r in recs])
        pR = np.array([r.pR for r in recs])
        ax2.plot(pL[:, 0], pL[:, 1], label="left track")
        ax2.plot(pR[:, 0], pR[:, 1], label="right track")
        for x, y in result.extra.get("targets_L", []):
            ax2.plot(x, y, "k+", ms=10)
        ax2.invert_yaxis()
        ax2.set_aspect("equal", adjustable="datalim")
        ax2.set_xlabel("x (px)")
        ax2.set_ylabel("y (px)")
        ax2.legend()
        fig.tight_layout()
        written.append(_save(fig, out_dir / f"{stem}_images.png"))
        return written

    fig, ax = plt.subplots(figsize=(7, 5.5))
    curve = result.extra.get("curve")
    if curve is not None:
        ax.plot(curve.xy[:, 0], curve.xy[:, 1], "k-", lw=0.8, label="reference (left)")
    pL = np.array([r.pL for r in recs])
    ax.plot(pL[:, 0], pL[:, 1], "r--", lw=0.8, label="spot (left)")
    if kind == "hybrid3d":
        cR = result.extra.get("curve_R")
        if cR is not None:
            ax.plot(cR.xy[:, 0], cR.xy[:, 1], color="0.5", lw=0.8, label="reference (right)")
        pR = np.array([r.pR for r in recs])
        ax.plot(pR[:, 0], pR[:, 1], "b--", lw=0.8, label="spot (right)")
    ax.invert_yaxis()
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend()
    written.append(_save(fig, out_dir / f"{stem}_path.png"))

    rows = 3 if kind == "hybrid3d" else 2
    fig, axes = plt.subplots(rows, 1, figsize=(8, 2.6 * rows), sharex=True)
    axes[0].plot(t, result.column("d"), label="left")
    axes[1].plot(t, result.column("theta_e"), label="left")
    if kind == "hybrid3d":
        axes[0].plot(t, result.column("dR"), label="right")
        axes[1].plot(t, result.column("theta_eR"), label="right")
        axes[2].plot(t, result.column("err3d"))
        axes[2].set_ylabel("3D error (mm)")
    axes[0].set_ylabel("d (px)")
    axes[1].set_ylabel("theta_e (rad)")
    axes[0].legend()
    axes[-1].set_xlabel("t (s)")
    fig.tight_layout()
    written.append(_save(fig, out_dir / f"{stem}_errors.png"))
    return written


def _save(fig, path: Path) -> Path:
    import matplotlib.pyplot as plt

    # fixed metadata keeps the PNG bytes independent of the run date
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def write_outputs(result: ScenarioResult, out_dir, name: str, figures: bool = True) -> dict:
    """Trace, summary, echoed config (all defaults filled) and figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "trace": emit_trace(result, out_dir / f"{name}.csv"),
        "summary": write_summary(result, out_dir / f"{name}.summary.txt"),
    }
    cfg_path = out_dir / f"{name}.config.toml"
    cfg_path.write_text(emit_config(result.config), encoding="utf-8")
    files["config"] = cfg_path
    if figures:
        files["figures"] = plot_result(result, out_dir, name)
    return files
