"""Machine-readable run reports, trace tables, and trace figures."""
from __future__ import annotations

import csv
import json
import time

import numpy as np

FORMAT_VERSION = 1


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def trace_rows(result) -> list:
    rows = []
    for i, bd in enumerate(result.trace):
        rows.append(
            {
                "outer": i,
                "eps3": bd.eps[2],
                "period_weight": bd.period_weight,
                "e_alpha": bd.e_alpha,
                "e_V": bd.e_V,
                "e_willmore": bd.e_willmore,
                "e_periods": bd.e_periods,
                "total": bd.total,
            }
        )
    return rows


def build_report(
    *,
    input_path: str,
    m,
    spin_class: str,
    config: dict,
    result,
    reconstruction: dict | None = None,
    distortion: dict | None = None,
    artifact_version: str = "0.1.0",
) -> dict:
    mesh = m.mesh
    report = {
        "versions": {"format": FORMAT_VERSION, "artifact": artifact_version},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "input": {
            "path": input_path,
            "vertices": mesh.vertex_count,
            "edges": mesh.edge_count,
            "faces": mesh.face_count,
            "genus": mesh.genus,
        },
        "spin_class": spin_class,
        "config": _jsonable(config),
        "trace": trace_rows(result),
        "result": {
            "converged": bool(result.converged),
            "termination": result.termination,
            "channel_residual": result.channel_residual,
            "period_norms": _jsonable(result.period_norms),
            "outer_iterations": result.outer_count,
        },
    }
    if reconstruction is not None:
        report["reconstruction"] = _jsonable(reconstruction)
    if distortion is not None:
        report["distortion"] = _jsonable(distortion)
        report["result"]["willmore"] = distortion.get("willmore")
    return report


def write_report(path: str, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trace_csv(path: str, result) -> None:
    rows = trace_rows(result)
    fields = ["outer", "eps3", "period_weight", "e_alpha", "e_V", "e_willmore", "e_periods", "total"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def render_trace_figure(path: str, result) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = trace_rows(result)
    outer = [r["outer"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    for key in ("e_alpha", "e_V", "e_willmore", "e_periods", "total"):
        ax1.semilogy(outer, [max(r[key], 1e-300) for r in rows], label=key)
    ax1.set_xlabel("outer iteration")
    ax1.set_ylabel("energy")
    ax1.legend(fontsize=7)
    ax2.semilogy(outer, [max(r["eps3"], 1e-300) for r in rows], label="eps3")
    ax2.semilogy(outer, [max(r["period_weight"], 1e-300) for r in rows], label="period_weight")
    ax2.set_xlabel("outer iteration")
    ax2.set_ylabel("weight")
    ax2.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
