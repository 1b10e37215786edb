"""Matplotlib renderings of report data, written to files next to the
delimited output.  Figures are a viewing convenience; the CSV/JSON files
remain the interface of record."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE_KW = {"dpi": 110, "bbox_inches": "tight",
            "metadata": {"Software": None}}


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def concentration_figure(reports: list, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, rep in enumerate(reports):
        ax.plot(rep.h_grid, rep.empirical_mass, marker="o", ms=3,
                label=f"empirical (c={rep.halfspace_offset:g})")
        if i == 0:
            ax.plot(rep.h_grid, rep.paper_bound, "k--", label="Gaussian bound")
    ax.set_xlabel("enlargement h")
    ax.set_ylabel("mass")
    ax.set_title("half-space enlargement vs. concentration bound")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def bishop_gromov_figure(profile: list, path: str | Path) -> Path:
    rs = [r for r, _ in profile]
    vs = [v for _, v in profile]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(rs, vs, marker="o", ms=3)
    ax.set_xlabel("metric radius r")
    ax.set_ylabel(r"$\mu(B_r)/r^{2d}$")
    ax.set_title("volume-growth monotonicity")
    return _finish(fig, path)


def diameter_figure(report, path: str | Path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    axes[0].loglog(report.dims, report.estimates, "o")
    fit = np.exp(np.polyval(np.polyfit(np.log(report.dims),
                                       np.log(report.estimates), 1),
                            np.log(report.dims)))
    axes[0].loglog(report.dims, fit, "k--",
                   label=f"slope {report.d_exponent:.3f}")
    axes[0].set_xlabel("dimension d")
    axes[0].set_ylabel("diameter estimate")
    axes[0].legend()
    axes[1].loglog(report.d_grid, report.d_sweep, "o")
    fit2 = np.exp(np.polyval(np.polyfit(np.log(report.d_grid),
                                        np.log(report.d_sweep), 1),
                             np.log(report.d_grid)))
    axes[1].loglog(report.d_grid, fit2, "k--",
                   label=f"slope {report.diameter_exponent:.3f}")
    axes[1].set_xlabel("target diameter D")
    axes[1].legend()
    fig.suptitle("pair-bound diameter scaling")
    return _finish(fig, path)


def estimates_figure(rows: list[tuple], path: str | Path) -> Path:
    # rows: (D, name, lhs, rhs, slack)
    names = sorted({r[1] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in names:
        ds = [r[0] for r in rows if r[1] == name]
        slacks = [r[4] for r in rows if r[1] == name]
        ax.plot(ds, slacks, marker="o", ms=3, label=name)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("target diameter D")
    ax.set_ylabel("slack (rhs-side margin)")
    ax.set_title("integral inequality slacks across D")
    ax.legend(fontsize=7)
    return _finish(fig, path)


def poincare_figure(rows: list[tuple], path: str | Path) -> Path:
    ds = [r[0] for r in rows]
    cs = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ds, cs, marker="o")
    ax.set_xlabel("target diameter D")
    ax.set_ylabel("min Rayleigh quotient x D")
    ax.set_title("empirical Poincare constant across D")
    return _finish(fig, path)


def point_report_figure(scenario, x, tensors: dict, path: str | Path) -> Path:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if scenario.dim == 1 and scenario.max_jet_order >= 3:
        from .geometry import metric_frame, weight_tensors
        from .scenarios import target_composites
        xs = np.linspace(x[0] - 3.0, x[0] + 3.0, 121)
        g_vals, be_vals = [], []
        for t in xs:
            pj = scenario.phi_jet([t], 3)
            fr = metric_frame(pj)
            wt = weight_tensors(fr, pj, scenario.source_jet([t], 2),
                                target_composites(scenario, [t], 2))
            g_vals.append(fr.g[0, 0])
            be_vals.append(wt.be[0, 0])
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
        axes[0].plot(xs, g_vals)
        axes[0].axvline(x[0], color="r", lw=0.8)
        axes[0].set_title("metric g(x)")
        axes[1].plot(xs, be_vals)
        axes[1].axvline(x[0], color="r", lw=0.8)
        axes[1].set_title("weighted Ricci tensor")
        return _finish(fig, path)
    fig, ax = plt.subplots(figsize=(6, 4))
    labels, values = [], []
    for name, mat in tensors.items():
        eigs = np.linalg.eigvalsh(0.5 * (np.atleast_2d(mat)
                                         + np.atleast_2d(mat).T))
        for k, e in enumerate(eigs):
            labels.append(f"{name}[{k}]")
            values.append(e)
    ax.bar(range(len(values)), values)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=70, fontsize=7)
    ax.set_title("tensor eigenvalues at the point")
    return _finish(fig, path)
