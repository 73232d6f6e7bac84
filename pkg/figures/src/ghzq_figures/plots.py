"""The four figure kinds, one renderer per ghzq result kind.

Rendering is a pure function of the result file: the same CSV always yields
the same series, reference lines and (date-stripped) PNG bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ghzq_figures.io import FigureDataError, ResultTable, read_result

FIGURE_KINDS = ("scatter", "bell-sweep", "scaling", "decoherence")


@dataclass(frozen=True)
class FigureJob:
    kind: str
    csv_path: str
    out_path: str
    dpi: int = 150
    max_points: int = 20000


@dataclass(frozen=True)
class RenderReport:
    kind: str
    out_path: str
    n_series: int
    reference_lines: tuple[str, ...]
    caption: str


def _caption(table: ResultTable) -> str:
    return f"{table.metadata['command']} | seed={table.metadata['seed']}"


def _finish(fig, job: FigureJob, caption: str) -> None:
    fig.text(0.01, 0.005, caption, fontsize=6, color="0.4")
    # Date metadata is stripped so re-rendering is byte-identical.
    fig.savefig(job.out_path, dpi=job.dpi, metadata={"Date": None})
    plt.close(fig)


def _render_bell_sweep(table: ResultTable, job: FigureJob) -> RenderReport:
    table.require_columns(
        ["m", "ratio", "ratio_stderr", "lhv_ratio", "genuine_threshold"]
    )
    m = table.column("m")
    order = np.argsort(m)
    m = m[order]
    ratio = table.column("ratio")[order]
    stderr = table.column("ratio_stderr")[order]
    lhv = table.column("lhv_ratio")[order]
    genuine = table.column("genuine_threshold")[0]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(m, ratio, yerr=stderr, fmt="o", ms=4, capsize=3, color="C0",
                label="sampled F / F_QM")
    ax.axhline(1.0, color="0.5", ls="--", lw=1.0, label="quantum prediction")
    ax.plot(m, lhv, "r-.", lw=1.2, label="LHV bound")
    ax.axhline(genuine, color="C2", ls=":", lw=1.2,
               label="genuine multipartite threshold")
    ax.set_xlabel("qubits m")
    ax.set_ylabel("F / F_QM")
    ax.set_ylim(min(-0.05, ratio.min() - 0.1), max(1.3, ratio.max() + 0.1))
    ax.legend(fontsize=8)
    _finish(fig, job, _caption(table))
    return RenderReport(
        kind="bell-sweep",
        out_path=job.out_path,
        n_series=1,
        reference_lines=("quantum-prediction", "lhv-bound", "genuine-threshold"),
        caption=_caption(table),
    )


def _render_scaling(table: ResultTable, job: FigureJob) -> RenderReport:
    table.require_columns(["m", "rel_err_F", "rel_err_N"])
    m = table.column("m")
    order = np.argsort(m)
    m = m[order]
    rel_f = table.column("rel_err_F")[order]
    rel_n = table.column("rel_err_N")[order]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(m, rel_f, "o-", color="C0", ms=4, label="relative error of F")
    ax.semilogy(m, rel_n, "s--", color="C2", ms=4, label="relative error of N")
    reference = rel_f[0] * 2.0 ** ((m - m[0]) / 3.0)
    ax.semilogy(m, reference, ":", color="0.4", lw=1.2,
                label="2^(m/3) growth reference")
    ax.set_xlabel("qubits m")
    ax.set_ylabel("relative sampling error")
    ax.legend(fontsize=8)
    _finish(fig, job, _caption(table))
    return RenderReport(
        kind="scaling",
        out_path=job.out_path,
        n_series=2,
        reference_lines=("error-growth-reference",),
        caption=_caption(table),
    )


def _render_scatter(table: ResultTable, job: FigureJob) -> RenderReport:
    table.require_columns(["re_factor_a", "re_factor_b", "term_x", "term_y"])
    fa = table.column("re_factor_a")[: job.max_points]
    fb = table.column("re_factor_b")[: job.max_points]
    tx = table.column("term_x")[: job.max_points]
    ty = table.column("term_y")[: job.max_points]

    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(8.5, 4.0))
    ax_a.scatter(fa, fb, s=2, alpha=0.35, color="C0", linewidths=0)
    for bound in (-1.0, 1.0):
        ax_a.axvline(bound, color="0.6", ls="--", lw=0.8)
        ax_a.axhline(bound, color="0.6", ls="--", lw=0.8)
    ax_a.set_xlabel("Re factor (qubit a)")
    ax_a.set_ylabel("Re factor (qubit b)")
    ax_a.set_title("factor vs factor", fontsize=9)

    ax_b.scatter(tx, ty, s=2, alpha=0.35, color="C3", linewidths=0)
    ax_b.set_xlabel("term -xx")
    ax_b.set_ylabel("term +yy")
    ax_b.set_title("term vs term", fontsize=9)
    _finish(fig, job, _caption(table))
    return RenderReport(
        kind="scatter",
        out_path=job.out_path,
        n_series=2,
        reference_lines=("eigenvalue-range",),
        caption=_caption(table),
    )


def _render_decoherence(table: ResultTable, job: FigureJob) -> RenderReport:
    table.require_columns(["m", "tau", "f_ratio", "stderr", "analytic_ratio"])
    m = table.column("m").astype(int)
    tau = table.column("tau")
    ratio = table.column("f_ratio")
    stderr = table.column("stderr")
    analytic = table.column("analytic_ratio")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    m_values = sorted(set(int(v) for v in m))
    for i, m_value in enumerate(m_values):
        sel = m == m_value
        order = np.argsort(tau[sel])
        color = f"C{i}"
        ax.errorbar(tau[sel][order], ratio[sel][order], yerr=stderr[sel][order],
                    fmt="o-", ms=3, lw=1.0, color=color, label=f"m = {m_value}")
        ax.plot(tau[sel][order], analytic[sel][order], ":", lw=1.2, color=color)
    ax.set_xlabel("time steps tau")
    ax.set_ylabel("F(tau) / F(0)")
    ax.legend(fontsize=8)
    _finish(fig, job, _caption(table))
    return RenderReport(
        kind="decoherence",
        out_path=job.out_path,
        n_series=len(m_values),
        reference_lines=("analytic-decay",),
        caption=_caption(table),
    )


_RENDERERS = {
    "bell-sweep": _render_bell_sweep,
    "scaling": _render_scaling,
    "scatter": _render_scatter,
    "decoherence": _render_decoherence,
}


def render(job: FigureJob) -> RenderReport:
    """Render one figure; raises FigureDataError before writing on bad input."""
    if job.kind not in _RENDERERS:
        raise FigureDataError(
            f"unknown figure kind {job.kind!r}; expected one of {FIGURE_KINDS}"
        )
    table = read_result(job.csv_path)
    file_kind = table.metadata.get("kind")
    if file_kind != job.kind:
        raise FigureDataError(
            f"file holds kind {file_kind!r} data but {job.kind!r} was requested"
        )
    if table.n_rows == 0:
        raise FigureDataError("result file has a header but no data rows")
    return _RENDERERS[job.kind](table, job)
