"""CSV / JSON / SVG output for result rows."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import fields
from pathlib import Path
from typing import Optional, Sequence

from .experiments import ResultRow
from .svg import PALETTE, Figure, Point, Series, colormap

CSV_COLUMNS = tuple(f.name for f in fields(ResultRow))


class OutputError(OSError):
    pass


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row_dict(row: ResultRow, include_timing: bool) -> dict:
    d = {name: getattr(row, name) for name in CSV_COLUMNS}
    if not include_timing:
        d["wall_s"] = None
    return d


def rows_to_csv(rows: Sequence[ResultRow], include_timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        d = _row_dict(row, include_timing)
        w.writerow([_cell(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: Sequence[ResultRow], include_timing: bool = False) -> str:
    return json.dumps([_row_dict(r, include_timing) for r in rows], indent=2) + "\n"


def read_csv_rows(path) -> list[ResultRow]:
    def num(s, cast=float):
        return None if s == "" else cast(s)

    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(ResultRow(
                rec["param"], num(rec["value"]), int(rec["replicate"]), rec["policy"], rec["alloc"],
                num(rec["mean_reward"]), num(rec["var_reward"]), int(rec["n_sims"]),
                num(rec["d12"]), num(rec["d13"]), num(rec["wall_s"]),
            ))
    return out


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def write_text(path, text: str) -> Path:
    return _write(Path(path), text)


def write_outputs(
    rows: Sequence[ResultRow],
    out_dir,
    fmt: str = "csv",
    plots: bool = False,
    kind: str = "sweep",
    include_timing: bool = False,
    stem: str = "results",
) -> list[Path]:
    """Write ``rows`` as CSV or JSON, plus an SVG figure when ``plots`` is set.

    ``kind`` picks the figure: ``sweep``, ``heatmap``, ``throughput`` or
    ``cost-study``; other kinds produce no figure.
    """
    if not rows:
        raise ValueError("no rows to write")
    out = Path(out_dir)
    written = []
    if fmt == "csv":
        written.append(_write(out / f"{stem}.csv", rows_to_csv(rows, include_timing)))
    elif fmt == "json":
        written.append(_write(out / f"{stem}.json", rows_to_json(rows, include_timing)))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if plots:
        fig = make_figure(rows, kind)
        if fig is not None:
            written.append(_write(out / f"{stem}.svg", fig.render()))
    return written


def make_figure(rows: Sequence[ResultRow], kind: str) -> Optional[Figure]:
    feasible = [r for r in rows if r.feasible and r.mean_reward is not None]
    if not feasible:
        return None
    if kind in ("sweep", "cost-study"):
        return _line_figure(feasible, kind)
    if kind == "heatmap":
        return _heatmap_figure(feasible)
    if kind == "throughput":
        return _throughput_figure(feasible)
    return None


def _line_figure(rows: Sequence[ResultRow], kind: str) -> Optional[Figure]:
    if any(r.value is None for r in rows):
        return None
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.param, r.replicate, r.policy), []).append(r)
    params = sorted({k[0] for k in groups})
    xlabel = "C_max / (b^2 m)" if kind == "cost-study" else params[0]
    fig = Figure(
        title="Expected reward vs " + xlabel,
        xlabel=xlabel,
        ylabel="expected reward",
        log_x=kind != "cost-study" and params[0] in ("C_max",),
    )
    curves = sorted({(k[0], k[1]) for k in groups})
    for ci, (param, rep) in enumerate(curves):
        color = PALETTE[(2 * ci) % len(PALETTE)] if len(curves) > 1 else PALETTE[0]
        for policy, dashed in (("xplt", False), ("random", True)):
            pts = sorted(groups.get((param, rep, policy), []), key=lambda r: r.value)
            if not pts:
                continue
            label = f"{policy}" + (f" {param} r{rep}" if len(curves) > 1 else "")
            fig.series.append(Series(
                label, [r.value for r in pts], [r.mean_reward for r in pts],
                color=PALETTE[1] if (policy == "random" and len(curves) == 1) else color,
                dashed=dashed,
            ))
    return fig


def _heatmap_figure(rows: Sequence[ResultRow]) -> Figure:
    pairs: dict[float, dict[str, ResultRow]] = {}
    for r in rows:
        pairs.setdefault(r.value, {})[r.policy] = r
    xplt = [p for p in pairs.values() if "xplt" in p]
    means = [p["xplt"].mean_reward for p in xplt]
    lo, hi = min(means), max(means)
    vmax = max(p["xplt"].var_reward or 0.0 for p in xplt) or 1.0
    fig = Figure(
        title="Expected reward by stage geometry",
        xlabel="|s2 - s1|",
        ylabel="|s3 - s1|",
        diagonal=True,
        legend_note=f"color: reward\n{lo:.2f} (dark) .. {hi:.2f} (light)\ntriangle: worse than random",
    )
    for p in xplt:
        x = p["xplt"]
        worse = "random" in p and x.mean_reward < p["random"].mean_reward
        t = (x.mean_reward - lo) / (hi - lo) if hi > lo else 0.5
        size = 3.0 + 5.0 * (1.0 - min((x.var_reward or 0.0) / vmax, 1.0))
        fig.points.append(Point(x.d12, x.d13, colormap(t), triangle=worse, size=size))
    return fig


def _throughput_figure(rows: Sequence[ResultRow]) -> Figure:
    xplt = [r for r in rows if r.policy == "xplt"]
    vmax = max(r.var_reward or 0.0 for r in xplt) or 1.0
    fig = Figure(
        title="Expected optimal reward vs final-stage allocation",
        xlabel="final-stage allocation",
        ylabel="expected optimal reward",
        legend_note="size ~ 1 / variance",
    )
    for r in xplt:
        size = 3.0 + 5.0 * (1.0 - min((r.var_reward or 0.0) / vmax, 1.0))
        fig.points.append(Point(float(r.allocation.counts[-1]), r.mean_reward, PALETTE[0], size=size))
    return fig
