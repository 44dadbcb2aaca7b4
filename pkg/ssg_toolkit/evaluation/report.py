"""Plain-text rendering of experiment reports."""
from typing import List, Optional, Sequence

from ssg_toolkit.evaluation.experiment import EvalReport

_MISSING = "-"


def _cell(value: Optional[float]) -> str:
    return _MISSING if value is None else f"{value:.2f}"


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> List[str]:
    widths = [max(len(str(c)) for c in column) for column in zip(header, *rows)]
    line = lambda cells: "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    return [line(header), line(["-" * w for w in widths]), *(line(r) for r in rows)]


def format_report(report: EvalReport) -> str:
    """Prediction and retrieval tables followed by change-detection counts."""
    lines = [f"Experiment {report.name} (seed {report.provenance.get('seed')}, "
             f"version {report.provenance.get('version')})"]
    lines.append(", ".join(f"{k} {v}" for k, v in sorted(report.counts.items())))

    if report.prediction:
        first = report.prediction[0]
        keys = [("relationship", k) for k in first.relationship] + [("object", k) for k in first.object] \
            + [("predicate", k) for k in first.predicate]
        header = ["model"] + [f"{group[:3]} {k}" for group, k in keys]
        rows = [[row.model] + [_cell(getattr(row, group)[k]) for group, k in keys] for row in report.prediction]
        lines += ["", "Scene graph prediction"] + _table(header, rows)

    for setting in ("3D-3D", "2D-3D"):
        rows = [r for r in report.retrieval if r.setting == setting]
        if not rows:
            continue
        ks = list(rows[0].topk)
        table = [[r.source, r.coefficient, r.mode] + [_cell(r.topk[k]) for k in ks] for r in rows]
        lines += ["", f"Retrieval {setting}"] + _table(["graphs", "coefficient", "mode"] + ks, table)

    if report.changes is not None:
        lines += ["", f"Change detection: {report.changes.exact}/{report.changes.pairs} "
                      f"rescan(s) match their change log exactly"]
    return "\n".join(lines) + "\n"
