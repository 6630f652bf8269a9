"""Report serialization: canonical JSON and an aligned text summary."""

from __future__ import annotations

import json

from .runner import Report


def emit_report(report: Report, fmt: str = "json", timings: bool = False) -> bytes:
    if fmt == "json":
        data = report.as_dict(timings)
        return (json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "text":
        return render_text(report, timings).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def _summary(rec) -> str:
    r = rec.result
    if rec.status == "failed":
        return f"{rec.error['type']}: {rec.error['message']}"
    if rec.status == "skipped":
        return "skipped"
    if "status" in r:
        extra = ""
        if "witness" in r:
            w = r["witness"]
            extra = f" witness {w['generator']} power {w['power']} level {w['level']}"
        elif "orders" in r:
            extra = " orders " + ",".join(str(o["order"]) for o in r["orders"])
        return r["status"] + extra
    for key in ("passed", "found", "agrees", "coherent", "reconstructs", "invariant"):
        if key in r:
            return f"{key}={str(r[key]).lower()}"
    if "verdict" in r:
        return r["verdict"]
    if "equal_to_depth" in r:
        return f"metric {r['metric']}"
    if "basis" in r:
        return "basis " + ", ".join(r["basis"]) if isinstance(r["basis"], list) else ""
    if "levels" in r and r["levels"] and "series" in r["levels"][-1]:
        return r["levels"][-1]["series"]
    if "representative" in r:
        return r["representative"]
    if "presentation" in r:
        return r["presentation"]
    return "ok"


def render_text(report: Report, timings: bool = False) -> str:
    from .. import __version__

    cfg = report.config.as_dict()
    lines = [
        f"indiga {__version__}  " + "  ".join(f"{k}={v}" for k, v in sorted(cfg.items())),
    ]
    if report.source:
        lines.append(f"script {report.source}")
    width = max((len(r.statement) for r in report.records), default=0)
    width = min(width, 60)
    for rec in report.records:
        stmt = rec.statement if len(rec.statement) <= 60 else rec.statement[:57] + "..."
        mark = {"ok": "ok  ", "failed": "FAIL", "skipped": "skip"}[rec.status]
        tail = f"  ({rec.seconds:.3f}s)" if timings else ""
        lines.append(f"{rec.line:>4}  {mark}  {stmt:<{width}}  {_summary(rec)}{tail}")
    lines.append(f"{len(report.records)} records, {len(report.failed)} failed")
    return "\n".join(lines) + "\n"
