"""Result rows, CSV output and human-readable summaries."""
import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from .config import CSV_HEADER


@dataclass
class ResultRow:
    instance: str
    algorithm: str
    p: Optional[float]
    epsilon: Optional[float]
    seed: int
    value: float
    opt: Optional[float]
    ratio: Optional[float]
    oracle_calls: int
    rounds: int
    sample_size: int
    elapsed_ms: float

    def cells(self) -> List[str]:
        return [
            self.instance,
            self.algorithm,
            _num(self.p),
            _num(self.epsilon),
            str(self.seed),
            _num(self.value),
            _num(self.opt),
            _num(self.ratio),
            str(self.oracle_calls),
            str(self.rounds),
            str(self.sample_size),
            f"{self.elapsed_ms:.3f}",
        ]


def _num(x: Optional[float]) -> str:
    # repr keeps full precision and never depends on locale; unknown stays empty
    return "" if x is None else repr(float(x))


def ratio_of(value: float, opt: Optional[float]) -> Optional[float]:
    if opt is None or opt <= 0:
        return None
    return value / opt


def render_csv(rows: Iterable[ResultRow], summary: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    for line in summary:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def write_csv(path: str, rows: Iterable[ResultRow], summary: Iterable[str] = ()):
    Path(path).write_text(render_csv(rows, summary), encoding="utf-8")


def data_rows(text: str, drop_timing: bool = True) -> List[List[str]]:
    """Parse emitted CSV back into data rows (comment lines dropped)."""
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    rows = list(csv.reader(lines))[1:]
    if drop_timing:
        idx = CSV_HEADER.index("elapsed_ms")
        rows = [r[:idx] + r[idx + 1:] for r in rows]
    return rows


def format_summary(title: str, stats: Dict[str, "object"]) -> Tuple[str, List[str]]:
    """A bracketed title line plus one `name: mean se bound trials PASS/FAIL` line per statistic."""
    subject = f"[{title}]"
    body = []
    for name, report in stats.items():
        body.append(
            f"{name}: mean={report.mean:.6g} se={report.std_error:.3g} "
            f"bound={report.bound:.6g} trials={report.trials} {'PASS' if report.passed else 'FAIL'}"
        )
    return subject, body


def format_failure(check: str, subject: str, witness) -> str:
    lines = [f"[VERIFY FAIL] {check} on {subject}"]
    if witness is not None:
        lines.append(f"  witness: {witness}")
    return "\n".join(lines)
