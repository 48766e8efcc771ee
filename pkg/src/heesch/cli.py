"""Batch driver: shape streams in, TSV reports, histograms, witnesses and SVG out."""
from __future__ import annotations

import argparse
import logging
import re
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import lattice
from .cnf import Budget
from .encoder import HOLES_ALLOWED, EncodeMode, Witness
from .engine import (DEFAULT_CUTOFF, EngineOptions, Status, compute_h_c, compute_h_h,
                     heesch_numbers, validate_witness)
from .errors import HeeschError, HoledInputError, ParseError
from .lattice import GridKind, Transform
from .polyform import Shape, enumerate_free, place, read_shapes, serialize_shape

log = logging.getLogger(__name__)

MODES = ("hc", "hh", "both")
ERROR = "ERROR"
HEADER = "# id\tsize\th_c\th_h\tstatus\titerations\tseconds\tnote"


@dataclass
class RunConfig:
    grid: GridKind
    input_path: Path | None = None
    enumerate_n: int | None = None
    cutoff: int = DEFAULT_CUTOFF
    solver: str = "auto"
    modes: str = "both"
    budget: Budget = field(default_factory=Budget)
    jobs: int = 1
    report: Path | None = None
    witness_dir: Path | None = None
    svg_dir: Path | None = None

    def __post_init__(self):
        self.grid = GridKind.parse(self.grid)
        if self.cutoff < 1:
            raise ValueError("cutoff must be at least 1")
        if self.jobs < 1:
            raise ValueError("need at least one worker")
        if self.modes not in MODES:
            raise ValueError(f"modes must be one of {MODES}")
        if (self.input_path is None) == (self.enumerate_n is None):
            raise ValueError("give exactly one of an input file or an enumeration size")


@dataclass
class Record:
    """One report line.  ``h_c``/``h_h`` hold a value, '>=k' or '-'."""

    id: str
    size: int
    h_c: str = "-"
    h_h: str = "-"
    status: str = ERROR
    iterations: int = 0
    seconds: float = 0.0
    note: str = ""
    witnesses: dict[str, Witness] = field(default_factory=dict, repr=False, compare=False)

    def tsv(self) -> str:
        return "\t".join([self.id, str(self.size), self.h_c, self.h_h, self.status,
                          str(self.iterations), f"{self.seconds:.3f}", self.note])


def parse_report(lines: Iterable[str]) -> list[Record]:
    out = []
    for line in lines:
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.rstrip("\n").split("\t")
        cols += [""] * (8 - len(cols))
        out.append(Record(cols[0], int(cols[1]), cols[2], cols[3], cols[4],
                          int(cols[5] or 0), float(cols[6] or 0), cols[7]))
    return out


def _value(v: int | None, lower: int, status: Status) -> str:
    if v is not None:
        return str(v)
    return f">={lower}" if status is not Status.REJECTED_HOLED_INPUT else "-"


def _classify(shape: Shape, ident: str, cutoff: int, modes: str, budget: Budget,
              options: EngineOptions) -> Record:
    started = time.perf_counter()
    rec = Record(ident, len(shape))
    try:
        if modes == "both":
            r = heesch_numbers(shape, cutoff, budget, options)
            rec.h_c = _value(r.h_c, r.h_c_lower, r.status)
            rec.h_h = _value(r.h_h, r.h_h_lower, r.status)
            rec.status, rec.iterations = r.status.value, r.stats.solve_calls
            rec.witnesses = {k: w for k, w in r.witnesses.items() if w is not None}
        else:
            fn, col = (compute_h_c, "h_c") if modes == "hc" else (compute_h_h, "h_h")
            m = fn(shape, cutoff, budget, options)
            setattr(rec, col, _value(m.value, m.lower_bound, m.status))
            rec.status, rec.iterations = m.status.value, m.stats.solve_calls
            if m.witness is not None:
                rec.witnesses = {modes: m.witness}
    except HoledInputError as exc:
        rec.status, rec.note = Status.REJECTED_HOLED_INPUT.value, str(exc)
    except HeeschError as exc:
        rec.status, rec.note = ERROR, f"{type(exc).__name__}: {exc}"
    rec.seconds = time.perf_counter() - started
    return rec


def _job(args) -> Record:
    return _classify(*args)


def _sources(config: RunConfig) -> Iterator[tuple[str, Shape | ParseError]]:
    if config.enumerate_n is not None:
        for shape in enumerate_free(config.grid, config.enumerate_n, exclude_holed=True):
            yield shape.name, shape
        return
    with open(config.input_path) as fh:
        for i, item in enumerate(read_shapes(fh, config.grid), 1):
            if isinstance(item, ParseError):
                yield f"line{item.line}", item
            else:
                yield item.name or f"s{i}", item


def run_batch(config: RunConfig) -> Iterator[Record]:
    """Records in input order, whatever the worker count."""
    options = EngineOptions(solver=config.solver)
    items = list(_sources(config))
    jobs = [(item, ident, config.cutoff, config.modes, config.budget, options)
            for ident, item in items if isinstance(item, Shape)]
    if config.jobs == 1:
        done = map(_job, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=config.jobs)
        done = pool.map(_job, jobs, chunksize=1)
    try:
        for ident, item in items:
            if isinstance(item, ParseError):
                yield Record(ident, 0, note=f"parse error: {item}")
            else:
                yield next(done)
    finally:
        if config.jobs > 1:
            pool.shutdown(cancel_futures=True)


# ---------------------------------------------------------------- histograms

def histogram(records: Iterable[Record], measure: str = "h_c") -> list[tuple[int, int, list[int]]]:
    """Rows (size, FINITE count, counts for H = 0, 1, ...), one per size present."""
    by_size: dict[int, Counter] = {}
    finite: Counter = Counter()
    for r in records:
        if r.status == ERROR:
            continue
        by_size.setdefault(r.size, Counter())
        if r.status == Status.FINITE.value:
            finite[r.size] += 1
            by_size[r.size][int(getattr(r, measure))] += 1
    top = max((h for c in by_size.values() for h in c), default=0)
    return [(n, finite[n], [by_size[n][h] for h in range(top + 1)]) for n in sorted(by_size)]


def format_histogram(rows, measure: str = "h_c") -> str:
    width = max((len(counts) for _, _, counts in rows), default=1)
    name = "H_c" if measure == "h_c" else "H_h"
    head = " | ".join(["n", "non-tilers"] + [f"{name}={h}" for h in range(width)])
    body = [" | ".join(str(x) for x in (n, total, *counts)) for n, total, counts in rows]
    return "\n".join([head] + body)


# ----------------------------------------------------------------- witnesses

_WITNESS_LINE = re.compile(r"^\s*(\d+)\s*:\s*(-?\d+)\s+(-?\d+)\s+(-?\d+)\s*$")


def emit_witness(witness: Witness) -> str:
    shape = witness.shape
    lines = [f"# grid {shape.grid.value}", f"# shape {serialize_shape(Shape(shape.grid, shape.cells))}"]
    for k, lev in enumerate(witness.levels):
        lines.extend(f"{k}: {t.orientation} {t.tx} {t.ty}" for t in lev)
    return "\n".join(lines) + "\n"


def parse_witness(text: str, shape: Shape | None = None,
                  mode: EncodeMode = HOLES_ALLOWED) -> Witness:
    """Inverse of :func:`emit_witness`; the result is validated before it is returned."""
    from .polyform import parse_shape

    grid = shape.grid if shape is not None else None
    levels: list[list[Transform]] = []
    where: dict[tuple[int, Transform], int] = {}
    last = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, rest = line[1:].strip().partition(" ")
            try:
                if key == "grid" and grid is None:
                    grid = GridKind.parse(rest.strip())
                elif key == "shape" and shape is None:
                    shape = parse_shape(rest, grid or GridKind.SQUARE)
            except (ValueError, ParseError) as exc:
                raise ParseError(f"line {lineno}: {exc}", line=lineno) from exc
            continue
        m = _WITNESS_LINE.match(line)
        if not m:
            raise ParseError(f"line {lineno}: expected 'k: o tx ty', got {raw!r}", line=lineno)
        k, o, tx, ty = map(int, m.groups())
        if k > len(levels):
            raise ParseError(f"line {lineno}: level {k} before level {len(levels)}", line=lineno)
        if k == len(levels):
            levels.append([])
        t = Transform(o, tx, ty)
        levels[k].append(t)
        where.setdefault((k, t), lineno)
        last = lineno
    if shape is None:
        raise ParseError("no shape given and no '# shape' header", line=1)
    witness = Witness(shape, levels)
    problems = validate_witness(shape, witness, mode)
    if problems:
        lineno = _blame(problems[0], where, last)
        raise ParseError(f"line {lineno}: invalid witness: {problems[0]}", line=lineno)
    return witness


def _blame(problem: str, where: dict, last: int) -> int:
    m = re.match(r"level (\d+): (?:invalid transform )?\((-?\d+), (-?\d+), (-?\d+)\)", problem)
    if m:
        k, o, tx, ty = map(int, m.groups())
        return where.get((k, Transform(o, tx, ty)), last)
    m = re.match(r"level (\d+):", problem)
    if m:
        k = int(m.group(1))
        return min((ln for (lev, _), ln in where.items() if lev == k), default=last)
    return last


# ----------------------------------------------------------------------- SVG

PALETTE = ["#333333", "#e6550d", "#3182bd", "#31a354", "#756bb1", "#fdae6b", "#9ecae1",
           "#a1d99b", "#bcbddc"]


def outline(grid: GridKind, cells) -> list[tuple[int, int]]:
    """Corner keys of the boundary of a simply connected cell set, counter-clockwise."""
    count: Counter = Counter()
    for p in cells:
        vk = lattice.vertex_keys(grid, p)
        for a, b in zip(vk, vk[1:] + vk[:1]):
            count[(a, b)] += 1
    nxt = {a: b for (a, b) in count if (b, a) not in count}
    start = min(nxt)
    loop = [start]
    while nxt[loop[-1]] != start:
        loop.append(nxt[loop[-1]])
    return loop


def render_svg(witness: Witness, scale: float = 24.0) -> str:
    grid = witness.shape.grid
    polys = []
    for k, lev in enumerate(witness.levels):
        for t in lev:
            pts = [lattice.vertex_to_cartesian(grid, v) for v in outline(grid, place(witness.shape, t).cells)]
            polys.append((k, pts))
    xs = [x for _, pts in polys for x, _ in pts]
    ys = [y for _, pts in polys for _, y in pts]
    pad = 1.0
    x0, y1 = min(xs) - pad, max(ys) + pad
    w = (max(xs) - min(xs) + 2 * pad) * scale
    h = (max(ys) - min(ys) + 2 * pad) * scale
    legend_h = 18 * len(witness.levels) + 8
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h + legend_h:.1f}" '
           f'viewBox="0 0 {w:.3f} {h + legend_h:.3f}">']
    for k, pts in polys:
        coords = " ".join(f"{(x - x0) * scale:.3f},{(y1 - y) * scale:.3f}" for x, y in pts)
        colour = PALETTE[k % len(PALETTE)]
        out.append(f'<polygon class="level{k}" points="{coords}" fill="{colour}" '
                   f'stroke="black" stroke-width="1"/>')
    for k in range(len(witness.levels)):
        y = h + 6 + 18 * k
        out.append(f'<rect x="6" y="{y:.1f}" width="12" height="12" fill="{PALETTE[k % len(PALETTE)]}"/>')
        out.append(f'<text x="24" y="{y + 11:.1f}" font-size="12">level {k}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------------- CLI

def parse_budget(text: str | None) -> Budget:
    """'60s', '50000c' or both, comma separated."""
    if not text:
        return Budget()
    seconds = conflicts = None
    for part in text.split(","):
        part = part.strip()
        if part.endswith("s"):
            seconds = float(part[:-1])
        elif part.endswith("c"):
            conflicts = int(part[:-1])
        else:
            raise ValueError(f"budget part {part!r} needs an 's' or 'c' suffix")
    return Budget(conflicts=conflicts, seconds=seconds)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heesch", description="Heesch numbers of polyforms via SAT.")
    p.add_argument("--grid", required=True, choices=[g.value for g in GridKind])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="shape file, one '[id:] x,y x,y ...' per line")
    src.add_argument("--enumerate", type=int, metavar="N", help="all simply connected N-cell shapes")
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    p.add_argument("--modes", choices=MODES, default="both")
    p.add_argument("--solver", default="auto",
                   help="auto, builtin, pysat[:name] or cmd:TEMPLATE ({path} is the DIMACS file)")
    p.add_argument("--budget", help="per-shape limit such as 60s, 50000c or 60s,50000c")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", type=Path, help="TSV destination (default stdout)")
    p.add_argument("--witness", type=Path, metavar="DIR")
    p.add_argument("--svg", type=Path, metavar="DIR")
    p.add_argument("--histogram", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = RunConfig(GridKind.parse(args.grid), args.input, args.enumerate, args.cutoff,
                           args.solver, args.modes, parse_budget(args.budget), args.jobs,
                           args.report, args.witness, args.svg)
    except ValueError as exc:
        print(f"heesch: {exc}", file=sys.stderr)
        return 2
    if config.input_path is not None and not config.input_path.is_file():
        print(f"heesch: cannot read {config.input_path}", file=sys.stderr)
        return 2
    for d in (config.witness_dir, config.svg_dir):
        if d is not None:
            d.mkdir(parents=True, exist_ok=True)
    sink = open(config.report, "w") if config.report else sys.stdout
    records = []
    try:
        print(HEADER, file=sink, flush=True)
        for rec in run_batch(config):
            print(rec.tsv(), file=sink, flush=True)
            records.append(rec)
            _write_artifacts(rec, config)
    finally:
        if sink is not sys.stdout:
            sink.close()
    if args.histogram:
        prefix = "# " if sink is sys.stdout else ""
        for measure in ("h_c", "h_h"):
            if config.modes in ("both", measure.replace("_", "")):
                text = format_histogram(histogram(records, measure), measure)
                print("\n".join(prefix + line for line in text.splitlines()))
    return 0


def _write_artifacts(rec: Record, config: RunConfig) -> None:
    for key, w in rec.witnesses.items():
        stem = f"{rec.id}.{key}"
        if config.witness_dir is not None:
            (config.witness_dir / f"{stem}.txt").write_text(emit_witness(w))
        if config.svg_dir is not None:
            (config.svg_dir / f"{stem}.svg").write_text(render_svg(w))


if __name__ == "__main__":
    sys.exit(main())
