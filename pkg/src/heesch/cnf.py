"""CNF formulas, solver sessions, and DIMACS interchange.

Three backends sit behind :class:`SolveSession`:

* ``builtin``: the CDCL solver in this module (no dependencies),
* ``pysat`` / ``pysat:<name>``: a compiled solver from python-sat, when installed,
* ``cmd:<template>``: any external program that reads a DIMACS file and prints
  SAT-competition output (``{path}`` in the template is replaced by the file,
  otherwise the path is appended).
"""
from __future__ import annotations

import enum
import heapq
import os
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Sequence

from .errors import ParseError

Clause = list[int]


class SolveStatus(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


@dataclass
class Budget:
    """Per-call resource limits; ``None`` means unlimited."""

    conflicts: int | None = None
    seconds: float | None = None


@dataclass
class SolveResult:
    status: SolveStatus
    model: list[int] | None = None

    @property
    def sat(self) -> bool:
        return self.status is SolveStatus.SAT


@dataclass
class CnfFormula:
    num_vars: int = 0
    clauses: list[Clause] = field(default_factory=list)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add_clause(self, clause: Iterable[int]) -> None:
        clause = list(clause)
        if not clause:
            raise ValueError("empty clause")
        for lit in clause:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")
        self.clauses.append(clause)

    def extend(self, clauses: Iterable[Clause]) -> None:
        """Append clauses without per-literal checks (trusted producers)."""
        self.clauses.extend(clauses)


def evaluate(clauses: Iterable[Sequence[int]], model: Iterable[int]) -> bool:
    """True iff every clause has a literal made true by ``model``."""
    true = set(model)
    return all(any(lit in true for lit in clause) for clause in clauses)


def export_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    lines.extend(" ".join(map(str, c)) + " 0" for c in formula.clauses)
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    formula = None
    pending: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad header {line!r}", line=lineno)
            formula = CnfFormula(int(parts[2]))
            continue
        if formula is None:
            raise ParseError("clause before header", line=lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", token=tok, line=lineno) from None
            if lit == 0:
                formula.add_clause(pending)
                pending = []
            else:
                pending.append(lit)
    if formula is None:
        raise ParseError("missing 'p cnf' header")
    if pending:
        raise ParseError("last clause is not 0-terminated")
    return formula


def import_model(text: str, num_vars: int | None = None) -> SolveResult:
    """Read SAT-competition solver output (``s`` status line, ``v`` value lines)."""
    status = None
    values: list[int] = []
    terminated = False
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if line.startswith("s "):
            word = line[2:].strip()
            status = {"SATISFIABLE": SolveStatus.SAT, "UNSATISFIABLE": SolveStatus.UNSAT,
                      "UNKNOWN": SolveStatus.BUDGET_EXCEEDED}.get(word)
            if status is None:
                raise ParseError(f"unknown status {word!r}", line=lineno)
        elif line.startswith("v"):
            for tok in line[1:].split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise ParseError(f"bad value {tok!r}", token=tok, line=lineno) from None
                if lit == 0:
                    terminated = True
                else:
                    values.append(lit)
    if status is None:
        raise ParseError("no status line in solver output")
    if status is not SolveStatus.SAT:
        return SolveResult(status)
    if not terminated:
        raise ParseError("value lines are not 0-terminated")
    n = num_vars if num_vars is not None else max((abs(v) for v in values), default=0)
    assigned = {abs(v): v for v in values}
    return SolveResult(status, [assigned.get(v, -v) for v in range(1, n + 1)])


class BuiltinSolver:
    """Conflict-driven clause learning with two watched literals.

    Literals are encoded internally as ``2*var + sign``.  VSIDS decisions with
    phase saving, first-UIP learning, Luby restarts.  Decision order is fully
    deterministic.
    """

    def __init__(self, num_vars: int = 0):
        self.num_vars = 0
        self.value: list[int] = [0, 0]      # per literal: 1 true, -1 false, 0 free
        self.level: list[int] = [0]
        self.reason: list[int] = [-1]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [1]
        self.watches: list[list[int]] = [[], []]
        self.clauses: list[list[int]] = []
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.ok = True
        self.conflicts = 0
        self.model: list[int] | None = None
        self._ensure(num_vars)

    def _ensure(self, n: int) -> None:
        while self.num_vars < n:
            self.num_vars += 1
            self.value += [0, 0]
            self.level.append(0)
            self.reason.append(-1)
            self.activity.append(0.0)
            self.phase.append(1)
            self.watches += [[], []]
            heapq.heappush(self.heap, (0.0, self.num_vars))

    # -- clause database ------------------------------------------------
    def add_clause(self, clause: Iterable[int]) -> None:
        if not self.ok:
            return
        self._cancel_until(0)
        lits = set()
        for x in clause:
            self._ensure(abs(x))
            lits.add(2 * abs(x) + (x < 0))
        out = []
        for lit in sorted(lits):
            if (lit ^ 1) in lits or self.value[lit] == 1:
                return
            if self.value[lit] == 0:
                out.append(lit)
        if not out:
            self.ok = False
            return
        if len(out) == 1:
            self._enqueue(out[0], -1)
            if self._propagate() != -1:
                self.ok = False
            return
        ci = len(self.clauses)
        self.clauses.append(out)
        self.watches[out[0]].append(ci)
        self.watches[out[1]].append(ci)

    # -- search -----------------------------------------------------------
    def _enqueue(self, lit: int, reason: int) -> None:
        v = lit >> 1
        self.value[lit] = 1
        self.value[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        value, clauses, watches = self.value, self.clauses, self.watches
        while self.qhead < len(self.trail):
            false_lit = self.trail[self.qhead] ^ 1
            self.qhead += 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                if value[c[0]] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if value[c[k]] != -1:
                        c[1], c[k] = c[k], false_lit
                        watches[c[1]].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if value[c[0]] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(self.trail)
                        return ci
                    self._enqueue(c[0], ci)
            del ws[j:]
        return -1

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.num_vars + 1)
                         if self.value[2 * u] == 0]
            heapq.heapify(self.heap)
        elif self.value[2 * v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        lit = -1
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        while True:
            for q in self.clauses[confl]:
                if q == lit:
                    continue
                v = q >> 1
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] == cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            lit = self.trail[idx]
            idx -= 1
            confl = self.reason[lit >> 1]
            seen.discard(lit >> 1)
            counter -= 1
            if counter == 0:
                break
        learnt[0] = lit ^ 1
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: self.level[learnt[i] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[learnt[1] >> 1]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        for lit in self.trail[start:]:
            v = lit >> 1
            self.phase[v] = lit & 1
            self.value[lit] = self.value[lit ^ 1] = 0
            self.reason[v] = -1
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int:
        while self.heap:
            _, v = heapq.heappop(self.heap)
            if self.value[2 * v] == 0:
                return 2 * v + self.phase[v]
        return -1

    @staticmethod
    def _luby(i: int) -> int:
        size, seq = 1, 0
        while size < i + 1:
            seq += 1
            size = 2 * size + 1
        while size - 1 != i:
            size = (size - 1) >> 1
            seq -= 1
            i %= size
        return 1 << seq

    def solve(self, conflict_budget: int | None = None, seconds: float | None = None) -> bool | None:
        """True (model in ``self.model``), False, or None when a budget ran out."""
        self.model = None
        if not self.ok:
            return False
        self._cancel_until(0)
        if self._propagate() != -1:
            self.ok = False
            return False
        deadline = None if seconds is None else time.monotonic() + seconds
        start_conflicts = self.conflicts
        restart = 0
        while True:
            limit = 100 * self._luby(restart)
            restart += 1
            local = 0
            while True:
                confl = self._propagate()
                if confl != -1:
                    self.conflicts += 1
                    local += 1
                    if not self.trail_lim:
                        self.ok = False
                        return False
                    learnt, back = self._analyze(confl)
                    self._cancel_until(back)
                    if len(learnt) == 1:
                        self._enqueue(learnt[0], -1)
                    else:
                        ci = len(self.clauses)
                        self.clauses.append(learnt)
                        self.watches[learnt[0]].append(ci)
                        self.watches[learnt[1]].append(ci)
                        self._enqueue(learnt[0], ci)
                    self.var_inc /= 0.95
                    if conflict_budget is not None and self.conflicts - start_conflicts >= conflict_budget:
                        self._cancel_until(0)
                        return None
                    if deadline is not None and self.conflicts % 64 == 0 and time.monotonic() > deadline:
                        self._cancel_until(0)
                        return None
                    continue
                if local >= limit:
                    self._cancel_until(0)
                    break
                lit = self._pick()
                if lit == -1:
                    self.model = [v if self.value[2 * v] == 1 else -v
                                  for v in range(1, self.num_vars + 1)]
                    self._cancel_until(0)
                    return True
                self.trail_lim.append(len(self.trail))
                self._enqueue(lit, -1)


class _BuiltinBackend:
    name = "builtin"

    def __init__(self):
        self.solver = BuiltinSolver()

    def add_clauses(self, clauses, num_vars):
        self.solver._ensure(num_vars)
        for c in clauses:
            self.solver.add_clause(c)

    def solve(self, num_vars: int, budget: Budget) -> SolveResult:
        self.solver._ensure(num_vars)
        r = self.solver.solve(budget.conflicts, budget.seconds)
        if r is None:
            return SolveResult(SolveStatus.BUDGET_EXCEEDED)
        if not r:
            return SolveResult(SolveStatus.UNSAT)
        return SolveResult(SolveStatus.SAT, self.solver.model)


# the fastest of pysat's bundled solvers on hard corona formulas in our runs
DEFAULT_PYSAT = "glucose4"


class _PysatBackend:
    def __init__(self, name: str = DEFAULT_PYSAT):
        from pysat.solvers import Solver

        self.name = f"pysat:{name}"
        self.solver = Solver(name=name)
        self.inconsistent = False
        self._add = self._raw_adder()

    def _raw_adder(self):
        # pysat's per-clause Python wrappers cost more than the C call; use the
        # C entry point directly when the binding exposes it
        try:
            import pysolvers
        except ImportError:
            return None
        inner = self.solver.solver
        handles = [v for v in vars(inner).values() if type(v).__name__ == "PyCapsule"]
        prefix = type(inner).__name__.lower()
        fn = getattr(pysolvers, f"{prefix}_add_cl", None)
        if fn is None and prefix == "glucose4":
            fn = getattr(pysolvers, "glucose41_add_cl", None)
        if fn is None or len(handles) != 1:
            return None
        return partial(fn, handles[0])

    def add_clauses(self, clauses, num_vars):
        if self._add is None:
            self.solver.append_formula(clauses)
        elif not all(map(self._add, clauses)):
            self.inconsistent = True

    def solve(self, num_vars: int, budget: Budget) -> SolveResult:
        s = self.solver
        if self.inconsistent:
            return SolveResult(SolveStatus.UNSAT)
        if budget.conflicts is None and budget.seconds is None:
            ok = s.solve()
        else:
            if budget.conflicts is not None:
                s.conf_budget(budget.conflicts)
            timer = None
            if budget.seconds is not None:
                timer = threading.Timer(budget.seconds, s.interrupt)
                timer.start()
            try:
                ok = s.solve_limited(expect_interrupt=timer is not None)
            finally:
                if timer is not None:
                    timer.cancel()
                    s.clear_interrupt()
        if ok is None:
            return SolveResult(SolveStatus.BUDGET_EXCEEDED)
        if not ok:
            return SolveResult(SolveStatus.UNSAT)
        raw = s.get_model() or []
        have = {abs(v): v for v in raw}
        return SolveResult(SolveStatus.SAT, [have.get(v, -v) for v in range(1, num_vars + 1)])


class _CommandBackend:
    """Re-exports the whole formula for every solve call."""

    def __init__(self, template: str):
        self.name = f"cmd:{template}"
        self.template = template
        self.formula = CnfFormula()

    def add_clauses(self, clauses, num_vars):
        self.formula.num_vars = max(self.formula.num_vars, num_vars)
        self.formula.extend(clauses)

    def solve(self, num_vars: int, budget: Budget) -> SolveResult:
        self.formula.num_vars = max(self.formula.num_vars, num_vars)
        fd, path = tempfile.mkstemp(suffix=".cnf")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(export_dimacs(self.formula))
            if "{path}" in self.template:
                cmd = shlex.split(self.template.replace("{path}", shlex.quote(path)))
            else:
                cmd = shlex.split(self.template) + [path]
            try:
                proc = subprocess.run(cmd, capture_output=True, text=True, timeout=budget.seconds)
            except subprocess.TimeoutExpired:
                return SolveResult(SolveStatus.BUDGET_EXCEEDED)
        finally:
            os.unlink(path)
        return import_model(proc.stdout, self.formula.num_vars)


def pysat_available() -> bool:
    try:
        import pysat.solvers  # noqa: F401
    except ImportError:
        return False
    return True


def make_backend(spec: str = "auto"):
    if spec == "auto":
        spec = "pysat" if pysat_available() else "builtin"
    if spec == "builtin":
        return _BuiltinBackend()
    if spec == "pysat":
        return _PysatBackend()
    if spec.startswith("pysat:"):
        return _PysatBackend(spec.split(":", 1)[1])
    if spec.startswith("cmd:"):
        return _CommandBackend(spec[4:])
    raise ValueError(f"unknown solver {spec!r}")


class SolveSession:
    """A formula under construction plus the solver that owns it.

    Clauses persist across :meth:`solve` calls, so blocking clauses can be added
    between calls.  Not thread-safe; use one session per worker.
    """

    def __init__(self, formula: CnfFormula | None = None, solver: str = "auto"):
        self.formula = CnfFormula()
        self.backend = make_backend(solver)
        self.inconsistent = False
        self.model: list[int] | None = None
        self.solve_calls = 0
        if formula is not None:
            self.add_formula(formula)

    def new_var(self) -> int:
        return self.formula.new_var()

    def add_formula(self, formula: CnfFormula) -> None:
        self.formula.num_vars = max(self.formula.num_vars, formula.num_vars)
        self.formula.extend(formula.clauses)
        self.backend.add_clauses(formula.clauses, self.formula.num_vars)

    def add_clause(self, clause: Iterable[int]) -> SolveSession:
        clause = list(clause)
        if not clause:
            self.inconsistent = True
            return self
        self.formula.add_clause(clause)
        self.backend.add_clauses([clause], self.formula.num_vars)
        return self

    def solve(self, budget: Budget | None = None) -> SolveResult:
        self.solve_calls += 1
        if self.inconsistent:
            self.model = None
            return SolveResult(SolveStatus.UNSAT)
        result = self.backend.solve(self.formula.num_vars, budget or Budget())
        self.model = result.model
        return result


def solve(formula: CnfFormula, solver: str = "auto", budget: Budget | None = None) -> SolveResult:
    return SolveSession(formula, solver).solve(budget)
