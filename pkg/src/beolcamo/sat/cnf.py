"""CNF container with DIMACS serialisation."""
from __future__ import annotations

from dataclasses import dataclass, field


class DimacsError(ValueError):
    pass


@dataclass
class Cnf:
    """Clauses over variables ``1..n_vars`` in DIMACS literal convention.

    :meth:`add_clause` normalises each clause: repeated literals are merged
    and tautologies (``x`` together with ``-x``) are dropped.
    """
    n_vars: int = 0
    clauses: list[tuple[int, ...]] = field(default_factory=list)
    names: dict[str, int] = field(default_factory=dict)

    def new_var(self, name: str | None = None) -> int:
        self.n_vars += 1
        if name is not None:
            self.names[name] = self.n_vars
        return self.n_vars

    def add_clause(self, lits) -> bool:
        """Append a clause; returns ``False`` if it was a dropped tautology."""
        seen: dict[int, None] = {}
        for x in lits:
            x = int(x)
            if x == 0 or abs(x) > self.n_vars:
                raise DimacsError(f"literal {x} out of range 1..{self.n_vars}")
            if -x in seen:
                return False
            seen[x] = None
        self.clauses.append(tuple(seen))
        return True

    def __len__(self):
        return len(self.clauses)


def to_dimacs(cnf: Cnf, comments=()) -> str:
    out = [f"c {c}" for c in comments]
    out.append(f"p cnf {cnf.n_vars} {len(cnf.clauses)}")
    out.extend(" ".join(map(str, c)) + " 0" for c in cnf.clauses)
    return "\n".join(out) + "\n"


def from_dimacs(text: str) -> Cnf:
    """Parse DIMACS CNF.  Clauses may span lines; ``%`` ends the body (SATLIB style)."""
    cnf = None
    n_decl = 0
    cur: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("%"):
            break
        if s.startswith("p"):
            parts = s.split()
            if cnf is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad problem line {s!r}")
            try:
                nv, n_decl = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: bad problem line {s!r}") from None
            cnf = Cnf(n_vars=nv)
            continue
        if cnf is None:
            raise DimacsError(f"line {lineno}: clause before problem line")
        for tok in s.split():
            try:
                x = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if x == 0:
                cnf.add_clause(cur)
                cur = []
            elif abs(x) > cnf.n_vars:
                raise DimacsError(f"line {lineno}: literal {x} exceeds {cnf.n_vars} variables")
            else:
                cur.append(x)
    if cnf is None:
        raise DimacsError("missing problem line")
    if cur:
        cnf.add_clause(cur)
    return cnf
