"""CNF formulas - DIMACS I/O, random k-SAT generation and clause-count fitness."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

# Bit i-1 is the truth value of variable x_i.
Assignment = npt.NDArray[np.bool_]


class DimacsError(ValueError):
    """Malformed DIMACS input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Literal:
    """A variable x_i or its negation."""

    variable: int
    negated: bool = False

    @classmethod
    def from_int(cls, value: int) -> "Literal":
        if value == 0:
            raise ValueError("literal 0 is the clause terminator, not a literal")
        return cls(variable=abs(value), negated=value < 0)

    def to_int(self) -> int:
        return -self.variable if self.negated else self.variable


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals."""

    literals: tuple[Literal, ...]

    def __post_init__(self):
        if not self.literals:
            raise ValueError("clause must contain at least one literal")

    @classmethod
    def of(cls, *values: int) -> "Clause":
        return cls(tuple(Literal.from_int(v) for v in values))

    def to_ints(self) -> list[int]:
        return [lit.to_int() for lit in self.literals]

    def __len__(self) -> int:
        return len(self.literals)


@dataclass(frozen=True)
class CnfFormula:
    """Conjunction of clauses over variables x_1..x_n.

    Equality is structural (num_vars and clause sequence). The flat literal
    table used for evaluation is derived once at construction.
    """

    num_vars: int
    clauses: tuple[Clause, ...]
    _var_index: np.ndarray = field(init=False, repr=False, compare=False)
    _negated: np.ndarray = field(init=False, repr=False, compare=False)
    _offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError(f"num_vars must be >= 1, got {self.num_vars}")
        object.__setattr__(self, "clauses", tuple(self.clauses))
        for position, clause in enumerate(self.clauses):
            for lit in clause.literals:
                if not 1 <= lit.variable <= self.num_vars:
                    raise ValueError(
                        f"clause {position + 1}: variable {lit.variable} outside [1, {self.num_vars}]"
                    )

        flat = [lit for clause in self.clauses for lit in clause.literals]
        var_index = np.fromiter((lit.variable - 1 for lit in flat), dtype=np.intp, count=len(flat))
        negated = np.fromiter((lit.negated for lit in flat), dtype=np.bool_, count=len(flat))
        lengths = np.fromiter((len(c) for c in self.clauses), dtype=np.intp, count=len(self.clauses))
        offsets = np.concatenate(([0], np.cumsum(lengths)[:-1])) if len(lengths) else lengths
        object.__setattr__(self, "_var_index", var_index)
        object.__setattr__(self, "_negated", negated)
        object.__setattr__(self, "_offsets", offsets.astype(np.intp))

    @classmethod
    def from_ints(cls, num_vars: int, clauses: Iterable[Sequence[int]]) -> "CnfFormula":
        return cls(num_vars, tuple(Clause.of(*c) for c in clauses))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def clause_satisfaction(self, bits: Assignment) -> np.ndarray:
        """Boolean vector, one entry per clause."""
        bits = self._check(bits)
        if not self.clauses:
            return np.zeros(0, dtype=np.bool_)
        literal_true = bits[self._var_index] != self._negated
        return np.logical_or.reduceat(literal_true, self._offsets)

    def count_satisfied_rows(self, genomes: npt.NDArray[np.bool_]) -> npt.NDArray[np.int64]:
        """Fitness of every row of a (k, n) genome matrix in one pass."""
        genomes = np.asarray(genomes, dtype=np.bool_)
        if genomes.ndim != 2 or genomes.shape[1] != self.num_vars:
            raise ValueError(f"expected a (k, {self.num_vars}) genome matrix, got shape {genomes.shape}")
        if not self.clauses or genomes.shape[0] == 0:
            return np.zeros(genomes.shape[0], dtype=np.int64)
        literal_true = genomes[:, self._var_index] != self._negated
        clause_true = np.logical_or.reduceat(literal_true, self._offsets, axis=1)
        return np.count_nonzero(clause_true, axis=1).astype(np.int64)

    def _check(self, bits: Assignment) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.bool_)
        if bits.shape != (self.num_vars,):
            raise ValueError(
                f"assignment length {bits.shape[0] if bits.ndim else 0} does not match n={self.num_vars}"
            )
        return bits


def make_assignment(bits: Union[str, Sequence[int], Sequence[bool]]) -> Assignment:
    """Build an assignment from a bit string like "1011" or a 0/1 sequence."""
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError(f"assignment string must be binary, got {bits!r}")
        return np.array([c == "1" for c in bits], dtype=np.bool_)
    return np.array([bool(b) for b in bits], dtype=np.bool_)


def count_satisfied(formula: CnfFormula, bits: Assignment) -> int:
    """Number of clauses with at least one true literal (the GA fitness)."""
    return int(np.count_nonzero(formula.clause_satisfaction(bits)))


def unsatisfied_count(formula: CnfFormula, bits: Assignment) -> int:
    return formula.num_clauses - count_satisfied(formula, bits)


def is_satisfying(formula: CnfFormula, bits: Assignment) -> bool:
    return count_satisfied(formula, bits) == formula.num_clauses


def format_assignment(bits: Assignment) -> str:
    """DIMACS-style solution line: ``v 1 -2 3 0``."""
    literals = [str(i + 1) if b else str(-(i + 1)) for i, b in enumerate(np.asarray(bits, dtype=np.bool_))]
    return "v " + " ".join(literals + ["0"])


# --- DIMACS ---------------------------------------------------------------


def parse_dimacs(text: Union[str, TextIO]) -> CnfFormula:
    """Parse DIMACS CNF.

    Lines starting with ``c`` are comments; a line starting with ``%`` ends the
    clause section (SATLIB convention). Clauses may span lines.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text

    header: Optional[tuple[int, int]] = None
    clauses: list[Clause] = []
    pending: list[Literal] = []
    pending_line = 0
    line_no = 0

    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError("duplicate problem line", line_no)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"expected 'p cnf <vars> <clauses>', got {line!r}", line_no)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"non-integer in problem line {line!r}", line_no) from None
            if num_vars < 1 or num_clauses < 0:
                raise DimacsError(f"invalid problem size {num_vars} vars / {num_clauses} clauses", line_no)
            header = (num_vars, num_clauses)
            continue

        if header is None:
            raise DimacsError("clause data before 'p cnf' header", line_no)
        num_vars = header[0]
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                raise DimacsError(f"non-integer token {token!r}", line_no) from None
            if value == 0:
                if not pending:
                    raise DimacsError("empty clause", line_no)
                clauses.append(Clause(tuple(pending)))
                pending = []
                continue
            if abs(value) > num_vars:
                raise DimacsError(f"variable {abs(value)} exceeds n={num_vars}", line_no)
            if not pending:
                pending_line = line_no
            pending.append(Literal.from_int(value))

    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if pending:
        logger.debug("accepting unterminated final clause starting at line %d", pending_line)
        clauses.append(Clause(tuple(pending)))
    if len(clauses) != header[1]:
        raise DimacsError(f"header declares {header[1]} clauses but found {len(clauses)}", line_no)

    return CnfFormula(header[0], tuple(clauses))


def serialize_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    lines.extend(" ".join(str(v) for v in clause.to_ints() + [0]) for clause in formula.clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(path: Union[str, Path]) -> CnfFormula:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_dimacs(handle)


def write_dimacs(formula: CnfFormula, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_dimacs(formula), encoding="utf-8")


# --- Random k-SAT ---------------------------------------------------------


def generate_random_ksat(num_vars: int, num_clauses: int, seed: int, clause_length: int = 3) -> CnfFormula:
    """Uniform random k-SAT: distinct variables per clause, each negated with p=1/2."""
    if clause_length < 1:
        raise ValueError(f"clause_length must be >= 1, got {clause_length}")
    if num_vars < clause_length:
        raise ValueError(f"need at least {clause_length} variables, got {num_vars}")
    if num_clauses < 0:
        raise ValueError(f"num_clauses must be >= 0, got {num_clauses}")

    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(num_clauses):
        variables = rng.choice(num_vars, size=clause_length, replace=False) + 1
        signs = rng.random(clause_length) < 0.5
        clauses.append(Clause(tuple(Literal(int(v), bool(s)) for v, s in zip(variables, signs))))
    return CnfFormula(num_vars, tuple(clauses))


def generate_random_3sat(num_vars: int, clause_ratio: float, seed: int) -> CnfFormula:
    """Random 3-SAT with m = k * n clauses, halves rounded up (4.3 * 5 -> 22)."""
    if num_vars < 3:
        raise ValueError(f"random 3-SAT needs n >= 3, got {num_vars}")
    if clause_ratio <= 0:
        raise ValueError(f"clause ratio must be positive, got {clause_ratio}")
    return generate_random_ksat(num_vars, math.floor(clause_ratio * num_vars + 0.5), seed, clause_length=3)


def generate_planted_ksat(
    num_vars: int, num_clauses: int, seed: int, clause_length: int = 3
) -> tuple[CnfFormula, Assignment]:
    """Random k-SAT restricted to clauses a hidden assignment satisfies.

    Clauses are drawn as in ``generate_random_ksat`` and discarded when the
    hidden assignment falsifies them, so the formula is satisfiable by
    construction. Returns the formula and the hidden assignment.
    """
    if clause_length < 1:
        raise ValueError(f"clause_length must be >= 1, got {clause_length}")
    if num_vars < clause_length:
        raise ValueError(f"need at least {clause_length} variables, got {num_vars}")
    if num_clauses < 0:
        raise ValueError(f"num_clauses must be >= 0, got {num_clauses}")

    rng = np.random.default_rng(seed)
    hidden = rng.random(num_vars) < 0.5
    clauses = []
    while len(clauses) < num_clauses:
        variables = rng.choice(num_vars, size=clause_length, replace=False)
        signs = rng.random(clause_length) < 0.5
        # literal true iff value != negated flag
        if not np.any(hidden[variables] != signs):
            continue
        clauses.append(Clause(tuple(Literal(int(v) + 1, bool(s)) for v, s in zip(variables, signs))))
    return CnfFormula(num_vars, tuple(clauses)), hidden
