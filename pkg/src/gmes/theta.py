"""Length-reducing commutator maps on the derived subgroup and the driver that
iterates them down to length 0 or 2.

Both maps are taken relative to the first generator b of a designated family
(default: the lowest non-empty one) normalized so that its defining vector
starts with 1.  With s the spine coordinate of that family, the two
projections are

    theta1(z) = [a, z_{s+1}^-1]
    theta2(z) = [a, z_{s+n+1} ... z_{s+p}]

(coordinates mod p), where n is the last nonzero position of b's vector.
For family 1 (s = p) these read [a, z_1^-1] and [a, z_{n+1} ... z_p].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import core
from . import words as W
from .datum import GroupDatum, classify, first_nonzero_n
from .fp import inverse_mod


class ThetaError(ValueError):
    pass


def _family(d: GroupDatum, family: int | None) -> int:
    j = family or d.designated_family
    if not d.ranks[j - 1]:
        raise ThetaError(f"family {j} is empty")
    if d.vector(j, 1)[0] % d.p != 1:
        raise ThetaError(f"normalization missing: first defining vector of family {j} must start with 1")
    return j


def _check_kernel(z: W.ReducedWord) -> None:
    if not W.in_kernel(z):
        raise ThetaError(f"word {z} has nonzero exponents, so it is not in the derived subgroup")


def _coord(d: GroupDatum, m: int) -> int:
    return (m - 1) % d.p + 1


def theta_n(d: GroupDatum, family: int | None = None) -> int:
    j = _family(d, family)
    return first_nonzero_n(d.vector(j, 1))


def theta1(z: W.ReducedWord, d: GroupDatum | None = None, family: int | None = None) -> W.ReducedWord:
    d = d or z.datum
    j = _family(d, family)
    _check_kernel(z)
    split = W.section_split(z)
    z1 = split.sections[_coord(d, d.spine(j) + 1) - 1]
    return W.commutator(W.gen(d, "a"), z1.inverse())


def _theta2_argument(z: W.ReducedWord, d: GroupDatum, j: int) -> W.ReducedWord:
    n = first_nonzero_n(d.vector(j, 1))
    if n < 2:
        raise ThetaError(f"theta2 needs n >= 2, got n = {n}")
    s = d.spine(j)
    split = W.section_split(z)
    return W.sections_product(split, [_coord(d, s + t) for t in range(n + 1, d.p + 1)])


def theta2(z: W.ReducedWord, d: GroupDatum | None = None, family: int | None = None) -> W.ReducedWord:
    d = d or z.datum
    j = _family(d, family)
    _check_kernel(z)
    return W.commutator(W.gen(d, "a"), _theta2_argument(z, d, j))


@dataclass(frozen=True)
class ThetaStep:
    operator: str
    input: W.ReducedWord
    output: W.ReducedWord
    length_before: int
    length_after: int

    def to_json(self) -> dict:
        return {"operator": self.operator, "input": str(self.input), "output": str(self.output),
                "length_before": self.length_before, "length_after": self.length_after}


@dataclass(frozen=True)
class ThetaTrace:
    steps: tuple[ThetaStep, ...]
    terminal_length: int | None
    aborted: str | None = None

    @property
    def terminal(self) -> W.ReducedWord | None:
        return self.steps[-1].output if self.steps else None

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps],
                "terminal_length": self.terminal_length, "aborted": self.aborted}


_OPS = {"theta1": theta1, "theta2": theta2}


def reduce_to_terminal(z: W.ReducedWord, d: GroupDatum | None = None, max_steps: int | None = None,
                       family: int | None = None) -> ThetaTrace:
    """Apply theta maps until the length drops to 0 or 2.

    Each round uses theta1 when |z_1| < m/2, else theta2 when the product
    z_{n+1}...z_p is shorter than m/2, else theta2 twice; if none of these
    shortens the word, every composition of at most three maps is tried.
    """
    d = d or z.datum
    j = _family(d, family)
    if not classify(d).torsion_criterion:
        raise ThetaError("theta reduction requires every defining vector to sum to 0 mod p")
    _check_kernel(z)
    budget = 4 * W.length(z) if max_steps is None else max_steps
    steps: list[ThetaStep] = []
    cur = z

    def apply(op: str, x: W.ReducedWord) -> W.ReducedWord:
        return _OPS[op](x, d, j)

    while W.length(cur) > 2:
        m = W.length(cur)
        split = W.section_split(cur)
        z1 = split.sections[_coord(d, d.spine(j) + 1) - 1]
        if W.length(z1) < m / 2:
            plan = ("theta1",)
        elif W.length(_theta2_argument(cur, d, j)) < m / 2:
            plan = ("theta2",)
        else:
            plan = None
            candidates = [("theta2", "theta2")] + [ops for r in (1, 2, 3)
                                                    for ops in itertools.product(("theta1", "theta2"), repeat=r)]
            for ops in candidates:
                x = cur
                for op in ops:
                    x = apply(op, x)
                if W.length(x) < m:
                    plan = ops
                    break
            if plan is None:
                return ThetaTrace(tuple(steps), None, f"no composition of at most 3 maps shortens {cur}")
        for op in plan:
            if len(steps) >= budget:
                return ThetaTrace(tuple(steps), None, f"step budget {budget} exhausted")
            out = apply(op, cur)
            steps.append(ThetaStep(op, cur, out, W.length(cur), W.length(out)))
            cur = out
    return ThetaTrace(tuple(steps), W.length(cur))


@dataclass
class DerivationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [{"identity": name, "passed": ok} for name, ok in self.checks]}


def check_theta_derivations(d: GroupDatum, z: W.ReducedWord, depth: int,
                            family: int | None = None) -> DerivationReport:
    """Check, as depth-`depth` portraits, that the spine section of
    b^((az)^-1) is a.theta1(z) and that of (b^k)^((az)^(p-n)) is a.theta2(z),
    where k e_n = 1."""
    j = _family(d, family)
    _check_kernel(z)
    p = d.p
    s = d.spine(j)
    a = W.gen(d, "a")
    b = W.gen(d, (j, 1))
    az = a * z
    report = DerivationReport()

    lhs = W.portrait(W.conjugate(b, az.inverse()), depth + 1)
    ok = core.fixes(lhs, (s,)) and core.section(lhs, (s,)) == W.portrait(a * theta1(z, d, j), depth)
    report.checks.append(("theta1", ok))

    n = first_nonzero_n(d.vector(j, 1))
    k = inverse_mod(d.vector(j, 1)[n - 1], p)
    lhs = W.portrait(W.conjugate(b ** k, az ** (p - n)), depth + 1)
    ok = core.fixes(lhs, (s,)) and core.section(lhs, (s,)) == W.portrait(a * theta2(z, d, j), depth)
    report.checks.append(("theta2", ok))
    return report
