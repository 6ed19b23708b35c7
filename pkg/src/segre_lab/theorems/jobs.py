"""Verification jobs, reports, and the batched harness that runs them."""

from __future__ import annotations

import json
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Iterable

import numpy as np

from ..errors import BudgetExceeded, PreconditionError
from ..exact_linalg import FieldSpec
from ..multiproj import MultiprojectiveSpace
from .domain import (
    CHUNK,
    Batch,
    batch_invariants,
    enumerate_full,
    enumerate_naive,
    full_mode_cost,
    naive_cost,
    resolve_shapes,
    resolve_spaces,
    plant_circuits,
    sample_batch,
)

DEFAULT_BUDGET = 5 * 10**8
MAX_STORED = 100
PLANT_DRAWS = 1024
MODES = ("exhaustive", "sampled")
REDUCTIONS = ("full", "factors", "none")
SAMPLERS = ("mixture", "circuits")


class HarnessMismatch(AssertionError):
    """The batched and the exact evaluation of an instance disagree."""


@dataclass(frozen=True)
class VerificationJob:
    """What to check and where.

    The domain is either explicit ``spaces`` or every shape with
    ``prod(n_i + 1) <= max_prod``.  Exhaustive runs use ``reduction``
    (``full``: projective classes of concise sets; ``factors``: subsets of
    ``Y(F)`` up to equal-dimension factor swaps; ``none``: every subset).
    Sampled runs draw ``count`` sets per (space, size) and keep drawing
    until ``min_hits`` instances satisfied the statement's hypothesis.
    ``sampler="circuits"`` replaces the generic mixture by planted circuits,
    for statements whose hypothesis the mixture almost never meets.
    """

    statement: str
    field: FieldSpec
    spaces: tuple = ()
    max_prod: int | None = None
    sizes: tuple = ()
    mode: str = "exhaustive"
    reduction: str = "full"
    count: int = 0
    min_hits: int = 0
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    high_budget: bool = False
    collect_hits: bool = False
    crosscheck_every: int = 97
    sampler: str = "mixture"

    def __post_init__(self):
        if self.mode not in MODES:
            raise PreconditionError(f"mode must be one of {MODES}")
        if self.reduction not in REDUCTIONS:
            raise PreconditionError(f"reduction must be one of {REDUCTIONS}")
        if self.sampler not in SAMPLERS:
            raise PreconditionError(f"sampler must be one of {SAMPLERS}")

    def to_json(self) -> dict:
        return {
            "statement": self.statement,
            "field": self.field.to_json(),
            "spaces": [list(sp) for sp in self.spaces],
            "max_prod": self.max_prod,
            "sizes": list(self.sizes),
            "mode": self.mode,
            "reduction": self.reduction if self.mode == "exhaustive" else None,
            "sampler": self.sampler if self.mode == "sampled" else None,
            "count": self.count,
            "min_hits": self.min_hits,
            "seed": self.seed,
            "budget": self.budget,
            "high_budget": self.high_budget,
        }


@dataclass
class VerificationReport:
    """Mergeable result of a job (or of one chunk of it).

    ``instances`` counts the sets examined, ``hits`` those satisfying the
    statement's hypothesis; ``tallies`` break hits down by branch and
    ``observed`` keeps maxima.  Merging is commutative and associative, and
    ``to_json`` leaves out the wall-clock time so that replays compare
    byte for byte.
    """

    statement: str
    instances: int = 0
    hits: int = 0
    crosschecked: int = 0
    violations: int = 0
    triaged: int = 0
    counterexamples: list = dc_field(default_factory=list)
    triage: list = dc_field(default_factory=list)
    tallies: Counter = dc_field(default_factory=Counter)
    observed: dict = dc_field(default_factory=dict)
    hit_forms: set | None = None
    seconds: float = 0.0
    job: dict | None = None

    def observe(self, key: str, value: int) -> None:
        self.observed[key] = max(self.observed.get(key, value), value)

    def add_counterexample(self, item: dict, triage: bool = False) -> None:
        if triage:
            self.triaged += 1
        else:
            self.violations += 1
        (self.triage if triage else self.counterexamples).append(item)
        self._trim()

    def _trim(self) -> None:
        for name in ("counterexamples", "triage"):
            unique = {json.dumps(d, sort_keys=True): d for d in getattr(self, name)}
            setattr(self, name, [unique[key] for key in sorted(unique)][:MAX_STORED])

    def merge(self, other: VerificationReport) -> VerificationReport:
        out = VerificationReport(self.statement)
        out.instances = self.instances + other.instances
        out.hits = self.hits + other.hits
        out.crosschecked = self.crosschecked + other.crosschecked
        out.violations = self.violations + other.violations
        out.triaged = self.triaged + other.triaged
        out.counterexamples = self.counterexamples + other.counterexamples
        out.triage = self.triage + other.triage
        out.tallies = self.tallies + other.tallies
        out.observed = dict(self.observed)
        for k, v in other.observed.items():
            out.observe(k, v)
        if self.hit_forms is not None or other.hit_forms is not None:
            out.hit_forms = (self.hit_forms or set()) | (other.hit_forms or set())
        out.seconds = self.seconds + other.seconds
        out.job = self.job or other.job
        out._trim()
        return out

    @property
    def verdict(self) -> str:
        return "counterexample" if self.violations else "ok"

    def to_json(self, *, timing: bool = False) -> dict:
        out = {
            "statement": self.statement,
            "verdict": self.verdict,
            "instances": self.instances,
            "hits": self.hits,
            "crosschecked": self.crosschecked,
            "violations": self.violations,
            "triaged": self.triaged,
            "tallies": {k: self.tallies[k] for k in sorted(self.tallies)},
            "observed": {k: self.observed[k] for k in sorted(self.observed)},
            "counterexamples": self.counterexamples,
            "triage": self.triage,
        }
        if self.hit_forms is not None:
            out["hit_forms"] = len(self.hit_forms)
        if self.job is not None:
            out["job"] = self.job
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


# ---------------------------------------------------------------------------
# Harness
# ---------------------------------------------------------------------------


@dataclass
class Outcome:
    """Batched verdict of a statement on one batch.

    ``applies`` marks the sets satisfying the hypothesis, ``bad`` the ones
    violating the conclusion, ``hits`` the interesting instances (the
    hypothesis itself unless a statement says otherwise, e.g. equality
    cases); ``keys`` is a list of ``(label, mask)`` pairs for the tallies.
    """

    applies: np.ndarray
    bad: np.ndarray
    keys: list = dc_field(default_factory=list)
    observed: dict = dc_field(default_factory=dict)
    hits: np.ndarray | None = None

    def __post_init__(self):
        if self.hits is None:
            self.hits = self.applies


@dataclass(frozen=True)
class Unit:
    """One independent piece of work: a space or shape, a size, a mode."""

    kind: str  # "full" | "naive" | "sampled"
    dims: tuple
    s: int
    chunk: int = 0


def workers() -> int:
    try:
        return max(1, int(os.environ.get("SEGRE_LAB_THREADS", "1")))
    except ValueError:
        return 1


def plan(job: VerificationJob, statement) -> tuple[list[Unit], int]:
    """Work units of a job and its cost in rank computations."""
    f = job.field
    if not f.is_finite:
        raise PreconditionError("enumeration and sampling need a finite field")
    sizes = job.sizes or statement.sizes
    units: list[Unit] = []
    cost = 0
    for s in sizes:
        if job.mode == "sampled":
            spaces = resolve_spaces(job.spaces, job.max_prod)
            units += [Unit("sampled", tuple(sp), s) for sp in spaces]
            cost += len(spaces) * max(job.count, job.min_hits) * (s + 1)
        elif job.reduction == "full":
            shapes = resolve_shapes(job.spaces, job.max_prod, s, statement.concise_only)
            units += [Unit("full", sh, s) for sh in shapes]
            cost += full_mode_cost(f, shapes, s)
        else:
            spaces = resolve_spaces(job.spaces, job.max_prod)
            units += [Unit("naive", tuple(sp), s) for sp in spaces]
            cost += naive_cost(f, spaces, s)
    return units, cost


def check_budget(job: VerificationJob, cost: int) -> None:
    if cost > job.budget and not job.high_budget:
        raise BudgetExceeded(
            f"{job.statement}: about {cost:.3g} rank computations exceed the budget {job.budget:.3g}"
            " (raise --budget or pass --high-budget)",
            cost,
            job.budget,
        )


def _batches(job: VerificationJob, unit: Unit) -> Iterable[Batch]:
    f = job.field
    if unit.kind == "full":
        yield from enumerate_full(f, unit.dims, unit.s)
    elif unit.kind == "naive":
        yield from enumerate_naive(MultiprojectiveSpace(unit.dims, f), unit.s, job.reduction)
    else:
        rng = np.random.default_rng([job.seed, unit.s, *unit.dims, 1000003, unit.chunk])
        Y = MultiprojectiveSpace(unit.dims, f)
        if job.sampler == "circuits":
            yield plant_circuits(Y, unit.s, PLANT_DRAWS, rng)
        else:
            yield sample_batch(Y, unit.s, CHUNK, rng)


def run_unit(job: VerificationJob, statement, unit: Unit) -> VerificationReport:
    from .orbits import canonical_form

    rep = VerificationReport(job.statement)
    if job.collect_hits:
        rep.hit_forms = set()
    seen = 0
    t0 = time.perf_counter()
    triage = statement.triage_small_fields and job.field.p == 2
    for batch in _batches(job, unit):
        if not batch.size:
            continue
        inv = batch_invariants(batch, deletions=statement.needs_deletions)
        out = statement.evaluate(batch, inv)
        rep.instances += batch.size
        rep.hits += int(out.hits.sum())
        for label, mask in out.keys:
            n = int(mask.sum())
            if n:
                rep.tallies[label] += n
        for key, value in out.observed.items():
            rep.observe(key, value)
        # exact re-evaluation of a deterministic sample of instances
        pos = np.arange(seen, seen + batch.size)
        for b in np.nonzero((pos % job.crosscheck_every) == 0)[0]:
            S = batch.point_set(int(b))
            applies, ok, _ = statement.check(S)
            if (applies, ok) != (bool(out.applies[b]), not bool(out.bad[b])):
                raise HarnessMismatch(f"{job.statement}: batched and exact paths disagree on {S.to_json()}")
            rep.crosschecked += 1
        seen += batch.size
        for b in np.nonzero(out.bad)[0]:
            S = batch.point_set(int(b))
            applies, ok, info = statement.check(S)
            if not applies or ok:
                raise HarnessMismatch(f"{job.statement}: exact path does not confirm violation {S.to_json()}")
            rep.add_counterexample({"set": S.to_json(), "why": info}, triage=triage)
        if job.collect_hits:
            for b in np.nonzero(out.hits)[0]:
                rep.hit_forms.add(canonical_form(batch.point_set(int(b))))
    rep.seconds = time.perf_counter() - t0
    return rep


def _run_units(job, statement, units: list[Unit]) -> list[VerificationReport]:
    w = workers()
    if w == 1 or len(units) == 1:
        return [run_unit(job, statement, u) for u in units]
    with ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(run_unit, [job] * len(units), [statement] * len(units), units))


def run_job(job: VerificationJob, statement) -> VerificationReport:
    """Run a batched statement over the job's domain (budget-checked)."""
    units, cost = plan(job, statement)
    check_budget(job, cost)
    total = VerificationReport(job.statement)
    if job.collect_hits:
        total.hit_forms = set()
    if job.mode == "exhaustive":
        for r in _run_units(job, statement, units):
            total = total.merge(r)
        total.job = job.to_json()
        return total
    # sampled: per unit, fixed-size chunks in index order until both targets are met;
    # workers compute waves of chunks and the surplus beyond the stopping chunk is dropped
    w = workers()
    for u in units:
        acc = VerificationReport(job.statement)
        chunk = 0
        done = False
        while not done:
            wave = [replace(u, chunk=c) for c in range(chunk, chunk + w)]
            for r in _run_units(job, statement, wave):
                acc = acc.merge(r)
                chunk += 1
                if acc.instances >= job.count and acc.hits >= job.min_hits:
                    done = True
                    break
            if chunk > 10**6:
                raise BudgetExceeded(f"{job.statement}: sampling did not reach its targets", chunk, 10**6)
        total = total.merge(acc)
    total.job = job.to_json()
    return total


def run_sets(name: str, sets: Iterable, check: Callable) -> VerificationReport:
    """Exact-path report for a stream of explicit instances (used by small jobs)."""
    rep = VerificationReport(name)
    for S in sets:
        applies, ok, info = check(S)
        rep.instances += 1
        if applies:
            rep.hits += 1
            if not ok:
                rep.add_counterexample({"set": S.to_json(), "why": info})
    return rep
