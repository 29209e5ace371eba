"""Conjecture checkers and verification campaigns.

A campaign walks every automaton of a generation plan chunk by chunk, scores
each chunk with the batch kernel and folds the scores into a
``CampaignResult``.  Results merge commutatively, so the chunk order and the
number of workers never change the final report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .core import Automaton
from .genx import GenerationPlan, chunk_tables, plan_chunks
from .search import (
    avoid_lengths,
    is_synchronizing,
    one_cluster_extension_max,
    reset_length,
    shortest_word_of_rank,
    sync_profile,
)
from .bounds import is_prime, one_cluster_data
from .structure import is_aperiodic, is_bidirectional_path, is_kari_like, is_strongly_connected

__all__ = [
    "CheckResult",
    "check_cerny",
    "check_conjecture1",
    "check_conjecture2",
    "check_conjecture3",
    "check_conjecture4",
    "check_conjecture5",
    "check_conjecture6",
    "subset_bound",
    "CampaignResult",
    "CAMPAIGNS",
    "GRID_CAMPAIGNS",
    "campaign_plan",
    "chunk_count",
    "empty_result",
    "evaluate_chunk",
    "replay",
    "run_campaign",
    "campaign_cerny",
    "campaign_gaps",
    "campaign_problem1",
    "spectrum_gaps",
]

WITNESS_CAP = 20
VIOLATION_CAP = 200


# -- per-automaton checkers ---------------------------------------------------------

@dataclass
class CheckResult:
    """Outcome of one checker on one automaton.

    ``applicable`` is False when the automaton lies outside the hypothesis;
    such automata never carry violations.
    """

    check: str
    applicable: bool
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_cerny(A: Automaton) -> CheckResult:
    r = reset_length(A)
    res = CheckResult("cerny", r is not None, details={"reset_length": r})
    if r is not None and r > (A.n - 1) ** 2:
        res.violations.append(f"reset length {r} exceeds {(A.n - 1) ** 2}")
    return res


def check_conjecture1(A: Automaton) -> CheckResult:
    """Extending words for one-cluster letters whose cycle length is not prime."""
    res = CheckResult("conj1", False)
    if not is_synchronizing(A):
        return res
    worst = {}
    for a in range(A.k):
        data = one_cluster_data(A, a)
        if data is None or data.m < 4 or is_prime(data.m):
            continue
        res.applicable = True
        v = one_cluster_extension_max(A, a)
        worst[a] = v
        if v is None:
            res.violations.append(f"letter {a}: some subset of the cycle cannot be extended")
        elif v > A.n:
            res.violations.append(f"letter {a}: needs an extending word of length {v} > {A.n}")
    res.details["max_extension"] = worst
    return res


def check_conjecture2(A: Automaton) -> CheckResult:
    res = CheckResult("conj2", False)
    r = reset_length(A)
    if r is None or A.n < 2 or not is_aperiodic(A):
        return res
    res.applicable = True
    bound = A.n + math.ceil(A.n / 2) - 2
    res.details.update(reset_length=r, bound=bound)
    if r > bound:
        res.violations.append(f"aperiodic reset length {r} exceeds {bound}")
    return res


def check_conjecture3(A: Automaton) -> CheckResult:
    res = CheckResult("conj3", False)
    r = reset_length(A)
    if r is None or not is_strongly_connected(A) or not is_aperiodic(A):
        return res
    res.applicable = True
    res.details["reset_length"] = r
    if r > A.n - 1:
        res.violations.append(f"reset length {r} exceeds n-1 = {A.n - 1}")
    elif r == A.n - 1 and A.n > 1 and not is_bidirectional_path(A):
        res.violations.append("reset length n-1 without a bidirectional path")
    return res


def check_conjecture4(A: Automaton) -> CheckResult:
    res = CheckResult("conj4", False)
    if A.n < 2 or not is_synchronizing(A) or not is_strongly_connected(A):
        return res
    res.applicable = True
    lengths = avoid_lengths(A)
    res.details["avoid_lengths"] = lengths
    bound = 2 * A.n - 2
    for q, v in enumerate(lengths):
        if v is None or v > bound:
            res.violations.append(f"state {q}: avoiding length {v} exceeds {bound}")
    return res


def check_conjecture5(A: Automaton) -> CheckResult:
    res = CheckResult("conj5", True)
    kari_like = None
    lengths = {}
    for d in range(1, A.n):
        v = shortest_word_of_rank(A, A.n - d)
        if v is None:
            break
        lengths[d] = v
        if v <= d * d:
            continue
        if kari_like is None:
            kari_like = is_kari_like(A)
        if kari_like and d == 4 and v == 17:
            res.details.setdefault("exempt", []).append(d)
            continue
        res.violations.append(f"rank {A.n - d} needs length {v} > {d * d}")
    res.details["lengths"] = lengths
    return res


def subset_bound(n: int, s: int) -> int:
    return (n - 1) ** 2 - math.ceil((n - s) / s) * (2 * n - s * math.ceil(n / s) - 1)


def check_conjecture6(A: Automaton) -> CheckResult:
    res = CheckResult("conj6", False)
    if not is_synchronizing(A):
        return res
    res.applicable = True
    prof = sync_profile(A)
    tight = []
    for S in range(1, 1 << A.n):
        s = bin(S).count("1")
        L = prof[S]
        b = subset_bound(A.n, s)
        if L > b:
            res.violations.append(f"subset {S:#x} needs {L} > {b}")
        elif L == b and s >= 2:
            tight.append(S)
    res.details["tight_subsets"] = tight
    return res


# -- campaign results ------------------------------------------------------------------

def _ranges(ids) -> list[list[int]]:
    out: list[list[int]] = []
    for i in sorted(set(ids)):
        if out and out[-1][1] == i - 1:
            out[-1][1] = i
        else:
            out.append([i, i])
    return out


def _expand(ranges) -> set[int]:
    return {i for a, b in ranges for i in range(a, b + 1)}


@dataclass
class CampaignResult:
    """Mergeable aggregate of a sweep."""

    campaign: str
    cls: dict
    tallies: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)
    extremes: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    violation_count: int = 0
    chunks: list = field(default_factory=list)

    def tally(self, name: str, count: int = 1) -> None:
        self.tallies[name] = self.tallies.get(name, 0) + int(count)

    def count(self, spectrum: str, values) -> None:
        hist = self.spectra.setdefault(spectrum, {})
        vals, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
        for v, c in zip(vals.tolist(), counts.tolist()):
            hist[v] = hist.get(v, 0) + c

    def extreme(self, name: str, value: int, lines) -> None:
        cur = self.extremes.get(name)
        lines = sorted(set(lines))
        if cur is None or value > cur["value"]:
            self.extremes[name] = {"value": int(value), "witnesses": lines[:WITNESS_CAP]}
        elif value == cur["value"]:
            cur["witnesses"] = sorted(set(cur["witnesses"]) | set(lines))[:WITNESS_CAP]

    def violate(self, line: str, detail: str) -> None:
        self.violation_count += 1
        self.violations.append({"a": line, "detail": detail})
        self.violations.sort(key=lambda v: (v["a"], v["detail"]))
        del self.violations[VIOLATION_CAP:]

    def merge(self, other: "CampaignResult") -> "CampaignResult":
        if (self.campaign, self.cls) != (other.campaign, other.cls):
            raise ValueError("cannot merge results of different campaigns")
        out = CampaignResult(self.campaign, dict(self.cls))
        for src in (self, other):
            for k, v in src.tallies.items():
                out.tally(k, v)
            for name, hist in src.spectra.items():
                dst = out.spectra.setdefault(name, {})
                for v, c in hist.items():
                    dst[v] = dst.get(v, 0) + c
            for name, e in src.extremes.items():
                out.extreme(name, e["value"], e["witnesses"])
        vio = sorted(self.violations + other.violations, key=lambda v: (v["a"], v["detail"]))
        out.violations = vio[:VIOLATION_CAP]
        out.violation_count = self.violation_count + other.violation_count
        overlap = _expand(self.chunks) & _expand(other.chunks)
        if overlap:
            raise ValueError(f"chunks merged twice: {sorted(overlap)[:5]}")
        out.chunks = _ranges(_expand(self.chunks) | _expand(other.chunks))
        return out

    def to_dict(self) -> dict:
        d = {
            "campaign": self.campaign,
            "class": self.cls,
            "tallies": dict(sorted(self.tallies.items())),
            "spectra": {k: [[v, c] for v, c in sorted(s.items())] for k, s in sorted(self.spectra.items())},
            "extremes": dict(sorted(self.extremes.items())),
            "violations": self.violations,
            "violation_count": self.violation_count,
            "chunks": self.chunks,
        }
        if "reset_sc" in self.spectra:
            d["gaps"] = spectrum_gaps(self.spectra["reset_sc"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignResult":
        res = cls(d["campaign"], d["class"])
        res.tallies = dict(d["tallies"])
        res.spectra = {k: {int(v): c for v, c in s} for k, s in d["spectra"].items()}
        res.extremes = {k: {"value": e["value"], "witnesses": list(e["witnesses"])} for k, e in d["extremes"].items()}
        res.violations = list(d["violations"])
        res.violation_count = d["violation_count"]
        res.chunks = [list(r) for r in d["chunks"]]
        return res

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def spectrum_gaps(spectrum: dict) -> list[list[int]]:
    """Maximal runs of unattained lengths strictly between attained ones."""
    attained = sorted(v for v, c in spectrum.items() if c > 0)
    return [[a + 1, b - 1] for a, b in zip(attained, attained[1:]) if b - a > 1]


# -- campaign definitions -----------------------------------------------------------------

def _line(table: np.ndarray) -> str:
    k, n = table.shape
    rows = " ; ".join(" ".join(str(int(v)) for v in row) for row in table)
    return f"{n} {k} : {rows}"


def _automaton(table: np.ndarray) -> Automaton:
    return Automaton.from_rows(table.tolist(), table.shape[1])


def _record_max(res: CampaignResult, name: str, tables, values, mask) -> None:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return
    vals = values[idx]
    top = vals.max()
    hits = idx[vals == top]
    lines = sorted(_line(tables[i]) for i in hits)
    res.extreme(name, int(top), lines[:WITNESS_CAP])


def _reduce_cerny(res, tables, out, n, k):
    reset = out[:, K.RESET]
    sync = reset >= 0
    sc = out[:, K.SC] == 1
    res.tally("synchronizing", sync.sum())
    res.tally("strongly_connected_synchronizing", (sync & sc).sum())
    res.count("reset", reset[sync])
    res.count("reset_sc", reset[sync & sc])
    _record_max(res, "reset", tables, reset, sync)
    _record_max(res, "reset_sc", tables, reset, sync & sc)
    for i in np.flatnonzero(reset > (n - 1) ** 2):
        res.violate(_line(tables[i]), f"reset length {reset[i]} exceeds {(n - 1) ** 2}")


def _reduce_conj1(res, tables, out, n, k):
    sync = out[:, K.RESET] >= 0
    ext = out[:, K.OC_EXT]
    hyp = sync & (ext != -2)
    res.tally("in_hypothesis", hyp.sum())
    _record_max(res, "extension", tables, ext, hyp & (ext >= 0))
    at_n = hyp & (ext == n)
    res.tally("needs_n", at_n.sum())
    if at_n.any():
        res.extreme("needs_n", n, [_line(tables[i]) for i in np.flatnonzero(at_n)[:WITNESS_CAP]])
    for i in np.flatnonzero(hyp & ((ext == -1) | (ext > n))):
        res.violate(_line(tables[i]), f"one-cluster extension needs {ext[i]} (bound {n})")


def _reduce_conj2(res, tables, out, n, k):
    reset = out[:, K.RESET]
    aper = out[:, K.APERIODIC]
    sync = reset >= 0
    res.tally("indeterminate", (sync & (aper == -1)).sum())
    hyp = sync & (aper == 1) & (n > 1)
    res.tally("in_hypothesis", hyp.sum())
    res.count("reset_aperiodic", reset[hyp])
    _record_max(res, "reset_aperiodic", tables, reset, hyp)
    bound = n + math.ceil(n / 2) - 2
    for i in np.flatnonzero(hyp & (reset > bound)):
        res.violate(_line(tables[i]), f"aperiodic reset length {reset[i]} exceeds {bound}")


def _reduce_conj3(res, tables, out, n, k):
    reset = out[:, K.RESET]
    aper = out[:, K.APERIODIC]
    sc = out[:, K.SC] == 1
    sync = reset >= 0
    res.tally("indeterminate", (sync & sc & (aper == -1)).sum())
    hyp = sync & sc & (aper == 1)
    res.tally("in_hypothesis", hyp.sum())
    _record_max(res, "reset_sc_aperiodic", tables, reset, hyp)
    for i in np.flatnonzero(hyp & (reset > n - 1)):
        res.violate(_line(tables[i]), f"reset length {reset[i]} exceeds {n - 1}")
    meets = hyp & (reset == n - 1) & (n > 1)
    path = 0
    for i in np.flatnonzero(meets):
        if is_bidirectional_path(_automaton(tables[i])):
            path += 1
        else:
            res.violate(_line(tables[i]), "reset length n-1 without a bidirectional path")
    res.tally("meets_bound_on_path", path)


def _reduce_conj4(res, tables, out, n, k):
    if n < 2:
        return
    sync = out[:, K.RESET] >= 0
    sc = out[:, K.SC] == 1
    avoid = out[:, K.AVOID_MAX]
    hyp = sync & sc
    res.tally("in_hypothesis", hyp.sum())
    _record_max(res, "avoid", tables, avoid, hyp & (avoid >= 0))
    bound = 2 * n - 2
    for i in np.flatnonzero(hyp & ((avoid < 0) | (avoid > bound))):
        res.violate(_line(tables[i]), f"avoiding length {avoid[i]} exceeds {bound}")


def _reduce_conj5(res, tables, out, n, k):
    flagged = np.flatnonzero(out[:, K.RANK_FAIL_D] > 0)
    res.tally("examined_ranks", len(tables))
    for i in flagged:
        chk = check_conjecture5(_automaton(tables[i]))
        if chk.details.get("exempt"):
            res.tally("kari_like_exempt")
            res.extreme("kari_like_exempt", 17, [_line(tables[i])])
        for v in chk.violations:
            res.violate(_line(tables[i]), v)


def _reduce_conj6(res, tables, out, n, k):
    sync = out[:, K.RESET] >= 0
    excess = out[:, K.SUBSET_EXCESS]
    tight = out[:, K.SUBSET_TIGHT]
    res.tally("in_hypothesis", sync.sum())
    has_tight = sync & (tight > 0)
    res.tally("with_tight_subset", has_tight.sum())
    if has_tight.any():
        lines = sorted(_line(tables[i]) for i in np.flatnonzero(has_tight))
        res.extreme("tight", 0, lines[:WITNESS_CAP])
    for i in np.flatnonzero(sync & (excess > 0)):
        res.violate(_line(tables[i]), f"some subset exceeds the bound by {excess[i]}")


def _reduce_problem1(res, tables, out, n, k):
    irred = (out[:, K.RESET] >= 0) & (out[:, K.IRRED] == 1)
    sc = out[:, K.SC] == 1
    res.tally("irreducibly_synchronizing", irred.sum())
    greedy = out[:, K.GREEDY_C]
    ext = out[:, K.GREEDY_E]
    _record_max(res, "greedy_compress", tables, greedy, irred)
    _record_max(res, "greedy_extend", tables, ext, irred & sc & (ext >= 0))
    _record_max(res, "reset", tables, out[:, K.RESET], irred)
    res.count("greedy_compress", greedy[irred])


def _reduce_greedy_sc(res, tables, out, n, k):
    hyp = (out[:, K.RESET] >= 0) & (out[:, K.SC] == 1)
    res.tally("strongly_connected_synchronizing", hyp.sum())
    _record_max(res, "greedy_compress", tables, out[:, K.GREEDY_C], hyp)
    _record_max(res, "greedy_extend", tables, out[:, K.GREEDY_E], hyp & (out[:, K.GREEDY_E] >= 0))


@dataclass(frozen=True)
class Campaign:
    name: str
    flags: int
    reducer: object
    description: str


CAMPAIGNS = {
    c.name: c
    for c in [
        Campaign("cerny", K.F_SC, _reduce_cerny, "reset lengths against (n-1)^2, spectra and gaps"),
        Campaign("conj1", K.F_ONECLUSTER, _reduce_conj1, "one-cluster extending words of length <= n"),
        Campaign("conj2", K.F_APERIODIC, _reduce_conj2, "aperiodic reset lengths <= n + ceil(n/2) - 2"),
        Campaign("conj3", K.F_SC | K.F_ONLY_SC | K.F_APERIODIC, _reduce_conj3,
                 "strongly connected aperiodic reset lengths <= n - 1"),
        Campaign("conj4", K.F_SC | K.F_ONLY_SC | K.F_EXPLORE, _reduce_conj4,
                 "avoiding words of length <= 2n - 2"),
        Campaign("conj5", K.F_EXPLORE, _reduce_conj5, "rank n-d words of length <= d^2 except Kari-like"),
        Campaign("conj6", K.F_SUBSET, _reduce_conj6, "subset synchronization bound"),
        Campaign("problem1", K.F_SC | K.F_IRRED | K.F_ONLY_IRRED | K.F_GREEDY_C | K.F_GREEDY_E,
                 _reduce_problem1, "greedy worst cases over irreducibly synchronizing automata"),
        Campaign("greedy", K.F_SC | K.F_ONLY_SC | K.F_GREEDY_C | K.F_GREEDY_E, _reduce_greedy_sc,
                 "greedy worst cases over strongly connected synchronizing automata"),
    ]
}


# Experiments beyond a single machine, kept as inert definitions with the values
# they are expected to reproduce.  They only run with an explicit override.
GRID_CAMPAIGNS = {
    "cerny-binary-12": {
        "campaign": "cerny", "n": 12, "k": 2,
        "expected": {"violations": 0, "max_reset": 121},
        "cost": "about 100 CPU-years, roughly 1e15 generated automata",
    },
    "cerny-ternary-8": {
        "campaign": "cerny", "n": 8, "k": 3,
        "expected": {"violations": 0, "max_reset": 49},
        "cost": "about 2.1e10 generated automata on a cluster",
    },
    "spectrum-binary-12": {
        "campaign": "cerny", "n": 12, "k": 2,
        "expected": {"reset_sc_counts_at_least_94": {
            "94": 3, "99": 3, "100": 21, "101": 9, "102": 2, "110": 2, "111": 1, "112": 1, "121": 1,
        }},
        "cost": "same run as cerny-binary-12",
    },
    "gaps-binary-9-12": {
        "campaign": "cerny", "n": [9, 10, 11, 12], "k": 2,
        "expected": {"gap_count": {"9": 2, "10": 2, "11": 3, "12": 3}},
        "cost": "beyond desk scale from n = 9",
    },
    "greedy-binary-7": {
        "campaign": "greedy", "n": 7, "k": 2,
        "expected": {"greedy_extend": 48, "greedy_compress": 43},
        "cost": "several CPU-hours; the only grid item runnable on a desk",
    },
}


def campaign_plan(n: int, k: int, chunk_size: int = 1, budget: int = 200) -> GenerationPlan:
    return GenerationPlan(n=n, k=k, budget=budget, chunk_size=chunk_size)


@lru_cache(maxsize=8)
def _chunks(plan: GenerationPlan):
    return plan_chunks(plan)


def chunk_count(plan: GenerationPlan) -> int:
    return len(_chunks(plan))


# Per-automaton record fields: (name, column, flag that computes it).
_RECORD_FIELDS = [
    ("reset_length", K.RESET, 0),
    ("strongly_connected", K.SC, K.F_SC),
    ("irreducible", K.IRRED, K.F_IRRED),
    ("aperiodic", K.APERIODIC, K.F_APERIODIC),
    ("avoid_max", K.AVOID_MAX, K.F_EXPLORE),
    ("rank", K.RANK, K.F_EXPLORE),
    ("greedy_compress", K.GREEDY_C, K.F_GREEDY_C),
    ("greedy_extend", K.GREEDY_E, K.F_GREEDY_E),
    ("subset_excess", K.SUBSET_EXCESS, K.F_SUBSET),
    ("one_cluster_extension", K.OC_EXT, K.F_ONECLUSTER),
]


def _records(camp: Campaign, tables: np.ndarray, out: np.ndarray) -> list[dict]:
    fields = [(name, col) for name, col, f in _RECORD_FIELDS if f == 0 or camp.flags & f]
    recs = []
    for table, row in zip(tables, out):
        props = {name: int(row[col]) for name, col in fields if row[col] != K.NOT_COMPUTED}
        recs.append({"a": _line(table), "props": props})
    return recs


def evaluate_chunk(name: str, plan: GenerationPlan, index: int, records: bool = False,
                   cap: int = 50_000_000):
    """Score one chunk of a campaign; safe to call from worker processes.

    Returns the chunk's ``CampaignResult``, plus per-automaton records when
    ``records`` is set.
    """
    camp = CAMPAIGNS[name]
    tables = chunk_tables(plan, _chunks(plan)[index])
    out = K.evaluate_batch(tables, camp.flags, cap) if len(tables) else np.empty((0, K.NCOLS), np.int64)
    res = CampaignResult(name, {"n": plan.n, "k": plan.k})
    res.tally("examined", len(tables))
    camp.reducer(res, tables, out, plan.n, plan.k)
    res.chunks = [[index, index]]
    if records:
        return res, _records(camp, tables, out)
    return res


def empty_result(name: str, n: int, k: int) -> CampaignResult:
    if name not in CAMPAIGNS:
        raise ValueError(f"unknown campaign {name!r}; choose from {', '.join(CAMPAIGNS)}")
    return CampaignResult(name, {"n": n, "k": k})


def run_campaign(name: str, n: int, k: int) -> CampaignResult:
    """Serial run over every chunk."""
    res = empty_result(name, n, k)
    plan = campaign_plan(n, k)
    for i in range(chunk_count(plan)):
        res = res.merge(evaluate_chunk(name, plan, i))
    return res


def campaign_cerny(n: int, k: int) -> CampaignResult:
    return run_campaign("cerny", n, k)


def campaign_gaps(n: int, k: int) -> list[list[int]]:
    """Gaps in the reset-length spectrum of strongly connected synchronizing automata."""
    return spectrum_gaps(campaign_cerny(n, k).spectra.get("reset_sc", {}))


def campaign_problem1(n: int, k: int) -> CampaignResult:
    return run_campaign("problem1", n, k)


def replay(name: str, line: str) -> CheckResult:
    """Re-run the per-automaton checker behind a campaign on one automaton line."""
    checkers = {
        "cerny": check_cerny,
        "conj1": check_conjecture1,
        "conj2": check_conjecture2,
        "conj3": check_conjecture3,
        "conj4": check_conjecture4,
        "conj5": check_conjecture5,
        "conj6": check_conjecture6,
    }
    if name not in checkers:
        raise ValueError(f"no per-automaton checker for {name!r}")
    return checkers[name](Automaton.parse(line))

