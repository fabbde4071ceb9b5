"""Multi-head walking automata on configurations over G x Z.

A spec has k heads, each with a finite state set, a visibility radius r,
and an ordered rule table.  Heads sit on cells of G x Z; per step each
head observes the 0/1 symbols on the radius-r ball around it, its own
state, and the relative offsets and states of other heads within range,
then moves by one generator of G x Z (or stays) and switches state.  All
heads move simultaneously; the symbol layer is never written; heads are
never created or destroyed.

Initial and final head layouts are given as finite sets of arrangements
anchored at a cell: per head an (offset, state) slot, where offsets stay
within the radius.  Final arrangements may leave heads unconstrained
(a slot of null), since rejection only has to pin down the heads that
matter inside a finite window.

Runs on the periodic configurations (1s exactly on cells whose Z
coordinate is divisible by p) need only p starting phases; membership
testing sweeps them all.  For prediction-by-oracle, the same engine runs
with head positions kept as unevaluated words over G's generators and
every G-equality resolved through a prefix of the linearised word
problem; queries beyond the prefix surface as a typed result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import groups
from .errors import OracleExhausted, SpecificationError


@dataclass(frozen=True)
class Offset:
    """A cell displacement: a G-word and a Z step count."""

    g_word: tuple
    dz: int

    def norm_bound(self, ctx):
        return groups.word_norm(ctx, groups.evaluate_word(ctx, self.g_word)) + abs(self.dz)


@dataclass(frozen=True)
class PatchCheck:
    offset: Offset
    bit: int


@dataclass(frozen=True)
class OtherCheck:
    """Constraint on some other head within range: any field may be None."""

    head: int | None
    offset: Offset | None
    state: str | None


@dataclass(frozen=True)
class RuleEntry:
    """One row of the table; None fields match anything.  First match wins."""

    head: int | None
    state: str | None
    patch: tuple | None  # PatchChecks, all must hold
    others: tuple | None  # OtherChecks, each must be met by some other head
    move: str  # "stay" | "z+1" | "z-1" | "g:<sym>"
    next_state: str


@dataclass(frozen=True)
class Slot:
    offset: Offset
    state: str


class AutomatonSpec:
    """Validated automaton: states, radius, rule table, initial/final layouts."""

    def __init__(self, g_ctx, heads, radius, states, rule, initial, final):
        self.G = g_ctx
        self.heads = heads
        self.radius = radius
        self.states = tuple(tuple(s) for s in states)
        self.rule = tuple(rule)
        self.initial = tuple(initial)
        self.final = tuple(final)
        self._validate()

    def _validate(self):
        if self.heads < 1:
            raise ValueError("need at least one head")
        if len(self.states) != self.heads:
            raise ValueError("one state set per head required")
        for qs in self.states:
            if not qs:
                raise ValueError("empty state set")
        for entry in self.rule:
            if entry.head is not None and not 0 <= entry.head < self.heads:
                raise ValueError(f"rule entry for unknown head {entry.head}")
            if entry.move not in ("stay", "z+1", "z-1"):
                kind, _, sym = entry.move.partition(":")
                if kind != "g":
                    raise ValueError(f"bad move {entry.move!r}")
                self.G.generator_element(sym)
            for pc in entry.patch or ():
                if pc.offset.norm_bound(self.G) > self.radius:
                    raise ValueError("patch constraint outside the radius")
            for oc in entry.others or ():
                if oc.offset is not None and oc.offset.norm_bound(self.G) > self.radius:
                    raise ValueError("other-head constraint outside the radius")
        for arr in self.initial:
            if len(arr) != self.heads or any(slot is None for slot in arr):
                raise ValueError("initial arrangements must place every head")
            self._check_arrangement(arr)
        for arr in self.final:
            if len(arr) != self.heads:
                raise ValueError("final arrangements must list every head slot")
            if all(slot is None for slot in arr):
                raise ValueError("a final arrangement must constrain some head")
            self._check_arrangement(arr)

    def _check_arrangement(self, arr):
        for i, slot in enumerate(arr):
            if slot is None:
                continue
            if slot.offset.norm_bound(self.G) > self.radius:
                raise ValueError("arrangement offset outside the radius")
            if slot.state not in self.states[i]:
                raise ValueError(f"state {slot.state!r} not declared for head {i}")

    # -- serialisation ----------------------------------------------------

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        g_ctx = groups.group_context(data["group"])

        def off(raw):
            word = tuple(raw[0].split()) if raw[0] else ()
            return Offset(word, int(raw[1]))

        rule = []
        for e in data["rule"]:
            patch = None
            if e.get("patch") is not None:
                patch = tuple(
                    PatchCheck(off(c[0]), int(c[1])) for c in e["patch"]
                )
            others = None
            if e.get("others") is not None:
                others = tuple(
                    OtherCheck(
                        c.get("head"),
                        off(c["offset"]) if c.get("offset") is not None else None,
                        c.get("state"),
                    )
                    for c in e["others"]
                )
            rule.append(
                RuleEntry(
                    e.get("head"),
                    e.get("state"),
                    patch,
                    others,
                    e["move"],
                    e["next"],
                )
            )

        def arrangement(raw):
            out = []
            for slot in raw:
                if slot is None:
                    out.append(None)
                else:
                    out.append(Slot(off(slot["offset"]), slot["state"]))
            return tuple(out)

        return cls(
            g_ctx,
            int(data["heads"]),
            int(data["radius"]),
            [tuple(s) for s in data["states"]],
            rule,
            [arrangement(a) for a in data["initial"]],
            [arrangement(a) for a in data["final"]],
        )

    def to_json(self):
        def off(o):
            return [" ".join(o.g_word), o.dz]

        data = {
            "group": self.G.name,
            "heads": self.heads,
            "radius": self.radius,
            "states": [list(s) for s in self.states],
            "rule": [
                {
                    "head": e.head,
                    "state": e.state,
                    "patch": None
                    if e.patch is None
                    else [[off(pc.offset), pc.bit] for pc in e.patch],
                    "others": None
                    if e.others is None
                    else [
                        {
                            "head": oc.head,
                            "offset": None if oc.offset is None else off(oc.offset),
                            "state": oc.state,
                        }
                        for oc in e.others
                    ],
                    "move": e.move,
                    "next": e.next_state,
                }
                for e in self.rule
            ],
            "initial": [
                [
                    None if s is None else {"offset": off(s.offset), "state": s.state}
                    for s in arr
                ]
                for arr in self.initial
            ],
            "final": [
                [
                    None if s is None else {"offset": off(s.offset), "state": s.state}
                    for s in arr
                ]
                for arr in self.final
            ],
        }
        return json.dumps(data, indent=2, sort_keys=True)


# -- configurations ----------------------------------------------------------


@dataclass(frozen=True)
class PeriodicConfig:
    """1 exactly on cells (g, n) with n divisible by the period."""

    period: int

    def value(self, z):
        return 1 if z % self.period == 0 else 0


class FiniteSupportConfig:
    """1 exactly on an explicit finite set of cells (canonical engine only)."""

    def __init__(self, ctx, cells):
        self.ctx = ctx
        self.cells = frozenset((ctx.key(g), z) for g, z in cells)

    def value_at(self, g_elem, z):
        return 1 if (self.ctx.key(g_elem), z) in self.cells else 0


def make_xp(p):
    """The period-p test configuration (p >= 1)."""
    if p < 1:
        raise ValueError("period must be >= 1")
    return PeriodicConfig(p)


# -- position arithmetic backends --------------------------------------------


class CanonicalBackend:
    """Positions carry canonical G-elements; equality is group equality."""

    def __init__(self, ctx):
        self.ctx = ctx

    def start(self):
        return self.ctx.identity()

    def from_word(self, word):
        return groups.evaluate_word(self.ctx, word)

    def apply_gen(self, pos, sym):
        return self.ctx.multiply_raw(pos, self.ctx.generator_element(sym))

    def apply_word(self, pos, word):
        return self.ctx.multiply_raw(pos, groups.evaluate_word(self.ctx, word))

    def relative(self, a, b):
        return self.ctx.multiply_raw(self.ctx.inverse(a), b)

    def equal(self, a, b):
        return self.ctx.key(a) == self.ctx.key(b)


class OracleBackend:
    """Positions carry unevaluated G-words; equality goes through a prefix
    of the linearised word problem and raises OracleExhausted past it."""

    def __init__(self, ctx, prefix):
        self.ctx = ctx
        self.prefix = prefix

    def start(self):
        return ()

    def from_word(self, word):
        return tuple(word)

    def apply_gen(self, pos, sym):
        return pos + (sym,)

    def apply_word(self, pos, word):
        return pos + tuple(word)

    def relative(self, a, b):
        return groups.inverse_word(self.ctx, a) + b

    def equal(self, a, b):
        query = groups.inverse_word(self.ctx, a) + b
        index = groups.word_index(self.ctx, query)
        bit = self.prefix.bit(index)
        if bit is None:
            raise OracleExhausted(index)
        return bit == 1


# -- run engine ---------------------------------------------------------------


@dataclass(frozen=True)
class Head:
    g: object  # backend position representation
    z: int
    state: str


@dataclass(frozen=True)
class RunState:
    heads: tuple
    step: int


def _config_value(config, backend, g_pos, z):
    if isinstance(config, PeriodicConfig):
        return config.value(z)
    if isinstance(backend, CanonicalBackend):
        return config.value_at(g_pos, z)
    raise ValueError("finite-support configurations need the canonical engine")


def _ball_offsets(spec):
    """All (canonical G-word, dz) displacements of total norm <= radius."""
    out = []
    words = groups.ball_words(spec.G, spec.radius)
    ctx = spec.G
    for w in words:
        n = groups.word_norm(ctx, groups.evaluate_word(ctx, w))
        for dz in range(-(spec.radius - n), spec.radius - n + 1):
            out.append((w, dz))
    return out


def place(spec, arrangement, backend, anchor_g=None, anchor_z=0):
    """Instantiate an initial arrangement at an anchor cell."""
    if anchor_g is None:
        anchor_g = backend.start()
    heads = []
    for slot in arrangement:
        heads.append(
            Head(
                backend.apply_word(anchor_g, slot.offset.g_word),
                anchor_z + slot.offset.dz,
                slot.state,
            )
        )
    return RunState(tuple(heads), 0)


def in_final(spec, rs, backend):
    """Does the current head layout realise some final arrangement?"""
    for arr in spec.final:
        pivot = next(i for i, slot in enumerate(arr) if slot is not None)
        slot = arr[pivot]
        head = rs.heads[pivot]
        # anchor = head position shifted back by the slot offset
        anchor_g = backend.apply_word(
            head.g, groups.inverse_word(spec.G, slot.offset.g_word)
        )
        anchor_z = head.z - slot.offset.dz
        ok = head.state == slot.state
        for j, other in enumerate(arr):
            if not ok:
                break
            if other is None or j == pivot:
                continue
            target_g = backend.apply_word(anchor_g, other.offset.g_word)
            h = rs.heads[j]
            ok = (
                h.state == other.state
                and h.z == anchor_z + other.offset.dz
                and backend.equal(h.g, target_g)
            )
        if ok:
            return True
    return False


def _entry_matches(spec, entry, i, rs, config, backend, offsets):
    if entry.head is not None and entry.head != i:
        return False
    head = rs.heads[i]
    if entry.state is not None and entry.state != head.state:
        return False
    for pc in entry.patch or ():
        cell_g = backend.apply_word(head.g, pc.offset.g_word)
        if _config_value(config, backend, cell_g, head.z + pc.offset.dz) != pc.bit:
            return False
    for oc in entry.others or ():
        if not _some_other_matches(spec, oc, i, rs, backend, offsets):
            return False
    return True


def _some_other_matches(spec, oc, i, rs, backend, offsets):
    head = rs.heads[i]
    for j, other in enumerate(rs.heads):
        if j == i:
            continue
        if oc.head is not None and oc.head != j:
            continue
        if oc.state is not None and oc.state != other.state:
            continue
        dz = other.z - head.z
        if abs(dz) > spec.radius:
            continue
        if oc.offset is not None:
            if dz != oc.offset.dz:
                continue
            target = backend.apply_word(head.g, oc.offset.g_word)
            if not backend.equal(other.g, target):
                continue
            return True
        # in-range check: the relative G-offset must equal some ball word
        for w, odz in offsets:
            if odz == dz and backend.equal(
                other.g, backend.apply_word(head.g, w)
            ):
                return True
        continue
    return False


def step(spec, config, rs, backend=None, offsets=None):
    """Advance every head one synchronous step (first matching rule entry)."""
    if backend is None:
        backend = CanonicalBackend(spec.G)
    if offsets is None:
        offsets = _ball_offsets(spec)
    decisions = []
    for i in range(spec.heads):
        chosen = None
        for entry in spec.rule:
            if _entry_matches(spec, entry, i, rs, config, backend, offsets):
                chosen = entry
                break
        if chosen is None:
            head = rs.heads[i]
            raise SpecificationError(
                f"no rule entry for head {i} in state {head.state!r} at z={head.z}"
            )
        decisions.append(chosen)
    new_heads = []
    for i, entry in enumerate(decisions):
        head = rs.heads[i]
        g, z = head.g, head.z
        if entry.move == "z+1":
            z += 1
        elif entry.move == "z-1":
            z -= 1
        elif entry.move != "stay":
            g = backend.apply_gen(g, entry.move.partition(":")[2])
        new_heads.append(Head(g, z, entry.next_state))
    return RunState(tuple(new_heads), rs.step + 1)


@dataclass(frozen=True)
class RunResult:
    rejected: bool
    at_step: int | None = None
    arrangement: int | None = None

    @property
    def survived(self):
        return not self.rejected


def run(spec, config, start_phase, steps, backend=None, anchor_g=None):
    """Run every initial arrangement from the given start cell.

    Rejected at the earliest step at which any arrangement's heads
    realise a final arrangement (ties broken by arrangement order);
    Survived when none does within the step bound.
    """
    if backend is None:
        backend = CanonicalBackend(spec.G)
    offsets = _ball_offsets(spec)
    best = None
    for a_idx, arr in enumerate(spec.initial):
        rs = place(spec, arr, backend, anchor_g, start_phase)
        for n in range(steps + 1):
            if in_final(spec, rs, backend):
                if best is None or n < best[0]:
                    best = (n, a_idx)
                break
            if n < steps:
                rs = step(spec, config, rs, backend, offsets)
    if best is None:
        return RunResult(False)
    return RunResult(True, at_step=best[0], arrangement=best[1])


@dataclass(frozen=True)
class MembershipResult:
    in_s: bool
    phase: int | None = None
    at_step: int | None = None


def membership_test(spec, p, step_cap, backend=None):
    """Sweep all p phases of the period-p configuration.

    A rejection witness means the configuration is outside the automaton's
    subshift; surviving every phase up to the cap is the semi-decision
    "not rejected within the cap".
    """
    config = make_xp(p)
    for phase in range(p):
        r = run(spec, config, phase, step_cap, backend)
        if r.rejected:
            return MembershipResult(False, phase=phase, at_step=r.at_step)
    return MembershipResult(True)


def separation_trace(spec, config, start_phase, steps, arrangement=0):
    """Per step, the largest pairwise distance of head positions in G.

    Single-head specs yield all zeros.  Trace entry 0 is the initial
    layout; the trace has steps + 1 entries.
    """
    backend = CanonicalBackend(spec.G)
    offsets = _ball_offsets(spec)
    rs = place(spec, spec.initial[arrangement], backend, None, start_phase)
    trace = []
    for n in range(steps + 1):
        worst = 0
        for i in range(spec.heads):
            for j in range(i + 1, spec.heads):
                d = groups.distance(spec.G, rs.heads[i].g, rs.heads[j].g)
                worst = max(worst, d)
        trace.append(worst)
        if n < steps:
            rs = step(spec, config, rs, backend, offsets)
    return trace


def trace_records(spec, config, start_phase, steps, arrangement=0):
    """Line-oriented run trace: (step, head, g-coord, z-coord, state, separation).

    Separation is the largest pairwise G-distance of the heads at that
    step (repeated on every head's record of the step).
    """
    backend = CanonicalBackend(spec.G)
    offsets = _ball_offsets(spec)
    rs = place(spec, spec.initial[arrangement], backend, None, start_phase)
    records = []
    for n in range(steps + 1):
        worst = 0
        for i in range(spec.heads):
            for j in range(i + 1, spec.heads):
                worst = max(
                    worst, groups.distance(spec.G, rs.heads[i].g, rs.heads[j].g)
                )
        for i, head in enumerate(rs.heads):
            records.append(
                (n, i, groups.format_element(spec.G, head.g), head.z, head.state, worst)
            )
        if n < steps:
            rs = step(spec, config, rs, backend, offsets)
    return records


@dataclass(frozen=True)
class PredictorResult:
    kind: str  # "halted" | "running" | "oracle_exhausted"
    phase: int | None = None
    at_step: int | None = None
    query_index: int | None = None

    @property
    def halted(self):
        return self.kind == "halted"


def predictor(spec, p, oracle_prefix, step_cap):
    """Membership sweep with all G-arithmetic answered by a word-problem prefix.

    Takes a three-headed spec (the head count the prediction argument is
    about), simulates every phase of the period-p configuration, and halts
    iff some run rejects within the cap.  A query beyond the prefix stops
    the sweep with a typed result carrying the first out-of-range index.
    """
    if spec.heads != 3:
        raise ValueError("the predictor drives three-headed automata")
    backend = OracleBackend(spec.G, oracle_prefix)
    try:
        out = membership_test(spec, p, step_cap, backend)
    except OracleExhausted as exc:
        return PredictorResult("oracle_exhausted", query_index=exc.index)
    if out.in_s:
        return PredictorResult("running")
    return PredictorResult("halted", phase=out.phase, at_step=out.at_step)


def probe_word_is_identity(handle, p, g_ctx):
    """Is the probe map's target word for input p the identity of G?

    Decodes position handle(p) through the length-lex word enumeration and
    asks the group.  Periodic configurations with period p belong to the
    probed subshift exactly when this holds.
    """
    word = groups.enumerate_words(g_ctx, handle(p))
    return groups.is_identity(g_ctx, word)
