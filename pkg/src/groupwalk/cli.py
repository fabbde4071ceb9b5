"""Batch command-line front door.

Subcommands: group (norms, balls, orders, torsion tables), kgroup
(word-problem and reduction queries over the machine group), impred (the
staged construction and its witness scans), simulate (automaton runs on
periodic configurations), pipeline (build a constructed set, embed it
into the machine group, and verify the transported witnesses).

Reports are plain text, embed the resolved manifest and the package
version, and contain nothing time- or host-dependent, so identical
manifests produce byte-identical reports.

Exit codes: 0 success, 2 usage, 3 oracle shortage, 4 capacity/budget.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, automata, groups, kgroup, machines
from .errors import (
    BudgetExceededError,
    CapacityError,
    CapExceededError,
    GroupwalkError,
    OracleShortageError,
)
from .subshift import OraclePrefix, pattern_record


def _emit(args, lines):
    manifest = {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    out = [
        f"# groupwalk {args.command} report",
        f"version: {__version__}",
        "manifest: " + json.dumps(manifest, sort_keys=True),
    ]
    out.extend(lines)
    text = "\n".join(out) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_oracle(args):
    if getattr(args, "oracle_file", None):
        with open(args.oracle_file) as fh:
            return OraclePrefix(fh.read().strip())
    return OraclePrefix(getattr(args, "oracle", "") or "")


# -- group ---------------------------------------------------------------


def _cmd_group(args):
    ctx = groups.group_context(args.ctx, element_cap=args.element_cap)
    lines = []
    if args.ball is not None:
        elems = groups.ball(ctx, args.ball)
        words = groups.ball_words(ctx, args.ball)
        lines.append(f"ball radius {args.ball}: {len(elems)} elements")
        for i, w in enumerate(words):
            lines.append(f"  [{i}] {groups.format_word(w)}")
    if args.norm is not None:
        w = groups.parse_word(ctx, args.norm)
        lines.append(f"norm {groups.format_word(w)} = {groups.word_norm(ctx, groups.evaluate_word(ctx, w))}")
    if args.distance is not None:
        wa = groups.parse_word(ctx, args.distance[0])
        wb = groups.parse_word(ctx, args.distance[1])
        d = groups.distance(
            ctx, groups.evaluate_word(ctx, wa), groups.evaluate_word(ctx, wb)
        )
        lines.append(f"distance = {d}")
    if args.identity is not None:
        w = groups.parse_word(ctx, args.identity)
        lines.append(f"is_identity {groups.format_word(w)} = {groups.is_identity(ctx, w)}")
    if args.order is not None:
        w = groups.parse_word(ctx, args.order)
        k = groups.element_order(ctx, groups.evaluate_word(ctx, w), args.cap)
        lines.append(f"order {groups.format_word(w)} = {k}")
    if args.torsion is not None:
        for n in range(args.torsion + 1):
            lines.append(f"torsion({n}) = {groups.torsion_function(ctx, n, args.cap)}")
    if args.enumerate is not None:
        for i in range(args.enumerate):
            lines.append(f"word[{i}] = {groups.format_word(groups.enumerate_words(ctx, i))}")
    if args.index is not None:
        w = groups.parse_word(ctx, args.index)
        lines.append(f"index {groups.format_word(w)} = {groups.word_index(ctx, w)}")
    if not lines:
        lines.append("nothing requested")
    _emit(args, lines)
    return 0


# -- kgroup ---------------------------------------------------------------


def _wp_lines(ctx, word, res):
    lines = [f"word: {kgroup.format_kword(word)}", f"verdict: {res.kind}"]
    if res.gamma_witness is not None:
        lines.append(f"witness: shift image {groups.format_word(res.gamma_witness)}")
    if res.pattern_witness is not None:
        lines.append(
            "witness: pattern " + json.dumps(pattern_record(res.pattern_witness))
        )
    if res.needed_length is not None:
        lines.append(f"needed oracle length: {res.needed_length}")
    return lines


def _cmd_kgroup(args):
    oracle = _load_oracle(args)
    ctx = kgroup.KContext(
        groups.group_context(args.g), groups.group_context(args.h), oracle
    )
    lines = [f"context: {ctx.name}, oracle length {len(oracle)}"]
    shortage = False
    if args.wp is not None:
        word = kgroup.parse_kword(ctx, args.wp)
        res = kgroup.wp_k(ctx, word)
        lines.extend(_wp_lines(ctx, word, res))
        shortage = shortage or res.kind == "needs_oracle"
    if args.embed is not None:
        word = kgroup.embed_element(ctx, args.embed)
        lines.append(f"embed({args.embed}) = {kgroup.format_kword(word)}")
        lines.append(f"index = {kgroup.many_one_index(ctx, args.embed)}")
    if args.embed_table is not None:
        for n in range(1, args.embed_table + 1):
            word = kgroup.embed_element(ctx, n)
            res = kgroup.wp_k(ctx, word)
            member = oracle.bit(n)
            lines.append(
                f"n={n} len={len(word)} verdict={res.kind} oracle_bit={member}"
            )
            shortage = shortage or res.kind == "needs_oracle"
    if args.conj:
        reduced = kgroup.conj_reduction(ctx, oracle)
        lines.append(f"reduction of {oracle.bits or 'e'}: width {len(reduced)}")
        lines.append(f"bits: {reduced.bits}")
    if args.witness is not None:
        cw = kgroup.conj_witness(ctx, args.witness, len(oracle))
        lines.append(f"bit {args.witness}: {cw.kind} {list(cw.distances)}")
    if args.order is not None:
        word = kgroup.parse_kword(ctx, args.order)
        lines.append(f"order = {kgroup.order_k(ctx, word, args.cap)}")
    _emit(args, lines)
    return 3 if shortage else 0


# -- impred ----------------------------------------------------------------


def _roster(names):
    out = []
    for name in names.split(","):
        name = name.strip()
        if name not in machines.BUILTIN_PROGRAMS:
            raise argparse.ArgumentTypeError(f"unknown roster machine {name!r}")
        out.append((name, machines.BUILTIN_PROGRAMS[name]))
    return out


def _cmd_impred(args):
    lines = []
    skeleton = machines.build_skeleton(args.phi, args.stages, budget=args.budget)
    if args.table:
        lines.append(skeleton.to_text())
    prefix = machines.approx_members(args.phi, args.stages, args.cap, budget=args.budget)
    members = prefix.members()
    lines.append(f"prefix length: {len(prefix)}")
    lines.append(f"members: {members}")
    if args.psi is not None:
        for p in range(args.psi + 1):
            lines.append(f"probe({p}) = {skeleton.probe_position(p)}")
    if args.roster:
        rep = machines.witness_report(
            args.phi, _roster(args.roster), args.stages, args.cap, args.p_max,
            budget=args.budget,
        )
        lines.append(rep.to_text())
    _emit(args, lines)
    return 0


# -- simulate ----------------------------------------------------------------


def _cmd_simulate(args):
    with open(args.spec) as fh:
        spec = automata.AutomatonSpec.from_json(fh.read())
    lines = [f"spec: {args.spec} heads={spec.heads} radius={spec.radius}"]
    shortage = False
    if args.membership:
        res = automata.membership_test(spec, args.p, args.cap)
        if res.in_s:
            lines.append(f"p={args.p}: InS (no rejection within {args.cap} steps)")
        else:
            lines.append(f"p={args.p}: RejectedWitness phase={res.phase} step={res.at_step}")
    if args.trace is not None:
        records = automata.trace_records(spec, automata.make_xp(args.p), 0, args.trace)
        for n, head, g, z, state, sep in records:
            lines.append(
                f"step {n}: head {head} g={g} z={z} state={state} separation {sep}"
            )
    if args.predict:
        prefix = _load_oracle(args)
        res = automata.predictor(spec, args.p, prefix, args.cap)
        lines.append(f"predictor: {res.kind}"
                     + (f" phase={res.phase} step={res.at_step}" if res.kind == "halted" else "")
                     + (f" query_index={res.query_index}" if res.kind == "oracle_exhausted" else ""))
        shortage = shortage or res.kind == "oracle_exhausted"
    _emit(args, lines)
    return 3 if shortage else 0


# -- pipeline ----------------------------------------------------------------


def _cmd_pipeline(args):
    lines = []
    roster = _roster(args.roster)
    prefix = machines.approx_members(args.phi, args.stages, args.cap, budget=args.budget)
    lines.append(f"constructed prefix length: {len(prefix)}")
    report = machines.witness_report(
        args.phi, roster, args.stages, args.cap, args.p_max, budget=args.budget
    )
    skeleton = machines.build_skeleton(args.phi, args.stages, budget=args.budget)
    ctx = kgroup.KContext(
        groups.group_context(args.g), groups.group_context("S3"), prefix
    )
    total = 0
    mismatches = 0
    for label, _prog in roster:
        ws = report.witnesses[label]
        lines.append(f"{label}: {len(ws)} witnesses")
        for w in ws:
            n = skeleton.probe_position(w.p)
            if n >= 1:
                idx = kgroup.many_one_index(ctx, n)
                bit = kgroup.conj_bit(ctx, prefix, idx)
                idx_repr = str(idx) if idx < 10**12 else f"~10^{len(str(idx)) - 1}"
            else:
                # unprobed inputs map to the fixed non-member position 0;
                # carry them to a fixed non-identity word
                idx = kgroup.kword_index(ctx, (kgroup.KGen("S", ctx.G.generators[0]),))
                bit = kgroup.conj_bit(ctx, prefix, idx)
                idx_repr = str(idx)
            ok = bit is not None and (bit == 1) == w.member
            total += 1
            mismatches += 0 if ok else 1
            lines.append(
                f"  p={w.p} probe={n} member={int(w.member)} halted={int(w.halted)} "
                f"word_index={idx_repr} reduced_bit={bit} match={ok}"
            )
    lines.append(f"transported witnesses: {total}, mismatches: {mismatches}")
    _emit(args, lines)
    return 0 if mismatches == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="groupwalk",
        description="workbench for word problems, machine groups, and walking automata",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="group arithmetic, balls, orders, torsion")
    p.add_argument("--ctx", required=True, help='group id, e.g. "Z", "S3", "grigorchuk", "Z x grigorchuk"')
    p.add_argument("--element-cap", type=int, default=200_000)
    p.add_argument("--ball", type=int)
    p.add_argument("--norm", metavar="WORD")
    p.add_argument("--distance", nargs=2, metavar=("W1", "W2"))
    p.add_argument("--identity", metavar="WORD")
    p.add_argument("--order", metavar="WORD")
    p.add_argument("--torsion", type=int, metavar="N")
    p.add_argument("--cap", type=int, default=64)
    p.add_argument("--enumerate", type=int, metavar="K")
    p.add_argument("--index", metavar="WORD")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_group)

    p = sub.add_parser("kgroup", help="machine-group word problem and reductions")
    p.add_argument("--g", default="Z")
    p.add_argument("--h", default="S3")
    p.add_argument("--oracle", help="0/1 prefix of the constraint set")
    p.add_argument("--oracle-file")
    p.add_argument("--wp", metavar="TOKENS", help='word, e.g. "S:+1 M:(12):1 S:-1"')
    p.add_argument("--embed", type=int, metavar="N")
    p.add_argument("--embed-table", type=int, metavar="N")
    p.add_argument("--conj", action="store_true")
    p.add_argument("--witness", type=int, metavar="I")
    p.add_argument("--order", metavar="TOKENS")
    p.add_argument("--cap", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_kgroup)

    p = sub.add_parser("impred", help="staged construction and witness scans")
    p.add_argument("--phi", default="identity", choices=sorted(machines.RATE_PRESETS))
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--budget", type=int, default=4096)
    p.add_argument("--table", action="store_true")
    p.add_argument("--psi", type=int, metavar="P")
    p.add_argument("--roster", help="comma list from: halt, loop, echo")
    p.add_argument("--p-max", type=int, default=40)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_impred)

    p = sub.add_parser("simulate", help="walking-automaton runs")
    p.add_argument("--spec", required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--cap", type=int, default=100)
    p.add_argument("--membership", action="store_true")
    p.add_argument("--trace", type=int, metavar="STEPS")
    p.add_argument("--predict", action="store_true")
    p.add_argument("--oracle")
    p.add_argument("--oracle-file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pipeline", help="construction -> machine group transport")
    p.add_argument("--phi", default="identity", choices=sorted(machines.RATE_PRESETS))
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--budget", type=int, default=4096)
    p.add_argument("--g", default="Z")
    p.add_argument("--roster", default="halt,loop,echo")
    p.add_argument("--p-max", type=int, default=40)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleShortageError as exc:
        sys.stderr.write(f"oracle shortage: {exc}\n")
        return 3
    except (CapacityError, CapExceededError, BudgetExceededError) as exc:
        sys.stderr.write(f"capacity: {exc}\n")
        return 4
    except GroupwalkError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
