import pytest

from groupwalk.errors import BudgetExceededError, RateError
from groupwalk.machines import (
    BUILTIN_PROGRAMS,
    HALT_PROGRAM,
    LOOP_PROGRAM,
    ORACLE_ECHO_PROGRAM,
    STANDARD_ENUMERATION,
    ListEnumeration,
    approx_members,
    build_skeleton,
    cantor_pair,
    cantor_unpair,
    compose_rates,
    construction_probe_map,
    decode_program,
    parse_program,
    probe_position,
    program_code,
    rate_function,
    restrict_rate,
    run_program,
    transport_probe_map,
    witness_report,
)
from groupwalk.subshift import OraclePrefix

ROSTER = [
    ("halt", HALT_PROGRAM),
    ("loop", LOOP_PROGRAM),
    ("echo", ORACLE_ECHO_PROGRAM),
]


def test_parse_and_format_roundtrip():
    text = "ORACLE 1\nDECJZ 1 3\nHALT\nDECJZ 2 3"
    prog = parse_program(text)
    assert prog == ORACLE_ECHO_PROGRAM
    assert parse_program(prog.to_text()) == prog


def test_parse_rejects_bad_programs():
    with pytest.raises(ValueError):
        parse_program("JUMP 3")
    with pytest.raises(ValueError):
        parse_program("DECJZ 0 9")  # label out of range


def test_run_halt_immediately():
    out = run_program(HALT_PROGRAM, 7, "", 100)
    assert out.halted and out.steps == 1 and not out.tainted


def test_run_loop_never_halts():
    for cap in (1, 10, 1000):
        out = run_program(LOOP_PROGRAM, 0, "", cap)
        assert not out.halted and out.steps == cap


def test_run_oracle_echo():
    assert run_program(ORACLE_ECHO_PROGRAM, 2, "001", 50).halted
    assert run_program(ORACLE_ECHO_PROGRAM, 2, "001", 50).steps == 3
    assert not run_program(ORACLE_ECHO_PROGRAM, 0, "001", 50).halted
    oob = run_program(ORACLE_ECHO_PROGRAM, 9, "001", 50)
    assert not oob.halted and oob.tainted


def test_run_accepts_prefix_objects():
    assert run_program(ORACLE_ECHO_PROGRAM, 1, OraclePrefix("011"), 50).halted


def test_pairing_roundtrip():
    for n in range(200):
        i, j = cantor_unpair(n)
        assert cantor_pair(i, j) == n


def test_program_code_roundtrip():
    for prog in BUILTIN_PROGRAMS.values():
        assert decode_program(program_code(prog)) == prog


def test_decode_invalid_codes_diverge():
    assert decode_program(0) == LOOP_PROGRAM  # empty program is ill-formed
    for i in range(40):
        prog = decode_program(i)
        # labels always valid after decoding
        for ins in prog.instructions:
            if ins[0] == "DECJZ":
                assert 0 <= ins[2] < len(prog.instructions)


def test_enumeration_is_infinite_to_one():
    seen = {}
    for n in range(300):
        prog = STANDARD_ENUMERATION.program_at(n)
        seen.setdefault(prog.instructions, []).append(n)
    repeated = [v for v in seen.values() if len(v) >= 3]
    assert repeated, "every machine should recur under the pairing"


def test_skeleton_stage_zero_shape():
    sk = build_skeleton("identity", 1)
    stage = sk.stages[0]
    assert stage.m == 0
    assert stage.inputs == (0,)
    assert len(stage.rules) == 1
    assert stage.rules[0].prefix == ""
    assert stage.rules[0].position == 1


def test_skeleton_identity_rate_inputs():
    sk = build_skeleton("identity", 2)
    assert sk.stages[1].m == 2
    assert sk.stages[1].inputs == (2, 3, 4, 5)
    assert sk.stages[1].big_m == 5
    # candidate prefixes padded with zeros out to rate(p_i)
    assert [r.prefix for r in sk.stages[1].rules] == ["00", "010", "1000", "11000"]


def test_skeleton_square_rate_inputs():
    sk = build_skeleton("square", 2)
    assert sk.stages[1].inputs == (2, 3, 4, 5)
    assert sk.stages[1].big_m == 25


def test_skeleton_positions_partition_initial_segment():
    sk = build_skeleton("identity", 3)
    reserved = [r.position for r in sk.rules()]
    assert len(reserved) == len(set(reserved))
    assert max(reserved) < sk.length
    # stages tile the determined initial segment with no gaps or overlaps
    assert sk.stages[0].m == 0
    for left, right in zip(sk.stages, sk.stages[1:]):
        assert right.m == left.m_prime + 1
    assert sk.length == sk.stages[-1].m_prime + 1
    for stage in sk.stages:
        for rule in stage.rules:
            assert rule.position > stage.big_m
            assert rule.position <= stage.m_prime


def test_skeleton_deterministic():
    a = build_skeleton("identity", 3)
    b = build_skeleton("identity", 3)
    assert a.to_text() == b.to_text()


def test_skeleton_budget():
    with pytest.raises(BudgetExceededError) as info:
        build_skeleton("identity", 4)
    assert info.value.stage == 3


def test_probe_positions():
    sk = build_skeleton("identity", 2)
    assigned = {p: sk.probe_position(p) for p in sk.stages[1].inputs}
    assert all(pos > sk.stages[1].big_m for pos in assigned.values())
    assert len(set(assigned.values())) == len(assigned)
    assert sk.probe_position(99) == 0  # unprobed inputs hit the fixed non-member
    assert probe_position("identity", 2, 2) == assigned[2]


def test_approx_members_monotone_in_cap_and_stages():
    prefixes = [approx_members("identity", 3, cap) for cap in (10, 100, 10_000)]
    for shorter, longer in zip(prefixes, prefixes[1:]):
        assert all(a <= b for a, b in zip(shorter.bits, longer.bits))
    two = approx_members("identity", 2, 10_000)
    three = approx_members("identity", 3, 10_000)
    assert three.extends(two)


def test_approx_members_constant_enumerations():
    all_halt = ListEnumeration([HALT_PROGRAM], label="halt-only")
    a = approx_members("identity", 2, 100, enumeration=all_halt)
    sk = build_skeleton("identity", 2, enumeration=all_halt)
    assert all(a.bit(r.position) == 1 for r in sk.rules())
    all_loop = ListEnumeration([LOOP_PROGRAM], label="loop-only")
    b = approx_members("identity", 2, 100, enumeration=all_loop)
    assert b.members() == []


def test_stage_rules_match_replayed_prefix():
    # the rule whose candidate prefix equals the realised one reads the
    # true determined bits padded with zeros
    sk = build_skeleton("identity", 3)
    prefix = approx_members("identity", 3, 10_000)
    for stage in sk.stages:
        true_w = prefix.bits[: stage.m]
        matching = [r for r in stage.rules if r.prefix[: stage.m] == true_w]
        assert matching, stage.index
        rule = matching[0]
        assert rule.prefix == true_w + "0" * (len(rule.prefix) - stage.m)
        # determined-out-of-members region really is out
        assert all(
            prefix.bit(q) == 0 for q in range(stage.m, stage.big_m + 1)
        )


def test_witness_report_builtin_roster():
    rep = witness_report("identity", ROSTER, 3, 10_000, 40)
    halt_ws = rep.witnesses["halt"]
    assert any(w.member for w in halt_ws)
    loop_ws = rep.witnesses["loop"]
    assert any((not w.member) and w.position > 0 for w in loop_ws)
    assert witness_report("identity", [], 2, 100, 10).witnesses == {}


def test_witness_report_loop_members_stay_out_at_every_cap():
    for cap in (10, 100, 1000):
        rep = witness_report("identity", [("loop", LOOP_PROGRAM)], 3, cap, 10)
        assert all(not w.member for w in rep.witnesses["loop"])


def test_rate_presets_and_tables():
    assert rate_function("identity")(7) == 7
    assert rate_function("square")(5) == 25
    assert rate_function("exp")(5) == 32
    assert rate_function("tower5")(0) == 65536
    table = rate_function({0: 0, 1: 2, 2: 2, 3: 5})
    assert table(3) == 5
    with pytest.raises(RateError):
        rate_function({0: 3, 1: 1})
    with pytest.raises(RateError):
        rate_function("warp")
    composed = compose_rates(rate_function("square"), rate_function("identity"))
    assert composed(4) == 16


def test_restrict_rate():
    handle = construction_probe_map("square", 2)
    smaller = restrict_rate(handle, "identity")
    assert smaller.rate.name == "identity"
    assert smaller(3) == handle(3)
    with pytest.raises(RateError):
        restrict_rate(smaller, "square")


def test_restricted_handle_reverified_by_witness_scan():
    # build the set at the square rate, then probe it at the identity rate:
    # the same probe map still produces coincidences for oracle-blind machines
    from groupwalk.machines import probe_witnesses

    prefix = approx_members("square", 2, 1000)
    handle = construction_probe_map("square", 2)
    restricted = restrict_rate(handle, "identity")
    ws = probe_witnesses(prefix, restricted, ROSTER, 1000, 10)
    assert any(w.member for w in ws["halt"])
    assert any(not w.member for w in ws["loop"])


def test_transport_probe_map_identity():
    handle = construction_probe_map("identity", 2)
    out = transport_probe_map(
        lambda n: n,
        lambda w: w,
        "identity",
        handle,
        check_prefixes=["0101", ""],
    )
    assert out(4) == handle(4)
    assert out.rate(9) == 9


def test_transport_rejects_flat_rates():
    handle = construction_probe_map("identity", 2)
    with pytest.raises(RateError):
        transport_probe_map(lambda n: n, lambda w: w, {i: 0 for i in range(40)}, handle)


def test_transport_rejects_short_translations():
    handle = construction_probe_map("identity", 2)
    with pytest.raises(RateError):
        transport_probe_map(
            lambda n: n,
            lambda w: w[: len(w) // 2],
            "identity",
            handle,
            check_prefixes=["010101"],
        )
