"""Independent brute-force oracles used only by the tests.

The production code decides Grigorchuk identities by level-one splitting;
here we instead act on all binary strings of a fixed depth.  The machine
group's word problem is likewise re-decided by literally folding `act`
over every legal window.  Keeping these separate from the shipped
algorithms is the point: agreement is evidence, not tautology.
"""

import itertools

from groupwalk import groups, kgroup
from groupwalk.subshift import enumerate_language

_SECTIONS = {"b": ("a", "d"), "c": ("a", "b"), "d": ("", "c")}


def act_letter(letter, s):
    if not s:
        return s
    head, rest = s[0], s[1:]
    if letter == "a":
        return ("1" if head == "0" else "0") + rest
    left, right = _SECTIONS[letter]
    if head == "0":
        return "0" + act_word(tuple(left), rest)
    return "1" + act_word(tuple(right), rest)


def act_word(word, s):
    # rightmost letter acts first
    for letter in reversed(word):
        s = act_letter(letter, s)
    return s


def tree_trivial(word, depth):
    """Does the word fix every binary string of the given depth?"""
    for bits in itertools.product("01", repeat=depth):
        s = "".join(bits)
        if act_word(word, s) != s:
            return False
    return True


def tree_signature(word, depth):
    """The word's full action table at the given depth (hashable)."""
    return tuple(
        act_word(word, "".join(bits)) for bits in itertools.product("01", repeat=depth)
    )


def signature_ball(n, depth):
    """BFS ball of the Grigorchuk group deduplicated by tree signatures.

    Entirely independent of the shipped portrait keys; returns the list
    of canonical words in discovery order.
    """
    start = tree_signature((), depth)
    seen = {start}
    words = [()]
    layers = [[()]]
    for _ in range(n):
        layer = []
        for w in layers[-1]:
            for sym in "abcd":
                cand = w + (sym,)
                sig = tree_signature(cand, depth)
                if sig not in seen:
                    seen.add(sig)
                    layer.append(cand)
                    words.append(cand)
        layers.append(layer)
    return words


def brute_wp(ctx, word):
    """Word-problem verdict by folding `act` over every legal window.

    Returns ("non_identity", witness) with the first moved legal window in
    enumeration order, or ("identity", None).  Needs an oracle prefix of
    length >= 2 |word| + 1.
    """
    g_word = kgroup.gamma(word)
    if not groups.is_identity(ctx.G, g_word):
        return "non_identity", ("gamma", g_word)
    e_h = ctx.H.identity()
    for pattern in enumerate_language(ctx.G, ctx.oracle, len(word)):
        res = kgroup.act(ctx, word, pattern, e_h)
        if not res.fixes(ctx, pattern, e_h):
            return "non_identity", ("pattern", pattern)
    return "identity", None


def brute_order(ctx, word, cap):
    """Order by iterating literal actions over every legal window.

    Multiplies the word's action on each legal window of radius
    cap * |word| until all windows and states return simultaneously.
    """
    for k in range(1, cap + 1):
        power = word * k
        if not groups.is_identity(ctx.G, kgroup.gamma(power)):
            continue
        radius = len(power)
        ok = True
        for pattern in enumerate_language(ctx.G, ctx.oracle, radius):
            for h_sym in ctx.H.generators:
                h = ctx.H.generator_element(h_sym)
                res = kgroup.act(ctx, power, pattern, h)
                if not res.fixes(ctx, pattern, h):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return k
    raise AssertionError(f"order above {cap}")


def assignments_with_at_most_two_ones(size):
    yield ()
    for i in range(size):
        yield (i,)
    for i in range(size):
        for j in range(i + 1, size):
            yield (i, j)
