"""Word arithmetic for the first Grigorchuk group.

Elements act on the rooted binary tree.  The generator ``a`` swaps the two
subtrees; ``b``, ``c``, ``d`` fix the first level and act on the subtrees
through the mutual recursion

    b = (a, d),    c = (a, b),    d = (e, c)

written as (action on left subtree, action on right subtree).  All four
generators are involutions and {e, b, c, d} is a Klein four-group
(bc = cb = d, bd = db = c, cd = dc = b).  This labelling of b, c, d is
fixed once and for all here; it determines the orders of short products
(ord(ab) = 8, ord(ad) = 4, ord(ac) = 16).

Words are stored length-reduced: no doubled letters and no two adjacent
letters from {b, c, d}, so reduced words alternate a's with single letters
from {b, c, d}.  Reduction never increases length, and the level-one
sections of a reduced word of length n >= 2 have length at most
ceil(n / 2) < n, which makes the triviality recursion terminate.
"""

GENERATORS = ("a", "b", "c", "d")

# x -> (left section, right section); "" is the identity.  a is the swap.
SECTIONS = {"b": ("a", "d"), "c": ("a", "b"), "d": ("", "c")}

_KLEIN = {
    ("b", "c"): "d",
    ("c", "b"): "d",
    ("b", "d"): "c",
    ("d", "b"): "c",
    ("c", "d"): "b",
    ("d", "c"): "b",
}

# minimal-portrait collapse: (swap, left, right) patterns that denote a
# generator or the identity.
_NUCLEUS = {
    (0, "e", "e"): "e",
    (1, "e", "e"): "a",
    (0, "a", "d"): "b",
    (0, "a", "b"): "c",
    (0, "e", "c"): "d",
}


def reduce_word(letters):
    """Length-reduce a word over a, b, c, d.

    Applies x x -> e and the Klein merges for adjacent letters from
    {b, c, d}.  The result alternates a's and single non-a letters.
    """
    out = []
    for x in letters:
        if x not in SECTIONS and x != "a":
            raise ValueError(f"not a Grigorchuk generator: {x!r}")
        if not out:
            out.append(x)
        elif out[-1] == x:
            out.pop()
        elif out[-1] != "a" and x != "a":
            # the merged letter sits after an 'a' or at the start, so no
            # cascade to the left is possible
            out[-1] = _KLEIN[(out[-1], x)]
        else:
            out.append(x)
    return tuple(out)


def activity_and_sections(word):
    """Split a word into its root swap bit and the two level-one sections.

    The word is taken as a product with the rightmost letter acting first;
    sections come back as unreduced words.
    """
    swap = 0
    s0, s1 = [], []
    for x in word:
        if x == "a":
            swap ^= 1
            s0, s1 = s1, s0
        else:
            left, right = SECTIONS[x]
            if left:
                s0.append(left)
            if right:
                s1.append(right)
    return swap, s0, s1


def is_trivial(letters):
    """Decide whether a word represents the identity.

    Reduce, reject on a root swap, otherwise recurse into both sections.
    """
    stack = [reduce_word(letters)]
    while stack:
        w = stack.pop()
        if not w:
            continue
        if len(w) == 1:
            return False
        swap, s0, s1 = activity_and_sections(w)
        if swap:
            return False
        stack.append(reduce_word(s0))
        stack.append(reduce_word(s1))
    return True


def portrait(letters):
    """Canonical form of a word: its minimal tree portrait.

    Two words are equal in the group iff their portraits are equal, so the
    portrait doubles as a hash key.  Leaves are the one-letter names
    'e', 'a', 'b', 'c', 'd'; internal nodes are (swap, left, right) triples
    that do not match any generator's own decomposition.
    """
    w = reduce_word(letters)
    if not w:
        return "e"
    if len(w) == 1:
        return w[0]
    swap, s0, s1 = activity_and_sections(w)
    node = (swap, portrait(s0), portrait(s1))
    return _NUCLEUS.get(node, node)
