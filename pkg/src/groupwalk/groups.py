"""Finitely generated groups with decidable word problem.

Provides the four group kinds used throughout the package (the integers,
the symmetric group on three points, the first Grigorchuk group, and
direct products of these), together with the word-level operations built
on them: evaluation, identity testing, word norms and the word metric,
canonical ball enumeration, element orders, the torsion function, and the
length-lex bijection between naturals and generator words.

Conventions fixed here and relied on everywhere else:

* Generating sets are symmetric (closed under inverse) and ordered; the
  declared order defines the length-lex enumeration of words.
* A word denotes the product of its letters with the rightmost letter
  acting first when elements are viewed as maps.
* Balls are enumerated breadth-first; within a layer, elements appear in
  the lexicographic order of their first-discovered word.  Index 0 is the
  identity.  This order is deterministic and is the index space for
  pattern domains.

All values are immutable and all operations are pure; the only mutation
is internal memoisation of BFS layers and norm tables, which is
idempotent and safe to share between workers.
"""

from __future__ import annotations

from . import grigorchuk
from .errors import (
    CapacityError,
    CapExceededError,
    ContextError,
    UnknownGeneratorError,
)


class _Infinite:
    """Marker for a provably infinite element order."""

    def __repr__(self):
        return "Infinite"


INFINITE = _Infinite()

_S3_IDENTITY = (1, 2, 3)
_S3_GENS = {
    "(12)": (2, 1, 3),
    "(23)": (1, 3, 2),
    "(13)": (3, 2, 1),
}


def _s3_mul(p, q):
    # (p q)(i) = p(q(i))
    return (p[q[0] - 1], p[q[1] - 1], p[q[2] - 1])


def _s3_inv(p):
    out = [0, 0, 0]
    for i, v in enumerate(p):
        out[v - 1] = i + 1
    return tuple(out)


class GroupCtx:
    """A group kind plus its ordered symmetric generating set.

    Subclasses supply the raw arithmetic; the word-level operations at
    module scope work uniformly through this interface.  Each context
    owns a breadth-first enumeration cache, so reuse one context object
    per group rather than recreating it in a loop.
    """

    kind = "abstract"

    def __init__(self, name, generators, element_cap=200_000):
        self.name = name
        self.generators = tuple(generators)
        self.element_cap = element_cap
        # BFS state: canonical element list, their first-discovered words,
        # layer boundaries (index i = end of ball of radius i), key -> index,
        # key -> norm.
        self._elems = [self.identity()]
        self._words = [()]
        self._layer_end = [1]
        self._index = {self.key(self.identity()): 0}
        self._norms = {self.key(self.identity()): 0}
        self._exhausted = False
        for sym in self.generators:
            if self.is_identity_element(self.generator_element(sym)):
                raise ValueError(f"generating set of {name} contains the identity")
            if self.inverse_symbol(sym) not in self.generators:
                raise ValueError(f"generating set of {name} is not symmetric")

    # -- raw arithmetic supplied by subclasses --------------------------

    def identity(self):
        raise NotImplementedError

    def multiply_raw(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def key(self, a):
        """A hashable canonical key: equal keys iff equal group elements."""
        raise NotImplementedError

    def is_identity_element(self, a):
        raise NotImplementedError

    def contains(self, a):
        """Structural membership check for raw values."""
        raise NotImplementedError

    def generator_element(self, sym):
        raise NotImplementedError

    def inverse_symbol(self, sym):
        raise NotImplementedError

    def is_torsion(self):
        raise NotImplementedError

    def provably_infinite_order(self, a):
        """True when the element has a nonzero coordinate along an integer factor."""
        return False

    def __repr__(self):
        return f"<group {self.name}>"

    # -- BFS cache -------------------------------------------------------

    def _ensure_radius(self, n):
        while len(self._layer_end) <= n and not self._exhausted:
            radius = len(self._layer_end)
            start = self._layer_end[-2] if len(self._layer_end) >= 2 else 0
            end = self._layer_end[-1]
            added = False
            for i in range(start, end):
                parent = self._elems[i]
                parent_word = self._words[i]
                for sym in self.generators:
                    cand = self.multiply_raw(parent, self.generator_element(sym))
                    k = self.key(cand)
                    if k in self._index:
                        continue
                    if len(self._elems) >= self.element_cap:
                        raise CapacityError(len(self._layer_end) - 1, self.element_cap)
                    self._index[k] = len(self._elems)
                    self._norms[k] = radius
                    self._elems.append(cand)
                    self._words.append(parent_word + (sym,))
                    added = True
            self._layer_end.append(len(self._elems))
            if not added:
                self._exhausted = True

    def _norm_of_key(self, k):
        while k not in self._norms:
            if self._exhausted:
                raise ContextError("element not generated by the declared generators")
            self._ensure_radius(len(self._layer_end))
        return self._norms[k]


class IntegersGroup(GroupCtx):
    kind = "Z"

    def __init__(self, element_cap=200_000):
        super().__init__("Z", ("+1", "-1"), element_cap)

    def identity(self):
        return 0

    def multiply_raw(self, a, b):
        return a + b

    def inverse(self, a):
        return -a

    def key(self, a):
        return a

    def is_identity_element(self, a):
        return a == 0

    def contains(self, a):
        return isinstance(a, int) and not isinstance(a, bool)

    def generator_element(self, sym):
        if sym == "+1":
            return 1
        if sym == "-1":
            return -1
        raise UnknownGeneratorError(f"unknown Z generator {sym!r}")

    def inverse_symbol(self, sym):
        return "-1" if sym == "+1" else "+1"

    def is_torsion(self):
        return False

    def provably_infinite_order(self, a):
        return a != 0


class SymmetricGroup3(GroupCtx):
    kind = "S3"

    def __init__(self, element_cap=200_000):
        super().__init__("S3", ("(12)", "(23)", "(13)"), element_cap)

    def identity(self):
        return _S3_IDENTITY

    def multiply_raw(self, a, b):
        return _s3_mul(a, b)

    def inverse(self, a):
        return _s3_inv(a)

    def key(self, a):
        return a

    def is_identity_element(self, a):
        return a == _S3_IDENTITY

    def contains(self, a):
        return isinstance(a, tuple) and sorted(a) == [1, 2, 3]

    def generator_element(self, sym):
        try:
            return _S3_GENS[sym]
        except KeyError:
            raise UnknownGeneratorError(f"unknown S3 generator {sym!r}") from None

    def inverse_symbol(self, sym):
        return sym  # transpositions are involutions

    def is_torsion(self):
        return True


class GrigorchukGroup(GroupCtx):
    kind = "grigorchuk"

    def __init__(self, element_cap=200_000):
        super().__init__("grigorchuk", grigorchuk.GENERATORS, element_cap)

    def identity(self):
        return ()

    def multiply_raw(self, a, b):
        return grigorchuk.reduce_word(a + b)

    def inverse(self, a):
        return tuple(reversed(a))  # the generators are involutions

    def key(self, a):
        return grigorchuk.portrait(a)

    def is_identity_element(self, a):
        return grigorchuk.is_trivial(a)

    def contains(self, a):
        return isinstance(a, tuple) and all(s in grigorchuk.GENERATORS for s in a)

    def generator_element(self, sym):
        if sym not in grigorchuk.GENERATORS:
            raise UnknownGeneratorError(f"unknown Grigorchuk generator {sym!r}")
        return (sym,)

    def inverse_symbol(self, sym):
        return sym

    def is_torsion(self):
        return True


class ProductGroup(GroupCtx):
    kind = "product"

    def __init__(self, left, right, element_cap=200_000):
        self.left = left
        self.right = right
        gens = tuple(f"L:{s}" for s in left.generators) + tuple(
            f"R:{s}" for s in right.generators
        )
        super().__init__(f"{left.name} x {right.name}", gens, element_cap)

    def identity(self):
        return (self.left.identity(), self.right.identity())

    def multiply_raw(self, a, b):
        return (
            self.left.multiply_raw(a[0], b[0]),
            self.right.multiply_raw(a[1], b[1]),
        )

    def inverse(self, a):
        return (self.left.inverse(a[0]), self.right.inverse(a[1]))

    def key(self, a):
        return (self.left.key(a[0]), self.right.key(a[1]))

    def is_identity_element(self, a):
        return self.left.is_identity_element(a[0]) and self.right.is_identity_element(
            a[1]
        )

    def contains(self, a):
        return (
            isinstance(a, tuple)
            and len(a) == 2
            and self.left.contains(a[0])
            and self.right.contains(a[1])
        )

    def generator_element(self, sym):
        side, _, rest = sym.partition(":")
        if side == "L":
            return (self.left.generator_element(rest), self.right.identity())
        if side == "R":
            return (self.left.identity(), self.right.generator_element(rest))
        raise UnknownGeneratorError(f"unknown product generator {sym!r}")

    def inverse_symbol(self, sym):
        side, _, rest = sym.partition(":")
        if side == "L":
            return f"L:{self.left.inverse_symbol(rest)}"
        if side == "R":
            return f"R:{self.right.inverse_symbol(rest)}"
        raise UnknownGeneratorError(f"unknown product generator {sym!r}")

    def is_torsion(self):
        return self.left.is_torsion() and self.right.is_torsion()

    def provably_infinite_order(self, a):
        return self.left.provably_infinite_order(a[0]) or self.right.provably_infinite_order(a[1])


def group_context(spec_id, element_cap=200_000):
    """Build a group context from a string id.

    Accepted ids: "Z", "S3", "grigorchuk", and products joined with " x "
    (left associative), e.g. "Z x grigorchuk".
    """
    parts = [p.strip() for p in spec_id.split(" x ")]
    ctx = _atom_context(parts[0], element_cap)
    for p in parts[1:]:
        ctx = ProductGroup(ctx, _atom_context(p, element_cap), element_cap)
    return ctx


def _atom_context(token, element_cap):
    t = token.lower()
    if t == "z":
        return IntegersGroup(element_cap)
    if t == "s3":
        return SymmetricGroup3(element_cap)
    if t == "grigorchuk":
        return GrigorchukGroup(element_cap)
    raise ValueError(f"unknown group id {token!r}")


# -- word-level operations ------------------------------------------------


def multiply(ctx, a, b):
    if not (ctx.contains(a) and ctx.contains(b)):
        raise ContextError(f"operands do not belong to {ctx.name}")
    return ctx.multiply_raw(a, b)


def evaluate_word(ctx, word):
    """Product of the word's letters (empty word = identity)."""
    acc = ctx.identity()
    for sym in word:
        acc = ctx.multiply_raw(acc, ctx.generator_element(sym))
    return acc


def is_identity(ctx, word):
    """Does the word evaluate to the identity?  Total for all group kinds."""
    return ctx.is_identity_element(evaluate_word(ctx, word))


def elements_equal(ctx, a, b):
    """Group equality: a == b iff a b^-1 is the identity."""
    return ctx.is_identity_element(ctx.multiply_raw(a, ctx.inverse(b)))


def word_norm(ctx, g):
    """Length of a shortest generator word evaluating to g (BFS from e)."""
    if not ctx.contains(g):
        raise ContextError(f"element does not belong to {ctx.name}")
    return ctx._norm_of_key(ctx.key(g))


def distance(ctx, g, h):
    """Left-invariant word metric d(g, h) = |g^-1 h|."""
    return word_norm(ctx, multiply(ctx, ctx.inverse(g), h))


def ball(ctx, n):
    """All elements of norm <= n in canonical order (index 0 is e)."""
    if n < 0:
        raise ValueError("radius must be >= 0")
    ctx._ensure_radius(n)
    end = ctx._layer_end[min(n, len(ctx._layer_end) - 1)]
    return ctx._elems[:end]


def ball_words(ctx, n):
    """First-discovered (length-lex minimal among BFS parents) words, ball order."""
    ctx._ensure_radius(n)
    end = ctx._layer_end[min(n, len(ctx._layer_end) - 1)]
    return ctx._words[:end]


def ball_index_map(ctx, n):
    """key -> canonical ball index for all elements of norm <= n."""
    elems = ball(ctx, n)
    return {ctx.key(e): i for i, e in enumerate(elems)}


def sphere_words(ctx, n):
    """Canonical words of the elements of norm exactly n."""
    ctx._ensure_radius(n)
    if n >= len(ctx._layer_end):
        return []
    lo = ctx._layer_end[n - 1] if n >= 1 else 0
    return ctx._words[lo : ctx._layer_end[n]]


def element_order(ctx, g, cap):
    """Least k >= 1 with g^k = e, INFINITE when provable, else CapExceededError."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if ctx.provably_infinite_order(g):
        return INFINITE
    acc = g
    for k in range(1, cap + 1):
        if ctx.is_identity_element(acc):
            return k
        acc = ctx.multiply_raw(acc, g)
    raise CapExceededError(cap)


def torsion_function(ctx, n, cap):
    """Largest element order over the radius-n ball (torsion kinds only)."""
    if not ctx.is_torsion():
        raise ValueError(f"{ctx.name} is not a torsion group")
    best = 1
    for g in ball(ctx, n):
        k = element_order(ctx, g, cap)
        if k > best:
            best = k
    return best


# -- length-lex enumeration of words over an ordered alphabet -------------


def lenlex_decode(alphabet, index):
    """The index-th word over the alphabet, ordered by length then lex."""
    if index < 0:
        raise ValueError("index must be >= 0")
    s = len(alphabet)
    if s < 2:
        raise ValueError("alphabet must have at least two symbols")
    length = 0
    block = 1  # number of words of the current length
    rest = index
    while rest >= block:
        rest -= block
        block *= s
        length += 1
    digits = []
    for _ in range(length):
        rest, d = divmod(rest, s)
        digits.append(d)
    return tuple(alphabet[d] for d in reversed(digits))


def lenlex_index(alphabet, word):
    """Inverse of lenlex_decode."""
    s = len(alphabet)
    if s < 2:
        raise ValueError("alphabet must have at least two symbols")
    pos = {sym: i for i, sym in enumerate(alphabet)}
    index = 0
    block = 1
    for _ in range(len(word)):
        index += block
        block *= s
    rest = 0
    for sym in word:
        try:
            d = pos[sym]
        except KeyError:
            raise UnknownGeneratorError(f"symbol {sym!r} not in alphabet") from None
        rest = rest * s + d
    return index + rest


def lenlex_count(alphabet_size, max_length):
    """Number of words of length <= max_length (0 when max_length < 0)."""
    if max_length < 0:
        return 0
    s = alphabet_size
    return (s ** (max_length + 1) - 1) // (s - 1)


def enumerate_words(ctx, index):
    """index -> generator word, in length-lex order (0 is the empty word)."""
    return lenlex_decode(ctx.generators, index)


def word_index(ctx, word):
    """generator word -> index; inverse of enumerate_words."""
    return lenlex_index(ctx.generators, word)


def word_problem_prefix(ctx, length):
    """The first `length` bits of the linearised word problem of ctx."""
    bits = []
    for i in range(length):
        bits.append("1" if is_identity(ctx, enumerate_words(ctx, i)) else "0")
    return "".join(bits)


def parse_word(ctx, text):
    """Whitespace-separated generator symbols -> word (validated)."""
    word = tuple(text.split())
    for sym in word:
        ctx.generator_element(sym)  # raises UnknownGeneratorError
    return word


def format_element(ctx, elem):
    """Readable canonical form of an element, per group kind."""
    if ctx.kind == "Z":
        return str(elem)
    if ctx.kind == "S3":
        return "".join(str(v) for v in elem)
    if ctx.kind == "grigorchuk":
        return "".join(elem) if elem else "e"
    if ctx.kind == "product":
        return (
            f"({format_element(ctx.left, elem[0])}, "
            f"{format_element(ctx.right, elem[1])})"
        )
    return repr(elem)


def format_word(word):
    return " ".join(word) if word else "e"


def inverse_word(ctx, word):
    return tuple(ctx.inverse_symbol(s) for s in reversed(word))


def random_word(ctx, rng, max_length, min_length=0):
    length = rng.randint(min_length, max_length)
    return tuple(rng.choice(ctx.generators) for _ in range(length))
