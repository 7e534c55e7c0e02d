"""Free groups: reduced words, cyclic data of conjugacy classes, and class counts.

A word is a tuple of nonzero ints; ``i`` stands for the generator ``s_i``
(1-based) and ``-i`` for its inverse.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

Word = tuple


class IdentityClassError(ValueError):
    """The trivial conjugacy class has no cyclic data."""


def reduce(word) -> Word:
    out: list[int] = []
    for x in word:
        if x == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(word) -> Word:
    return tuple(-x for x in reversed(word))


def cyclic_reduce(word) -> Word:
    w = reduce(word)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def rotations(word) -> list[Word]:
    return [word[i:] + word[:i] for i in range(len(word))]


def primitive_root(word) -> tuple[Word, int]:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            return word[:p], n // p
    return word, 1


@dataclass(frozen=True)
class FreeClassSpec:
    core: Word
    root: Word
    power: int
    length: int
    m: int

    @property
    def rotations(self) -> list[Word]:
        return sorted(set(rotations(self.core)))


def cyclic_data(word) -> FreeClassSpec:
    core = cyclic_reduce(word)
    if not core:
        raise IdentityClassError("empty word: the identity class is a singleton")
    root, power = primitive_root(core)
    return FreeClassSpec(core, root, power, len(core), len(set(rotations(core))))


def letters(k: int) -> list[int]:
    return [s for i in range(1, k + 1) for s in (i, -i)]


def reduced_words(k: int, max_len: int):
    """All reduced words of length <= max_len, shortest first."""
    layer: list[Word] = [()]
    yield ()
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for s in letters(k):
                if not w or w[-1] != -s:
                    nxt.append(w + (s,))
        yield from nxt
        layer = nxt


def conjugates_within(k: int, cls: FreeClassSpec, n: int) -> set[Word]:
    """Elements of the class with word length <= n.

    Every element has a reduced writing ``a g a^-1`` with ``g`` a cyclic
    conjugate of the core and ``2|a| + len(core)`` equal to its length, so
    running ``a`` over all reduced words of length <= (n - len)/2 and freely
    reducing is exhaustive.
    """
    if n < cls.length:
        return set()
    found: set[Word] = set()
    rots = cls.rotations
    for a in reduced_words(k, (n - cls.length) // 2):
        ai = inverse(a)
        for g in rots:
            w = reduce(a + g + ai)
            if len(w) <= n:
                found.add(w)
    return found


def free_conj_count_bfs(k: int, cls: FreeClassSpec, n: int) -> int:
    if k < 2:
        raise ValueError("free group rank must be at least 2")
    return len(conjugates_within(k, cls, n))


def free_conj_count_closed(k: int, cls: FreeClassSpec, n: int) -> int:
    """``m (2k-1)^floor((n - len)/2)``; agrees with the exhaustive count."""
    if n < cls.length:
        return 0
    return cls.m * (2 * k - 1) ** ((n - cls.length) // 2)


def free_conj_count_literal(k: int, cls: FreeClassSpec, n: int) -> int:
    """The closed form as printed in the source (``n >= len + 2``), kept for comparison."""
    if n < cls.length + 2:
        return 0
    return cls.m * (2 * k - 2) * (2 * k - 1) ** ((n - cls.length - 2) // 2)


def is_conjugate(u, v) -> bool:
    """Conjugacy test in a free group: cyclic cores agree up to rotation."""
    cu, cv = cyclic_reduce(u), cyclic_reduce(v)
    if len(cu) != len(cv):
        return False
    return not cu or cv in rotations(cu)


def parse_word(text: str, labels: dict[str, int]) -> Word:
    """Parse ``"A*B^-1*A^2"`` (``*`` optional between single-letter labels)."""
    out: list[int] = []
    for tok in _tokens(text, labels):
        out.extend(tok)
    return reduce(out)


def _tokens(text: str, labels: dict[str, int]):
    s = text.replace(" ", "")
    names = sorted(labels, key=len, reverse=True)
    i = 0
    while i < len(s):
        if s[i] == "*":
            i += 1
            continue
        for name in names:
            if s.startswith(name, i):
                i += len(name)
                break
        else:
            raise ValueError(f"unknown generator at {s[i:]!r}")
        power = 1
        if i < len(s) and s[i] == "^":
            j = i + 1
            if j < len(s) and s[j] in "+-":
                j += 1
            while j < len(s) and s[j].isdigit():
                j += 1
            try:
                power = int(s[i + 1 : j])
            except ValueError:
                raise ValueError(f"bad exponent in {text!r}") from None
            i = j
        g = labels[name]
        yield list(itertools.repeat(g if power > 0 else -g, abs(power)))


def format_word(word, names: list[str]) -> str:
    if not word:
        return "e"
    return "*".join(names[abs(x) - 1] + ("^-1" if x < 0 else "") for x in word)


def element_root(word) -> tuple[Word, int]:
    """Primitive root of the element ``word`` itself (not of its cyclic core)."""
    w = reduce(word)
    core = cyclic_reduce(w)
    if not core:
        raise IdentityClassError("the identity has no primitive root")
    i = (len(w) - len(core)) // 2
    prefix = w[:i]
    root, power = primitive_root(core)
    return reduce(prefix + root + inverse(prefix)), power


def free_conj_series(k: int, cls: FreeClassSpec, n_max: int) -> list[int]:
    """Cumulative exhaustive counts for n = 0..n_max from one enumeration."""
    if k < 2:
        raise ValueError("free group rank must be at least 2")
    hist = [0] * (n_max + 1)
    for w in conjugates_within(k, cls, n_max):
        hist[len(w)] += 1
    out, total = [], 0
    for h in hist:
        total += h
        out.append(total)
    return out
