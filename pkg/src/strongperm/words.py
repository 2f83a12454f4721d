"""Words in the free group F_d.

Letters are stored as signed integers: ``0`` is the identity letter, ``+i``
is the generator g_i and ``-i`` its inverse.  The index convention used for
matrix coefficients (0 -> e, i -> g_i, d+i -> g_i^{-1}) is available through
:meth:`Word.indices` and :meth:`Word.from_indices`.

Text format: lowercase ``a..z`` are g_1..g_26, uppercase letters their
inverses and ``1`` the identity letter.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Tuple

Letters = Tuple[int, ...]

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class WordError(ValueError):
    pass


def letter_inverse(x: int) -> int:
    return -x


def strip_identity(letters: Iterable[int]) -> Letters:
    return tuple(x for x in letters if x != 0)


def reduce_letters(letters: Iterable[int]) -> Letters:
    """Free reduction with a stack; identity letters are dropped."""
    out = []
    for x in letters:
        if x == 0:
            continue
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_letters(letters: Sequence[int]) -> Letters:
    return tuple(-x for x in reversed(letters))


def is_reduced(letters: Sequence[int]) -> bool:
    if any(x == 0 for x in letters):
        return False
    return all(letters[t] != -letters[t + 1] for t in range(len(letters) - 1))


def cyclic_reduce_letters(letters: Letters) -> Tuple[Letters, Letters]:
    """Split a reduced word as conjugator * core * conjugator^{-1}."""
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    return letters[:i], letters[i:j + 1]


def power_decompose_letters(letters: Letters) -> Tuple[Letters, int]:
    if not letters:
        raise WordError("identity has no power decomposition")
    conj, core = cyclic_reduce_letters(letters)
    n = len(core)
    for period in divisors(n):
        if core[:period] * (n // period) == core:
            base = conj + core[:period] + inverse_letters(conj)
            return base, n // period
    raise AssertionError("unreachable: the full core is always a period")


@lru_cache(maxsize=None)
def divisors(k: int) -> Tuple[int, ...]:
    if k < 1:
        raise ValueError(f"divisors are defined for k >= 1, got {k}")
    small = [i for i in range(1, int(k ** 0.5) + 1) if k % i == 0]
    large = [k // i for i in reversed(small) if i * i != k]
    return tuple(small + large)


def divisor_count(k: int) -> int:
    """Number of positive divisors of ``k``."""
    if k < 1:
        raise ValueError(f"divisor_count requires k >= 1, got {k}")
    return len(divisors(k))


@dataclass(frozen=True)
class Word:
    """A word over g_1..g_d and their inverses (not necessarily reduced)."""

    letters: Letters
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise WordError(f"rank d must be positive, got {self.d}")
        for x in self.letters:
            if abs(x) > self.d:
                raise WordError(f"letter {x} out of range for d={self.d}")

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "Word":
        letters = []
        for ch in text.strip():
            if ch == "1":
                letters.append(0)
            elif ch.lower() in _ALPHABET:
                i = _ALPHABET.index(ch.lower()) + 1
                letters.append(i if ch.islower() else -i)
            elif ch in " *·":
                continue
            else:
                raise WordError(f"bad character {ch!r} in word {text!r}")
        if d is None:
            d = max([abs(x) for x in letters] + [1])
        return cls(tuple(letters), d)

    @classmethod
    def from_indices(cls, indices: Sequence[int], d: int) -> "Word":
        letters = []
        for i in indices:
            if not 0 <= i <= 2 * d:
                raise WordError(f"letter index {i} out of range [0, {2 * d}]")
            letters.append(i if i <= d else -(i - d))
        return cls(tuple(letters), d)

    @classmethod
    def identity(cls, d: int) -> "Word":
        return cls((), d)

    def indices(self) -> Tuple[int, ...]:
        return tuple(x if x >= 0 else self.d - x for x in self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        chars = []
        for x in self.letters:
            if x == 0:
                chars.append("1")
            elif x > 0:
                chars.append(_ALPHABET[x - 1])
            else:
                chars.append(_ALPHABET[-x - 1].upper())
        return "".join(chars)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        """Concatenation (no reduction)."""
        return Word(self.letters + other.letters, max(self.d, other.d))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        return Word(self.letters * k, self.d)

    def inverse(self) -> "Word":
        return Word(inverse_letters(self.letters), self.d)

    def with_rank(self, d: int) -> "Word":
        return Word(self.letters, d)

    @property
    def is_reduced(self) -> bool:
        return is_reduced(self.letters)

    @property
    def is_identity(self) -> bool:
        return not reduce_letters(self.letters)


def as_word(w, d: int | None = None) -> Word:
    if isinstance(w, Word):
        return w if d is None or d == w.d else w.with_rank(max(d, w.d))
    if isinstance(w, str):
        return Word.parse(w, d)
    letters = tuple(w)
    return Word(letters, d if d is not None else max([abs(x) for x in letters] + [1]))


def reduce(w) -> Word:
    w = as_word(w)
    return Word(reduce_letters(w.letters), w.d)


def cyclic_reduce(v) -> Tuple[Word, Word]:
    """Return ``(conjugator, core)`` with ``v = conjugator core conjugator^{-1}``."""
    v = as_word(v)
    if not v.is_reduced:
        raise WordError(f"cyclic_reduce expects a reduced word, got {v}")
    conj, core = cyclic_reduce_letters(v.letters)
    return Word(conj, v.d), Word(core, v.d)


def power_decompose(v) -> Tuple[Word, int]:
    """Write a nonidentity reduced word uniquely as ``base**k`` with ``base`` a non-power."""
    v = as_word(v)
    if not v.is_reduced:
        raise WordError(f"power_decompose expects a reduced word, got {v}")
    base, k = power_decompose_letters(v.letters)
    return Word(base, v.d), k


def is_first_visit(w, v) -> bool:
    """True iff ``w`` reduces to ``v`` and no proper suffix of ``w`` does.

    Reading ``w`` right to left as a walk from e in the Cayley graph, this says
    the walk reaches ``v`` for the first time at its last step.
    """
    w, v = as_word(w), as_word(v)
    target = reduce_letters(v.letters)
    letters = w.letters
    if reduce_letters(letters) != target:
        return False
    # suffix products, built by prepending letters to a reduced stack
    suffix: list = []
    for x in reversed(letters[1:]):
        if x != 0:
            if suffix and suffix[-1] == -x:
                suffix.pop()
            else:
                suffix.append(x)
        if tuple(reversed(suffix)) == target:
            return False
    return True


def reduced_words(d: int, length: int) -> Iterator[Letters]:
    """All reduced words of exactly the given length, in lexicographic order."""
    alphabet = [i for i in range(1, d + 1)] + [-i for i in range(1, d + 1)]

    def extend(prefix: list) -> Iterator[Letters]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for x in alphabet:
            if prefix and prefix[-1] == -x:
                continue
            prefix.append(x)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def all_words(d: int, length: int, identity: bool = False) -> Iterator[Letters]:
    """All words (reduced or not) of the given length over the 2d letters."""
    from itertools import product

    alphabet = [i for i in range(1, d + 1)] + [-i for i in range(1, d + 1)]
    if identity:
        alphabet = [0] + alphabet
    return product(alphabet, repeat=length)


def canonical_cyclic_key(letters: Sequence[int]) -> Letters:
    """Canonical representative of the cyclic word class of ``letters``.

    Two words get the same key iff their cyclic cores agree up to rotation,
    inversion, permutation of generators and inversion of single generators.
    All of these preserve the law of ``tr w(S^N)`` for i.i.d. uniform
    permutations.
    """
    _, core = cyclic_reduce_letters(reduce_letters(letters))
    if not core:
        return ()
    best = None
    n = len(core)
    for seq in (core, inverse_letters(core)):
        for r in range(n):
            rot = seq[r:] + seq[:r]
            labels = {}
            out = []
            for x in rot:
                g = abs(x)
                if g not in labels:
                    labels[g] = (len(labels) + 1) * (1 if x > 0 else -1)
                lab = labels[g]
                out.append(lab if x > 0 else -lab)
            key = tuple(out)
            if best is None or key < best:
                best = key
    return best


def first_visit_splits(w, v1, v2) -> list:
    """Positions t (1-based) with w_1..w_{t-1} reducing to v1 and w_t..w_k first-visiting v2.

    When v1 v2 is reduced and both factors are nontrivial, a word reducing to
    v1 v2 has exactly one such position.
    """
    w = as_word(w)
    a = reduce_letters(as_word(v1).letters)
    b = reduce_letters(as_word(v2).letters)
    letters = w.letters
    out = []
    for t in range(1, len(letters) + 1):
        if reduce_letters(letters[: t - 1]) == a and is_first_visit(Word(letters[t - 1:], w.d), Word(b, w.d)):
            out.append(t)
    return out
