"""Words in non-commuting letters and their cyclic normal form.

Letters are 0-based integers; ``()`` is the identity monomial.
"""

from __future__ import annotations

from typing import Tuple

Word = Tuple[int, ...]

EMPTY: Word = ()


def cyclic_min(w: Word) -> Word:
    """Lexicographically least rotation of ``w``."""
    if len(w) <= 1:
        return w
    return min(w[k:] + w[:k] for k in range(len(w)))


def reverse(w: Word) -> Word:
    return w[::-1]


def letter_name(i: int, n: int) -> str:
    # letters past the variable alphabet are formal directions
    if i < n:
        return f"X{i + 1}"
    return f"H{i - n + 1}"


def word_str(w: Word, n: int) -> str:
    if not w:
        return "1"
    return " ".join(letter_name(i, n) for i in w)
