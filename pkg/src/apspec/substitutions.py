"""Primitive two-letter substitutions and their fixed points.

Letters are encoded as small integers: ``0`` is ``a`` and ``1`` is ``b``.

    FIBONACCI        a -> ab,  b -> a
    THUE_MORSE       a -> ab,  b -> ba
    PERIOD_DOUBLING  a -> ab,  b -> aa
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InvalidParameter

RULES = {
    "FIBONACCI": ((0, 1), (0,)),
    "THUE_MORSE": ((0, 1), (1, 0)),
    "PERIOD_DOUBLING": ((0, 1), (0, 0)),
}


def rule(name):
    try:
        return RULES[name]
    except KeyError:
        raise InvalidParameter(f"unknown substitution {name!r}; "
                               f"expected one of {sorted(RULES)}") from None


def substitute(word, name):
    """Apply the substitution once to an integer word."""
    images = rule(name)
    word = np.asarray(word, dtype=np.uint8)
    lengths = np.array([len(im) for im in images])
    out = np.empty(int(lengths[word].sum()), dtype=np.uint8)
    starts = np.concatenate([[0], np.cumsum(lengths[word])[:-1]])
    for letter, image in enumerate(images):
        at = starts[word == letter]
        for j, sym in enumerate(image):
            out[at + j] = sym
    return out


def iterate(name, seed, times):
    word = np.asarray(seed, dtype=np.uint8)
    for _ in range(times):
        word = substitute(word, name)
    return word


@lru_cache(maxsize=16)
def _fixed_point(name, level):
    w = iterate(name, [0], level)
    w.flags.writeable = False
    return w


def fixed_point_word(name, min_length):
    """Prefix of the one-sided fixed point starting with ``a``.

    Returns a level-N supertile ``sigma^N(a)`` with N the smallest level
    whose length is at least ``min_length``. Every factor of it is a legal
    word of the substitution language.
    """
    level = 0
    length = 1
    images = rule(name)
    counts = np.array([1, 0])
    growth = np.array([[im.count(0) for im in images],
                       [im.count(1) for im in images]])
    while length < min_length:
        counts = growth @ counts
        length = int(counts.sum())
        level += 1
    return _fixed_point(name, level)


def two_sided_fibonacci(min_left, min_right):
    """Left and right halves of the two-sided Fibonacci fixed point ``b|a``.

    ``b|a`` is a legal two-letter word and ``sigma^2`` maps ``b`` to a word
    ending in ``b`` and ``a`` to a word starting with ``a``, so iterating
    ``sigma^2`` on both halves converges to a two-sided fixed point.
    The left half is returned in reading order (its last letter sits just
    left of the origin).
    """
    left = np.array([1], dtype=np.uint8)
    right = np.array([0], dtype=np.uint8)
    while len(left) < min_left or len(right) < min_right:
        left = iterate("FIBONACCI", left, 2)
        right = iterate("FIBONACCI", right, 2)
    return left, right


def legal_factors(name, length, sample_length=1 << 16):
    """All legal words of a given length, as a set of tuples."""
    w = fixed_point_word(name, sample_length)
    view = np.lib.stride_tricks.sliding_window_view(w, length)
    return {tuple(int(s) for s in row) for row in np.unique(view, axis=0)}


def is_legal(word, name):
    word = tuple(int(s) for s in word)
    return word in legal_factors(name, len(word))


def thue_morse_correlation(n_max):
    """Exact autocorrelation of the balanced Thue-Morse coding.

    ``eta(m)`` is the frequency average of ``s_k s_{k+m}`` with
    ``s_k = (-1)^{t_k}``. It satisfies ``eta(0) = 1``,
    ``eta(2m) = eta(m)`` and ``eta(2m+1) = -(eta(m) + eta(m+1)) / 2``,
    which forces ``eta(1) = -1/3``. Returns ``eta(0..n_max)``.
    """
    eta = np.array([1.0, -1.0 / 3.0])
    while len(eta) - 1 < n_max:
        nxt = np.empty(2 * len(eta) - 1)
        nxt[0::2] = eta
        nxt[1::2] = -(eta[:-1] + eta[1:]) / 2
        eta = nxt
    return eta[:n_max + 1].copy()
