"""Sequence-model quality: trace probabilities, perplexity, and a first-order
Markov-chain baseline over reversed sequences.

All models share the same add-one smoothing over alphabet-plus-termination,
applied at evaluation time only, so probabilities never hit zero.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from typing import Hashable, Sequence

from .automaton import _smoothed_log2

SymbolT = Hashable


class MarkovChain:
    """Bigram model over reversed sequences with start/end pseudo-states."""

    def __init__(self):
        self.start_counts: dict[SymbolT, int] = defaultdict(int)
        self.start_end = 0  # empty sequences
        self.start_total = 0
        self.bigram_counts: dict[SymbolT, dict[SymbolT, int]] = defaultdict(lambda: defaultdict(int))
        self.end_counts: dict[SymbolT, int] = defaultdict(int)
        self.context_totals: dict[SymbolT, int] = defaultdict(int)
        self.alphabet: tuple = ()

    def _observe(self, reversed_seq: Sequence[SymbolT]) -> None:
        self.start_total += 1
        if not reversed_seq:
            self.start_end += 1
            return
        self.start_counts[reversed_seq[0]] += 1
        for prev, cur in zip(reversed_seq, reversed_seq[1:]):
            self.bigram_counts[prev][cur] += 1
            self.context_totals[prev] += 1
        self.end_counts[reversed_seq[-1]] += 1
        self.context_totals[reversed_seq[-1]] += 1

    def log2_probability(self, seq: Sequence[SymbolT], smoothed: bool = True) -> float:
        n_alpha = len(self.alphabet)
        rev = list(reversed(seq))
        prev: SymbolT | None = None  # None = start pseudo-state
        lp = 0.0
        for sym in rev:
            if prev is None:
                count, total = self.start_counts.get(sym, 0), self.start_total
            else:
                count = self.bigram_counts.get(prev, {}).get(sym, 0)
                total = self.context_totals.get(prev, 0)
            lp += _smoothed_log2(count, total, n_alpha, smoothed)
            prev = sym
        if prev is None:
            count, total = self.start_end, self.start_total
        else:
            count, total = self.end_counts.get(prev, 0), self.context_totals.get(prev, 0)
        return lp + _smoothed_log2(count, total, n_alpha, smoothed)


def learn_markov_chain(sequences: Sequence[Sequence[SymbolT]]) -> MarkovChain:
    chain = MarkovChain()
    alphabet = set()
    for seq in sequences:
        chain._observe(list(reversed(seq)))
        alphabet.update(seq)
    chain.alphabet = tuple(sorted(alphabet))
    return chain


def sequence_probability(model, seq: Sequence[SymbolT], smoothed: bool = True) -> float:
    """Probability the model assigns to one trace (in (0, 1] when smoothed)."""
    return 2.0 ** model.log2_probability(seq, smoothed=smoothed)


def perplexity(model, sequences: Sequence[Sequence[SymbolT]], smoothed: bool = True) -> float:
    """2 raised to the negative mean log2 trace probability; lower fits better."""
    if not sequences:
        raise ValueError("perplexity requires at least one sequence")
    mean = sum(model.log2_probability(s, smoothed=smoothed) for s in sequences) / len(sequences)
    return 2.0 ** (-mean)


def split_sequences(
    sequences: Sequence[Sequence[SymbolT]], fraction: float, seed: int
) -> tuple[list, list]:
    """Seeded shuffle split; the first ``int(fraction * n)`` go to train."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    indices = list(range(len(sequences)))
    random.Random(seed).shuffle(indices)
    cut = int(fraction * len(sequences))
    train = [sequences[i] for i in indices[:cut]]
    test = [sequences[i] for i in indices[cut:]]
    return train, test
