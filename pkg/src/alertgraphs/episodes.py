"""Aggregate filtered alerts into attack episodes and order them into
per-(attacker, victim) sequences and attack-attempt sub-sequences.

An episode is a burst of same-stage alerts: alerts of one attack stage whose
consecutive gaps stay within the window ``w``. Sequences are cut into
sub-sequences wherever a low-severity episode directly follows a
high-severity one, marking the start of a new attack attempt.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping, NamedTuple

from .alerts import Alert
from .stages import AttackStage, Severity

Pair = tuple[str, str]  # (attacker, victim)


class Symbol(NamedTuple):
    """Automaton alphabet element: attack stage plus targeted service."""

    stage: AttackStage
    service: str


def render_symbol(symbol: Symbol) -> str:
    return f"{symbol.stage.value}|{symbol.service}"


def parse_symbol(text: str) -> Symbol:
    acronym, _, service = text.partition("|")
    return Symbol(AttackStage(acronym), service)


@dataclass(frozen=True)
class Episode:
    st: datetime
    et: datetime
    stage: AttackStage
    service: str
    alert_count: int
    attacker: str
    victim: str

    @property
    def severity(self) -> Severity:
        return self.stage.severity

    @property
    def symbol(self) -> Symbol:
        return Symbol(self.stage, self.service)


@dataclass
class EpisodeSequence:
    attacker: str
    victim: str
    episodes: list[Episode]


@dataclass
class EpisodeSubSequence:
    parent: Pair
    index: int
    episodes: list[Episode]


def _episode_order(episode: Episode):
    return (episode.st, episode.severity, episode.service, episode.stage.value)


def _mode_service(services: Iterable[str]) -> str:
    # ties broken by lexicographically smallest service
    counts = Counter(services)
    return min(counts, key=lambda s: (-counts[s], s))


def aggregate_episodes(alerts: list[Alert], w: float = 150.0) -> list[Episode]:
    """Group one (attacker, victim) pair's alerts into episodes.

    Per attack stage independently, alerts are split into maximal runs whose
    consecutive gaps are <= ``w`` seconds. Each run yields one episode with
    st/et the first/last timestamp and the run's most frequent service.
    ``w`` may be ``math.inf`` to force a single episode per stage.
    """
    if w <= 0:
        raise ValueError("w must be positive")
    if not alerts:
        return []
    pairs = {(a.attacker, a.victim) for a in alerts}
    if len(pairs) != 1:
        raise ValueError(f"alerts span multiple (attacker, victim) pairs: {sorted(pairs)}")
    attacker, victim = pairs.pop()

    by_stage: dict[AttackStage, list[Alert]] = defaultdict(list)
    prev_ts = None
    for alert in alerts:
        if prev_ts is not None and alert.timestamp < prev_ts:
            raise ValueError("alerts must be sorted by timestamp ascending")
        prev_ts = alert.timestamp
        by_stage[alert.stage].append(alert)

    episodes = []
    for stage, group in by_stage.items():
        run: list[Alert] = []
        for alert in group:
            if run and (alert.timestamp - run[-1].timestamp).total_seconds() > w:
                episodes.append(_make_episode(run, stage, attacker, victim))
                run = []
            run.append(alert)
        episodes.append(_make_episode(run, stage, attacker, victim))
    episodes.sort(key=_episode_order)
    return episodes


def _make_episode(run: list[Alert], stage: AttackStage, attacker: str, victim: str) -> Episode:
    return Episode(
        st=run[0].timestamp,
        et=run[-1].timestamp,
        stage=stage,
        service=_mode_service(a.service for a in run),
        alert_count=len(run),
        attacker=attacker,
        victim=victim,
    )


def build_sequences(episodes_by_pair: Mapping[Pair, list[Episode]]) -> list[EpisodeSequence]:
    """One time-sorted episode sequence per (attacker, victim) pair.

    Episodes tie-broken on equal start times by (severity ascending, service,
    stage acronym); pairs without episodes are dropped.
    """
    sequences = []
    for (attacker, victim), episodes in sorted(episodes_by_pair.items()):
        if not episodes:
            continue
        sequences.append(
            EpisodeSequence(
                attacker=attacker,
                victim=victim,
                episodes=sorted(episodes, key=_episode_order),
            )
        )
    return sequences


def partition_subsequences(es: EpisodeSequence) -> list[EpisodeSubSequence]:
    """Cut an episode sequence into attack attempts.

    A cut is placed exactly between episodes i and i+1 when episode i has
    High severity and episode i+1 has Low severity; concatenating the
    resulting slices reproduces the input sequence.
    """
    if not es.episodes:
        raise ValueError("episode sequence is empty")
    slices: list[list[Episode]] = [[es.episodes[0]]]
    for prev, cur in zip(es.episodes, es.episodes[1:]):
        if prev.severity == Severity.HIGH and cur.severity == Severity.LOW:
            slices.append([])
        slices[-1].append(cur)
    return [
        EpisodeSubSequence(parent=(es.attacker, es.victim), index=i, episodes=chunk)
        for i, chunk in enumerate(slices)
    ]


def to_symbols(ess: EpisodeSubSequence) -> list[Symbol]:
    """Project a sub-sequence onto its (stage, service) symbols, order preserved."""
    if not ess.episodes:
        raise ValueError("episode sub-sequence is empty")
    return [ep.symbol for ep in ess.episodes]


def render_episode_dump(episodes: Iterable[Episode]) -> str:
    """Tab-separated debug dump, one line per episode, sorted by
    (attacker, victim, st)."""
    lines = ["attacker\tvictim\tst\tet\tstage\tservice\talert_count"]
    ordered = sorted(episodes, key=lambda e: ((e.attacker, e.victim), _episode_order(e)))
    for ep in ordered:
        lines.append(
            "\t".join(
                [
                    ep.attacker,
                    ep.victim,
                    ep.st.isoformat(timespec="microseconds"),
                    ep.et.isoformat(timespec="microseconds"),
                    ep.stage.value,
                    ep.service,
                    str(ep.alert_count),
                ]
            )
        )
    return "\n".join(lines) + "\n"


INFINITE_WINDOW = math.inf
