"""Summary statistics over the pipeline outputs: workload reduction per team,
attacker ranking by unique vertex discovery, and repeat-attempt shortening.

A team here is an attacker identifier; teams discover a vertex when one of
their edges is incident to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

from .alerts import Alert
from .episodes import Episode, EpisodeSequence, EpisodeSubSequence
from .graphs import AttackGraph, VertexKey, simplicity
from .stages import Severity


@dataclass
class TeamStats:
    team: str
    raw_alerts: int
    filtered_alerts: int
    episodes: int
    sequence_count: int
    subsequence_count: int
    ag_count: int


@dataclass
class TeamScore:
    team: str
    severe_vertices: int
    medium_vertices: int
    severe_total: int
    medium_total: int
    score: float


def _round_half_up(value: float) -> int:
    import math

    return math.floor(value + 0.5)


def score_from_counts(
    severe_vertices: int, severe_total: int, medium_vertices: int, medium_total: int
) -> float:
    """Weighted discovery score: percentages are rounded to whole numbers
    first, then combined as (2*sev% + med%) / 3 to two decimals."""
    sev_pct = _round_half_up(100.0 * severe_vertices / severe_total)
    med_pct = _round_half_up(100.0 * medium_vertices / medium_total)
    combined = Decimal(2 * sev_pct + med_pct) / Decimal(3)
    return float(combined.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def workload_stats(
    raw_alerts: Iterable[Alert],
    filtered_alerts: Iterable[Alert],
    episodes: Iterable[Episode],
    sequences: Iterable[EpisodeSequence],
    subsequences: Iterable[EpisodeSubSequence],
    ags: Iterable[AttackGraph],
    teams: Iterable[str] = (),
) -> list[TeamStats]:
    """Per-team tallies of every pipeline stage; AGs count toward every team
    appearing in them, so AG counts may overlap across teams."""
    counters: dict[str, dict[str, int]] = {}

    def bucket(team: str) -> dict[str, int]:
        return counters.setdefault(
            team,
            {"raw": 0, "filtered": 0, "episodes": 0, "es": 0, "ess": 0, "ags": 0},
        )

    for team in teams:
        bucket(team)
    for alert in raw_alerts:
        bucket(alert.attacker)["raw"] += 1
    for alert in filtered_alerts:
        bucket(alert.attacker)["filtered"] += 1
    for episode in episodes:
        bucket(episode.attacker)["episodes"] += 1
    for es in sequences:
        bucket(es.attacker)["es"] += 1
    for ess in subsequences:
        bucket(ess.parent[0])["ess"] += 1
    for ag in ags:
        for team in ag.teams:
            bucket(team)["ags"] += 1

    return [
        TeamStats(
            team=team,
            raw_alerts=c["raw"],
            filtered_alerts=c["filtered"],
            episodes=c["episodes"],
            sequence_count=c["es"],
            subsequence_count=c["ess"],
            ag_count=c["ags"],
        )
        for team, c in sorted(counters.items())
    ]


def _discovery(ags: Sequence[AttackGraph]):
    severe: set[VertexKey] = set()
    medium: set[VertexKey] = set()
    by_team: dict[str, set[VertexKey]] = {}
    for ag in ags:
        for triple, vertex in ag.vertices.items():
            if vertex.severity == Severity.HIGH:
                severe.add(triple)
            elif vertex.severity == Severity.MED:
                medium.add(triple)
        for edge in ag.edges:
            team = by_team.setdefault(edge.team, set())
            team.add(edge.src)
            team.add(edge.dst)
    return severe, medium, by_team


def rank_teams(ags: Sequence[AttackGraph]) -> list[TeamScore]:
    """Teams ranked by the weighted fraction of unique severe/medium vertices
    they discovered, highest score first."""
    severe, medium, by_team = _discovery(ags)
    if not severe or not medium:
        raise ValueError("ranking requires both high- and medium-severity vertices")
    scores = []
    for team, found in sorted(by_team.items()):
        sev_found = len(found & severe)
        med_found = len(found & medium)
        scores.append(
            TeamScore(
                team=team,
                severe_vertices=sev_found,
                medium_vertices=med_found,
                severe_total=len(severe),
                medium_total=len(medium),
                score=score_from_counts(sev_found, len(severe), med_found, len(medium)),
            )
        )
    scores.sort(key=lambda s: (-s.score, s.team))
    return scores


def shorter_repeat_ratio(ags: Sequence[AttackGraph]) -> float | None:
    """Percentage of consecutive repeat attempts that got strictly shorter.

    Pairs are consecutive attempts by the same team against the same
    objective key; length is the attempt's vertex count. None when no team
    made a repeat attempt anywhere.
    """
    pairs = 0
    shorter = 0
    for ag in ags:
        by_team: dict[str, list] = {}
        for attempt in ag.attempts:
            by_team.setdefault(attempt.team, []).append(attempt)
        for attempts in by_team.values():
            attempts.sort(key=lambda a: a.index)
            for first, second in zip(attempts, attempts[1:]):
                pairs += 1
                if len(second.vertices) < len(first.vertices):
                    shorter += 1
    if pairs == 0:
        return None
    return 100.0 * shorter / pairs


def graph_summary(ags: Sequence[AttackGraph]) -> dict:
    """Aggregate AG statistics: count, mean vertex count, mean simplicity."""
    if not ags:
        return {"ag_count": 0, "mean_vertices": None, "mean_simplicity": None}
    simplicities = [s for s in (simplicity(ag) for ag in ags) if s is not None]
    return {
        "ag_count": len(ags),
        "mean_vertices": sum(len(ag.vertices) for ag in ags) / len(ags),
        "mean_simplicity": sum(simplicities) / len(simplicities) if simplicities else None,
    }
