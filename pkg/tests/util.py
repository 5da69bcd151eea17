"""Shared builders for the test suite."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from alertgraphs.alerts import Alert
from alertgraphs.episodes import Episode
from alertgraphs.stages import AttackStage, Severity

BASE = datetime(2018, 11, 3, 10, 0, 0, tzinfo=timezone.utc)

LOW_STAGES = [s for s in AttackStage if s.severity == Severity.LOW]
MED_STAGES = [s for s in AttackStage if s.severity == Severity.MED]
HIGH_STAGES = [s for s in AttackStage if s.severity == Severity.HIGH]


def ts(seconds: float) -> datetime:
    return BASE + timedelta(seconds=seconds)


def mk_alert(
    seconds: float,
    attacker: str = "10.0.254.1",
    victim: str = "10.0.0.1",
    stage: AttackStage = AttackStage.SERVICE_DISC,
    service: str = "ssh",
) -> Alert:
    return Alert(
        timestamp=ts(seconds),
        attacker=attacker,
        victim=victim,
        stage=stage,
        service=service,
    )


def mk_episode(
    st: float,
    et: float | None = None,
    stage: AttackStage = AttackStage.SERVICE_DISC,
    service: str = "ssh",
    attacker: str = "10.0.254.1",
    victim: str = "10.0.0.1",
    alert_count: int = 1,
) -> Episode:
    return Episode(
        st=ts(st),
        et=ts(st if et is None else et),
        stage=stage,
        service=service,
        alert_count=alert_count,
        attacker=attacker,
        victim=victim,
    )


def stage_of(letter: str) -> AttackStage:
    """Map a severity letter (L/M/H) to a representative stage."""
    return {
        "L": AttackStage.SERVICE_DISC,
        "M": AttackStage.PRIV_ESC,
        "H": AttackStage.DATA_EXFILTRATION,
    }[letter]
