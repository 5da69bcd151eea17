"""Alert ingestion: parse IDS alert logs, map alerts to attack stages and
targeted services, and suppress near-duplicate alerts.

Supported input formats:

* ``eve-json`` -- Suricata EVE, one JSON record per line; records with
  ``event_type == "alert"`` are consumed, everything else is counted as
  skipped.
* ``csv`` -- header ``timestamp,src_ip,dst_ip,dst_port,signature,category``.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from typing import IO, Iterable, Union

from .stages import AttackStage

DEFAULT_STAGE = AttackStage.SURFING
CATCH_ALL_PATTERN = "*"
UNKNOWN_SERVICE = "unknown"

_TZ_NO_COLON = re.compile(r"([+-]\d{2})(\d{2})$")


def parse_timestamp(value: str) -> datetime:
    """Parse an alert timestamp into a UTC-normalized datetime.

    Accepts ISO-8601 with microseconds, a ``Z`` suffix, or a ``+0000``-style
    offset without a colon (Suricata's default). Naive timestamps are assumed
    to be UTC.
    """
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    else:
        text = _TZ_NO_COLON.sub(r"\1:\2", text)
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class RawAlert:
    timestamp: datetime
    src_ip: str
    dst_ip: str
    dst_port: int
    signature: str
    category: str = ""


@dataclass(frozen=True)
class Alert:
    timestamp: datetime
    attacker: str
    victim: str
    stage: AttackStage
    service: str


@dataclass
class ParseStats:
    total: int = 0
    parsed: int = 0
    skipped: int = 0


@dataclass
class MappingConfig:
    """Ordered signature rules plus a port->service registry.

    Each rule is ``(pattern, stage)``; the first rule whose pattern occurs
    (case-insensitively) in the alert signature or category wins. The
    pattern ``*`` matches everything and acts as the mandatory catch-all.
    """

    signature_rules: list[tuple[str, AttackStage]] = field(default_factory=list)
    port_service: dict[int, str] = field(default_factory=dict)

    def stage_for(self, signature: str, category: str = "") -> AttackStage:
        haystack = (signature + "\n" + category).lower()
        for pattern, stage in self.signature_rules:
            if pattern == CATCH_ALL_PATTERN or pattern.lower() in haystack:
                return stage
        raise ValueError("mapping config has no catch-all rule")

    def service_for(self, port: int) -> str:
        return self.port_service.get(port, UNKNOWN_SERVICE)

    def has_catch_all(self) -> bool:
        return any(p == CATCH_ALL_PATTERN for p, _ in self.signature_rules)


def load_signature_rules(lines: Iterable[str]) -> list[tuple[str, AttackStage]]:
    """Read rules from ``PATTERN<TAB>STAGE_ACRONYM`` lines.

    Blank lines and ``#`` comments are ignored. A catch-all ``*`` rule
    mapping to SURFING is appended when the file does not provide one.
    """
    rules: list[tuple[str, AttackStage]] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            pattern, acronym = line.split("\t")
        except ValueError as exc:
            raise ValueError(f"rule line {lineno}: expected PATTERN<TAB>STAGE") from exc
        pattern = pattern.strip()
        if not pattern:
            raise ValueError(f"rule line {lineno}: empty pattern")
        rules.append((pattern, AttackStage(acronym.strip())))
    if not any(p == CATCH_ALL_PATTERN for p, _ in rules):
        rules.append((CATCH_ALL_PATTERN, DEFAULT_STAGE))
    return rules


def load_port_services(lines: Iterable[str]) -> dict[int, str]:
    """Read an IANA-format service registry (Service Name / Port Number columns).

    Port ranges (``6000-6063``) are expanded; rows without a port number or
    marked Unassigned are dropped. The first name registered for a port wins.
    """
    ports: dict[int, str] = {}
    for row in csv.DictReader(lines):
        name = (row.get("Service Name") or "").strip()
        port_field = (row.get("Port Number") or "").strip()
        description = (row.get("Description") or "").strip()
        if not name or not port_field or "unassigned" in description.lower():
            continue
        if "-" in port_field:
            low, high = (int(p) for p in port_field.split("-", 1))
        else:
            low = high = int(port_field)
        for port in range(low, high + 1):
            ports.setdefault(port, name)
    return ports


def default_mapping_config() -> MappingConfig:
    """Mapping config backed by the bundled rule file and service registry."""
    data = resources.files("alertgraphs.data")
    rules = load_signature_rules(
        data.joinpath("signature_rules.tsv").read_text(encoding="utf-8").splitlines()
    )
    ports = load_port_services(
        data.joinpath("service_names.csv").read_text(encoding="utf-8").splitlines()
    )
    return MappingConfig(signature_rules=rules, port_service=ports)


def _as_text_lines(source: Union[IO[bytes], IO[str], str, bytes]) -> Iterable[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        return io.StringIO(source)
    first = source.read(0)
    if isinstance(first, bytes):
        return io.TextIOWrapper(source, encoding="utf-8")
    return source


def _raw_from_eve(record: dict) -> RawAlert | None:
    if record.get("event_type") != "alert":
        return None
    alert = record["alert"]
    port = record.get("dest_port", 0)  # port-less protocols (ICMP) map to 0
    raw = RawAlert(
        timestamp=parse_timestamp(record["timestamp"]),
        src_ip=str(record["src_ip"]),
        dst_ip=str(record["dest_ip"]),
        dst_port=int(port),
        signature=str(alert["signature"]),
        category=str(alert.get("category", "")),
    )
    if not 0 <= raw.dst_port <= 65535:
        raise ValueError(f"dst_port out of range: {raw.dst_port}")
    return raw


def _raw_from_csv_row(row: dict) -> RawAlert:
    raw = RawAlert(
        timestamp=parse_timestamp(row["timestamp"]),
        src_ip=row["src_ip"].strip(),
        dst_ip=row["dst_ip"].strip(),
        dst_port=int(row["dst_port"]),
        signature=row["signature"],
        category=(row.get("category") or ""),
    )
    if not raw.src_ip or not raw.dst_ip:
        raise ValueError("missing address")
    if not 0 <= raw.dst_port <= 65535:
        raise ValueError(f"dst_port out of range: {raw.dst_port}")
    return raw


def parse_alerts(
    source: Union[IO[bytes], IO[str], str, bytes], format: str = "eve-json"
) -> tuple[list[RawAlert], ParseStats]:
    """Parse raw alerts from a byte/text stream.

    Returns alerts in input order plus counters. Malformed records are
    skipped and counted, never silently dropped; non-alert EVE events count
    as skipped as well. Blank lines are ignored entirely.
    """
    stats = ParseStats()
    alerts: list[RawAlert] = []
    lines = _as_text_lines(source)
    if format == "eve-json":
        for line in lines:
            if not line.strip():
                continue
            stats.total += 1
            try:
                raw = _raw_from_eve(json.loads(line))
            except (ValueError, KeyError, TypeError, AttributeError):
                raw = None
            if raw is None:
                stats.skipped += 1
            else:
                alerts.append(raw)
                stats.parsed += 1
    elif format == "csv":
        for row in csv.DictReader(lines):
            stats.total += 1
            try:
                raw = _raw_from_csv_row(row)
            except (ValueError, KeyError, TypeError, AttributeError):
                stats.skipped += 1
            else:
                alerts.append(raw)
                stats.parsed += 1
    else:
        raise ValueError(f"unknown alert format: {format!r}")
    return alerts, stats


def map_alert(raw: RawAlert, cfg: MappingConfig) -> Alert:
    """Assign the attack stage and targeted service to one raw alert."""
    return Alert(
        timestamp=raw.timestamp,
        attacker=raw.src_ip,
        victim=raw.dst_ip,
        stage=cfg.stage_for(raw.signature, raw.category),
        service=cfg.service_for(raw.dst_port),
    )


def filter_duplicates(alerts: list[Alert], t: float) -> list[Alert]:
    """Drop alerts repeating an identical (attacker, victim, stage, service)
    less than ``t`` seconds after the last *retained* alert of that key.

    Input must be sorted by timestamp ascending; order is preserved.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    last_kept: dict[tuple[str, str, AttackStage, str], datetime] = {}
    kept: list[Alert] = []
    prev_ts = None
    for alert in alerts:
        if prev_ts is not None and alert.timestamp < prev_ts:
            raise ValueError("alerts must be sorted by timestamp ascending")
        prev_ts = alert.timestamp
        key = (alert.attacker, alert.victim, alert.stage, alert.service)
        last = last_kept.get(key)
        if last is not None and (alert.timestamp - last).total_seconds() < t:
            continue
        last_kept[key] = alert.timestamp
        kept.append(alert)
    return kept
