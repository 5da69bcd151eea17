#!/usr/bin/env python3
"""Regenerate the bundled synthetic alert fixture.

Deterministic (fixed seed): three attacker teams probe four victims over a
couple of hours; two high-severity objectives are reached (data exfiltration
and data manipulation, both over remoteware-cl). Bursts contain sub-second
repeats so the duplicate filter has work to do, and a few non-alert/corrupt
lines exercise the parse counters.
"""

from __future__ import annotations

import argparse
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

START = datetime(2018, 11, 3, 10, 0, 0, tzinfo=timezone.utc)

T1, T2, T3 = "10.0.254.10", "10.0.254.20", "10.0.254.30"
V1, V2, V3, V4 = "10.0.0.10", "10.0.0.20", "10.0.0.30", "10.0.0.40"

SIGS = {
    "scan": ("ET SCAN Nmap Scripting Engine User-Agent", "Attempted Information Leak"),
    "vuln": ("Nikto Web Scanner default UA detected", "Web Application Attack Prep"),
    "info": ("HTTP Directory Traversal attempt", "Access to a Potentially Vulnerable File"),
    "priv": ("Privilege Escalation attempt via setuid binary", "Attempted Privilege Gain"),
    "exec": ("Reverse Shell spawned from web process", "Potentially Bad Traffic"),
    "brute": ("SSH Brute Force login attempts", "Attempted Login with Suspicious Username"),
    "acct": ("User Account Created via useradd", "Potential Corporate Privacy Violation"),
    "exfil": ("Large outbound Exfiltration over remoteware channel", "Potential Data Leak"),
    "manip": ("Database Tamper detected on production table", "Potentially Bad Traffic"),
}

# (team, victim, action, dst_port, offset seconds from team start, burst size)
SCRIPT = [
    # team 1: recon on V1, two exfiltration attempts on V2 (second one shorter)
    (T1, V1, "scan", 22, 0.0, 18),
    (T1, V1, "vuln", 80, 400.0, 8),
    (T1, V2, "scan", 22, 800.0, 18),
    (T1, V2, "priv", 80, 1300.0, 8),
    (T1, V2, "exec", 6667, 1800.0, 6),
    (T1, V2, "exfil", 5653, 7200.0, 7),
    (T1, V2, "info", 80, 7600.0, 6),
    (T1, V2, "exfil", 5653, 8100.0, 6),
    # team 2: exfiltration on V2, data manipulation on V3
    (T2, V2, "scan", 22, 0.0, 16),
    (T2, V2, "brute", 22, 500.0, 12),
    (T2, V2, "exfil", 5653, 1100.0, 6),
    (T2, V3, "scan", 22, 1700.0, 16),
    (T2, V3, "acct", 6667, 2300.0, 6),
    (T2, V3, "manip", 5653, 2900.0, 6),
    # team 3: exfiltrates V2 twice (equally long paths), stops at privilege
    # escalation on V4
    (T3, V2, "scan", 22, 0.0, 16),
    (T3, V2, "vuln", 80, 500.0, 8),
    (T3, V2, "exfil", 5653, 1100.0, 6),
    (T3, V2, "info", 80, 1600.0, 5),
    (T3, V2, "vuln", 80, 2100.0, 5),
    (T3, V2, "exfil", 5653, 2600.0, 6),
    (T3, V4, "scan", 22, 3200.0, 16),
    (T3, V4, "priv", 445, 3800.0, 7),
]

TEAM_START = {T1: 0.0, T2: 600.0, T3: 1200.0}


def eve_record(ts: datetime, team: str, victim: str, port: int, action: str) -> str:
    signature, category = SIGS[action]
    return json.dumps(
        {
            "timestamp": ts.strftime("%Y-%m-%dT%H:%M:%S.%f+0000"),
            "event_type": "alert",
            "src_ip": team,
            "src_port": 51000,
            "dest_ip": victim,
            "dest_port": port,
            "proto": "TCP",
            "alert": {
                "action": "allowed",
                "signature": signature,
                "category": category,
                "severity": 2,
            },
        },
        sort_keys=True,
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "tests/fixtures/synthetic_alerts.jsonl",
    )
    args = parser.parse_args()

    rng = random.Random(2018)
    rows = []
    for team, victim, action, port, offset, burst in SCRIPT:
        t = TEAM_START[team] + offset
        for i in range(burst):
            # every third alert lands sub-second after the previous one, so
            # the t=1.0 duplicate filter drops it
            t += 0.4 if i % 3 == 2 else rng.uniform(2.0, 12.0)
            rows.append((START + timedelta(seconds=round(t, 2)), team, victim, port, action))
    rows.sort(key=lambda r: r[0])

    lines = [eve_record(*row) for row in rows]
    # two non-alert events and one corrupt line, skipped by the parser
    flow = json.dumps(
        {
            "timestamp": (START + timedelta(seconds=50)).strftime("%Y-%m-%dT%H:%M:%S.%f+0000"),
            "event_type": "flow",
            "src_ip": T1,
            "dest_ip": V1,
        },
        sort_keys=True,
    )
    stats_event = json.dumps(
        {
            "timestamp": (START + timedelta(seconds=2000)).strftime("%Y-%m-%dT%H:%M:%S.%f+0000"),
            "event_type": "stats",
        },
        sort_keys=True,
    )
    lines.insert(10, flow)
    lines.insert(60, stats_event)
    lines.insert(110, '{"event_type": "alert", "timestamp": "broken')

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} lines ({len(rows)} alerts) to {args.out}")


if __name__ == "__main__":
    main()
