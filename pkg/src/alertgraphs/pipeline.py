"""End-to-end orchestration: alerts in, attack graphs and reports out.

Stages run in a fixed order (ingest, episodes, learn, graphs, stats); each
stage owns a set of output files. A failing stage removes its partial
outputs and surfaces the stage name. Identical configuration and inputs
produce byte-identical artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

from . import alerts as alerts_mod
from . import analytics
from .alerts import Alert, MappingConfig, ParseStats
from .automaton import (
    AnnotatedSequence,
    LearnParams,
    SuffixPdfa,
    annotate_sequence,
    build_suffix_tree,
    learn_pdfa,
)
from .episodes import (
    EpisodeSequence,
    EpisodeSubSequence,
    aggregate_episodes,
    build_sequences,
    partition_subsequences,
    render_episode_dump,
    render_symbol,
    to_symbols,
)
from .evaluation import learn_markov_chain, perplexity, split_sequences
from .graphs import AttackGraph, ag_filename, emit_dot, extract_ag, find_objectives, render_index

STAGES = ("ingest", "episodes", "learn", "graphs", "stats")

EPISODE_DUMP = "episodes.tsv"
ATTEMPT_CORPUS = "attempt_corpus.tsv"
MODEL_TEXT = "automaton.txt"
MODEL_DOT = "automaton.dot"
INDEX_FILE = "attack_graph_index.tsv"
STATS_REPORT = "stats_report.tsv"
SUMMARY_JSON = "summary.json"
PERPLEXITY_REPORT = "perplexity_report.tsv"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    alerts: list[Path]
    out_dir: Path
    format: str = "eve-json"
    sig_map: Path | None = None
    port_map: Path | None = None
    t: float = 1.0
    w: float = 150.0
    learn: LearnParams = field(default_factory=LearnParams)
    split: float = 0.8
    seed: int = 0
    stop_after: str | None = None

    def validate(self) -> None:
        if self.t <= 0:
            raise ValueError("t must be > 0")
        if self.w <= 0:
            raise ValueError("w must be > 0")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must be in (0, 1)")
        if self.format not in ("eve-json", "csv"):
            raise ValueError(f"unknown format: {self.format!r}")
        if self.stop_after is not None and self.stop_after not in STAGES:
            raise ValueError(f"unknown stage: {self.stop_after!r}")


@dataclass
class PipelineResult:
    parse_stats: ParseStats
    mapped_alerts: list[Alert] = field(default_factory=list)
    filtered_alerts: list[Alert] = field(default_factory=list)
    sequences: list[EpisodeSequence] = field(default_factory=list)
    subsequences: list[EpisodeSubSequence] = field(default_factory=list)
    corpus: list = field(default_factory=list)
    model: SuffixPdfa | None = None
    annotated: list[AnnotatedSequence] = field(default_factory=list)
    ags: list[tuple[str, AttackGraph]] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)


class _StageWriter:
    """Tracks files written by the current stage so failures can clean up."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def write(self, name: str, content: str) -> Path:
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        self.written.append(path)
        return path

    def rollback(self) -> None:
        for path in self.written:
            path.unlink(missing_ok=True)


def _load_mapping(cfg: PipelineConfig) -> MappingConfig:
    mapping = alerts_mod.default_mapping_config()
    if cfg.sig_map is not None:
        with open(cfg.sig_map, encoding="utf-8") as fh:
            mapping.signature_rules = alerts_mod.load_signature_rules(fh)
    if cfg.port_map is not None:
        with open(cfg.port_map, encoding="utf-8") as fh:
            mapping.port_service = alerts_mod.load_port_services(fh)
    return mapping


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    cfg.validate()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    result = PipelineResult(parse_stats=ParseStats())

    stages = STAGES[: STAGES.index(cfg.stop_after) + 1] if cfg.stop_after else STAGES
    for stage in stages:
        writer = _StageWriter(cfg.out_dir)
        try:
            _STAGE_FUNCS[stage](cfg, result, writer)
        except Exception as exc:
            writer.rollback()
            raise StageError(stage, exc) from exc
        result.artifacts.extend(writer.written)
    return result


def _stage_ingest(cfg: PipelineConfig, result: PipelineResult, writer: _StageWriter) -> None:
    mapping = _load_mapping(cfg)
    mapped: list[Alert] = []
    for path in cfg.alerts:
        with open(path, "rb") as fh:
            raws, stats = alerts_mod.parse_alerts(fh, format=cfg.format)
        result.parse_stats.total += stats.total
        result.parse_stats.parsed += stats.parsed
        result.parse_stats.skipped += stats.skipped
        mapped.extend(alerts_mod.map_alert(raw, mapping) for raw in raws)
    mapped.sort(key=lambda a: a.timestamp)  # stable: ties keep input order
    result.mapped_alerts = mapped
    result.filtered_alerts = alerts_mod.filter_duplicates(mapped, cfg.t)


def _stage_episodes(cfg: PipelineConfig, result: PipelineResult, writer: _StageWriter) -> None:
    by_pair: dict[tuple[str, str], list[Alert]] = {}
    for alert in result.filtered_alerts:
        by_pair.setdefault((alert.attacker, alert.victim), []).append(alert)
    episodes_by_pair = {
        pair: aggregate_episodes(pair_alerts, cfg.w) for pair, pair_alerts in sorted(by_pair.items())
    }
    result.sequences = build_sequences(episodes_by_pair)
    result.subsequences = [
        ess for es in result.sequences for ess in partition_subsequences(es)
    ]
    result.corpus = [to_symbols(ess) for ess in result.subsequences]

    all_episodes = [ep for eps in episodes_by_pair.values() for ep in eps]
    writer.write(EPISODE_DUMP, render_episode_dump(all_episodes))
    corpus_lines = ["attacker\tvictim\tindex\tsymbols"]
    for ess, symbols in zip(result.subsequences, result.corpus):
        corpus_lines.append(
            "\t".join(
                [
                    ess.parent[0],
                    ess.parent[1],
                    str(ess.index),
                    " ".join(render_symbol(s) for s in symbols),
                ]
            )
        )
    writer.write(ATTEMPT_CORPUS, "\n".join(corpus_lines) + "\n")


def _stage_learn(cfg: PipelineConfig, result: PipelineResult, writer: _StageWriter) -> None:
    tree = build_suffix_tree(result.corpus)
    result.model = learn_pdfa(tree, cfg.learn)
    writer.write(MODEL_TEXT, result.model.to_text())
    writer.write(MODEL_DOT, result.model.to_dot())


def _stage_graphs(cfg: PipelineConfig, result: PipelineResult, writer: _StageWriter) -> None:
    model = result.model
    result.annotated = [annotate_sequence(es, model) for es in result.sequences]
    sink_ids = model.sink_ids()
    entries = []
    for key in find_objectives(result.annotated):
        ag = extract_ag(key, result.annotated, sink_ids)
        filename = ag_filename(key)
        writer.write(filename, emit_dot(ag))
        entries.append((filename, ag))
    result.ags = sorted(entries)
    writer.write(INDEX_FILE, render_index(result.ags))


def _stage_stats(cfg: PipelineConfig, result: PipelineResult, writer: _StageWriter) -> None:
    ags = [ag for _, ag in result.ags]
    all_episodes = [ep for es in result.sequences for ep in es.episodes]
    team_stats = analytics.workload_stats(
        result.mapped_alerts,
        result.filtered_alerts,
        all_episodes,
        result.sequences,
        result.subsequences,
        ags,
    )
    try:
        scores = analytics.rank_teams(ags) if ags else []
        ranking_note = None
    except ValueError as exc:
        scores = []
        ranking_note = str(exc)
    repeat = analytics.shorter_repeat_ratio(ags)
    summary = analytics.graph_summary(ags)

    writer.write(STATS_REPORT, _render_stats(team_stats, scores, ranking_note, repeat, summary))
    writer.write(SUMMARY_JSON, _render_summary_json(team_stats, scores, repeat, summary))
    writer.write(PERPLEXITY_REPORT, _render_perplexity(cfg, result.corpus))


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "episodes": _stage_episodes,
    "learn": _stage_learn,
    "graphs": _stage_graphs,
    "stats": _stage_stats,
}


def _fmt(value, spec: str = ".4f") -> str:
    return "NA" if value is None else format(value, spec)


def _render_stats(team_stats, scores, ranking_note, repeat, summary) -> str:
    lines = [
        "# per-team volume funnel (teams are attacker identifiers)",
        "team\traw_alerts\tfiltered_alerts\tepisodes\tsequences\tattempts\tgraphs",
    ]
    for ts in team_stats:
        lines.append(
            f"{ts.team}\t{ts.raw_alerts}\t{ts.filtered_alerts}\t{ts.episodes}"
            f"\t{ts.sequence_count}\t{ts.subsequence_count}\t{ts.ag_count}"
        )
    lines.append("# attacker ranking: score = (2*sev% + 1*med%) / 3, percentages rounded half-up")
    if ranking_note:
        lines.append(f"# ranking unavailable: {ranking_note}")
    lines.append(
        "team\tsevere_vertices\tsevere_total\tsevere_pct\tmedium_vertices"
        "\tmedium_total\tmedium_pct\tscore"
    )
    for sc in scores:
        sev_pct = analytics._round_half_up(100.0 * sc.severe_vertices / sc.severe_total)
        med_pct = analytics._round_half_up(100.0 * sc.medium_vertices / sc.medium_total)
        lines.append(
            f"{sc.team}\t{sc.severe_vertices}\t{sc.severe_total}\t{sev_pct}"
            f"\t{sc.medium_vertices}\t{sc.medium_total}\t{med_pct}\t{sc.score:.2f}"
        )
    lines.append("# repeat attempts: consecutive same-team attempt pairs at one objective;")
    lines.append("# counted as shorter when the later path has strictly fewer vertices")
    lines.append(f"shorter_repeat_pct\t{'absent' if repeat is None else format(repeat, '.1f')}")
    lines.append("# attack graph summary")
    lines.append(f"ag_count\t{summary['ag_count']}")
    lines.append(f"mean_vertices\t{_fmt(summary['mean_vertices'])}")
    lines.append(f"mean_simplicity\t{_fmt(summary['mean_simplicity'])}")
    return "\n".join(lines) + "\n"


def _render_summary_json(team_stats, scores, repeat, summary) -> str:
    payload = {
        "workload": [vars(ts) for ts in team_stats],
        "ranking": [vars(sc) for sc in scores],
        "shorter_repeat_pct": repeat,
        "graphs": summary,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _render_perplexity(cfg: PipelineConfig, corpus: Sequence) -> str:
    n = len(corpus)
    n_train = int(cfg.split * n)
    if n_train == 0 or n_train == n:
        return (
            f"# corpus of {n} sequences is too small for a "
            f"{cfg.split:.2f} split; perplexity skipped\n"
            "model\ttrain_perplexity\ttest_perplexity\n"
        )
    train, test = split_sequences(corpus, cfg.split, cfg.seed)
    tree = build_suffix_tree(train)
    chain = learn_markov_chain(train)
    pdfa = learn_pdfa(tree, cfg.learn)
    lines = [
        f"# {cfg.split:.2f} split of the attack-attempt symbol corpus, "
        f"seed {cfg.seed}: {len(train)} train / {len(test)} test",
        "model\ttrain_perplexity\ttest_perplexity",
    ]
    for name, model in (("suffix_tree", tree), ("markov_chain", chain), ("pdfa", pdfa)):
        lines.append(
            f"{name}\t{perplexity(model, train):.4f}\t{perplexity(model, test):.4f}"
        )
    return "\n".join(lines) + "\n"
