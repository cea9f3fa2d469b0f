"""
评测流水线编排 - 规格推断评测框架的阶段入口

每个阶段读取上游阶段落盘的产物, 写入 <output>/<stage>/ 目录:

    ingest/     corpus/ (清单 + 源文件)
    transform/  diverse/, diverse_n/, applicability.csv, naturalness.csv
    mutate/     mutants/<parent>/<mutant>.java, mutants.csv
    generate/   specs/<id>.java, transcripts/<id>.json.zst, extraction.csv
    verify/     outcomes.jsonl, outcomes_<target>.jsonl, completeness.jsonl, diagnostics/<id>.json
    score/      metrics.json, metrics.csv
    triage/     atomic_errors.csv, distribution.csv
    repair/     traces/<id>.json, transcripts/, outcomes.jsonl, summary.json
    report/     *.csv, *.txt, summary.txt

每个阶段另写 provenance.json (输入哈希、配置哈希、版本) 和 timestamps.json;
时间戳只出现在 timestamps.json 中, 相同输入重跑时其余文件逐字节相同。
"""

import os
import csv
import io
import shutil
import logging
from contextlib import contextmanager
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from core.config import HARNESS_VERSION, PERFORMANCE_CONFIG, RunConfig
from core.exceptions import ConfigError, HarnessError, StageError
from core.utils import (
    SafeFileHandler,
    ensure_directory,
    hash_file,
    hash_tree,
    read_source,
    timing_decorator,
)
from astcore.annotations import SpecifiedProgram, strip_annotations
from corpus import Corpus, ProgramRecord, load_corpus, save_corpus
from transforms import (
    NgramScorer,
    export_applicability,
    export_naturalness,
    generate_variants,
    natural_corpus,
    score_variants,
    select_natural,
)
from mutation import completeness_inputs, export_mutants, generate_mutants, load_mutants, suppress_equivalents
from verifier import (
    OutcomeKind,
    VerificationOutcome,
    VerifierBackend,
    VerifierConfig,
    create_backend,
    verify_many,
)
from evaluation import (
    FailureCategory,
    LogEntry,
    MetricReport,
    OutcomeLog,
    PatternTable,
    build_report,
    distribution,
    percent,
    triage_outcome,
    write_report,
)
from generation import (
    DEFAULT_DEMONSTRATIONS,
    PromptStyle,
    RepairTerminal,
    RepairTrace,
    TranscriptStore,
    create_client,
    generate_many,
    load_demonstrations,
    repair_many,
)
from database import ResultArchive

logger = logging.getLogger(__name__)

STAGES = ("ingest", "transform", "mutate", "generate", "verify", "score", "triage", "repair", "report")

# 生成目标 -> 语料目录 (相对输出目录)
TARGET_CORPORA = {
    "base": os.path.join("ingest", "corpus"),
    "diverse": os.path.join("transform", "diverse"),
    "diverse_n": os.path.join("transform", "diverse_n"),
}

EXTRACTION_FIELDS = ["record_id", "target", "status", "reason", "detail", "tokens"]


def _csv(fieldnames: Sequence[str], rows: Sequence[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def _read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def _input_hashes(path: str) -> Dict[str, str]:
    """输入产物的哈希; 上游的 timestamps.json 不参与"""
    if os.path.isfile(path):
        return {os.path.basename(path): hash_file(path)}
    return {rel: h for rel, h in hash_tree(path).items() if not rel.endswith("timestamps.json")}


def final_kind(trace: RepairTrace) -> OutcomeKind:
    """修复后的最终结果"""
    if trace.terminal == RepairTerminal.SUCCESS:
        return OutcomeKind.SUCCESS
    if trace.fallback is not None and trace.fallback.program is not None:
        return OutcomeKind.SUCCESS
    return trace.iterations[-1].outcome.kind


class SpecHarness:
    """评测流水线主类, 每个公开方法对应一个命令行子命令"""

    def __init__(self, config: RunConfig):
        """
        Args:
            config: 已校验的运行配置
        """
        self.config = config
        self.output_dir = os.path.abspath(config.output_dir)
        ensure_directory(self.output_dir)
        self._archive: Optional[ResultArchive] = None
        logger.info(f"Harness output directory: {self.output_dir} (config {config.config_hash()})")

    # ---- 公共工具 ----

    def stage_dir(self, stage: str) -> str:
        return os.path.join(self.output_dir, stage)

    def path(self, *parts: str) -> str:
        return os.path.join(self.output_dir, *parts)

    @property
    def archive(self) -> Optional[ResultArchive]:
        """验证结果归档, 首次使用时连接"""
        if not self.config.archive_enabled:
            return None
        if self._archive is None:
            url = self.config.database_url or f"sqlite:///{self.path('results.sqlite')}"
            self._archive = ResultArchive(url, cache_size=PERFORMANCE_CONFIG["cache_size"])
        return self._archive

    def close(self) -> None:
        if self._archive is not None:
            self._archive.close()
            self._archive = None

    def _require(self, path: str, stage: str) -> str:
        if not os.path.exists(path):
            raise StageError(
                f"missing upstream artifact {path}; run `{stage}` first", path=path, stage=stage
            )
        return path

    @contextmanager
    def _stage(self, name: str, inputs: Dict[str, str]) -> Iterator[str]:
        """
        阶段执行上下文: 清空阶段目录, 成功后写来源记录和时间戳

        Args:
            name: 阶段名
            inputs: 输入标签 -> 文件或目录
        """
        directory = self.stage_dir(name)
        if os.path.isdir(directory):
            shutil.rmtree(directory)
        ensure_directory(directory)
        started = datetime.now(timezone.utc)
        logger.info(f"Stage {name} started")
        try:
            yield directory
        except HarnessError as e:
            logger.error(f"Stage {name} failed: {e.code}: {e.message}")
            raise
        except Exception as e:
            logger.exception(f"Stage {name} failed unexpectedly: {e}")
            raise

        provenance = {
            "stage": name,
            "version": HARNESS_VERSION,
            "config_hash": self.config.config_hash(),
            "inputs": {label: _input_hashes(p) for label, p in sorted(inputs.items()) if os.path.exists(p)},
        }
        SafeFileHandler.write_json(os.path.join(directory, "provenance.json"), provenance)
        finished = datetime.now(timezone.utc)
        SafeFileHandler.write_json(
            os.path.join(directory, "timestamps.json"),
            {
                "started": started.isoformat(),
                "finished": finished.isoformat(),
                "seconds": round((finished - started).total_seconds(), 3),
            },
        )
        logger.info(f"Stage {name} finished")

    def _targets(self) -> List[str]:
        targets = list(dict.fromkeys(self.config.targets or ["base"]))
        unknown = [t for t in targets if t not in TARGET_CORPORA]
        if unknown:
            raise ConfigError(f"unknown generation targets: {', '.join(unknown)}", field="targets")
        return targets

    def _load_target(self, target: str) -> Corpus:
        stage = "ingest" if target == "base" else "transform"
        path = self._require(self.path(TARGET_CORPORA[target], "manifest.json"), stage)
        return load_corpus(os.path.dirname(path), strict=True)

    def _base_corpus(self) -> Corpus:
        return self._load_target("base")

    def _style(self) -> PromptStyle:
        try:
            return PromptStyle(self.config.prompt_style)
        except ValueError:
            raise ConfigError(f"unknown prompt style: {self.config.prompt_style}", field="prompt_style")

    def _demonstrations(self, style: PromptStyle):
        if not style.needs_demos:
            return []
        return load_demonstrations(self.config.demos_path or DEFAULT_DEMONSTRATIONS)

    def _backend(self) -> VerifierBackend:
        return create_backend(
            self.config.verifier_backend,
            self.config.replay_store,
            self.config.stub_rules,
            config=self._verifier_config(),
        )

    def _verifier_config(self) -> VerifierConfig:
        return VerifierConfig.from_dict(self.config.verifier)

    def _spec_path(self, record_id: str) -> str:
        return self.path("generate", "specs", f"{record_id}.java")

    def _load_spec(self, record_id: str) -> SpecifiedProgram:
        source = read_source(self._spec_path(record_id))
        _, index = strip_annotations(source)
        return SpecifiedProgram(source, index, record_id)

    def _extractions(self) -> Dict[str, Dict[str, str]]:
        path = self._require(self.path("generate", "extraction.csv"), "generate")
        return {row["record_id"]: row for row in _read_csv(path)}

    @property
    def label(self) -> str:
        return f"{self.config.model_label}/{self.config.prompt_style}"

    # ---- 阶段 ----

    @timing_decorator
    def ingest(self) -> Corpus:
        """加载并校验语料, 写入规范化副本"""
        if not self.config.corpus_path:
            raise ConfigError("corpus_path is required for ingest", field="corpus_path")
        with self._stage("ingest", {"corpus": self.config.corpus_path}) as directory:
            corpus = load_corpus(self.config.corpus_path, strict=not self.config.lenient)
            save_corpus(corpus, os.path.join(directory, "corpus"))
        return corpus

    @timing_decorator
    def transform(self) -> Tuple[Corpus, Corpus]:
        """构建 Diverse 与 Diverse-N 变体语料"""
        corpus_dir = self._require(self.path(TARGET_CORPORA["base"]), "ingest")
        with self._stage("transform", {"corpus": corpus_dir}) as directory:
            corpus = self._base_corpus()
            diverse, matrix = generate_variants(
                corpus, self.config.transforms, workers=self.config.concurrency
            )
            scorer = NgramScorer(self.config.ngram_order).train(r.bare_source for r in corpus.records)
            selected = select_natural(
                score_variants(corpus, diverse, scorer), self.config.keep_ratio, self.config.min_variants
            )
            diverse_n = natural_corpus(diverse, selected)

            parents = [r.id for r in corpus.records]
            save_corpus(diverse, os.path.join(directory, "diverse"), parents)
            save_corpus(diverse_n, os.path.join(directory, "diverse_n"), parents)
            export_applicability(matrix, os.path.join(directory, "applicability.csv"))
            export_naturalness(selected, os.path.join(directory, "naturalness.csv"))
        return diverse, diverse_n

    @timing_decorator
    def mutate(self) -> int:
        """为每个基础程序生成非等价变异体"""
        corpus_dir = self._require(self.path(TARGET_CORPORA["base"]), "ingest")
        with self._stage("mutate", {"corpus": corpus_dir}) as directory:
            corpus = self._base_corpus()
            sets = [
                suppress_equivalents(generate_mutants(r.bare_source, self.config.operators, r.id))
                for r in corpus.records
            ]
            written = export_mutants(
                sets, os.path.join(directory, "mutants"), os.path.join(directory, "mutants.csv")
            )
            kept = sum(len(s) for s in sets)
            logger.info(f"Kept {kept} non-equivalent mutants of {written} for {len(sets)} programs")
        return kept

    @timing_decorator
    def generate(self) -> int:
        """对每个目标语料生成规格, 返回有效规格数"""
        style = self._style()
        targets = self._targets()
        inputs = {t: self._require(self.path(TARGET_CORPORA[t]), "ingest" if t == "base" else "transform") for t in targets}
        if style.needs_demos:
            inputs["demos"] = self.config.demos_path or DEFAULT_DEMONSTRATIONS
        if self.config.model_script:
            inputs["model_script"] = self.config.model_script

        with self._stage("generate", inputs) as directory:
            demos = self._demonstrations(style)
            client = create_client(self.config.model_backend, self.config.model, self.config.model_script)
            transcripts = TranscriptStore(os.path.join(directory, "transcripts"))
            rows = []
            valid = 0
            for target in targets:
                corpus = self._load_target(target)
                results = generate_many(corpus.records, style, client, demos, self.config.concurrency)
                for result in results:
                    transcripts.save(result.record_id, result.transcript())
                    if result.extraction.ok:
                        SafeFileHandler.atomic_write(
                            self._spec_path(result.record_id), result.extraction.program.source
                        )
                        valid += 1
                    row = result.extraction.to_row(result.record_id)
                    row.update(target=target, tokens=result.completion.total_tokens)
                    rows.append(row)
            SafeFileHandler.atomic_write(os.path.join(directory, "extraction.csv"), _csv(EXTRACTION_FIELDS, rows))
            logger.info(f"Extracted {valid} specifications from {len(rows)} responses")
        return valid

    def _verify_target(
        self,
        target: str,
        extractions: Dict[str, Dict[str, str]],
        config: VerifierConfig,
        backend: VerifierBackend,
        directory: str,
    ) -> OutcomeLog:
        corpus = self._load_target(target)
        outcomes: Dict[str, VerificationOutcome] = {}
        programs: List[SpecifiedProgram] = []
        for record in corpus.records:
            row = extractions.get(record.id)
            if row is None:
                raise StageError(f"no generation result for {record.id}", record_id=record.id, stage="generate")
            if row["status"] == "ok":
                programs.append(self._load_spec(record.id))
            else:
                outcomes[record.id] = VerificationOutcome.invalid(f"{row['reason']}: {row['detail']}")

        verified = verify_many(
            programs, config, backend, self.config.concurrency, self.archive, f"Verifying {target}"
        )
        for program, outcome in zip(programs, verified):
            outcomes[program.base_id] = outcome

        log = OutcomeLog()
        for record in corpus.records:
            outcome = outcomes[record.id]
            tokens = extractions[record.id].get("tokens")
            log.append(
                LogEntry(
                    record.id,
                    outcome.kind,
                    str(record.origin),
                    outcome.wall_time,
                    int(tokens) if tokens else None,
                )
            )
            SafeFileHandler.write_json(
                os.path.join(directory, "diagnostics", f"{record.id}.json"),
                {"record_id": record.id, "target": target, "outcome": outcome.to_dict()},
            )
        return log

    def _completeness(
        self,
        base_log: OutcomeLog,
        config: VerifierConfig,
        backend: VerifierBackend,
        directory: str,
    ) -> int:
        """把基础规格嵌入变异体并验证, 写出 completeness.jsonl"""
        mutate_dir = self.stage_dir("mutate")
        ledger = os.path.join(mutate_dir, "mutants.csv")
        if not os.path.exists(ledger):
            logger.info("No mutants found, completeness skipped")
            return 0
        corpus = self._base_corpus()
        kinds = {e.record_id: e.kind for e in base_log}
        parents = {
            r.id: r.bare_source
            for r in corpus.records
            if os.path.exists(self._spec_path(r.id))
            and (self.config.cr_over_all or kinds.get(r.id) == OutcomeKind.SUCCESS)
        }
        pending = []
        for mutant_set in load_mutants(os.path.join(mutate_dir, "mutants"), ledger, parents):
            try:
                pairs = completeness_inputs(self._load_spec(mutant_set.parent_id), mutant_set)
            except (ValueError, HarnessError) as e:
                logger.warning(f"Completeness skipped for {mutant_set.parent_id}: {e}")
                continue
            pending.extend((mutant_set.parent_id, mutant, program) for mutant, program in pairs)

        outcomes = verify_many(
            [p for _, _, p in pending], config, backend, self.config.concurrency, self.archive, "Verifying mutants"
        )
        rows = [
            {"spec_id": spec_id, "mutant_id": mutant.id, "kind": outcome.kind.value}
            for (spec_id, mutant, _), outcome in zip(pending, outcomes)
        ]
        SafeFileHandler.write_jsonl(os.path.join(directory, "completeness.jsonl"), rows)
        return len(rows)

    @timing_decorator
    def verify(self) -> Dict[str, OutcomeLog]:
        """验证生成的规格 (及其在变异体上的完备性), 返回 目标 -> 结果日志"""
        generate_dir = self._require(self.stage_dir("generate"), "generate")
        inputs = {"generate": generate_dir}
        if os.path.isdir(self.stage_dir("mutate")):
            inputs["mutate"] = self.stage_dir("mutate")
        if self.config.replay_store:
            inputs["replay_store"] = self.config.replay_store
        if self.config.stub_rules:
            inputs["stub_rules"] = self.config.stub_rules

        with self._stage("verify", inputs) as directory:
            config = self._verifier_config()
            backend = self._backend()
            extractions = self._extractions()
            logs: Dict[str, OutcomeLog] = {}
            for target in self._targets():
                log = self._verify_target(target, extractions, config, backend, directory)
                name = "outcomes.jsonl" if target == "base" else f"outcomes_{target}.jsonl"
                log.write(os.path.join(directory, name))
                logs[target] = log
            if "base" in logs:
                self._completeness(logs["base"], config, backend, directory)
        return logs

    def _variant_log(self) -> Tuple[Optional[OutcomeLog], Optional[Corpus]]:
        """优先使用 Diverse-N 的结果, 其次 Diverse"""
        for target in ("diverse_n", "diverse"):
            path = self.path("verify", f"outcomes_{target}.jsonl")
            if os.path.exists(path):
                return OutcomeLog.read(path), self._load_target(target)
        return None, None

    def _completeness_map(self) -> Dict[str, List[OutcomeKind]]:
        path = self.path("verify", "completeness.jsonl")
        if not os.path.exists(path):
            return {}
        mapping: Dict[str, List[OutcomeKind]] = {}
        for row in SafeFileHandler.read_jsonl(path):
            mapping.setdefault(row["spec_id"], []).append(OutcomeKind(row["kind"]))
        return mapping

    def _report_for(self, label: str, base_log: OutcomeLog) -> MetricReport:
        variant_log, variant_corpus = self._variant_log()
        return build_report(
            label,
            base_log,
            self._base_corpus(),
            self._completeness_map(),
            variant_log,
            variant_corpus,
            self.config.cr_over_all,
        )

    @timing_decorator
    def score(self) -> MetricReport:
        """计算 SR/FR/CR/FlR 等指标"""
        outcomes = self._require(self.path("verify", "outcomes.jsonl"), "verify")
        with self._stage("score", {"verify": self.stage_dir("verify")}) as directory:
            report = self._report_for(self.label, OutcomeLog.read(outcomes))
            data = report.to_dict()
            SafeFileHandler.write_json(os.path.join(directory, "metrics.json"), data)
            rows = []
            for name in ("sr", "fr", "unknown", "cr", "flr", "diverse_sr", "diverse_fr",
                         "diverse_sr_weighted", "diverse_fr_weighted"):
                value = getattr(report, name)
                rows.append(
                    {
                        "metric": name,
                        "exact": f"{value.numerator}/{value.denominator}" if value is not None else "",
                        "percent": percent(value),
                    }
                )
            SafeFileHandler.atomic_write(
                os.path.join(directory, "metrics.csv"), _csv(["metric", "exact", "percent"], rows)
            )
        return report

    @timing_decorator
    def triage(self) -> List[Tuple[FailureCategory, int]]:
        """对基础语料上的失败做原子错误拆分与分类"""
        diagnostics_dir = self._require(self.path("verify", "diagnostics"), "verify")
        inputs = {"diagnostics": diagnostics_dir}
        if self.config.pattern_table:
            inputs["pattern_table"] = self.config.pattern_table
        with self._stage("triage", inputs) as directory:
            patterns = PatternTable.load(self.config.pattern_table or None)
            errors = []
            rows = []
            for name in sorted(os.listdir(diagnostics_dir)):
                data = SafeFileHandler.read_json(os.path.join(diagnostics_dir, name))
                if data is None or data.get("target") != "base":
                    continue
                outcome = VerificationOutcome.from_dict(data["outcome"])
                atoms = triage_outcome(outcome, patterns)
                errors.extend(atoms)
                rows.extend(a.to_row(data["record_id"]) for a in atoms)
            SafeFileHandler.atomic_write(
                os.path.join(directory, "atomic_errors.csv"),
                _csv(["record_id", "file", "line", "category", "matched_pattern", "message"], rows),
            )
            ranked = distribution(errors, self.config.top_k) if errors else []
            SafeFileHandler.atomic_write(
                os.path.join(directory, "distribution.csv"),
                _csv(
                    ["category", "count", "share"],
                    [
                        {"category": str(c), "count": n, "share": percent(Fraction(n, len(errors)))}
                        for c, n in ranked
                    ],
                ),
            )
            logger.info(f"Triaged {len(errors)} atomic errors into {len(ranked)} categories")
        return ranked

    @timing_decorator
    def repair(self) -> List[RepairTrace]:
        """对基础验证未成功的记录运行自修复循环"""
        outcomes = self._require(self.path("verify", "outcomes.jsonl"), "verify")
        style = self._style()
        inputs = {"outcomes": outcomes}
        if self.config.model_script:
            inputs["model_script"] = self.config.model_script
        with self._stage("repair", inputs) as directory:
            base_log = OutcomeLog.read(outcomes)
            corpus = self._base_corpus()
            failing = {e.record_id for e in base_log if e.kind != OutcomeKind.SUCCESS}
            records: List[ProgramRecord] = [r for r in corpus.records if r.id in failing]

            client = create_client(self.config.model_backend, self.config.model, self.config.model_script)
            transcripts = TranscriptStore(os.path.join(directory, "transcripts"))
            try:
                traces = repair_many(
                    records,
                    workers=self.config.concurrency,
                    client=client,
                    config=self._verifier_config(),
                    backend=self._backend(),
                    patterns=PatternTable.load(self.config.pattern_table or None),
                    max_iters=self.config.max_repair_iters,
                    style=style,
                    demos=self._demonstrations(style),
                    mutation_fallback=self.config.mutation_fallback,
                    mutation_budget=self.config.mutation_budget,
                    archive=self.archive,
                )
            except HarnessError as e:
                partial = getattr(e, "partial_trace", None)
                if partial is not None:
                    SafeFileHandler.write_json(
                        os.path.join(directory, "traces", f"{partial.record_id}.json"), partial.to_dict()
                    )
                raise

            repaired = {}
            for trace in traces:
                SafeFileHandler.write_json(os.path.join(directory, "traces", f"{trace.record_id}.json"), trace.to_dict())
                transcripts.save(trace.record_id, trace.transcript())
                repaired[trace.record_id] = trace

            log = OutcomeLog()
            for entry in base_log:
                trace = repaired.get(entry.record_id)
                if trace is None:
                    log.append(entry)
                    continue
                wall_time = round(entry.wall_time + sum(i.outcome.wall_time for i in trace.iterations), 6)
                log.append(LogEntry(entry.record_id, final_kind(trace), entry.origin, wall_time, trace.tokens))
            log.write(os.path.join(directory, "outcomes.jsonl"))

            by_iteration: Dict[str, int] = {}
            for trace in traces:
                if trace.success_iteration is not None:
                    key = str(trace.success_iteration)
                    by_iteration[key] = by_iteration.get(key, 0) + 1
            summary = {
                "attempted": len(traces),
                "repaired": sum(1 for t in traces if final_kind(t) == OutcomeKind.SUCCESS),
                "by_terminal": {
                    t.value: sum(1 for tr in traces if tr.terminal == t) for t in RepairTerminal
                },
                "by_iteration": dict(sorted(by_iteration.items(), key=lambda kv: int(kv[0]))),
                "mutation_fallback": sum(
                    1 for t in traces if t.fallback is not None and t.fallback.program is not None
                ),
            }
            SafeFileHandler.write_json(os.path.join(directory, "summary.json"), summary)
            logger.info(f"Repaired {summary['repaired']} of {summary['attempted']} records")
        return traces

    @timing_decorator
    def report(self) -> Dict[str, str]:
        """渲染报告表: 有效性、鲁棒性、分类别分布和失败分布"""
        outcomes = self._require(self.path("verify", "outcomes.jsonl"), "verify")
        inputs = {"verify": self.stage_dir("verify")}
        for stage in ("triage", "repair"):
            if os.path.isdir(self.stage_dir(stage)):
                inputs[stage] = self.stage_dir(stage)

        with self._stage("report", inputs) as directory:
            reports = [self._report_for(self.label, OutcomeLog.read(outcomes))]
            repaired = self.path("repair", "outcomes.jsonl")
            if os.path.exists(repaired):
                reports.append(self._report_for(f"{self.label}+repair", OutcomeLog.read(repaired)))

            failures = None
            total = 0
            atomic = self.path("triage", "atomic_errors.csv")
            if os.path.exists(atomic):
                total = len(_read_csv(atomic))
                failures = [
                    (FailureCategory.parse(row["category"]), int(row["count"]))
                    for row in _read_csv(self.path("triage", "distribution.csv"))
                ]
            rendered = write_report(reports, directory, failures, total)
            SafeFileHandler.write_json(
                os.path.join(directory, "metrics.json"), [r.to_dict() for r in reports]
            )
        return rendered

    def run(self, stage: str) -> Any:
        """按名字执行一个阶段"""
        if stage not in STAGES:
            raise ConfigError(f"unknown stage: {stage}", field="stage")
        return getattr(self, stage)()
