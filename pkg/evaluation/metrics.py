"""
评测指标

所有比例都用 fractions.Fraction 精确计算, 只在渲染时转换为百分比。

- SR/FR/Unknown: 验证成功、失败 (含 Invalid)、无法判定的比例, 三者之和恰为 1
- CR: 变异体中没有通过验证的比例 (规格能"杀死"的变异体)
- FlR: 原程序规格验证成功时, 语义等价变体上验证失败的比例
- 归一化指标: 先对每个父程序的变体取均值, 再对父程序取无权均值
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence

from core.exceptions import (
    BaseNotSuccess,
    EmptyGroup,
    EmptyLog,
    NoMutants,
    NoVariants,
    UnknownId,
)
from core.utils import SafeFileHandler
from corpus.models import ControlFlowClass, Corpus, Origin
from verifier.models import OutcomeKind

logger = logging.getLogger(__name__)

FAILURE_KINDS = frozenset({OutcomeKind.FAILURE, OutcomeKind.INVALID})


@dataclass(frozen=True)
class LogEntry:
    """一次 (记录, 运行) 的验证结果"""

    record_id: str
    kind: OutcomeKind
    origin: str = "base"
    wall_time: float = 0.0
    token_cost: Optional[int] = None

    @property
    def parent_id(self) -> str:
        return Origin.parse(self.origin).parent_id or self.record_id

    def to_dict(self) -> Dict[str, Any]:
        return {
            "record_id": self.record_id,
            "origin": self.origin,
            "kind": self.kind.value,
            "wall_time": self.wall_time,
            "token_cost": self.token_cost,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LogEntry":
        cost = data.get("token_cost")
        return cls(
            record_id=data["record_id"],
            kind=OutcomeKind(data["kind"]),
            origin=data.get("origin", "base"),
            wall_time=float(data.get("wall_time", 0.0)),
            token_cost=int(cost) if cost is not None else None,
        )


class OutcomeLog:
    """验证结果日志, 以 JSONL 持久化 (每行一条记录)"""

    def __init__(self, entries: Iterable[LogEntry] = ()):
        self.entries: List[LogEntry] = list(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[LogEntry]:
        return iter(self.entries)

    def append(self, entry: LogEntry) -> None:
        self.entries.append(entry)

    def kinds(self) -> List[OutcomeKind]:
        return [e.kind for e in self.entries]

    def by_id(self) -> Dict[str, LogEntry]:
        return {e.record_id: e for e in self.entries}

    def base_entries(self) -> "OutcomeLog":
        return OutcomeLog(e for e in self.entries if Origin.parse(e.origin).is_base)

    def variant_groups(self) -> Dict[str, List[OutcomeKind]]:
        """变体结果按父记录分组 (保持出现顺序)"""
        groups: Dict[str, List[OutcomeKind]] = {}
        for entry in self.entries:
            origin = Origin.parse(entry.origin)
            if not origin.is_base:
                groups.setdefault(origin.parent_id, []).append(entry.kind)
        return groups

    def write(self, path: str) -> None:
        SafeFileHandler.write_jsonl(path, (e.to_dict() for e in self.entries))

    @classmethod
    def read(cls, path: str) -> "OutcomeLog":
        return cls(LogEntry.from_dict(row) for row in SafeFileHandler.read_jsonl(path))


def _kinds(log: Any) -> List[OutcomeKind]:
    if isinstance(log, OutcomeLog):
        return log.kinds()
    return [OutcomeKind(k) for k in log]


def _rate(log: Any, wanted: Iterable[OutcomeKind]) -> Fraction:
    kinds = _kinds(log)
    if not kinds:
        raise EmptyLog("outcome log is empty")
    wanted = frozenset(wanted)
    return Fraction(sum(1 for k in kinds if k in wanted), len(kinds))


def success_rate(log: Any) -> Fraction:
    """
    成功率 |Success| / |entries|

    Args:
        log: OutcomeLog 或结果类别序列

    Raises:
        EmptyLog: 日志为空
    """
    return _rate(log, (OutcomeKind.SUCCESS,))


def failure_rate(log: Any) -> Fraction:
    """失败率, Invalid 计入失败"""
    return _rate(log, FAILURE_KINDS)


def unknown_rate(log: Any) -> Fraction:
    return _rate(log, (OutcomeKind.UNKNOWN,))


def completeness_rate(spec_id: str, mutant_outcomes: Sequence[OutcomeKind]) -> Fraction:
    """
    完备率: 没有通过验证的变异体所占比例

    Raises:
        NoMutants: 变异体列表为空
    """
    if not mutant_outcomes:
        raise NoMutants(f"no mutants for specification {spec_id}", spec_id=spec_id)
    killed = sum(1 for k in mutant_outcomes if OutcomeKind(k) != OutcomeKind.SUCCESS)
    return Fraction(killed, len(mutant_outcomes))


def flip_rate(base_outcome: OutcomeKind, variant_outcomes: Sequence[OutcomeKind]) -> Fraction:
    """
    翻转率: 原程序规格验证成功时, 变体上未成功的比例

    Raises:
        BaseNotSuccess: 原程序规格没有验证成功
        NoVariants: 没有适用的变体
    """
    if OutcomeKind(base_outcome) != OutcomeKind.SUCCESS:
        raise BaseNotSuccess(f"flip rate needs a successful base outcome, got {OutcomeKind(base_outcome).value}")
    if not variant_outcomes:
        raise NoVariants("no applicable variants")
    flipped = sum(1 for k in variant_outcomes if OutcomeKind(k) != OutcomeKind.SUCCESS)
    return Fraction(flipped, len(variant_outcomes))


def is_success(kind: OutcomeKind) -> Fraction:
    return Fraction(int(OutcomeKind(kind) == OutcomeKind.SUCCESS))


def is_failure(kind: OutcomeKind) -> Fraction:
    return Fraction(int(OutcomeKind(kind) in FAILURE_KINDS))


def normalized_metric(metric: Callable[[Any], Fraction], groups: Sequence[Sequence[Any]]) -> Fraction:
    """
    归一化指标: 每组 (一个父程序的变体) 内取 metric 均值, 再对各组取无权均值

    Args:
        metric: 单个变体 -> [0, 1] 内的值, 例如 is_success
        groups: 变体分组

    Raises:
        EmptyGroup: 没有分组或存在空分组
    """
    if not groups:
        raise EmptyGroup("no variant groups")
    means = []
    for index, group in enumerate(groups):
        if not group:
            raise EmptyGroup(f"variant group {index} is empty", group=index)
        means.append(sum((Fraction(metric(v)) for v in group), Fraction(0)) / len(group))
    return sum(means, Fraction(0)) / len(means)


def weighted_metric(metric: Callable[[Any], Fraction], groups: Sequence[Sequence[Any]]) -> Fraction:
    """按变体加权的均值 (所有变体一视同仁)"""
    values = [Fraction(metric(v)) for group in groups for v in group]
    if not values:
        raise EmptyGroup("no variants")
    return sum(values, Fraction(0)) / len(values)


def corpus_flip_rate(
    base: Mapping[str, OutcomeKind], variants: Mapping[str, Sequence[OutcomeKind]]
) -> Optional[Fraction]:
    """
    语料级翻转率: 对基础验证成功且有变体的父程序求 flip_rate, 再取无权均值

    Returns:
        没有符合条件的父程序时为 None
    """
    rates = []
    for parent_id, kind in base.items():
        outcomes = variants.get(parent_id, ())
        if OutcomeKind(kind) != OutcomeKind.SUCCESS or not outcomes:
            continue
        rates.append(flip_rate(kind, outcomes))
    if not rates:
        return None
    return sum(rates, Fraction(0)) / len(rates)


@dataclass(frozen=True)
class ClassRates:
    sr: Fraction
    fr: Fraction
    count: int


def slice_by_class(log: OutcomeLog, corpus: Corpus) -> Dict[ControlFlowClass, ClassRates]:
    """
    按控制流类别切分 SR/FR; 没有记录的类别不出现在结果中

    Raises:
        UnknownId: 日志中的记录不在语料里
    """
    buckets: Dict[ControlFlowClass, List[OutcomeKind]] = {}
    for entry in log:
        record = corpus.get(entry.record_id)
        if record is None:
            raise UnknownId(entry.record_id)
        buckets.setdefault(record.cfc, []).append(entry.kind)
    return {
        cfc: ClassRates(success_rate(kinds), failure_rate(kinds), len(kinds))
        for cfc, kinds in sorted(buckets.items(), key=lambda item: item[0].rank)
    }


@dataclass(frozen=True)
class CostSummary:
    """简单的成本统计: token 总数与验证耗时"""

    total_tokens: int = 0
    total_wall_time: float = 0.0
    entries: int = 0

    @classmethod
    def of(cls, log: OutcomeLog) -> "CostSummary":
        return cls(
            total_tokens=sum(e.token_cost or 0 for e in log),
            total_wall_time=round(sum(e.wall_time for e in log), 6),
            entries=len(log),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total_tokens": self.total_tokens,
            "total_wall_time": self.total_wall_time,
            "entries": self.entries,
        }


@dataclass
class MetricReport:
    """一个模型 (及提示风格) 的指标汇总"""

    label: str
    sr: Fraction
    fr: Fraction
    unknown: Fraction
    cr: Optional[Fraction] = None
    flr: Optional[Fraction] = None
    diverse_sr: Optional[Fraction] = None
    diverse_fr: Optional[Fraction] = None
    diverse_sr_weighted: Optional[Fraction] = None
    diverse_fr_weighted: Optional[Fraction] = None
    per_class: Dict[ControlFlowClass, ClassRates] = field(default_factory=dict)
    totals: Dict[str, int] = field(default_factory=dict)
    cost: CostSummary = field(default_factory=CostSummary)

    def __post_init__(self):
        for name in ("sr", "fr", "unknown", "cr", "flr", "diverse_sr", "diverse_fr"):
            value = getattr(self, name)
            if value is not None and not 0 <= value <= 1:
                raise ValueError(f"{name} out of range: {value}")
        if self.sr + self.fr > 1:
            raise ValueError("sr + fr must not exceed 1")

    def to_dict(self) -> Dict[str, Any]:
        """JSON 形式; 比例同时给出精确分数和浮点值"""

        def frac(value: Optional[Fraction]) -> Optional[Dict[str, Any]]:
            if value is None:
                return None
            return {"exact": f"{value.numerator}/{value.denominator}", "value": float(value)}

        return {
            "label": self.label,
            "sr": frac(self.sr),
            "fr": frac(self.fr),
            "unknown": frac(self.unknown),
            "cr": frac(self.cr),
            "flr": frac(self.flr),
            "diverse_sr": frac(self.diverse_sr),
            "diverse_fr": frac(self.diverse_fr),
            "diverse_sr_weighted": frac(self.diverse_sr_weighted),
            "diverse_fr_weighted": frac(self.diverse_fr_weighted),
            "per_class": {
                cfc.value: {"sr": frac(r.sr), "fr": frac(r.fr), "count": r.count}
                for cfc, r in self.per_class.items()
            },
            "totals": dict(self.totals),
            "cost": self.cost.to_dict(),
        }


def build_report(
    label: str,
    base_log: OutcomeLog,
    corpus: Corpus,
    completeness: Optional[Mapping[str, Sequence[OutcomeKind]]] = None,
    variant_log: Optional[OutcomeLog] = None,
    variant_corpus: Optional[Corpus] = None,
    cr_over_all: bool = False,
) -> MetricReport:
    """
    汇总一个模型的全部指标

    Args:
        label: 报告标签 (模型名/提示风格)
        base_log: 基础语料上的结果
        corpus: 基础语料
        completeness: 规格 id -> 其变异体上的结果
        variant_log: 变体语料上的结果 (可选)
        variant_corpus: 变体语料, 用于校验变体 id
        cr_over_all: 为 True 时 CR 在全部规格上统计, 否则只统计基础验证成功的规格

    Raises:
        EmptyLog: 基础日志为空
        UnknownId: 日志中的 id 不在语料中
    """
    kinds = base_log.kinds()
    totals = {k.value: 0 for k in OutcomeKind}
    for kind in kinds:
        totals[kind.value] += 1
    report = MetricReport(
        label=label,
        sr=success_rate(base_log),
        fr=failure_rate(base_log),
        unknown=unknown_rate(base_log),
        per_class=slice_by_class(base_log, corpus),
        totals=totals,
        cost=CostSummary.of(base_log),
    )
    base_kinds = {e.record_id: e.kind for e in base_log}

    if completeness:
        rates = []
        for spec_id, outcomes in sorted(completeness.items()):
            if not cr_over_all and base_kinds.get(spec_id) != OutcomeKind.SUCCESS:
                continue
            if not outcomes:
                logger.warning(f"No mutant outcomes for {spec_id}, skipped in CR")
                continue
            rates.append(completeness_rate(spec_id, outcomes))
        if rates:
            report.cr = sum(rates, Fraction(0)) / len(rates)

    if variant_log is not None and len(variant_log):
        if variant_corpus is not None:
            for entry in variant_log:
                if entry.record_id not in variant_corpus:
                    raise UnknownId(entry.record_id)
        groups = variant_log.variant_groups()
        report.flr = corpus_flip_rate(base_kinds, groups)
        if groups:
            values = list(groups.values())
            report.diverse_sr = normalized_metric(is_success, values)
            report.diverse_fr = normalized_metric(is_failure, values)
            report.diverse_sr_weighted = weighted_metric(is_success, values)
            report.diverse_fr_weighted = weighted_metric(is_failure, values)
        report.cost = CostSummary(
            total_tokens=report.cost.total_tokens + CostSummary.of(variant_log).total_tokens,
            total_wall_time=round(report.cost.total_wall_time + CostSummary.of(variant_log).total_wall_time, 6),
            entries=report.cost.entries + len(variant_log),
        )
    logger.info(
        f"Report {label}: SR={float(report.sr):.3f} FR={float(report.fr):.3f} "
        f"CR={'-' if report.cr is None else f'{float(report.cr):.3f}'} "
        f"FlR={'-' if report.flr is None else f'{float(report.flr):.3f}'}"
    )
    return report
