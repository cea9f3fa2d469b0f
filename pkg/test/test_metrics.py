"""
指标计算测试 - SR/FR/CR/FlR、归一化指标、按类别切分与报告汇总
"""

import os
import sys
import random
import logging
from fractions import Fraction
from test_config import DESK_CORPUS, run_module_tests, temp_dir

from core.exceptions import BaseNotSuccess, EmptyGroup, EmptyLog, NoMutants, NoVariants, UnknownId
from corpus import ControlFlowClass, load_corpus
from evaluation import (
    LogEntry,
    OutcomeLog,
    build_report,
    completeness_rate,
    corpus_flip_rate,
    failure_rate,
    flip_rate,
    is_failure,
    is_success,
    normalized_metric,
    percent,
    slice_by_class,
    success_rate,
    unknown_rate,
    weighted_metric,
)
from verifier import OutcomeKind

logger = logging.getLogger("指标计算测试")

S, F, U, I = OutcomeKind.SUCCESS, OutcomeKind.FAILURE, OutcomeKind.UNKNOWN, OutcomeKind.INVALID


def _planted_log(successes: int, failures: int, total: int) -> OutcomeLog:
    """前 successes 条成功, 接着 failures 条失败 (一半 Invalid), 其余无法判定"""
    kinds = [S] * successes
    kinds += [F if i % 2 == 0 else I for i in range(failures)]
    kinds += [U] * (total - successes - failures)
    return OutcomeLog(LogEntry(f"r{i:03d}", kind) for i, kind in enumerate(kinds))


def _planted_variants(parents: int, flips_per_parent) -> tuple:
    base = {f"p{i:02d}": S for i in range(parents)}
    variants = {}
    for i, flips in enumerate(flips_per_parent):
        variants[f"p{i:02d}"] = [F] * flips + [S] * (10 - flips)
    return base, variants


def test_planted_rates():
    """已知计数的日志, 百分比按一位小数渲染"""
    logger.info("开始测试植入计数...")
    planted = [(65, 435, "9.3", "62.1"), (70, 449, "10.0", "64.1"), (83, 421, "11.9", "60.1")]
    for successes, failures, sr_text, fr_text in planted:
        log = _planted_log(successes, failures, 700)
        assert success_rate(log) == Fraction(successes, 700)
        assert failure_rate(log) == Fraction(failures, 700)
        assert percent(success_rate(log)) == sr_text
        assert percent(failure_rate(log)) == fr_text
        assert success_rate(log) + failure_rate(log) + unknown_rate(log) == 1


def test_planted_flip_rates():
    logger.info("开始测试翻转率...")
    cases = [
        ([3] * 18 + [2] * 7, 68, "27.2"),
        ([4] * 23 + [3] * 2, 98, "39.2"),
        ([3] * 23 + [2] * 2, 73, "29.2"),
    ]
    for flips, total, text in cases:
        base, variants = _planted_variants(25, flips)
        rate = corpus_flip_rate(base, variants)
        assert rate == Fraction(total, 250)
        assert percent(rate) == text
    # 基础失败或没有变体的父程序不参与
    base, variants = _planted_variants(2, [5, 5])
    base["p02"] = F
    variants["p02"] = [F] * 10
    base["p03"] = S
    assert corpus_flip_rate(base, variants) == Fraction(1, 2)
    assert corpus_flip_rate({"p": F}, {"p": [F]}) is None


def test_percent_rounding():
    assert percent(Fraction(1, 16)) == "6.3"
    assert percent(Fraction(1, 8)) == "12.5"
    assert percent(Fraction(1, 6)) == "16.7"
    assert percent(Fraction(0)) == "0.0"
    assert percent(Fraction(1)) == "100.0"
    assert percent(None) == "-"


def test_rates_sum_to_one():
    rng = random.Random(20241017)
    for _ in range(1000):
        kinds = [rng.choice([S, F, U, I]) for _ in range(rng.randint(1, 60))]
        assert success_rate(kinds) + failure_rate(kinds) + unknown_rate(kinds) == 1
    for metric in (success_rate, failure_rate, unknown_rate):
        try:
            metric(OutcomeLog())
        except EmptyLog:
            continue
        raise AssertionError("空日志应当报错")


def test_completeness_and_flip():
    assert completeness_rate("maximum", [F, S, U, I, S, S]) == Fraction(1, 2)
    assert flip_rate(S, [S, S, F, U]) == Fraction(1, 2)
    for call, error in (
        (lambda: completeness_rate("x", []), NoMutants),
        (lambda: flip_rate(F, [S]), BaseNotSuccess),
        (lambda: flip_rate(S, []), NoVariants),
    ):
        try:
            call()
        except error:
            continue
        raise AssertionError(f"应当抛出 {error.__name__}")


def test_normalized_metric():
    logger.info("开始测试归一化指标...")
    groups = [[S, S, F, F], [S]]
    assert normalized_metric(is_success, groups) == Fraction(3, 4)
    assert weighted_metric(is_success, groups) == Fraction(3, 5)
    assert normalized_metric(is_failure, [[I, U], [S, S]]) == Fraction(1, 4)

    rng = random.Random(7)
    for _ in range(500):
        groups = [[rng.choice([S, F, U, I]) for _ in range(rng.randint(1, 12))] for _ in range(rng.randint(1, 8))]
        expected = sum(Fraction(g.count(S), len(g)) for g in groups) / len(groups)
        assert normalized_metric(is_success, groups) == expected

    for bad in ([], [[S], []]):
        try:
            normalized_metric(is_success, bad)
        except EmptyGroup:
            continue
        raise AssertionError("空分组应当报错")


def test_slice_by_class():
    corpus = load_corpus(DESK_CORPUS)
    log = OutcomeLog(
        [
            LogEntry("maximum", S),
            LogEntry("count_charac", F),
            LogEntry("ascii_value", S),
            LogEntry("max_achievable", I),
            LogEntry("swap_array", U),
        ]
    )
    rates = slice_by_class(log, corpus)
    assert list(rates) == [ControlFlowClass.SEQUENTIAL, ControlFlowClass.BRANCHING, ControlFlowClass.SINGLE_PATH_LOOP]
    assert rates[ControlFlowClass.SEQUENTIAL].sr == Fraction(1, 2)
    assert rates[ControlFlowClass.BRANCHING].fr == 0
    assert rates[ControlFlowClass.SINGLE_PATH_LOOP].fr == 1
    try:
        slice_by_class(OutcomeLog([LogEntry("ghost", S)]), corpus)
    except UnknownId as e:
        assert e.record_id == "ghost"
    else:
        raise AssertionError("未知 id 应当报错")


def test_build_report():
    logger.info("开始测试报告汇总...")
    corpus = load_corpus(DESK_CORPUS)
    base_log = OutcomeLog(
        [
            LogEntry("maximum", S, token_cost=100, wall_time=1.0),
            LogEntry("count_charac", S, token_cost=80, wall_time=0.5),
            LogEntry("ascii_value", F),
            LogEntry("max_achievable", I),
            LogEntry("swap_array", U),
        ]
    )
    variant_log = OutcomeLog(
        [
            LogEntry("maximum__SwitchRelation", S, origin="transformed:maximum:SwitchRelation"),
            LogEntry("maximum__ReverseIf", F, origin="transformed:maximum:ReverseIf"),
            LogEntry("ascii_value__ReverseIf", S, origin="transformed:ascii_value:ReverseIf"),
        ]
    )
    completeness = {"maximum": [S, F, F, F, F, F], "count_charac": [], "ascii_value": [F]}
    report = build_report("model/ZeroShot", base_log, corpus, completeness, variant_log)
    assert (report.sr, report.fr, report.unknown) == (Fraction(2, 5), Fraction(2, 5), Fraction(1, 5))
    assert report.cr == Fraction(5, 6)
    assert report.flr == Fraction(1, 2)
    assert report.diverse_sr == Fraction(3, 4)
    assert report.diverse_sr_weighted == Fraction(2, 3)
    assert report.totals == {"Success": 2, "Failure": 1, "Unknown": 1, "Invalid": 1}
    assert report.cost.total_tokens == 180 and report.cost.entries == 8

    data = report.to_dict()
    assert data["sr"] == {"exact": "2/5", "value": 0.4}
    assert data["per_class"]["Sequential"]["count"] == 2

    everything = build_report("all", base_log, corpus, completeness, cr_over_all=True)
    assert everything.cr == Fraction(5 + 6, 12)
    assert everything.flr is None

    with temp_dir() as directory:
        path = os.path.join(directory, "outcomes.jsonl")
        base_log.write(path)
        restored = OutcomeLog.read(path)
        assert restored.kinds() == base_log.kinds()
        assert restored.entries[0].token_cost == 100


if __name__ == "__main__":
    sys.exit(run_module_tests(dict(globals()), logger))
