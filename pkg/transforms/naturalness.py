"""
自然度评分

用词法单元 n-gram 语言模型 (加一平滑) 计算源码的平均交叉熵 H,
变体的自然度为 (H(变体) - H(原程序)) / H(原程序), 数值越小越自然。
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Set, Tuple

import numpy as np
from pygments.lexers import JavaLexer
from pygments.token import Token
from typing_extensions import Protocol

from core.config import TRANSFORM_CONFIG
from core.exceptions import ScorerFailure
from astcore.syntax import parse

logger = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"


class LanguageModelScorer(Protocol):
    """任何能给源码计算交叉熵 (比特/词法单元) 的模型"""

    def cross_entropy(self, source: str) -> float: ...


@dataclass(frozen=True)
class NaturalnessScore:
    value: float

    def __float__(self) -> float:
        return self.value


def tokenize(source: str) -> List[str]:
    """Java 词法单元序列 (不含空白和注释)"""
    tokens = []
    for kind, value in JavaLexer().get_tokens(source):
        if kind in Token.Comment:
            continue
        value = value.strip()
        if value:
            tokens.append(value)
    return tokens


class NgramScorer:
    """
    词法单元 n-gram 模型, 加一平滑

    P(w | c) = (count(c, w) + 1) / (count(c) + V), V 为词表大小加 1 (未登录词)
    """

    def __init__(self, order: int = TRANSFORM_CONFIG["ngram_order"]):
        if order < 1:
            raise ValueError("n-gram order must be >= 1")
        self.order = order
        self.ngram_counts: Counter = Counter()
        self.context_counts: Counter = Counter()
        self.vocabulary: Set[str] = set()

    def _ngrams(self, tokens: List[str]) -> Iterable[Tuple[str, ...]]:
        padded = [BOS] * (self.order - 1) + tokens + [EOS]
        for i in range(len(padded) - self.order + 1):
            yield tuple(padded[i : i + self.order])

    def train(self, sources: Iterable[str]) -> "NgramScorer":
        """
        在一组源码上训练

        Args:
            sources: 源码 (一般为语料中的裸源码)

        Returns:
            self, 便于链式调用
        """
        documents = 0
        for source in sources:
            tokens = tokenize(source)
            self.vocabulary.update(tokens)
            for ngram in self._ngrams(tokens):
                self.ngram_counts[ngram] += 1
                self.context_counts[ngram[:-1]] += 1
            documents += 1
        logger.info(
            f"Trained {self.order}-gram scorer on {documents} sources, "
            f"vocabulary size {len(self.vocabulary)}"
        )
        return self

    @property
    def trained(self) -> bool:
        return bool(self.ngram_counts)

    def cross_entropy(self, source: str) -> float:
        """
        源码的平均交叉熵 (比特/词法单元)

        Raises:
            ScorerFailure: 模型未训练或源码没有词法单元
        """
        if not self.trained:
            raise ScorerFailure("n-gram scorer used before training")
        tokens = tokenize(source)
        if not tokens:
            raise ScorerFailure("source has no tokens")
        vocab_size = len(self.vocabulary) + 1
        ngrams = list(self._ngrams(tokens))
        hits = np.array([self.ngram_counts.get(g, 0) for g in ngrams], dtype=np.float64)
        contexts = np.array([self.context_counts.get(g[:-1], 0) for g in ngrams], dtype=np.float64)
        probabilities = (hits + 1.0) / (contexts + vocab_size)
        return float(-np.mean(np.log2(probabilities)))


def naturalness(original: str, variant: str, scorer: LanguageModelScorer) -> NaturalnessScore:
    """
    变体相对原程序的交叉熵相对变化

    Raises:
        ParseFailure: 任一输入无法解析
        ScorerFailure: 模型无法评分或原程序交叉熵为 0
    """
    parse(original)
    parse(variant)
    if original == variant:
        return NaturalnessScore(0.0)
    base = scorer.cross_entropy(original)
    if not np.isfinite(base) or base <= 0:
        raise ScorerFailure(f"degenerate cross-entropy for original: {base}")
    changed = scorer.cross_entropy(variant)
    value = (changed - base) / base
    if not np.isfinite(value):
        raise ScorerFailure("non-finite naturalness score")
    return NaturalnessScore(float(value))
