"""
Java 语法树门面

基于 tree-sitter 的全保真解析: 每个节点带字节区间, 渲染即在原文上拼接
编辑区间。所有变换与变异模块只通过本模块读写代码。
"""

import re
import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import tree_sitter_java as tsjava
from tree_sitter import Language, Node, Parser, Tree

from core.exceptions import ParseFailure, RewriteConflict

logger = logging.getLogger(__name__)

JAVA_LANGUAGE = Language(tsjava.language())

# 变换和变异需要的节点种类
LOOP_TYPES = frozenset(
    {"for_statement", "enhanced_for_statement", "while_statement", "do_statement"}
)
BRANCH_TYPES = frozenset({"if_statement", "switch_expression"})
EXIT_TYPES = frozenset({"break_statement", "continue_statement", "return_statement"})
COMMENT_TYPES = frozenset({"line_comment", "block_comment"})
CONTROL_TYPES = LOOP_TYPES | BRANCH_TYPES | EXIT_TYPES | frozenset(
    {
        "block",
        "throw_statement",
        "try_statement",
        "try_with_resources_statement",
        "labeled_statement",
        "synchronized_statement",
        "yield_statement",
    }
)
RELATIONAL_OPS = (">", ">=", "<", "<=", "==", "!=")
ARITHMETIC_OPS = ("+", "-", "*", "/", "%")
LOGICAL_OPS = ("&&", "||")
INTEGER_LITERAL_TYPES = frozenset(
    {
        "decimal_integer_literal",
        "hex_integer_literal",
        "octal_integer_literal",
        "binary_integer_literal",
    }
)
# 不会从块中作为独立语句出现的作用域边界
SCOPE_BOUNDARY_TYPES = frozenset(
    {"class_body", "lambda_expression", "method_declaration", "constructor_declaration"}
)

_local = threading.local()


def _parser() -> Parser:
    """每个线程一个解析器, 保证 parse 可重入"""
    parser = getattr(_local, "parser", None)
    if parser is None:
        parser = Parser(JAVA_LANGUAGE)
        _local.parser = parser
    return parser


# 编辑: 用 text 替换 [start, end); moves 记录原文区间在新文本中的位置
Move = Tuple[int, int, int]


@dataclass(frozen=True)
class Edit:
    start: int
    end: int
    text: str
    moves: Tuple[Move, ...] = ()

    @property
    def size(self) -> int:
        return len(self.text.encode("utf-8"))

    def locate(self, pos: int, new_start: int) -> Optional[int]:
        """原位置 pos (落在本编辑区间内) 在新文本中的位置, 丢失时为 None"""
        for old_start, old_end, offset in self.moves:
            if old_start <= pos < old_end or old_start == old_end == pos:
                return new_start + offset + (pos - old_start)
        if pos == self.start:
            return new_start
        return None


class PositionMap:
    """应用编辑后, 把旧字节位置映射到新字节位置"""

    def __init__(self, entries: Sequence[Tuple[Edit, int]]):
        self._entries = list(entries)

    def map(self, pos: int) -> Optional[int]:
        delta = 0
        for edit, new_start in self._entries:
            if edit.start == edit.end:
                # 插入点上的锚点移到插入文本之后
                if edit.start <= pos:
                    delta = new_start + edit.size - edit.end
                    continue
                break
            if edit.end <= pos:
                delta = new_start + edit.size - edit.end
                continue
            if edit.start <= pos:
                return edit.locate(pos, new_start)
            break
        return pos + delta


def apply_edits(data: bytes, edits: Iterable[Edit]) -> Tuple[bytes, PositionMap]:
    """
    在字节串上应用一组互不重叠的编辑

    Args:
        data: 原始源码字节
        edits: 编辑集合

    Returns:
        (新字节串, 位置映射)

    Raises:
        RewriteConflict: 编辑区间重叠
    """
    ordered = sorted(edits, key=lambda e: (e.start, e.end))
    pieces: List[bytes] = []
    entries: List[Tuple[Edit, int]] = []
    cursor = 0
    length = 0
    for edit in ordered:
        if edit.start < cursor or edit.end > len(data) or edit.start > edit.end:
            raise RewriteConflict(
                f"overlapping edit at bytes {edit.start}-{edit.end}",
                start=edit.start,
                end=edit.end,
            )
        pieces.append(data[cursor : edit.start])
        length += edit.start - cursor
        entries.append((edit, length))
        encoded = edit.text.encode("utf-8")
        pieces.append(encoded)
        length += len(encoded)
        cursor = edit.end
    pieces.append(data[cursor:])
    return b"".join(pieces), PositionMap(entries)


class SyntaxTree:
    """带源码映射的语法树; 编辑先登记, render 时统一拼接"""

    def __init__(self, source: str, tree: Tree):
        self.source = source
        self.data = source.encode("utf-8")
        self.tree = tree
        self.edits: List[Edit] = []

    @property
    def root(self) -> Node:
        return self.tree.root_node

    def span(self, node: Node) -> Tuple[int, int]:
        return node.start_byte, node.end_byte

    def text(self, node: Node) -> str:
        return self.data[node.start_byte : node.end_byte].decode("utf-8")

    def slice(self, start: int, end: int) -> str:
        return self.data[start:end].decode("utf-8")

    def replace(self, node: Node, text: str) -> None:
        self.edits.append(Edit(node.start_byte, node.end_byte, text))

    def insert(self, pos: int, text: str) -> None:
        self.edits.append(Edit(pos, pos, text))

    def line_start(self, pos: int) -> int:
        return self.data.rfind(b"\n", 0, pos) + 1

    def indent_of(self, node: Node) -> str:
        """节点所在行的前导空白"""
        start = self.line_start(node.start_byte)
        line = self.data[start : node.start_byte].decode("utf-8")
        return line[: len(line) - len(line.lstrip())]

    def line_of(self, pos: int) -> int:
        return self.data.count(b"\n", 0, pos) + 1


def first_error(tree: Tree) -> Optional[Node]:
    """第一个 ERROR 或 MISSING 节点"""
    if not tree.root_node.has_error:
        return None
    for node in iter_nodes(tree.root_node):
        if node.type == "ERROR" or node.is_missing:
            return node
    return tree.root_node


def parse(source: str, strict: bool = True) -> SyntaxTree:
    """
    解析 Java 源码

    Args:
        source: 源码文本
        strict: 为 True 时语法错误抛出 ParseFailure

    Returns:
        SyntaxTree

    Raises:
        ParseFailure: 源码存在语法错误 (strict 模式)
    """
    tree = _parser().parse(source.encode("utf-8"))
    result = SyntaxTree(source, tree)
    if strict:
        error = first_error(tree)
        if error is not None:
            line = error.start_point[0] + 1
            message = (
                f"missing {error.type}" if error.is_missing else "unexpected syntax"
            )
            raise ParseFailure(error.start_byte, f"{message} at line {line}", line=line)
    return result


def parses(source: str) -> bool:
    return first_error(_parser().parse(source.encode("utf-8"))) is None


def render(tree: SyntaxTree) -> str:
    """
    渲染语法树; 无编辑时与原文逐字节一致

    Raises:
        RewriteConflict: 登记的编辑区间重叠
    """
    if not tree.edits:
        return tree.source
    data, _ = apply_edits(tree.data, tree.edits)
    return data.decode("utf-8")


def iter_nodes(node: Node) -> Iterator[Node]:
    """前序遍历"""
    yield node
    for child in node.children:
        yield from iter_nodes(child)


def find_all(node: Node, types: Iterable[str]) -> List[Node]:
    wanted = set(types)
    return [n for n in iter_nodes(node) if n.type in wanted]


def has_descendant(node: Node, types: Iterable[str], stop: Iterable[str] = ()) -> bool:
    """node 的后代中是否存在指定类型 (遇到 stop 类型不再深入)"""
    wanted = set(types)
    barrier = set(stop)
    for child in node.children:
        if child.type in wanted:
            return True
        if child.type in barrier:
            continue
        if has_descendant(child, wanted, barrier):
            return True
    return False


def operator_of(node: Node) -> str:
    """二元/赋值/一元表达式的运算符文本"""
    op = node.child_by_field_name("operator")
    if op is not None:
        return op.type
    # update_expression 没有字段名
    for child in node.children:
        if not child.is_named:
            return child.type
    return ""


def named_statements(block: Node) -> List[Node]:
    """块中的语句 (不含注释和花括号)"""
    return [c for c in block.named_children if c.type not in COMMENT_TYPES]


def identifiers(node: Node) -> Set[str]:
    return {n.text.decode("utf-8") for n in iter_nodes(node) if n.type == "identifier"}


def node_key(node: Node) -> Tuple[int, int, str]:
    return node.start_byte, node.end_byte, node.type


def node_ordinal(root: Node, target: Node) -> int:
    """target 在同类型节点中的文档序号"""
    index = 0
    for node in iter_nodes(root):
        if node.type == target.type:
            if node_key(node) == node_key(target):
                return index
            index += 1
    raise ValueError(f"node {target.type} not under root")


def node_by_ordinal(root: Node, node_type: str, ordinal: int) -> Optional[Node]:
    index = 0
    for node in iter_nodes(root):
        if node.type == node_type:
            if index == ordinal:
                return node
            index += 1
    return None


_HSPACE = re.compile(r"[ \t]+")


def normalize_whitespace(text: str) -> str:
    """
    等价比较用的空白规范化: 折叠行内空白, 去掉行首尾空白和空行, 保留换行结构
    """
    lines = []
    for line in text.replace("\r\n", "\n").split("\n"):
        line = _HSPACE.sub(" ", line).strip()
        if line:
            lines.append(line)
    return "\n".join(lines)


class TextBuilder:
    """拼接替换文本, 并记录从原文复制的区间"""

    def __init__(self, tree: SyntaxTree):
        self.tree = tree
        self.parts: List[str] = []
        self.moves: List[Move] = []
        self.size = 0

    def write(self, text: str) -> "TextBuilder":
        self.parts.append(text)
        self.size += len(text.encode("utf-8"))
        return self

    def copy(self, start: int, end: int) -> "TextBuilder":
        self.moves.append((start, end, self.size))
        return self.write(self.tree.slice(start, end))

    def mark(self, pos: int) -> "TextBuilder":
        """原文位置 pos 映射到当前写入位置"""
        self.moves.append((pos, pos, self.size))
        return self

    @property
    def text(self) -> str:
        return "".join(self.parts)


class Rewriter:
    """
    规则驱动的子树改写

    match 判断节点是否为改写点; build 把改写结果写入 TextBuilder,
    可以通过 emit/copy 递归处理嵌套的改写点。build 返回本次改写的站点数
    (None 视为 1)。
    """

    def __init__(
        self,
        tree: SyntaxTree,
        match: Callable[[Node], bool],
        build: Callable[[Node, TextBuilder], Optional[int]],
    ):
        self.tree = tree
        self.match = match
        self.build = build
        self.sites = 0

    def _run(self, node: Node, builder: TextBuilder) -> None:
        count = self.build(node, builder)
        self.sites += 1 if count is None else count

    def edits(self) -> List[Edit]:
        result = []
        for node in self._matches_in(self.tree.root, 0, len(self.tree.data)):
            builder = TextBuilder(self.tree)
            self._run(node, builder)
            result.append(
                Edit(node.start_byte, node.end_byte, builder.text, tuple(builder.moves))
            )
        return result

    def emit(self, node: Node, builder: TextBuilder) -> None:
        """输出节点文本, 嵌套改写点按规则改写"""
        if self.match(node):
            self._run(node, builder)
        else:
            self.copy(node.start_byte, node.end_byte, builder, node)

    def copy(
        self, start: int, end: int, builder: TextBuilder, scope: Optional[Node] = None
    ) -> None:
        """输出原文区间 [start, end), 其中的改写点按规则改写"""
        cursor = start
        for node in self._matches_in(scope or self.tree.root, start, end):
            if node.start_byte > cursor:
                builder.copy(cursor, node.start_byte)
            self._run(node, builder)
            cursor = node.end_byte
        if cursor < end:
            builder.copy(cursor, end)

    def _matches_in(self, node: Node, start: int, end: int) -> Iterator[Node]:
        for child in node.children:
            if child.end_byte <= start or child.start_byte >= end:
                continue
            if child.start_byte >= start and child.end_byte <= end and self.match(child):
                yield child
            else:
                yield from self._matches_in(child, start, end)
