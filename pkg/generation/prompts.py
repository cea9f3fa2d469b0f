"""
提示模板

生成提示有四种风格: ZeroShot / FewShot / CoT / LTM; 修复提示按失败类别选择指导步骤,
没有专门模板的类别使用通用模板。
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from astcore.annotations import SpecifiedProgram
from core.exceptions import MissingDemos
from corpus.models import ProgramRecord
from evaluation.triage import AtomicError, FailureCategory

logger = logging.getLogger(__name__)

CODE_MARKER = "### CODE"
SPECIFICATION_MARKER = "### SPECIFICATION"
FIXED_MARKER = "### FIXED SPECIFICATION"


class PromptStyle(str, Enum):
    ZERO_SHOT = "ZeroShot"
    FEW_SHOT = "FewShot"
    COT = "CoT"
    LTM = "LTM"
    REPAIR = "Repair"

    @property
    def needs_demos(self) -> bool:
        return self in (PromptStyle.FEW_SHOT, PromptStyle.COT, PromptStyle.LTM)


@dataclass(frozen=True)
class Demonstration:
    """示例: 裸程序及其规格"""

    id: str
    code: str
    specification: str
    reasoning: str = ""


@dataclass(frozen=True)
class PromptBundle:
    style: PromptStyle
    system: str
    user: str
    examples_used: Tuple[str, ...] = ()
    category: Optional[str] = None

    def messages(self) -> List[Dict[str, str]]:
        """OpenAI chat 格式的消息列表"""
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user},
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "style": self.style.value,
            "category": self.category,
            "system": self.system,
            "user": self.user,
            "examples_used": list(self.examples_used),
        }


SYSTEM_PROMPT = (
    "You are an expert in the Java Modeling Language (JML). You receive Java programs "
    "and annotate them with JML specifications that OpenJML can check. Write the "
    "specifications as annotations inside the Java code. Include the preconditions and "
    "postconditions the methods need, along with any loop invariants, ranking functions, "
    "assertions and assumptions required for verification. Never change the Java code itself."
)

JML_SYNTAX_GUIDE = (
    "Follow the JML comment syntax:\n"
    "- a line annotation starts with //@ and runs to the end of the line;\n"
    "- a block annotation starts with /*@ and ends with */, and every line inside it "
    "may begin with a run of @ characters after the indentation."
)

GENERATION_REQUEST = "Please generate JML specifications for the Java code below.\n\n" + CODE_MARKER + "\n\n```java\n{code}\n```"

COT_SUFFIX = "\n\nLet's think step by step!"

LTM_SUFFIX = (
    "\n\nLet's break down this problem:\n\n"
    "1. What are the weakest preconditions for the code? Cover nullness and arithmetic bounds.\n\n"
    "2. What are the strongest postconditions for the code?\n\n"
    "3. Which further specifications (loop invariants, assertions, assumptions, ranking "
    "functions) are needed to prove those postconditions?\n\n"
    "Answer the questions first, then give the fully annotated program between triple "
    f"backticks after `{SPECIFICATION_MARKER}`."
)

REPAIR_SYSTEM_PROMPT = (
    "You are an expert in the Java Modeling Language (JML). You fix JML specifications "
    "annotated in Java code, using the error messages reported by OpenJML. Only the "
    "specifications may change; the Java code must stay as it is."
)

REPAIR_REQUEST = (
    "This Java code carries JML specifications:\n\n"
    "```java\n{program}\n```\n\n"
    "OpenJML could not verify it and reported the following.\n\n"
    "### ERROR MESSAGE:\n\n{errors}\n\n"
    "### ERROR TYPES: {title}\n\n"
    "{guidance}\n\n"
    "Revise the specifications so that verification succeeds. Return the complete "
    "annotated program between triple backticks after `" + FIXED_MARKER + "`."
)

# 类别 -> (标题, 说明, 指导步骤)
REPAIR_GUIDANCE: Dict[str, Tuple[str, str, Tuple[str, ...]]] = {
    "SyntaxError": (
        "Syntax Error",
        "",
        (
            "Decide whether the error comes from Java syntax or from JML syntax.",
            "Find the exact location of the offending construct in the annotated code.",
            "Rewrite that construct so it follows the grammar of the language it belongs to.",
        ),
    ),
    "InvalidSpecification": (
        "Invalid Specification",
        "The previous answer did not contain usable JML: specifications were missing, "
        "written in prose or Javadoc, or the Java code was changed.",
        (
            "Write every specification inside //@ or /*@ ... */ comments.",
            "Keep the Java code byte-for-byte identical apart from the added annotations.",
            "Return the whole program in a single fenced code block.",
        ),
    ),
    "UnsupportedQuantifier": (
        "Unsupported Sum/NumOf/Product Quantifier Expressions",
        "OpenJML cannot reason about the inductive quantifiers \\sum, \\num_of and \\product; "
        "SMT solvers need induction to handle them.",
        (
            "Remove every \\sum, \\num_of and \\product expression.",
            "Describe the accumulated value with a model method defined recursively, "
            "and state the inductive step in the loop invariant.",
            "Add lemmas or assertions that relate consecutive iterations when the solver needs them.",
        ),
    ),
    "UnsupportedMinMaxQuantifier": (
        "Unsupported Min/Max Quantifier Expressions",
        "OpenJML cannot reason about the \\min and \\max quantifiers.",
        (
            "Remove every \\min and \\max expression.",
            "State the extremum with \\forall (bounded by the value) and \\exists (attained by an element).",
        ),
    ),
    "PostconditionFailure": (
        "Post-condition Failures",
        "The verifier could not show that the method establishes its postcondition for every allowed input. "
        "Typical causes: a wrong or incomplete postcondition, preconditions too weak to reach it, "
        "or missing intermediate facts.",
        (
            "Check that the postcondition describes what the method actually computes.",
            "Strengthen the preconditions if some inputs make the postcondition unreachable.",
            "Add assertions, assumptions or loop invariants that carry the needed facts to the return point.",
        ),
    ),
    "LoopInvariantFailure": (
        "Loop Invariant Failures",
        "A loop invariant is not established on entry or not preserved by the loop body. "
        "Typical causes: a wrong invariant, preconditions too weak to establish it, "
        "or missing facts about the loop.",
        (
            "Check that the invariant holds before the first iteration and after every iteration.",
            "Strengthen the preconditions so that the invariant holds when the loop starts.",
            "Add assertions or assumptions inside the loop that help the verifier preserve the invariant.",
        ),
    ),
    "ArithmeticOperationRange": (
        "Arithmetic Operation Range Failures",
        "An arithmetic operation may overflow its type for some allowed inputs.",
        (
            "Identify the operation and the variables that can grow past the type bounds.",
            "Add preconditions or loop invariants that bound those variables.",
        ),
    ),
    "AssertionFailure": (
        "Assertion Failures",
        "An assertion cannot be proved at its program point.",
        (
            "Check that the assertion is true at that point for every allowed input.",
            "Add the preconditions or invariants the assertion depends on, or remove an incorrect assertion.",
        ),
    ),
    "NullDereference": (
        "Null Dereference",
        "An object or array may be null where it is dereferenced.",
        (
            "Add non-null preconditions for parameters that are dereferenced.",
            "State non-nullness of elements or fields in invariants where the code relies on it.",
        ),
    ),
    "DivideByZero": (
        "Divide By Zero",
        "A divisor may be zero for some allowed inputs.",
        (
            "Find the divisor and the inputs that make it zero.",
            "Add a precondition or invariant that keeps the divisor non-zero.",
        ),
    ),
    "ArrayIndexFailure": (
        "Array Index Failures",
        "An array index may fall outside the array bounds.",
        (
            "Relate the index to the array length in preconditions and loop invariants.",
            "Make sure quantified ranges stay within 0 and length - 1.",
        ),
    ),
}

GENERIC_GUIDANCE = (
    "Verification Failure",
    "",
    (
        "Read each error message and locate the specification it refers to.",
        "Correct, strengthen or remove that specification so it is both true and provable.",
    ),
)


def load_demonstrations(path: str) -> List[Demonstration]:
    """从 JSON 文件加载示例 (列表, 每项含 id/code/specification)"""
    with open(path, "r", encoding="utf-8") as f:
        rows = json.load(f)
    return [
        Demonstration(row["id"], row["code"], row["specification"], row.get("reasoning", ""))
        for row in rows
    ]


def _render_demos(demos: Sequence[Demonstration], style: PromptStyle) -> str:
    parts = []
    for number, demo in enumerate(demos, 1):
        text = f"### EXAMPLE {number}\n\n{CODE_MARKER}\n\n```java\n{demo.code.rstrip()}\n```\n\n"
        if style == PromptStyle.COT and demo.reasoning:
            text += f"{demo.reasoning.strip()}\n\n"
        text += f"{SPECIFICATION_MARKER}\n\n```java\n{demo.specification.rstrip()}\n```"
        parts.append(text)
    return "\n\n".join(parts)


def build_prompt(
    style: PromptStyle, record: ProgramRecord, demos: Sequence[Demonstration] = ()
) -> PromptBundle:
    """
    构造生成提示

    Args:
        style: 提示风格
        record: 目标程序
        demos: 示例 (FewShot/CoT/LTM 必须非空)

    Returns:
        PromptBundle

    Raises:
        MissingDemos: 需要示例的风格没有提供示例
    """
    style = PromptStyle(style)
    if style == PromptStyle.REPAIR:
        raise ValueError("use build_repair_prompt for repair prompts")
    user = GENERATION_REQUEST.format(code=record.bare_source.rstrip())
    if not style.needs_demos:
        return PromptBundle(style, SYSTEM_PROMPT, user)
    if not demos:
        raise MissingDemos(f"{style.value} prompts need at least one demonstration", style=style.value)

    system = f"{SYSTEM_PROMPT}\n\n{JML_SYNTAX_GUIDE}\n\n{_render_demos(demos, style)}"
    if style == PromptStyle.COT:
        user += COT_SUFFIX
    elif style == PromptStyle.LTM:
        user += LTM_SUFFIX
    return PromptBundle(style, system, user, tuple(d.id for d in demos))


def guidance_for(category: FailureCategory) -> Tuple[str, str, Tuple[str, ...]]:
    """类别对应的指导; 没有专门模板时返回通用指导"""
    if category.is_other:
        return GENERIC_GUIDANCE
    return REPAIR_GUIDANCE.get(category.name, GENERIC_GUIDANCE)


def build_repair_prompt(
    category: FailureCategory, program: SpecifiedProgram, errors: Sequence[AtomicError]
) -> PromptBundle:
    """
    构造修复提示: 只包含最新的规格和最新的错误
    """
    title, explanation, steps = guidance_for(category)
    lines = []
    if explanation:
        lines.append(explanation)
        lines.append("")
    lines.append("To resolve the error, consider the following steps:")
    lines.append("")
    lines.extend(f"{n}. {step}" for n, step in enumerate(steps, 1))
    messages = "\n".join(e.diagnostic.raw_message for e in errors) or "(no message)"
    user = REPAIR_REQUEST.format(
        program=program.source.rstrip(),
        errors=messages,
        title=title,
        guidance="\n".join(lines),
    )
    return PromptBundle(PromptStyle.REPAIR, REPAIR_SYSTEM_PROMPT, user, category=str(category))
