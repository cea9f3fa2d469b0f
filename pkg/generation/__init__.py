"""
generation - 规格生成、抽取与自修复
"""

import os

from .prompts import (
    Demonstration,
    PromptBundle,
    PromptStyle,
    build_prompt,
    build_repair_prompt,
    load_demonstrations,
)
from .extraction import Extraction, InvalidReason, extract_repair, extract_specification
from .clients import (
    Completion,
    ModelClient,
    OpenAIChatClient,
    ReplayClient,
    ScriptedStubClient,
    TranscriptStore,
    create_client,
)
from .runner import GenerationResult, generate_many, generate_specification
from .repair import (
    MutationRepairResult,
    RepairTerminal,
    RepairTrace,
    repair_many,
    repair_record,
    self_repair,
    spec_mutation_repair,
)

DEFAULT_DEMONSTRATIONS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "demonstrations.json")

__all__ = [
    "Demonstration",
    "PromptBundle",
    "PromptStyle",
    "build_prompt",
    "build_repair_prompt",
    "load_demonstrations",
    "Extraction",
    "InvalidReason",
    "extract_repair",
    "extract_specification",
    "Completion",
    "ModelClient",
    "OpenAIChatClient",
    "ReplayClient",
    "ScriptedStubClient",
    "TranscriptStore",
    "create_client",
    "GenerationResult",
    "generate_many",
    "generate_specification",
    "MutationRepairResult",
    "RepairTerminal",
    "RepairTrace",
    "repair_many",
    "repair_record",
    "self_repair",
    "spec_mutation_repair",
    "DEFAULT_DEMONSTRATIONS",
]
