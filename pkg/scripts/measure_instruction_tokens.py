#!/usr/bin/env python3
"""Measure instruction-block sizes for a label schema under the token budget.

Usage: python3 scripts/measure_instruction_tokens.py [schema.json]
Defaults to the shipped 16-label science schema.
"""

import sys
from pathlib import Path

from nerpipe.corpus import load_schema
from nerpipe.instructions import TokenBudget, build_instruction

DEFAULT = Path(__file__).parent.parent / "tests" / "fixtures" / "science_schema.json"


def main() -> None:
    schema_path = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT
    schema = load_schema(schema_path)
    budget = TokenBudget()
    with_g = build_instruction(schema, include_guidelines=True)
    without_g = build_instruction(schema, include_guidelines=False)
    print(f"schema: {schema.name} ({len(schema.labels)} labels)")
    print(f"instruction with guidelines:    {budget.count(with_g):5d} tokens")
    print(f"instruction without guidelines: {budget.count(without_g):5d} tokens")
    print(f"budget:                         {budget.max_tokens:5d} tokens")
    headroom = budget.max_tokens - budget.count(with_g)
    print(f"headroom for input+output:      {headroom:5d} tokens")


if __name__ == "__main__":
    main()
