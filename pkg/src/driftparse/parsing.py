"""Executable parsing patterns: model states + trigger -> extracted values.

A pattern matches a line when the line's token set contains every required
token; the value is the numeric token immediately after the first
occurrence of any trigger alias.  A match without a numeric follower
yields nothing rather than scanning ahead, which would risk grabbing the
next field's value.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .hmm import Hmm
from .preprocess import TokenSequence, is_number, normalize_number


@dataclass(frozen=True)
class ParsingPattern:
    required_tokens: frozenset[str]
    trigger: str
    kpi_name: str
    trigger_aliases: tuple[str, ...]

    def __post_init__(self):
        if self.trigger not in self.required_tokens:
            raise ValueError("trigger must be one of the required tokens")
        if not self.trigger_aliases:
            raise ValueError("trigger_aliases must contain at least the trigger")


@dataclass
class KpiTable:
    """Extracted (event_id, kpi, value) rows; at most one row per key."""

    rows: list[tuple[str, str, str]] = field(default_factory=list)

    CSV_HEADER = ("event_id", "kpi", "value")

    def add(self, event_id: str, kpi: str, value: str) -> None:
        self.rows.append((event_id, kpi, value))

    def as_dict(self) -> dict[tuple[str, str], str]:
        return {(eid, kpi): value for eid, kpi, value in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        writer.writerows(self.rows)
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "KpiTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(header) != cls.CSV_HEADER:
            raise ValueError(f"bad KPI table header: {header!r}")
        table = cls()
        seen = set()
        for row in reader:
            if len(row) != 3:
                raise ValueError(f"bad KPI table row: {row!r}")
            eid, kpi, value = row
            if (eid, kpi) in seen:
                raise ValueError(f"duplicate KPI row for ({eid}, {kpi})")
            seen.add((eid, kpi))
            table.add(eid, kpi, normalize_number(value))
        return table


def compile_pattern(
    model: Hmm,
    trigger_state: int,
    kpi_name: str,
    aliases: list[str] | None = None,
) -> ParsingPattern:
    """Combine model states with the most-emitting state into a pattern."""
    trigger = model.states[trigger_state]
    alias_list = tuple(aliases) if aliases else (trigger,)
    if trigger not in alias_list:
        alias_list = (trigger,) + alias_list
    return ParsingPattern(frozenset(model.states), trigger, kpi_name, alias_list)


def parse_event(pattern: ParsingPattern, line: TokenSequence) -> str | None:
    """Extract the KPI value from one preprocessed line, if any.

    Requires full containment of the pattern tokens; the first trigger
    alias occurrence followed by a numeric token wins.
    """
    if not pattern.required_tokens <= line.token_set():
        return None
    aliases = set(pattern.trigger_aliases)
    for current, following in zip(line.tokens, line.tokens[1:]):
        if current in aliases and is_number(following):
            return normalize_number(following)
    return None


def parse_corpus(pattern: ParsingPattern, corpus: list[TokenSequence]) -> KpiTable:
    """One row per event with an extractable value, in corpus order."""
    table = KpiTable()
    for line in corpus:
        value = parse_event(pattern, line)
        if value is not None:
            table.add(line.event_id, pattern.kpi_name, value)
    return table
