"""Answer type shared by every decision procedure."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any


class Answer(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"
    # Budget exhausted; never to be read as NO.
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class Decision:
    """Outcome of a decision procedure.

    ``witness`` is whatever certificate the procedure produces (a conjugator,
    an exponent, a matrix, ...).  ``certificate_checked`` is True only when the
    witness has been re-verified exactly against the question asked.
    """

    answer: Answer
    witness: Any = None
    certificate_checked: bool = False
    note: str = ""

    @classmethod
    def yes(cls, witness: Any = None, checked: bool = True, note: str = "") -> "Decision":
        return cls(Answer.YES, witness, checked, note)

    @classmethod
    def no(cls, note: str = "") -> "Decision":
        return cls(Answer.NO, None, False, note)

    @classmethod
    def unknown(cls, note: str = "") -> "Decision":
        return cls(Answer.UNKNOWN, None, False, note)

    @classmethod
    def overflow(cls, note: str = "") -> "Decision":
        return cls(Answer.OVERFLOW, None, False, note)

    @property
    def is_yes(self) -> bool:
        return self.answer is Answer.YES

    @property
    def is_no(self) -> bool:
        return self.answer is Answer.NO

    @property
    def conclusive(self) -> bool:
        return self.answer in (Answer.YES, Answer.NO)


class OverflowBudget(RuntimeError):
    """Raised by enumerations that hit their resource budget."""
