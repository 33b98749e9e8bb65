"""Effective line counting for Java sources, in the spirit of cloc.

A line is effective when something other than whitespace is left on it
after comments are removed. String, text-block and char literals are
skipped as units so comment markers inside them are inert.
"""

from __future__ import annotations

import re
from pathlib import Path

_TOKENS = re.compile(
    r'"""(?:\\[\s\S]?|[^\\])*?(?:"""|\Z)'  # text block
    r'|"(?:\\[^\n]|[^"\\\n])*"?'          # string; an unterminated one stops at end of line
    r"|'(?:\\[^\n]|[^'\\\n])*'?"          # char literal
    r"|/\*[\s\S]*?(?:\*/|\Z)"             # block comment, possibly unterminated
    r"|//[^\n]*"                          # line comment
)


def strip_comments(text: str) -> str:
    """Blank out comments, keeping every newline so line numbers survive."""

    def repl(m: re.Match) -> str:
        tok = m.group(0)
        if tok.startswith("/"):
            return "\n" * tok.count("\n")
        return tok

    return _TOKENS.sub(repl, text)


def count_effective_text(text: str) -> int:
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    return sum(1 for line in strip_comments(text).split("\n") if line.strip())


def count_effective_lines(file_path) -> int:
    data = Path(file_path).read_bytes()
    return count_effective_text(data.decode("utf-8", errors="replace"))
