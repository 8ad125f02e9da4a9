"""Tokenizer for miniK source text.

Statements are newline-terminated, so NEWLINE is a real token. A newline is
suppressed when the previous token cannot end a statement (after `=`, `,`,
`(`, `[`, `<`, `:`, `.`, `{` or a keyword like `as`), which lets declarations
wrap across lines the way the source figures do.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import SourceLoc

KEYWORDS = {
    "open",
    "class",
    "interface",
    "private",
    "constructor",
    "fun",
    "val",
    "var",
    "if",
    "else",
    "return",
    "as",
    "is",
    "out",
    "in",
}

PUNCT = ("(", ")", "{", "}", "[", "]", "<", ">", ",", ":", ".", "=", "?")

# A NEWLINE right after one of these continues the current construct.
_CONTINUATION_AFTER = {"=", ",", "(", "[", "<", ":", ".", "as", "is", "else"}

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class LexError(Exception):
    def __init__(self, message: str, loc: SourceLoc) -> None:
        super().__init__(f"{loc}: {message}")
        self.message = message
        self.loc = loc


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "int" | "string" | "newline" | "eof" | "@UnsafeVariance" | one of PUNCT
    text: str
    loc: SourceLoc


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line = 1
    col = 1
    i = 0
    n = len(source)

    def loc() -> SourceLoc:
        return SourceLoc(file, line, col)

    def push(kind: str, text: str, at: SourceLoc) -> None:
        tokens.append(Token(kind, text, at))

    def last_meaningful() -> Token | None:
        for t in reversed(tokens):
            if t.kind != "newline":
                return t
        return None

    while i < n:
        c = source[i]
        if c == "\n":
            prev = last_meaningful()
            suppress = (
                prev is None
                or prev.kind == "newline"
                or prev.text in _CONTINUATION_AFTER
                or (tokens and tokens[-1].kind == "newline")
            )
            if not suppress:
                push("newline", "\n", loc())
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        if c == "@":
            at = loc()
            word = "@UnsafeVariance"
            if source.startswith(word, i):
                push(word, word, at)
                i += len(word)
                col += len(word)
                continue
            raise LexError("unknown annotation (only @UnsafeVariance exists)", at)
        if c.isdigit():
            at = loc()
            j = i
            while j < n and source[j].isdigit():
                j += 1
            push("int", source[i:j], at)
            col += j - i
            i = j
            continue
        if c == '"':
            at = loc()
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError("unterminated string literal", at)
                ch = source[j]
                if ch == '"':
                    j += 1
                    break
                if ch == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        raise LexError("unknown string escape", SourceLoc(file, line, col + (j - i)))
                    buf.append(_ESCAPES[source[j + 1]])
                    j += 2
                    continue
                buf.append(ch)
                j += 1
            push("string", "".join(buf), at)
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            at = loc()
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            push("name", source[i:j], at)
            col += j - i
            i = j
            continue
        if c in PUNCT:
            push(c, c, loc())
            i += 1
            col += 1
            continue
        raise LexError(f"unexpected character {c!r}", loc())

    push("eof", "", loc())
    return tokens
