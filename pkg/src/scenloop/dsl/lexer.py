"""Indentation-aware lexer for the scenario DSL.

Line structure follows the Python conventions the source listings use:
``#`` comments run to end of line, blank lines are invisible, lines join
implicitly inside brackets, and a line ending in a comma continues onto the
next line (that is how multi-specifier object declarations are written).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import SourceError, Span, error

# longest first so ``<=`` wins over ``<``
_OPERATORS = ["==", "!=", "<=", ">=", "<", ">", "=", "(", ")", "[", "]",
              ",", ":", ".", "+", "-", "*", "/"]


@dataclass(frozen=True)
class Token:
    kind: str  # NAME NUMBER STRING OP NEWLINE INDENT DEDENT EOF
    value: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col, self.col + max(len(self.value), 1))


def _is_name_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_name_char(c: str) -> bool:
    return c.isalnum() or c == "_"


class Lexer:
    def __init__(self, source: str):
        self.lines = source.splitlines()
        self.tokens: list[Token] = []
        self.indents = [0]
        self.bracket_depth = 0
        # set when the previous logical line ended with a trailing comma
        self.joining = False

    def run(self) -> list[Token]:
        for lineno, raw in enumerate(self.lines, start=1):
            self._lex_line(lineno, raw)
        if self.tokens and self.tokens[-1].kind != "NEWLINE":
            last = self.tokens[-1]
            self.tokens.append(Token("NEWLINE", "", last.line, last.col + len(last.value)))
        final_line = len(self.lines) + 1
        while len(self.indents) > 1:
            self.indents.pop()
            self.tokens.append(Token("DEDENT", "", final_line, 1))
        self.tokens.append(Token("EOF", "", final_line, 1))
        return self.tokens

    def _lex_line(self, lineno: int, raw: str) -> None:
        text = raw.expandtabs(8)
        stripped = text.strip()
        if not self.joining and self.bracket_depth == 0:
            if not stripped or stripped.startswith("#"):
                return
            self._handle_indent(lineno, text)
        pos = len(text) - len(text.lstrip(" "))
        self._lex_tokens(lineno, text, pos)

    def _handle_indent(self, lineno: int, text: str) -> None:
        width = len(text) - len(text.lstrip(" "))
        if width > self.indents[-1]:
            self.indents.append(width)
            self.tokens.append(Token("INDENT", "", lineno, 1))
        else:
            while width < self.indents[-1]:
                self.indents.pop()
                self.tokens.append(Token("DEDENT", "", lineno, 1))
            if width != self.indents[-1]:
                raise SourceError([error(
                    "SyntaxError", "unindent does not match any outer indentation level",
                    Span(lineno, width + 1, width + 2))])

    def _lex_tokens(self, lineno: int, text: str, pos: int) -> None:
        n = len(text)
        while pos < n:
            c = text[pos]
            if c == " ":
                pos += 1
                continue
            if c == "#":
                break
            col = pos + 1
            if _is_name_start(c):
                end = pos + 1
                while end < n and _is_name_char(text[end]):
                    end += 1
                self.tokens.append(Token("NAME", text[pos:end], lineno, col))
                pos = end
            elif c.isdigit():
                end = pos + 1
                while end < n and text[end].isdigit():
                    end += 1
                if end < n and text[end] == "." and end + 1 < n and text[end + 1].isdigit():
                    end += 2
                    while end < n and text[end].isdigit():
                        end += 1
                self.tokens.append(Token("NUMBER", text[pos:end], lineno, col))
                pos = end
            elif c in "'\"":
                pos = self._lex_string(lineno, text, pos)
            else:
                for op in _OPERATORS:
                    if text.startswith(op, pos):
                        self.tokens.append(Token("OP", op, lineno, col))
                        if op in "([":
                            self.bracket_depth += 1
                        elif op in ")]":
                            self.bracket_depth = max(0, self.bracket_depth - 1)
                        pos += len(op)
                        break
                else:
                    raise SourceError([error(
                        "LexicalError", f"unknown character {c!r}", Span(lineno, col, col + 1))])
        # end of physical line: decide whether the logical line continues
        if self.bracket_depth > 0:
            self.joining = False
            return
        if self.tokens and self.tokens[-1].kind == "OP" and self.tokens[-1].value == ",":
            self.joining = True
            return
        self.joining = False
        if self.tokens and self.tokens[-1].kind not in ("NEWLINE", "INDENT", "DEDENT"):
            self.tokens.append(Token("NEWLINE", "", lineno, len(text) + 1))

    def _lex_string(self, lineno: int, text: str, pos: int) -> int:
        quote = text[pos]
        col = pos + 1
        if text.startswith(quote * 3, pos):
            # triple-quoted strings in this grammar are single-line by the
            # time they reach the lexer; preprocess keeps docstrings separate
            closer = text.find(quote * 3, pos + 3)
            if closer < 0:
                raise SourceError([error(
                    "LexicalError", "unterminated triple-quoted string",
                    Span(lineno, col, len(text) + 1))])
            self.tokens.append(Token("STRING", text[pos + 3:closer], lineno, col))
            return closer + 3
        end = pos + 1
        chars: list[str] = []
        while end < len(text):
            c = text[end]
            if c == "\\" and end + 1 < len(text):
                esc = text[end + 1]
                chars.append({"n": "\n", "t": "\t"}.get(esc, esc))
                end += 2
                continue
            if c == quote:
                self.tokens.append(Token("STRING", "".join(chars), lineno, col))
                return end + 1
            chars.append(c)
            end += 1
        raise SourceError([error(
            "LexicalError", "unterminated string literal", Span(lineno, col, len(text) + 1))])


def tokenize(source: str) -> list[Token]:
    return Lexer(source).run()
