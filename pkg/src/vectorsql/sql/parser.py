"""Recursive-descent parser for canonical VectorSQL.

Grammar (informal)::

    query     := [WITH cte ("," cte)*] SELECT [DISTINCT] item ("," item)*
                 [FROM source join*] [WHERE expr] [GROUP BY expr ("," expr)*]
                 [HAVING expr] [ORDER BY order ("," order)*] [LIMIT int]
    cte       := name AS "(" query ")"
    source    := name [[AS] alias] | "(" query ")" [AS] alias
    join      := [INNER] JOIN source ON expr | LEFT [OUTER] JOIN source ON expr
    order     := expr [ASC|DESC]
               | DISTANCE "(" column "," target ["," metric] ")" [ASC]
    target    := EMBED "(" string ")" | "[" number ("," number)* "]"
    metric    := L2 | COSINE | DOT

A vector ORDER BY must be the only ordering key of its SELECT and requires a
LIMIT, which becomes the clause's ``k``.
"""

from __future__ import annotations

from typing import Optional

from .. import ast as A
from ..errors import SqlSyntaxError, UnsupportedConstructError
from ..model import Metric
from .lexer import UNSUPPORTED_KEYWORDS, Token, tokenize

_METRICS = {"l2": Metric.L2, "cosine": Metric.COSINE, "dot": Metric.DOT}
_COMPARISON_OPS = {"=", "!=", "<>", "<", "<=", ">", ">="}


def parse(text: str) -> A.Select:
    """Parse canonical VectorSQL text into a :class:`~vectorsql.ast.Select`."""
    return _Parser(tokenize(text)).parse_statement()


def parse_expression(text: str) -> A.Expr:
    parser = _Parser(tokenize(text))
    expr = parser.expr()
    parser.expect_eof()
    return expr


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.i = 0
        self.open_parens: list[Token] = []

    # -- token helpers -------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if self.i < len(self.tokens) - 1:
            self.i += 1
        if tok.is_op("("):
            self.open_parens.append(tok)
        elif tok.is_op(")") and self.open_parens:
            self.open_parens.pop()
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> SqlSyntaxError:
        tok = tok or self.tok
        if tok.kind == "EOF":
            if self.open_parens:
                paren = self.open_parens[-1]
                return SqlSyntaxError(f"unexpected end of input inside '(' ({message})", paren.line, paren.col)
            return SqlSyntaxError(f"unexpected end of input ({message})", tok.line, tok.col)
        if tok.kind == "KEYWORD" and tok.value in UNSUPPORTED_KEYWORDS:
            return UnsupportedConstructError(f"{tok.value} is not supported", tok.line, tok.col)
        return SqlSyntaxError(f"{message}, found {tok.value!r}", tok.line, tok.col)

    def unsupported(self, message: str, tok: Optional[Token] = None) -> UnsupportedConstructError:
        tok = tok or self.tok
        return UnsupportedConstructError(message, tok.line, tok.col)

    def expect_kw(self, name: str) -> Token:
        if not self.tok.is_kw(name):
            raise self.error(f"expected {name}")
        return self.advance()

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise self.error(f"expected {op!r}")
        return self.advance()

    def accept_kw(self, *names: str) -> Optional[Token]:
        if self.tok.is_kw(*names):
            return self.advance()
        return None

    def accept_op(self, *ops: str) -> Optional[Token]:
        if self.tok.is_op(*ops):
            return self.advance()
        return None

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind in ("IDENT", "QIDENT"):
            return self.advance()
        raise self.error(f"expected {what}")

    def expect_eof(self) -> None:
        if self.tok.kind != "EOF":
            raise self.error("expected end of input")

    # -- statements ----------------------------------------------------

    def parse_statement(self) -> A.Select:
        first = self.tok
        if first.is_kw("INSERT", "UPDATE", "DELETE"):
            raise self.unsupported(f"{first.value} statements are not supported")
        query = self.select()
        self.accept_op(";")
        self.expect_eof()
        return query

    def select(self) -> A.Select:
        start = self.tok
        ctes: list[A.CTE] = []
        if self.accept_kw("WITH"):
            if self.tok.is_kw("RECURSIVE"):
                raise self.unsupported("recursive CTEs are not supported")
            while True:
                name = self.ident("CTE name").value
                self.expect_kw("AS")
                self.expect_op("(")
                body = self.select()
                self.expect_op(")")
                ctes.append(A.CTE(name, body))
                if not self.accept_op(","):
                    break
        self.expect_kw("SELECT")
        distinct = bool(self.accept_kw("DISTINCT"))
        items = [self.select_item()]
        while self.accept_op(","):
            items.append(self.select_item())

        from_ = None
        if self.accept_kw("FROM"):
            from_ = self.from_clause()
        where = self.expr() if self.accept_kw("WHERE") else None
        group_by: list[A.Expr] = []
        if self.accept_kw("GROUP"):
            self.expect_kw("BY")
            group_by.append(self.expr())
            while self.accept_op(","):
                group_by.append(self.expr())
        having = self.expr() if self.accept_kw("HAVING") else None

        order_by: list[A.OrderItem] = []
        vector: Optional[A.VectorClause] = None
        vector_tok: Optional[Token] = None
        if self.accept_kw("ORDER"):
            self.expect_kw("BY")
            while True:
                if self._at_distance():
                    vector_tok = self.tok
                    if vector is not None:
                        raise self.unsupported("only one vector ordering per SELECT; use CTEs for more")
                    vector = self.vector_clause()
                else:
                    expr = self.expr()
                    desc = False
                    if self.accept_kw("DESC"):
                        desc = True
                    else:
                        self.accept_kw("ASC")
                    order_by.append(A.OrderItem(expr, desc))
                if not self.accept_op(","):
                    break
        limit: object = None
        if self.accept_kw("LIMIT"):
            limit = self.limit_value()
        if self.tok.is_kw("OFFSET"):
            raise self.unsupported("OFFSET is not supported")
        if self.tok.is_kw("UNION", "INTERSECT", "EXCEPT"):
            raise self.unsupported(f"set operation {self.tok.value} is not supported")

        if vector is not None:
            assert vector_tok is not None
            if order_by:
                raise self.unsupported("a vector ordering must be the only ORDER BY key", vector_tok)
            if limit is None:
                raise self.unsupported("a vector ordering requires LIMIT k", vector_tok)
            vector = A.VectorClause(vector.column, vector.target, vector.metric, limit, pos=vector.pos)
            limit = None
        return A.Select(
            items=tuple(items),
            from_=from_,
            where=where,
            group_by=tuple(group_by),
            having=having,
            order_by=tuple(order_by),
            vector=vector,
            limit=limit,
            distinct=distinct,
            ctes=tuple(ctes),
            pos=(start.line, start.col),
        )

    def limit_value(self):
        tok = self.tok
        if tok.kind == "PARAM":
            self.advance()
            return A.Param(int(tok.value), pos=(tok.line, tok.col))
        if tok.kind == "NUMBER" and tok.value.isdigit():
            self.advance()
            return int(tok.value)
        raise self.error("expected a non-negative integer LIMIT")

    def _at_distance(self) -> bool:
        return self.tok.kind == "IDENT" and self.tok.value == "distance" and self.peek().is_op("(")

    def vector_clause(self) -> A.VectorClause:
        start = self.advance()  # DISTANCE
        self.expect_op("(")
        column = self.column_ref()
        self.expect_op(",")
        target = self.vector_target()
        metric = Metric.L2
        if self.accept_op(","):
            tok = self.ident("metric name")
            if tok.value not in _METRICS:
                raise self.error("expected metric L2, COSINE or DOT", tok)
            metric = _METRICS[tok.value]
        self.expect_op(")")
        if self.tok.is_kw("DESC"):
            raise self.unsupported("vector ordering must be ascending by distance")
        self.accept_kw("ASC")
        return A.VectorClause(column, target, metric, 1, pos=(start.line, start.col))

    def vector_target(self):
        tok = self.tok
        if tok.kind == "PARAM":
            self.advance()
            return A.Param(int(tok.value), pos=(tok.line, tok.col))
        if tok.kind == "IDENT" and tok.value == "embed" and self.peek().is_op("("):
            self.advance()
            self.expect_op("(")
            inner = self.tok
            if inner.kind == "STRING":
                self.advance()
                text: object = inner.value
            elif inner.kind == "PARAM":
                self.advance()
                text = A.Param(int(inner.value), pos=(inner.line, inner.col))
            else:
                raise self.error("EMBED expects a string literal")
            self.expect_op(")")
            return A.EmbedText(text)
        if tok.is_op("["):
            self.advance()
            values = [self.signed_number()]
            while self.accept_op(","):
                values.append(self.signed_number())
            self.expect_op("]")
            return A.VectorLiteral(tuple(float(v) for v in values))
        raise self.error("expected EMBED('...') or a [..] vector literal")

    def signed_number(self) -> float:
        neg = bool(self.accept_op("-"))
        tok = self.tok
        if tok.kind != "NUMBER":
            raise self.error("expected a number")
        self.advance()
        value = float(tok.value)
        return -value if neg else value

    def column_ref(self) -> A.ColumnRef:
        first = self.ident("column reference")
        if self.accept_op("."):
            second = self.ident("column name")
            return A.ColumnRef(first.value, second.value, pos=(first.line, first.col))
        return A.ColumnRef(None, first.value, pos=(first.line, first.col))

    def select_item(self) -> A.SelectItem:
        tok = self.tok
        if tok.is_op("*"):
            self.advance()
            return A.SelectItem(A.Star(None, pos=(tok.line, tok.col)))
        if tok.kind in ("IDENT", "QIDENT") and self.peek().is_op(".") and self.peek(2).is_op("*"):
            self.advance()
            self.advance()
            self.advance()
            return A.SelectItem(A.Star(tok.value, pos=(tok.line, tok.col)))
        expr = self.expr()
        alias = None
        if self.accept_kw("AS"):
            alias = self.ident("alias").value
        elif self.tok.kind in ("IDENT", "QIDENT"):
            alias = self.advance().value
        return A.SelectItem(expr, alias)

    def from_clause(self) -> A.FromClause:
        source = self.source()
        joins: list[A.Join] = []
        while True:
            tok = self.tok
            if tok.is_op(","):
                raise self.unsupported("comma joins are not supported; use JOIN ... ON")
            if tok.is_kw("RIGHT", "FULL", "CROSS", "NATURAL"):
                raise self.unsupported(f"{tok.value} JOIN is not supported")
            if tok.is_kw("JOIN"):
                self.advance()
                kind = "INNER"
            elif tok.is_kw("INNER"):
                self.advance()
                self.expect_kw("JOIN")
                kind = "INNER"
            elif tok.is_kw("LEFT"):
                self.advance()
                self.accept_kw("OUTER")
                self.expect_kw("JOIN")
                kind = "LEFT"
            else:
                break
            src = self.source()
            if self.tok.is_kw("USING"):
                raise self.unsupported("JOIN ... USING is not supported")
            self.expect_kw("ON")
            on = self.expr()
            joins.append(A.Join(kind, src, on))
        return A.FromClause(source, tuple(joins))

    def source(self):
        tok = self.tok
        if tok.is_op("("):
            self.advance()
            query = self.select()
            self.expect_op(")")
            self.accept_kw("AS")
            alias = self.ident("derived table alias").value
            return A.SubqueryRef(query, alias, pos=(tok.line, tok.col))
        name = self.ident("table name")
        alias = None
        if self.accept_kw("AS"):
            alias = self.ident("alias").value
        elif self.tok.kind in ("IDENT", "QIDENT"):
            alias = self.advance().value
        return A.TableRef(name.value, alias, pos=(name.line, name.col))

    # -- expressions ---------------------------------------------------

    def expr(self) -> A.Expr:
        left = self.and_expr()
        while self.tok.is_kw("OR"):
            tok = self.advance()
            left = A.BinaryOp("OR", left, self.and_expr(), pos=(tok.line, tok.col))
        return left

    def and_expr(self) -> A.Expr:
        left = self.not_expr()
        while self.tok.is_kw("AND"):
            tok = self.advance()
            left = A.BinaryOp("AND", left, self.not_expr(), pos=(tok.line, tok.col))
        return left

    def not_expr(self) -> A.Expr:
        if self.tok.is_kw("NOT"):
            tok = self.advance()
            return A.UnaryOp("NOT", self.not_expr(), pos=(tok.line, tok.col))
        return self.comparison()

    def comparison(self) -> A.Expr:
        left = self.additive()
        tok = self.tok
        if tok.kind == "OP" and tok.value in _COMPARISON_OPS:
            self.advance()
            op = "!=" if tok.value == "<>" else tok.value
            return A.BinaryOp(op, left, self.additive(), pos=(tok.line, tok.col))
        if tok.is_kw("IS"):
            self.advance()
            negated = bool(self.accept_kw("NOT"))
            self.expect_kw("NULL")
            return A.IsNull(left, negated, pos=(tok.line, tok.col))
        negated = False
        if tok.is_kw("NOT") and self.peek().is_kw("IN", "BETWEEN", "LIKE"):
            self.advance()
            negated = True
            tok = self.tok
        if tok.is_kw("IN"):
            self.advance()
            self.expect_op("(")
            if self.tok.is_kw("SELECT", "WITH"):
                query = self.select()
                self.expect_op(")")
                return A.InSubquery(left, query, negated, pos=(tok.line, tok.col))
            items = [self.expr()]
            while self.accept_op(","):
                items.append(self.expr())
            self.expect_op(")")
            return A.InList(left, tuple(items), negated, pos=(tok.line, tok.col))
        if tok.is_kw("BETWEEN"):
            self.advance()
            low = self.additive()
            self.expect_kw("AND")
            high = self.additive()
            return A.Between(left, low, high, negated, pos=(tok.line, tok.col))
        if tok.is_kw("LIKE"):
            self.advance()
            return A.Like(left, self.additive(), negated, pos=(tok.line, tok.col))
        return left

    def additive(self) -> A.Expr:
        left = self.multiplicative()
        while self.tok.is_op("+", "-"):
            tok = self.advance()
            left = A.BinaryOp(tok.value, left, self.multiplicative(), pos=(tok.line, tok.col))
        if self.tok.is_op("||"):
            raise self.unsupported("string concatenation is not supported")
        return left

    def multiplicative(self) -> A.Expr:
        left = self.unary()
        while self.tok.is_op("*", "/", "%"):
            tok = self.advance()
            left = A.BinaryOp(tok.value, left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self) -> A.Expr:
        tok = self.tok
        if tok.is_op("-"):
            self.advance()
            if self.tok.kind == "NUMBER":
                lit = self.number()
                return A.Literal(-lit.value, pos=(tok.line, tok.col))
            return A.UnaryOp("-", self.unary(), pos=(tok.line, tok.col))
        if tok.is_op("+"):
            self.advance()
            return self.unary()
        return self.primary()

    def number(self) -> A.Literal:
        tok = self.advance()
        text = tok.value
        if any(c in text for c in ".eE"):
            return A.Literal(float(text), pos=(tok.line, tok.col))
        return A.Literal(int(text), pos=(tok.line, tok.col))

    def primary(self) -> A.Expr:
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "NUMBER":
            return self.number()
        if tok.kind == "STRING":
            self.advance()
            return A.Literal(tok.value, pos=pos)
        if tok.kind == "PARAM":
            self.advance()
            return A.Param(int(tok.value), pos=pos)
        if tok.is_kw("TRUE", "FALSE"):
            self.advance()
            return A.Literal(tok.value == "TRUE", pos=pos)
        if tok.is_kw("NULL"):
            self.advance()
            return A.Literal(None, pos=pos)
        if tok.is_kw("EXISTS", "CASE"):
            raise self.unsupported(f"{tok.value} expressions are not supported")
        if tok.is_op("("):
            self.advance()
            if self.tok.is_kw("SELECT", "WITH"):
                raise self.unsupported("scalar subqueries are not supported; use IN (SELECT ...)")
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.kind in ("IDENT", "QIDENT"):
            if tok.kind == "IDENT" and self.peek().is_op("("):
                return self.function_call()
            self.advance()
            if self.accept_op("."):
                if self.tok.is_op("*"):
                    raise self.unsupported("qualified * is only allowed in the select list")
                second = self.ident("column name")
                return A.ColumnRef(tok.value, second.value, pos=pos)
            return A.ColumnRef(None, tok.value, pos=pos)
        if tok.is_op("*"):
            raise self.error("'*' is only allowed in the select list or COUNT(*)")
        raise self.error("expected an expression")

    def function_call(self) -> A.Expr:
        name_tok = self.advance()
        name = name_tok.value.upper()
        pos = (name_tok.line, name_tok.col)
        if name in ("DISTANCE", "EMBED"):
            raise self.unsupported(f"{name} is only allowed as the vector ORDER BY key", name_tok)
        self.expect_op("(")
        distinct = bool(self.accept_kw("DISTINCT"))
        args: list[A.Expr] = []
        if self.tok.is_op("*"):
            star = self.advance()
            args.append(A.Star(None, pos=(star.line, star.col)))
        elif not self.tok.is_op(")"):
            args.append(self.expr())
            while self.accept_op(","):
                args.append(self.expr())
        self.expect_op(")")
        if self.tok.is_kw("OVER"):
            raise self.unsupported("window functions are not supported")
        if name not in A.AGGREGATES and name not in A.SCALAR_FUNCTIONS:
            raise UnsupportedConstructError(f"unknown function {name}", *pos)
        if any(isinstance(a, A.Star) for a in args) and (name != "COUNT" or len(args) != 1 or distinct):
            raise SqlSyntaxError("'*' argument is only valid as COUNT(*)", *pos)
        return A.FuncCall(name, tuple(args), distinct, pos=pos)
