"""Brute-force query evaluator used as an independent oracle.

Deliberately naive: each pattern is matched by scanning every triple in
the graph, solutions are built pattern-by-pattern in the order written,
and grouping/ordering are reimplemented from the semantics contract.  It
shares no evaluation code with the production engine.
"""

from andmalkg.query import CountAgg, Var
from andmalkg.rdf import term_to_ntriples

_OPS = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
}


def _match_one(triples, pattern, binding):
    out = []
    for t in triples:
        candidate = dict(binding)
        ok = True
        for part, value in (
            (pattern.s, t.subject),
            (pattern.p, t.predicate),
            (pattern.o, t.object),
        ):
            if isinstance(part, Var):
                if part.name in candidate:
                    if candidate[part.name] != value:
                        ok = False
                        break
                else:
                    candidate[part.name] = value
            elif part != value:
                ok = False
                break
        if ok:
            out.append(candidate)
    return out


def _cell_key(value):
    if isinstance(value, int):
        return (0, value, "")
    return (1, 0, term_to_ntriples(value))


def evaluate_reference(graph, ast):
    """Returns rows as a list of dicts keyed like the engine's headers."""
    triples = list(graph)
    solutions = [{}]
    for pattern in ast.where:
        next_solutions = []
        for binding in solutions:
            next_solutions.extend(_match_one(triples, pattern, binding))
        solutions = next_solutions

    aggs = [item for item in ast.select if isinstance(item, CountAgg)]
    header = [
        f"?{item.name}" if isinstance(item, Var) else f"?{item.alias}"
        for item in ast.select
    ]
    rows = []
    if ast.group_by or aggs:
        groups = {}
        for sol in solutions:
            if any(v.name not in sol for v in ast.group_by):
                continue
            key = tuple(term_to_ntriples(sol[v.name]) for v in ast.group_by)
            groups.setdefault(key, []).append(sol)
        for sols in groups.values():
            if ast.having is not None:
                count = sum(1 for s in sols if ast.having.var.name in s)
                if not _OPS[ast.having.op](count, ast.having.value):
                    continue
            row = {}
            for item in ast.select:
                if isinstance(item, Var):
                    row[f"?{item.name}"] = sols[0][item.name]
                else:
                    row[f"?{item.alias}"] = sum(1 for s in sols if item.var.name in s)
            rows.append(row)
    else:
        for sol in solutions:
            if all(item.name in sol for item in ast.select):
                rows.append({f"?{item.name}": sol[item.name] for item in ast.select})

    rows.sort(key=lambda r: tuple(_cell_key(r[name]) for name in header))
    if ast.order_by is not None:
        name, direction = ast.order_by
        rows.sort(key=lambda r: _cell_key(r[f"?{name}"]), reverse=(direction == "DESC"))
    if ast.limit is not None:
        rows = rows[: ast.limit]
    return header, rows


def rows_as_text(header, rows):
    """Canonical comparable form: tuples of cell texts in header order."""
    def cell(value):
        if isinstance(value, int):
            return str(value)
        return term_to_ntriples(value)

    return [tuple(cell(row[name]) for name in header) for row in rows]
