"""Bundled game instances and the plain-text instance format.

Format (one directive per line, ``#`` starts a comment, blank lines ignored)::

    states N
    s <id> g=<float> A=<k> B=<m>
    t <s> <a> <b> -> <s'>

``states`` comes first.  Every state ``0..N-1`` gets exactly one ``s`` line and
every triple ``(s, a, b)`` with ``a < A(s)``, ``b < B(s)`` exactly one ``t`` line.
Payoffs must lie in ``[0, 1]``.  The payoff depends on the state only; a game
whose payoff depends on the joint action is encoded by adding states that
record the last joint action.
"""

from __future__ import annotations

import os
import re

from .game import GameSpec


class InstanceFormatError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class UnknownInstance(KeyError):
    def __str__(self):
        return f"unknown instance {self.args[0]!r}; catalog: {', '.join(CATALOG)}"


_STATES = re.compile(r"^states\s+(\d+)$")
_STATE = re.compile(r"^s\s+(\d+)\s+g=(\S+)\s+A=(\d+)\s+B=(\d+)$")
_TRANS = re.compile(r"^t\s+(\d+)\s+(\d+)\s+(\d+)\s*->\s*(\d+)$")


def parse_instance(text: str, name: str = "game") -> GameSpec:
    n = None
    decl: dict[int, tuple[float, int, int]] = {}
    trans: dict[tuple[int, int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            m = _STATES.match(line)
            if not m:
                raise InstanceFormatError(lineno, "expected 'states N' first")
            n = int(m.group(1))
            if n < 1:
                raise InstanceFormatError(lineno, "need at least one state")
            continue
        if m := _STATE.match(line):
            s, a, b = int(m.group(1)), int(m.group(3)), int(m.group(4))
            try:
                g = float(m.group(2))
            except ValueError:
                raise InstanceFormatError(lineno, f"bad payoff {m.group(2)!r}") from None
            if s >= n:
                raise InstanceFormatError(lineno, f"state {s} out of range")
            if s in decl:
                raise InstanceFormatError(lineno, f"state {s} declared twice")
            if not 0.0 <= g <= 1.0:
                raise InstanceFormatError(lineno, f"payoff {g} outside [0, 1]")
            if a < 1 or b < 1:
                raise InstanceFormatError(lineno, "action counts must be positive")
            decl[s] = (g, a, b)
        elif m := _TRANS.match(line):
            s, a, b, t = (int(x) for x in m.groups())
            if s not in decl:
                raise InstanceFormatError(lineno, f"transition from undeclared state {s}")
            _, na, nb = decl[s]
            if a >= na or b >= nb:
                raise InstanceFormatError(lineno, f"action ({a},{b}) invalid in state {s}")
            if t >= n:
                raise InstanceFormatError(lineno, f"successor {t} out of range")
            if (s, a, b) in trans:
                raise InstanceFormatError(lineno, f"duplicate transition {(s, a, b)}")
            trans[(s, a, b)] = t
        else:
            raise InstanceFormatError(lineno, f"cannot parse {line!r}")
    if n is None:
        raise InstanceFormatError(0, "empty instance")
    missing = [s for s in range(n) if s not in decl]
    if missing:
        raise InstanceFormatError(0, f"undeclared states {missing}")
    table = []
    for s in range(n):
        _, na, nb = decl[s]
        rows = []
        for a in range(na):
            row = []
            for b in range(nb):
                if (s, a, b) not in trans:
                    raise InstanceFormatError(0, f"missing transition {(s, a, b)}")
                row.append(trans[(s, a, b)])
            rows.append(row)
        table.append(rows)
    return GameSpec.build([decl[s][0] for s in range(n)], table, name)


def format_instance(spec: GameSpec, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"states {spec.n_states}")
    for s, rows in enumerate(spec.transitions):
        lines.append(f"s {s} g={spec.payoff[s]!r} A={len(rows)} B={len(rows[0])}")
    for s, rows in enumerate(spec.transitions):
        for a, row in enumerate(rows):
            for b, t in enumerate(row):
                lines.append(f"t {s} {a} {b} -> {t}")
    return "\n".join(lines) + "\n"


def load_instance(path: str) -> GameSpec:
    with open(path) as fh:
        return parse_instance(fh.read(), os.path.splitext(os.path.basename(path))[0])


# -- catalog --------------------------------------------------------------------


def const_game(c: float = 0.7) -> GameSpec:
    return GameSpec.build([c], [[[0, 0], [0, 0]]], f"const({c:g})")


def cycle01() -> GameSpec:
    # both players have two actions, none of which matters
    return GameSpec.build([0.0, 1.0], [[[1, 1], [1, 1]], [[0, 0], [0, 0]]], "cycle01")


def match() -> GameSpec:
    # 0 = start, 1 = W (absorbing, g=1), 2 = L (absorbing, g=0)
    return GameSpec.build([0.0, 1.0, 0.0], [[[1, 2], [2, 1]], [[1]], [[2]]], "match")


def ergodic5() -> GameSpec:
    # turn-based: the maximizer moves in states 0, 2, 4, the minimizer in 1, 3
    return GameSpec.build(
        [0.0, 0.25, 0.5, 0.75, 1.0],
        [[[1], [2]],
         [[0, 3]],
         [[3], [4]],
         [[0, 2]],
         [[0], [3]]],
        "ergodic5")


def nonergodic2() -> GameSpec:
    # 0 = shared start (maximizer picks a class); {1, 2} cycles with mean 0.8,
    # {3, 4} cycles with mean 0.2
    return GameSpec.build(
        [0.5, 1.0, 0.6, 0.4, 0.0],
        [[[1], [3]],
         [[2]],
         [[1]],
         [[4]],
         [[3]]],
        "nonergodic2")


CATALOG = {
    "const": const_game,
    "cycle01": cycle01,
    "match": match,
    "ergodic5": ergodic5,
    "nonergodic2": nonergodic2,
}

INSTANCE_CARDS = {
    "const": "single state with payoff c (default 0.7); every value equals c",
    "cycle01": "two states with payoffs 0 and 1 alternating; actions have no effect",
    "match": "matching pennies into absorbing W (g=1) or L (g=0); no pure saddle point at the start",
    "ergodic5": "turn-based 5-state strongly connected game; pure saddle points everywhere",
    "nonergodic2": ("shared start feeding two absorbing cycles with long-run means 0.8 and 0.2; "
                    "limits exist and are uniform (finite state space) but depend on the state"),
}

SADDLE_INSTANCES = ("const", "cycle01", "ergodic5", "nonergodic2")


def get_instance(name: str) -> GameSpec:
    """Catalog lookup; ``const:<c>`` sets the constant, an existing path loads a file."""
    base, _, arg = name.partition(":")
    if base == "const":
        return const_game(float(arg)) if arg else const_game()
    if base in CATALOG and not arg:
        return CATALOG[base]()
    if os.path.exists(name):
        return load_instance(name)
    raise UnknownInstance(name)
