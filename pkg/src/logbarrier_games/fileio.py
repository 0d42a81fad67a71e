"""Game files (JSON) and run records (CSV).

Matrix file::

    {"type": "matrix", "loss": [[...], ...], "feedback": "bernoulli"}

Extensive-form file; loss and transition keys are ``"a,b"`` action pairs::

    {"type": "efg", "horizon": 2, "root": "r", "feedback": "bernoulli",
     "states": [{"id": "r", "depth": 1, "infoset_min": "x", "infoset_max": "y",
                 "losses": {"0,0": 0.5, ...},
                 "transitions": {"0,0": [["c", 1.0]], ...}}, ...]}
"""

import csv
import json
import math
from typing import NamedTuple

import numpy as np

from .efg import ExtensiveFormGame, State, validate_game
from .errors import GameFormatError
from .matrix import FEEDBACK_MODES, MatrixGame

RECORD_COLUMNS = ("t", "eg", "d_tau", "tau_t", "eta_t", "min_prob_min", "min_prob_max", "bound")


class RunRecord(NamedTuple):
    """One logged row. ``bound`` is ``2 K tau_t``."""

    t: int
    eg: float
    d_tau: float
    tau_t: float
    eta_t: float
    min_prob_min: float
    min_prob_max: float
    bound: float


def _real(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GameFormatError(f"expected a number, got {value!r}", field=where)
    value = float(value)
    if not math.isfinite(value):
        raise GameFormatError("value must be finite", field=where)
    return value


def _loss(value, where):
    value = _real(value, where)
    if not 0.0 <= value <= 1.0:
        raise GameFormatError(f"loss {value!r} outside [0, 1]", field=where)
    return value


def _pair(key, where):
    try:
        a, b = (int(p) for p in key.split(","))
    except (ValueError, AttributeError):
        raise GameFormatError(f"action pair key must look like 'a,b', got {key!r}",
                              field=where) from None
    if a < 0 or b < 0:
        raise GameFormatError(f"negative action index in {key!r}", field=where)
    return a, b


def _ident(value, where):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise GameFormatError(f"ids must be strings or integers, got {value!r}", field=where)
    return value


def _feedback(doc):
    mode = doc.get("feedback", "bernoulli")
    if mode not in FEEDBACK_MODES:
        raise GameFormatError(f"unknown feedback mode {mode!r}", field="feedback")
    return mode


def parse_matrix(doc):
    rows = doc.get("loss")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise GameFormatError("'loss' must be a non-empty list of rows", field="loss")
    if len({len(r) for r in rows}) != 1:
        raise GameFormatError("rows of 'loss' differ in length", field="loss")
    L = [[_loss(v, f"loss[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]
    if len(L) < 2 or len(L[0]) < 2:
        raise GameFormatError("each player needs at least 2 actions", field="loss")
    return MatrixGame(np.array(L), _feedback(doc))


def parse_efg(doc):
    horizon = doc.get("horizon")
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise GameFormatError("'horizon' must be a positive integer", field="horizon")
    if "root" not in doc:
        raise GameFormatError("missing 'root'", field="root")
    raw_states = doc.get("states")
    if not isinstance(raw_states, list) or not raw_states:
        raise GameFormatError("'states' must be a non-empty list", field="states")
    states = []
    for k, st in enumerate(raw_states):
        here = f"states[{k}]"
        if not isinstance(st, dict):
            raise GameFormatError("state must be an object", field=here)
        for name in ("id", "depth", "infoset_min", "infoset_max", "losses"):
            if name not in st:
                raise GameFormatError(f"missing '{name}'", field=here)
        depth = st["depth"]
        if isinstance(depth, bool) or not isinstance(depth, int):
            raise GameFormatError("depth must be an integer", field=f"{here}.depth")
        if not isinstance(st["losses"], dict) or not st["losses"]:
            raise GameFormatError("losses must be a non-empty object", field=f"{here}.losses")
        entries = {}
        for key, v in st["losses"].items():
            where = f"{here}.losses['{key}']"
            entries[_pair(key, where)] = _loss(v, where)
        A = 1 + max(a for a, _ in entries)
        B = 1 + max(b for _, b in entries)
        if len(entries) != A * B:
            raise GameFormatError(f"losses must cover the full {A}x{B} action grid",
                                  field=f"{here}.losses")
        L = np.zeros((A, B))
        for (a, b), v in entries.items():
            L[a, b] = v
        trans = {}
        raw_trans = st.get("transitions", {})
        if not isinstance(raw_trans, dict):
            raise GameFormatError("transitions must be an object", field=f"{here}.transitions")
        for key, branches in raw_trans.items():
            where = f"{here}.transitions['{key}']"
            if not isinstance(branches, list):
                raise GameFormatError("expected a list of [child, probability]", field=where)
            out = []
            for j, br in enumerate(branches):
                if not isinstance(br, list) or len(br) != 2:
                    raise GameFormatError("expected [child, probability]", field=f"{where}[{j}]")
                out.append((_ident(br[0], f"{where}[{j}]"), _real(br[1], f"{where}[{j}]")))
            trans[_pair(key, where)] = out
        states.append(State(_ident(st["id"], f"{here}.id"), depth,
                            _ident(st["infoset_min"], f"{here}.infoset_min"),
                            _ident(st["infoset_max"], f"{here}.infoset_max"), L, trans))
    game = ExtensiveFormGame(horizon, states, _ident(doc["root"], "root"), _feedback(doc),
                             check=False)
    diag = validate_game(game)
    if diag is not None:
        raise GameFormatError(diag.message, field=diag.kind)
    return ExtensiveFormGame(horizon, states, doc["root"], game.feedback_mode)


def loads_game(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise GameFormatError("top level must be an object")
    kind = doc.get("type")
    if kind == "matrix":
        return parse_matrix(doc)
    if kind == "efg":
        return parse_efg(doc)
    raise GameFormatError(f"unknown game type {kind!r}", field="type")


def load_game(path):
    with open(path, encoding="utf-8") as fh:
        return loads_game(fh.read())


def game_to_doc(game):
    if isinstance(game, MatrixGame):
        return {"type": "matrix", "loss": game.mean_loss.tolist(),
                "feedback": game.feedback_mode}
    states = []
    for s in game.states:
        A, B = s.losses.shape
        states.append({
            "id": s.id, "depth": s.depth,
            "infoset_min": s.infoset_min, "infoset_max": s.infoset_max,
            "losses": {f"{a},{b}": float(s.losses[a, b]) for a in range(A) for b in range(B)},
            "transitions": {f"{a},{b}": [[c, p] for c, p in br]
                            for (a, b), br in sorted(s.transitions.items())},
        })
    return {"type": "efg", "horizon": game.horizon, "root": game.root,
            "feedback": game.feedback_mode, "states": states}


def save_game(game, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game_to_doc(game), fh, indent=1)
        fh.write("\n")


def write_records(records, path):
    """CSV with the fixed record columns; floats in shortest round-trip form."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([r.t] + [repr(float(v)) for v in r[1:]])


def read_records(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != RECORD_COLUMNS:
            raise GameFormatError(f"unexpected CSV header {header!r}", line=1)
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(RunRecord(int(row[0]), *(float(v) for v in row[1:])))
            except (ValueError, TypeError):
                raise GameFormatError(f"malformed record {row!r}", line=lineno) from None
        return out
