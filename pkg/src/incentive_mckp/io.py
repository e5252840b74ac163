"""JSON files for instances and policies.

Floats are written with ``repr`` precision so that a load/save cycle is
bit-exact and saving twice gives byte-identical files.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ParseError, SchemaError
from .model import BANNED, Alternative, Individual, Instance, Policy


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {type(value).__name__}", path)
    if not math.isfinite(value):
        raise SchemaError("number must be finite", path)
    return float(value)


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected an integer, got {value!r}", path)
    return value


def _object(value, path, required=()):
    if not isinstance(value, dict):
        raise SchemaError(f"expected an object, got {type(value).__name__}", path)
    for key in required:
        if key not in value:
            raise SchemaError(f"missing field {key!r}", path)
    return value


def _list(value, path):
    if not isinstance(value, list):
        raise SchemaError(f"expected a list, got {type(value).__name__}", path)
    return value


def _parse(text: str):
    def reject_constant(name):
        raise ValueError(f"non-finite constant {name}")

    try:
        return json.loads(text, parse_constant=reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise ParseError(str(exc), 0, 0) from None


def instance_to_dict(instance: Instance) -> dict:
    return {
        "money_unit": instance.money_unit,
        "welfare_unit": instance.welfare_unit,
        "individuals": [
            {
                "id": ind.individual_id,
                "alternatives": [
                    {"id": a.alt_id, "utility": a.utility, "social": a.social}
                    for a in ind.alternatives
                ],
            }
            for ind in instance.individuals
        ],
    }


def instance_from_dict(data) -> Instance:
    _object(data, "$", required=("individuals",))
    individuals = []
    seen = set()
    for n, raw in enumerate(_list(data["individuals"], "$.individuals")):
        path = f"$.individuals[{n}]"
        _object(raw, path, required=("id", "alternatives"))
        iid = _integer(raw["id"], path + ".id")
        if iid in seen:
            raise SchemaError(f"duplicate individual id {iid}", path + ".id")
        seen.add(iid)
        alts = []
        alt_ids = set()
        raw_alts = _list(raw["alternatives"], path + ".alternatives")
        if not raw_alts:
            raise SchemaError("an individual needs at least one alternative",
                              path + ".alternatives")
        for m, ra in enumerate(raw_alts):
            apath = f"{path}.alternatives[{m}]"
            _object(ra, apath, required=("id", "utility", "social"))
            aid = _integer(ra["id"], apath + ".id")
            if aid in alt_ids:
                raise SchemaError(f"duplicate alternative id {aid}", apath + ".id")
            alt_ids.add(aid)
            alts.append(Alternative(aid, _number(ra["utility"], apath + ".utility"),
                                    _number(ra["social"], apath + ".social")))
        individuals.append(Individual(iid, tuple(alts)))
    money = data.get("money_unit", "EUR")
    welfare = data.get("welfare_unit", "welfare")
    for key, val in (("money_unit", money), ("welfare_unit", welfare)):
        if not isinstance(val, str):
            raise SchemaError("expected a string", f"$.{key}")
    return Instance(tuple(individuals), money, welfare)


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), allow_nan=False) + "\n"


def loads_instance(text: str) -> Instance:
    return instance_from_dict(_parse(text))


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(dumps_instance(instance), encoding="utf-8", newline="\n")


def load_instance(path) -> Instance:
    return loads_instance(Path(path).read_text(encoding="utf-8"))


def policy_to_dict(policy: Policy) -> dict:
    rows = []
    for (iid, jid), t in sorted(policy.transfers.items(), key=lambda kv: kv[0]):
        if t is BANNED:
            rows.append({"individual": iid, "alternative": jid, "banned": True})
        else:
            rows.append({"individual": iid, "alternative": jid, "amount": float(t)})
    return {"transfers": rows}


def policy_from_dict(data) -> Policy:
    _object(data, "$", required=("transfers",))
    transfers = {}
    for n, row in enumerate(_list(data["transfers"], "$.transfers")):
        path = f"$.transfers[{n}]"
        _object(row, path, required=("individual", "alternative"))
        key = (_integer(row["individual"], path + ".individual"),
               _integer(row["alternative"], path + ".alternative"))
        if key in transfers:
            raise SchemaError(f"duplicate transfer for {key}", path)
        if row.get("banned") is True:
            transfers[key] = BANNED
        elif "amount" in row:
            transfers[key] = _number(row["amount"], path + ".amount")
        else:
            raise SchemaError("transfer needs 'amount' or 'banned': true", path)
    return Policy(transfers)


def dumps_policy(policy: Policy) -> str:
    return json.dumps(policy_to_dict(policy), allow_nan=False) + "\n"


def save_policy(policy: Policy, path) -> None:
    Path(path).write_text(dumps_policy(policy), encoding="utf-8", newline="\n")


def load_policy(path) -> Policy:
    return policy_from_dict(_parse(Path(path).read_text(encoding="utf-8")))
