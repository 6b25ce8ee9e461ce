"""CSV and JSON persistence. Output bytes depend only on the values written."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .contract import ContractItem, ContractMenu
from .forksim import PcSample
from .params import FitParams
from .profiles import TypeProfile
from .validation import ValidationError

SAMPLE_COLUMNS = ("z", "p_l", "c_norm", "trials", "wins", "p_c_hat")
MECHANISM_COLUMNS = ("mechanism", "epsilon", "blockchain_utility")
PC_SURFACE_COLUMNS = ("z", "p_l", "c_norm", "p_c_hat", "p_c_fit")
EG_SURFACE_COLUMNS = ("h", "c", "p", "e_b", "g")
MENU_COLUMNS = ("index", "lambda", "q", "s", "b", "e", "expected_reward", "device_utility")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, columns, rows) -> Path:
    """Write ``rows`` (sequences or objects with attributes named by ``columns``)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if not isinstance(row, (list, tuple)):
                row = [getattr(row, c) for c in columns]
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path, columns) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(columns) - set(reader.fieldnames or ())
        if missing:
            raise ValidationError(str(path), f"missing columns {sorted(missing)}")
        return list(reader)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    path.write_text(text, encoding="utf-8")
    return path


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(str(path), f"not valid JSON: {exc}") from None


def write_samples(path, samples) -> Path:
    return write_csv(path, SAMPLE_COLUMNS, samples)


def read_samples(path) -> list[PcSample]:
    out = []
    for row in read_csv(path, SAMPLE_COLUMNS):
        out.append(
            PcSample(
                int(row["z"]), float(row["p_l"]), float(row["c_norm"]),
                int(row["trials"]), float(row["wins"]), float(row["p_c_hat"]),
            )
        )
    return out


def read_fit(path) -> FitParams:
    data = read_json(path)
    try:
        return FitParams(
            float(data["beta1"]), float(data["beta2"]), float(data["beta3"]),
            adj_r_squared=data.get("adj_r_squared"), rmse=data.get("rmse"),
            z=data.get("z"), p_l=data.get("p_l"),
        )
    except KeyError as exc:
        raise ValidationError(str(path), f"missing key {exc}") from None


def menu_to_dict(menu: ContractMenu) -> dict:
    utils = menu.device_utilities()
    records = []
    for t, item, u in zip(menu.types, menu.items, utils):
        records.append(
            {
                "index": t.index,
                "lambda": t.lam,
                "q": t.q,
                "s": item.salary,
                "b": item.unit_bonus,
                "e": item.block_count,
                "expected_reward": item.total_reward,
                "device_utility": float(u),
                "g": t.g,
                "f": t.f,
            }
        )
    return {
        "types": records,
        "blockchain_utility": menu.blockchain_utility,
        "pools": [list(p) for p in menu.pools],
        "flagged": list(menu.flagged),
        "theta": menu.theta,
        "epsilon": menu.epsilon,
        "z": menu.z,
    }


def menu_from_dict(data: dict) -> ContractMenu:
    try:
        records = data["types"]
        types = tuple(
            TypeProfile(int(r["index"]), float(r["lambda"]), float(r["q"]), float(r["g"]), float(r["f"]))
            for r in records
        )
        items = tuple(
            ContractItem(float(r["s"]), float(r["b"]), float(r["e"]), float(r["expected_reward"]))
            for r in records
        )
        return ContractMenu(
            items, types, float(data["blockchain_utility"]),
            tuple(tuple(p) for p in data.get("pools", [])),
            tuple(data.get("flagged", [])),
            float(data["theta"]), float(data["epsilon"]), int(data["z"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("menu", f"malformed menu document: {exc}") from None


def write_menu_csv(path, menu: ContractMenu) -> Path:
    utils = menu.device_utilities()
    rows = [
        (t.index, t.lam, t.q, it.salary, it.unit_bonus, it.block_count, it.total_reward, float(u))
        for t, it, u in zip(menu.types, menu.items, utils)
    ]
    return write_csv(path, MENU_COLUMNS, rows)


def same_context(a_z, a_pl, b_z, b_pl) -> bool:
    if a_z is None or a_pl is None or b_z is None or b_pl is None:
        return True
    return int(a_z) == int(b_z) and math.isclose(float(a_pl), float(b_pl), rel_tol=1e-12)
