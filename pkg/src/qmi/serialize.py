"""JSON parsing for problem configs and canonical report rendering.

Configs are plain JSON. A complex matrix is either {"re": rows, "im": rows}
or nested row lists whose entries are numbers or [re, im] pairs; any value
that should be a matrix, channel, or POVM may instead be a string, read as
a path to another JSON file relative to the config's directory. Reports
render deterministically: sorted keys, fixed indentation, no timestamps,
and non-finite floats as the strings "inf", "-inf", "nan".
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from .capacity import CodingScheme, CqcInstance
from .channels import KrausChannel, Povm, make_channel, projective_povm
from .mutual import CompoundState
from .operators import DensityOperator, partial_trace
from .search import SearchBudget

LN2 = math.log(2.0)


class ConfigContext:
    """Resolves string-valued fields as JSON files relative to the config."""

    def __init__(self, base_dir: str | Path | None = None):
        self.base_dir = Path(base_dir) if base_dir is not None else Path(".")

    def resolve(self, obj):
        if isinstance(obj, str):
            path = self.base_dir / obj
            try:
                with open(path) as fh:
                    return json.load(fh)
            except OSError as exc:
                raise ValueError(f"cannot read referenced file {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ValueError(
                    f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
                ) from exc
        return obj


def _parse_entry(entry) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, list) and len(entry) == 2:
        return complex(float(entry[0]), float(entry[1]))
    raise ValueError(f"matrix entry {entry!r} is neither a number nor [re, im]")


def parse_matrix(obj, ctx: ConfigContext | None = None) -> np.ndarray:
    """Complex matrix from {"re", "im"} rows or nested entry lists."""
    if ctx is not None:
        obj = ctx.resolve(obj)
    if isinstance(obj, dict):
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ValueError(f"re/im shapes differ: {re.shape} vs {im.shape}")
        return re + 1j * im
    if not isinstance(obj, list) or not obj:
        raise ValueError("matrix must be a nonempty list of rows")
    rows = [[_parse_entry(e) for e in row] for row in obj]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("matrix rows have inconsistent lengths")
    return np.array(rows, dtype=complex)


def matrix_to_json(m) -> dict:
    a = np.asarray(m, dtype=complex)
    return {"re": np.real(a).tolist(), "im": np.imag(a).tolist()}


def parse_state(obj, ctx: ConfigContext | None = None) -> DensityOperator:
    return DensityOperator(parse_matrix(obj, ctx))


def parse_probability(obj, ctx: ConfigContext | None = None) -> np.ndarray:
    if ctx is not None:
        obj = ctx.resolve(obj)
    return np.asarray(obj, dtype=float)


def parse_channel(obj, ctx: ConfigContext | None = None) -> KrausChannel:
    """Channel from {"kind": ...} JSON; "kraus" takes explicit operators."""
    if ctx is not None:
        obj = ctx.resolve(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("channel must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "kraus":
        ops = [parse_matrix(op, ctx) for op in obj["ops"]]
        return KrausChannel(tuple(ops))
    if kind == "identity":
        return make_channel("identity", dim=int(obj["dim"]))
    if kind == "depolarizing":
        return make_channel("depolarizing", p=float(obj["p"]), dim=int(obj["dim"]))
    if kind == "amplitude_damping":
        return make_channel("amplitude_damping", gamma=float(obj["gamma"]))
    if kind == "phase_damping":
        return make_channel("phase_damping", lam=float(obj["lam"]))
    if kind == "unitary":
        return make_channel("unitary", u=parse_matrix(obj["matrix"], ctx))
    if kind == "cq":
        return make_channel("cq", states=[parse_matrix(s, ctx) for s in obj["states"]])
    if kind == "measure":
        return make_channel("measure", povm=parse_povm(obj["povm"], ctx))
    if kind == "classical":
        return make_channel("classical", transition=np.real(parse_matrix(obj["transition"], ctx)))
    raise ValueError(f"unknown channel kind {kind!r}")


def parse_povm(obj, ctx: ConfigContext | None = None) -> Povm:
    if ctx is not None:
        obj = ctx.resolve(obj)
    if isinstance(obj, dict) and "projective" in obj:
        return projective_povm(int(obj["projective"]))
    if isinstance(obj, dict) and "effects" in obj:
        obj = obj["effects"]
    if not isinstance(obj, list):
        raise ValueError("povm must be a list of effects or {'projective': dim}")
    return Povm(tuple(parse_matrix(e, ctx) for e in obj))


def parse_budget(obj, seed_override: int | None = None) -> SearchBudget:
    obj = obj or {}
    if not isinstance(obj, dict):
        raise ValueError("budget must be an object")
    budget = SearchBudget(
        restarts=int(obj.get("restarts", SearchBudget.restarts)),
        max_evals=int(obj.get("max_evals", SearchBudget.max_evals)),
        seed=int(obj.get("seed", SearchBudget.seed)),
        tol=float(obj.get("tol", SearchBudget.tol)),
    )
    if seed_override is not None:
        budget = replace(budget, seed=int(seed_override))
    return budget


def budget_to_json(b: SearchBudget) -> dict:
    return {"restarts": b.restarts, "max_evals": b.max_evals, "seed": b.seed, "tol": b.tol}


def parse_cqc_instance(obj: dict, ctx: ConfigContext | None = None) -> CqcInstance:
    weights = parse_probability(obj["weights"], ctx)
    coding = CodingScheme(tuple(parse_state(s, ctx) for s in obj["coding"]))
    channel = parse_channel(obj["channel"], ctx)
    decoding = parse_povm(obj["decoding"], ctx)
    return CqcInstance(weights=weights, coding=coding, channel=channel, decoding=decoding)


def parse_compound(obj: dict, ctx: ConfigContext | None = None) -> CompoundState:
    theta = parse_matrix(obj["theta"], ctx)
    d_g, d_k = (int(x) for x in obj["dims"])
    return CompoundState(
        theta=DensityOperator(theta),
        d_g=d_g,
        d_k=d_k,
        input_marginal=DensityOperator(partial_trace(theta, (d_g, d_k), keep=0)),
        output_marginal=DensityOperator(partial_trace(theta, (d_g, d_k), keep=1)),
    )


def compound_to_json(c: CompoundState) -> dict:
    return {"theta": matrix_to_json(c.theta.matrix), "d_g": c.d_g, "d_k": c.d_k}


def classification_to_json(cls) -> dict:
    return {
        "class": cls.tag,
        "off_diag_norm": cls.off_diag_norm,
        "max_commutator": cls.max_commutator,
    }


def to_jsonable(obj):
    """Canonical JSON form: non-finite floats become strings, arrays nest."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return to_jsonable(float(obj))
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj) if obj.ndim == 2 else {
                "re": np.real(obj).tolist(),
                "im": np.imag(obj).tolist(),
            }
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def convert_nats_to_bits(tree):
    """Rename every "nats" key to "bits", dividing its value by ln 2."""
    if isinstance(tree, dict):
        out = {}
        for k, v in tree.items():
            if k == "nats":
                out["bits"] = v / LN2 if isinstance(v, (int, float)) and math.isfinite(v) else v
            else:
                out[k] = convert_nats_to_bits(v)
        return out
    if isinstance(tree, list):
        return [convert_nats_to_bits(x) for x in tree]
    return tree


def render_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
    elif isinstance(value, list) and all(
        isinstance(x, (int, float, str, bool)) or x is None for x in value
    ):
        rows.append((prefix, json.dumps(value)))
    elif isinstance(value, list):
        for i, x in enumerate(value):
            _flatten(f"{prefix}.{i}", x, rows)
    else:
        rows.append((prefix, value))


def report_to_csv(report: dict) -> str:
    rows: list = []
    _flatten("", to_jsonable(report), rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in rows:
        writer.writerow([key, value])
    return buf.getvalue()
