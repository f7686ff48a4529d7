"""Scenario files: JSON schema, loading, and random generation.

A scenario is a JSON object with either normalized gains (``"V"`` + ``"z"``)
or raw measurements (``"G"`` + ``"sigma2"``), plus ``"gamma"``, the
constraint matrix ``"C"``, budgets ``"p_hat"`` and an optional
``"utility"``: ``{"kind": "log"}`` or ``{"kind": "negpow", "n": 1}``.
Matrices are row-major arrays of arrays; every number is an IEEE-754
double.  Raw measurements are normalized once at load.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InvalidScenario, NotIrreducible, SirBalanceError
from .model import (
    ConstraintPolytope,
    NetworkModel,
    RawChannel,
    UtilitySpec,
    normalize_channel,
)
from .spectral import is_irreducible

Scenario = tuple[NetworkModel, ConstraintPolytope, UtilitySpec]


def _parse_utility(obj) -> UtilitySpec:
    if obj is None:
        return UtilitySpec.log()
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidScenario('"utility" must be an object with a "kind" field')
    kind = obj["kind"]
    if kind == "log":
        return UtilitySpec.log()
    if kind == "negpow":
        if "n" not in obj:
            raise InvalidScenario('negpow utility requires an "n" field')
        return UtilitySpec.negpow(int(obj["n"]))
    raise InvalidScenario(f"unknown utility kind {kind!r}")


def from_dict(data: dict) -> Scenario:
    """Build a validated scenario from a parsed JSON object."""
    if not isinstance(data, dict):
        raise InvalidScenario("scenario must be a JSON object")
    try:
        gamma = np.asarray(data["gamma"], dtype=float)
        if "V" in data or "z" in data:
            if "V" not in data or "z" not in data:
                raise InvalidScenario('normalized form requires both "V" and "z"')
            model = NetworkModel(data["V"], data["z"], gamma)
        elif "G" in data or "sigma2" in data:
            if "G" not in data or "sigma2" not in data:
                raise InvalidScenario('raw form requires both "G" and "sigma2"')
            model = normalize_channel(RawChannel(data["G"], data["sigma2"]), gamma)
        else:
            raise InvalidScenario('scenario needs either "V"/"z" or "G"/"sigma2"')
        poly = ConstraintPolytope(data["C"], data["p_hat"])
        utility = _parse_utility(data.get("utility"))
    except KeyError as exc:
        raise InvalidScenario(f"missing required field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise InvalidScenario(f"malformed scenario value: {exc}") from exc
    except SirBalanceError as exc:
        raise InvalidScenario(str(exc)) from exc
    if model.K != poly.K:
        raise InvalidScenario(
            f"gain matrix has {model.K} links but C has {poly.K} columns"
        )
    return model, poly, utility


def to_dict(
    model: NetworkModel, poly: ConstraintPolytope, utility: UtilitySpec | None = None
) -> dict:
    data = {
        "V": model.V.tolist(),
        "z": model.z.tolist(),
        "gamma": model.gamma.tolist(),
        "C": poly.C.tolist(),
        "p_hat": poly.p_hat.tolist(),
    }
    if utility is not None:
        if utility.kind == "log":
            data["utility"] = {"kind": "log"}
        else:
            data["utility"] = {"kind": "negpow", "n": utility.n}
    return data


def load(path) -> Scenario:
    """Load and validate a scenario file.

    JSON syntax errors propagate as json.JSONDecodeError (with line/column);
    semantic problems raise InvalidScenario.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return from_dict(data)


def dumps(data: dict) -> str:
    """Canonical serialization: sorted keys, two-space indent, LF endings."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


GENERATOR_KINDS = ("individual", "sum", "mixed")


def generate(K: int, N: int, seed: int, kind: str = "individual", max_retries: int = 100) -> dict:
    """Random irreducible scenario as a JSON-ready dict; deterministic per seed.

    Off-diagonal gains are uniform(0.01, 0.5/K), noise uniform(0.01, 0.2)
    and all targets 1.  ``kind`` selects the constraint structure:
    per-link budgets (N must equal K), one total-power budget (N must be 1),
    or a total budget plus N-1 random link groups.  Regenerates until every
    extended matrix is irreducible.
    """
    if K < 2:
        raise InvalidScenario("need K >= 2")
    if kind not in GENERATOR_KINDS:
        raise InvalidScenario(f"kind must be one of {GENERATOR_KINDS}, got {kind!r}")
    if kind == "individual" and N != K:
        raise InvalidScenario("individual constraints require N == K")
    if kind == "sum" and N != 1:
        raise InvalidScenario("a sum constraint requires N == 1")
    if N < 1:
        raise InvalidScenario("need N >= 1")

    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        V = rng.uniform(0.01, 0.5 / K, size=(K, K))
        np.fill_diagonal(V, 0.0)
        z = rng.uniform(0.01, 0.2, size=K)
        gamma = np.ones(K)

        if kind == "individual":
            C = np.eye(K)
        elif kind == "sum":
            C = np.ones((1, K))
        else:
            C = np.zeros((N, K))
            C[0] = 1.0  # total budget covers every column
            for n in range(1, N):
                row = rng.integers(0, 2, size=K).astype(float)
                if row.sum() == 0:
                    row[rng.integers(0, K)] = 1.0
                C[n] = row
        # Budgets scale with the number of covered links.
        p_hat = rng.uniform(0.5, 1.5, size=N) * np.maximum(C.sum(axis=1) / 2.0, 1.0)

        model = NetworkModel(V, z, gamma)
        poly = ConstraintPolytope(C, p_hat)
        Gz = model.gamma_z()
        B = model.gamma_V()[None, :, :] + Gz[None, :, None] * (
            poly.C / poly.p_hat[:, None]
        )[:, None, :]
        if all(is_irreducible(B[n]) for n in range(N)):
            return to_dict(model, poly, UtilitySpec.log())
    raise NotIrreducible(
        f"could not draw an irreducible scenario in {max_retries} attempts"
    )
