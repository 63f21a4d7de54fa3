"""JSON run-configuration parsing for the command line front end.

A configuration is a single JSON document with matrices as row-major nested
arrays. Parsing either yields a fully validated problem bundle or fails with
a field-precise :class:`ConfigError`.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MpctError
from .pendulum import PENDULUM_SCALE, PENDULUM_TS, PendulumParams, SimConfig
from .problem import (
    CostWeights,
    MpctConfig,
    PenaltyParams,
    SystemModel,
    build_rho,
    validate_problem,
)


@dataclass
class RunConfig:
    """Parsed and validated run configuration."""

    problem: object  # ValidatedProblem
    sim: SimConfig
    pendulum: PendulumParams
    x0_physical: np.ndarray
    reference: np.ndarray
    warmstart: bool
    seed: int
    output: str = None


def _get(doc, path, default=None, required=False):
    node = doc
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(path, "missing required field")
            return default
        node = node[part]
    return node


def _array(doc, path, required=True, default=None):
    val = _get(doc, path, required=required, default=default)
    if val is None:
        return None
    try:
        return np.asarray(val, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"not a numeric array: {exc}") from None


def _parse_rho(doc, model, config):
    spec = _get(doc, "rho", required=True)
    try:
        if isinstance(spec, (int, float)):
            return build_rho(model, config, float(spec), float(spec))
        if isinstance(spec, dict) and "base" in spec:
            return build_rho(model, config, float(spec["base"]), float(spec["boost"]))
        if isinstance(spec, dict) and "rho0" in spec:
            return PenaltyParams(
                rho0=np.asarray(spec["rho0"], dtype=float),
                rho_s=np.asarray(spec["rho_s"], dtype=float),
                rho_hat=np.asarray(spec["rho_hat"], dtype=float),
            )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, MpctError) as exc:
        raise ConfigError("rho", str(exc)) from None
    raise ConfigError("rho", "expected a scalar, {base, boost} or {rho0, rho_s, rho_hat}")


def parse_config(doc):
    """Build a RunConfig from a decoded JSON document."""
    try:
        model = SystemModel(
            A=_array(doc, "model.A"),
            B=_array(doc, "model.B"),
            x_lb=_array(doc, "model.x_lb"),
            x_ub=_array(doc, "model.x_ub"),
            u_lb=_array(doc, "model.u_lb"),
            u_ub=_array(doc, "model.u_ub"),
            eps_x=_array(doc, "model.eps_x", required=False),
            eps_u=_array(doc, "model.eps_u", required=False),
        )
    except ConfigError:
        raise
    except MpctError as exc:
        raise ConfigError("model", str(exc)) from None
    try:
        costs = CostWeights(
            Q_diag=_array(doc, "costs.Q_diag"),
            R_diag=_array(doc, "costs.R_diag"),
            T=_array(doc, "costs.T"),
            S=_array(doc, "costs.S"),
        )
    except ConfigError:
        raise
    except MpctError as exc:
        raise ConfigError("costs", str(exc)) from None
    try:
        mpct_config = MpctConfig(
            N=_get(doc, "horizon", required=True),
            epsilon=float(_get(doc, "epsilon", default=1e-4)),
            max_iter=int(_get(doc, "max_iter", default=4000)),
            big_bound=float(_get(doc, "big_bound", default=1e10)),
        )
    except ConfigError:
        raise
    except (MpctError, TypeError, ValueError) as exc:
        raise ConfigError("horizon", str(exc)) from None
    rho = _parse_rho(doc, model, mpct_config)
    try:
        problem = validate_problem(model, costs, mpct_config, rho)
    except MpctError as exc:
        raise ConfigError("(problem)", str(exc)) from None
    try:
        sim = SimConfig(
            Ts=float(_get(doc, "sim.Ts", default=PENDULUM_TS)),
            steps=int(_get(doc, "sim.steps", default=250)),
            substeps=int(_get(doc, "sim.substeps", default=10)),
            scale=float(_get(doc, "sim.scale", default=PENDULUM_SCALE)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError("sim", str(exc)) from None
    pend_doc = _get(doc, "sim.pendulum", default={})
    try:
        pendulum = PendulumParams(**pend_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError("sim.pendulum", str(exc)) from None
    x0 = _array(doc, "sim.x0", required=False)
    if x0 is None:
        x0 = np.zeros(model.n)
    elif x0.shape != (model.n,):
        raise ConfigError("sim.x0", f"expected {model.n} entries, got {x0.shape}")
    reference = _array(doc, "reference", required=False)
    if reference is None:
        reference = np.zeros(model.n + model.m)
    elif reference.shape != (model.n + model.m,):
        raise ConfigError(
            "reference", f"expected {model.n + model.m} entries, got {reference.shape}"
        )
    return RunConfig(
        problem=problem,
        sim=sim,
        pendulum=pendulum,
        x0_physical=x0,
        reference=reference,
        warmstart=bool(_get(doc, "warmstart", default=False)),
        seed=int(_get(doc, "seed", default=0)),
        output=_get(doc, "output", default=None),
    )


def load_config(path):
    """Parse a JSON configuration file into a RunConfig."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(str(path), "top-level JSON value must be an object")
    return parse_config(doc)


def default_pendulum_config():
    """JSON document for the benchmark pendulum scenario."""
    return {
        "model": {
            "A": [
                [1.013109, 0.020087, 0.0],
                [1.31371, 1.013109, 0.0],
                [0.0, 0.0, 1.0],
            ],
            "B": [[-0.002919], [-0.292577], [0.02]],
            "x_lb": [-0.39269908169872414, -1e10, -3.0],
            "x_ub": [0.39269908169872414, 1e10, 3.0],
            "u_lb": [-4.5],
            "u_ub": [4.5],
        },
        "costs": {
            "Q_diag": [5.0, 5.0, 5.0],
            "R_diag": [0.025],
            "T": [[1000.0, 0.0, 0.0], [0.0, 1000.0, 0.0], [0.0, 0.0, 1000.0]],
            "S": [[0.125]],
        },
        "horizon": 12,
        "rho": {"base": 20.0, "boost": 1000.0},
        "epsilon": 1e-4,
        "max_iter": 4000,
        "sim": {"Ts": 0.02, "steps": 250, "substeps": 10, "scale": 20.0, "x0": [0.0, 0.0, 20.0]},
        "reference": [0.0, 0.0, 0.0, 0.0],
        "warmstart": False,
        "seed": 0,
    }
