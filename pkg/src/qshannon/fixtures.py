"""Small named sources and channels used by tests, demos and the command line."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .entropy import CqChannel, MultipartiteState
from .linalg import matrix_to_json
from .objects import Ensemble, diagonal_state, ket, projector
from .regions import MacChannel

SQ2 = np.sqrt(0.5)
PLUS = np.array([SQ2, SQ2])
MINUS = np.array([SQ2, -SQ2])

PHI_PLUS = np.array([SQ2, 0, 0, SQ2])
PHI_MINUS = np.array([SQ2, 0, 0, -SQ2])
PSI_PLUS = np.array([0, SQ2, SQ2, 0])
PSI_MINUS = np.array([0, SQ2, -SQ2, 0])


def bsc(p: float) -> CqChannel:
    """Binary symmetric channel embedded as diagonal output states."""
    return CqChannel([diagonal_state([1 - p, p]), diagonal_state([p, 1 - p])])


def pure_pair_channel() -> CqChannel:
    """``0 -> |0><0|``, ``1 -> |+><+|``."""
    return CqChannel([projector(ket(0, 2)), projector(PLUS)])


def constant_channel(rho=None) -> CqChannel:
    rho = diagonal_state([0.5, 0.5]) if rho is None else rho
    return CqChannel([rho, rho])


def binary_adder_mac() -> MacChannel:
    """``Y = X1 + X2`` with the three sums as orthogonal output states."""
    return MacChannel([2, 2], {(a, b): diagonal_state(np.eye(3)[a + b]) for a in range(2) for b in range(2)})


def _pair(u, v):
    return projector(np.kron(u, v))


def cloned_wheel() -> Ensemble:
    """``|00>, |11>, |++>, |-->`` with equal probabilities."""
    e0, e1 = np.eye(2)
    return Ensemble([_pair(e0, e0), _pair(e1, e1), _pair(PLUS, PLUS), _pair(MINUS, MINUS)],
                    [0.25] * 4, dims=(2, 2))


def epr_source() -> Ensemble:
    """``Phi+`` and ``Phi-`` with equal probabilities."""
    return Ensemble([projector(PHI_PLUS), projector(PHI_MINUS)], [0.5, 0.5], dims=(2, 2))


def cloned_cross() -> Ensemble:
    """``|00>`` and ``|11>`` with equal probabilities."""
    e0, e1 = np.eye(2)
    return Ensemble([_pair(e0, e0), _pair(e1, e1)], [0.5, 0.5], dims=(2, 2))


def diagonal_source(probs) -> Ensemble:
    """Eigenbasis ensemble of ``diag(probs)``."""
    d = len(probs)
    return Ensemble([projector(ket(j, d)) for j in range(d)], probs)


def source_state(ens: Ensemble, labels=("A1", "A2")) -> MultipartiteState:
    return MultipartiteState(ens.average(), ens.dims, labels)


def triplet_weights(rho) -> tuple:
    """Weights of ``rho`` on ``Phi+``, ``Phi-``, ``Psi+``."""
    return tuple(float(np.real(v.conj() @ rho @ v)) for v in (PHI_PLUS, PHI_MINUS, PSI_PLUS))


def correlated_bits(side=None) -> MultipartiteState:
    """Two copies of a uniform bit, optionally with a quantum side register ``side[x]``."""
    if side is None:
        st = np.zeros((4, 4))
        st[0, 0] = st[3, 3] = 0.5
        return MultipartiteState(st, (2, 2), ("X1", "X2"), (True, True))
    d = side[0].shape[0]
    st = sum(0.5 * np.kron(diagonal_state(np.eye(4)[3 * x]), side[x]) for x in range(2))
    return MultipartiteState(st, (2, 2, d), ("X1", "X2", "Y"), (True, True, False))


MODEL_BUILDERS = {
    "bsc01": lambda: bsc(0.1),
    "pure_pair": pure_pair_channel,
    "constant": constant_channel,
}


def bundled_model(name: str) -> Path:
    return Path(str(resources.files("qshannon") / "models" / name))


def write_models(directory) -> list:
    """Write the JSON model files for every named channel and source."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, build in MODEL_BUILDERS.items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(build().to_json(), indent=1) + "\n")
        paths.append(path)
    for name, build in (("cloned_wheel", cloned_wheel), ("epr", epr_source), ("cloned_cross", cloned_cross),
                        ("source09", lambda: diagonal_source([0.9, 0.1]))):
        path = directory / f"{name}.json"
        path.write_text(json.dumps(build().to_json(), indent=1) + "\n")
        paths.append(path)
    path = directory / "adder_mac.json"
    mac = binary_adder_mac()
    data = {
        "alphabet_sizes": list(mac.alphabet_sizes),
        "outputs": [{"input": list(k), "state": matrix_to_json(v)} for k, v in mac.outputs.items()],
    }
    path.write_text(json.dumps(data, indent=1) + "\n")
    paths.append(path)
    return paths
