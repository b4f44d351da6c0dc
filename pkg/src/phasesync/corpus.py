"""Built-in test models."""

from __future__ import annotations

from .phase_model import FourierFunction, OscillatorModel

SIN = FourierFunction.sine(1)


def models(rho: float = 1.0) -> dict[str, OscillatorModel]:
    return {
        "constant": OscillatorModel(rho, FourierFunction.constant(1.0)),
        "2+sin": OscillatorModel(rho, FourierFunction(2.0, [0.0], [1.0])),
        "0.1*sin": OscillatorModel(rho, SIN, 0.1),
        "0.5*sin": OscillatorModel(rho, SIN, 0.5),
        "1.5*sin": OscillatorModel(rho, SIN, 1.5),
        "sin(2phi)": OscillatorModel(rho, FourierFunction.sine(2)),
        "1-cos": OscillatorModel(rho, FourierFunction(1.0, [-1.0], [0.0])),
    }


GENERIC = ("2+sin", "0.1*sin", "0.5*sin", "1.5*sin", "sin(2phi)")
NON_VANISHING = ("constant", "2+sin")
VANISHING_GENERIC = ("0.1*sin", "0.5*sin", "1.5*sin", "sin(2phi)")
NON_GENERIC = ("constant", "1-cos")


def standard_model() -> OscillatorModel:
    return models()["2+sin"]
