"""Named models built from a flat, JSON-compatible parameter record."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

from . import energies as en
from . import profiles as pf
from .errors import ParameterError

RECORD_KEYS = ("model", "mu", "lambda", "alpha", "gamma", "k", "k_hat", "epsilon")

MODEL_NAMES = (
    "hencky",
    "hencky-ext",
    "exp-hencky",
    "euclid-ext",
    "geodesic-ext",
    "log-squared",
    "dev-log-squared",
    "dist2",
    "frobenius-squared",
    "vl-log-squared",
    "vl-quadratic",
)


@dataclass(frozen=True)
class MaterialParameters:
    model: str
    mu: float = 1.0
    lam: float = 0.0
    alpha: float = 1.0
    gamma: float = 1.0 / 3.0
    k: float = 1.0
    k_hat: float = 1.0
    epsilon: Optional[float] = None

    @classmethod
    def from_dict(cls, d: dict) -> "MaterialParameters":
        unknown = set(d) - set(RECORD_KEYS)
        if unknown:
            raise ParameterError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        if "model" not in d:
            raise ParameterError("parameter record needs a 'model' entry")
        kw = {("lam" if k == "lambda" else k): v for k, v in d.items() if v is not None}
        rec = cls(**kw)
        if rec.model not in MODEL_NAMES:
            raise ParameterError(f"unknown model '{rec.model}'; choose from {', '.join(MODEL_NAMES)}")
        return rec

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return {k: d[k] for k in RECORD_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def build_model(rec: MaterialParameters | dict, n: int = 3) -> en.EnergyModel:
    if isinstance(rec, dict):
        rec = MaterialParameters.from_dict(rec)
    name = rec.model
    if name == "hencky":
        model = en.hencky_model(en.LameParameters(rec.mu, rec.lam))
    elif name == "hencky-ext":
        model = en.hencky_extension_model(en.LameParameters(rec.mu, rec.lam))
    elif name == "exp-hencky":
        kappa = en.LameParameters(rec.mu, rec.lam).kappa(n)
        model = en.exp_hencky_model(en.ExpHenckyParameters(rec.mu, kappa, rec.k, rec.k_hat))
    elif name == "euclid-ext":
        model = en.euclid_extension_model(rec.alpha)
    elif name == "geodesic-ext":
        model = en.geodesic_extension_model(rec.gamma)
    elif name == "log-squared":
        model = en.log_squared_model()
    elif name == "dev-log-squared":
        model = en.dev_log_squared_model()
    elif name == "dist2":
        model = en.dist2_model()
    elif name == "frobenius-squared":
        model = en.frobenius_squared_model()
    elif name == "vl-log-squared":
        model = en.valanis_landel_extension(pf.log_squared(), rec.epsilon)
    elif name == "vl-quadratic":
        model = en.valanis_landel_extension(pf.quadratic(), rec.epsilon)
    else:
        raise ParameterError(f"unknown model '{name}'")
    model.name = name
    return model


def original_of(name: str, rec: MaterialParameters) -> en.EnergyModel:
    """The unextended energy that an extension reproduces on its agreement region."""
    if name == "hencky-ext":
        return en.hencky_model(en.LameParameters(rec.mu, rec.lam))
    if name == "euclid-ext":
        a = rec.alpha
        return en.SpectralSumModel(
            pf.ScalarProfile(
                "alpha_quadratic",
                (),
                (pf.Piece(lambda x: a * x * x - 2 * x + 1, lambda x: 2 * a * x - 2,
                          lambda x: 0 * x + 2 * a),),
            ),
            name="euclid",
        )
    if name == "geodesic-ext":
        return en.log_squared_model()
    if name == "vl-log-squared":
        return en.log_squared_model()
    if name == "vl-quadratic":
        return en.dist2_model()
    raise ParameterError(f"'{name}' is not an extension model")
