"""Problem instances: signal vectors, Gaussian noise tensors, spikes,
and the anti-correlated noise split (t_plus, t_minus).

Conventions fixed here:
  * signal vectors have norm sqrt(N) exactly;
  * Gaussian tensors are the average over all 24 index permutations of an
    i.i.d. unit-variance tensor ("average" convention), so the canonical
    entry for a sorted tuple has variance prod(multiplicities!) / 24; the
    "unit" convention instead gives every canonical entry unit variance;
  * the complex ensemble draws independent real and imaginary parts with
    variance 1/2 each.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import log

import numpy as np

from ._util import InvalidParameterError, derived_rng
from .symtensor import SymmetricTensor4, layout, rank_one

VARIANCE_CONVENTIONS = ("average", "unit")


@dataclass(frozen=True)
class ModelParams:
    """Model parameters shared by every algorithm.

    N: mode count; n_bos: boson count; p: tensor order (must be 4);
    lambda_bar: claimed signal strength; zeta: decorrelation strength
    (None means the 1/ln N rule); seed: base RNG seed.
    """

    N: int
    n_bos: int
    p: int = 4
    lambda_bar: float = 0.0
    zeta: float | None = None
    seed: int = 0
    ensemble: str = "real"

    def __post_init__(self):
        if self.N < 1:
            raise InvalidParameterError(f"N must be >= 1, got {self.N}")
        if self.p != 4:
            raise InvalidParameterError(f"only p=4 is supported, got p={self.p}")
        if self.n_bos < 2:
            raise InvalidParameterError(f"n_bos must be >= 2, got {self.n_bos}")
        if self.lambda_bar < 0:
            raise InvalidParameterError("lambda_bar must be nonnegative")
        if self.zeta is not None and self.zeta <= 0:
            raise InvalidParameterError("zeta must be positive")
        if self.ensemble not in ("real", "complex"):
            raise InvalidParameterError(f"unknown ensemble {self.ensemble!r}")

    @property
    def effective_zeta(self) -> float:
        return self.zeta if self.zeta is not None else default_zeta(self.N)

    def require_input_state(self):
        """The power input state needs n_bos to be a multiple of 4."""
        if self.n_bos % 4 != 0:
            raise InvalidParameterError(
                f"input-state construction needs n_bos divisible by 4, got {self.n_bos}"
            )


@dataclass(frozen=True)
class SpikedTensor:
    """An order-4 instance tensor together with its generation metadata."""

    tensor: SymmetricTensor4
    lam: float
    provenance: str  # "spiked" or "unspiked"
    ensemble: str = "real"

    def __post_init__(self):
        if self.provenance not in ("spiked", "unspiked"):
            raise InvalidParameterError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "unspiked" and self.lam != 0.0:
            raise InvalidParameterError("unspiked tensors must have lam = 0")


@dataclass(frozen=True)
class DecorrelatedPair:
    """The split (t_plus, t_minus) with anti-correlated injected noise."""

    t_plus: SymmetricTensor4
    t_minus: SymmetricTensor4
    zeta: float
    lambda_plus: float
    lambda_minus: float


def default_zeta(N: int) -> float:
    """Decorrelation strength rule 1/ln(N) (natural log)."""
    if N < 2:
        raise InvalidParameterError(f"the 1/ln(N) rule needs N >= 2, got N={N}")
    return 1.0 / log(N)


def sample_signal(N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform vector on the radius-sqrt(N) sphere in R^N."""
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    v = rng.standard_normal(N)
    norm = np.linalg.norm(v)
    while norm == 0.0:  # probability zero, but keep the contract airtight
        v = rng.standard_normal(N)
        norm = np.linalg.norm(v)
    return v / norm * np.sqrt(N)


def sample_gaussian_tensor(
    N: int,
    rng: np.random.Generator,
    ensemble: str = "real",
    variance_convention: str = "average",
) -> SymmetricTensor4:
    """Symmetrized Gaussian noise tensor.

    Sampling happens directly in canonical storage: averaging an i.i.d.
    tensor over the 24 permutations makes the canonical entry for a sorted
    tuple with multiplicities c_i a Gaussian of variance prod(c_i!) / 24
    (the reciprocal of its orbit size), which is drawn in one shot.
    """
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    if variance_convention not in VARIANCE_CONVENTIONS:
        raise InvalidParameterError(f"unknown variance convention {variance_convention!r}")
    lay = layout(N)
    m = len(lay.tuples)
    if ensemble == "real":
        vals = rng.standard_normal(m)
    elif ensemble == "complex":
        vals = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * np.sqrt(0.5)
    else:
        raise InvalidParameterError(f"unknown ensemble {ensemble!r}")
    if variance_convention == "average":
        vals = vals / np.sqrt(lay.orbit_sizes)
    return SymmetricTensor4(N, vals)


def noise_power_per_entry(N: int, variance_convention: str = "average") -> float:
    """Mean squared Frobenius norm of the noise tensor divided by N^4.

    This is the s-parameter entering the projection success threshold; it
    is 1 under the unit convention and (number of canonical entries)/N^4
    under the average convention.
    """
    if variance_convention == "unit":
        return 1.0
    if variance_convention == "average":
        return len(layout(N).tuples) / float(N) ** 4
    raise InvalidParameterError(f"unknown variance convention {variance_convention!r}")


def make_spiked(lam: float, v: np.ndarray, g: SymmetricTensor4) -> SpikedTensor:
    """T = lam * v^{x4} + g, stored canonically."""
    v = np.asarray(v, dtype=float)
    if v.shape != (g.n_modes,):
        raise InvalidParameterError(
            f"signal length {v.shape} does not match tensor modes {g.n_modes}"
        )
    tensor = g if lam == 0.0 else rank_one(v) * lam + g
    provenance = "spiked" if lam != 0.0 else "unspiked"
    ensemble = "complex" if g.is_complex else "real"
    return SpikedTensor(tensor=tensor, lam=lam, provenance=provenance, ensemble=ensemble)


def sample_instance(
    params: ModelParams, spiked: bool, rng: np.random.Generator | None = None
) -> tuple[SpikedTensor, np.ndarray]:
    """Draw (instance tensor, signal vector) for the given parameters.

    The signal vector is returned even in the unspiked case so that
    experiments can score recovery against the direction that would have
    been planted.
    """
    if rng is None:
        rng = derived_rng(params.seed, "instance")
    v = sample_signal(params.N, rng)
    g = sample_gaussian_tensor(params.N, rng, ensemble=params.ensemble)
    lam = params.lambda_bar if spiked else 0.0
    return make_spiked(lam, v, g), v


def decorrelate(
    t0: SpikedTensor | SymmetricTensor4,
    zeta: float,
    rng: np.random.Generator | None = None,
    add_imaginary: bool = False,
    g_prime: SymmetricTensor4 | None = None,
    variance_convention: str = "average",
) -> DecorrelatedPair:
    """Split t0 into (t_plus, t_minus) with anti-correlated extra noise.

    t_plus = (t0 + zeta * g') / sqrt(1 + zeta^2)
    t_minus = (t0 - g'/zeta) / sqrt(1 + zeta^2)

    where g' is fresh noise from the same distribution as the instance
    noise (injectable through g_prime for oracle tests).  The effective
    signal strengths lambda_pm = lam * (1 + zeta^{+-2})^{-1/2} are recorded;
    they are measured against unit-variance noise, so the overall 1/zeta
    scale sitting on t_minus is immaterial once states are normalized.

    With add_imaginary=True an independent imaginary tensor is added to
    t_minus so its noise matches the complex ensemble shape (equal and
    independent real and imaginary noise parts).
    """
    if zeta <= 0:
        raise InvalidParameterError(f"zeta must be positive, got {zeta}")
    if isinstance(t0, SpikedTensor):
        tensor, lam = t0.tensor, t0.lam
    else:
        tensor, lam = t0, 0.0
    if g_prime is None:
        if rng is None:
            raise InvalidParameterError("decorrelate needs an rng when g_prime is not given")
        g_prime = sample_gaussian_tensor(
            tensor.n_modes, rng, ensemble="real", variance_convention=variance_convention
        )
    elif g_prime.n_modes != tensor.n_modes:
        raise InvalidParameterError("g_prime mode count does not match the instance")

    scale = 1.0 / np.sqrt(1.0 + zeta**2)
    t_plus = (tensor + zeta * g_prime) * scale
    t_minus = (tensor - (1.0 / zeta) * g_prime) * scale
    if add_imaginary:
        if rng is None:
            raise InvalidParameterError("add_imaginary needs an rng")
        extra = sample_gaussian_tensor(
            tensor.n_modes, rng, ensemble="real", variance_convention=variance_convention
        )
        # match the real-noise power of t_minus, which is (1 + zeta^-2) in
        # base-noise units before the overall 1/sqrt(1+zeta^2)
        amp = np.sqrt(1.0 + zeta**-2) * scale
        t_minus = SymmetricTensor4(tensor.n_modes, t_minus.values + 1j * amp * extra.values)
    lam_plus = lam * (1.0 + zeta**2) ** -0.5
    lam_minus = lam * (1.0 + zeta**-2) ** -0.5
    return DecorrelatedPair(
        t_plus=t_plus, t_minus=t_minus, zeta=zeta, lambda_plus=lam_plus, lambda_minus=lam_minus
    )


def lambda_effective(lambda_bar: float, zeta: float) -> tuple[float, float]:
    """Claimed-signal analogues (lambda_bar_plus, lambda_bar_minus)."""
    return (
        lambda_bar * (1.0 + zeta**2) ** -0.5,
        lambda_bar * (1.0 + zeta**-2) ** -0.5,
    )


# ---------------------------------------------------------------------------
# Tensor file format: JSON header plus canonical entries; see FORMATS.md.
# ---------------------------------------------------------------------------

_MAGIC = "tensorpca/tensor-v1"


def _tensor_header(spiked: SpikedTensor) -> dict:
    return {
        "format": _MAGIC,
        "N": spiked.tensor.n_modes,
        "p": 4,
        "ensemble": spiked.ensemble,
        "layout": "sorted-tuples",
        "lambda": spiked.lam,
        "provenance": spiked.provenance,
        "complex": bool(spiked.tensor.is_complex),
    }


def save_tensor(path, spiked: SpikedTensor, fmt: str = "json") -> None:
    header = _tensor_header(spiked)
    vals = spiked.tensor.values
    if fmt == "json":
        if header["complex"]:
            header["entries_re"] = vals.real.tolist()
            header["entries_im"] = vals.imag.tolist()
        else:
            header["entries"] = vals.tolist()
        with open(path, "w") as fh:
            json.dump(header, fh, sort_keys=True, indent=1)
            fh.write("\n")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode())
            fh.write(b"\n")
            if header["complex"]:
                interleaved = np.empty(2 * vals.size)
                interleaved[0::2] = vals.real
                interleaved[1::2] = vals.imag
                fh.write(interleaved.astype("<f8").tobytes())
            else:
                fh.write(vals.astype("<f8").tobytes())
    else:
        raise InvalidParameterError(f"unknown tensor format {fmt!r}")


def load_tensor(path) -> SpikedTensor:
    with open(path, "rb") as fh:
        first = fh.readline()
        rest = fh.read()
    try:
        header = json.loads(first)  # binary variant: one-line header
        payload = rest
    except json.JSONDecodeError:
        header = json.loads(first + rest)  # json variant: whole file
        payload = None
    if header.get("format") != _MAGIC:
        raise InvalidParameterError(f"{path} is not a tensor file")
    n = header["N"]
    if payload is not None:
        raw = np.frombuffer(payload, dtype="<f8")
        vals = raw[0::2] + 1j * raw[1::2] if header["complex"] else raw
    else:
        if header["complex"]:
            vals = np.asarray(header["entries_re"]) + 1j * np.asarray(header["entries_im"])
        else:
            vals = np.asarray(header["entries"], dtype=float)
    tensor = SymmetricTensor4(n, vals)
    return SpikedTensor(
        tensor=tensor,
        lam=header["lambda"],
        provenance=header["provenance"],
        ensemble=header.get("ensemble", "real"),
    )
