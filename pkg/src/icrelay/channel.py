"""Channel generation, symbol extension and serialization.

The model is a two-user MIMO interference channel assisted by a relay that
forwards within the same time slot.  Both transmitters and both receivers
have ``m`` antennas, the relay listens through ``n`` and talks through ``l``.
Eight complex matrices describe the links:

    h01, h02 : n x m   transmitter i -> relay
    h10, h20 : m x l   relay -> receiver j
    h11, h12, h21, h22 : m x m   transmitter -> receiver direct links

All entries are i.i.d. unit-variance circularly-symmetric complex Gaussians
drawn from a counter-based generator keyed per entry, so regenerating any
matrix never depends on how many draws happened before it.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import (ChannelFormatError, DimensionMismatchError,
                     UnsupportedFactorError)

MATRIX_NAMES = ("h01", "h02", "h10", "h20", "h11", "h12", "h21", "h22")

_SEED_MASK = (1 << 63) - 1


def derive_seed(seed: int, *labels) -> int:
    """Derive a reproducible 63-bit sub-seed from a seed and string labels."""
    text = ":".join([str(int(seed))] + [str(x) for x in labels])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") & _SEED_MASK


def _entry_generator(seed: int, name: str, row: int, col: int):
    key = int.from_bytes(
        hashlib.blake2b(f"{int(seed)}:{name}:{row}:{col}".encode(),
                        digest_size=16).digest(), "little")
    return np.random.Generator(np.random.Philox(key=key))


def complex_gaussian_matrix(seed: int, name: str, rows: int, cols: int) -> np.ndarray:
    """Unit-variance complex Gaussian matrix with per-entry counter keying.

    Entry (r, c) depends only on ``(seed, name, r, c)``, never on the other
    entries, so partial regeneration and order-independent sampling hold by
    construction.
    """
    out = np.empty((rows, cols), dtype=np.complex128)
    scale = np.sqrt(0.5)
    for r in range(rows):
        for c in range(cols):
            re, im = _entry_generator(seed, name, r, c).normal(0.0, scale, 2)
            out[r, c] = re + 1j * im
    return out


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts ``(m, n, l)`` plus the symbol-extension factor."""

    m: int
    n: int
    l: int
    extension: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.n < 0 or self.l < 0:
            raise ValueError(f"n and l must be >= 0, got n={self.n}, l={self.l}")
        if self.extension not in (1, 2):
            raise ValueError(f"extension must be 1 or 2, got {self.extension}")


_SHAPES = {
    "h01": ("n", "m"), "h02": ("n", "m"),
    "h10": ("m", "l"), "h20": ("m", "l"),
    "h11": ("m", "m"), "h12": ("m", "m"),
    "h21": ("m", "m"), "h22": ("m", "m"),
}


def expected_shape(config: AntennaConfig, name: str) -> tuple:
    r, c = _SHAPES[name]
    return (getattr(config, r), getattr(config, c))


@dataclass(frozen=True)
class ChannelInstance:
    """One realization of all eight channel matrices plus its seed."""

    config: AntennaConfig
    seed: int
    h01: np.ndarray
    h02: np.ndarray
    h10: np.ndarray
    h20: np.ndarray
    h11: np.ndarray
    h12: np.ndarray
    h21: np.ndarray
    h22: np.ndarray

    def __post_init__(self):
        for name in MATRIX_NAMES:
            mat = getattr(self, name)
            want = expected_shape(self.config, name)
            if mat.shape != want:
                raise DimensionMismatchError(
                    f"{name} has shape {mat.shape}, expected {want}")
            if mat.size and not np.isfinite(mat).all():
                raise ValueError(f"{name} contains non-finite entries")
            mat.setflags(write=False)

    def matrices(self) -> dict:
        return {name: getattr(self, name) for name in MATRIX_NAMES}


def sample_channel(config: AntennaConfig, seed: int) -> ChannelInstance:
    """Draw a channel instance; identical (config, seed) gives identical output."""
    if config.extension != 1:
        raise ValueError("sample_channel draws base channels (extension 1);"
                         " use extend_channel for two-slot operation")
    mats = {}
    for name in MATRIX_NAMES:
        rows, cols = expected_shape(config, name)
        mats[name] = complex_gaussian_matrix(seed, name, rows, cols)
    return ChannelInstance(config=config, seed=int(seed), **mats)


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    rows, cols = a.shape
    out = np.zeros((2 * rows, 2 * cols), dtype=np.complex128)
    out[:rows, :cols] = a
    out[rows:, cols:] = b
    return out


def extend_channel(ch: ChannelInstance, factor: int = 2) -> ChannelInstance:
    """Two-slot symbol extension: every matrix becomes block-diagonal, one
    block per channel use, with the second use drawn fresh from the seed.

    Only factor 2 is supported; two uses suffice to realize every
    half-integer stream count the schemes need.  The second-slot blocks are
    independent generic draws (keyed off the channel seed): reusing the
    first slot's coefficients verbatim makes the per-slot cancellation
    ratios coincide, which provably collapses the weaker receiver's space
    for single-antenna nodes, so the extension models two successive uses
    of a time-varying channel.
    """
    if factor != 2:
        raise UnsupportedFactorError(f"only extension factor 2 is supported, got {factor}")
    if ch.config.extension != 1:
        raise UnsupportedFactorError("channel is already extended")
    cfg = AntennaConfig(m=2 * ch.config.m, n=2 * ch.config.n,
                        l=2 * ch.config.l, extension=2)
    slot2_seed = derive_seed(ch.seed, "slot2")
    mats = {}
    for name in MATRIX_NAMES:
        base = getattr(ch, name)
        fresh = complex_gaussian_matrix(slot2_seed, name, *base.shape)
        mats[name] = _block_diag(base, fresh)
    return ChannelInstance(config=cfg, seed=ch.seed, **mats)


def matrix_to_pairs(a: np.ndarray) -> list:
    """Row-major nested lists with each entry as a [re, im] pair."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(a)]


def matrix_from_pairs(data, name: str) -> np.ndarray:
    try:
        rows = len(data)
        ncols = len(data[0]) if rows else 0
        out = np.empty((rows, ncols), dtype=np.complex128)
        for r, row in enumerate(data):
            if len(row) != ncols:
                raise ChannelFormatError(f"field '{name}': ragged rows")
            for c, pair in enumerate(row):
                re, im = pair
                out[r, c] = float(re) + 1j * float(im)
        return out
    except ChannelFormatError:
        raise
    except (TypeError, ValueError, IndexError) as exc:
        raise ChannelFormatError(f"field '{name}': malformed matrix data ({exc})") from exc


def write_channel(ch: ChannelInstance) -> str:
    """Serialize to canonical JSON (fixed field order, lossless floats)."""
    doc = {
        "m": ch.config.m,
        "n": ch.config.n,
        "l": ch.config.l,
        "extension": ch.config.extension,
        "seed": ch.seed,
        "matrices": {name: matrix_to_pairs(getattr(ch, name)) for name in MATRIX_NAMES},
    }
    return json.dumps(doc)


def read_channel(text: str) -> ChannelInstance:
    """Parse a serialized channel, validating field presence and dimensions."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ChannelFormatError("top-level value must be an object")
    for field in ("m", "n", "l", "extension", "seed", "matrices"):
        if field not in doc:
            raise ChannelFormatError(f"missing field '{field}'")
    try:
        config = AntennaConfig(m=int(doc["m"]), n=int(doc["n"]), l=int(doc["l"]),
                               extension=int(doc["extension"]))
    except (TypeError, ValueError) as exc:
        raise ChannelFormatError(f"invalid antenna configuration: {exc}") from exc
    mats_doc = doc["matrices"]
    if not isinstance(mats_doc, dict):
        raise ChannelFormatError("field 'matrices' must be an object")
    mats = {}
    for name in MATRIX_NAMES:
        if name not in mats_doc:
            raise ChannelFormatError(f"missing field 'matrices.{name}'")
        mat = matrix_from_pairs(mats_doc[name], name)
        want = expected_shape(config, name)
        if mat.shape != want:
            # a matrix with zero rows serializes as [], losing its column count
            if mat.size == 0 and want[0] == 0:
                mat = mat.reshape(want)
            else:
                raise DimensionMismatchError(
                    f"matrix '{name}' has shape {mat.shape}, expected {want} "
                    f"for (m={config.m}, n={config.n}, l={config.l})")
        mats[name] = mat
    try:
        seed = int(doc["seed"])
    except (TypeError, ValueError) as exc:
        raise ChannelFormatError(f"invalid seed: {exc}") from exc
    return ChannelInstance(config=config, seed=seed, **mats)
