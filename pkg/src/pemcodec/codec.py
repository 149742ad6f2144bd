"""Prediction-error modulation: per-residual coding, per-layer embedding,
and the full two-layer encode/decode pipelines.

Residuals with |eps| < theta form the stego channel and carry payload bits;
all other residuals are shifted outward by theta so the two populations stay
distinguishable. A zero residual maps to one of three states (0, -1, +1) and
so carries one or two bits; other channel residuals carry exactly one bit.
Every modulation moves a residual by at most theta, which bounds per-pixel
stego distortion by theta (and by 2*theta against the unprocessed cover).

Layer 1 embeds into white queries predicted from black context, layer 2 into
black queries predicted from the already-modified white plane. Decoding runs
the layers last-in-first-out and re-orders the recovered bits back into the
encoder's consumption order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bitstream, imaging, overflow
from .bitstream import BitStream
from .errors import CapacityExceeded, PayloadExhausted
from .predictor import LmiPredictor


@dataclass(frozen=True)
class StegoParams:
    """Everything a decoder must share with the encoder.

    ``predictor`` serves layer 1 (white queries), ``second_predictor``
    layer 2; the latter defaults to the former (universal prediction).
    """

    theta: int
    predictor: object = field(default_factory=LmiPredictor)
    second_predictor: object | None = None

    def __post_init__(self):
        overflow.check_theta(self.theta)

    @property
    def net2(self):
        return self.second_predictor if self.second_predictor is not None else self.predictor


@dataclass
class LayerOutcome:
    plane: np.ndarray
    bits: int  # consumed (embed) or extracted (extract) bit count
    carrier_mask: np.ndarray  # query positions whose residual was in the channel
    extracted: BitStream | None = None


def modulate(eps: int, payload: BitStream, theta: int) -> tuple[int, int]:
    """Code payload bits into one residual; returns (eps', bits consumed)."""
    if eps == 0:
        first = payload.read(1)[0]
        if first == 0:
            return 0, 1
        second = payload.read(1)[0]
        return (1 if second else -1), 2
    if -theta < eps < theta:
        bit = int(payload.read(1)[0])
        return 2 * eps + (bit if eps > 0 else -bit), 1
    return eps + (theta if eps > 0 else -theta), 0


def demodulate(eps_prime: int, theta: int) -> tuple[int, list[int]]:
    """Invert modulate; returns (eps, extracted bits)."""
    mag = abs(eps_prime)
    if mag <= 1:
        if eps_prime == 0:
            return 0, [0]
        return 0, [1, 1] if eps_prime > 0 else [1, 0]
    if mag < 2 * theta:
        eps = mag // 2 if eps_prime > 0 else -(mag // 2)
        return eps, [mag % 2]
    return eps_prime - (theta if eps_prime > 0 else -theta), []


def embed_layer(
    img: np.ndarray, query_mask: np.ndarray, predicted: np.ndarray, payload: BitStream, theta: int
) -> LayerOutcome:
    """Modulate every query residual in raster order; context untouched.

    Query samples must already lie in [theta, 255-theta] (preprocess
    guarantees it) so the modulated pixels stay within [0, 255].
    """
    theta = int(theta)
    queries = img[query_mask]
    if queries.size and (queries.min() < theta or queries.max() > 255 - theta):
        raise ValueError(
            f"query samples outside [{theta}, {255 - theta}]; run preprocess first"
        )
    flat_pred = predicted.astype(np.int16).ravel()
    positions = np.flatnonzero(query_mask.ravel())
    eps_flat = img.astype(np.int16).ravel()[positions] - flat_pred[positions]

    bits = payload.bits
    cursor = payload.cursor
    end = len(bits)
    out_vals = np.empty(positions.size, dtype=np.int16)
    carrier = np.zeros(positions.size, dtype=bool)
    for k in range(positions.size):
        eps = int(eps_flat[k])
        if eps == 0:
            if cursor >= end:
                raise PayloadExhausted("payload drained at a zero residual")
            if bits[cursor]:
                if cursor + 1 >= end:
                    raise PayloadExhausted("payload drained inside a two-bit read")
                eps_p = 1 if bits[cursor + 1] else -1
                cursor += 2
            else:
                eps_p = 0
                cursor += 1
            carrier[k] = True
        elif -theta < eps < theta:
            if cursor >= end:
                raise PayloadExhausted("payload drained at a channel residual")
            bit = int(bits[cursor])
            cursor += 1
            eps_p = 2 * eps + (bit if eps > 0 else -bit)
            carrier[k] = True
        else:
            eps_p = eps + (theta if eps > 0 else -theta)
        out_vals[k] = flat_pred[positions[k]] + eps_p

    consumed = cursor - payload.cursor
    payload.cursor = cursor
    out = img.copy()
    out.ravel()[positions] = out_vals.astype(np.uint8)
    carrier_mask = np.zeros(img.shape, dtype=bool)
    carrier_mask.ravel()[positions] = carrier
    return LayerOutcome(out, consumed, carrier_mask)


def extract_layer(
    img: np.ndarray, query_mask: np.ndarray, predicted: np.ndarray, theta: int
) -> LayerOutcome:
    """Demodulate every query residual in raster order, restoring the layer."""
    theta = int(theta)
    flat_pred = predicted.astype(np.int16).ravel()
    positions = np.flatnonzero(query_mask.ravel())
    eps_flat = img.astype(np.int16).ravel()[positions] - flat_pred[positions]

    out_vals = np.empty(positions.size, dtype=np.int16)
    carrier = np.zeros(positions.size, dtype=bool)
    collected: list[int] = []
    for k in range(positions.size):
        eps_p = int(eps_flat[k])
        mag = abs(eps_p)
        if mag <= 1:
            eps = 0
            if eps_p == 0:
                collected.append(0)
            else:
                collected.append(1)
                collected.append(1 if eps_p > 0 else 0)
            carrier[k] = True
        elif mag < 2 * theta:
            eps = mag // 2 if eps_p > 0 else -(mag // 2)
            collected.append(mag % 2)
            carrier[k] = True
        else:
            eps = eps_p - (theta if eps_p > 0 else -theta)
        out_vals[k] = flat_pred[positions[k]] + eps

    out = img.copy()
    # restored values of a well-formed stego are the preprocessed originals in
    # [theta, 255-theta]; clipping only matters for foreign/corrupt inputs
    out.ravel()[positions] = np.clip(out_vals, 0, 255).astype(np.uint8)
    carrier_mask = np.zeros(img.shape, dtype=bool)
    carrier_mask.ravel()[positions] = carrier
    extracted = BitStream(np.asarray(collected, dtype=np.uint8))
    return LayerOutcome(out, len(extracted), carrier_mask, extracted)


def _embed_both_layers(
    x_checked: np.ndarray, payload: BitStream, params: StegoParams
) -> tuple[np.ndarray, int]:
    black, white = imaging.split(x_checked)
    y_white = params.predictor.predict(x_checked, white)
    layer1 = embed_layer(x_checked, white, y_white, payload, params.theta)
    y_black = params.net2.predict(layer1.plane, black)
    layer2 = embed_layer(layer1.plane, black, y_black, payload, params.theta)
    return layer2.plane, layer1.bits + layer2.bits


def _dry_run_capacity(x_checked: np.ndarray, register: BitStream, params: StegoParams) -> int:
    zeros = BitStream.zeros(2 * x_checked.size)
    _, consumed = _embed_both_layers(x_checked, zeros, params)
    return max(0, consumed - len(register) - bitstream.LENGTH_FIELD_BITS)


def estimate_capacity(img, params: StegoParams) -> int:
    """Conservative message capacity in bits: a dry run with an all-zero
    payload counts one bit per stego-channel residual, then deducts the
    register and length-field overhead. Real payloads embed at least this
    much because zero residuals can carry a second bit.
    """
    img = imaging.as_plane(img)
    x_checked, register = overflow.preprocess(img, params.theta)
    return _dry_run_capacity(x_checked, register, params)


def encode(img, message: BitStream, params: StegoParams) -> np.ndarray:
    """Embed a message, returning the stego plane.

    Raises CapacityExceeded up front when the message cannot fit the
    conservative capacity estimate, and defensively if the actual run
    consumed fewer bits than the frame needed.
    """
    img = imaging.as_plane(img)
    x_checked, register = overflow.preprocess(img, params.theta)
    capacity = _dry_run_capacity(x_checked, register, params)
    if len(message) > capacity:
        raise CapacityExceeded(len(message), capacity)
    need = len(register) + bitstream.LENGTH_FIELD_BITS + len(message)
    # Generous zero padding: total consumption is at most two bits per pixel,
    # so reads can never starve and unread padding costs nothing.
    payload = bitstream.build_payload(register, message, need + 2 * img.size)
    stego, consumed = _embed_both_layers(x_checked, payload, params)
    if consumed < need:
        raise CapacityExceeded(need, consumed)
    return stego


def decode(img, params: StegoParams) -> tuple[np.ndarray, BitStream]:
    """Extract the message and restore the cover bit-exactly.

    Raises MalformedPayload when the recovered length field is inconsistent,
    which is the usual symptom of decoding with the wrong parameters.
    """
    img = imaging.as_plane(img)
    black, white = imaging.split(img)
    y_black = params.net2.predict(img, black)
    layer2 = extract_layer(img, black, y_black, params.theta)
    y_white = params.predictor.predict(layer2.plane, white)
    layer1 = extract_layer(layer2.plane, white, y_white, params.theta)
    x_checked = layer1.plane
    payload = bitstream.concat(layer1.extracted, layer2.extracted)
    register_len = overflow.count_register_bits(x_checked, params.theta)
    register, message = bitstream.parse_payload(payload, register_len)
    cover = overflow.postprocess(x_checked, register, params.theta)
    return cover, message
