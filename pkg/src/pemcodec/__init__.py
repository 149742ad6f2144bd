"""Reversible greyscale-image steganography by prediction-error modulation.

Embedding perturbs each pixel by at most theta around a context-aware
prediction; decoding extracts the message and restores the cover bit-exactly.
"""

from .bitstream import BitStream, build_payload, concat, parse_payload
from .codec import (
    LayerOutcome,
    StegoParams,
    decode,
    demodulate,
    embed_layer,
    encode,
    estimate_capacity,
    extract_layer,
    modulate,
)
from .errors import (
    BadMagic,
    CapacityExceeded,
    DanglingInputRef,
    DegenerateAllZero,
    DimensionMismatch,
    EmptyDistribution,
    GraphEvalError,
    ImageTooSmall,
    InvalidTheta,
    MalformedPayload,
    PayloadExhausted,
    PemError,
    RegisterLengthMismatch,
    ShapeMismatch,
    UnsupportedFormat,
    VersionUnsupported,
)
from .imaging import checker_masks, merge, read_pgm, split, write_pgm
from .metrics import (
    ErrorDistribution,
    RdPoint,
    error_stats,
    first_layer_errors,
    gini_from_lorenz,
    lorenz_curve,
    psnr,
    rd_curve,
    ssim,
)
from .overflow import count_register_bits, postprocess, preprocess
from .predictor import (
    ConvGraph,
    ConvPredictor,
    InitStrategy,
    LmiPredictor,
    initialise,
    load_weights,
    predict_lmi,
    predict_nn,
)
from .prng import XorShift64Star

__version__ = "0.1.0"
