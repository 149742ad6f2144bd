"""Desk-scale trainer for convolutional pixel predictors, exporting NNPW
weight files consumed by the pem codec's inference engine.
"""

from .data import load_images, prepare_corpus, split_dataset
from .export import UnsupportedLayer, export_nnpw, predict_plane
from .models import MsCnnLite, RdnLite, build
from .training import (
    TrainConfig,
    evaluate_first_layer,
    evaluate_lmi,
    evaluate_second_layer,
    run_training,
    train_model,
)

__version__ = "0.1.0"
