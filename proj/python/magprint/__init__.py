"""Magnetometer fingerprinting: stimulus design, simulation, features and SVM verification."""

from ._magprint import (
    Classifier,
    FeatureMatrix,
    FeatureVector,
    MagprintError,
    Prediction,
    RocPoint,
    WaveformSpec,
    build_waveform,
    dft,
    eer,
    extract_features,
    roc_curve,
    run_command,
    simulate,
    train_classifier,
    validate_waveform,
    waveform_preset,
)

__all__ = [
    "Classifier",
    "FeatureMatrix",
    "FeatureVector",
    "MagprintError",
    "Prediction",
    "RocPoint",
    "WaveformSpec",
    "build_waveform",
    "dft",
    "eer",
    "extract_features",
    "roc_curve",
    "run_command",
    "simulate",
    "train_classifier",
    "validate_waveform",
    "waveform_preset",
]
