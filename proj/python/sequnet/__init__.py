"""Causal multi-scale convolutional sequence models."""

from ._sequnet import (
    ConfigError,
    DataError,
    Error,
    IoMode,
    Model,
    ModelConfig,
    NumericError,
    ShapeError,
    Stream,
    Variant,
    activation_series,
    build_model,
    count_activations,
    generate_symbols,
    gradcheck,
    load_model,
    measure_updates,
    min_input_length,
    mu_law_decode,
    mu_law_encode,
    receptive_field,
    run_cli,
)


def config(**fields):
    """ModelConfig with the given fields set."""
    c = ModelConfig()
    for key, value in fields.items():
        if not hasattr(c, key):
            raise ConfigError(f"unknown config key: {key}")
        setattr(c, key, value)
    c.validate()
    return c


__all__ = [name for name in dir() if not name.startswith("_")]
