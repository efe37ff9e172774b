"""Dataset connectors: file loaders, synthetic generation and preprocessing."""

from .dataset_loader import (
    Dataset,
    gen_synthetic,
    load_csv,
    load_dataset,
    load_libsvm,
    parse_gen_spec,
    preprocess,
)

__all__ = [
    'Dataset',
    'gen_synthetic',
    'load_csv',
    'load_dataset',
    'load_libsvm',
    'parse_gen_spec',
    'preprocess',
]
