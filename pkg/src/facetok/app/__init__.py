from .config import RunConfig, config_from_dict, load_config, save_config, validate_config
from .pipeline import (
    StageError,
    Workspace,
    load_lm,
    load_vqvae,
    run_corpus,
    run_describe,
    run_eval,
    run_generate,
    run_train_l2m,
    run_train_m2l,
    run_train_vqvae,
)

__all__ = [
    "RunConfig",
    "config_from_dict",
    "load_config",
    "save_config",
    "validate_config",
    "StageError",
    "Workspace",
    "load_lm",
    "load_vqvae",
    "run_corpus",
    "run_describe",
    "run_eval",
    "run_generate",
    "run_train_l2m",
    "run_train_m2l",
    "run_train_vqvae",
]
