"""HTTP shim serving models behind the tweetact backend wire protocol."""

from .app import DEFAULT_MAX_BATCH, create_app
from .models import FILL_WORDS, HashModel, TransformersModel, UnsupportedTask, load_model

__all__ = [
    "DEFAULT_MAX_BATCH",
    "FILL_WORDS",
    "HashModel",
    "TransformersModel",
    "UnsupportedTask",
    "create_app",
    "load_model",
]
