"""FaceChannel adapter for the affect-predict/1 wire protocol.

Wraps a frame-wise arousal-valence model behind newline-delimited JSON on
stdin/stdout so evaluation harnesses can drive it as a child process:

    facechannel-adapter --model weights.json --device cpu

The model source is either a FaceChannel installation (loaded lazily) or a
stub weights JSON used for protocol testing without a deep model.
"""

__version__ = "0.1.0"

from .model import AdapterConfig, load_model
from .serve import serve

__all__ = ["__version__", "AdapterConfig", "load_model", "serve"]
