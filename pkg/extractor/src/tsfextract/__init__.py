"""Per-frame CNN feature extraction from videos into .tsf matrices."""

from .extract import ExtractSpec, ExtractResult, extract
from .models import FeatureExtractor, ModelError, build_extractor
from .tsf import TsfError, TsfWriter, read_header, read_manifest, read_matrix, write_manifest
from .verify import verify_corpus

__version__ = "0.1.0"
