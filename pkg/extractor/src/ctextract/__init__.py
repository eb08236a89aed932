"""ctextract: pooled penultimate-layer CNN features from image folders.

Companion to the strokekit pipeline; the only coupling is the feature CSV
contract (`id,label,split,f0..f{d-1}`, augmented rows tagged `#aug<k>`).
"""

from .errors import ExtractorError, MissingWeights, UndecodableImage, ValidationError
from .extract import build_model, extract_features, weights_checksum
from .images import ImageRecord, augment_image, decode_image, discover_images
from .job import ARCHITECTURES, INPUT_SIZES, AugmentationSpec, ExtractionJob

__version__ = "0.1.0"
