"""Backbone construction and truncation at the first fully-connected layer.

Supported backbones: torchvision alexnet / vgg11 / vgg16 (feature width
4096) and a small built-in conv net ``tiny`` (width 32) for fast tests and
pipeline debugging. The feature head is everything up to and including the
first Linear layer of the classifier plus its ReLU, evaluated in eval mode.

Weights come from a local checkpoint (``weights_path``); with none given
the network is randomly initialized under a fixed seed, which keeps format
and shape semantics testable offline but carries no semantic features. The
published ImageNet preprocessing of the torchvision models is applied
(resize to the input size, RGB in [0,1], mean/std normalization).
"""

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)


class ModelError(ValueError):
    pass


@dataclass
class FeatureExtractor:
    name: str
    module: nn.Module
    width: int
    input_size: int
    normalize: bool

    @torch.no_grad()
    def features(self, frames):
        """frames: (B, H, W, 3) uint8 RGB -> (B, width) float32."""
        batch = frames.astype(np.float32) / 255.0
        if self.normalize:
            batch = (batch - IMAGENET_MEAN) / IMAGENET_STD
        tensor = torch.from_numpy(batch).permute(0, 3, 1, 2).contiguous()
        out = self.module(tensor)
        return out.numpy().astype(np.float32)


def _tiny_backbone():
    return nn.Sequential(
        nn.Conv2d(3, 8, kernel_size=5, stride=4),
        nn.ReLU(inplace=True),
        nn.AdaptiveAvgPool2d(4),
        nn.Flatten(),
        nn.Linear(8 * 16, 32),
        nn.ReLU(inplace=True),
    )


def _truncate_at_first_fc(model):
    """Keep features/avgpool and the classifier up to the first Linear (+
    its ReLU)."""
    head = []
    found = False
    for layer in model.classifier:
        head.append(layer)
        if isinstance(layer, nn.Linear):
            found = True
            break
    if not found:
        raise ModelError("no fully-connected layer in the classifier")
    head.append(nn.ReLU(inplace=False))
    width = head[-2].out_features
    module = nn.Sequential(model.features, model.avgpool, nn.Flatten(), *head)
    return module, width


def build_extractor(name, layer="first_fc", weights_path=None, seed=0):
    """Construct a truncated backbone. Unknown layer selectors are fatal."""
    if layer != "first_fc":
        raise ModelError(
            f"unknown layer selector {layer!r}; this extractor exposes 'first_fc'"
        )
    torch.manual_seed(seed)
    if name == "tiny":
        module, width, size, normalize = _tiny_backbone(), 32, 64, False
    elif name in ("alexnet", "vgg11", "vgg16"):
        import torchvision.models as tvm

        model = getattr(tvm, name)(weights=None)
        if weights_path:
            state = torch.load(weights_path, map_location="cpu", weights_only=True)
            model.load_state_dict(state)
        module, width = _truncate_at_first_fc(model)
        size, normalize = 224, True
    else:
        raise ModelError(f"unknown model {name!r} (tiny, alexnet, vgg11, vgg16)")
    if name == "tiny" and weights_path:
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        module.load_state_dict(state)
    module.eval()
    return FeatureExtractor(
        name=name, module=module, width=width, input_size=size, normalize=normalize
    )
