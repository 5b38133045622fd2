"""Speech backbone registry: load a frozen encoder, pretrained or randomly
initialized, and turn a waveform into a (t, d) frame-feature matrix."""

from __future__ import annotations

import dataclasses

import numpy as np
import torch


class BackboneError(RuntimeError):
    pass


# Architecture parameters per tag, so random-init models build fully
# offline; checkpoints are only fetched for pretrained loads.
_W2V2_LARGE = dict(hidden_size=1024, num_hidden_layers=24, num_attention_heads=16,
                   intermediate_size=4096, do_stable_layer_norm=True,
                   feat_extract_norm="layer")
_HUBERT_LARGE = dict(hidden_size=1024, num_hidden_layers=24, num_attention_heads=16,
                     intermediate_size=4096, do_stable_layer_norm=True,
                     feat_extract_norm="layer")
_HUBERT_XLARGE = dict(hidden_size=1280, num_hidden_layers=48, num_attention_heads=16,
                      intermediate_size=5120, do_stable_layer_norm=True,
                      feat_extract_norm="layer")

_REGISTRY = {
    "w2v2-base": ("wav2vec2", "facebook/wav2vec2-base", {}),
    "w2v2-large": ("wav2vec2", "facebook/wav2vec2-large", _W2V2_LARGE),
    "hubert-base": ("hubert", "facebook/hubert-base-ls960", {}),
    "hubert-large": ("hubert", "facebook/hubert-large-ll60k", _HUBERT_LARGE),
    "hubert-xlarge": ("hubert", "facebook/hubert-xlarge-ll60k", _HUBERT_XLARGE),
    "emformer-base": ("emformer", None, {}),
}

BACKBONE_TAGS = tuple(_REGISTRY)

SAMPLE_RATE = 16_000
MIN_SAMPLES = SAMPLE_RATE  # inputs shorter than 1 s are zero-padded


@dataclasses.dataclass
class Backbone:
    tag: str
    model: torch.nn.Module
    d: int
    layer: int = -1

    @property
    def param_count(self) -> int:
        return sum(p.numel() for p in self.model.parameters())

    def extract_frames(self, waveform: np.ndarray) -> np.ndarray:
        """Frame features for one mono 16 kHz waveform, as (t, d) float32."""
        wave = np.asarray(waveform, dtype=np.float32).reshape(-1)
        if wave.size < MIN_SAMPLES:
            wave = np.pad(wave, (0, MIN_SAMPLES - wave.size))
        with torch.no_grad():
            batch = torch.from_numpy(wave).unsqueeze(0)
            if self.layer == -1:
                hidden = self.model(batch).last_hidden_state
            else:
                states = self.model(batch, output_hidden_states=True).hidden_states
                if not -len(states) <= self.layer < len(states):
                    raise BackboneError(
                        f"layer {self.layer} out of range for {len(states)} hidden states")
                hidden = states[self.layer]
        return hidden.squeeze(0).numpy().astype(np.float32)


def _build_model(family: str, checkpoint: str | None, arch: dict,
                 random_init: bool, config_overrides: dict | None):
    if family == "wav2vec2":
        from transformers import Wav2Vec2Config, Wav2Vec2Model
        config_cls, model_cls = Wav2Vec2Config, Wav2Vec2Model
    elif family == "hubert":
        from transformers import HubertConfig, HubertModel
        config_cls, model_cls = HubertConfig, HubertModel
    elif family == "emformer":
        raise BackboneError(
            "emformer-base needs torchaudio, which is not available in this "
            "environment; choose a wav2vec2 or hubert backbone")
    else:
        raise BackboneError(f"unknown backbone family {family!r}")

    if random_init:
        kwargs = dict(arch)
        kwargs.update(config_overrides or {})
        return model_cls(config_cls(**kwargs))
    if config_overrides:
        raise BackboneError("config_overrides only apply to random-init models")
    return model_cls.from_pretrained(checkpoint)


def load_backbone(tag: str, random_init: bool = False, layer: int = -1,
                  seed: int = 0, config_overrides: dict | None = None) -> Backbone:
    """Build a frozen backbone by tag.

    `random_init` skips the checkpoint and draws fresh weights (seeded);
    `config_overrides` lets tests shrink the architecture.
    """
    if tag not in _REGISTRY:
        raise BackboneError(f"unknown backbone tag {tag!r}; have {sorted(_REGISTRY)}")
    family, checkpoint, arch = _REGISTRY[tag]
    if random_init:
        torch.manual_seed(seed)
    model = _build_model(family, checkpoint, arch, random_init, config_overrides)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return Backbone(tag=tag, model=model, d=model.config.hidden_size, layer=layer)
