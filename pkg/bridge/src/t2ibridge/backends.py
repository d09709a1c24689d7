"""Generation backends: the built-in procedural one plus real adapters.

A backend turns (prompt text, conditioning, seed) into one image. The
procedural "shapes" backend needs nothing beyond PIL/numpy and keeps the
whole bridge testable on CPU; the diffusers and HTTP adapters talk to real
models and are imported lazily so their stacks stay optional.
"""

from __future__ import annotations

from PIL import Image

from . import scene
from .config import BridgeConfig


class BackendUnavailable(RuntimeError):
    pass


class GenerationFailure(RuntimeError):
    def __init__(self, prompt_id: str, sample_index: int, reason: str):
        super().__init__(f"{prompt_id}/{sample_index}: {reason}")
        self.prompt_id = prompt_id
        self.sample_index = sample_index


class ShapeSceneBackend:
    """Deterministic procedural scenes keyed to prompt vocabulary."""

    def __init__(self, config: BridgeConfig):
        self.config = config

    def generate(self, prompt_text: str, seed: int) -> Image.Image:
        labels = scene.sample_scene(
            prompt_text, seed,
            negative_text=self.config.negative_text,
            positive_suffix=self.config.positive_suffix,
        )
        return scene.render_scene(labels, self.config.image_size, seed)


class DiffusersBackend:
    """Local diffusion checkpoints via the diffusers library.

    generator_id format: "diffusers:<model-name-or-path>".
    """

    def __init__(self, config: BridgeConfig):
        try:
            import torch  # noqa: F401
            from diffusers import AutoPipelineForText2Image
        except ImportError as exc:
            raise BackendUnavailable(
                "diffusers backend needs torch + diffusers installed"
            ) from exc
        model = config.generator_id.split(":", 1)[1]
        self._torch = __import__("torch")
        self._pipe = AutoPipelineForText2Image.from_pretrained(model)
        self.config = config

    def generate(self, prompt_text: str, seed: int) -> Image.Image:
        generator = self._torch.Generator().manual_seed(seed % (2 ** 63))
        suffix = self.config.positive_suffix
        result = self._pipe(
            prompt=f"{prompt_text}, {suffix}" if suffix else prompt_text,
            negative_prompt=self.config.negative_text or None,
            num_inference_steps=self.config.steps,
            guidance_scale=self.config.guidance_scale,
            width=self.config.image_size,
            height=self.config.image_size,
            generator=generator,
        )
        return result.images[0]


class HttpBackend:
    """Hosted generation APIs; generator_id is the endpoint URL.

    POSTs {"prompt", "negative_prompt", "seed", "steps", "guidance_scale",
    "width", "height"} and expects image bytes back.
    """

    def __init__(self, config: BridgeConfig):
        try:
            import requests
        except ImportError as exc:
            raise BackendUnavailable("http backend needs requests installed") from exc
        self._requests = requests
        self.config = config
        self.url = config.generator_id

    def generate(self, prompt_text: str, seed: int) -> Image.Image:
        import io

        suffix = self.config.positive_suffix
        response = self._requests.post(self.url, json={
            "prompt": f"{prompt_text}, {suffix}" if suffix else prompt_text,
            "negative_prompt": self.config.negative_text,
            "seed": seed,
            "steps": self.config.steps,
            "guidance_scale": self.config.guidance_scale,
            "width": self.config.image_size,
            "height": self.config.image_size,
        }, timeout=120)
        response.raise_for_status()
        return Image.open(io.BytesIO(response.content)).convert("RGB")


def get_backend(config: BridgeConfig):
    generator_id = config.generator_id
    if generator_id == "shapes":
        return ShapeSceneBackend(config)
    if generator_id.startswith("diffusers:"):
        return DiffusersBackend(config)
    if generator_id.startswith(("http://", "https://")):
        return HttpBackend(config)
    raise BackendUnavailable(
        f"unknown generator_id {generator_id!r}; expected 'shapes', "
        "'diffusers:<model>', or an http(s) endpoint"
    )
