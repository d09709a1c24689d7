from .config import BridgeConfig, load_config
from .pipeline import load_prompt_jobs, run_bridge

__version__ = "0.1.0"

__all__ = ["BridgeConfig", "load_config", "load_prompt_jobs", "run_bridge"]
