"""Pipeline configuration: a flat key = value text file."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from treeqg.rank import DEFAULT_FILTERS


@dataclass
class Config:
    """Tunable knobs for induction, ranking, filtering, and evaluation.

    Keys in the config file: ngram_order, alpha, weights (two
    comma-separated floats: morph, question word), theta_content,
    filters (comma-separated rule names), rouge_beta, seed.
    """

    ngram_order: int = 3
    alpha: float = 1.0
    weights: tuple[float, float] = (1.0, 1.0)
    theta_content: float = 1.0
    filters: tuple[str, ...] = DEFAULT_FILTERS
    rouge_beta: float = 1.2
    seed: int = 0


def load_config(path: str | Path) -> Config:
    """Parse a config file; '#' comments and blank lines are ignored."""
    cfg = Config()
    for lineno, raw in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key = key.strip()
        value = value.strip()
        try:
            if key == "ngram_order":
                cfg.ngram_order = int(value)
            elif key == "alpha":
                cfg.alpha = float(value)
            elif key == "weights":
                parts = [float(v) for v in value.split(",")]
                if len(parts) != 2:
                    raise ValueError("weights needs exactly two values")
                cfg.weights = (parts[0], parts[1])
            elif key == "theta_content":
                cfg.theta_content = float(value)
            elif key == "filters":
                cfg.filters = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "rouge_beta":
                cfg.rouge_beta = float(value)
            elif key == "seed":
                cfg.seed = int(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as err:
            raise ValueError(f"{path}:{lineno}: {err}") from None
    return cfg
