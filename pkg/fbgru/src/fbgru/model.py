"""Two bidirectional GRU layers plus a four-layer fully connected head.

Per time step the inputs are sigmoid(w_c * C_j) and sigmoid(w_d * D_j)
concatenated (length 2 * (2*delta+1)); the head maps the 80-dim bi-GRU
output through 40, 20 and 10 ReLU units to a single sigmoid probability.
"""

from dataclasses import dataclass

import torch
from torch import nn


@dataclass
class FbgruConfig:
    delta: int = 17
    hidden_size: int = 40      # per direction; concatenated output is 80
    num_layers: int = 2
    head_sizes: tuple = (40, 20, 10)
    batch_size: int = 200
    epochs: int = 300
    lr: float = 0.005
    input_weight_init: float = -6.0

    @property
    def window(self) -> int:
        return 2 * self.delta + 1

    @property
    def input_size(self) -> int:
        return 2 * self.window


class Fbgru(nn.Module):
    def __init__(self, config: FbgruConfig):
        super().__init__()
        self.config = config
        self.w_c = nn.Parameter(torch.tensor(float(config.input_weight_init)))
        self.w_d = nn.Parameter(torch.tensor(float(config.input_weight_init)))
        self.gru = nn.GRU(input_size=config.input_size,
                          hidden_size=config.hidden_size,
                          num_layers=config.num_layers,
                          bidirectional=True, batch_first=True)
        widths = [2 * config.hidden_size, *config.head_sizes, 1]
        layers = []
        for i in range(len(widths) - 1):
            layers.append(nn.Linear(widths[i], widths[i + 1]))
            layers.append(nn.ReLU() if i < len(widths) - 2 else nn.Sigmoid())
        self.head = nn.Sequential(*layers)

    def forward(self, c: torch.Tensor, d: torch.Tensor) -> torch.Tensor:
        """c, d: (batch, steps, window) -> O: (batch, steps) in (0, 1)."""
        x = torch.cat([torch.sigmoid(self.w_c * c), torch.sigmoid(self.w_d * d)],
                      dim=2)
        h, _ = self.gru(x)  # zero initial hidden states in both directions
        return self.head(h).squeeze(-1)


def save_checkpoint(model: Fbgru, path: str):
    torch.save({"config": model.config.__dict__,
                "state": model.state_dict()}, path)


def load_checkpoint(path: str) -> Fbgru:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    model = Fbgru(FbgruConfig(**blob["config"]))
    model.load_state_dict(blob["state"])
    model.eval()
    return model
