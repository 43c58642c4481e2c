"""Adamax training on (R, Y) datasets; checkpoint plus per-epoch loss CSV."""

import numpy as np
import torch

from .dataio import read_dataset
from .features import build_windows
from .model import Fbgru, FbgruConfig, save_checkpoint


def load_training_tensors(path: str, config: FbgruConfig, limit: int = None):
    blocks, records = read_dataset(path)
    if limit:
        records = records[:limit]
    if not records:
        raise ValueError(f"{path}: empty dataset")
    cs, ds, labels = [], [], []
    for bi, y_bits, r in records:
        c, d = build_windows(r, blocks[bi], config.delta)
        cs.append(c)
        ds.append(d)
        labels.append(y_bits.astype(np.float64))
    return (torch.tensor(np.stack(cs), dtype=torch.float32),
            torch.tensor(np.stack(ds), dtype=torch.float32),
            torch.tensor(np.stack(labels), dtype=torch.float32))


def bce(labels: torch.Tensor, o: torch.Tensor) -> torch.Tensor:
    oc = o.clamp(1e-12, 1.0 - 1e-12)
    return -(labels * oc.log() + (1.0 - labels) * (1.0 - oc).log()).mean()


def train(data_path: str, config: FbgruConfig, seed: int = 0,
          checkpoint_path: str = None, loss_csv: str = None,
          limit: int = None, verbose: bool = True):
    torch.manual_seed(seed)
    c, d, labels = load_training_tensors(data_path, config, limit=limit)
    model = Fbgru(config)
    opt = torch.optim.Adamax(model.parameters(), lr=config.lr)
    n = c.shape[0]
    gen = torch.Generator().manual_seed(seed)
    trace = []
    for epoch in range(config.epochs):
        order = torch.randperm(n, generator=gen)
        total = 0.0
        nb = 0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            opt.zero_grad()
            o = model(c[idx], d[idx])
            loss = bce(labels[idx], o)
            if not torch.isfinite(loss):
                raise FloatingPointError(f"non-finite loss at epoch {epoch}")
            loss.backward()
            opt.step()
            total += loss.item()
            nb += 1
        trace.append(total / nb)
        if verbose and (epoch % 5 == 0 or epoch == config.epochs - 1):
            print(f"epoch {epoch:4d}  loss {trace[-1]:.6f}", flush=True)
    if checkpoint_path:
        save_checkpoint(model, checkpoint_path)
    if loss_csv:
        with open(loss_csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,loss\n")
            for i, v in enumerate(trace):
                fh.write(f"{i},{v:.17g}\n")
    return model, np.array(trace)
