"""Syllable-structure decoder over acoustic features, in plain numpy.

One decode step embeds the previous syllable triplet, runs single-query
multi-head cross-attention over the acoustic frames (no residual), and
feeds the attended feature to a factored prediction head: rhyme logits
come straight off the feature, and a sigmoid/tanh gate conditioned on
those logits produces the feature the initial and tone heads share.

Everything is double precision with hand-written gradients; grad_check
verifies them against central finite differences.  Training is plain
fixed-step full-batch gradient descent with teacher forcing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AllPadded, EmptyInput, NonFinite, ShapeMismatch, UnknownId
from .inventory import BOS_ID, EOS_ID, PAD_ID, SyllableTriplet


@dataclass(frozen=True)
class DecoderConfig:
    dim: int
    heads: int
    v_initial: int
    v_rhyme: int
    v_tone: int
    max_syllables: int = 32
    use_positions: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim <= 0 or self.heads <= 0 or self.dim % self.heads:
            raise ShapeMismatch(
                f"dim {self.dim} must be a positive multiple of heads {self.heads}")
        for name in ("v_initial", "v_rhyme", "v_tone"):
            if getattr(self, name) < 5:
                raise ShapeMismatch(f"{name} must cover 4 specials plus content")
        if self.max_syllables < 1:
            raise ShapeMismatch("max_syllables must be at least 1")


@dataclass
class DecoderParams:
    emb_initial: np.ndarray
    emb_rhyme: np.ndarray
    emb_tone: np.ndarray
    w_embed: np.ndarray
    b_embed: np.ndarray
    attn_wq: np.ndarray
    attn_bq: np.ndarray
    attn_wk: np.ndarray
    attn_bk: np.ndarray
    attn_wv: np.ndarray
    attn_bv: np.ndarray
    attn_wo: np.ndarray
    attn_bo: np.ndarray
    w_rhyme: np.ndarray
    b_rhyme: np.ndarray
    gate_w: np.ndarray
    gate_b: np.ndarray
    gate_wr: np.ndarray
    gate_br: np.ndarray
    w_fuse: np.ndarray
    b_fuse: np.ndarray
    w_initial: np.ndarray
    b_initial: np.ndarray
    w_tone: np.ndarray
    b_tone: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def init_params(config: DecoderConfig) -> DecoderParams:
    """Uniform(-1/sqrt(dim), 1/sqrt(dim)) weights, zero biases, seeded."""
    rng = np.random.default_rng(config.seed)
    d = config.dim
    bound = 1.0 / math.sqrt(d)

    def w(*shape):
        return rng.uniform(-bound, bound, size=shape)

    return DecoderParams(
        emb_initial=w(config.v_initial, d),
        emb_rhyme=w(config.v_rhyme, d),
        emb_tone=w(config.v_tone, d),
        w_embed=w(d, 3 * d), b_embed=np.zeros(d),
        attn_wq=w(d, d), attn_bq=np.zeros(d),
        attn_wk=w(d, d), attn_bk=np.zeros(d),
        attn_wv=w(d, d), attn_bv=np.zeros(d),
        attn_wo=w(d, d), attn_bo=np.zeros(d),
        w_rhyme=w(config.v_rhyme, d), b_rhyme=np.zeros(config.v_rhyme),
        gate_w=w(d, d), gate_b=np.zeros(d),
        gate_wr=w(d, config.v_rhyme), gate_br=np.zeros(d),
        w_fuse=w(d, d), b_fuse=np.zeros(d),
        w_initial=w(config.v_initial, d), b_initial=np.zeros(config.v_initial),
        w_tone=w(config.v_tone, d), b_tone=np.zeros(config.v_tone),
    )


def sinusoidal_positions(length: int, dim: int) -> np.ndarray:
    """Fixed sin/cos position table of shape (length, dim)."""
    pos = np.arange(length)[:, None]
    idx = np.arange(dim // 2)[None, :]
    angles = pos / np.power(10000.0, 2 * idx / dim)
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)
    return table


def _softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _log_softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{what} contains NaN or infinity")


def _check_acoustic(acoustic: np.ndarray, dim: int) -> np.ndarray:
    acoustic = np.asarray(acoustic, dtype=float)
    if acoustic.ndim != 2 or acoustic.shape[1] != dim or acoustic.shape[0] < 1:
        raise ShapeMismatch(
            f"acoustic features must be (frames, {dim}), got {acoustic.shape}")
    _require_finite(acoustic, "acoustic features")
    return acoustic


def _check_ids(ids: np.ndarray, config: DecoderConfig) -> None:
    limits = (config.v_initial, config.v_rhyme, config.v_tone)
    for col, limit in enumerate(limits):
        column = ids[..., col]
        if column.min(initial=0) < 0 or column.max(initial=0) >= limit:
            raise UnknownId(
                f"triplet column {col} has ids outside [0, {limit})")


def embed_syllable(triplet, params: DecoderParams) -> np.ndarray:
    """Embed one id triplet: concat three table rows, project to dim."""
    ids = np.asarray(triplet, dtype=int)
    if ids.shape != (3,):
        raise ShapeMismatch(f"triplet must have three ids, got shape {ids.shape}")
    for col, table in enumerate((params.emb_initial, params.emb_rhyme, params.emb_tone)):
        if not 0 <= ids[col] < table.shape[0]:
            raise UnknownId(f"triplet column {col} id {ids[col]} outside its table")
    return _embed(ids[None, :], params)[0]


def _embed(ids: np.ndarray, params: DecoderParams) -> np.ndarray:
    cat = np.concatenate([params.emb_initial[ids[:, 0]],
                          params.emb_rhyme[ids[:, 1]],
                          params.emb_tone[ids[:, 2]]], axis=1)
    return cat @ params.w_embed.T + params.b_embed


def cross_attend(queries: np.ndarray, acoustic: np.ndarray,
                 params: DecoderParams, heads: int) -> np.ndarray:
    """Multi-head cross-attention of query vectors over acoustic frames.

    `queries` is (dim,) or (k, dim); each query attends independently.
    No residual connection: the output is the projected context alone.
    """
    q_in = np.asarray(queries, dtype=float)
    single = q_in.ndim == 1
    if single:
        q_in = q_in[None, :]
    dim = params.attn_wq.shape[0]
    if q_in.ndim != 2 or q_in.shape[1] != dim:
        raise ShapeMismatch(f"queries must be (*, {dim}), got {np.shape(queries)}")
    _require_finite(q_in, "queries")
    acoustic = _check_acoustic(acoustic, dim)
    out = _attend(q_in, acoustic, params, heads)["context"]
    return out[0] if single else out


def _attend(x: np.ndarray, acoustic: np.ndarray, params: DecoderParams,
            heads: int) -> dict:
    L, d = x.shape
    T = acoustic.shape[0]
    dh = d // heads
    scale = 1.0 / math.sqrt(dh)
    q = x @ params.attn_wq.T + params.attn_bq
    k = acoustic @ params.attn_wk.T + params.attn_bk
    v = acoustic @ params.attn_wv.T + params.attn_bv
    qh = q.reshape(L, heads, dh)
    kh = k.reshape(T, heads, dh)
    vh = v.reshape(T, heads, dh)
    scores = np.einsum("lhd,thd->hlt", qh, kh) * scale
    alphas = _softmax(scores, axis=-1)
    ctx = np.einsum("hlt,thd->lhd", alphas, vh).reshape(L, d)
    context = ctx @ params.attn_wo.T + params.attn_bo
    return {"q": q, "k": k, "v": v, "alphas": alphas, "ctx": ctx,
            "context": context, "scale": scale, "heads": heads}


def _head(f: np.ndarray, params: DecoderParams) -> dict:
    """The factored prediction head on attended features f of shape (L, dim)."""
    rhyme_logits = f @ params.w_rhyme.T + params.b_rhyme
    gate = _sigmoid(f @ params.gate_w.T + params.gate_b)
    mod = np.tanh(rhyme_logits @ params.gate_wr.T + params.gate_br)
    fused = gate * mod
    trunk = np.tanh(fused @ params.w_fuse.T + params.b_fuse)
    initial_logits = trunk @ params.w_initial.T + params.b_initial
    tone_logits = trunk @ params.w_tone.T + params.b_tone
    return {"rhyme_logits": rhyme_logits, "gate": gate, "mod": mod,
            "fused": fused, "trunk": trunk,
            "initial_logits": initial_logits, "tone_logits": tone_logits}


@dataclass(frozen=True)
class StepOutput:
    p_initial: np.ndarray
    p_rhyme: np.ndarray
    p_tone: np.ndarray


def predict_step(features, params: DecoderParams) -> StepOutput:
    """Distributions over initial, rhyme and tone for one attended feature."""
    f = np.asarray(features, dtype=float)
    dim = params.gate_w.shape[1]
    if f.shape != (dim,):
        raise ShapeMismatch(f"features must be ({dim},), got {f.shape}")
    _require_finite(f, "features")
    head = _head(f[None, :], params)
    return StepOutput(
        p_initial=_softmax(head["initial_logits"])[0],
        p_rhyme=_softmax(head["rhyme_logits"])[0],
        p_tone=_softmax(head["tone_logits"])[0],
    )


def _effective_targets(targets: np.ndarray, config: DecoderConfig) -> np.ndarray:
    """Strip trailing all-PAD rows; padding may only be a suffix."""
    targets = np.asarray(targets, dtype=int)
    if targets.ndim != 2 or targets.shape[1] != 3:
        raise ShapeMismatch(f"targets must be (L, 3), got {targets.shape}")
    pad_row = np.all(targets == PAD_ID, axis=1)
    keep = int(np.argmax(pad_row)) if pad_row.any() else targets.shape[0]
    if pad_row[keep:].size and not pad_row[keep:].all():
        raise ShapeMismatch("PAD rows must form a suffix of the targets")
    content = targets[:keep]
    _check_ids(content, config)
    return content


def _teacher_io(targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """BOS-shifted inputs and EOS-terminated outputs for teacher forcing."""
    L = targets.shape[0]
    inputs = np.full((L + 1, 3), BOS_ID, dtype=int)
    inputs[1:] = targets
    outputs = np.full((L + 1, 3), EOS_ID, dtype=int)
    outputs[:L] = targets
    return inputs, outputs


def _forward(acoustic: np.ndarray, inputs: np.ndarray, params: DecoderParams,
             config: DecoderConfig) -> dict:
    ids = inputs
    cat = np.concatenate([params.emb_initial[ids[:, 0]],
                          params.emb_rhyme[ids[:, 1]],
                          params.emb_tone[ids[:, 2]]], axis=1)
    x = cat @ params.w_embed.T + params.b_embed
    if config.use_positions:
        x = x + sinusoidal_positions(ids.shape[0], config.dim)
    attn = _attend(x, acoustic, params, config.heads)
    head = _head(attn["context"], params)
    return {"ids": ids, "cat": cat, "x": x, "attn": attn, "head": head}


def _position_losses(head: dict, outputs: np.ndarray) -> np.ndarray:
    """Per-position sum of the three cross-entropies."""
    rows = np.arange(outputs.shape[0])
    lp_r = _log_softmax(head["rhyme_logits"])[rows, outputs[:, 1]]
    lp_i = _log_softmax(head["initial_logits"])[rows, outputs[:, 0]]
    lp_t = _log_softmax(head["tone_logits"])[rows, outputs[:, 2]]
    return -(lp_r + lp_i + lp_t)


def _normalize_batch(batch, config: DecoderConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    pairs = []
    for acoustic, targets in batch:
        pairs.append((_check_acoustic(acoustic, config.dim),
                      _effective_targets(targets, config)))
    if not pairs:
        raise EmptyInput("empty batch")
    if all(t.shape[0] == 0 for _, t in pairs):
        raise AllPadded("every target sequence in the batch is padding")
    return pairs


def loss(batch: Iterable, params: DecoderParams, config: DecoderConfig) -> float:
    """Mean over non-PAD teacher-forced positions of CE_r + CE_i + CE_t."""
    pairs = _normalize_batch(batch, config)
    total_positions = sum(t.shape[0] + 1 for _, t in pairs if t.shape[0] > 0)
    acc = 0.0
    for acoustic, targets in pairs:
        if targets.shape[0] == 0:
            continue
        inputs, outputs = _teacher_io(targets)
        fwd = _forward(acoustic, inputs, params, config)
        acc += float(_position_losses(fwd["head"], outputs).sum())
    return acc / total_positions


def loss_and_grads(batch: Iterable, params: DecoderParams, config: DecoderConfig
                   ) -> tuple[float, dict[str, np.ndarray]]:
    """The training loss plus its gradient for every parameter tensor."""
    pairs = _normalize_batch(batch, config)
    total_positions = sum(t.shape[0] + 1 for _, t in pairs if t.shape[0] > 0)
    grads = {name: np.zeros_like(arr) for name, arr in params.as_dict().items()}
    acc = 0.0
    inv_n = 1.0 / total_positions
    for acoustic, targets in pairs:
        if targets.shape[0] == 0:
            continue
        inputs, outputs = _teacher_io(targets)
        fwd = _forward(acoustic, inputs, params, config)
        acc += float(_position_losses(fwd["head"], outputs).sum())
        _backward(fwd, outputs, acoustic, params, config, inv_n, grads)
    return acc * inv_n, grads


def _backward(fwd: dict, outputs: np.ndarray, acoustic: np.ndarray,
              params: DecoderParams, config: DecoderConfig, weight: float,
              grads: dict[str, np.ndarray]) -> None:
    head = fwd["head"]
    attn = fwd["attn"]
    L = outputs.shape[0]
    rows = np.arange(L)

    def ce_grad(logits: np.ndarray, ids: np.ndarray) -> np.ndarray:
        g = _softmax(logits)
        g[rows, ids] -= 1.0
        return g * weight

    d_logit_i = ce_grad(head["initial_logits"], outputs[:, 0])
    d_logit_t = ce_grad(head["tone_logits"], outputs[:, 2])
    d_logit_r = ce_grad(head["rhyme_logits"], outputs[:, 1])

    # initial and tone heads share the trunk
    grads["w_initial"] += d_logit_i.T @ head["trunk"]
    grads["b_initial"] += d_logit_i.sum(axis=0)
    grads["w_tone"] += d_logit_t.T @ head["trunk"]
    grads["b_tone"] += d_logit_t.sum(axis=0)
    d_trunk = d_logit_i @ params.w_initial + d_logit_t @ params.w_tone

    d_pre_fuse = d_trunk * (1.0 - head["trunk"] ** 2)
    grads["w_fuse"] += d_pre_fuse.T @ head["fused"]
    grads["b_fuse"] += d_pre_fuse.sum(axis=0)
    d_fused = d_pre_fuse @ params.w_fuse

    gate, mod = head["gate"], head["mod"]
    d_gate = d_fused * mod
    d_mod = d_fused * gate
    d_pre_gate = d_gate * gate * (1.0 - gate)
    d_pre_mod = d_mod * (1.0 - mod ** 2)

    f = attn["context"]
    grads["gate_w"] += d_pre_gate.T @ f
    grads["gate_b"] += d_pre_gate.sum(axis=0)
    grads["gate_wr"] += d_pre_mod.T @ head["rhyme_logits"]
    grads["gate_br"] += d_pre_mod.sum(axis=0)

    # rhyme logits feed both their own cross-entropy and the gate modulation
    d_rhyme_logits = d_logit_r + d_pre_mod @ params.gate_wr
    grads["w_rhyme"] += d_rhyme_logits.T @ f
    grads["b_rhyme"] += d_rhyme_logits.sum(axis=0)

    d_f = d_pre_gate @ params.gate_w + d_rhyme_logits @ params.w_rhyme

    # attention backward
    heads_n = attn["heads"]
    d = config.dim
    dh = d // heads_n
    T = acoustic.shape[0]
    grads["attn_wo"] += d_f.T @ attn["ctx"]
    grads["attn_bo"] += d_f.sum(axis=0)
    d_ctx = (d_f @ params.attn_wo).reshape(L, heads_n, dh)

    vh = attn["v"].reshape(T, heads_n, dh)
    alphas = attn["alphas"]
    d_alphas = np.einsum("lhd,thd->hlt", d_ctx, vh)
    d_vh = np.einsum("hlt,lhd->thd", alphas, d_ctx)
    d_scores = alphas * (d_alphas - (d_alphas * alphas).sum(axis=-1, keepdims=True))
    d_scores *= attn["scale"]
    kh = attn["k"].reshape(T, heads_n, dh)
    qh = attn["q"].reshape(L, heads_n, dh)
    d_qh = np.einsum("hlt,thd->lhd", d_scores, kh)
    d_kh = np.einsum("hlt,lhd->thd", d_scores, qh)

    d_q = d_qh.reshape(L, d)
    d_k = d_kh.reshape(T, d)
    d_v = d_vh.reshape(T, d)
    grads["attn_wq"] += d_q.T @ fwd["x"]
    grads["attn_bq"] += d_q.sum(axis=0)
    grads["attn_wk"] += d_k.T @ acoustic
    grads["attn_bk"] += d_k.sum(axis=0)
    grads["attn_wv"] += d_v.T @ acoustic
    grads["attn_bv"] += d_v.sum(axis=0)

    # only the query path reaches the embeddings; positions are constants
    d_x = d_q @ params.attn_wq
    grads["w_embed"] += d_x.T @ fwd["cat"]
    grads["b_embed"] += d_x.sum(axis=0)
    d_cat = d_x @ params.w_embed

    ids = fwd["ids"]
    np.add.at(grads["emb_initial"], ids[:, 0], d_cat[:, :d])
    np.add.at(grads["emb_rhyme"], ids[:, 1], d_cat[:, d:2 * d])
    np.add.at(grads["emb_tone"], ids[:, 2], d_cat[:, 2 * d:])


def grad_check(fn: Callable[[DecoderParams], tuple[float, dict[str, np.ndarray]]],
               params: DecoderParams, epsilon: float = 1e-5,
               samples: int = 200, seed: int = 0) -> float:
    """Worst relative error between analytic and central-difference gradients.

    `fn` maps the (mutable) params to (loss, grads).  At least one
    coordinate of every tensor is probed; the remaining sample budget is
    spread over tensors proportionally to their size.
    """
    arrays = params.as_dict()
    names = sorted(arrays)
    if samples < len(names):
        raise ValueError(f"need at least {len(names)} samples to cover every tensor")
    rng = np.random.default_rng(seed)
    _, grads = fn(params)

    sizes = np.array([arrays[n].size for n in names], dtype=float)
    extra = np.floor((samples - len(names)) * sizes / sizes.sum()).astype(int)
    quota = dict(zip(names, 1 + extra))

    worst = 0.0
    for name in names:
        arr = arrays[name]
        flat = arr.ravel()
        g_flat = grads[name].ravel()
        for idx in rng.choice(flat.size, size=min(quota[name], flat.size), replace=False):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            up, _ = fn(params)
            flat[idx] = orig - epsilon
            down, _ = fn(params)
            flat[idx] = orig
            fd = (up - down) / (2.0 * epsilon)
            rel = abs(g_flat[idx] - fd) / max(1e-8, abs(g_flat[idx]) + abs(fd))
            worst = max(worst, rel)
    return worst


def decode_greedy(acoustic: np.ndarray, params: DecoderParams,
                  config: DecoderConfig) -> list[SyllableTriplet]:
    """Greedy decoding from BOS until the rhyme head emits EOS."""
    acoustic = _check_acoustic(acoustic, config.dim)
    positions = sinusoidal_positions(config.max_syllables + 1, config.dim)
    prev = np.array([BOS_ID, BOS_ID, BOS_ID])
    out: list[SyllableTriplet] = []
    for step in range(config.max_syllables + 1):
        x = _embed(prev[None, :], params)
        if config.use_positions:
            x = x + positions[step]
        f = _attend(x, acoustic, params, config.heads)["context"]
        head = _head(f, params)
        triplet = SyllableTriplet(int(head["initial_logits"][0].argmax()),
                                  int(head["rhyme_logits"][0].argmax()),
                                  int(head["tone_logits"][0].argmax()))
        if triplet.rhyme_id == EOS_ID or len(out) >= config.max_syllables:
            break
        out.append(triplet)
        prev = np.asarray(triplet)
    return out


def token_accuracy(batch: Iterable, params: DecoderParams,
                   config: DecoderConfig) -> float:
    """Teacher-forced accuracy over every component of every position."""
    pairs = _normalize_batch(batch, config)
    correct = 0
    total = 0
    for acoustic, targets in pairs:
        if targets.shape[0] == 0:
            continue
        inputs, outputs = _teacher_io(targets)
        head = _forward(acoustic, inputs, params, config)["head"]
        for key, col in (("initial_logits", 0), ("rhyme_logits", 1), ("tone_logits", 2)):
            correct += int((head[key].argmax(axis=1) == outputs[:, col]).sum())
            total += outputs.shape[0]
    return correct / total


def exact_match_rate(batch: Iterable, params: DecoderParams,
                     config: DecoderConfig) -> float:
    """Fraction of sequences reproduced exactly by greedy decoding."""
    pairs = _normalize_batch(batch, config)
    hits = 0
    for acoustic, targets in pairs:
        decoded = decode_greedy(acoustic, params, config)
        hits += int(len(decoded) == targets.shape[0]
                    and all(tuple(d) == tuple(t) for d, t in zip(decoded, targets)))
    return hits / len(pairs)


def synth_dataset(config: DecoderConfig, n_seqs: int = 20, min_len: int = 3,
                  max_len: int = 5, frames: int = 6, seed: int = 1234
                  ) -> list[tuple[np.ndarray, np.ndarray]]:
    """Random acoustic matrices paired with random content-id targets."""
    rng = np.random.default_rng(seed)
    data = []
    for _ in range(n_seqs):
        length = int(rng.integers(min_len, max_len + 1))
        acoustic = rng.normal(size=(frames, config.dim))
        targets = np.stack([
            rng.integers(4, config.v_initial, size=length),
            rng.integers(4, config.v_rhyme, size=length),
            rng.integers(4, config.v_tone, size=length),
        ], axis=1)
        data.append((acoustic, targets))
    return data


def train(batch: Sequence, params: DecoderParams, config: DecoderConfig,
          steps: int, lr: float, stop_accuracy: float | None = None,
          check_every: int = 25) -> list[float]:
    """Plain fixed-step full-batch gradient descent; returns the loss curve."""
    arrays = params.as_dict()
    losses: list[float] = []
    for step in range(steps):
        value, grads = loss_and_grads(batch, params, config)
        losses.append(value)
        for name, arr in arrays.items():
            arr -= lr * grads[name]
        if stop_accuracy is not None and (step + 1) % check_every == 0:
            if token_accuracy(batch, params, config) >= stop_accuracy:
                break
    return losses
