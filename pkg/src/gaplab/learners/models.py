"""Policy networks.

Every architecture exposes the same three heads off a shared representation:
the main actor, an auxiliary actor (trained only by imitation; used to gauge
per-state imitability), and a critic. Families:

  lh2d      observation index -> three linear maps (no shared nonlinearity;
            lookup rows of a (6400, out) matrix is the one-hot matmul)
  pd        embedding(4 -> 128) -> LSTM(128) -> linear heads
  crossing  three 8-dim embeddings (type/color/state) over the 7x7 view
            -> flatten to 1176 -> LSTM(128) -> linear heads

Two forward paths: `step_np` is the graph-free rollout/eval hot path on raw
arrays; `forward_seq` builds the autodiff graph over a (T, B) window for
updates. Both apply the same legality masking (additive -1e9 on the logits),
so stored behavior log-probs match update-time recomputation.
"""

from __future__ import annotations

import numpy as np

from .. import diffcore as dc

MASK_NEG = -1e9


def _masked_softmax_np(logits: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    if mask is not None:
        logits = logits + np.where(mask > 0, 0.0, MASK_NEG)
    return dc.softmax_np(logits)


class TabularPolicy:
    """Independent linear heads over a finite observation vocabulary."""

    recurrent = False

    def __init__(self, vocab: int, n_actions: int):
        self.vocab = vocab
        self.n_actions = n_actions

    def init_params(self, rng: np.random.Generator) -> dc.ParamStore:
        params = dc.ParamStore()
        k = 1.0 / np.sqrt(self.vocab)
        params.add("pi/w", rng.uniform(-k, k, (self.vocab, self.n_actions)))
        params.add("pi/b", np.zeros(self.n_actions))
        params.add("aux/w", rng.uniform(-k, k, (self.vocab, self.n_actions)))
        params.add("aux/b", np.zeros(self.n_actions))
        params.add("v/w", rng.uniform(-k, k, (self.vocab, 1)))
        params.add("v/b", np.zeros(1))
        return params

    def initial_state(self, n_lanes: int):
        return None

    def step_np(self, params, obs: np.ndarray, rec, mask):
        logits = params["pi/w"].data[obs] + params["pi/b"].data
        probs = _masked_softmax_np(logits, mask)
        values = params["v/w"].data[obs, 0] + params["v/b"].data[0]
        return probs, values, rec

    def forward_seq(self, params, obs_seq: np.ndarray, begin, h0, c0, mask_seq):
        idx = obs_seq.reshape(-1)
        logits = dc.add(dc.embedding(params["pi/w"], idx), params["pi/b"])
        aux_logits = dc.add(dc.embedding(params["aux/w"], idx), params["aux/b"])
        if mask_seq is not None:
            log_mask = np.where(mask_seq.reshape(-1, self.n_actions) > 0, 0.0, MASK_NEG)
            logits = dc.add(logits, log_mask)
            aux_logits = dc.add(aux_logits, log_mask)
        values = dc.reshape(dc.add(dc.embedding(params["v/w"], idx), params["v/b"]), (-1,))
        return {"probs": dc.softmax(logits), "aux_probs": dc.softmax(aux_logits),
                "values": values}


class RecurrentPolicy:
    """Embedding -> LSTM(hidden) -> linear heads; pd and crossing variants."""

    recurrent = True

    def __init__(self, obs_kind: str, n_actions: int, vocab: int = 4,
                 embed_dim: int = 128, hidden: int = 128, cell_embed: int = 8,
                 view_cells: int = 49):
        if obs_kind not in ("cat", "grid"):
            raise ValueError(f"unsupported observation kind {obs_kind!r}")
        self.obs_kind = obs_kind
        self.n_actions = n_actions
        self.vocab = vocab
        self.hidden = hidden
        self.cell_embed = cell_embed
        self.view_cells = view_cells
        if obs_kind == "cat":
            self.in_dim = embed_dim
        else:
            self.in_dim = view_cells * 3 * cell_embed

    def init_params(self, rng: np.random.Generator) -> dc.ParamStore:
        params = dc.ParamStore()
        h = self.hidden
        if self.obs_kind == "cat":
            ke = 1.0 / np.sqrt(self.in_dim)
            params.add("emb", rng.uniform(-ke, ke, (self.vocab, self.in_dim)))
        else:
            ke = 1.0 / np.sqrt(self.cell_embed)
            for name in ("emb/type", "emb/color", "emb/state"):
                params.add(name, rng.uniform(-ke, ke, (8, self.cell_embed)))
        kx = 1.0 / np.sqrt(self.in_dim)
        kh = 1.0 / np.sqrt(h)
        params.add("lstm/wx", rng.uniform(-kx, kx, (self.in_dim, 4 * h)))
        params.add("lstm/wh", rng.uniform(-kh, kh, (h, 4 * h)))
        params.add("lstm/b", np.zeros(4 * h))
        params.add("pi/w", rng.uniform(-kh, kh, (h, self.n_actions)))
        params.add("pi/b", np.zeros(self.n_actions))
        params.add("aux/w", rng.uniform(-kh, kh, (h, self.n_actions)))
        params.add("aux/b", np.zeros(self.n_actions))
        params.add("v/w", rng.uniform(-kh, kh, (h, 1)))
        params.add("v/b", np.zeros(1))
        return params

    def initial_state(self, n_lanes: int):
        return (np.zeros((n_lanes, self.hidden)), np.zeros((n_lanes, self.hidden)))

    def _embed_np(self, params, obs: np.ndarray) -> np.ndarray:
        if self.obs_kind == "cat":
            return params["emb"].data[obs]
        flat = obs.reshape(obs.shape[0], self.view_cells, 3)
        parts = [params["emb/type"].data[flat[:, :, 0]],
                 params["emb/color"].data[flat[:, :, 1]],
                 params["emb/state"].data[flat[:, :, 2]]]
        return np.concatenate(parts, axis=2).reshape(obs.shape[0], self.in_dim)

    def step_np(self, params, obs: np.ndarray, rec, mask):
        h, c = rec
        x = self._embed_np(params, obs)
        h_new, c_new = dc.lstm_step_np(x, h, c, params["lstm/wx"].data,
                                       params["lstm/wh"].data, params["lstm/b"].data)
        logits = h_new @ params["pi/w"].data + params["pi/b"].data
        probs = _masked_softmax_np(logits, mask)
        values = h_new @ params["v/w"].data[:, 0] + params["v/b"].data[0]
        return probs, values, (h_new, c_new)

    def forward_seq(self, params, obs_seq: np.ndarray, begin, h0, c0, mask_seq):
        t_len, n_b = obs_seq.shape[0], obs_seq.shape[1]
        if self.obs_kind == "cat":
            x = dc.embedding(params["emb"], obs_seq)
        else:
            flat = obs_seq.reshape(t_len * n_b, self.view_cells, 3)
            cells = dc.grid_embed(params["emb/type"], params["emb/color"],
                                  params["emb/state"], flat)
            x = dc.reshape(cells, (t_len, n_b, self.in_dim))
        hs = dc.lstm_sequence(x, dc.as_tensor(h0), dc.as_tensor(c0),
                              params["lstm/wx"], params["lstm/wh"], params["lstm/b"],
                              begin)
        feats = dc.reshape(hs, (t_len * n_b, self.hidden))
        logits = dc.linear(feats, params["pi/w"], params["pi/b"])
        aux_logits = dc.linear(feats, params["aux/w"], params["aux/b"])
        if mask_seq is not None:
            log_mask = np.where(mask_seq.reshape(-1, self.n_actions) > 0, 0.0, MASK_NEG)
            logits = dc.add(logits, log_mask)
            aux_logits = dc.add(aux_logits, log_mask)
        values = dc.reshape(dc.linear(feats, params["v/w"], params["v/b"]), (-1,))
        return {"probs": dc.softmax(logits), "aux_probs": dc.softmax(aux_logits),
                "values": values}


def make_policy(env):
    kind, size = env.obs_spec
    if kind == "index":
        return TabularPolicy(vocab=size, n_actions=env.action_count)
    if kind == "cat":
        return RecurrentPolicy("cat", env.action_count, vocab=size)
    if kind == "grid":
        cells = size[0] * size[1]
        return RecurrentPolicy("grid", env.action_count, view_cells=cells)
    raise ValueError(f"no policy for observation kind {kind!r}")
