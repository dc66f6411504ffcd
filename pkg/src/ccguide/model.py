"""Canonical-correlation guided networks.

A :class:`CcdnnModel` stacks one or more blocks. Each block runs two
encoders, centres their outputs with the stored CCA means and passes them
through the redundancy filter. Between blocks the filter outputs are stacked
on top of the block inputs (residual concatenation along the feature axis),
and the last block feeds a task head:

* ``reconstruct`` - two decoders, ``dec1(r1) -> x1`` and ``dec2(r2) -> x2``
* ``classify`` - a dense network on ``[r1; r2]`` followed by softmax
* ``regress`` - a dense network on ``[r1; r2]``

CCA constants are refitted by :func:`refresh_constraint` and treated as
constants during backpropagation.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .cca import CcaResult, dcca_gradient, dcca_objective, fit_cca, total_correlation
from .data import metric_accuracy, metric_mae, metric_mse, stream
from .errors import InvalidInputError, NumericalFailureError, TrainingDivergedError
from .filter import FilterParams, apply_filter, filter_backward
from .nn import Network, TrainConfig, backward, forward, sgd_step, softmax, softmax_cross_entropy

TASKS = ("reconstruct", "classify", "regress")
REFRESH_MODES = ("per_epoch", "per_k_batches")
# ridge used when total correlation is reported as a metric
METRIC_REG = 1e-4


@dataclass
class RefreshPolicy:
    """When and on what sample the CCA constants are refitted.

    With ``relative_reg`` the ridge added to the feature covariances is
    ``reg`` times the mean feature variance of the two views, which makes the
    constraint independent of the encoders' output scale; otherwise ``reg``
    is used as is.
    """

    mode: str = "per_epoch"
    k: int = 1
    reference_sample_size: int = 2048
    reg: float = 0.1
    relative_reg: bool = True

    def ridge(self, z1, z2):
        if not self.relative_reg:
            return self.reg
        var = np.concatenate([z1.var(axis=1, ddof=1), z2.var(axis=1, ddof=1)])
        return self.reg * float(np.mean(var))

    def __post_init__(self):
        if self.mode not in REFRESH_MODES:
            raise InvalidInputError(f"refresh mode must be one of {REFRESH_MODES}")
        if self.k < 1:
            raise InvalidInputError("k must be at least 1")
        if self.reg < 0:
            raise InvalidInputError("reg must be non-negative")


class CcdnnBlock:
    def __init__(self, enc1, enc2):
        self.enc1 = enc1
        self.enc2 = enc2
        self.set_cca(CcaResult.identity(enc1.out_dim, enc2.out_dim))

    def set_cca(self, cca):
        if cca.dims != (self.enc1.out_dim, self.enc2.out_dim):
            raise InvalidInputError(
                f"CCA dims {cca.dims} do not match encoder outputs "
                f"({self.enc1.out_dim}, {self.enc2.out_dim})"
            )
        self.cca = cca
        self.filter = FilterParams.from_cca(cca)

    @property
    def in_dims(self):
        return self.enc1.in_dim, self.enc2.in_dim

    @property
    def latent_dims(self):
        return self.enc1.out_dim, self.enc2.out_dim


class CcdnnModel:
    """Stacked CCDNN blocks plus a task head.

    ``heads`` maps names to networks: ``dec1``/``dec2`` for reconstruction,
    ``dense`` otherwise. ``use_filter=False`` gives the filter-free ablation
    (``r1 = J'z1``, ``r2 = L'z2``); ``constrained=False`` removes the CCA and
    filter layers altogether (``r = z``), which is the plain two-view network.
    """

    def __init__(self, task, blocks, heads, use_filter=True, constrained=True, spec=None):
        if task not in TASKS:
            raise InvalidInputError(f"task must be one of {TASKS}, got {task!r}")
        if not blocks:
            raise InvalidInputError("a model needs at least one block")
        for prev, nxt in zip(blocks[:-1], blocks[1:]):
            want = (prev.latent_dims[0] + prev.in_dims[0], prev.latent_dims[1] + prev.in_dims[1])
            if nxt.in_dims != want:
                raise InvalidInputError(
                    f"block input dims {nxt.in_dims} break the residual rule, expected {want}"
                )
        self.task = task
        self.blocks = list(blocks)
        self.heads = dict(heads)
        self.use_filter = use_filter
        self.constrained = constrained
        self.spec = dict(spec or {})
        out = self.heads["dense"].out_dim if "dense" in self.heads else 0
        self.target_mean = np.asarray(self.spec.get("target_mean", np.zeros(out)), dtype=np.float64)
        self.target_std = np.asarray(self.spec.get("target_std", np.ones(out)), dtype=np.float64)

    @property
    def label(self):
        if not self.constrained:
            return "plain"
        return "CCDNN" if self.use_filter else "CCDNN_wRF"

    @property
    def in_dims(self):
        return self.blocks[0].in_dims

    def networks(self):
        """``(name, network)`` pairs in parameter order."""
        out = []
        for i, blk in enumerate(self.blocks):
            out.append((f"block{i}.enc1", blk.enc1))
            out.append((f"block{i}.enc2", blk.enc2))
        for name in sorted(self.heads):
            out.append((f"head.{name}", self.heads[name]))
        return out

    @property
    def parameter_count(self):
        return sum(net.parameter_count for _, net in self.networks())

    def get_params(self):
        return np.concatenate([net.params for _, net in self.networks()])

    def set_params(self, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.parameter_count:
            raise InvalidInputError(
                f"expected {self.parameter_count} parameters, got {flat.size}"
            )
        offset = 0
        for _, net in self.networks():
            net.set_params(flat[offset:offset + net.parameter_count])
            offset += net.parameter_count


def _mlp(dims, hidden_act, out_act, rng):
    acts = [hidden_act] * (len(dims) - 2) + [out_act]
    return Network.create(dims, acts, rng)


def build_ccdnn(task, in_dims, latent=(8, 8), enc_hidden=(32,), head_hidden=(32,),
                out_dim=None, n_blocks=1, seed=0, use_filter=True, constrained=True,
                activation="tanh", recon_activation="identity", target_mean=None,
                target_std=None):
    """Construct a freshly initialised model.

    Encoders are ``in -> enc_hidden... -> latent`` with a linear output.
    Block ``i+1`` takes inputs of width ``latent + input width of block i``.
    ``out_dim`` is the class count (classify) or target width (regress).
    For regression the dense output is mapped to ``target_mean + target_std
    * output``; these are fixed constants, normally the training-target
    statistics.
    """
    if task not in TASKS:
        raise InvalidInputError(f"task must be one of {TASKS}, got {task!r}")
    if task != "reconstruct" and not out_dim:
        raise InvalidInputError(f"task {task!r} needs out_dim")
    rng = stream(seed, "init")
    l, m = latent
    d1, d2 = in_dims
    blocks = []
    for _ in range(n_blocks):
        enc1 = _mlp([d1, *enc_hidden, l], activation, "identity", rng)
        enc2 = _mlp([d2, *enc_hidden, m], activation, "identity", rng)
        blocks.append(CcdnnBlock(enc1, enc2))
        d1, d2 = l + d1, m + d2
    if task == "reconstruct":
        a, b = in_dims
        heads = {
            "dec1": _mlp([l, *head_hidden, a], activation, recon_activation, rng),
            "dec2": _mlp([m, *head_hidden, b], activation, recon_activation, rng),
        }
    else:
        heads = {"dense": _mlp([l + m, *head_hidden, out_dim], activation, "identity", rng)}
    spec = {
        "task": task, "in_dims": list(in_dims), "latent": list(latent),
        "enc_hidden": list(enc_hidden), "head_hidden": list(head_hidden),
        "out_dim": out_dim, "n_blocks": n_blocks, "use_filter": use_filter,
        "constrained": constrained, "activation": activation,
        "recon_activation": recon_activation, "seed": seed,
    }
    if task == "regress":
        k = out_dim
        spec["target_mean"] = np.broadcast_to(
            np.asarray(0.0 if target_mean is None else target_mean, dtype=np.float64), (k,)).tolist()
        spec["target_std"] = np.broadcast_to(
            np.asarray(1.0 if target_std is None else target_std, dtype=np.float64), (k,)).tolist()
    return CcdnnModel(task, blocks, heads, use_filter, constrained, spec)


@dataclass
class TaskOutput:
    task: str
    x1_hat: np.ndarray = None
    x2_hat: np.ndarray = None
    logits: np.ndarray = None
    probs: np.ndarray = None
    y_hat: np.ndarray = None
    features: tuple = None  # final block (z1, z2)
    cache: dict = field(default=None, repr=False)


def _block_filter(model, blk, z1, z2):
    if not model.constrained:
        return z1, z2
    c = blk.cca
    return apply_filter(z1 - c.mean_u[:, None], z2 - c.mean_v[:, None], blk.filter, model.use_filter)


def forward_task(model, x1, x2):
    """Run the full model on ``(d1, B)`` and ``(d2, B)`` inputs."""
    h1 = np.asarray(x1, dtype=np.float64)
    h2 = np.asarray(x2, dtype=np.float64)
    d1, d2 = model.in_dims
    if h1.ndim != 2 or h2.ndim != 2 or h1.shape[0] != d1 or h2.shape[0] != d2:
        raise InvalidInputError(
            f"model expects views with ({d1}, {d2}) rows, got {np.shape(x1)} and {np.shape(x2)}"
        )
    if h1.shape[1] != h2.shape[1]:
        raise InvalidInputError("views must have the same number of columns")
    tapes = []
    last = len(model.blocks) - 1
    for i, blk in enumerate(model.blocks):
        z1, t1 = forward(blk.enc1, h1)
        z2, t2 = forward(blk.enc2, h2)
        r1, r2 = _block_filter(model, blk, z1, z2)
        tapes.append((t1, t2))
        if i < last:
            h1 = np.vstack([r1, h1])
            h2 = np.vstack([r2, h2])
    out = TaskOutput(model.task, features=(z1, z2))
    if model.task == "reconstruct":
        out.x1_hat, td1 = forward(model.heads["dec1"], r1)
        out.x2_hat, td2 = forward(model.heads["dec2"], r2)
        head_tapes = {"dec1": td1, "dec2": td2}
    else:
        y, td = forward(model.heads["dense"], np.vstack([r1, r2]))
        head_tapes = {"dense": td}
        if model.task == "classify":
            out.logits = y
            out.probs = softmax(y)
        else:
            out.y_hat = model.target_mean[:, None] + model.target_std[:, None] * y
    out.cache = {"blocks": tapes, "heads": head_tapes, "r_dims": (r1.shape[0], r2.shape[0])}
    return out


def loss(task, output, target):
    """Task loss and its gradient with respect to the head output.

    ``target`` is ``(x1, x2)`` for reconstruction, a one-hot matrix for
    classification and a ``(k, B)`` matrix for regression. The gradient is a
    tuple ``(g_x1hat, g_x2hat)``, ``g_logits`` or ``g_yhat`` respectively.
    """
    if task == "reconstruct":
        x1, x2 = (np.asarray(t, dtype=np.float64) for t in target)
        if x1.shape != output.x1_hat.shape or x2.shape != output.x2_hat.shape:
            raise InvalidInputError("reconstruction target shape mismatch")
        b = x1.shape[1]
        e1 = output.x1_hat - x1
        e2 = output.x2_hat - x2
        value = (float(np.sum(e1 * e1)) + float(np.sum(e2 * e2))) / b
        return value, (2.0 * e1 / b, 2.0 * e2 / b)
    if task == "classify":
        return softmax_cross_entropy(output.logits, target)
    if task == "regress":
        y = np.asarray(target, dtype=np.float64)
        if y.shape != output.y_hat.shape:
            raise InvalidInputError(f"target shape {y.shape} vs prediction {output.y_hat.shape}")
        e = output.y_hat - y
        n = y.shape[1]
        return float(np.sum(e * e)) / n, 2.0 * e / n
    raise InvalidInputError(f"unknown task {task!r}")


def backward_task(model, output, grad):
    """Flat gradient of the loss with respect to :meth:`CcdnnModel.get_params`."""
    cache = output.cache
    grads = {}
    l, m = cache["r_dims"]
    if model.task == "reconstruct":
        grads["head.dec1"], g1 = backward(model.heads["dec1"], cache["heads"]["dec1"], grad[0])
        grads["head.dec2"], g2 = backward(model.heads["dec2"], cache["heads"]["dec2"], grad[1])
    else:
        if model.task == "regress":
            grad = grad * model.target_std[:, None]
        grads["head.dense"], g = backward(model.heads["dense"], cache["heads"]["dense"], grad)
        g1, g2 = g[:l], g[l:]
    carry1 = carry2 = 0.0
    for i in range(len(model.blocks) - 1, -1, -1):
        blk = model.blocks[i]
        t1, t2 = cache["blocks"][i]
        if model.constrained:
            gz1, gz2 = filter_backward(g1, g2, blk.filter, model.use_filter)
        else:
            gz1, gz2 = g1, g2
        grads[f"block{i}.enc1"], gx1 = backward(blk.enc1, t1, gz1)
        grads[f"block{i}.enc2"], gx2 = backward(blk.enc2, t2, gz2)
        gx1 = gx1 + carry1
        gx2 = gx2 + carry2
        if i > 0:
            pl, pm = model.blocks[i - 1].latent_dims
            g1, carry1 = gx1[:pl], gx1[pl:]
            g2, carry2 = gx2[:pm], gx2[pm:]
    return np.concatenate([grads[name] for name, _ in model.networks()])


def _task_target(model, data):
    if model.task == "reconstruct":
        return (data.x1, data.x2)
    if data.target is None:
        raise InvalidInputError(f"task {model.task!r} needs targets")
    return data.target


def _reference_indices(n, policy, seed):
    size = min(n, policy.reference_sample_size)
    if size == n:
        return np.arange(n)
    return np.sort(stream(seed, "train/reference").permutation(n)[:size])


def align_signs(new, old, cov_u, cov_v):
    """Flip canonical pairs of ``new`` to agree in sign with ``old``.

    Negating column ``i`` of both ``J`` and ``L`` leaves every CCA identity
    intact, so the choice is free; picking the sign that keeps each
    projection positively correlated with its predecessor stops refreshes
    from feeding sign-flipped features to downstream layers. Unpaired
    columns (beyond ``min(l, m)``) are aligned on their own.
    """
    j, el = new.j.copy(), new.el.copy()
    score_u = np.einsum("ij,ik,kj->j", old.j, cov_u, j)
    score_v = np.einsum("ij,ik,kj->j", old.el, cov_v, el)
    k = min(j.shape[1], el.shape[1])
    paired = score_u[:k] + score_v[:k]
    for i in range(j.shape[1]):
        if (paired[i] if i < k else score_u[i]) < 0:
            j[:, i] = -j[:, i]
    for i in range(el.shape[1]):
        if (paired[i] if i < k else score_v[i]) < 0:
            el[:, i] = -el[:, i]
    return replace(new, j=j, el=el)


def refresh_constraint(model, data, policy, idx=None):
    """Refit every block's CCA constants on encoder features.

    Blocks are refitted in order so that each sees the refreshed outputs of
    the blocks before it. ``data`` is any dataset with the model's input
    widths; ``idx`` selects the reference columns (all by default).
    """
    if not model.constrained:
        return model
    x1 = data.x1 if idx is None else data.x1[:, idx]
    x2 = data.x2 if idx is None else data.x2[:, idx]
    if x1.shape[1] == 0:
        raise InvalidInputError("cannot refresh on an empty dataset")
    h1, h2 = x1, x2
    last = len(model.blocks) - 1
    for i, blk in enumerate(model.blocks):
        z1, _ = forward(blk.enc1, h1)
        z2, _ = forward(blk.enc2, h2)
        cca = fit_cca(z1, z2, reg=policy.ridge(z1, z2))
        if blk.cca.kappa or blk.cca.reg:
            cca = align_signs(cca, blk.cca, cca.cov_u, cca.cov_v)
        blk.set_cca(cca)
        if i == last:
            break
        r1, r2 = _block_filter(model, blk, z1, z2)
        h1 = np.vstack([r1, h1])
        h2 = np.vstack([r2, h2])
    return model


def predict(model, x1, x2):
    """Class indices, regression values or ``(x1_hat, x2_hat)``.

    Ties in the class scores go to the lowest class index.
    """
    out = forward_task(model, x1, x2)
    if model.task == "classify":
        return np.argmax(out.probs, axis=0)
    if model.task == "regress":
        return out.y_hat
    return out.x1_hat, out.x2_hat


def evaluate(model, data, reg=METRIC_REG):
    """Task metrics of ``model`` on every column of ``data``."""
    out = forward_task(model, data.x1, data.x2)
    value, _ = loss(model.task, out, _task_target(model, data))
    metrics = {"loss": value}
    if model.task == "classify":
        metrics["accuracy"] = metric_accuracy(np.argmax(data.target, axis=0), np.argmax(out.probs, axis=0))
    elif model.task == "regress":
        metrics["mse"] = metric_mse(data.target, out.y_hat)
        metrics["mae"] = metric_mae(data.target, out.y_hat)
    else:
        x = np.vstack([data.x1, data.x2])
        xhat = np.vstack([out.x1_hat, out.x2_hat])
        metrics["mse"] = metric_mse(x, xhat)
        metrics["mae"] = metric_mae(x, xhat)
    z1, z2 = out.features
    if data.n >= max(z1.shape[0], z2.shape[0]) + 2:
        metrics["total_correlation"] = total_correlation(z1, z2, reg)
    return metrics


@dataclass
class TrainReport:
    """Per-epoch training record. ``epochs`` holds one dict per epoch with
    ``loss``, ``total_correlation``, ``metrics`` and ``seconds``."""

    label: str
    task: str
    epochs: list = field(default_factory=list)

    @property
    def losses(self):
        return [e["loss"] for e in self.epochs]

    @property
    def final(self):
        return self.epochs[-1] if self.epochs else None

    def to_dict(self, timings=True):
        eps = [dict(e) for e in self.epochs]
        if not timings:
            for e in eps:
                e.pop("seconds", None)
        return {"label": self.label, "task": self.task, "epochs": eps}


def _minibatches(n, batch_size, rng):
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start:start + batch_size]


def _check_finite(value, epoch, report):
    if not np.isfinite(value):
        raise TrainingDivergedError(epoch, report)


def _refresh_during_training(model, data, policy, idx, step, epoch, report):
    # once parameters have moved, a failed refit means the features blew up
    try:
        refresh_constraint(model, data, policy, idx)
    except NumericalFailureError as exc:
        if step == 0:
            raise
        raise TrainingDivergedError(epoch, report, f"features degenerated ({exc})") from exc


def train(model, data, cfg, policy=None, callback=None):
    """Minibatch SGD on the training split of ``data``.

    Each epoch refreshes the CCA constants (per ``policy``), runs seeded
    shuffled minibatches, and then records the mean loss, the total
    correlation of the final block's encoder features on the reference
    sample, and the task metrics on the training split. Epoch wall time
    covers refresh and updates but not the bookkeeping.
    """
    policy = policy or RefreshPolicy()
    report = TrainReport(model.label, model.task)
    if cfg.epochs == 0:
        return report
    train_set = data.train()
    n = train_set.n
    target = _task_target(model, train_set)
    ref_idx = _reference_indices(n, policy, cfg.seed)
    shuffle = stream(cfg.seed, "train/shuffle")
    nets = model.networks()
    velocity = [None] * len(nets)
    step = 0
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        if policy.mode == "per_epoch":
            _refresh_during_training(model, train_set, policy, ref_idx, step, epoch, report)
        total, seen = 0.0, 0
        for idx in _minibatches(n, cfg.batch_size, shuffle):
            if policy.mode == "per_k_batches" and step % policy.k == 0:
                _refresh_during_training(model, train_set, policy, ref_idx, step, epoch, report)
            step += 1
            out = forward_task(model, train_set.x1[:, idx], train_set.x2[:, idx])
            if model.task == "reconstruct":
                tgt = (target[0][:, idx], target[1][:, idx])
            else:
                tgt = target[:, idx]
            value, g = loss(model.task, out, tgt)
            _check_finite(value, epoch, report)
            flat = backward_task(model, out, g)
            offset = 0
            for k, (_, net) in enumerate(nets):
                size = net.parameter_count
                velocity[k] = sgd_step(net, flat[offset:offset + size], cfg, velocity[k])
                offset += size
            total += value * idx.size
            seen += idx.size
        seconds = time.perf_counter() - t0
        try:
            metrics = evaluate(model, train_set)
            ref = forward_task(model, train_set.x1[:, ref_idx], train_set.x2[:, ref_idx])
            corr = total_correlation(*ref.features, METRIC_REG)
        except NumericalFailureError as exc:
            raise TrainingDivergedError(epoch, report, f"features degenerated ({exc})") from exc
        _check_finite(metrics["loss"], epoch, report)
        report.epochs.append({
            "epoch": epoch,
            "loss": total / seen,
            "total_correlation": corr,
            "metrics": metrics,
            "seconds": seconds,
        })
        if callback is not None:
            callback(report.epochs[-1])
    return report


def train_dcca_baseline(enc1, enc2, data, cfg, reg=1e-3, k=None):
    """Deep CCA: gradient ascent on the trace-norm correlation of the two
    encoder outputs. The reported ``loss`` is the negated objective on the
    full training split after each epoch."""
    report = TrainReport("DCCA", "dcca")
    if cfg.epochs == 0:
        return report
    if enc1.out_dim != enc2.out_dim:
        raise InvalidInputError("DCCA needs equal output widths")
    train_set = data.train()
    n = train_set.n
    shuffle = stream(cfg.seed, "train/shuffle")
    vel1 = vel2 = None
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        for idx in _minibatches(n, cfg.batch_size, shuffle):
            if idx.size < enc1.out_dim + 2:
                continue
            h1, t1 = forward(enc1, train_set.x1[:, idx])
            h2, t2 = forward(enc2, train_set.x2[:, idx])
            g1, g2 = dcca_gradient(h1, h2, reg, k)
            p1, _ = backward(enc1, t1, -g1)
            p2, _ = backward(enc2, t2, -g2)
            if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
                raise TrainingDivergedError(epoch, report)
            vel1 = sgd_step(enc1, p1, cfg, vel1)
            vel2 = sgd_step(enc2, p2, cfg, vel2)
        seconds = time.perf_counter() - t0
        h1, _ = forward(enc1, train_set.x1)
        h2, _ = forward(enc2, train_set.x2)
        obj = dcca_objective(h1, h2, reg, k)
        _check_finite(obj, epoch, report)
        report.epochs.append({
            "epoch": epoch,
            "loss": -obj,
            "total_correlation": total_correlation(h1, h2, reg),
            "metrics": {"objective": obj},
            "seconds": seconds,
        })
    return report


def train_network(net, x, y, kind, cfg):
    """Fit a single network by minibatch SGD.

    ``kind`` is ``"classify"`` (``y`` one-hot, softmax cross-entropy) or
    ``"regress"`` (squared error summed over outputs, averaged over the
    batch). Used for the single-view and decoder baselines. Returns the list
    of epoch-mean losses.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[1]
    shuffle = stream(cfg.seed, "train/shuffle")
    velocity = None
    history = []
    for epoch in range(1, cfg.epochs + 1):
        total = 0.0
        for idx in _minibatches(n, cfg.batch_size, shuffle):
            out, tape = forward(net, x[:, idx])
            if kind == "classify":
                value, g = softmax_cross_entropy(out, y[:, idx])
            elif kind == "regress":
                e = out - y[:, idx]
                value, g = float(np.sum(e * e)) / idx.size, 2.0 * e / idx.size
            else:
                raise InvalidInputError(f"unknown kind {kind!r}")
            _check_finite(value, epoch, None)
            grad, _ = backward(net, tape, g)
            velocity = sgd_step(net, grad, cfg, velocity)
            total += value * idx.size
        history.append(total / n)
    return history


def train_dcca_reconstruction(model, data, cfg, reg=1e-2):
    """DCCA baseline for the reconstruction task.

    ``model`` must be an unconstrained reconstruction model. Its encoders
    are trained with :func:`train_dcca_baseline`; the decoders are then fit
    on the frozen encoder outputs, so :func:`evaluate` on ``model`` gives
    the baseline's reconstruction metrics. Returns the DCCA report.
    """
    if model.task != "reconstruct" or model.constrained or len(model.blocks) != 1:
        raise InvalidInputError("DCCA baseline needs a single-block plain reconstruction model")
    blk = model.blocks[0]
    report = train_dcca_baseline(blk.enc1, blk.enc2, data, cfg, reg)
    tr = data.train()
    for enc, dec, x in ((blk.enc1, "dec1", tr.x1), (blk.enc2, "dec2", tr.x2)):
        feats, _ = forward(enc, x)
        train_network(model.heads[dec], feats, x, "regress", cfg)
    return report
