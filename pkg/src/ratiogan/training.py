"""Adversarial training on synthetic densities with online ratio monitoring.

Each generator iteration runs ``critic_iters`` discriminator ascent
steps on mean(phi(D(x))) + mean(psi(D(G(z)))) minus the gradient
penalty, then one generator descent step on mean(psi(D(G(z)))) (only
the psi term depends on the generator).  Every ``eval_every`` iterations
a snapshot is taken on fresh evaluation batches: objectives, the
discriminator-implied likelihood-ratio statistics (for invertible
losses; both fresh-batch and training-batch variants are recorded), and
two-sample distances between generated and target samples.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from .catalogue import catalogue_lookup
from .densities import DensitySpec, load_samples, sample
from .losses import LossPair, antiderivative_from, ratio_from_discriminator
from .metrics import mmd_rbf, sliced_wasserstein
from .nets import (
    AdamState,
    net_to_json,
    DenseNet,
    NetSpec,
    adam_step,
    backward,
    forward,
    init_adam,
    init_net,
    penalty_coefficients,
    penalty_from_norms,
    weighted_norm_param_grads,
)

__all__ = [
    "TrainConfig",
    "MetricRecord",
    "TrainResult",
    "train",
    "gradient_penalty",
    "likelihood_ratio_metric",
    "metrics_to_text",
    "METRIC_COLUMNS",
]

DEFAULT_HIDDEN_WIDTHS = (64, 64)


@dataclass(frozen=True)
class TrainConfig:
    loss_name: str
    f_spec: Union[DensitySpec, str]  # target density or path to a CSV sample file
    h_spec: DensitySpec  # origin density feeding the generator
    lam: float = 10.0
    penalty_variant: str = "max"
    critic_iters: int = 5
    batch_size: int = 64
    learning_rate: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.9
    total_generator_iters: int = 20000
    eval_every: int = 500
    eval_batch: int = 2048
    gen_hidden_widths: tuple = DEFAULT_HIDDEN_WIDTHS
    disc_hidden_widths: tuple = DEFAULT_HIDDEN_WIDTHS
    gen_hidden: str = "tanh"
    disc_hidden: str = "smooth_leaky"
    seed: int = 0
    checkpoint_every: int = 0  # 0 = final checkpoint only

    def validate(self):
        if self.critic_iters < 1:
            raise ValueError("critic_iters must be >= 1")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.total_generator_iters < 1:
            raise ValueError("total_generator_iters must be >= 1")
        if self.penalty_variant not in ("max", "mean"):
            raise ValueError(f"unknown penalty variant {self.penalty_variant!r}")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")


@dataclass(frozen=True)
class MetricRecord:
    generator_iteration: int
    disc_objective: float
    gen_objective: float
    penalty: float
    lr_real_mean: Optional[float]
    lr_real_std: Optional[float]
    lr_gen_mean: Optional[float]
    lr_gen_std: Optional[float]
    lr_real_mean_train: Optional[float]
    lr_gen_mean_train: Optional[float]
    mmd: float
    swd: float


METRIC_COLUMNS = (
    "generator_iteration",
    "disc_objective",
    "gen_objective",
    "penalty",
    "lr_real_mean",
    "lr_real_std",
    "lr_gen_mean",
    "lr_gen_std",
    "lr_real_mean_train",
    "lr_gen_mean_train",
    "mmd",
    "swd",
)


@dataclass
class TrainResult:
    generator: DenseNet
    discriminator: DenseNet
    records: List[MetricRecord]
    gen_state: AdamState
    disc_state: AdamState
    aborted: bool = False
    abort_reason: Optional[str] = None
    checkpoints: list = None  # (iteration, gen_json, disc_json) when requested


def gradient_penalty(
    disc: DenseNet,
    real_batch: np.ndarray,
    fake_batch: np.ndarray,
    variant: str,
    lam: float,
    rng: np.random.Generator,
):
    """One-sided unit-gradient penalty on per-pair uniform interpolates.

    Returns the penalty value and its exact parameter gradients.  A zero
    lambda short-circuits without consuming randomness, so disabled runs
    match a build with the penalty path removed bit for bit.
    """
    if real_batch.shape != fake_batch.shape:
        raise ValueError("real and fake batches must have identical shapes")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0.0:
        zeros = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(disc.weights, disc.biases)]
        return 0.0, zeros
    u = rng.random((len(real_batch), 1))
    interp = u * real_batch + (1.0 - u) * fake_batch
    norms, grads = weighted_norm_param_grads(
        disc, interp, lambda n: penalty_coefficients(n, lam, variant)
    )
    return penalty_from_norms(norms, lam, variant), grads


def likelihood_ratio_metric(loss: LossPair, disc: DenseNet, real_batch, fake_batch):
    """Mean/std of the discriminator-implied ratio on both batches."""
    d_real, _ = forward(disc, np.asarray(real_batch, dtype=float))
    d_fake, _ = forward(disc, np.asarray(fake_batch, dtype=float))
    r_real = ratio_from_discriminator(loss, d_real[:, 0])
    r_fake = ratio_from_discriminator(loss, d_fake[:, 0])
    return (
        float(r_real.mean()),
        float(r_real.std()),
        float(r_fake.mean()),
        float(r_fake.std()),
    )


def _accumulate(target: list, extra: list, scale: float = 1.0) -> None:
    for (tw, tb), (ew, eb) in zip(target, extra):
        tw += scale * ew
        tb += scale * eb


def _zeros_like_params(net: DenseNet):
    return [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]


def _dims(config: TrainConfig):
    if isinstance(config.f_spec, str):
        data = load_samples(config.f_spec)
        return data.shape[1], data
    return config.f_spec.dim, None


def _draw_real(config: TrainConfig, data, n: int, rng: np.random.Generator) -> np.ndarray:
    if data is not None:
        idx = rng.integers(0, len(data), size=n)
        return data[idx]
    return sample(config.f_spec, n, rng)


def build_networks(config: TrainConfig, loss: LossPair):
    """Generator (identity output) and discriminator (loss-prescribed squash)."""
    d_x, _ = _dims(config)
    d_z = config.h_spec.dim
    seeds = np.random.SeedSequence(config.seed).generate_state(4)
    gen_spec = NetSpec(
        widths=(d_z, *config.gen_hidden_widths, d_x),
        hidden=config.gen_hidden,
        squash=None,
        seed=int(seeds[0]),
    )
    disc_spec = NetSpec(
        widths=(d_x, *config.disc_hidden_widths, 1),
        hidden=config.disc_hidden,
        squash=loss.squashing(),
        seed=int(seeds[1]),
    )
    return init_net(gen_spec), init_net(disc_spec), int(seeds[2]), int(seeds[3])


def train(config: TrainConfig, loss: Optional[LossPair] = None) -> TrainResult:
    """Run the adversarial loop; deterministic given the config seed."""
    config.validate()
    if loss is None:
        loss = catalogue_lookup(config.loss_name).loss
    # objective records need phi/psi values; derivative-only pairs get the
    # quadrature surrogate (gradients never need it)
    phi_v = loss.phi if loss.phi is not None else antiderivative_from(loss.phi_prime, loss.omega_at_one)
    psi_v = loss.psi if loss.psi is not None else antiderivative_from(loss.psi_prime, loss.omega_at_one)

    d_x, data = _dims(config)
    generator, discriminator, train_seed, eval_seed = build_networks(config, loss)
    gen_state = init_adam(generator, config.learning_rate, config.beta1, config.beta2)
    disc_state = init_adam(discriminator, config.learning_rate, config.beta1, config.beta2)
    train_rng = np.random.default_rng(train_seed)
    eval_rng = np.random.default_rng(eval_seed)
    swd_seed = eval_seed  # fixed directions: snapshots stay comparable

    records: List[MetricRecord] = []
    checkpoints: list = []
    last_good = (copy.deepcopy(generator), copy.deepcopy(discriminator))
    last_penalty = 0.0
    last_train_lr = (None, None)
    b = config.batch_size

    def evaluate(iteration: int) -> MetricRecord:
        x_eval = _draw_real(config, data, config.eval_batch, eval_rng)
        z_eval = sample(config.h_spec, config.eval_batch, eval_rng)
        y_eval, _ = forward(generator, z_eval)
        d_real, _ = forward(discriminator, x_eval)
        d_fake, _ = forward(discriminator, y_eval)
        disc_obj = float(np.mean(phi_v(d_real[:, 0])) + np.mean(psi_v(d_fake[:, 0])))
        gen_obj = float(np.mean(psi_v(d_fake[:, 0])))
        if loss.ratio_invertible:
            r_real = ratio_from_discriminator(loss, d_real[:, 0])
            r_fake = ratio_from_discriminator(loss, d_fake[:, 0])
            lr_fields = (
                float(r_real.mean()),
                float(r_real.std()),
                float(r_fake.mean()),
                float(r_fake.std()),
            )
        else:
            lr_fields = (None, None, None, None)
        return MetricRecord(
            generator_iteration=iteration,
            disc_objective=disc_obj,
            gen_objective=gen_obj,
            penalty=last_penalty,
            lr_real_mean=lr_fields[0],
            lr_real_std=lr_fields[1],
            lr_gen_mean=lr_fields[2],
            lr_gen_std=lr_fields[3],
            lr_real_mean_train=last_train_lr[0],
            lr_gen_mean_train=last_train_lr[1],
            mmd=mmd_rbf(y_eval, x_eval, "median"),
            swd=sliced_wasserstein(y_eval, x_eval, 64, seed=swd_seed),
        )

    for iteration in range(1, config.total_generator_iters + 1):
        # -- critic phase -------------------------------------------------
        for _ in range(config.critic_iters):
            x = _draw_real(config, data, b, train_rng)
            z = sample(config.h_spec, b, train_rng)
            y, _ = forward(generator, z)

            # one stacked pass over real and generated rows
            d_both, cache = forward(discriminator, np.vstack([x, y]), with_derivs=True)
            d_real, d_fake = d_both[:b], d_both[b:]
            # ascend phi/psi terms: gradients of the negative
            out_grads = np.vstack([-loss.phi_prime(d_real) / b, -loss.psi_prime(d_fake) / b])
            grads, _ = backward(discriminator, cache, out_grads)

            penalty_value = 0.0
            if config.lam > 0.0:
                penalty_value, p_grads = gradient_penalty(
                    discriminator, x, y, config.penalty_variant, config.lam, train_rng
                )
                _accumulate(grads, p_grads)

            disc_obj = float(
                np.mean(phi_v(d_real[:, 0])) + np.mean(psi_v(d_fake[:, 0])) - penalty_value
            )
            if not math.isfinite(disc_obj):
                gen_ckpt, disc_ckpt = last_good
                return TrainResult(
                    generator=gen_ckpt,
                    discriminator=disc_ckpt,
                    records=records,
                    gen_state=gen_state,
                    disc_state=disc_state,
                    aborted=True,
                    abort_reason=f"non-finite discriminator objective at iteration {iteration}",
                    checkpoints=checkpoints,
                )
            adam_step(disc_state, discriminator, grads)
            last_penalty = penalty_value

        will_evaluate = (
            iteration % config.eval_every == 0
            or iteration == config.total_generator_iters
        )
        if will_evaluate and loss.ratio_invertible:
            # training-batch variant of the ratio metric (last critic batch)
            lr = likelihood_ratio_metric(loss, discriminator, x, y)
            last_train_lr = (lr[0], lr[2])

        # -- generator phase ----------------------------------------------
        z = sample(config.h_spec, b, train_rng)
        y, gen_cache = forward(generator, z, with_derivs=True)
        d_fake, disc_cache = forward(discriminator, y, with_derivs=True)
        gen_obj = float(np.mean(psi_v(d_fake[:, 0])))
        if not math.isfinite(gen_obj):
            gen_ckpt, disc_ckpt = last_good
            return TrainResult(
                generator=gen_ckpt,
                discriminator=disc_ckpt,
                records=records,
                gen_state=gen_state,
                disc_state=disc_state,
                aborted=True,
                abort_reason=f"non-finite generator objective at iteration {iteration}",
                checkpoints=checkpoints,
            )
        _, input_grads = backward(discriminator, disc_cache, loss.psi_prime(d_fake) / b)
        gen_grads, _ = backward(generator, gen_cache, input_grads)
        adam_step(gen_state, generator, gen_grads)

        if will_evaluate:
            records.append(evaluate(iteration))
            last_good = (copy.deepcopy(generator), copy.deepcopy(discriminator))
        if config.checkpoint_every > 0 and iteration % config.checkpoint_every == 0:
            checkpoints.append(
                (iteration, net_to_json(generator, gen_state), net_to_json(discriminator, disc_state))
            )

    return TrainResult(
        generator=generator,
        discriminator=discriminator,
        records=records,
        gen_state=gen_state,
        disc_state=disc_state,
        checkpoints=checkpoints,
    )


def _cell(value) -> str:
    return "" if value is None else repr(value)


def metrics_to_text(records: List[MetricRecord]) -> str:
    """Tab-separated metric table in the documented column order."""
    lines = ["\t".join(METRIC_COLUMNS)]
    for rec in records:
        lines.append("\t".join(_cell(getattr(rec, col)) for col in METRIC_COLUMNS))
    return "\n".join(lines) + "\n"


def metrics_from_text(text: str) -> List[MetricRecord]:
    """Parse a metrics table written by metrics_to_text."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty metrics file")
    header = tuple(lines[0].split("\t"))
    if header != METRIC_COLUMNS:
        raise ValueError(f"unexpected metrics columns: {header}")
    records = []
    for ln in lines[1:]:
        cells = ln.split("\t")
        if len(cells) != len(METRIC_COLUMNS):
            raise ValueError(f"bad metrics row: {ln!r}")
        values = {}
        for col, cell in zip(METRIC_COLUMNS, cells):
            if cell == "":
                values[col] = None
            elif col == "generator_iteration":
                values[col] = int(cell)
            else:
                values[col] = float(cell)
        records.append(MetricRecord(**values))
    return records
