"""Monte Carlo experiment engine: packet pipeline, BER counting, seeding.

A packet run draws one block-fading scene (codes, channels), one symbol
stream and one set of chip-noise realizations from three generator
streams spawned off the packet seed, synthesizes the two-hop transmission
at chip level, runs the configured receiver (training preamble with known
symbols, then decision-directed payload) and counts bit errors on the
payload only.

Power feedback is ideal, error-free and happens once per packet: the
training segment is transmitted with the initial allocation (equal power
unless a previous packet's estimate is chained in) and the receiver's
constraint-feasible estimate at the end of training is applied to the
payload. Closed-form schemes have genie channel knowledge and apply their
solved allocation to the whole packet.

Seeds derive deterministically from (master seed, snr index, run index),
so results are identical for any worker count and packets are paired
across algorithms: scenes, symbols and noise are drawn identically no
matter which scheme consumes them.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines, mmse, model
from .channel_estimation import RlsChannelEstimator, SgChannelEstimator
from .rls import RlsJpaisReceiver
from .sg import SgJpaisReceiver

ALGORITHMS = ("mmse-jpais", "sg-lambda", "sg-norm", "rls", "ncis", "cis")
KNOWLEDGE = ("perfect", "sg-est", "rls-est")

# ridge applied to the closed-form solver when sigma^2 = 0 (degenerate runs)
_SOLVER_NOISE_FLOOR = 1e-9
# fraction of the fed-back allocation change the transmitter applies per event
_FEEDBACK_DAMPING = 0.5


class ConfigError(ValueError):
    """Invalid or inconsistent simulation configuration."""


@dataclass(frozen=True)
class SimulationConfig:
    """One experiment description (desk-scale defaults)."""

    processing_gain: int = 16
    paths: int = 3
    users: int = 6
    relays: int = 2
    packet_symbols: int = 500
    training_symbols: int = 200
    runs: int = 100
    snr_grid_db: tuple = (12.0,)
    algorithm: str = "mmse-jpais"
    channel_knowledge: str = "perfect"
    power_budget: float = 1.0
    ridge: float = 0.02
    receiver_step: float = 0.025
    power_step: float = 0.015
    channel_step: float = 0.01
    forgetting: float = 0.998
    init_delta: float = 0.01
    feedback_interval: int = 100
    seed: int = 0

    def validate(self) -> None:
        if self.processing_gain < 2:
            raise ConfigError("processing_gain must be at least 2")
        if self.paths < 1:
            raise ConfigError("paths must be at least 1")
        if self.users < 1:
            raise ConfigError("users must be at least 1")
        if self.users > 2 ** self.processing_gain:
            raise ConfigError("more users than distinct spreading codes")
        if self.relays < 0:
            raise ConfigError("relays cannot be negative")
        if not 1 <= self.training_symbols < self.packet_symbols:
            raise ConfigError("need 1 <= training_symbols < packet_symbols")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if len(self.snr_grid_db) == 0:
            raise ConfigError("snr grid cannot be empty")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.channel_knowledge not in KNOWLEDGE:
            raise ConfigError(f"unknown channel_knowledge {self.channel_knowledge!r}")
        if self.algorithm == "mmse-jpais" and self.channel_knowledge != "perfect":
            raise ConfigError("mmse-jpais is a closed-form genie scheme; "
                              "use channel_knowledge=perfect")
        for name in ("power_budget", "receiver_step", "power_step", "channel_step",
                     "init_delta"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.ridge < 0:
            raise ConfigError("ridge cannot be negative")
        if not 0 < self.forgetting <= 1:
            raise ConfigError("forgetting must lie in (0, 1]")
        if self.feedback_interval < 1:
            raise ConfigError("feedback_interval must be at least 1 symbol")

    def sigma2(self, snr_db: float) -> float:
        """Noise variance from SNR_dB = 10 log10(P_A / sigma^2)."""
        return self.power_budget / 10.0 ** (snr_db / 10.0)

    @property
    def window(self) -> int:
        return self.processing_gain + self.paths - 1

    @property
    def n_links(self) -> int:
        return self.relays + 1


@dataclass
class PacketResult:
    errors: int
    bits: int
    mse_trace: np.ndarray       # (P,) mean over users of |b - soft|^2
    final_power: np.ndarray     # (K, n_links) receiver-side estimate at packet end
    training_power: np.ndarray  # (K, n_links) applied while training
    payload_power: np.ndarray   # (K, n_links) applied after the feedback event
    decided_bits: np.ndarray    # (K, payload_symbols, 2)
    symbol_errors: np.ndarray   # (payload_symbols,) bit errors per payload symbol


@dataclass(frozen=True)
class BERPoint:
    snr_db: float
    users: int
    relays: int
    algorithm: str
    channel_knowledge: str
    errors: int
    bits: int
    ber: float
    ci_low: float
    ci_high: float
    seed: int
    low_confidence: bool = False


def count_errors(decided_bits, true_bits) -> int:
    """Hamming distance between two equal-shape bit arrays."""
    decided_bits = np.asarray(decided_bits)
    true_bits = np.asarray(true_bits)
    if decided_bits.shape != true_bits.shape:
        raise ValueError("bit arrays must have identical shapes")
    return int(np.count_nonzero(decided_bits != true_bits))


def wilson_interval(errors: int, bits: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for an error proportion."""
    if bits <= 0:
        raise ValueError("bits must be positive")
    phat = errors / bits
    denom = 1.0 + z * z / bits
    center = (phat + z * z / (2 * bits)) / denom
    half = (z / denom) * np.sqrt((phat * (1 - phat) + z * z / (4 * bits)) / bits)
    return max(0.0, center - half), min(1.0, center + half)


def paired_error_z(counts_a, counts_b) -> float:
    """One-sided paired z statistic that scheme A has fewer errors than B.

    Positive values favour A; ~1.645 is the 95% one-sided threshold.
    """
    diff = np.asarray(counts_b, dtype=float) - np.asarray(counts_a, dtype=float)
    if diff.size < 2:
        raise ValueError("need at least two paired packets")
    spread = diff.std(ddof=1)
    if spread == 0:
        return np.inf if diff.mean() > 0 else (-np.inf if diff.mean() < 0 else 0.0)
    return float(diff.mean() / (spread / np.sqrt(diff.size)))


def packet_seed(master_seed: int, snr_index: int, run_index: int) -> np.random.SeedSequence:
    """Deterministic per-packet seed, independent of execution order."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(snr_index, run_index))


# ---------------------------------------------------------------------------
# scene and synthesis
# ---------------------------------------------------------------------------

@dataclass
class _Scene:
    codes: np.ndarray        # (K, N)
    conv_all: np.ndarray     # (K, M, L)
    code_stacks: np.ndarray  # (K, (n_r+1)M, (n_r+1)L)
    channels: model.LinkChannels
    channel_matrix: np.ndarray  # ((n_r+1)L, n_r+1)


@dataclass
class _Noise:
    direct: np.ndarray      # (chip_len,)
    to_relay: np.ndarray    # (n_r, chip_len)
    relay_dest: np.ndarray  # (n_r, chip_len)


def _draw_scene(config: SimulationConfig, rng) -> _Scene:
    codes = model.generate_spreading_codes(rng, config.users, config.processing_gain)
    conv_all = np.stack([model.build_convolution_matrix(codes[k], config.paths)
                         for k in range(config.users)])
    channels = model.generate_link_channels(rng, config.paths, config.relays)
    channel_matrix = model.assemble_block_channel_matrix(channels.direct,
                                                         channels.relay_to_dest)
    code_stacks = np.stack([model.stack_code_matrix(conv_all[k], config.relays)
                            for k in range(config.users)])
    return _Scene(codes=codes, conv_all=conv_all, code_stacks=code_stacks,
                  channels=channels, channel_matrix=channel_matrix)


def _draw_noise(config: SimulationConfig, rng, sigma2: float) -> _Noise:
    chip_len = config.packet_symbols * config.processing_gain + config.paths - 1
    direct = model.complex_noise(rng, (chip_len,), sigma2)
    to_relay = model.complex_noise(rng, (config.relays, chip_len), sigma2)
    relay_dest = model.complex_noise(rng, (config.relays, chip_len), sigma2)
    return _Noise(direct=direct, to_relay=to_relay, relay_dest=relay_dest)


def _segment_amplitudes(segments, users: int, n_symbols: int, column) -> np.ndarray:
    out = np.empty((users, n_symbols), dtype=complex)
    for start, stop, alloc in segments:
        out[:, start:stop] = column(alloc)[:, np.newaxis]
    return out


def _relay_statistics(config: SimulationConfig, scene: _Scene, sigma2: float):
    """Genie relay filters and soft-symbol moments under the full-budget feed."""
    if config.relays == 0:
        return None
    feed = np.full(config.users, np.sqrt(config.power_budget))
    return model.relay_processing_statistics(scene.conv_all, scene.channels, feed, sigma2)


def _synthesize_destination(config: SimulationConfig, scene: _Scene, symbols,
                            segments, sigma2: float, noise: _Noise,
                            with_relays: bool, relay_stats=None):
    """Chip-level two-hop synthesis with per-segment allocations.

    ``segments`` is a list of (start, stop, (K, n_links) allocation) covering
    the packet. The relay-feeding transmission always runs at the full
    per-user budget (its own repetition slot), so the relay filters and the
    unit-power gains are allocation-independent.
    """
    n_symbols = config.packet_symbols
    gain = config.processing_gain
    window = config.window
    amp_direct = _segment_amplitudes(segments, config.users, n_symbols,
                                     lambda alloc: alloc[:, 0])
    stream = model.spread_symbols(symbols, scene.codes, amp_direct)
    direct = model.apply_channel(stream, scene.channels.direct) + noise.direct
    direct_windows = model.chip_windows(direct, n_symbols, gain, window)
    if not with_relays or config.relays == 0:
        return direct_windows

    feed = np.full(config.users, np.sqrt(config.power_budget))
    feed_stream = model.spread_symbols(symbols, scene.codes, feed)
    relay_in = np.empty((config.relays, n_symbols, window), dtype=complex)
    for j in range(config.relays):
        received = model.apply_channel(feed_stream,
                                       scene.channels.to_relay[j]) + noise.to_relay[j]
        relay_in[j] = model.chip_windows(received, n_symbols, gain, window)

    if relay_stats is None:
        relay_stats = _relay_statistics(config, scene, sigma2)
    soft = model.relay_soft_symbols(relay_in, relay_stats)

    amp_relay = np.empty((config.users, config.relays, n_symbols), dtype=complex)
    for start, stop, alloc in segments:
        amp_relay[:, :, start:stop] = alloc[:, 1:, np.newaxis]
    relay_out = model.simulate_relay_phase(soft, scene.codes, amp_relay,
                                           scene.channels, noise.relay_dest)
    return model.stack_destination_windows(direct_windows, relay_out)


def _coherence_matrix(config: SimulationConfig, stats) -> np.ndarray:
    """Per-user coherence vectors [1, beta_1, ..., beta_nr] from relay stats."""
    betas = np.ones((config.users, config.n_links), dtype=complex)
    if stats is not None and config.relays > 0:
        betas[:, 1:] = stats.coherence.T
    return betas


# ---------------------------------------------------------------------------
# packet execution
# ---------------------------------------------------------------------------

def _tile_allocation(allocation, users: int) -> np.ndarray:
    allocation = np.asarray(allocation, dtype=complex)
    if allocation.ndim == 1:
        return np.tile(allocation, (users, 1))
    return allocation.copy()


def _decide_and_count(config, softs, symbols, true_bits):
    """Hard decisions, payload error count and the genie MSE trace."""
    training = config.training_symbols
    trace = np.mean(np.abs(symbols - softs) ** 2, axis=0)
    payload_soft = softs[:, training:]
    decided = model.qpsk_demodulate(payload_soft)
    mismatch = decided != true_bits[:, training:, :]
    symbol_errors = np.count_nonzero(mismatch, axis=(0, 2))
    errors = int(symbol_errors.sum())
    bits = decided.size
    return errors, bits, trace, decided, symbol_errors


def _run_closed_form(config: SimulationConfig, scene: _Scene, sigma2: float,
                     relay_stats) -> tuple:
    """Filters and allocations for the genie MMSE schemes (whole packet)."""
    solver_sigma2 = max(sigma2, _SOLVER_NOISE_FLOOR * config.power_budget)
    if config.algorithm == "ncis":
        allocation = baselines.direct_only_allocation(config.power_budget)
        signatures = scene.conv_all @ scene.channels.direct[:, np.newaxis]
        filters = baselines.fixed_allocation_filters(signatures, solver_sigma2, allocation)
        return _tile_allocation(allocation, config.users), filters, False

    signatures = scene.code_stacks @ scene.channel_matrix
    betas = _coherence_matrix(config, relay_stats)
    if config.algorithm == "cis":
        equal = baselines.equal_power_allocation(config.relays, config.power_budget)
        filters = baselines.fixed_allocation_filters(signatures, solver_sigma2, equal, betas)
        return _tile_allocation(equal, config.users), filters, True

    solution = mmse.alternating_jpais_solve(signatures, solver_sigma2,
                                            config.power_budget, config.ridge,
                                            betas=betas)
    return solution.allocations, solution.filters, True


def _make_receiver(config: SimulationConfig, scene: _Scene, user: int,
                   adapt_power: bool, initial_power):
    """Build one user's adaptive receiver per the configured family."""
    is_direct_only = config.algorithm == "ncis"
    code_stack = (scene.conv_all[user] if is_direct_only else scene.code_stacks[user])
    channel = None
    estimator = None
    if adapt_power:
        if config.channel_knowledge == "perfect":
            channel = scene.channel_matrix
        elif config.channel_knowledge == "sg-est":
            estimator = SgChannelEstimator(code_stack=code_stack, paths=config.paths,
                                           step=config.channel_step)
        else:
            estimator = RlsChannelEstimator(code_stack=code_stack, paths=config.paths,
                                            forgetting=config.forgetting)
    family_sg = (config.algorithm in ("sg-lambda", "sg-norm")
                 or (config.algorithm in ("ncis", "cis")
                     and config.channel_knowledge == "sg-est"))
    if family_sg:
        variant = "normalized" if config.algorithm == "sg-norm" else "lambda-quadratic"
        return SgJpaisReceiver(code_stack=code_stack, step=config.receiver_step,
                               power_step=config.power_step, budget=config.power_budget,
                               variant=variant, channel=channel,
                               channel_estimator=estimator, adapt_power=adapt_power,
                               initial_power=initial_power)
    return RlsJpaisReceiver(code_stack=code_stack, forgetting=config.forgetting,
                            init_delta=config.init_delta, budget=config.power_budget,
                            channel=channel, channel_estimator=estimator,
                            adapt_power=adapt_power, initial_power=initial_power)


def _run_adaptive(config: SimulationConfig, scene: _Scene, symbols, true_bits,
                  sigma2: float, noise: _Noise, initial_power) -> PacketResult:
    """Training preamble then decision-directed payload, with periodic feedback.

    For the power-adaptive schemes the receiver's constraint-feasible
    allocation is fed back error-free every ``feedback_interval`` symbols
    (the low-rate feedback channel); the transmitter applies it to the rest
    of the packet, so the remainder is re-synthesized on the same noise
    realization at every event. Baseline receivers adapt their filters on a
    fixed allocation.
    """
    training = config.training_symbols
    n_symbols = config.packet_symbols
    adapt_power = config.algorithm in ("sg-lambda", "sg-norm", "rls")
    is_direct_only = config.algorithm == "ncis"
    relay_stats = None if is_direct_only else _relay_statistics(config, scene, sigma2)
    if is_direct_only:
        base_alloc = _tile_allocation(baselines.direct_only_allocation(config.power_budget),
                                      config.users)
    else:
        base_alloc = _tile_allocation(baselines.equal_power_allocation(
            config.relays, config.power_budget), config.users)
    if initial_power is not None and adapt_power:
        base_alloc = _tile_allocation(initial_power, config.users)

    alloc_steps = [(0, base_alloc)]

    def synthesize():
        segments = []
        for idx, (start, alloc) in enumerate(alloc_steps):
            stop = alloc_steps[idx + 1][0] if idx + 1 < len(alloc_steps) else n_symbols
            segments.append((start, stop, alloc))
        return _synthesize_destination(config, scene, symbols, segments, sigma2,
                                       noise, with_relays=not is_direct_only,
                                       relay_stats=relay_stats)

    windows = synthesize()
    receivers = [_make_receiver(config, scene, k, adapt_power, base_alloc[k])
                 for k in range(config.users)]

    # Gradient receivers re-track a reallocation within ~1/(mu * power)
    # symbols, so SG feedback keeps running through the decision-directed
    # phase; the RLS filter's exponential window (~1/(1 - alpha) symbols)
    # outruns the feedback period, so its events stop at the preamble edge
    # where supervised retraining can absorb the signal change.
    family_sg = config.algorithm in ("sg-lambda", "sg-norm")
    if adapt_power:
        horizon = n_symbols if family_sg else min(training + 1, n_symbols)
        events = list(range(config.feedback_interval, horizon, config.feedback_interval))
    else:
        events = []
    bounds = [0] + events + [n_symbols]
    payload_softs = np.empty((config.users, n_symbols - training), dtype=complex)
    decided = np.empty((config.users, n_symbols - training, 2), dtype=int)

    for start, stop in zip(bounds[:-1], bounds[1:]):
        sup_stop = min(stop, training)
        for k, rx in enumerate(receivers):
            if start == 0:
                rx.fit(windows[:sup_stop], symbols[k, :sup_stop])
            elif start < training:
                rx.partial_fit(windows[start:sup_stop], symbols[k, start:sup_stop])
            dd_start = max(start, training)
            if stop > dd_start:
                decisions = rx.predict(windows[dd_start:stop])
                payload_softs[k, dd_start - training:stop - training] = rx.soft_estimates_
                decided[k, dd_start - training:stop - training] = model.qpsk_demodulate(
                    decisions)
        if stop < n_symbols:
            # damped application: the transmitter ramps halfway towards the
            # fed-back estimate at each event, so the signal statistics the
            # receiver tracks never jump (abrupt reallocations mid-packet
            # derail decision-directed adaptation)
            previous = alloc_steps[-1][1]
            target = np.stack([rx.power_ for rx in receivers])
            blend = previous + _FEEDBACK_DAMPING * (target - previous)
            norms = np.linalg.norm(blend, axis=1, keepdims=True)
            alloc = blend * (np.sqrt(config.power_budget) / norms)
            alloc_steps.append((stop, alloc))
            windows = synthesize()
            for k, rx in enumerate(receivers):
                rx.apply_feedback(alloc[k])

    # during training the genie error is exactly the a priori |e|^2 from fit
    trace = np.empty(n_symbols)
    trace[:training] = np.mean(
        np.stack([rx.training_error_trace_ for rx in receivers]), axis=0)
    trace[training:] = np.mean(
        np.abs(symbols[:, training:] - payload_softs) ** 2, axis=0)

    mismatch = decided != true_bits[:, training:, :]
    symbol_errors = np.count_nonzero(mismatch, axis=(0, 2))
    return PacketResult(
        errors=int(symbol_errors.sum()), bits=decided.size, mse_trace=trace,
        final_power=np.stack([rx.power_.copy() for rx in receivers]),
        training_power=base_alloc, payload_power=alloc_steps[-1][1],
        decided_bits=decided, symbol_errors=symbol_errors)


def run_packet(config: SimulationConfig, seed, snr_db: float | None = None,
               initial_power=None) -> PacketResult:
    """Simulate one packet; returns payload error counts and the MSE trace.

    ``seed`` is an integer or SeedSequence. ``initial_power`` chains a
    previous packet's fed-back allocation into the training segment of the
    power-adaptive schemes (ideal feedback contract).
    """
    config.validate()
    if snr_db is None:
        snr_db = config.snr_grid_db[0]
    sigma2 = config.sigma2(snr_db)
    seed_seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    scene_ss, symbol_ss, noise_ss = seed_seq.spawn(3)
    scene = _draw_scene(config, np.random.default_rng(scene_ss))
    true_bits = model.random_bits(np.random.default_rng(symbol_ss), config.users,
                                  config.packet_symbols)
    symbols = model.qpsk_modulate(true_bits)
    noise = _draw_noise(config, np.random.default_rng(noise_ss), sigma2)

    closed_form = config.channel_knowledge == "perfect" and config.algorithm in (
        "mmse-jpais", "ncis", "cis")
    if not closed_form:
        return _run_adaptive(config, scene, symbols, true_bits, sigma2, noise,
                             initial_power)

    relay_stats = (None if config.algorithm == "ncis"
                   else _relay_statistics(config, scene,
                                          max(sigma2, _SOLVER_NOISE_FLOOR * config.power_budget)))
    allocations, filters, with_relays = _run_closed_form(config, scene, sigma2, relay_stats)
    stacked = _synthesize_destination(config, scene, symbols,
                                      [(0, config.packet_symbols, allocations)],
                                      sigma2, noise, with_relays=with_relays,
                                      relay_stats=relay_stats)
    softs = np.einsum('kd,pd->kp', filters.conj(), stacked)
    errors, bits, trace, decided, symbol_errors = _decide_and_count(
        config, softs, symbols, true_bits)
    return PacketResult(errors=errors, bits=bits, mse_trace=trace,
                        final_power=allocations, training_power=allocations,
                        payload_power=allocations, decided_bits=decided,
                        symbol_errors=symbol_errors)


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def _packet_worker(args):
    config, snr_index, run_index, snr_db = args
    return run_packet(config, packet_seed(config.seed, snr_index, run_index), snr_db)


def _curve_worker(args):
    result = _packet_worker(args)
    return result.errors, result.bits


def _trace_worker(args):
    config, snr_index, run_index, snr_db = args
    result = run_packet(config, packet_seed(config.seed, snr_index, run_index), snr_db)
    return result.errors, result.bits, result.mse_trace


def _map_tasks(worker, tasks, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, tasks))
    return [worker(task) for task in tasks]


def make_ber_point(config: SimulationConfig, snr_db: float, errors: int,
                   bits: int) -> BERPoint:
    ci_low, ci_high = wilson_interval(errors, bits)
    return BERPoint(snr_db=snr_db, users=config.users, relays=config.relays,
                    algorithm=config.algorithm,
                    channel_knowledge=config.channel_knowledge,
                    errors=errors, bits=bits, ber=errors / bits,
                    ci_low=ci_low, ci_high=ci_high, seed=config.seed,
                    low_confidence=errors < 10)


def run_paired_packets(config: SimulationConfig, snr_db: float | None = None,
                       jobs: int = 1) -> list[PacketResult]:
    """Every packet result at one SNR point, in run order.

    Seeds depend only on (master seed, run index), so calling this with two
    configs that differ in algorithm yields packet-by-packet paired samples.
    """
    config.validate()
    if snr_db is None:
        snr_db = config.snr_grid_db[0]
    tasks = [(config, 0, run_index, snr_db) for run_index in range(config.runs)]
    return _map_tasks(_packet_worker, tasks, jobs)


def run_ber_curve(config: SimulationConfig, jobs: int = 1) -> list[BERPoint]:
    """Aggregate ``runs`` independent packets at every SNR grid point."""
    config.validate()
    points = []
    for snr_index, snr_db in enumerate(config.snr_grid_db):
        tasks = [(config, snr_index, run_index, snr_db)
                 for run_index in range(config.runs)]
        results = _map_tasks(_curve_worker, tasks, jobs)
        errors = sum(r[0] for r in results)
        bits = sum(r[1] for r in results)
        points.append(make_ber_point(config, snr_db, errors, bits))
    return points


def run_convergence(config: SimulationConfig, snr_db: float | None = None,
                    jobs: int = 1):
    """Run-averaged MSE trace plus the pooled payload BER point."""
    config.validate()
    if snr_db is None:
        snr_db = config.snr_grid_db[0]
    tasks = [(config, 0, run_index, snr_db) for run_index in range(config.runs)]
    results = _map_tasks(_trace_worker, tasks, jobs)
    trace = np.mean(np.stack([r[2] for r in results]), axis=0)
    errors = sum(r[0] for r in results)
    bits = sum(r[1] for r in results)
    return trace, make_ber_point(config, snr_db, errors, bits)


# ---------------------------------------------------------------------------
# CSV interfaces
# ---------------------------------------------------------------------------

BER_CSV_FIELDS = ("snr_db", "users", "relays", "algorithm", "channel_knowledge",
                  "errors", "bits", "ber", "ci_low", "ci_high", "seed")
TRACE_CSV_FIELDS = ("symbol_index", "mse", "algorithm", "seed")


def write_ber_csv(path, points) -> None:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(BER_CSV_FIELDS)
        for p in points:
            writer.writerow([f"{p.snr_db:.6g}", p.users, p.relays, p.algorithm,
                             p.channel_knowledge, p.errors, p.bits,
                             f"{p.ber:.10g}", f"{p.ci_low:.10g}",
                             f"{p.ci_high:.10g}", p.seed])


def read_ber_csv(path) -> list[dict]:
    with Path(path).open(newline="") as handle:
        return list(csv.DictReader(handle))


def write_trace_csv(path, traces) -> None:
    """``traces`` is a list of (algorithm_label, seed, mse array)."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_CSV_FIELDS)
        for label, seed, trace in traces:
            for index, value in enumerate(trace):
                writer.writerow([index, f"{value:.10g}", label, seed])
