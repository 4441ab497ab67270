"""Chip-level signal model for a cooperative DS-CDMA downlink with AF relays.

Conventions
-----------
K users share a synchronous downlink with length-N binary spreading codes,
unit-energy QPSK symbols and L-tap block-fading multipath on every link.
A packet carries P symbols. Each observation is an M = N + L - 1 chip
window, so neighbouring symbols leak into every window and intersymbol
interference emerges from the chip-level convolution itself rather than
being injected separately.

n_r amplify-and-forward relays listen to the base station broadcast,
filter each user's stream with a local MMSE filter, rescale the soft
output to unit average power and respread it towards the destination in
orthogonal repetition slots. The destination stacks the direct window and
the n_r relay windows into one (n_r+1)M vector per symbol.

Per-user link amplitudes live in an (n_r+1) allocation vector: entry 0
scales the base station broadcast, entry j >= 1 scales relay j's
retransmission. Noise is circular complex Gaussian with variance sigma^2
per complex sample.

All functions are pure; packet synthesis is deterministic given the
generator state, so packets can be produced in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_complex_vector, check_rng

_SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# modulation
# ---------------------------------------------------------------------------

def qpsk_modulate(bits) -> np.ndarray:
    """Gray-map bit pairs onto the unit-energy QPSK constellation.

    ``bits`` has shape (..., 2); the first bit drives the real rail and the
    second the imaginary rail, (0, 0) -> (1+1j)/sqrt(2).
    """
    bits = np.asarray(bits)
    if bits.shape[-1] != 2:
        raise ValueError("bits must come in pairs (shape (..., 2))")
    re = 1.0 - 2.0 * bits[..., 0]
    im = 1.0 - 2.0 * bits[..., 1]
    return (re + 1j * im) / _SQRT2


def qpsk_demodulate(soft) -> np.ndarray:
    """Sign decisions per rail; inverse of :func:`qpsk_modulate` on clean points."""
    soft = np.asarray(soft, dtype=complex)
    bits = np.empty(soft.shape + (2,), dtype=int)
    bits[..., 0] = (soft.real < 0).astype(int)
    bits[..., 1] = (soft.imag < 0).astype(int)
    return bits


def qpsk_hard_decision(soft) -> np.ndarray:
    """Nearest constellation point (used for decision-directed adaptation)."""
    return qpsk_modulate(qpsk_demodulate(soft))


def random_bits(rng, n_users: int, n_symbols: int) -> np.ndarray:
    rng = check_rng(rng)
    return rng.integers(0, 2, size=(n_users, n_symbols, 2))


# ---------------------------------------------------------------------------
# spreading codes and convolution matrices
# ---------------------------------------------------------------------------

def generate_spreading_codes(rng, n_users: int, gain: int) -> np.ndarray:
    """Draw ``n_users`` distinct random binary codes, normalized to unit energy.

    Returns a (n_users, gain) array with entries +-1/sqrt(gain). Raises when
    more codes are requested than distinct sign patterns exist.
    """
    if n_users < 1:
        raise ValueError("need at least one user")
    if gain < 2:
        raise ValueError("processing gain must be at least 2")
    if n_users > 2 ** gain:
        raise ValueError(
            f"cannot draw {n_users} distinct codes of length {gain} (only {2 ** gain} exist)"
        )
    rng = check_rng(rng)
    rows = []
    seen = set()
    while len(rows) < n_users:
        pattern = rng.integers(0, 2, size=gain)
        key = pattern.tobytes()
        if key in seen:
            continue
        seen.add(key)
        rows.append(1.0 - 2.0 * pattern)
    return np.asarray(rows) / np.sqrt(gain)


def build_convolution_matrix(chips, paths: int) -> np.ndarray:
    """M x L matrix whose columns are the code shifted down one chip at a time.

    Multiplying by an L-tap channel gives the linear convolution of the code
    with the channel, M = N + L - 1.
    """
    chips = np.asarray(chips)
    if chips.ndim != 1:
        raise ValueError("chips must be a vector")
    if paths < 1:
        raise ValueError("need at least one path")
    gain = chips.shape[0]
    window = gain + paths - 1
    mat = np.zeros((window, paths), dtype=chips.dtype)
    for j in range(paths):
        mat[j:j + gain, j] = chips
    return mat


def stack_code_matrix(conv_matrix: np.ndarray, n_relays: int) -> np.ndarray:
    """Block-diagonal stack of one user's convolution matrix over all links."""
    return np.kron(np.eye(n_relays + 1), conv_matrix)


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkChannels:
    """One block-fading draw of every link in the two-hop topology."""

    direct: np.ndarray         # (L,) base station -> destination
    to_relay: np.ndarray       # (n_r, L) base station -> relay j
    relay_to_dest: np.ndarray  # (n_r, L) relay j -> destination

    def __post_init__(self):
        if self.to_relay.shape != self.relay_to_dest.shape:
            raise ValueError("relay link arrays must agree in shape")
        if self.to_relay.ndim != 2 or self.to_relay.shape[1] != self.direct.shape[0]:
            raise ValueError("all links must have the same number of paths")

    @property
    def n_relays(self) -> int:
        return self.to_relay.shape[0]

    @property
    def paths(self) -> int:
        return self.direct.shape[0]


def _complex_gaussian(rng, shape, variance: float) -> np.ndarray:
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_link_channels(rng, paths: int, n_relays: int) -> LinkChannels:
    """i.i.d. complex Gaussian taps with E[||h||^2] = 1 per link (taps ~ CN(0, 1/L)).

    The direct link is drawn first so runs with different relay counts share
    the same direct channel under the same generator state.
    """
    if paths < 1:
        raise ValueError("need at least one path")
    if n_relays < 0:
        raise ValueError("relay count cannot be negative")
    rng = check_rng(rng)
    direct = _complex_gaussian(rng, (paths,), 1.0 / paths)
    to_relay = _complex_gaussian(rng, (n_relays, paths), 1.0 / paths)
    relay_to_dest = _complex_gaussian(rng, (n_relays, paths), 1.0 / paths)
    return LinkChannels(direct=direct, to_relay=to_relay, relay_to_dest=relay_to_dest)


def assemble_block_channel_matrix(direct, relay_to_dest) -> np.ndarray:
    """(n_r+1)L x (n_r+1) block-diagonal channel matrix of the destination links.

    Column 0 carries the direct channel, column j >= 1 carries relay j's
    forward channel; all entries outside the blocks are exactly zero.
    """
    direct = as_complex_vector(direct, name="direct channel")
    relay_to_dest = np.asarray(relay_to_dest, dtype=complex)
    if relay_to_dest.size == 0:
        relay_to_dest = relay_to_dest.reshape(0, direct.shape[0])
    if relay_to_dest.ndim != 2 or relay_to_dest.shape[1] != direct.shape[0]:
        raise ValueError("relay channels must be (n_r, L) with the same L as the direct link")
    paths = direct.shape[0]
    n_links = 1 + relay_to_dest.shape[0]
    mat = np.zeros((n_links * paths, n_links), dtype=complex)
    mat[:paths, 0] = direct
    for j in range(1, n_links):
        mat[j * paths:(j + 1) * paths, j] = relay_to_dest[j - 1]
    return mat


# ---------------------------------------------------------------------------
# chip-level synthesis
# ---------------------------------------------------------------------------

def complex_noise(rng, shape, sigma2: float) -> np.ndarray:
    """Circular complex Gaussian noise with variance sigma^2 per sample."""
    if sigma2 < 0:
        raise ValueError("noise variance cannot be negative")
    rng = check_rng(rng)
    if sigma2 == 0:
        return np.zeros(shape, dtype=complex)
    return _complex_gaussian(rng, shape, sigma2)


def spread_symbols(symbols: np.ndarray, codes: np.ndarray, amplitudes) -> np.ndarray:
    """Chip stream sum_k a_k[i] b_k[i] d_k placed at offsets i*N.

    ``symbols`` is (K, P), ``codes`` is (K, N) and ``amplitudes`` is (K,) for
    a packet-constant allocation or (K, P) for per-symbol amplitudes.
    """
    symbols = np.asarray(symbols, dtype=complex)
    codes = np.asarray(codes)
    n_users, n_symbols = symbols.shape
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.ndim == 1:
        amplitudes = amplitudes[:, np.newaxis]
    weighted = amplitudes * symbols      # (K, P)
    chips = weighted.T @ codes           # (P, N)
    return chips.reshape(n_symbols * codes.shape[1])


def apply_channel(chips: np.ndarray, taps) -> np.ndarray:
    """Full linear convolution with the multipath taps (length + L - 1)."""
    return np.convolve(chips, np.asarray(taps, dtype=complex))


def chip_windows(stream: np.ndarray, n_symbols: int, gain: int, window: int) -> np.ndarray:
    """(P, M) windows starting at each symbol's chip offset i*N."""
    needed = (n_symbols - 1) * gain + window
    if stream.shape[0] < needed:
        raise ValueError("chip stream too short for the requested windows")
    views = np.lib.stride_tricks.sliding_window_view(stream, window)
    return views[::gain][:n_symbols].copy()


def simulate_phase_one(symbols, codes, channels: LinkChannels, direct_amplitudes,
                       noise_direct, noise_relays, relay_feed_amplitudes=None):
    """Broadcast phase: chip-rate windows seen by the destination and every relay.

    ``noise_direct`` and ``noise_relays`` are pre-drawn chip-noise arrays of
    length P*N + L - 1 (and (n_r, P*N + L - 1)), which keeps paired
    experiments on identical noise realizations.

    The transmission feeding the relays carries its own per-user amplitudes
    (it occupies its own repetition slot); when ``relay_feed_amplitudes`` is
    omitted the relays hear the destination-facing broadcast.

    Returns ``(direct_windows, relay_windows)`` with shapes (P, M) and
    (n_r, P, M). ISI is whatever the full-packet convolution produces.
    """
    symbols = np.asarray(symbols, dtype=complex)
    n_symbols = symbols.shape[1]
    gain = codes.shape[1]
    window = gain + channels.paths - 1
    stream = spread_symbols(symbols, codes, direct_amplitudes)
    direct = apply_channel(stream, channels.direct) + noise_direct
    direct_windows = chip_windows(direct, n_symbols, gain, window)
    if relay_feed_amplitudes is None:
        feed_stream = stream
    else:
        feed_stream = spread_symbols(symbols, codes, relay_feed_amplitudes)
    relay_windows = np.empty((channels.n_relays, n_symbols, window), dtype=complex)
    for j in range(channels.n_relays):
        received = apply_channel(feed_stream, channels.to_relay[j]) + noise_relays[j]
        relay_windows[j] = chip_windows(received, n_symbols, gain, window)
    return direct_windows, relay_windows


# ---------------------------------------------------------------------------
# relay processing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelayStatistics:
    """Per relay/user MMSE filters plus the soft-symbol moments they induce.

    ``gains`` rescales each filtered stream to unit average power;
    ``coherence`` is E[b~ b*], the complex correlation between the forwarded
    soft symbol and the transmitted one (magnitude <= 1).
    """

    filters: np.ndarray    # (n_r, K, M)
    gains: np.ndarray      # (n_r, K) real
    coherence: np.ndarray  # (n_r, K) complex


def relay_processing_statistics(conv_all: np.ndarray, channels: LinkChannels,
                                direct_amplitudes, sigma2: float) -> RelayStatistics:
    """Local MMSE filters at every relay under the current broadcast amplitudes.

    ``conv_all`` is the (K, M, L) stack of user convolution matrices. The
    covariance seen by relay j is sum_l |a_l|^2 s_l s_l^H + sigma^2 I with
    s_l = D_l h_(b r_j); a vanishing noise floor is ridged so the filters
    stay defined in noiseless experiments.
    """
    amps = np.asarray(direct_amplitudes, dtype=complex)
    n_users, window, _ = conv_all.shape
    n_relays = channels.n_relays
    filters = np.empty((n_relays, n_users, window), dtype=complex)
    gains = np.empty((n_relays, n_users))
    coherence = np.empty((n_relays, n_users), dtype=complex)
    floor = max(float(sigma2), 1e-12)
    for j in range(n_relays):
        signatures = conv_all @ channels.to_relay[j]          # (K, M)
        scaled = amps[:, np.newaxis] * signatures
        cov = scaled.T @ scaled.conj() + floor * np.eye(window)
        taps = np.linalg.solve(cov, scaled.T).T               # (K, M) rows w_k = R^-1 a_k s_k
        for k in range(n_users):
            second_moment = float(np.real(taps[k].conj() @ cov @ taps[k]))
            if second_moment <= 0:
                raise ValueError("degenerate relay stream: zero-power soft estimate")
            gain = 1.0 / np.sqrt(second_moment)
            gains[j, k] = gain
            coherence[j, k] = gain * np.vdot(taps[k], scaled[k])
        filters[j] = taps
    return RelayStatistics(filters=filters, gains=gains, coherence=coherence)


def relay_soft_symbols(relay_windows: np.ndarray, stats: RelayStatistics) -> np.ndarray:
    """Unit-power soft symbols b~ forwarded by every relay, shape (n_r, K, P)."""
    filtered = np.einsum('jkm,jpm->jkp', stats.filters.conj(), relay_windows)
    return stats.gains[:, :, np.newaxis] * filtered


def relay_amplify_forward(soft_stream, training_len: int):
    """Rescale a relay's filtered stream to unit average power.

    The gain is estimated from the training segment, g = 1/sqrt(mean |z|^2
    over the first ``training_len`` soft symbols). Returns ``(b_tilde, g)``
    and raises on a zero-power (degenerate) stream.
    """
    soft_stream = np.asarray(soft_stream, dtype=complex)
    if training_len < 1 or training_len > soft_stream.shape[-1]:
        raise ValueError("training segment must be within the stream")
    power = float(np.mean(np.abs(soft_stream[..., :training_len]) ** 2))
    if not np.isfinite(power) or power <= 0:
        raise ValueError("degenerate relay stream: zero-power soft estimate")
    gain = 1.0 / np.sqrt(power)
    return gain * soft_stream, gain


def simulate_relay_phase(soft_symbols: np.ndarray, codes: np.ndarray, relay_amplitudes,
                         channels: LinkChannels, noise_relay_dest) -> np.ndarray:
    """Repetition phase: each relay respreads its soft symbols towards the destination.

    ``soft_symbols`` is (n_r, K, P); ``relay_amplitudes`` is (K, n_r) or
    (K, n_r, P). Returns (n_r, P, M) chip windows at the destination.
    """
    soft_symbols = np.asarray(soft_symbols, dtype=complex)
    n_relays, _, n_symbols = soft_symbols.shape
    gain = codes.shape[1]
    window = gain + channels.paths - 1
    amps = np.asarray(relay_amplitudes, dtype=complex)
    windows = np.empty((n_relays, n_symbols, window), dtype=complex)
    for j in range(n_relays):
        amp_j = amps[:, j] if amps.ndim == 2 else amps[:, j, :]
        stream = spread_symbols(soft_symbols[j], codes, amp_j)
        received = apply_channel(stream, channels.relay_to_dest[j]) + noise_relay_dest[j]
        windows[j] = chip_windows(received, n_symbols, gain, window)
    return windows


def stack_destination_windows(direct_windows, relay_windows) -> np.ndarray:
    """Stack direct and relay windows into the (n_r+1)M destination vector(s).

    Accepts a single symbol's (M,) window plus a sequence of relay windows,
    or batched (P, M) plus (n_r, P, M). The direct link always comes first,
    relays in index order.
    """
    direct_windows = np.asarray(direct_windows, dtype=complex)
    relay_windows = np.asarray(relay_windows, dtype=complex)
    if direct_windows.ndim == 1:
        if relay_windows.size and relay_windows.shape[-1] != direct_windows.shape[0]:
            raise ValueError("relay windows must match the direct window length")
        parts = [direct_windows] + [relay_windows[j] for j in range(relay_windows.shape[0])]
        return np.concatenate(parts)
    if relay_windows.size and relay_windows.shape[1:] != direct_windows.shape:
        raise ValueError("relay windows must be (n_r, P, M) matching the direct windows")
    parts = [direct_windows] + [relay_windows[j] for j in range(relay_windows.shape[0])]
    return np.concatenate(parts, axis=1)


def compact_received_vector(code_stacks, channel_matrix, symbol_diags, amplitudes,
                            noise=None) -> np.ndarray:
    """Symbol-level model r = sum_k C_k H B_k a_k (+ n), no ISI.

    ``code_stacks`` is (K, (n_r+1)M, (n_r+1)L), ``symbol_diags`` holds the
    diagonal of each user's symbol matrix, shape (K, n_r+1). Used as the
    oracle route against the chip-level pipeline and by covariance tests.
    """
    code_stacks = np.asarray(code_stacks, dtype=complex)
    symbol_diags = np.asarray(symbol_diags, dtype=complex)
    amplitudes = np.asarray(amplitudes, dtype=complex)
    received = np.zeros(code_stacks.shape[1], dtype=complex)
    for k in range(code_stacks.shape[0]):
        received += code_stacks[k] @ (channel_matrix @ (symbol_diags[k] * amplitudes[k]))
    if noise is not None:
        received = received + noise
    return received
