"""Synthesizes labeled facial-motion trajectories at 25 fps.

expr(t) = A(intensity) * env(t) * direction(emotion)
          + raised-cosine micro pulses
          + sigma * smooth noise        (clamped to |.| <= 4)

pose(t): oscillating patterns follow amplitude*sin(2*pi*f*t/25) on their
axis; turn patterns ramp to a held angle via smoothstep. Smooth pose noise
sigma_pose = 0.01 rad is added on all three axes.
"""

import numpy as np

from ..face_model import MotionSequence
from .lexicon import INTENSITY_AMPLITUDE

FPS = 25
MIN_LEN, MAX_LEN = 100, 150
EXPR_CLAMP = 4.0
NOISE_SIGMA = 0.05
POSE_NOISE_SIGMA = 0.01
AXIS_INDEX = {"yaw": 0, "pitch": 1, "roll": 2}


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def envelope(length):
    """Attack over [0, 0.2T], sustain, release over [0.8T, T]."""
    t = np.arange(length, dtype=np.float64)
    attack = smoothstep(t / (0.2 * length))
    release = smoothstep((length - t) / (0.2 * length))
    return np.minimum(attack, release)


def smooth_noise(rng, shape, window=9):
    """Unit-std white noise low-passed by a Hann moving average."""
    raw = rng.standard_normal((shape[0] + window - 1,) + shape[1:])
    w = np.hanning(window + 2)[1:-1]
    w /= np.sum(w)
    out = np.zeros(shape)
    for k in range(window):
        out += w[k] * raw[k:k + shape[0]]
    return out


def micro_pulse_track(length, pulse_width, rate, amplitude, rng):
    """Raised-cosine bumps of the given width, Poisson-ish spaced at `rate`."""
    track = np.zeros(length)
    n_events = rng.poisson(rate * length / FPS)
    if n_events == 0:
        return track
    starts = np.sort(rng.integers(0, max(1, length - pulse_width), size=n_events))
    k = np.arange(pulse_width, dtype=np.float64)
    bump = 0.5 * (1.0 - np.cos(2.0 * np.pi * (k + 0.5) / pulse_width))
    for s in starts:
        track[s:s + pulse_width] += amplitude * bump[: length - s]
    return track


def synth_trajectory(lexicon, labels, length, rng, noise_sigma=NOISE_SIGMA,
                     pose_noise_sigma=POSE_NOISE_SIGMA):
    """MotionSequence for one label cell; deterministic given the rng state."""
    if not MIN_LEN <= length <= MAX_LEN:
        raise ValueError(f"length {length} outside [{MIN_LEN}, {MAX_LEN}]")
    lexicon.validate_labels(labels)
    e = lexicon.expr_dim
    arch = lexicon.archetype(labels.emotion)
    amp = INTENSITY_AMPLITUDE[labels.intensity] * arch.base_amplitude

    env = envelope(length)
    expr = np.outer(amp * env, arch.direction)
    for name in labels.micro:
        m = lexicon.micro(name)
        expr[:, m.component_index] += micro_pulse_track(
            length, m.pulse_width, m.rate, m.amplitude, rng
        )
    if noise_sigma > 0:
        expr += noise_sigma * smooth_noise(rng, (length, e))
    np.clip(expr, -EXPR_CLAMP, EXPR_CLAMP, out=expr)

    pose = np.zeros((length, 3))
    pat = lexicon.pattern(labels.motion)
    if pat.amplitude > 0:
        t = np.arange(length, dtype=np.float64)
        if pat.ramp:
            signal = pat.sign * pat.amplitude * smoothstep(t / (0.3 * length))
        else:
            signal = pat.amplitude * np.sin(2.0 * np.pi * pat.frequency * t / FPS)
        pose[:, AXIS_INDEX[pat.axis]] = signal
    if pose_noise_sigma > 0:
        pose += pose_noise_sigma * smooth_noise(rng, (length, 3))

    return MotionSequence.from_arrays(expr, pose)
