"""Scene-driven FMCW radar cube synthesis with full ground truth.

Physical chain: speakers emit superposed sinusoidal sound pressure that
decays as 1/r in free field (c_sound = 343 m/s); membranes respond with the
steady-state spatially averaged displacement of a damped elastic sheet; the
radar observes each object as a per-chirp IF phasor

    v(t) = alpha * exp(j * 4*pi*f_c * (R0 + d(t)) / c) + S_static(t)

placed into the fast-time spectrum at the beat frequency 2*K*R0/c, with
far-field steering across receive antennas. During speech the static
interference shifts to S_static * (1 + shift_gain * e^{j theta}), one theta
draw per speech segment, which is the adversary the speech-aware calibration
has to defeat.

Sensor imperfections: additive complex Gaussian self-noise on every IF
sample, plus an optional slow random-walk phase wander applied to the target
return (it makes silent periods trace arcs in the IQ plane instead of
collapsing to a point, the regime the calibration scheme is designed for).

Ground truth records everything hidden: per-object displacement, clean and
residual STFTs, ideal speech/noise masks, static centers, per-component
transfer gains, and labeled speech segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import amplify
from .errors import ConfigurationError, DegenerateGeometryError, ParameterError

C_LIGHT = 3.0e8
C_SOUND = 343.0
DRIFT_RATE_HZ = 10.0  # update rate of the slow phase wander


# ---------------------------------------------------------------------------
# Scene building blocks
# ---------------------------------------------------------------------------


@dataclass
class SpeechWaveform:
    """Sum of sinusoids: components are (amplitude Pa, angular freq rad/s, phase rad)."""

    components: list[tuple[float, float, float]]
    duration: float

    def __post_init__(self):
        cleaned = []
        for amp, omega, phi in self.components:
            if amp < 0:
                raise ParameterError("component amplitude must be >= 0")
            if omega <= 0:
                raise ParameterError("component angular frequency must be > 0")
            cleaned.append((float(amp), float(omega), float(phi) % (2.0 * math.pi)))
        self.components = cleaned
        if self.duration <= 0:
            raise ParameterError("waveform duration must be > 0")

    @classmethod
    def from_samples(cls, samples, sample_rate: float, n_components: int = 16,
                     duration: float | None = None) -> "SpeechWaveform":
        """Decompose a sampled waveform into its strongest FFT components."""
        samples = np.asarray(samples, dtype=np.float64)
        if samples.size < 8:
            raise ParameterError("need at least 8 samples to decompose")
        spec = np.fft.rfft(samples)
        freqs = np.fft.rfftfreq(samples.size, d=1.0 / sample_rate)
        mags = np.abs(spec)
        mags[0] = 0.0  # DC carries no acoustic pressure oscillation
        order = np.argsort(mags)[::-1][:n_components]
        comps = []
        for k in sorted(order):
            if mags[k] == 0.0:
                continue
            amp = 2.0 * mags[k] / samples.size
            comps.append((amp, 2.0 * math.pi * freqs[k], float(np.angle(spec[k]))))
        return cls(comps, duration if duration is not None else samples.size / sample_rate)


@dataclass
class Speaker:
    """One acoustic source: a person-utterance at a fixed position.

    Several Speaker entries may share a label; they then represent the same
    person uttering different content at different times.
    """

    position: np.ndarray
    waveform: SpeechWaveform
    active_intervals: list[tuple[float, float]]
    label: str

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        ivals = [(float(s), float(e)) for s, e in self.active_intervals]
        for s, e in ivals:
            if e <= s:
                raise ParameterError(f"interval ({s}, {e}) is empty or reversed")
        for (s0, e0), (s1, e1) in zip(ivals, ivals[1:]):
            if s1 < e0:
                raise ParameterError("active intervals must be sorted and non-overlapping")
        self.active_intervals = ivals


@dataclass
class MembraneObject:
    """Thin flexible reflector excited by sound pressure.

    natural_frequency is omega_0 in rad/s. flexural_modulus is recorded for
    completeness but unused by the steady-state spatially averaged solution.
    static_interference_ratio sets |S_static| relative to the object's own
    reflected amplitude (the paper leaves the interference magnitude free).
    """

    position: np.ndarray
    surface_area: float
    mass_per_length: float
    damping: float
    natural_frequency: float
    flexural_modulus: float
    static_reflectivity: float
    static_shift_gain: float = 0.0
    static_interference_ratio: float = 1.0
    name: str = ""

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        for attr in ("surface_area", "mass_per_length", "damping", "natural_frequency"):
            if getattr(self, attr) <= 0:
                raise ParameterError(f"{attr} must be > 0")
        if self.static_reflectivity < 0:
            raise ParameterError("static_reflectivity must be >= 0")
        if self.static_interference_ratio < 0:
            raise ParameterError("static_interference_ratio must be >= 0")


@dataclass
class RadarConfig:
    """FMCW front-end description.

    frame_rate (chirps_per_frame / frame_duration) is the sampling rate of
    the per-chirp vibration phase series; the defaults give the 77 GHz,
    4 GHz-bandwidth, 128-chirps-per-10.64-ms setup (~12 kHz phase sampling).
    self_noise_std is the per-component std of the additive complex Gaussian
    noise on IF samples, expressed relative to a unit-amplitude reflection
    (so it reads as radians of phase jitter on such a phasor).
    phase_drift_std is the per-step std of a slow (10 Hz) random-walk phase
    wander on the target return; it makes silent periods trace arcs in the
    IQ plane while staying out of the speech band.
    """

    start_frequency: float = 77.0e9
    bandwidth: float = 4.0e9
    chirp_slope: float = 4.0e9 / 60.0e-6
    samples_per_chirp: int = 256
    chirps_per_frame: int = 128
    frame_duration: float = 10.64e-3
    rx_antennas: int = 4
    rx_spacing: float = 1.0  # multiples of lambda/2
    path_loss_exponent: float = 2.0
    self_noise_std: float = 0.0
    phase_drift_std: float = 0.0
    c: float = C_LIGHT

    def __post_init__(self):
        if min(self.start_frequency, self.bandwidth, self.chirp_slope,
               self.frame_duration) <= 0:
            raise ConfigurationError("frequencies, bandwidth, slope, durations must be > 0")
        if self.samples_per_chirp < 8:
            raise ConfigurationError("samples_per_chirp must be >= 8")
        if self.chirps_per_frame < 1 or self.rx_antennas < 1:
            raise ConfigurationError("chirps_per_frame and rx_antennas must be >= 1")
        if self.rx_spacing <= 0:
            raise ConfigurationError("rx_spacing must be > 0")
        if self.self_noise_std < 0 or self.phase_drift_std < 0:
            raise ConfigurationError("noise levels must be >= 0")
        if self.chirp_duration * self.chirps_per_frame > self.frame_duration * (1 + 1e-9):
            raise ConfigurationError("chirps do not fit within the frame duration")

    @property
    def chirp_duration(self) -> float:
        # bandwidth = K * chirp duration
        return self.bandwidth / self.chirp_slope

    @property
    def fast_sample_rate(self) -> float:
        return self.samples_per_chirp / self.chirp_duration

    @property
    def frame_rate(self) -> float:
        """Vibration (per-chirp) sampling rate in Hz."""
        return self.chirps_per_frame / self.frame_duration

    @property
    def range_resolution(self) -> float:
        return self.c / (2.0 * self.bandwidth)

    @property
    def max_range(self) -> float:
        return self.samples_per_chirp * self.range_resolution

    @property
    def wavelength(self) -> float:
        return self.c / self.start_frequency

    def range_to_bin(self, r: float) -> float:
        return r / self.range_resolution


@dataclass
class Scene:
    """World model: speakers, membrane objects, radar pose, duration.

    The radar sits at radar_position with boresight along +x; azimuth is
    measured in the xy-plane (positive towards +y).
    """

    speakers: list[Speaker]
    objects: list[MembraneObject]
    radar_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    duration: float = 4.0

    def __post_init__(self):
        self.radar_position = np.asarray(self.radar_position, dtype=np.float64).reshape(3)
        if self.duration <= 0:
            raise ConfigurationError("scene duration must be > 0")
        if not self.objects:
            raise ConfigurationError("scene needs at least one object")
        for spk in self.speakers:
            for s, e in spk.active_intervals:
                if s < 0 or e > self.duration + 1e-9:
                    raise ConfigurationError(
                        f"interval ({s}, {e}) extends beyond scene duration {self.duration}"
                    )

    def speech_union_intervals(self) -> list[tuple[float, float]]:
        """Merged union of all speakers' active intervals."""
        ivals = sorted(
            (s, e) for spk in self.speakers for (s, e) in spk.active_intervals
        )
        merged: list[tuple[float, float]] = []
        for s, e in ivals:
            if merged and s <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], e))
            else:
                merged.append((s, e))
        return merged

    def labeled_segments(self) -> list[tuple[float, float, str]]:
        """Per-utterance (start, end, speaker label), sorted by start time."""
        segs = [
            (s, e, spk.label)
            for spk in self.speakers
            for (s, e) in spk.active_intervals
        ]
        return sorted(segs)


@dataclass
class RadarCube:
    """Raw complex IF samples indexed (frame, chirp, rx, fast-time)."""

    samples: np.ndarray
    config: RadarConfig

    def __post_init__(self):
        if self.samples.ndim != 4:
            raise ConfigurationError("radar cube must be 4-D")
        f, c, m, s = self.samples.shape
        if (c != self.config.chirps_per_frame or m != self.config.rx_antennas
                or s != self.config.samples_per_chirp):
            raise ConfigurationError("cube dimensions do not match the radar config")
        if not np.all(np.isfinite(self.samples)):
            raise ConfigurationError("cube contains non-finite samples")

    @property
    def n_frames(self) -> int:
        return self.samples.shape[0]

    @property
    def n_chirps_total(self) -> int:
        return self.samples.shape[0] * self.samples.shape[1]


@dataclass
class GroundTruth:
    """Hidden quantities recorded during synthesis (object axis first)."""

    displacement: np.ndarray          # (n_obj, n_chirps) meters
    clean_phase: np.ndarray           # (n_obj, n_chirps) rad, 4*pi*f_c*d/c
    clean_stft: np.ndarray            # (n_obj, T, F) complex
    noise_stft: np.ndarray            # (n_obj, T, F) complex, observed - clean
    speech_mask: np.ndarray           # (n_obj, T, F) in [0, 1]
    noise_mask: np.ndarray            # (n_obj, T, F) in [0, 1]
    segments: list[tuple[float, float, str]]
    static_centers: np.ndarray        # (n_obj,) complex, S_static
    shifted_centers: list[list[complex]]  # per object, per union speech segment
    range_bins: np.ndarray            # (n_obj,) int
    ranges_m: np.ndarray              # (n_obj,)
    azimuths_deg: np.ndarray          # (n_obj,)
    alphas: np.ndarray                # (n_obj,) path-loss amplitudes
    transfer_gains: list[list[np.ndarray]]  # [obj][speaker] -> complex per component
    frame_rate: float
    stft_window: int
    stft_hop: int

    def __post_init__(self):
        for mask in (self.speech_mask, self.noise_mask):
            if np.any(mask < 0) or np.any(mask > 1):
                raise ConfigurationError("masks must lie in [0, 1]")
        if not np.allclose(self.speech_mask + self.noise_mask, 1.0):
            raise ConfigurationError("speech and noise masks must sum to 1")


# ---------------------------------------------------------------------------
# Physics operations
# ---------------------------------------------------------------------------


def sound_pressure(speaker: Speaker, point, t):
    """Sound pressure (Pa) radiated by a speaker at a field point.

    Free-field superposition with 1/r decay and propagation delay r/c_sound;
    zero outside the speaker's active intervals.
    """
    point = np.asarray(point, dtype=np.float64).reshape(3)
    r = float(np.linalg.norm(point - speaker.position))
    if r == 0.0:
        raise DegenerateGeometryError("field point coincides with the speaker")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    p = np.zeros_like(t_arr)
    active = np.zeros(t_arr.shape, dtype=bool)
    for s, e in speaker.active_intervals:
        active |= (t_arr >= s) & (t_arr < e)
    if np.any(active):
        ta = t_arr[active]
        acc = np.zeros_like(ta)
        for amp, omega, phi in speaker.waveform.components:
            acc += (amp / r) * np.cos(omega * (ta - r / C_SOUND) + phi)
        p[active] = acc
    return p if np.ndim(t) else float(p[0])


def membrane_response(obj: MembraneObject, omega) -> np.ndarray:
    """Displacement per unit pressure amplitude: S / (m*sqrt((w0^2-w^2)^2+(wB/m)^2))."""
    omega = np.asarray(omega, dtype=np.float64)
    w0 = obj.natural_frequency
    denom = obj.mass_per_length * np.sqrt(
        (w0 ** 2 - omega ** 2) ** 2 + (omega * obj.damping / obj.mass_per_length) ** 2
    )
    return obj.surface_area / denom


def membrane_displacement(obj: MembraneObject, pressure_components, t):
    """Steady-state displacement (m) for pressure components already at the object.

    pressure_components: iterable of (P_i at the object in Pa, omega_i rad/s,
    phi_i rad).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    d = np.zeros_like(t_arr)
    for amp, omega, phi in pressure_components:
        d += amp * membrane_response(obj, omega) * np.cos(omega * t_arr + phi)
    return d if np.ndim(t) else float(d[0])


# ---------------------------------------------------------------------------
# Cube synthesis
# ---------------------------------------------------------------------------


def _object_geometry(scene: Scene, config: RadarConfig, obj: MembraneObject):
    rel = obj.position - scene.radar_position
    r0 = float(np.linalg.norm(rel))
    if r0 == 0.0:
        raise DegenerateGeometryError(f"object {obj.name!r} coincides with the radar")
    azimuth = math.atan2(rel[1], rel[0])
    return r0, azimuth


def _steering(config: RadarConfig, azimuth: float) -> np.ndarray:
    m = np.arange(config.rx_antennas)
    return np.exp(1j * math.pi * config.rx_spacing * m * math.sin(azimuth))


def _gated_displacement(scene: Scene, obj: MembraneObject, t: np.ndarray):
    """Per-object displacement series plus per-speaker complex transfer gains."""
    d = np.zeros_like(t)
    gains: list[np.ndarray] = []
    for spk in scene.speakers:
        r = float(np.linalg.norm(obj.position - spk.position))
        if r == 0.0:
            raise DegenerateGeometryError(
                f"speaker {spk.label!r} coincides with object {obj.name!r}"
            )
        comp_gain = np.zeros(len(spk.waveform.components), dtype=np.complex128)
        active = np.zeros(t.shape, dtype=bool)
        for s, e in spk.active_intervals:
            i0, i1 = np.searchsorted(t, [s, e])
            active[i0:i1] = True
        ta = t[active]
        acc = np.zeros_like(ta)
        for i, (amp, omega, phi) in enumerate(spk.waveform.components):
            a_obj = (amp / r) * membrane_response(obj, omega)
            psi = phi - omega * r / C_SOUND
            comp_gain[i] = a_obj * np.exp(1j * psi)
            if ta.size:
                acc += a_obj * np.cos(omega * ta + psi)
        if ta.size:
            d[active] += acc
        gains.append(comp_gain)
    return d, gains


def synthesize_radar_cube(
    scene: Scene,
    config: RadarConfig,
    seed: int,
    stft_window: int = amplify.DEFAULT_WINDOW,
    stft_hop: int = amplify.DEFAULT_HOP,
) -> tuple[RadarCube, GroundTruth]:
    """Simulate the IF cube for a scene and record full ground truth.

    Randomness (static interference phases, per-segment center shifts, phase
    drift, self-noise) is driven entirely by `seed` through fixed substreams,
    so identical (scene, config, seed) gives a bit-identical cube.
    """
    ss = np.random.SeedSequence(seed)
    rng_static, rng_shift, rng_drift, rng_noise = (
        np.random.default_rng(child) for child in ss.spawn(4)
    )

    n_frames = int(round(scene.duration / config.frame_duration))
    if n_frames < 1:
        raise ConfigurationError("scene shorter than one radar frame")
    n_chirps = n_frames * config.chirps_per_frame
    t_slow = np.arange(n_chirps) / config.frame_rate
    n_fast = config.samples_per_chirp
    k_fast = np.arange(n_fast)

    union_segments = scene.speech_union_intervals()
    drift = np.zeros(n_chirps)
    if config.phase_drift_std > 0:
        # slow wander: a random walk sampled at DRIFT_RATE_HZ, interpolated to
        # the chirp rate, so its energy stays far below the speech band
        n_slow = int(math.ceil(scene.duration * DRIFT_RATE_HZ)) + 2
        walk = np.cumsum(rng_drift.normal(0.0, config.phase_drift_std, n_slow))
        slow_t = np.arange(n_slow) / DRIFT_RATE_HZ
        drift = np.interp(t_slow, slow_t, walk)

    phase_scale = 4.0 * math.pi * config.start_frequency / config.c

    n_obj = len(scene.objects)
    cube = np.zeros((n_chirps, config.rx_antennas, n_fast), dtype=np.complex128)
    displacement = np.zeros((n_obj, n_chirps))
    static_centers = np.zeros(n_obj, dtype=np.complex128)
    shifted_centers: list[list[complex]] = []
    range_bins = np.zeros(n_obj, dtype=int)
    ranges = np.zeros(n_obj)
    azimuths = np.zeros(n_obj)
    alphas = np.zeros(n_obj)
    transfer_gains: list[list[np.ndarray]] = []
    static_series_all = np.zeros((n_obj, n_chirps), dtype=np.complex128)
    bin_gains = np.zeros(n_obj, dtype=np.complex128)

    range_window = np.hanning(n_fast + 1)[:-1]  # periodic Hann, matches range FFT

    for i, obj in enumerate(scene.objects):
        r0, az = _object_geometry(scene, config, obj)
        if r0 >= config.max_range:
            raise ConfigurationError(
                f"object {obj.name!r} at {r0:.2f} m exceeds max range {config.max_range:.2f} m"
            )
        f_if = 2.0 * config.chirp_slope * r0 / config.c
        alpha = obj.static_reflectivity / (r0 ** config.path_loss_exponent)

        d, gains = _gated_displacement(scene, obj, t_slow)
        displacement[i] = d
        transfer_gains.append([g * phase_scale for g in gains])

        # static interference: fixed during silence, shifted per speech segment
        s_static = (
            obj.static_interference_ratio
            * alpha
            * np.exp(1j * rng_static.uniform(0.0, 2.0 * math.pi))
        )
        static_centers[i] = s_static
        static_series = np.full(n_chirps, s_static, dtype=np.complex128)
        shifts: list[complex] = []
        for s, e in union_segments:
            theta = rng_shift.uniform(0.0, 2.0 * math.pi)
            s_shift = s_static * (1.0 + obj.static_shift_gain * np.exp(1j * theta))
            shifts.append(complex(s_shift))
            i0, i1 = np.searchsorted(t_slow, [s, e])
            static_series[i0:i1] = s_shift
        shifted_centers.append(shifts)
        static_series_all[i] = static_series

        vib = alpha * np.exp(1j * (phase_scale * (r0 + d) + drift))
        phasor = vib + static_series

        steer = _steering(config, az)
        tone = np.exp(2j * math.pi * f_if * k_fast / config.fast_sample_rate)
        cube += phasor[:, None, None] * steer[None, :, None] * tone[None, None, :]

        b = int(round(config.range_to_bin(r0)))
        range_bins[i] = b
        ranges[i] = r0
        azimuths[i] = math.degrees(az)
        alphas[i] = alpha
        # complex gain the range FFT applies at bin b for this object's tone
        bin_gains[i] = np.sum(
            range_window * tone * np.exp(-2j * math.pi * b * k_fast / n_fast)
        )

    if config.self_noise_std > 0:
        noise = rng_noise.normal(0.0, config.self_noise_std, size=(n_chirps, config.rx_antennas, n_fast, 2))
        cube += noise[..., 0] + 1j * noise[..., 1]

    cube = cube.reshape(n_frames, config.chirps_per_frame, config.rx_antennas, n_fast)
    radar_cube = RadarCube(cube, config)

    # --- ground truth spectra and ideal masks -----------------------------
    clean_phase = phase_scale * displacement
    flat = cube.reshape(n_chirps, config.rx_antennas, n_fast)
    clean_stfts, noise_stfts, speech_masks, noise_masks = [], [], [], []
    for i in range(n_obj):
        b = range_bins[i]
        dft_vec = range_window * np.exp(-2j * math.pi * b * k_fast / n_fast)
        at_bin = flat[:, 0, :] @ dft_vec  # rx 0 is the reference antenna
        centered = at_bin - static_series_all[i] * bin_gains[i]
        obs_phase = np.unwrap(np.angle(centered))
        residual = obs_phase - clean_phase[i]
        residual = residual - residual.mean()
        clean = amplify.stft(clean_phase[i], config.frame_rate, stft_window, stft_hop)
        noisy = amplify.stft(residual, config.frame_rate, stft_window, stft_hop)
        s_pow = (clean.values * np.conj(clean.values)).real
        r_pow = (noisy.values * np.conj(noisy.values)).real
        denom = s_pow + r_pow
        mask = np.divide(s_pow, denom, out=np.zeros_like(s_pow), where=denom > 0)
        np.clip(mask, 0.0, 1.0, out=mask)
        clean_stfts.append(clean.values)
        noise_stfts.append(noisy.values)
        speech_masks.append(mask)
        noise_masks.append(1.0 - mask)

    gt = GroundTruth(
        displacement=displacement,
        clean_phase=clean_phase,
        clean_stft=np.array(clean_stfts),
        noise_stft=np.array(noise_stfts),
        speech_mask=np.array(speech_masks),
        noise_mask=np.array(noise_masks),
        segments=scene.labeled_segments(),
        static_centers=static_centers,
        shifted_centers=shifted_centers,
        range_bins=range_bins,
        ranges_m=ranges,
        azimuths_deg=azimuths,
        alphas=alphas,
        transfer_gains=transfer_gains,
        frame_rate=config.frame_rate,
        stft_window=stft_window,
        stft_hop=stft_hop,
    )
    return radar_cube, gt
