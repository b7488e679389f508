"""Scene construction and scene-file I/O.

Canonical desk-scale layouts: a radar at the origin looking down +x at a
table with up to four membrane reflectors, five seat positions P1..P5 around
the table, and an utterance library of harmonic-comb "digits" (all digits
share one frequency comb; a digit is an amplitude profile over the comb, so
content changes perturb features far less than seat changes do).

Scene files are YAML with explicit unit suffixes; a file may either list
speakers/objects explicitly or name a generator with parameters.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigurationError, ParameterError
from .synth import MembraneObject, RadarConfig, Scene, Speaker, SpeechWaveform

# (range m, azimuth deg, resonance Hz) per table object, radar at origin
OBJECT_TABLE = [
    (0.95, 35.0, 260.0),
    (1.25, 0.0, 440.0),
    (1.55, -35.0, 620.0),
    (1.10, -15.0, 340.0),
]

# seat positions around the table, (x, y) meters
SEAT_POSITIONS = {
    "P1": (0.62, 0.86),
    "P2": (1.15, 0.62),
    "P3": (1.72, 0.05),
    "P4": (1.40, -0.52),
    "P5": (1.28, -1.30),
}

# mirrors the paper-style arrangement table
ARRANGEMENTS = {
    "natural": {2: ["P1", "P5"], 3: ["P1", "P3", "P5"], 4: ["P1", "P3", "P4", "P5"]},
    "shoulder": {2: ["P4", "P5"], 3: ["P3", "P4", "P5"], 4: ["P1", "P2", "P3", "P4"]},
}

# shared frequency comb for all digits (Hz), inside the 50-1000 Hz speech band
COMB_HZ = np.arange(120.0, 960.1, 60.0)  # 14 lines

MEMBRANE_SURFACE_M2 = 0.12
MEMBRANE_MASS_KG_M = 0.012
MEMBRANE_Q = 4.0


def desk_radar_config(
    self_noise_std: float = 0.006,
    phase_drift_std: float = 0.05,
    rx_antennas: int = 2,
    samples_per_chirp: int = 48,
) -> RadarConfig:
    """Lean 77 GHz / 2 GHz-bandwidth config for fast desk-scale experiments.

    4 kHz phase sampling (64 chirps per 16 ms frame), 7.5 cm range bins.
    """
    return RadarConfig(
        start_frequency=77.0e9,
        bandwidth=2.0e9,
        chirp_slope=2.0e9 / 50.0e-6,
        samples_per_chirp=samples_per_chirp,
        chirps_per_frame=64,
        frame_duration=16.0e-3,
        rx_antennas=rx_antennas,
        rx_spacing=1.0,
        path_loss_exponent=2.0,
        self_noise_std=self_noise_std,
        phase_drift_std=phase_drift_std,
    )


def paper_radar_config(self_noise_std: float = 0.0, phase_drift_std: float = 0.0
                       ) -> RadarConfig:
    """Full-rate 77 GHz / 4 GHz config: 128 chirps per 10.64 ms frame."""
    return RadarConfig(self_noise_std=self_noise_std,
                       phase_drift_std=phase_drift_std)


def _polar(range_m: float, azimuth_deg: float) -> np.ndarray:
    a = math.radians(azimuth_deg)
    return np.array([range_m * math.cos(a), range_m * math.sin(a), 0.0])


def table_object(index: int, static_shift_gain: float = 0.1,
                 static_interference_ratio: float = 1.0,
                 distance_scale: float = 1.0) -> MembraneObject:
    r, az, f0 = OBJECT_TABLE[index]
    omega0 = 2.0 * math.pi * f0
    damping = MEMBRANE_MASS_KG_M * omega0 / MEMBRANE_Q
    return MembraneObject(
        position=_polar(r * distance_scale, az),
        surface_area=MEMBRANE_SURFACE_M2,
        mass_per_length=MEMBRANE_MASS_KG_M,
        damping=damping,
        natural_frequency=omega0,
        flexural_modulus=0.003,
        static_reflectivity=1.0,
        static_shift_gain=static_shift_gain,
        static_interference_ratio=static_interference_ratio,
        name=f"obj{index}",
    )


def wall_object(range_m: float = 2.6, azimuth_deg: float = 10.0,
                reflectivity: float = 3.0) -> MembraneObject:
    """A rigid massive reflector: responds to sound only negligibly."""
    return MembraneObject(
        position=_polar(range_m, azimuth_deg),
        surface_area=1e-6,
        mass_per_length=500.0,
        damping=5e4,
        natural_frequency=2.0 * math.pi * 5e4,
        flexural_modulus=50.0,
        static_reflectivity=reflectivity,
        static_shift_gain=0.0,
        static_interference_ratio=0.3,
        name="wall",
    )


def digit_waveform(digit: int, duration: float, rng: np.random.Generator,
                   pressure_pa: float = 4.0) -> SpeechWaveform:
    """One utterance of a digit: the shared comb with the digit's amplitude
    profile, small per-utterance jitter, and fresh phases."""
    prof_rng = np.random.default_rng(1000 + digit)  # profile is a property of the digit
    rolloff = (1.0 + np.arange(COMB_HZ.size) / 2.0) ** -1.5
    profile = rolloff * (1.0 + 0.18 * prof_rng.uniform(-1.0, 1.0, COMB_HZ.size))
    jitter = 1.0 + 0.05 * rng.uniform(-1.0, 1.0, COMB_HZ.size)
    amps = pressure_pa * profile * jitter
    phases = rng.uniform(0.0, 2.0 * math.pi, COMB_HZ.size)
    comps = [
        (float(a), 2.0 * math.pi * float(f), float(p))
        for a, f, p in zip(amps, COMB_HZ, phases)
    ]
    return SpeechWaveform(comps, duration)


def meeting_scene(
    n_speakers: int = 3,
    arrangement: str = "natural",
    n_objects: int = 3,
    utterances_per_speaker: int = 3,
    seed: int = 0,
    utterance_s: float = 0.22,
    gap_s: float = 0.28,
    lead_silence_s: float = 0.8,
    pressure_pa: float = 4.0,
    static_shift_gain: float = 0.1,
    static_interference_ratio: float = 1.0,
    distance_scale: float = 1.0,
    include_wall: bool = False,
) -> Scene:
    """Turn-taking meeting: each person utters digits 0..9 cyclically.

    One Speaker entry is created per utterance (same label per person), so
    every utterance can carry its own digit waveform.
    """
    if arrangement not in ARRANGEMENTS:
        raise ParameterError(f"unknown arrangement {arrangement!r}")
    if n_speakers not in ARRANGEMENTS[arrangement]:
        raise ParameterError(
            f"{arrangement} arrangement supports {sorted(ARRANGEMENTS[arrangement])} speakers"
        )
    if not (1 <= n_objects <= len(OBJECT_TABLE)):
        raise ParameterError(f"n_objects must be in [1, {len(OBJECT_TABLE)}]")

    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD161)))
    seats = ARRANGEMENTS[arrangement][n_speakers]
    positions = [
        np.array([*(np.array(SEAT_POSITIONS[s]) * distance_scale), 0.0])
        for s in seats
    ]

    slot = utterance_s + gap_s
    speakers: list[Speaker] = []
    t = lead_silence_s
    for u in range(utterances_per_speaker):
        for p, seat in enumerate(seats):
            digit = u % 10
            wf = digit_waveform(digit, utterance_s, rng, pressure_pa)
            speakers.append(
                Speaker(
                    position=positions[p],
                    waveform=wf,
                    active_intervals=[(t, t + utterance_s)],
                    label=seat,
                )
            )
            t += slot
    duration = t + gap_s

    objects = [
        table_object(i, static_shift_gain, static_interference_ratio, distance_scale)
        for i in range(n_objects)
    ]
    if include_wall:
        objects.append(wall_object())
    return Scene(speakers=speakers, objects=objects, duration=duration)


def tone_scene(
    tone_hz: float = 320.0,
    pressure_pa: float = 1.0,
    duration: float = 3.0,
    speech_intervals: list[tuple[float, float]] | None = None,
    object_index: int = 1,
    static_shift_gain: float = 0.0,
    static_interference_ratio: float = 0.0,
    speaker_range_m: float = 0.5,
) -> Scene:
    """Single object, single pure-tone speaker: the unit-test workhorse."""
    obj = table_object(object_index, static_shift_gain, static_interference_ratio)
    direction = obj.position / np.linalg.norm(obj.position)
    spk_pos = obj.position + direction * speaker_range_m
    intervals = speech_intervals if speech_intervals is not None else [(1.0, 2.0)]
    wf = SpeechWaveform([(pressure_pa, 2.0 * math.pi * tone_hz, 0.0)], duration)
    spk = Speaker(spk_pos, wf, intervals, label="tone")
    return Scene(speakers=[spk], objects=[obj], duration=duration)


# ---------------------------------------------------------------------------
# Scene files
# ---------------------------------------------------------------------------


def _waveform_to_yaml(wf: SpeechWaveform) -> dict:
    return {
        "duration_s": wf.duration,
        "components": [
            [amp, omega / (2.0 * math.pi), phi] for amp, omega, phi in wf.components
        ],
    }


def _waveform_from_yaml(d: dict) -> SpeechWaveform:
    comps = [
        (float(a), 2.0 * math.pi * float(f_hz), float(p))
        for a, f_hz, p in d["components"]
    ]
    return SpeechWaveform(comps, float(d["duration_s"]))


def scene_to_dict(scene: Scene) -> dict:
    return {
        "duration_s": scene.duration,
        "radar_position_m": [float(v) for v in scene.radar_position],
        "objects": [
            {
                "name": o.name,
                "position_m": [float(v) for v in o.position],
                "surface_area_m2": o.surface_area,
                "mass_per_length_kg_m": o.mass_per_length,
                "damping_kg_s": o.damping,
                "natural_frequency_hz": o.natural_frequency / (2.0 * math.pi),
                "flexural_modulus_nm2": o.flexural_modulus,
                "static_reflectivity": o.static_reflectivity,
                "static_shift_gain": o.static_shift_gain,
                "static_interference_ratio": o.static_interference_ratio,
            }
            for o in scene.objects
        ],
        "speakers": [
            {
                "label": s.label,
                "position_m": [float(v) for v in s.position],
                "active_intervals_s": [[a, b] for a, b in s.active_intervals],
                "waveform": _waveform_to_yaml(s.waveform),
            }
            for s in scene.speakers
        ],
    }


def scene_from_dict(data: dict) -> Scene:
    if "generator" in data:
        gen = dict(data["generator"])
        name = gen.pop("name", None)
        if name == "meeting":
            return meeting_scene(**gen)
        if name == "tone":
            return tone_scene(**gen)
        raise ConfigurationError(f"unknown scene generator {name!r}")
    try:
        objects = [
            MembraneObject(
                position=o["position_m"],
                surface_area=float(o["surface_area_m2"]),
                mass_per_length=float(o["mass_per_length_kg_m"]),
                damping=float(o["damping_kg_s"]),
                natural_frequency=2.0 * math.pi * float(o["natural_frequency_hz"]),
                flexural_modulus=float(o.get("flexural_modulus_nm2", 0.0)),
                static_reflectivity=float(o.get("static_reflectivity", 1.0)),
                static_shift_gain=float(o.get("static_shift_gain", 0.0)),
                static_interference_ratio=float(o.get("static_interference_ratio", 1.0)),
                name=str(o.get("name", "")),
            )
            for o in data["objects"]
        ]
        speakers = [
            Speaker(
                position=s["position_m"],
                waveform=_waveform_from_yaml(s["waveform"]),
                active_intervals=[tuple(map(float, iv)) for iv in s["active_intervals_s"]],
                label=str(s["label"]),
            )
            for s in data.get("speakers", [])
        ]
    except KeyError as exc:
        raise ConfigurationError(f"scene file missing key: {exc}") from exc
    return Scene(
        speakers=speakers,
        objects=objects,
        radar_position=data.get("radar_position_m", [0.0, 0.0, 0.0]),
        duration=float(data["duration_s"]),
    )


def load_scene(path) -> Scene:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"scene file not found: {path}")
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigurationError(f"scene file {path} is not a mapping")
    return scene_from_dict(data)


def save_scene(scene: Scene, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(scene_to_dict(scene), fh, sort_keys=False)


def radar_config_to_dict(config: RadarConfig) -> dict:
    return {
        "start_frequency_hz": config.start_frequency,
        "bandwidth_hz": config.bandwidth,
        "chirp_slope_hz_per_s": config.chirp_slope,
        "samples_per_chirp": config.samples_per_chirp,
        "chirps_per_frame": config.chirps_per_frame,
        "frame_duration_s": config.frame_duration,
        "rx_antennas": config.rx_antennas,
        "rx_spacing_half_wavelengths": config.rx_spacing,
        "path_loss_exponent": config.path_loss_exponent,
        "self_noise_std": config.self_noise_std,
        "phase_drift_std": config.phase_drift_std,
    }


def radar_config_from_dict(data: dict) -> RadarConfig:
    mapping = {
        "start_frequency_hz": "start_frequency",
        "bandwidth_hz": "bandwidth",
        "chirp_slope_hz_per_s": "chirp_slope",
        "samples_per_chirp": "samples_per_chirp",
        "chirps_per_frame": "chirps_per_frame",
        "frame_duration_s": "frame_duration",
        "rx_antennas": "rx_antennas",
        "rx_spacing_half_wavelengths": "rx_spacing",
        "path_loss_exponent": "path_loss_exponent",
        "self_noise_std": "self_noise_std",
        "phase_drift_std": "phase_drift_std",
    }
    kwargs = {}
    for file_key, attr in mapping.items():
        if file_key in data:
            value = data[file_key]
            kwargs[attr] = int(value) if attr in (
                "samples_per_chirp", "chirps_per_frame", "rx_antennas") else float(value)
    return RadarConfig(**kwargs)


def scale_scene_distance(scene: Scene, factor: float) -> Scene:
    """Scale every position radially away from the radar (distance sweeps)."""
    if factor <= 0:
        raise ParameterError("distance factor must be > 0")
    origin = scene.radar_position

    def scaled(p):
        return origin + (np.asarray(p) - origin) * factor

    objects = [
        MembraneObject(
            position=scaled(o.position),
            surface_area=o.surface_area,
            mass_per_length=o.mass_per_length,
            damping=o.damping,
            natural_frequency=o.natural_frequency,
            flexural_modulus=o.flexural_modulus,
            static_reflectivity=o.static_reflectivity,
            static_shift_gain=o.static_shift_gain,
            static_interference_ratio=o.static_interference_ratio,
            name=o.name,
        )
        for o in scene.objects
    ]
    speakers = [
        Speaker(scaled(s.position), s.waveform, list(s.active_intervals), s.label)
        for s in scene.speakers
    ]
    return Scene(speakers=speakers, objects=objects,
                 radar_position=origin, duration=scene.duration)
