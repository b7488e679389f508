"""End-to-end experiment runner: simulate -> detect -> calibrate -> amplify
-> cluster -> enhance -> evaluate, plus sweeps over scene axes.

Each stage writes its artifacts into the experiment output directory; a
manifest listing every produced file is written last. One master seed is
split into per-stage substreams (fixed order: synthesis, clustering,
reserved, sweep) so stages can be re-run in isolation.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import amplify, cluster, enhance, io, metrics, radarcube, scenes, synth, vibext
from .errors import ConfigurationError, ParameterError, StageError

STAGES = ("simulate", "detect", "calibrate", "amplify", "cluster", "enhance", "evaluate")


@dataclass
class ExperimentConfig:
    """Everything a pipeline run needs; mirrors the CLI flags."""

    scene_path: str | None = None
    scene_generator: dict | None = None
    radar: synth.RadarConfig | None = None
    m_targets: int = 3
    gamma: float = 0.1
    over_subtraction_alpha: float = 2.0
    spectral_floor_beta: float = 0.01
    noise_frames: int = 20
    envelope_dim: int = 64
    n_max: int = 5
    sad_band: tuple[float, float] = (50.0, 1000.0)
    amp_band: tuple[float, float] = (50.0, 1000.0)
    stft_window: int = 256
    stft_hop: int = 64
    n_angle_bins: int = 64
    mask_mode: str = "oracle"
    seed: int = 0
    output_dir: str = "out"
    write_plots: bool = True
    save_cube: bool = False
    # sweep axes
    distances_m: list[float] | None = None
    speaker_counts: list[int] | None = None
    arrangements: list[str] | None = None
    object_counts: list[int] | None = None
    seeds_per_cell: int = 1

    def validate(self):
        if self.m_targets < 1:
            raise ParameterError("m_targets must be >= 1")
        if self.gamma < 0:
            raise ParameterError("gamma must be >= 0")
        if self.over_subtraction_alpha < 1.0:
            raise ParameterError("over_subtraction_alpha must be >= 1")
        if not (0.0 < self.spectral_floor_beta < 1.0):
            raise ParameterError("spectral_floor_beta must lie in (0, 1)")
        if self.noise_frames < 1:
            raise ParameterError("noise_frames must be >= 1")
        if self.envelope_dim < 2:
            raise ParameterError("envelope_dim must be >= 2")
        if self.n_max < 2:
            raise ParameterError("n_max must be >= 2")
        if self.mask_mode not in ("oracle", "spectral-gate"):
            raise ParameterError(f"unknown mask mode {self.mask_mode!r}")
        for band in (self.sad_band, self.amp_band):
            if not (0 < band[0] < band[1]):
                raise ParameterError(f"invalid band {band}")
        if self.scene_path is None and self.scene_generator is None:
            raise ParameterError("either scene_path or scene_generator is required")
        if self.scene_path is not None and not Path(self.scene_path).exists():
            raise ParameterError(f"scene file not found: {self.scene_path}")

    def fingerprint(self) -> str:
        payload = asdict(self)
        payload["radar"] = None if self.radar is None else scenes.radar_config_to_dict(self.radar)
        payload.pop("output_dir")
        payload.pop("write_plots")
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _resolve_scene(config: ExperimentConfig) -> tuple[synth.Scene, synth.RadarConfig]:
    radar = config.radar
    if config.scene_path is not None:
        with open(config.scene_path) as fh:
            import yaml

            data = yaml.safe_load(fh)
        scene = scenes.scene_from_dict(data)
        if radar is None and isinstance(data, dict) and "radar" in data:
            radar = scenes.radar_config_from_dict(data["radar"])
    else:
        gen = dict(config.scene_generator)
        name = gen.pop("name", "meeting")
        if name == "meeting":
            scene = scenes.meeting_scene(**gen)
        elif name == "tone":
            scene = scenes.tone_scene(**gen)
        else:
            raise ConfigurationError(f"unknown scene generator {name!r}")
    if radar is None:
        radar = scenes.desk_radar_config()
    return scene, radar


@dataclass
class PipelineResult:
    report: metrics.EvaluationReport | None
    ground_truth: synth.GroundTruth | None
    targets: list = field(default_factory=list)
    target_object_indices: list[int] = field(default_factory=list)
    iq_series: list = field(default_factory=list)
    phases: list = field(default_factory=list)
    band_signals: list = field(default_factory=list)
    stfts: list = field(default_factory=list)
    subtracted: list = field(default_factory=list)
    powers: list = field(default_factory=list)
    noise_profiles: list = field(default_factory=list)
    segments_canonical: list = field(default_factory=list)
    features: np.ndarray | None = None
    cluster_result: cluster.ClusterResult | None = None
    n_speakers_estimated: int = 0
    enhanced: np.ndarray | None = None
    enhanced_stft: amplify.STFTMatrix | None = None
    vibstrong: np.ndarray | None = None
    artifacts: list[str] = field(default_factory=list)
    output_dir: Path | None = None
    cube: synth.RadarCube | None = None

    segment_labels_true: list = field(default_factory=list)


def _stage(stage_name, target_id=None):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(stage_name, target_id, exc) from exc
            return False

    return _Ctx()


def _segment_frames(seg_start: int, seg_end: int, window: int, hop: int,
                    n_frames: int) -> tuple[int, int]:
    """STFT frame rows whose centers fall inside [seg_start, seg_end)."""
    centers = np.arange(n_frames) * hop + window / 2.0
    inside = np.flatnonzero((centers >= seg_start) & (centers < seg_end))
    if inside.size == 0:
        # fall back to the frame nearest the segment midpoint
        mid = 0.5 * (seg_start + seg_end)
        idx = int(np.argmin(np.abs(centers - mid)))
        return idx, idx + 1
    return int(inside[0]), int(inside[-1]) + 1


def _match_targets_to_objects(targets, gt: synth.GroundTruth) -> list[int]:
    indices = []
    for t in targets:
        indices.append(int(np.argmin(np.abs(gt.range_bins - t.range_bin))))
    return indices


def run_pipeline(config: ExperimentConfig, stop_after: str | None = None,
                 keep_cube: bool = False) -> PipelineResult:
    """Execute the chain and write per-stage artifacts. `stop_after` names a
    stage to halt at (artifacts up to that stage are still written)."""
    config.validate()
    if stop_after is not None and stop_after not in STAGES:
        raise ParameterError(f"unknown stage {stop_after!r}")

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []

    def _save(name: str):
        artifacts.append(name)
        return outdir / name

    master = np.random.SeedSequence(config.seed)
    seed_synth, seed_cluster, _seed_masks, _seed_sweep = master.spawn(4)

    result = PipelineResult(report=None, ground_truth=None, output_dir=outdir)

    # ---- simulate ---------------------------------------------------------
    with _stage("simulate"):
        scene, radar = _resolve_scene(config)
        # synthesis consumes an integer seed derived from the substream
        synth_seed = int(seed_synth.generate_state(1)[0])
        cube, gt = synth.synthesize_radar_cube(
            scene, radar, synth_seed,
            stft_window=config.stft_window, stft_hop=config.stft_hop,
        )
        result.ground_truth = gt
        if keep_cube or config.save_cube:
            result.cube = cube
        io.write_csv_rows(
            _save("ground_truth_segments.csv"),
            ["start_s", "end_s", "label"],
            gt.segments,
        )
        io.write_flat_binary(_save("ground_truth_displacement.bin"), gt.displacement)
        if config.save_cube:
            io.write_flat_binary(_save("radar_cube.bin"), cube.samples)
    if stop_after == "simulate":
        _write_manifest(outdir, artifacts)
        result.artifacts = artifacts
        return result

    # ---- detect -----------------------------------------------------------
    with _stage("detect"):
        spectrum = radarcube.range_fft(cube)
        ra_map = radarcube.range_angle_map(spectrum, radar, config.n_angle_bins)
        targets = radarcube.select_targets(ra_map, spectrum, config.m_targets)
        result.targets = targets
        result.target_object_indices = _match_targets_to_objects(targets, gt)
        result.iq_series = [
            radarcube.extract_target_iq(spectrum, t, radar, config.n_angle_bins)
            for t in targets
        ]
        io.write_csv_matrix(
            _save("range_angle_map.csv"), ra_map.magnitude,
            header=[f"angle_bin_{i}" for i in range(ra_map.n_angle_bins)],
        )
        io.write_csv_rows(
            _save("targets.csv"),
            ["rank", "range_bin", "angle_bin", "range_m", "azimuth_deg",
             "kurtosis", "magnitude"],
            [
                (i, t.range_bin, t.angle_bin, t.range_m, t.azimuth_deg,
                 t.kurtosis, t.magnitude)
                for i, t in enumerate(targets)
            ],
        )
        del spectrum
    if not keep_cube and not config.save_cube:
        del cube
    if stop_after == "detect":
        _write_manifest(outdir, artifacts)
        result.artifacts = artifacts
        return result

    # ---- calibrate --------------------------------------------------------
    # per-target detection (thresholds are per object), then one canonical
    # segment set: the merged union across targets, so a speaker weak at one
    # object is still segmented by the object that hears them
    circle_rows = []
    per_target_segments = []
    for i, iq in enumerate(result.iq_series):
        with _stage("calibrate", target_id=i):
            per_target_segments.append(
                vibext.detect_speech_segments(iq, band=config.sad_band))
    union = _union_segments(per_target_segments, len(result.iq_series[0]))
    result.segments_canonical = list(union.intervals)
    for i, iq in enumerate(result.iq_series):
        with _stage("calibrate", target_id=i):
            phase = vibext.speech_aware_calibrate(
                iq, union, gamma=config.gamma, target_id=i, fallback=True,
                stitch=True)
            result.phases.append(phase)
            if phase.silence_fit is not None:
                f = phase.silence_fit
                circle_rows.append((i, "silence", f.center.real, f.center.imag,
                                    f.radius, f.residual, int(phase.fallback_used)))
            for k, f in enumerate(phase.segment_fits):
                circle_rows.append((i, f"speech_{k}", f.center.real, f.center.imag,
                                    f.radius, f.residual, 0))
    io.write_csv_rows(
        _save("circle_fits.csv"),
        ["target", "region", "center_re", "center_im", "radius", "residual",
         "fallback"],
        circle_rows,
    )
    if stop_after == "calibrate":
        _write_manifest(outdir, artifacts)
        result.artifacts = artifacts
        return result

    # ---- amplify ----------------------------------------------------------
    for i, phase in enumerate(result.phases):
        with _stage("amplify", target_id=i):
            band = amplify.bandpass_filter(
                phase.values, config.amp_band[0], config.amp_band[1],
                phase.frame_rate)
            y = amplify.stft(band, phase.frame_rate, config.stft_window,
                             config.stft_hop)
            first_speech = (phase.segments.intervals[0][0]
                            if phase.segments.intervals else len(phase.values))
            n_lead = min(config.noise_frames,
                         _leading_frames(first_speech, config.stft_window,
                                         config.stft_hop, y.n_frames))
            profile = amplify.noise_profile(y, n_lead)
            sub = amplify.spectral_subtract(
                y, profile, config.over_subtraction_alpha,
                config.spectral_floor_beta)
            power = amplify.auto_power_spectrum(sub)
            result.band_signals.append(band)
            result.stfts.append(y)
            result.subtracted.append(sub)
            result.powers.append(power)
            result.noise_profiles.append(profile)
    with _stage("amplify"):
        io.write_csv_matrix(_save("power_spectrogram_ref.csv"),
                            result.powers[0].values)
        io.write_flat_binary(_save("power_spectrogram_ref.bin"),
                             result.powers[0].values)
        if config.write_plots:
            for i in range(len(result.phases)):
                raw = amplify.stft(result.phases[i].values,
                                   result.phases[i].frame_rate,
                                   config.stft_window, config.stft_hop)
                io.write_stage_panel_png(
                    _save(f"stages_target{i}.png"),
                    {
                        "original": np.abs(raw.values),
                        "speech reservation": np.abs(result.stfts[i].values),
                        "self-noise attenuation": np.abs(result.subtracted[i].values),
                        "residual suppression": np.sqrt(result.powers[i].values),
                    },
                )
    if stop_after == "amplify":
        _write_manifest(outdir, artifacts)
        result.artifacts = artifacts
        return result

    # ---- cluster ----------------------------------------------------------
    with _stage("cluster"):
        envelopes_by_segment: list[list[cluster.EnvelopeVector]] = []
        for seg_id, (s, e) in enumerate(result.segments_canonical):
            row = []
            for obj_id, power in enumerate(result.powers):
                f0, f1 = _segment_frames(s, e, config.stft_window,
                                         config.stft_hop, power.values.shape[0])
                row.append(cluster.spectral_envelope(
                    power.values[f0:f1], config.envelope_dim, obj_id, seg_id))
            envelopes_by_segment.append(row)
        features = cluster.build_feature_matrix(envelopes_by_segment)
        result.features = features

        n_seg = features.shape[0]
        n_max_eff = min(config.n_max, n_seg - 1)
        if n_max_eff >= 2:
            n_est, ch_scores = cluster.estimate_num_speakers(
                features, n_max_eff, seed_cluster, return_scores=True)
        else:
            n_est, ch_scores = 1, {}
        result.n_speakers_estimated = n_est
        fit = cluster.gmm_cluster(features, n_est, seed_cluster.spawn(1)[0])
        fit.ch_scores = ch_scores
        result.cluster_result = fit
        io.write_csv_rows(
            _save("cluster_report.csv"),
            ["segment", "start_frame", "end_frame", "label"]
            + [f"resp_{k}" for k in range(n_est)],
            [
                (i, s, e, int(fit.labels[i]), *fit.responsibilities[i])
                for i, (s, e) in enumerate(result.segments_canonical)
            ],
        )
        io.write_csv_rows(
            _save("ch_curve.csv"), ["n_candidates", "ch_index"],
            sorted(ch_scores.items()),
        )
    if stop_after == "cluster":
        _write_manifest(outdir, artifacts)
        result.artifacts = artifacts
        return result

    # ---- enhance ----------------------------------------------------------
    with _stage("enhance"):
        stack = np.stack([m.values for m in result.stfts])
        if config.mask_mode == "oracle":
            speech_masks, noise_masks = enhance.estimate_masks(
                stack, "oracle", ground_truth=gt,
                object_indices=result.target_object_indices)
        else:
            speech_masks, noise_masks = enhance.estimate_masks(
                stack, "spectral-gate", noise_profiles=result.noise_profiles,
                over_subtraction=config.over_subtraction_alpha)
        speech_combined = enhance.median_combine_masks(speech_masks)
        noise_combined = enhance.median_combine_masks(noise_masks)
        phi_s = enhance.spatial_covariance(stack, speech_combined)
        phi_n = enhance.spatial_covariance(stack, noise_combined)
        ref = result.stfts[0]
        out_stft = enhance.mvdr_beamform(
            stack, phi_s, phi_n, reference=0,
            window_size=ref.window_size, hop=ref.hop, sample_rate=ref.sample_rate)
        enhanced = amplify.istft(out_stft)
        result.enhanced_stft = out_stft
        result.enhanced = enhanced
        result.vibstrong = result.band_signals[0]
        io.write_pcm16(_save("enhanced.pcm"), enhanced, ref.sample_rate)
        artifacts.append("enhanced.pcm.txt")
        io.write_csv_matrix(_save("enhanced_spectrogram.csv"),
                            np.abs(out_stft.values))
        if config.write_plots:
            io.write_heatmap_png(_save("enhanced_spectrogram.png"),
                                 np.abs(out_stft.values) ** 2,
                                 title="enhanced")
    if stop_after == "enhance":
        _write_manifest(outdir, artifacts)
        result.artifacts = artifacts
        return result

    # ---- evaluate ---------------------------------------------------------
    with _stage("evaluate"):
        frame_rate = result.phases[0].frame_rate
        true_labels = _true_segment_labels(
            result.segments_canonical, gt.segments, frame_rate)
        result.segment_labels_true = true_labels
        known = [i for i, lab in enumerate(true_labels) if lab is not None]
        if known and result.cluster_result is not None:
            pred = [int(result.cluster_result.labels[i]) for i in known]
            truth = [true_labels[i] for i in known]
            success = metrics.success_rate(pred, truth)
        else:
            success = float("nan")

        ref_obj = result.target_object_indices[0]
        clean_ref = amplify.bandpass_filter(
            gt.clean_phase[ref_obj], config.amp_band[0], config.amp_band[1],
            frame_rate)
        n = min(result.enhanced.size, clean_ref.size)
        snr_fused = metrics.snr_db(result.enhanced[:n], clean_ref[:n], frame_rate)
        nv = min(result.vibstrong.size, clean_ref.size)
        snr_vib = metrics.snr_db(result.vibstrong[:nv], clean_ref[:nv], frame_rate)

        clean_spec = amplify.stft(clean_ref, frame_rate, config.stft_window,
                                  config.stft_hop)
        rows = min(clean_spec.n_frames, result.enhanced_stft.n_frames)
        psnr_fused = metrics.psnr_db(
            np.abs(result.enhanced_stft.values[:rows]),
            np.abs(clean_spec.values[:rows]))
        psnr_vib = metrics.psnr_db(
            np.abs(result.stfts[0].values[:rows]),
            np.abs(clean_spec.values[:rows]))

        n_true = len({lab for *_rest, lab in gt.segments})
        report = metrics.EvaluationReport(
            success_rate=success,
            snr_db=snr_fused,
            psnr_db=psnr_fused,
            baseline_snr_db=snr_vib,
            baseline_psnr_db=psnr_vib,
            n_speakers_true=n_true,
            n_speakers_estimated=result.n_speakers_estimated,
            assignments=[
                (i, int(result.cluster_result.labels[i]),
                 -1 if true_labels[i] is None else true_labels[i])
                for i in range(len(result.segments_canonical))
            ] if result.cluster_result is not None else [],
            config_fingerprint=config.fingerprint(),
            seed=config.seed,
        )
        result.report = report
        io.write_csv_rows(
            _save("metrics.csv"),
            ["success_rate", "snr_db", "psnr_db", "baseline_snr_db",
             "baseline_psnr_db", "n_speakers_true", "n_speakers_estimated",
             "fingerprint", "seed"],
            [(report.success_rate, report.snr_db, report.psnr_db,
              report.baseline_snr_db, report.baseline_psnr_db,
              report.n_speakers_true, report.n_speakers_estimated,
              report.config_fingerprint, report.seed)],
        )

    _write_manifest(outdir, artifacts)
    result.artifacts = artifacts
    return result


def _leading_frames(first_speech_sample: int, window: int, hop: int,
                    n_frames: int) -> int:
    """Count of STFT frames lying fully before the first speech sample."""
    n = (first_speech_sample - window) // hop + 1
    return int(max(1, min(n, n_frames)))


def _union_segments(per_target: list[vibext.SpeechSegments], n_frames: int,
                    merge_gap_s: float = vibext.SAD_MERGE_GAP_S,
                    frame_rate: float | None = None) -> vibext.SpeechSegments:
    """Merged union of detected intervals across targets."""
    ivals = sorted(
        iv for segs in per_target for iv in segs.intervals
    )
    merged: list[tuple[int, int]] = []
    for s, e in ivals:
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return vibext.SpeechSegments(merged, 0.0, n_frames=n_frames)


def _true_segment_labels(detected, gt_segments, frame_rate):
    """Max-overlap match of detected [start, end) sample intervals to labeled
    ground-truth segments; returns speaker index (into sorted label set) or None."""
    labels = sorted({lab for *_rest, lab in gt_segments})
    lab_to_idx = {lab: i for i, lab in enumerate(labels)}
    out = []
    for s, e in detected:
        s_t, e_t = s / frame_rate, e / frame_rate
        best, best_overlap = None, 0.0
        for gs, ge, lab in gt_segments:
            overlap = min(e_t, ge) - max(s_t, gs)
            if overlap > best_overlap:
                best, best_overlap = lab, overlap
        out.append(None if best is None else lab_to_idx[best])
    return out


def _write_manifest(outdir: Path, artifacts: list[str]):
    entries = []
    for name in artifacts:
        p = outdir / name
        entries.append({"file": name, "bytes": p.stat().st_size if p.exists() else 0})
    manifest = outdir / "manifest.json"
    manifest.write_text(json.dumps({"files": entries}, indent=1))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _sweep_axes(config: ExperimentConfig) -> dict[str, list]:
    axes = {}
    if config.distances_m is not None:
        axes["distance_m"] = list(config.distances_m)
    if config.speaker_counts is not None:
        axes["speakers"] = list(config.speaker_counts)
    if config.arrangements is not None:
        axes["arrangement"] = list(config.arrangements)
    if config.object_counts is not None:
        axes["objects"] = list(config.object_counts)
    return axes


def _cell_id(named: dict) -> str:
    parts = []
    for key, value in named.items():
        parts.append(f"{key}={value}")
    return "_".join(parts).replace(" ", "")


def _base_mean_distance(config: ExperimentConfig) -> float:
    scene, _ = _resolve_scene(config)
    ranges = [float(np.linalg.norm(o.position - scene.radar_position))
              for o in scene.objects]
    return float(np.mean(ranges))


def run_sweep(config: ExperimentConfig) -> Path:
    """Cartesian sweep over the configured axes; one row per (cell, seed).

    Cells are resumable: a finished cell leaves DONE and row.json in its
    directory and is skipped on re-run. Failed cells record an error row and
    the sweep continues. Returns the aggregate CSV path.
    """
    config.validate()
    axes = _sweep_axes(config)
    if not axes:
        raise ParameterError("sweep requires at least one non-empty axis")
    for name, values in axes.items():
        if not values:
            raise ParameterError(f"sweep axis {name!r} is empty")
    needs_generator = any(k in axes for k in ("speakers", "arrangement", "objects"))
    if needs_generator and config.scene_generator is None:
        raise ParameterError(
            "speaker/arrangement/object axes need a generator-based scene")

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    base_mean = _base_mean_distance(config) if "distance_m" in axes else None

    keys = list(axes.keys())
    rows = []
    header = keys + ["seed", "success_rate", "snr_db", "psnr_db",
                     "baseline_snr_db", "baseline_psnr_db", "error"]
    for cell_index, combo in enumerate(itertools.product(*axes.values())):
        named = dict(zip(keys, combo))
        for rep in range(config.seeds_per_cell):
            cell_seed = int(
                np.random.SeedSequence((config.seed, cell_index, rep))
                .generate_state(1)[0]
            )
            cid = _cell_id(named) + f"_seed{rep}"
            cell_dir = outdir / "cells" / cid
            done = cell_dir / "DONE"
            row_file = cell_dir / "row.json"
            if done.exists() and row_file.exists():
                rows.append(json.loads(row_file.read_text()))
                continue
            cell_dir.mkdir(parents=True, exist_ok=True)
            cell_cfg = _cell_config(config, named, cell_seed, cell_dir, base_mean)
            row = {k: named[k] for k in keys}
            row["seed"] = rep
            try:
                result = run_pipeline(cell_cfg)
                rep_data = result.report
                row.update(
                    success_rate=rep_data.success_rate,
                    snr_db=rep_data.snr_db,
                    psnr_db=rep_data.psnr_db,
                    baseline_snr_db=rep_data.baseline_snr_db,
                    baseline_psnr_db=rep_data.baseline_psnr_db,
                    error="",
                )
                row_file.write_text(json.dumps(row))
                done.write_text("ok\n")
            except (StageError, ParameterError, ConfigurationError) as exc:
                row.update(success_rate=float("nan"), snr_db=float("nan"),
                           psnr_db=float("nan"), baseline_snr_db=float("nan"),
                           baseline_psnr_db=float("nan"), error=str(exc))
            rows.append(row)

    aggregate = outdir / "sweep.csv"
    io.write_csv_rows(aggregate, header,
                      [[row.get(h, "") for h in header] for row in rows])
    return aggregate


def _cell_config(config: ExperimentConfig, named: dict, cell_seed: int,
                 cell_dir: Path, base_mean: float | None) -> ExperimentConfig:
    from dataclasses import replace

    cfg = replace(config, distances_m=None, speaker_counts=None,
                  arrangements=None, object_counts=None,
                  output_dir=str(cell_dir), seed=cell_seed,
                  write_plots=False)
    if config.scene_generator is not None:
        gen = dict(config.scene_generator)
        if "speakers" in named:
            gen["n_speakers"] = int(named["speakers"])
        if "arrangement" in named:
            gen["arrangement"] = str(named["arrangement"])
        if "objects" in named:
            gen["n_objects"] = int(named["objects"])
            cfg = replace(cfg, m_targets=int(named["objects"]))
        if "distance_m" in named and base_mean:
            gen["distance_scale"] = float(named["distance_m"]) / base_mean
        gen["seed"] = cell_seed
        cfg = replace(cfg, scene_generator=gen)
    return cfg
