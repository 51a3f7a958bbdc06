"""Pipeline command line: gen -> segment -> features -> cluster -> train ->
quantize -> hwsim -> personalize, plus `pipeline` to run the lot.

Stages communicate through files under --out-dir. Self-describing JSON
artifacts embed the SHA-256 of the effective configuration; fixed-schema
files (trip CSVs, the segment manifest, feature tables) carry it in a
`.meta.json` sidecar instead. Every stage checks its inputs' hash and
refuses to mix artifacts from different configurations. Nothing written
contains a timestamp, so reruns with the same seed are byte-identical.

Exit codes: 0 success, 2 validation / input errors, 3 numeric errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import anfis, clustering, hw as hwmod, personalization as pers, segmentation as seg
from .config import PipelineConfig, config_hash, config_to_dict, load_config, with_overrides
from .errors import HeadwayError, NumericError, ValidationError
from .features import (
    FeatureVector,
    apply_scaler,
    featurize,
    fit_scaler,
    read_feature_table,
    scaler_from_dict,
    scaler_to_dict,
    write_feature_table,
)
from .trips import DriverArchetype, Trip, generate_trip, load_trip, write_trip

LABELED_HEADER = [
    "trip_id",
    "segment_idx",
    "driver_id",
    "thw_rms",
    "teth",
    "tith",
    "duration_s",
    "style",
]

_SWEEP_STREAM = 7  # rng sub-stream for the hwsim input sweep

HW_ACCURACY_BOUND = 2.0**-6


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path: Path, producer: str) -> dict:
    if not path.exists():
        raise ValidationError(f"{path} is missing — run `headway {producer}` first")
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{path} is not valid JSON ({exc}); rerun `headway {producer}`"
            ) from exc


def _check_hash(doc: dict, expect: str, path: Path, producer: str) -> None:
    found = doc.get("config_hash")
    if found != expect:
        raise ValidationError(
            f"{path} was produced by a different configuration "
            f"(hash {found!r} != {expect!r}); rerun `headway {producer}`"
        )


def _sanitize(values) -> list:
    return [float(v) if np.isfinite(v) else None for v in values]


def cmd_gen(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out_dir)
    trips_dir = out / "trips"
    trips_dir.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)

    entries = []
    for ai, spec in enumerate(cfg.cohort.archetypes):
        for d in range(1, cfg.cohort.drivers_per_archetype + 1):
            driver_id = f"{spec.name}-{d}"
            for t in range(1, cfg.cohort.trips_per_driver + 1):
                profile_seed = (ai * 1000 + d) * 1000 + t
                arch = DriverArchetype(
                    target_thw=spec.target_thw,
                    thw_jitter_sd=spec.thw_jitter_sd,
                    speed_profile_seed=profile_seed,
                    gain=spec.gain,
                    moods=spec.moods,
                )
                trip_id = f"{driver_id}-t{t}"
                trip = generate_trip(
                    arch,
                    duration=cfg.cohort.trip_duration_s,
                    seed=cfg.seed,
                    trip_id=trip_id,
                    driver_id=driver_id,
                    sample_period=cfg.sample_period,
                )
                write_trip(trip, trips_dir / f"{trip_id}.csv")
                entries.append(
                    {
                        "file": f"trips/{trip_id}.csv",
                        "trip_id": trip_id,
                        "driver_id": driver_id,
                        "archetype": spec.name,
                    }
                )
    _write_json(
        out / "trips.meta.json",
        {"config_hash": chash, "seed": cfg.seed, "trips": entries},
    )
    return {"n_trips": len(entries)}


def _load_cohort(cfg: PipelineConfig) -> tuple[list[Trip], dict]:
    out = Path(cfg.out_dir)
    meta = _read_json(out / "trips.meta.json", producer="gen")
    _check_hash(meta, config_hash(cfg), out / "trips.meta.json", producer="gen")
    trips = []
    for entry in meta["trips"]:
        path = out / entry["file"]
        if not path.exists():
            raise ValidationError(f"{path} is missing — run `headway gen` first")
        trips.append(load_trip(path, trip_id=entry["trip_id"], driver_id=entry["driver_id"]))
    return trips, meta


def cmd_segment(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out_dir)
    trips, _ = _load_cohort(cfg)
    segments = []
    for trip in trips:
        segments.extend(seg.segment_trip(trip, cfg.premises, cfg.thw_rms_max))
    if not segments:
        raise ValidationError("no steady car-following segments found in the cohort")
    seg.write_manifest(segments, out / "segments.json")
    durations = np.array([s.duration for s in segments])
    meta = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "n_segments": len(segments),
        "duration_mean_s": float(durations.mean()),
        "duration_sd_s": float(durations.std()),
    }
    _write_json(out / "segments.meta.json", meta)
    return meta


def _load_segments(cfg: PipelineConfig) -> list[seg.CarFollowingSegment]:
    out = Path(cfg.out_dir)
    meta = _read_json(out / "segments.meta.json", producer="segment")
    _check_hash(meta, config_hash(cfg), out / "segments.meta.json", producer="segment")
    if not (out / "segments.json").exists():
        raise ValidationError(f"{out / 'segments.json'} is missing — run `headway segment` first")
    manifest = seg.read_manifest(out / "segments.json")
    trips, _ = _load_cohort(cfg)
    by_id = {t.trip_id: t for t in trips}
    segments = []
    for entry in manifest:
        trip = by_id.get(entry["trip_id"])
        if trip is None:
            raise ValidationError(
                f"segment manifest references unknown trip {entry['trip_id']!r}; "
                "rerun `headway segment`"
            )
        segments.append(seg.segment_from_manifest_entry(trip, entry, cfg.premises))
    return segments


def cmd_features(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out_dir)
    segments = _load_segments(cfg)
    rows = []
    drivers = []
    counter: dict[str, int] = {}
    for s in segments:
        idx = counter.get(s.trip_id, 0)
        counter[s.trip_id] = idx + 1
        rows.append((s.trip_id, idx, featurize(s, cfg.safety)))
        drivers.append(s.driver_id)
    write_feature_table(rows, out / "features.csv")
    scaler = fit_scaler([v for _, _, v in rows])
    _write_json(out / "scaler.json", scaler_to_dict(scaler))
    _write_json(
        out / "features.meta.json",
        {
            "config_hash": config_hash(cfg),
            "seed": cfg.seed,
            "n_rows": len(rows),
            "scaler_ref": "scaler.json",
            "driver_ids": drivers,
        },
    )
    return {"n_rows": len(rows)}


def _load_features(cfg: PipelineConfig):
    out = Path(cfg.out_dir)
    meta = _read_json(out / "features.meta.json", producer="features")
    _check_hash(meta, config_hash(cfg), out / "features.meta.json", producer="features")
    if not (out / "features.csv").exists():
        raise ValidationError(f"{out / 'features.csv'} is missing — run `headway features` first")
    rows = read_feature_table(out / "features.csv")
    scaler = scaler_from_dict(_read_json(out / "scaler.json", producer="features"))
    drivers = list(meta.get("driver_ids", []))
    if len(drivers) != len(rows):
        raise ValidationError("features.meta.json is inconsistent; rerun `headway features`")
    return rows, drivers, scaler


def _write_labeled(path: Path, rows, drivers, labels) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LABELED_HEADER)
        for (trip_id, idx, v), driver, label in zip(rows, drivers, labels):
            writer.writerow(
                [
                    trip_id,
                    idx,
                    driver,
                    repr(v.thw_rms),
                    repr(v.teth),
                    repr(v.tith),
                    repr(v.duration),
                    int(label) + 1,
                ]
            )


def _read_labeled(path: Path):
    if not path.exists():
        raise ValidationError(f"{path} is missing — run `headway cluster` first")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LABELED_HEADER:
            raise ValidationError(f"{path}: unexpected header; rerun `headway cluster`")
        for rec in reader:
            rows.append(
                (
                    rec[0],
                    int(rec[1]),
                    rec[2],
                    FeatureVector(
                        thw_rms=float(rec[3]),
                        teth=float(rec[4]),
                        tith=float(rec[5]),
                        duration=float(rec[6]),
                    ),
                    int(rec[7]) - 1,
                )
            )
    return rows


def cmd_cluster(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out_dir)
    rows, drivers, scaler = _load_features(cfg)
    vectors = [v for _, _, v in rows]
    xn = apply_scaler(scaler, np.array([v.as_array() for v in vectors]))
    model = clustering.kmeans_fit(xn, cfg.kmeans)
    labels = clustering.assign(xn, model)
    chash = config_hash(cfg)

    clustering.save_model(
        model,
        out / "cluster.json",
        scaler_ref="scaler.json",
        extra={"config_hash": chash, "seed": cfg.seed},
    )
    _write_labeled(out / "features_labeled.csv", rows, drivers, labels)
    _write_json(
        out / "features_labeled.meta.json",
        {"config_hash": chash, "seed": cfg.seed, "n_rows": len(rows)},
    )

    stats = pers.compute_cluster_stats(vectors, labels, scaler, cfg.kmeans.n_clusters)
    planes = [pers.fit_plane(s, cfg.floor_s) for s in stats]
    pers.save_planes(
        planes,
        out / "planes.json",
        extra={"config_hash": chash, "seed": cfg.seed, "tith_axis": "scaler-normalized"},
    )
    sizes = [int(np.sum(labels == k)) for k in range(cfg.kmeans.n_clusters)]
    return {"sizes": sizes, "inertia": model.inertia}


def cmd_train(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out_dir)
    meta = _read_json(out / "features_labeled.meta.json", producer="cluster")
    _check_hash(meta, config_hash(cfg), out / "features_labeled.meta.json", producer="cluster")
    labeled = _read_labeled(out / "features_labeled.csv")
    scaler = scaler_from_dict(_read_json(out / "scaler.json", producer="features"))

    raw = np.array([v.as_array() for _, _, _, v, _ in labeled])
    labels = np.array([lab for _, _, _, _, lab in labeled], dtype=int)
    xn = apply_scaler(scaler, raw)

    train_idx, test_idx = anfis.stratified_split(labels, cfg.train.train_fraction, cfg.train.split_seed)
    bank, histories = anfis.train_bank(xn[train_idx], labels[train_idx], cfg.train, scaler)
    cm = anfis.evaluate(bank, xn[test_idx], labels[test_idx])

    chash = config_hash(cfg)
    anfis.save_bank(bank, out / "bank.json", extra={"config_hash": chash, "seed": cfg.seed})
    cm.to_csv(out / "confusion.csv")
    report = {
        "config_hash": chash,
        "seed": cfg.seed,
        "n_train": int(len(train_idx)),
        "n_test": int(len(test_idx)),
        "confusion": [[int(v) for v in row] for row in cm.matrix],
        "overall_accuracy": cm.accuracy,
        "per_class_recall": _sanitize(cm.per_class_recall()),
        "per_class_precision": _sanitize(cm.per_class_precision()),
        "final_train_rmse": [h[-1] for h in histories],
    }
    _write_json(out / "accuracy.json", report)
    return report


def cmd_quantize(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out_dir)
    bank_doc = _read_json(out / "bank.json", producer="train")
    _check_hash(bank_doc, config_hash(cfg), out / "bank.json", producer="train")
    bank = anfis.load_bank(out / "bank.json")

    grid = np.arange(hwmod.LUT_SIZE) / hwmod.LUT_SIZE
    per_style = []
    for k, model in enumerate(bank.models, start=1):
        engine = hwmod.quantize_model(model)
        hwmod.save_hw(engine, out / f"hw_style{k}.bin")
        worst = 0.0
        for i in range(anfis.N_INPUTS):
            for m in range(anfis.N_MFS):
                mu = anfis.mf_eval(model.mf(i, m), grid)
                err = np.abs(engine.luts[i][m].codes / engine.formats.lut.scale - mu)
                worst = max(worst, float(err.max()))
        per_style.append({"style": k, "file": f"hw_style{k}.bin", "max_abs_lut_error": worst})
    report = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "engines": per_style,
        "lut_error_bound": 2.0**-17 + 2.0**-17,
    }
    _write_json(out / "quantize_report.json", report)
    return report


def _load_hw_bank(cfg: PipelineConfig):
    out = Path(cfg.out_dir)
    engines = []
    for k in range(1, 4):
        path = out / f"hw_style{k}.bin"
        if not path.exists():
            raise ValidationError(f"{path} is missing — run `headway quantize` first")
        engines.append(hwmod.load_hw(path))
    return engines


def cmd_hwsim(cfg: PipelineConfig, args) -> dict:
    out = Path(cfg.out_dir)
    bank_doc = _read_json(out / "bank.json", producer="train")
    _check_hash(bank_doc, config_hash(cfg), out / "bank.json", producer="train")
    bank = anfis.load_bank(out / "bank.json")
    engines = _load_hw_bank(cfg)

    if args.x is not None:
        try:
            x = [float(v) for v in args.x.split(",")]
        except ValueError as exc:
            raise ValidationError(f"--x must be three comma-separated floats: {exc}") from exc
        if len(x) != 3:
            raise ValidationError("--x must have exactly three components")
        codes = hwmod.quantize_inputs(x)
        style, outputs, report = hwmod.bank_infer(engines, codes)
        print(f"input codes: {list(codes)}")
        for k, y in enumerate(outputs, start=1):
            print(f"style {k}: y = {y:.6f}")
        print(f"identified style: {style + 1}   cycles: {report.total}")
        if args.trace is not None:
            target = style if args.trace_style is None else args.trace_style - 1
            if not 0 <= target < len(engines):
                raise ValidationError("--trace-style must be 1, 2 or 3")
            trace = hwmod.run_control_sequence(engines[target], codes)
            hwmod.write_trace(trace, Path(args.trace))
            print(f"trace for style {target + 1} written to {args.trace}")
        return {"style": style + 1, "outputs": list(outputs), "cycles": report.total}

    if args.trace is not None:
        raise ValidationError("--trace needs a single input; pass --x as well")

    n = args.sweep if args.sweep is not None else cfg.hw_sweep
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFF, _SWEEP_STREAM])
    xs = rng.random((n, 3))
    dy_max = 0.0
    dy_sum = 0.0
    agree = 0
    cycles = None
    for x in xs:
        codes = hwmod.quantize_inputs(x)
        xq = np.array(codes) / engines[0].formats.input.scale
        style_hw, outputs_hw, report = hwmod.bank_infer(engines, codes)
        cycles = report.total
        ys_float = np.array([anfis.infer(m, xq) for m in bank.models])
        dy = np.abs(np.array(outputs_hw) - ys_float)
        dy_max = max(dy_max, float(dy.max()))
        dy_sum += float(dy.sum())
        if style_hw == int(np.argmax(ys_float)):
            agree += 1
    result = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "n_inputs": int(n),
        "max_abs_dy": dy_max,
        "mean_abs_dy": dy_sum / (3 * n),
        "argmax_agreement": agree / n,
        "cycles_total": cycles,
    }
    _write_json(out / "hwsim.json", result)
    print(
        f"hwsim: n={n} max|dy|={dy_max:.3e} mean|dy|={result['mean_abs_dy']:.3e} "
        f"agreement={result['argmax_agreement']:.4f} cycles={cycles}"
    )
    if args.compare_float and dy_max > HW_ACCURACY_BOUND:
        raise NumericError(
            f"hardware/float divergence {dy_max:.3e} exceeds {HW_ACCURACY_BOUND:.3e}"
        )
    return result


def cmd_personalize(cfg: PipelineConfig, args) -> dict:
    out = Path(cfg.out_dir)
    chash = config_hash(cfg)
    planes_doc = _read_json(out / "planes.json", producer="cluster")
    _check_hash(planes_doc, chash, out / "planes.json", producer="cluster")
    planes = pers.load_planes(out / "planes.json")
    bank_doc = _read_json(out / "bank.json", producer="train")
    _check_hash(bank_doc, chash, out / "bank.json", producer="train")
    bank = anfis.load_bank(out / "bank.json")
    if bank.scaler is None:
        raise ValidationError("bank.json carries no scaler; rerun `headway train`")
    labeled = _read_labeled(out / "features_labeled.csv")

    window = args.window if getattr(args, "window", None) is not None else cfg.learning_segments
    if window < 1:
        raise ValidationError("--window must be >= 1")

    per_driver: dict[str, list[FeatureVector]] = {}
    order: list[str] = []
    for _, _, driver, v, _ in labeled:
        if driver not in per_driver:
            per_driver[driver] = []
            order.append(driver)
        per_driver[driver].append(v)

    wanted = [args.driver] if getattr(args, "driver", None) else order
    lines = []
    results = []
    for driver in wanted:
        if driver not in per_driver:
            raise ValidationError(
                f"driver {driver!r} has no segments; known drivers: {', '.join(order)}"
            )
        recent = per_driver[driver][-window:]
        obs = pers.learning_window(recent, bank.scaler)
        xbar = np.mean([v.as_array() for v in recent], axis=0)
        style, _ = anfis.classify(bank, apply_scaler(bank.scaler, xbar))
        thw = pers.personalize(planes[style], obs)
        ts = float(sum(v.duration for v in recent))
        line = pers.format_setpoint(thw, style + 1, ts)
        sys.stdout.write(line)
        lines.append(line)
        results.append({"driver": driver, "style": style + 1, "thw_s": thw, "ts": ts})

    with open(out / "setpoints.txt", "w") as fh:
        fh.writelines(lines)
    _write_json(
        out / "setpoints.meta.json",
        {"config_hash": chash, "seed": cfg.seed, "setpoints": results},
    )
    return {"setpoints": results}


def cmd_pipeline(cfg: PipelineConfig, args) -> dict:
    out = Path(cfg.out_dir)
    gen = cmd_gen(cfg)
    print(f"gen: {gen['n_trips']} trips")
    sgm = cmd_segment(cfg)
    print(
        f"segment: {sgm['n_segments']} segments "
        f"(duration {sgm['duration_mean_s']:.1f} s mean, {sgm['duration_sd_s']:.2f} s sd)"
    )
    ftr = cmd_features(cfg)
    print(f"features: {ftr['n_rows']} rows")
    clu = cmd_cluster(cfg)
    print(f"cluster: sizes {clu['sizes']} inertia {clu['inertia']:.4f}")
    trn = cmd_train(cfg)
    print(
        f"train: accuracy {trn['overall_accuracy']:.4f} on {trn['n_test']} held-out segments"
    )
    qnt = cmd_quantize(cfg)
    worst_lut = max(e["max_abs_lut_error"] for e in qnt["engines"])
    print(f"quantize: 3 engines, max LUT error {worst_lut:.3e}")
    hw_args = argparse.Namespace(x=None, sweep=None, compare_float=True, trace=None, trace_style=None)
    sim = cmd_hwsim(cfg, hw_args)
    prs = cmd_personalize(cfg, argparse.Namespace(driver=None, window=None))

    summary = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "config": config_to_dict(cfg),
        "n_trips": gen["n_trips"],
        "n_segments": sgm["n_segments"],
        "segment_duration_mean_s": sgm["duration_mean_s"],
        "segment_duration_sd_s": sgm["duration_sd_s"],
        "cluster_sizes": clu["sizes"],
        "overall_accuracy": trn["overall_accuracy"],
        "per_class_recall": trn["per_class_recall"],
        "per_class_precision": trn["per_class_precision"],
        "hw_max_abs_dy": sim["max_abs_dy"],
        "hw_argmax_agreement": sim["argmax_agreement"],
        "hw_cycles_total": sim["cycles_total"],
        "setpoints": prs["setpoints"],
    }
    _write_json(out / "summary.json", summary)
    print(f"pipeline complete; summary written to {out / 'summary.json'}")
    return summary


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subparser from writing its own default over a value the
    # root parser already placed in the namespace, so the global flags work on
    # either side of the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        metavar="PATH",
        default=argparse.SUPPRESS,
        help="JSON config file (default: demo settings)",
    )
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="override the config seed"
    )
    common.add_argument(
        "--out-dir", default=argparse.SUPPRESS, help="override the artifact directory"
    )

    parser = argparse.ArgumentParser(
        prog="headway",
        parents=[common],
        description="Driving-style pipeline: synthetic trips to personalized ACC headway setpoints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen", parents=[common], help="generate the synthetic trip cohort")
    sub.add_parser("segment", parents=[common], help="extract steady car-following segments")
    sub.add_parser("features", parents=[common], help="compute THW_RMS/TETH/TITH per segment")
    sub.add_parser("cluster", parents=[common], help="k-means styles, canonical order, planes")
    sub.add_parser("train", parents=[common], help="train the style classifiers (75/25 split)")
    sub.add_parser("quantize", parents=[common], help="build fixed-point engines (HWA1 binaries)")

    hw_p = sub.add_parser("hwsim", parents=[common], help="run the fixed-point engines")
    hw_p.add_argument("--x", metavar="T,E,I", help="one normalized input vector, e.g. 0.2,0.7,0.4")
    hw_p.add_argument("--sweep", type=int, metavar="N", help="random-input sweep size")
    hw_p.add_argument(
        "--compare-float",
        action="store_true",
        help="fail (exit 3) if the sweep divergence exceeds 2^-6",
    )
    hw_p.add_argument("--trace", metavar="PATH", help="write a cycle trace CSV (needs --x)")
    hw_p.add_argument("--trace-style", type=int, metavar="K", help="engine to trace (default: winner)")

    pers_p = sub.add_parser("personalize", parents=[common], help="emit SETPOINT lines")
    pers_p.add_argument("--driver", help="driver id (default: every driver)")
    pers_p.add_argument("--window", type=int, help="learning window length in segments")

    sub.add_parser("pipeline", parents=[common], help="run every stage end-to-end")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config_path = getattr(args, "config", None)
    try:
        cfg = load_config(config_path) if config_path else PipelineConfig()
        cfg = with_overrides(
            cfg, seed=getattr(args, "seed", None), out_dir=getattr(args, "out_dir", None)
        )
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)

        if args.command == "gen":
            n = cmd_gen(cfg)["n_trips"]
            print(f"gen: {n} trips under {Path(cfg.out_dir) / 'trips'}")
        elif args.command == "segment":
            meta = cmd_segment(cfg)
            print(
                f"segment: {meta['n_segments']} segments "
                f"(duration {meta['duration_mean_s']:.1f} s mean, {meta['duration_sd_s']:.2f} s sd)"
            )
        elif args.command == "features":
            print(f"features: {cmd_features(cfg)['n_rows']} rows")
        elif args.command == "cluster":
            res = cmd_cluster(cfg)
            print(f"cluster: sizes {res['sizes']} inertia {res['inertia']:.4f}")
        elif args.command == "train":
            res = cmd_train(cfg)
            recall = ", ".join(f"{r:.3f}" if r is not None else "n/a" for r in res["per_class_recall"])
            print(f"train: accuracy {res['overall_accuracy']:.4f} (per-style recall {recall})")
        elif args.command == "quantize":
            res = cmd_quantize(cfg)
            worst = max(e["max_abs_lut_error"] for e in res["engines"])
            print(f"quantize: 3 engines, max LUT error {worst:.3e}")
        elif args.command == "hwsim":
            cmd_hwsim(cfg, args)
        elif args.command == "personalize":
            cmd_personalize(cfg, args)
        elif args.command == "pipeline":
            cmd_pipeline(cfg, args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except HeadwayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
