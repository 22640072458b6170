"""Assemble analyses into deterministic, plot-ready tables and JSON documents."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import battery, completeness, mobility, social, stats
from .model import ScanEvent, StudySchedule, group_by_participant

SCHEMA_VERSION = 1
SIG_DIGITS = 6


def canonical(obj):
    """Plain JSON types with floats rounded to 6 significant digits; NaN/inf -> None."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    return obj


def dumps(doc) -> str:
    return json.dumps(canonical(doc), sort_keys=True, indent=2) + "\n"


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(rows[0])
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in canonical(rows):
        w.writerow({k: "" if r[k] is None else r[k] for k in fields})
    return buf.getvalue()


def report_schema() -> dict:
    return json.loads(resources.files("passivesense").joinpath("data/report.schema.json").read_text())


def reference_schedule_path() -> str:
    """Filesystem path of the bundled 8/5/4/3-minute schedule document."""
    return str(resources.files("passivesense").joinpath("data/reference_schedule.json"))


class Schedules:
    """Per-participant schedule lookup.

    The schedule document is either ``{"weeks": [...]}`` (shared by everyone)
    or ``{"default": {...}, "participants": {"P01": {...}}}``. Participants with
    no schedule get the 8/5/4/3-minute four-week layout anchored at the local
    midnight before their first event.
    """

    def __init__(self, doc: dict | None = None, tz_offset_h: float = social.DEFAULT_TZ_OFFSET_H):
        self.tz_offset_h = tz_offset_h
        self.default = None
        self.by_participant: dict[str, StudySchedule] = {}
        if doc is None:
            return
        if "weeks" in doc:
            self.default = StudySchedule.from_dict(doc)
        else:
            if doc.get("default") is not None:
                self.default = StudySchedule.from_dict(doc["default"])
            for pid, d in doc.get("participants", {}).items():
                self.by_participant[pid] = StudySchedule.from_dict(d)

    def shared(self) -> StudySchedule | None:
        return self.default if not self.by_participant else None

    def get(self, pid: str, events: list[ScanEvent]) -> StudySchedule:
        if pid in self.by_participant:
            return self.by_participant[pid]
        if self.default is not None:
            return self.default
        off = round(self.tz_offset_h * 3600)
        first = min(e.timestamp for e in events)
        return StudySchedule.four_week(((first + off) // 86400) * 86400 - off)


@dataclass
class Options:
    tz_offset_h: float = social.DEFAULT_TZ_OFFSET_H
    seed: int = 0
    min_days: int = 3
    completeness_mode: str = "mean"
    missing_hours: str = "zero"
    max_gap_minutes: float = 30.0
    radius_m: float = mobility.RADIUS_THRESHOLD_M
    k_max: int = 50
    cm_per_sample: bool = False
    stationary_only_cm: bool = False


def completeness_section(groups, schedules: Schedules, opts: Options) -> dict:
    rows = [completeness.participant_completeness(pid, evs, schedules.get(pid, evs),
                                                  opts.completeness_mode)
            for pid, evs in groups.items()]
    by_os, test = ({}, None)
    if rows:
        by_os, test = completeness.completeness_by_os(rows)
    shared = schedules.shared()
    return {
        "mode": opts.completeness_mode,
        "scheduled": completeness.scheduled_count(shared) if shared is not None else None,
        "rows": [r.__dict__ for r in rows],
        "by_os": {k: {"n": v.n, "mean": v.mean, "sd": v.sd} for k, v in by_os.items()},
        "os_test": None if test is None else {"t": test.t, "df": test.df, "p": test.p, "d": test.d},
    }


def social_section(groups, schedules: Schedules, opts: Options) -> dict:
    out = []
    for pid, evs in groups.items():
        part = social.classify_devices(evs, opts.min_days, opts.tz_offset_h)
        prof = social.social_profile(evs, part, opts.tz_offset_h, schedules.get(pid, evs),
                                     opts.missing_hours)
        out.append({
            "participant_id": pid,
            "n_known": len(part.known),
            "n_unknown": len(part.unknown),
            "denominator_days": prof.denominator_days,
            "profile": [{"hour": h, "mean_known": k, "mean_unknown": u} for h, k, u in prof.rows()],
        })
    return {"min_days": opts.min_days, "participants": out}


def mobility_section(groups, schedules: Schedules, opts: Options) -> dict:
    out = []
    for pid, evs in groups.items():
        mf = mobility.mobility_features(
            evs, schedules.get(pid, evs), seed=opts.seed, max_gap_minutes=opts.max_gap_minutes,
            radius_threshold_m=opts.radius_m, k_max=opts.k_max,
            stationary_only_cm=opts.stationary_only_cm, per_sample=opts.cm_per_sample)
        entry = {"participant_id": pid, "n_fixes": mf.n_fixes, "n_stationary": mf.n_stationary,
                 "cluster_count": None, "max_radius_m": None, "radius_satisfied": None,
                 "clusters": [],
                 "circadian_movement": [{"week": w, "interval_minutes": iv, "cm": cm}
                                        for w, iv, cm in mf.weekly_cm]}
        c = mf.clusters
        if c is not None:
            lat, lon = c.center_latlon
            entry.update({
                "cluster_count": c.k, "max_radius_m": c.max_radius_m,
                "radius_satisfied": c.satisfied,
                "clusters": [{"cluster_id": j, "center_lat": lat[j], "center_lon": lon[j],
                              "n_points": int(n)} for j, n in enumerate(c.sizes)],
            })
        out.append(entry)
    counts = [p["cluster_count"] for p in out if p["cluster_count"] is not None]
    summary = None
    if counts:
        summary = {"min": min(counts), "median": float(np.median(counts)), "max": max(counts)}
    return {"participants": out, "cluster_count_summary": summary}


def battery_section(groups, schedules: Schedules, opts: Options) -> dict:
    obs = []
    for pid, evs in groups.items():
        obs += battery.discharge_observations(evs, schedules.get(pid, evs), pid,
                                              opts.max_gap_minutes)
    doc = {"observations": [o.__dict__ for o in obs], "fit": None, "life_hours": []}
    try:
        fit = battery.fit_battery_model(obs)
    except ValueError:
        return doc
    doc["fit"] = {"intercept": fit.intercept, "slope": fit.slope,
                  "iterations": fit.iterations, "degenerate": fit.degenerate,
                  "weights": fit.weights}
    lives = []
    for r in battery.REPORT_SCAN_RATES:
        try:
            lives.append({"scan_rate": r, "hours": battery.predict_battery_life(fit, r)})
        except ValueError:
            lives.append({"scan_rate": r, "hours": None})
    doc["life_hours"] = lives
    return doc


def reliability_doc(rows) -> dict | None:
    """Alpha and RM-ANOVA over complete rows; None when fewer than 2 remain."""
    try:
        rm = stats.RepeatedMeasures.from_rows(rows)
    except ValueError:
        return None
    doc = {"n": rm.n, "k": rm.k, "alpha": None, "alpha_ci": None,
           "anova": None, "anova_gg": None}
    try:
        a = stats.cronbach_alpha(rm)
        doc["alpha"], doc["alpha_ci"] = a.alpha, list(a.ci)
    except ValueError:
        pass
    for key, corr in (("anova", "none"), ("anova_gg", "greenhouse_geisser")):
        try:
            r = stats.rm_anova(rm, corr)
            doc[key] = {"F": r.F, "df1": r.df1, "df2": r.df2, "p": r.p, "epsilon": r.epsilon}
        except ValueError:
            pass
    return doc


def stats_section(mob: dict) -> dict:
    rows = [[c["cm"] for c in p["circadian_movement"]] for p in mob["participants"]]
    width = max((len(r) for r in rows), default=0)
    rows = [r for r in rows if len(r) == width]
    return {"circadian_reliability": reliability_doc(rows) if width >= 2 else None}


def full_report(events, schedules: Schedules, opts: Options) -> dict:
    groups = group_by_participant(events)
    mob = mobility_section(groups, schedules, opts)
    return {
        "schema_version": SCHEMA_VERSION,
        "options": {"tz_offset_h": opts.tz_offset_h, "seed": opts.seed,
                    "min_days": opts.min_days, "completeness_mode": opts.completeness_mode,
                    "missing_hours": opts.missing_hours, "cm_per_sample": opts.cm_per_sample},
        "participants": [{"participant_id": pid, "device_os": evs[0].device_os.value,
                          "device_model": evs[0].device_model, "n_events": len(evs)}
                         for pid, evs in groups.items()],
        "completeness": completeness_section(groups, schedules, opts),
        "social": social_section(groups, schedules, opts),
        "mobility": mob,
        "battery": battery_section(groups, schedules, opts),
        "stats": stats_section(mob),
    }
