"""Battery life at each scan rate, from reference lives and from a synthetic cohort."""

import argparse

from passivesense import synth
from passivesense.battery import (
    REPORT_SCAN_RATES, discharge_observations, fit_battery_model, fit_from_lives,
    predict_battery_life,
)
from passivesense.ingest import parse_scan_log
from passivesense.model import group_by_participant


def table(fit, label):
    print(f"{label}: rate = {fit.intercept:.4f} + {fit.slope:.5f} x scans/h")
    base = predict_battery_life(fit, 0)
    for r in REPORT_SCAN_RATES:
        life = predict_battery_life(fit, r)
        print(f"  {r:5.1f} scans/h  {life:6.2f} h  ({100 * (base - life) / base:5.1f}% shorter)")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--participants", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--device-sd", type=float, default=0.3,
                    help="between-device spread of the baseline drain (%%/h)")
    args = ap.parse_args()

    table(fit_from_lives([(0, 21.3), (12, 18.8)]), "reference lives")

    cfg = synth.SynthConfig(seed=args.seed, n_participants=args.participants,
                            battery_device_sd=args.device_sd)
    lines, _ = synth.generate(cfg)
    events, _ = parse_scan_log(lines)
    obs = [o for pid, evs in group_by_participant(events).items()
           for o in discharge_observations(evs, cfg.schedule)]
    fit = fit_battery_model(obs)
    table(fit, f"synthetic cohort ({len(obs)} device-weeks, {fit.iterations} IRLS iterations)")


if __name__ == "__main__":
    main()
