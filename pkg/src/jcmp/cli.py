"""Command-line front end.

    jcmp run      --scenario FILE --planner {baseline,single,multi} [--out PATH] [--format csv|json]
    jcmp compare  --scenario FILE [--out PATH] [--format csv|json]
    jcmp validate --scenario FILE [--seed N] [--out PATH] [--format csv|json]
    jcmp cqm      --scenario FILE [--out PATH] [--format csv|json]

``--scenario default`` uses the packaged default scenario. Exit status is 0 on
success, 1 when the scenario is infeasible, 2 on bad input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import cqm
from .channel import mean_snr, noise_power, per_rayleigh, required_mean_snr
from .errors import ConfigError, InfeasibleError
from .scenario import Scenario, default_scenario_path, load_scenario
from .simcore import PLANNERS, compare, monte_carlo_validate, run

VALIDATE_SAMPLES = 100_000

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jcmp", description="Joint communication-motion planning "
                                "for a sensing / router / base-station relay chain.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True,
                        help="scenario YAML file, or 'default' for the packaged one")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    common(r := sub.add_parser("run", help="run one planner and emit its trajectory"))
    r.add_argument("--planner", required=True, choices=PLANNERS)
    common(sub.add_parser("compare", help="run all planners and emit energy totals"))
    common(v := sub.add_parser("validate", help="Monte-Carlo check of the planned PERs"))
    v.add_argument("--seed", type=int, default=0)
    common(sub.add_parser("cqm", help="connectivity metrics at step 0"))
    return p

def _rows_run(report, s: Scenario) -> list[dict]:
    rows = []
    for t, (d, sp, pe) in enumerate(zip(report.steps, s.sense_traj, report.step_e2e_per)):
        rows.append({
            "step": t, "router_x": d.router_pos[0], "router_y": d.router_pos[1],
            "sense_x": sp[0], "sense_y": sp[1],
            "mode_sr": s.modes[d.link_sr.mode_index].label,
            "mode_rb": s.modes[d.link_rb.mode_index].label,
            "p_sr_W": d.link_sr.tx_power, "p_rb_W": d.link_rb.tx_power,
            "eps_sr": d.link_sr.per_budget, "eps_rb": d.link_rb.per_budget, "e2e_per": pe,
            "motion_J": d.motion_energy, "comm_J": d.comm_energy,
            "total_J": d.motion_energy + d.comm_energy,
        })
    return rows

def _rows_validate(s: Scenario, seed: int) -> list[dict]:
    rows = []
    for kind, rep in compare(s).reports.items():
        rec = monte_carlo_validate(s, rep, VALIDATE_SAMPLES, seed)
        for c in rec.links:
            rows.append({"planner": kind, "step": c.step, "link": c.link, "budget": c.budget,
                         "planned_per": c.planned_per, "empirical_per": c.empirical_per,
                         "std_err": c.std_err, "flagged": int(c.flagged)})
    return rows

def max_hop_distance(s: Scenario, eps: float) -> float:
    """Longest hop that some mode can serve at PER ``eps`` within ``p_max``."""
    ch = s.channel
    best_snr = min(required_mean_snr(eps, m) for m in s.modes)
    gain = best_snr * noise_power(ch) / s.p_max
    return ch.ref_dist_d0 * (ch.ref_gain_K0 / gain) ** (1.0 / ch.pathloss_exp_beta)

def _rows_cqm(s: Scenario) -> list[dict]:
    sense, router, base = s.sense_traj[0], s.router_start, s.base_pos
    nodes = [sense, router, base]
    x_th = max_hop_distance(s, s.eps_target)
    g = cqm.build_graph(nodes, lambda d: cqm.step_weight(d, cqm.StepWeightParams(x_th)))
    out = [("x_th_m", x_th),
           ("algebraic_connectivity", cqm.algebraic_connectivity(g)),
           ("num_paths_sensing_to_base", cqm.num_simple_paths(g, 0, 2))]
    floor = {}
    for name, a, b in (("sr", sense, router), ("rb", router, base), ("direct", sense, base)):
        d = math.dist(a, b)
        gbar = mean_snr(s.p_max, d, s.channel)
        floor[name] = min(per_rayleigh(gbar, m) for m in s.modes)
        out += [(f"dist_{name}_m", d), (f"mean_snr_{name}_dB_at_pmax", 10 * math.log10(gbar)),
                (f"capacity_{name}_bps_at_pmax", cqm.capacity(gbar, s.channel.bandwidth_B)),
                (f"per_{name}_at_pmax", floor[name])]
    out.append(("e2e_per_relay_at_pmax", cqm.e2e_per(floor["sr"], floor["rb"])))
    return [{"metric": k, "value": v if isinstance(v, int) else float(v)} for k, v in out]

def _emit(rows: list[dict], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        text = buf.getvalue()
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors (exit 2) and --help (exit 0) come back as a status
        return int(exc.code or 0)
    try:
        path = default_scenario_path() if args.scenario == "default" else args.scenario
        if not Path(path).is_file():
            raise ConfigError(f"scenario file not found: {path}")
        s = load_scenario(Path(path))
        if args.subcommand == "run":
            rows = _rows_run(run(s, args.planner), s)
        elif args.subcommand == "compare":
            rows = compare(s).rows()
        elif args.subcommand == "validate":
            rows = _rows_validate(s, args.seed)
        else:
            rows = _rows_cqm(s)
        _emit(rows, args.format, args.out)
    except InfeasibleError as exc:
        print(f"jcmp: infeasible: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"jcmp: error: {exc}", file=sys.stderr)
        return 2
    return 0

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
