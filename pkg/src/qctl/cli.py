"""``qctl`` command line: check / design / simulate.

Exit codes: 0 success, 1 domain failure, 2 input or parse failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .completion import CompletionError
from .dynamics import SimulationError, commutation_defect, simulate_means
from .placement import PlacementError, poles_in_region
from .problem import ProblemFileError, controller_to_dict, load_controller, load_problem
from .qsde import (DimensionError, check_controller_realizability, check_plant_realizability,
                   is_controllable, is_detectable)
from .quadrature import theta
from .synthesis import (AssumptionError, SynthesisProblem, assemble_closed_loop, synthesize,
                        verify_separation)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _bool(b) -> str:
    return "true" if b else "false"


def _seed() -> int:
    raw = os.environ.get("QCTL_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ProblemFileError(f"QCTL_SEED must be an integer, got {raw!r}") from None


def cmd_check(path, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(path)
    plant = prob.plant
    rep = check_plant_realizability(plant)
    T2R = 2.0 * theta(plant.n_x) @ prob.coupling.Rc
    ctrb = is_controllable(plant.A + T2R, plant.B2)
    det = is_detectable(plant.A - T2R, plant.C)
    print(f"residual_a: {rep.residual_a:.6e}", file=out)
    print(f"residual_b: {rep.residual_b:.6e}", file=out)
    print(f"Rc symmetric: {_bool(prob.coupling.is_symmetric)}", file=out)
    print(f"physical: {_bool(rep.physical)}, controllable: {_bool(ctrb)}, "
          f"detectable: {_bool(det)}", file=out)
    return EXIT_OK if rep.physical and ctrb and det else EXIT_FAIL


def _write_poles(path, design, prob):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im", "source", "in_region"])
        for source, loop, spec in (("regulator", design.regulator, prob.regulator_spec),
                                   ("observer", design.observer, prob.observer_spec)):
            for z in sorted(loop.poles, key=lambda z: (z.real, z.imag)):
                flag = "" if spec.region is None else _bool(poles_in_region([z], spec.region).ok)
                w.writerow([_fmt(z.real), _fmt(z.imag), source, flag])


def cmd_design(path, out_dir, force_asymmetric_rc=False, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(path)
    problem = SynthesisProblem(prob.plant, prob.coupling, prob.regulator_spec, prob.observer_spec,
                               prob.structured_gain, prob.xi_v, force_asymmetric_rc)
    try:
        cls = synthesize(problem, np.random.default_rng(_seed()))
    except (AssumptionError, PlacementError, CompletionError) as exc:
        print(f"design failed: {exc}", file=out)
        return EXIT_FAIL
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    d = cls.design
    doc = controller_to_dict(cls.ctrl, d.completion.psd_shift, d.completion.xi_v)
    (out_dir / "controller.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    _write_poles(out_dir / "poles.csv", d, prob)

    rep = check_controller_realizability(cls.ctrl)
    sep = verify_separation(cls)
    lines = [
        f"controller residual_a: {rep.residual_a:.6e}",
        f"controller residual_b: {rep.residual_b:.6e}",
        f"physical: {_bool(rep.physical)}",
        f"n_v: {cls.ctrl.n_v}",
        f"xi shift: {d.completion.psd_shift:.17g}",
        f"separation triangular: {_bool(sep.triangular)} (lower-left norm {sep.lower_left_norm:.3e})",
        f"spectrum union residual: {sep.spectrum_union_residual:.3e}",
    ]
    for name, loop in (("regulator", d.regulator), ("observer", d.observer)):
        poles = ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in loop.poles)
        lines.append(f"{name} poles: {poles}")
        if loop.scalar is not None:
            lines.append(f"{name} scalar gain: {loop.scalar:.17g}")
        if loop.pairing_error is not None:
            lines.append(f"{name} pairing error: {loop.pairing_error:.3e}")
        if loop.region_ok is not None:
            lines.append(f"{name} poles in region: {_bool(loop.region_ok)}")
        lines.extend(loop.notes)
    text = "\n".join(lines) + "\n"
    (out_dir / "report.txt").write_text(text, encoding="utf-8")
    out.write(text)
    return EXIT_OK


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def cmd_simulate(path, controller_path, out_dir, out=None) -> int:
    out = out or sys.stdout
    prob = load_problem(path)
    if prob.simulate is None:
        raise ProblemFileError(f"{path}: no 'simulate' block")
    ctrl = load_controller(controller_path)
    try:
        cls = assemble_closed_loop(prob.plant, ctrl, prob.coupling)
    except DimensionError as exc:
        raise ProblemFileError(str(exc)) from None
    n = prob.plant.n_x
    sim = prob.simulate
    x0 = sim.x0 if sim.x0.size == 2 * n else np.concatenate([sim.x0, np.zeros(n)])
    try:
        traj = simulate_means(cls.A_s, x0, sim.t_final, sim.dt)
        defect = commutation_defect(cls.A_s, cls.B_s, cls.noise_theta, sim.t_final, sim.dt)
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=out)
        return EXIT_FAIL
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"xhat{i + 1}" for i in range(n)]
    _write_csv(out_dir / "trajectory.csv", header,
               (np.concatenate([[t], s]) for t, s in zip(traj.times, traj.states)))
    _write_csv(out_dir / "defect.csv", ["t", "defect"], zip(defect.times, defect.defect))
    print(f"steps: {len(traj.times) - 1}", file=out)
    print(f"final mean norm: {np.linalg.norm(traj.states[-1]):.6e}", file=out)
    print(f"max commutation defect: {defect.max_defect:.6e}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qctl", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", help="realisability, controllability and detectability of a plant")
    p.add_argument("file")
    p = sub.add_parser("design", help="synthesise an observer-based coherent controller")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.add_argument("--force-asymmetric-rc", action="store_true")
    p = sub.add_parser("simulate", help="simulate closed-loop means and the commutation defect")
    p.add_argument("file")
    p.add_argument("--controller", required=True)
    p.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args.file)
        if args.command == "design":
            return cmd_design(args.file, args.out, args.force_asymmetric_rc)
        return cmd_simulate(args.file, args.controller, args.out)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
