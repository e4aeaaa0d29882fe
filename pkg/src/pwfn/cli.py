"""Command line driver: run configured scenarios, emit artifacts, report.

Usage:
    pwfn <kind> --config scenario.ini --out outdir [--threads N] [--verbose]
    pwfn report FILE [FILE ...]

Exit codes: 0 success, 2 configuration error, 3 solver precondition
violated, 4 numeric instability, 5 I/O or file-format error.  Every run
writes a JSON manifest (config hash, output hashes, versions, wall time)
next to its artifacts; identical configs produce identical output hashes.

Internals use natural units; the optional [output] keys hbar_si, c_si and
eps0_si only rescale reported scalars on the way out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import eigen, evolve, gridio, metrics, phasespace, spectral, states
from .config import parse_float, parse_int, parse_vector
from .errors import (ConfigError, FormatError, PwfnError, StabilityError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_INSTABILITY = 4
EXIT_IO = 5


def _initial_field(scenario):
    init = scenario.initial
    spec = scenario.grid
    kind = init.get("packet", "gaussian")
    if kind.startswith("file:"):
        return gridio.read_sixfield(kind[5:])
    if kind == "gaussian":
        return states.gaussian_packet(
            spec,
            parse_vector(init, "k_center", (3.0, 0.0, 0.0)),
            parse_float(init, "sigma_k", 0.7),
            helicity=parse_int(init, "helicity", 1),
            r_center=parse_vector(init, "r_center", (0.0, 0.0, 0.0)),
        )
    if kind == "mode":
        idx = [int(v) for v in init.get("k_index", "0 0 2").split()]
        return spectral.synthesize(
            states.plane_wave_mode(spec, idx,
                                   helicity=parse_int(init, "helicity", 1)),
            t=0.0)
    if kind == "vortex":
        core = parse_vector(init, "core_xy", (0.0, 0.0), count=2)
        return states.vortex_field(spec, core_xy=tuple(core),
                                   k_z_index=parse_int(init, "k_z_index", 2),
                                   transverse_k_index=parse_int(
                                       init, "transverse_k_index", 1))
    raise ConfigError(f"unknown initial packet {kind!r}")


def _medium(scenario):
    spec = scenario.grid
    phys = scenario.physics

    def profile(text):
        kind, _, args = text.partition(":")
        if kind == "uniform":
            return np.full(spec.n, float(args or 1.0))
        if kind == "cosine":
            base, amp = (float(v) for v in args.split(","))
            x = spec.coords()
            wave = np.cos(2 * np.pi * x[0] / spec.length[0]) \
                * np.cos(2 * np.pi * x[1] / spec.length[1])
            return base + amp * wave
        raise ConfigError(f"unknown medium profile {text!r}")

    return evolve.MediumMap(spec=spec,
                            eps=profile(phys.get("eps_profile", "uniform:1")),
                            mu=profile(phys.get("mu_profile", "uniform:1")))


def _stepper(phys):
    return evolve.StepperConfig(dt=parse_float(phys, "dt", 0.01),
                                scheme=phys.get("scheme", "rk4"),
                                cfl_safety=parse_float(phys, "cfl_safety", 0.5))


def _conserved_rows(spec, fields, dt):
    rows = []
    base = None
    for step, f in fields:
        sp = spectral.decompose(f)
        n_ph = metrics.photon_number(sp)
        obs = metrics.observables_momentum(sp)
        row = [step, step * dt, n_ph, obs.energy, *obs.momentum]
        if base is None:
            base = row[2:]
        scale = abs(base[1]) + 1e-300  # conserved-quantity drift vs energy
        drift = max(abs(a - b) for a, b in zip(row[2:], base)) / scale
        rows.append(row + [drift])
    return rows


def _run_evolve(scenario, outdir, curved):
    phys = scenario.physics
    cfg = _stepper(phys)
    steps = parse_int(phys, "steps", 100)
    f0 = _initial_field(scenario)
    outputs = []
    if curved:
        from . import geometry
        metric_text = phys.get("metric", "minkowski")
        if metric_text == "minkowski":
            metric = geometry.minkowski_metric(scenario.grid)
        elif metric_text.startswith("conformal:"):
            metric = geometry.conformal_metric(scenario.grid,
                                               float(metric_text.split(":")[1]))
        else:
            raise ConfigError(f"unknown metric {metric_text!r}")
        final = geometry.step_curved(f0, metric, cfg, steps)
        snapshots = [(0, f0), (steps, final)]
    elif scenario.kind == "evolve-free":
        t_total = parse_float(phys, "time", 1.0)
        final = evolve.propagate_free(f0, t_total)
        snapshots = [(0, f0), (1, final)]
        cfg = evolve.StepperConfig(dt=t_total)
        steps = 1
    else:
        medium = _medium(scenario)
        final = evolve.step_medium(f0, medium, cfg, steps)
        snapshots = [(0, f0), (steps, final)]
    field_name = scenario.output.get("field", "final_field.pwfn")
    field_path = outdir / field_name
    gridio.write_sixfield(field_path, final)
    outputs.append(field_path)
    csv_path = outdir / scenario.output.get("summary", "conserved.csv")
    rows = _conserved_rows(scenario.grid, snapshots, cfg.dt)
    gridio.write_csv(csv_path,
                     ["step", "t", "photon_number", "energy",
                      "px", "py", "pz", "max_drift"], rows)
    outputs.append(csv_path)
    return outputs, {"steps": steps, "dt": cfg.dt}


def _run_fiber(scenario, outdir):
    phys = scenario.physics
    spec = eigen.FiberSpec(radius=parse_float(phys, "radius", 1.0),
                           eps_in=parse_float(phys, "eps_in", 2.25),
                           eps_out=parse_float(phys, "eps_out", 1.0),
                           m_angular=parse_int(phys, "m_angular", 0),
                           k_z=parse_float(phys, "k_z", 5.0))
    modes = eigen.fiber_modes(spec, max_modes=parse_int(phys, "max_modes", 8))
    rows = []
    for md in modes:
        _, q = eigen._transverse_wavenumbers(spec, md.omega)
        rows.append([spec.m_angular, spec.k_z, md.omega, 1.0 / q,
                     md.matched_component_jump()])
    csv_path = outdir / scenario.output.get("summary", "fiber_modes.csv")
    gridio.write_csv(csv_path,
                     ["m_angular", "k_z", "omega", "decay_length",
                      "matched_jump"], rows)
    outputs = [csv_path]
    if scenario.grid is not None and modes:
        field = eigen.fiber_mode_field(modes[0], scenario.grid)
        field_path = outdir / scenario.output.get("field", "fiber_mode.pwfn")
        gridio.write_sixfield(field_path, field)
        outputs.append(field_path)
    return outputs, {"modes_found": len(modes)}


def _run_boost(scenario, outdir):
    phys = scenario.physics
    b = eigen.boost_eigenfunction(parse_float(phys, "kappa", 1.0),
                                  parse_float(phys, "kx", 1.0),
                                  parse_float(phys, "ky", 0.0))
    z = np.linspace(parse_float(phys, "z_min", 0.1),
                    parse_float(phys, "z_max", 5.0),
                    parse_int(phys, "samples", 64))
    rows = list(zip(z, b.psi_z(z), np.abs(b.psi_x(z)), np.abs(b.psi_y(z)),
                    b.eigen_residual(z)))
    csv_path = outdir / scenario.output.get("summary", "boost_profile.csv")
    gridio.write_csv(csv_path, ["z", "psi_z", "abs_psi_x", "abs_psi_y",
                                "eigen_residual"], rows)
    return [csv_path], {"kappa": b.kappa, "k_perp": b.k_perp}


def _run_wigner(scenario, outdir):
    from .errors import ResourceError
    if scenario.grid.npoints > 512:
        raise ResourceError(
            "the full (r, k) distribution needs npoints^2 storage; "
            f"grid has {scenario.grid.npoints} points (cap 512, e.g. 8x8x8)"
        )
    f0 = _initial_field(scenario)
    wf = phasespace.wigner_build(scenario.grid, f0.upper)
    dec = phasespace.wigner_decompose(wf)
    r1, r2 = phasespace.wigner_subsidiary_residual(dec)
    w_trace = np.einsum("ii...->...", dec.w_sym)
    mid = tuple(m // 2 for m in scenario.grid.n)
    slice_path = outdir / scenario.output.get("field", "wigner_trace.pwfn")
    gridio.write_grid_field(slice_path, scenario.grid,
                            w_trace[..., mid[0], mid[1], mid[2]][None].astype(complex))
    csv_path = outdir / scenario.output.get("summary", "wigner_summary.csv")
    gridio.write_csv(csv_path, ["hermiticity_defect", "subsidiary_r1",
                                "subsidiary_r2"],
                     [[wf.hermiticity_defect(), r1, r2]])
    return [slice_path, csv_path], {}


def _run_hydro(scenario, outdir):
    f0 = _initial_field(scenario)
    st = phasespace.hydro_from_field(scenario.grid, f0.upper)
    i1, i2, i3 = phasespace.hydro_identity_residuals(st)
    axis = parse_int(scenario.physics, "surface_axis", 2)
    index = parse_int(scenario.physics, "surface_index",
                      scenario.grid.n[2] // 2)
    winding = phasespace.quantization_integral(st, ("plane", axis, index))
    csv_path = outdir / scenario.output.get("summary", "hydro_summary.csv")
    gridio.write_csv(csv_path,
                     ["trace_identity", "orthogonality_identity",
                      "contraction_identity", "plane_winding"],
                     [[i1, i2, i3, winding]])
    field_path = outdir / scenario.output.get("field", "hydro_rho.pwfn")
    gridio.write_grid_field(field_path, scenario.grid,
                            st.rho[None].astype(complex))
    return [csv_path, field_path], {}


def _si_scale(output):
    hbar = float(output.get("hbar_si", 1.0))
    c = float(output.get("c_si", 1.0))
    return {"energy": hbar * c, "momentum": hbar, "angular_momentum": hbar}


def _run_observables(scenario, outdir):
    f0 = _initial_field(scenario)
    sp = spectral.decompose(f0)
    n_ph = metrics.photon_number(sp)
    sp.amp /= np.sqrt(n_ph)
    psi = spectral.synthesize(sp, 0.0)
    om = metrics.observables_momentum(sp)
    oc = metrics.observables_coordinate(psi)
    scale = _si_scale(scenario.output)
    rows = [
        ["photon_number", n_ph, n_ph],
        ["energy", om.energy * scale["energy"], oc.energy * scale["energy"]],
    ]
    for i, ax in enumerate("xyz"):
        rows.append([f"p_{ax}", om.momentum[i] * scale["momentum"],
                     oc.momentum[i] * scale["momentum"]])
        rows.append([f"j_{ax}",
                     om.angular_momentum[i] * scale["angular_momentum"],
                     oc.angular_momentum[i] * scale["angular_momentum"]])
        rows.append([f"n_{ax}", om.moment_of_energy[i], oc.moment_of_energy[i]])
    csv_path = outdir / scenario.output.get("summary", "observables.csv")
    gridio.write_csv(csv_path, ["quantity", "momentum_rep", "coordinate_rep"],
                     rows)
    return [csv_path], {"photon_number": n_ph}


def _run_commutators(scenario, outdir):
    f0 = _initial_field(scenario)
    tags = list(metrics.GeneratorTag)
    rows = []
    worst = 0.0
    for i in range(len(tags)):
        for j in range(i + 1, len(tags)):
            r = metrics.commutator_residual(tags[i], tags[j], f0)
            rows.append([tags[i].value, tags[j].value, r])
            worst = max(worst, r)
    csv_path = outdir / scenario.output.get("summary", "commutators.csv")
    gridio.write_csv(csv_path, ["a", "b", "residual"], rows)
    return [csv_path], {"worst_residual": worst}


_RUNNERS = {
    "evolve-free": lambda s, o: _run_evolve(s, o, curved=False),
    "evolve-medium": lambda s, o: _run_evolve(s, o, curved=False),
    "evolve-curved": lambda s, o: _run_evolve(s, o, curved=True),
    "fiber-modes": _run_fiber,
    "boost-eigen": _run_boost,
    "wigner": _run_wigner,
    "hydro": _run_hydro,
    "observables": _run_observables,
    "commutators": _run_commutators,
}


def run_scenario(config_path, outdir, verbose=False) -> int:
    started = time.monotonic()
    scenario = cfgmod.load_scenario(config_path)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs, extra = _RUNNERS[scenario.kind](scenario, outdir)
    manifest = outdir / "manifest.json"
    si_keys = {k: scenario.output[k] for k in ("hbar_si", "c_si", "eps0_si")
               if k in scenario.output}
    if si_keys:
        extra = {**extra, "si_scaling": si_keys}
    gridio.write_manifest(manifest, config_path, outputs,
                          tolerances={"cfl_safety":
                                      scenario.physics.get("cfl_safety", "0.5")},
                          started=started, extra=extra)
    if verbose:
        for p in outputs:
            print(f"wrote {p}")
        print(f"wrote {manifest}")
    return EXIT_OK


def report(paths) -> int:
    """Print a stable text summary of artifact files."""
    for path in paths:
        path = Path(path)
        if path.suffix == ".pwfn":
            spec, data = gridio.read_grid_field(path)
            norm2 = float(np.sum(np.abs(data) ** 2) * spec.cell_volume)
            print(f"{path.name}: grid {spec.n} box {spec.length} "
                  f"components {data.shape[0]} norm2 {norm2:.12e}")
        elif path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
            print(f"{path.name}: config {manifest['config_sha256'][:12]} "
                  f"outputs {len(manifest['outputs'])}")
        else:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().strip().splitlines()
            print(f"{path.name}: {lines[0]}")
            for line in lines[1:]:
                print(f"  {line}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pwfn",
        description="photon wave-function numerics: scenario driver")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in cfgmod.SCENARIO_KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} scenario")
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--verbose", action="store_true")
    pr = sub.add_parser("report", help="summarize artifact files")
    pr.add_argument("files", nargs="+")
    args = parser.parse_args(argv)

    try:
        if args.command == "report":
            return report(args.files)
        threads = args.threads
        if threads is None:
            threads = int(os.environ.get("PWFN_THREADS", "1"))
        spectral.set_workers(threads)
        config_path = Path(args.config)
        scenario_kind = args.command
        scenario = cfgmod.load_scenario(config_path)
        if scenario.kind != scenario_kind:
            raise ConfigError(
                f"config declares kind {scenario.kind!r} but the "
                f"{scenario_kind!r} subcommand was invoked"
            )
        return run_scenario(config_path, args.out, verbose=args.verbose)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as exc:
        print(f"stability error: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except FormatError as exc:
        print(f"file format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PwfnError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
