"""Command-line front end: ``qutrit-schmidt {decompose,canonicalize,simulate,selftest}``.

Exit status: 0 when every check passes, 1 on a tolerance violation, 2 on bad input.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import core, measurement, oracle, transforms
from .errors import InvalidTrials, MissingSetting, ParseError, QutritError

SQRT2 = math.sqrt(2.0)

DEFAULT_TOLS = {
    "kernel": core.KERNEL_TOL,
    "magic": 1e-12,
    "recon": core.RECON_TOL,
    "oracle": 1e-9,
    "overlap": 1e-10,
}


# ---------------------------------------------------------------- input specs

def _parse_complex(tok) -> complex:
    """[re, im], {"mag": m, "phase_deg": d}, a number, or CLI text "re,im" / "mag@deg" / "1+2j"."""
    if isinstance(tok, (int, float)):
        return complex(tok)
    if isinstance(tok, (list, tuple)) and len(tok) == 2:
        return complex(float(tok[0]), float(tok[1]))
    if isinstance(tok, dict) and set(tok) == {"mag", "phase_deg"}:
        return cmath.rect(float(tok["mag"]), math.radians(float(tok["phase_deg"])))
    if isinstance(tok, str):
        t = tok.strip()
        try:
            if "@" in t:
                mag, deg = t.split("@")
                return cmath.rect(float(mag), math.radians(float(deg)))
            if "," in t:
                re_, im_ = t.split(",")
                return complex(float(re_), float(im_))
            return complex(t.replace("i", "j"))
        except ValueError:
            pass
    raise ParseError(f"cannot read complex amplitude from {tok!r}")


@dataclass
class QutritSpec:
    """Either three amplitudes or a named family with its parameters (angles in degrees)."""

    amplitudes: tuple | None = None
    family: str | None = None
    params: tuple = field(default_factory=tuple)
    seed: int | None = None

    def __post_init__(self):
        if (self.amplitudes is None) == (self.family is None):
            raise ParseError("give exactly one of amplitudes or family")

    def resolve(self) -> core.QutritState:
        if self.amplitudes is not None:
            if len(self.amplitudes) != 3:
                raise ParseError("need three amplitudes")
            try:
                return core.make_qutrit(*self.amplitudes)
            except QutritError as exc:
                raise ParseError(str(exc)) from exc
        params = [float(x) for x in self.params]
        for i in _ANGLE_PARAMS.get(self.family, ()):
            if i < len(params):
                params[i] = math.radians(params[i])
        return family_state(self.family, params, self.seed)

    def echo(self):
        if self.amplitudes is not None:
            return {"amplitudes": [[z.real, z.imag] for z in map(complex, self.amplitudes)]}
        out = {"family": self.family, "params": list(self.params)}
        if self.family == "random":
            out["seed"] = self.seed
        return out


def family_state(name: str, params, seed=None) -> core.QutritState:
    """Worked-example families: c2zero(|c1|, phi1, phi3), c3zero(theta, phi), hv, random."""
    p = [float(x) for x in params]
    if name == "hv":
        _nparams(name, p, 0)
        return core.make_qutrit(0, 1, 0)
    if name == "c2zero":
        _nparams(name, p, 3)
        mag, p1, p3 = p
        if not 0.0 <= mag <= 1.0:
            raise ParseError("c2zero needs 0 <= |c1| <= 1")
        return core.make_qutrit(cmath.rect(mag, p1), 0, cmath.rect(math.sqrt(1 - mag * mag), p3))
    if name == "c3zero":
        _nparams(name, p, 2)
        theta, phi = p
        n = math.sqrt(1 + math.cos(theta) ** 2)
        return core.make_qutrit(SQRT2 * math.cos(theta) / n, cmath.rect(math.sin(theta) / n, phi), 0)
    if name == "random":
        _nparams(name, p, 0)
        return measurement.haar_qutrit(np.random.default_rng(0 if seed is None else seed))
    raise ParseError(f"unknown family {name!r}")



def _nparams(name, p, n):
    if len(p) != n:
        raise ParseError(f"family {name!r} takes {n} parameter(s), got {len(p)}")


# angle-valued parameters per family, converted from degrees at the CLI surface
_ANGLE_PARAMS = {"c2zero": (1, 2), "c3zero": (0, 1)}


def spec_from_json(doc: dict, seed=None) -> QutritSpec:
    if not isinstance(doc, dict):
        raise ParseError("input must be a JSON object")
    if "amplitudes" in doc and "family" in doc:
        raise ParseError("give exactly one of amplitudes or family")
    if "amplitudes" in doc:
        return QutritSpec(amplitudes=tuple(_parse_complex(t) for t in doc["amplitudes"]))
    if "family" in doc:
        fam = doc["family"]
        try:
            params = tuple(float(x) for x in doc.get("params", []))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad family parameters: {exc}") from exc
        return QutritSpec(family=fam, params=params, seed=doc.get("seed", seed))
    raise ParseError("input needs 'amplitudes' or 'family'")


def spec_from_args(args) -> QutritSpec:
    given = [args.input is not None, args.amplitudes is not None, args.family is not None]
    if sum(given) != 1:
        raise ParseError("give exactly one of --input, --amplitudes, --family")
    if args.input is not None:
        try:
            with open(args.input) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read {args.input}: {exc}") from exc
        return spec_from_json(doc, seed=args.seed)
    if args.amplitudes is not None:
        return QutritSpec(amplitudes=tuple(_parse_complex(t) for t in args.amplitudes))
    return spec_from_json({"family": args.family, "params": args.params or []}, seed=args.seed)


# ---------------------------------------------------------------- reports

def _mode_json(psi: core.PolarizationMode):
    return {
        "alpha": {"mag": abs(psi.alpha), "phase": cmath.phase(psi.alpha)},
        "beta": {"mag": abs(psi.beta), "phase": cmath.phase(psi.beta)},
    }


def _check(name, value, tol):
    return {"name": name, "value": value, "tol": tol, "ok": bool(value <= tol)}


def _decomposition_json(d: core.SchmidtDecomposition):
    return {
        "lambda_plus": d.lambda_plus,
        "lambda_minus": d.lambda_minus,
        "mode_plus": _mode_json(d.mode_plus),
        "mode_minus": _mode_json(d.mode_minus),
        "mode_minus_null": d.minus_is_null,
        "concurrence": d.concurrence,
        "schmidt_number": d.schmidt_number,
        "x": d.x_param,
        "phi0": d.phi0,
        "branch": d.branch,
    }


def cmd_decompose(spec: QutritSpec, tols=None) -> dict:
    tols = {**DEFAULT_TOLS, **(tols or {})}
    q = spec.resolve()
    d = core.decompose(q)
    o = oracle.con_eigen_modes(q)
    kern = max(core.kernel_residual(q, lam, psi) for lam, psi in d.pairs
               if not (psi is d.mode_minus and d.minus_is_null))
    recon = 1.0 - abs(core.reconstruct(d).overlap(q))
    checks = [
        _check("kernel", kern, tols["kernel"]),
        _check("magic", core.magic_residual(q), tols["magic"]),
        _check("reconstruction", recon, tols["recon"]),
        _check("oracle", oracle.compare_decompositions(d, o, q), tols["oracle"]),
    ]
    cf = transforms.canonicalize(q)
    return {
        "command": "decompose",
        "input": spec.echo(),
        "state": [[z.real, z.imag] for z in (q.c1, q.c2, q.c3)],
        "decomposition": _decomposition_json(d),
        "canonical": {"lambda_plus": cf.lambda_plus, "lambda_minus": cf.lambda_minus,
                      "phi": cf.phi, "phi_undefined": cf.phase_undefined},
        "checks": checks,
    }


def cmd_canonicalize(spec: QutritSpec, tols=None) -> dict:
    tols = {**DEFAULT_TOLS, **(tols or {})}
    q = spec.resolve()
    cf = transforms.canonicalize(q)
    qc = transforms.apply_unitary(q, cf.unitary_used)
    overlap_defect = 1.0 - abs(qc.overlap(cf.state()))
    u = cf.unitary_used
    plates, fit = transforms.plate_sequence(u)
    return {
        "command": "canonicalize",
        "input": spec.echo(),
        "canonical": {
            "lambda_plus": cf.lambda_plus,
            "lambda_minus": cf.lambda_minus,
            "phi": cf.phi,
            "phi_undefined": cf.phase_undefined,
            "unitary": [[[z.real, z.imag] for z in row] for row in u.tolist()],
            "plates_deg": {"qwp_first": math.degrees(plates[0]), "hwp": math.degrees(plates[1]),
                           "qwp_last": math.degrees(plates[2]), "fit_residual": fit},
        },
        "checks": [
            _check("overlap", overlap_defect, tols["overlap"]),
            _check("c2_after", abs(qc.c2), tols["overlap"]),
        ],
    }


def _setting_for(angle_deg: float) -> measurement.MeasurementSetting:
    return measurement.MeasurementSetting(math.radians(angle_deg))


def cmd_simulate(spec: QutritSpec, n: int, seed: int, angles=(0.0, 45.0), shifted=False, tols=None) -> dict:
    """Canonicalize, sample every angle with ``n`` trials, then estimate."""
    if n < 1:
        raise InvalidTrials(f"need at least one trial, got {n}")
    q = spec.resolve()
    cf = transforms.canonicalize(q)
    qc = transforms.apply_unitary(q, cf.unitary_used)
    settings = [_setting_for(a) for a in angles]
    if shifted:
        settings.append(measurement.TURNED_45_SHIFTED)
    seeds = np.random.SeedSequence(seed).generate_state(len(settings))
    records = [(s, measurement.sample_counts(qc, s, n, int(sd))) for s, sd in zip(settings, seeds)]
    est = measurement.estimate(records)
    block = {
        "lambda_plus_hat": est.lambda_plus_hat,
        "lambda_minus_hat": est.lambda_minus_hat,
        "phi_hat": est.phi_hat,
        "phi_identifiable": est.phi_identifiable,
        "phi_sign_ambiguous": est.phi_sign_ambiguous,
        "std_errors": {k: (None if math.isinf(v) else v) for k, v in est.std_errors.items()},
        "n_used": est.n_used,
    }
    return {
        "command": "simulate",
        "input": spec.echo(),
        "trials": n,
        "seed": seed,
        "angles_deg": list(angles) + (["45+retarder"] if shifted else []),
        "true": {"lambda_plus": cf.lambda_plus, "lambda_minus": cf.lambda_minus,
                 "phi": cf.phi, "phi_undefined": cf.phase_undefined},
        "counts": [{"angle_deg": math.degrees(s.basis_angle), "retarder": s.extra_retardation is not None,
                    "both_t": r.n_both_t, "both_r": r.n_both_r, "coinc": r.n_coinc} for s, r in records],
        "estimate": block,
        "checks": [],
    }


# ---------------------------------------------------------------- selftest

def golden_fixtures():
    """(name, state, expected lambda+, expected modes) from the worked examples."""
    out = []
    r2 = 1 / SQRT2
    out.append(("hv", core.make_qutrit(0, 1, 0), 0.5, ((r2, r2), (-1j * r2, 1j * r2))))
    for mag, p1, p3 in ((0.8, 0.3, -1.1), (0.95, 2.0, 3.0), (0.6, -2.5, 0.4)):
        q = family_state("c2zero", (mag, p1, p3))
        h, v = (cmath.exp(0.5j * p1), 0), (0, cmath.exp(0.5j * p3))
        lp = max(mag * mag, 1 - mag * mag)
        out.append((f"c2zero({mag},{p1},{p3})", q, lp, (h, v) if mag * mag >= 0.5 else (v, h)))
    for th, ph in ((0.5, 0.7), (math.pi / 3, -2.0), (2.5, math.pi / 2)):
        q = family_state("c3zero", (th, ph))
        ct = math.cos(th)
        lp = (1 + abs(ct)) ** 2 / (2 * (1 + ct * ct))
        m1 = (math.cos(th / 2), cmath.exp(1j * ph) * math.sin(th / 2))
        m2 = (-1j * math.sin(th / 2), 1j * cmath.exp(1j * ph) * math.cos(th / 2))
        modes = (m1, m2) if ct >= 0 else (m2, m1)
        out.append((f"c3zero({th:.4f},{ph:.4f})", q, lp, modes))
    return out


def _mode_err(psi, expected):
    a, b = expected
    return min(math.hypot(abs(psi.alpha - s * a), abs(psi.beta - s * b)) for s in (1, -1))


def run_selftest(n_random=1000, seed=0, fixtures=None, out=None) -> bool:
    out = sys.stdout if out is None else out
    fixtures = golden_fixtures() if fixtures is None else fixtures
    ok_all = True
    rows = []
    for name, q, lp, modes in fixtures:
        d = core.decompose(q)
        err = max(abs(d.lambda_plus - lp), _mode_err(d.mode_plus, modes[0]), _mode_err(d.mode_minus, modes[1]))
        ok = err <= 1e-10
        rows.append((name, err, 1e-10, ok))
    rng = np.random.default_rng(seed)
    worst = {"oracle": 0.0, "kernel": 0.0, "magic": 0.0, "recon": 0.0}
    for _ in range(n_random):
        q = measurement.haar_qutrit(rng)
        d = core.decompose(q)
        worst["oracle"] = max(worst["oracle"], oracle.compare_decompositions(d, oracle.con_eigen_modes(q), q))
        worst["kernel"] = max(worst["kernel"], *(core.kernel_residual(q, lam, psi) for lam, psi in d.pairs))
        worst["magic"] = max(worst["magic"], core.magic_residual(q))
        worst["recon"] = max(worst["recon"], 1.0 - abs(core.reconstruct(d).overlap(q)))
    if n_random:
        for key, tol in (("oracle", 1e-9), ("kernel", core.KERNEL_TOL), ("magic", 1e-12), ("recon", core.RECON_TOL)):
            rows.append((f"random x{n_random}: {key}", worst[key], tol, worst[key] <= tol))
    width = max(len(r[0]) for r in rows)
    for name, err, tol, ok in rows:
        ok_all &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {err:.2e} <= {tol:.0e}", file=out)
    return ok_all


# ---------------------------------------------------------------- printing

def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def print_report(rep: dict, out=None):
    out = sys.stdout if out is None else out

    def walk(obj, indent=0):
        pad = "  " * indent
        for k, v in obj.items():
            if k == "checks":
                continue
            if isinstance(v, dict):
                print(f"{pad}{k}:", file=out)
                walk(v, indent + 1)
            elif isinstance(v, list) and v and isinstance(v[0], dict):
                print(f"{pad}{k}:", file=out)
                for item in v:
                    print(f"{pad}  - " + ", ".join(f"{a}={_fmt(b)}" for a, b in item.items()), file=out)
            else:
                print(f"{pad}{k}: {_fmt(v)}", file=out)

    walk(rep)
    for c in rep.get("checks", []):
        print(f"{'PASS' if c['ok'] else 'FAIL'}  {c['name']:<15} {c['value']:.3e} <= {c['tol']:.0e}", file=out)


# ---------------------------------------------------------------- entry point

def build_parser():
    p = argparse.ArgumentParser(prog="qutrit-schmidt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def state_args(sp):
        sp.add_argument("--input", metavar="FILE", help="JSON document with 'amplitudes' or 'family'/'params'")
        sp.add_argument("--amplitudes", nargs=3, metavar="Z", help="c1 c2 c3 as re,im or mag@deg")
        sp.add_argument("--family", choices=["c2zero", "c3zero", "hv", "random"])
        sp.add_argument("--params", nargs="*", type=float, help="family parameters, angles in degrees")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", action="store_true", help="emit JSON instead of text")
        for name in DEFAULT_TOLS:
            sp.add_argument(f"--tol-{name}", type=float, default=None)

    for name in ("decompose", "canonicalize"):
        state_args(sub.add_parser(name))
    sim = sub.add_parser("simulate")
    state_args(sim)
    sim.add_argument("--trials", type=int, default=10**6)
    sim.add_argument("--angles", type=lambda s: [float(a) for a in s.split(",")], default=[0.0, 45.0],
                     help="comma-separated splitter angles in degrees")
    sim.add_argument("--resolve-sign", action="store_true",
                     help="add a 45 degree run behind a pi/4 retarder to fix the sign of phi")
    st = sub.add_parser("selftest")
    st.add_argument("--random", type=int, default=1000, metavar="K")
    st.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "selftest":
        return 0 if run_selftest(args.random, args.seed) else 1
    tols = {k: getattr(args, f"tol_{k}") for k in DEFAULT_TOLS if getattr(args, f"tol_{k}") is not None}
    try:
        spec = spec_from_args(args)
        if args.command == "decompose":
            rep = cmd_decompose(spec, tols)
        elif args.command == "canonicalize":
            rep = cmd_canonicalize(spec, tols)
        else:
            rep = cmd_simulate(spec, args.trials, args.seed, args.angles, args.resolve_sign, tols)
    except (ParseError, InvalidTrials, MissingSetting) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        print_report(rep)
    failed = [c["name"] for c in rep["checks"] if not c["ok"]]
    if failed:
        print("tolerance violation: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
