"""Command-line front end: state specs in, verdicts and sweep tables out.

Spec files are single JSON objects.  A state spec:

    {"family": "squeezed_thermal", "params": {"a": 0.5, "b": 0, "beta": 1.0},
     "cutoffs": "auto"}

A sweep spec adds a swept parameter:

    {"family": "squeezed_vacuum", "params": {"b": 0},
     "sweep": {"param": "a", "min": 0.0, "max": 1.0, "steps": 51},
     "cutoffs": "auto"}

Families and parameters (all numbers; complex entries split into _re/_im):
    coherent:         z1_re, z1_im, z2_re, z2_im
    number:           n1, n2
    thermal:          beta
    squeezed_vacuum:  a, b
    squeezed_thermal: a, b, beta
    pair_coherent:    zeta_re, zeta_im, q
    kerr_coherent:    z_re, z_im, alpha_t, beta_t

Auto cutoffs start at 20 per mode and double until the state's tail_mass is
below 1e-10, capped at NONCLASS_MAX_CUTOFF (default 120) per mode; the final
cutoffs are recorded in the output header comments.  Exit codes: 2 on parse
errors, 3 when no admissible cutoff exists under the cap.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import classify, moments, oracles
from .errors import CutoffTooSmall, NonclassError, VacuumMode
from .fock import (FockSpace, State, coherent_state, kerr_evolve, number_state,
                   pair_coherent, squeezed_thermal, squeezed_vacuum,
                   thermal_state)

AUTO_START = 20
AUTO_TAIL = 1e-10
DEFAULT_CUTOFF_CAP = 120
CUTOFF_CAP_ENV = "NONCLASS_MAX_CUTOFF"

FAMILIES = ("coherent", "number", "thermal", "squeezed_vacuum",
            "squeezed_thermal", "pair_coherent", "kerr_coherent")

SWEEP_COLUMNS = ("param_value", "least_eig", "A00", "A11", "A22", "A33",
                 "min_projection", "mandel_q_mode1", "mandel_q_mode2",
                 "squeezing_onset_marker")


class SpecError(ValueError):
    """Malformed spec file."""


@dataclass(frozen=True)
class StateSpec:
    family: str
    params: dict
    cutoffs: tuple | str  # (c1, c2) or "auto"

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpec":
        if not isinstance(d, dict):
            raise SpecError("spec must be a JSON object")
        family = d.get("family")
        if family not in FAMILIES:
            raise SpecError(f"family must be one of {FAMILIES}, got {family!r}")
        params = d.get("params", {})
        if not isinstance(params, dict) or not all(
                isinstance(v, (int, float)) for v in params.values()):
            raise SpecError("params must be a name -> number map")
        cutoffs = d.get("cutoffs", "auto")
        if cutoffs != "auto":
            if (not isinstance(cutoffs, (list, tuple)) or len(cutoffs) != 2
                    or not all(isinstance(c, int) and c >= 0 for c in cutoffs)):
                raise SpecError('cutoffs must be "auto" or a pair of nonnegative ints')
            cutoffs = (cutoffs[0], cutoffs[1])
        return cls(family=family, params=dict(params), cutoffs=cutoffs)

    def to_dict(self) -> dict:
        cut = "auto" if self.cutoffs == "auto" else list(self.cutoffs)
        return {"family": self.family, "params": dict(self.params), "cutoffs": cut}


@dataclass(frozen=True)
class SweepSpec:
    base: StateSpec
    param: str
    lo: float
    hi: float
    steps: int

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        sween = d.get("sweep")
        if not isinstance(sween, dict):
            raise SpecError("sweep spec needs a 'sweep' object")
        param = sween.get("param")
        if not isinstance(param, str):
            raise SpecError("sweep.param must be a string")
        try:
            lo, hi = float(sween["min"]), float(sween["max"])
            steps = int(sween["steps"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"sweep needs numeric min/max/steps: {exc}") from exc
        if steps < 2:
            raise SpecError("sweep.steps must be >= 2")
        if not lo < hi:
            raise SpecError("sweep.min must be < sweep.max")
        base = StateSpec.from_dict({k: v for k, v in d.items() if k != "sweep"})
        return cls(base=base, param=param, lo=lo, hi=hi, steps=steps)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


def cutoff_cap() -> int:
    raw = os.environ.get(CUTOFF_CAP_ENV)
    if raw is None:
        return DEFAULT_CUTOFF_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise SpecError(f"{CUTOFF_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise SpecError(f"{CUTOFF_CAP_ENV} must be nonnegative")
    return cap


def _build_on(space: FockSpace, spec: StateSpec) -> State:
    p = spec.params

    def get(name, default=None):
        if name in p:
            return p[name]
        if default is None:
            raise SpecError(f"family {spec.family!r} requires parameter {name!r}")
        return default

    if spec.family == "coherent":
        z1 = complex(get("z1_re", 0.0), get("z1_im", 0.0))
        z2 = complex(get("z2_re", 0.0), get("z2_im", 0.0))
        return coherent_state(space, z1, z2)
    if spec.family == "number":
        return number_state(space, int(get("n1")), int(get("n2")))
    if spec.family == "thermal":
        return thermal_state(space, float(get("beta")))
    if spec.family == "squeezed_vacuum":
        return squeezed_vacuum(space, float(get("a")), float(get("b", 0.0)))
    if spec.family == "squeezed_thermal":
        return squeezed_thermal(space, float(get("a")), float(get("b", 0.0)),
                                float(get("beta")))
    if spec.family == "pair_coherent":
        zeta = complex(get("zeta_re", 0.0), get("zeta_im", 0.0))
        return pair_coherent(space, zeta, int(get("q")))
    if spec.family == "kerr_coherent":
        z = complex(get("z_re", 0.0), get("z_im", 0.0))
        base = coherent_state(space, z, 0.0)
        return kerr_evolve(base, float(get("alpha_t", 0.0)),
                           float(get("beta_t", 0.0)), 1.0)
    raise SpecError(f"unknown family {spec.family!r}")


def build_state(spec: StateSpec) -> State:
    """Build the state, growing cutoffs per the auto policy when requested."""
    if spec.cutoffs != "auto":
        return _build_on(FockSpace(*spec.cutoffs), spec)
    cap = cutoff_cap()
    n = min(AUTO_START, cap) if cap else 0
    tried = []
    while True:
        try:
            st = _build_on(FockSpace(n, n), spec)
            if st.tail_mass < AUTO_TAIL:
                return st
            tried.append((n, st.tail_mass))
        except CutoffTooSmall:
            tried.append((n, None))
        if n >= cap:
            raise CutoffTooSmall(
                f"auto cutoff failed to reach tail_mass < {AUTO_TAIL} within "
                f"cap {cap} per mode (tried {tried})")
        n = min(2 * n, cap)


def _analysis_bundle(state: State, samples: int, seed: int) -> dict:
    n = moments.stokes_vector(state).n
    cov = moments.covariance_matrices(state)
    a = classify._a_from(cov, n)
    q = moments.q_matrix(state).q
    least = classify.least_eigenvalue(a)
    minproj, _ = classify.min_projection(a, samples, seed=seed)
    lee = classify._lee_from_parts(state, a.a, n, q)

    def q_mode(mode):
        from .su2 import ModeVector
        alpha = ModeVector(np.eye(2, dtype=complex)[mode - 1])
        try:
            return classify._mandel_from_parts(a.a, n, alpha)
        except VacuumMode:
            return float("nan")

    vd = classify.verdict(state, classify.VerdictConfig(n_samples=samples, seed=seed))
    return {
        "cutoffs": [state.space.cutoff1, state.space.cutoff2],
        "tail_mass": state.tail_mass,
        "n_mu": [float(v) for v in n],
        "a_matrix": [[float(v) for v in row] for row in a.a],
        "least_eig": least,
        "min_projection": minproj,
        "min_projection_samples": samples,
        "mandel_q_mode1": q_mode(1),
        "mandel_q_mode2": q_mode(2),
        "lee": {"lhs": lee.lhs, "identity_residual": lee.identity_residual,
                "a33": lee.a33, "n3": lee.n3},
        "factorial_violations": [
            {"mode": mode, "m": v.m, "n": v.n, "lhs": v.lhs, "rhs": v.rhs,
             "kind": v.kind} for mode, v in vd.factorial_violations],
        "local_pn_violations": [
            {"mode": v.mode, "n0": v.n0, "least_eig": v.least_eig}
            for v in vd.local_pn_violations],
        "flags": {
            "any_state_psd_ok": vd.any_state_psd_ok,
            "A_psd": vd.A_psd,
            "lee_violated": vd.lee_violated,
            "sharpened_lee_violated": vd.sharpened_lee_violated,
        },
        "verdict": vd.verdict_text,
    }


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def cmd_analyze(spec_path: str, samples: int, seed: int, out=None) -> int:
    spec = StateSpec.from_dict(_load_json(spec_path))
    state = build_state(spec)
    b = _analysis_bundle(state, samples, seed)
    w = (out or sys.stdout).write
    w(f"family: {spec.family}  params: {spec.params}\n")
    w(f"cutoffs: {tuple(b['cutoffs'])}  tail_mass: {_fmt(b['tail_mass'])}\n")
    w(f"n_mu: [{', '.join(_fmt(v) for v in b['n_mu'])}]\n")
    w("A matrix:\n")
    for row in b["a_matrix"]:
        w("  [" + ", ".join(f"{v: .9e}" for v in row) + "]\n")
    w(f"least eigenvalue: {_fmt(b['least_eig'])}\n")
    w(f"min projection ({b['min_projection_samples']} samples): "
      f"{_fmt(b['min_projection'])}\n")
    w(f"Mandel Q mode 1: {_fmt(b['mandel_q_mode1'])}   "
      f"mode 2: {_fmt(b['mandel_q_mode2'])}\n")
    lee = b["lee"]
    w(f"Lee combination: {_fmt(lee['lhs'])} (= A33 + n3^2; "
      f"identity residual {_fmt(lee['identity_residual'])})\n")
    w(f"factorial violations: {len(b['factorial_violations'])}   "
      f"local p(n) violations: {len(b['local_pn_violations'])}\n")
    w(f"verdict: {b['verdict']}\n")
    w("--- machine readable ---\n")
    w(json.dumps(b, indent=2, sort_keys=True) + "\n")
    return 0


def sweep_rows(spec: SweepSpec, samples: int, seed: int):
    """One row of sweep columns per parameter value, plus the cutoffs used."""
    rows = []
    cuts = []
    for value in spec.values():
        params = dict(spec.base.params)
        params[spec.param] = float(value)
        st_spec = StateSpec(spec.base.family, params, spec.base.cutoffs)
        state = build_state(st_spec)
        n = moments.stokes_vector(state).n
        cov = moments.covariance_matrices(state)
        a = classify._a_from(cov, n)
        least = classify.least_eigenvalue(a)
        minproj, _ = classify.min_projection(a, samples, seed=seed)

        def q_mode(mode):
            from .su2 import ModeVector
            alpha = ModeVector(np.eye(2, dtype=complex)[mode - 1])
            try:
                return classify._mandel_from_parts(a.a, n, alpha)
            except VacuumMode:
                return float("nan")

        marker = _squeezing_marker(st_spec, params)
        rows.append((float(value), least, a.a[0, 0], a.a[1, 1], a.a[2, 2],
                     a.a[3, 3], minproj, q_mode(1), q_mode(2), marker))
        cuts.append((float(value), state.space.cutoff1, state.space.cutoff2))
        del state
    return rows, cuts


def _squeezing_marker(spec: StateSpec, params: dict) -> int:
    if spec.family == "squeezed_thermal":
        onset = oracles.squeezing_onset(float(params["beta"]))
        return 1 if float(params.get("a", 0.0)) >= onset else 0
    if spec.family == "squeezed_vacuum":
        return 1 if float(params.get("a", 0.0)) > 0 else 0
    return 0


def cmd_sweep(spec_path: str, out_csv: str, samples: int, seed: int) -> int:
    spec = SweepSpec.from_dict(_load_json(spec_path))
    rows, cuts = sweep_rows(spec, samples, seed)
    lines = [f"# family={spec.base.family} sweep={spec.param} "
             f"range=[{_fmt(spec.lo)},{_fmt(spec.hi)}] steps={spec.steps} "
             f"fixed={json.dumps(spec.base.params, sort_keys=True)} "
             f"samples={samples} seed={seed}"]
    runs = []
    for value, c1, c2 in cuts:
        if not runs or runs[-1][1] != (c1, c2):
            runs.append((value, (c1, c2)))
    lines.append("# cutoffs: " + "; ".join(
        f"from {_fmt(v)}: ({c[0]},{c[1]})" for v, c in runs))
    lines.append(",".join(SWEEP_COLUMNS))
    for row in rows:
        lines.append(",".join(_fmt(v) if i < 9 else str(int(v))
                              for i, v in enumerate(row)))
    with open(out_csv, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot parse {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# selftest


def _selftest_checks():
    """(name, callable) pairs; each callable raises on failure."""
    import numpy.testing as npt

    from .fock import make_space
    from .moments import OrderingTensors, covariance_matrices
    from .errors import DecompositionMismatch

    def builders_invariants():
        sp6 = make_space(25, 25)
        for st in (coherent_state(sp6, 1.0, 0.5j), thermal_state(sp6, 1.5),
                   number_state(sp6, 2, 1), squeezed_vacuum(sp6, 0.3),
                   pair_coherent(sp6, 1.0, 1)):
            st.validate()

    def coherent_a_null():
        st = coherent_state(make_space(18, 18), 1.0, 0.8j)
        a = classify.a_matrix(st)
        assert np.abs(a.a).max() < 1e-9, np.abs(a.a).max()

    def thermal_q():
        st = thermal_state(make_space(30, 30), 1.0)
        nbar = oracles.reference_q("thermal", beta=1.0)
        q1 = classify.mandel_q(st, 1)
        assert abs(q1 - nbar) < 1e-9, q1

    def number_q():
        st = number_state(make_space(8, 8), 5, 0)
        assert abs(classify.mandel_q(st, 1) + 1.0) < 1e-12

    def squeezed_vacuum_oracle():
        st = squeezed_vacuum(make_space(60, 60), 0.5)
        a = classify.a_matrix(st)
        ref = oracles.a_matrix_squeezed_vacuum(0.5)
        rel = np.abs(np.diag(a.a) - ref) / np.abs(ref)
        assert rel.max() < 1e-8, rel

    def squeezed_thermal_oracle():
        st = squeezed_thermal(make_space(80, 80), 0.5, 0.0, 1.0)
        a = classify.a_matrix(st)
        ref = oracles.a_matrix_squeezed_thermal(0.5, 1.0)
        rel = np.abs(np.diag(a.a) - ref) / np.abs(ref)
        assert rel.max() < 1e-8, rel

    def lee_number_11():
        st = number_state(make_space(6, 6), 1, 1)
        rep = classify.lee_report(st)
        npt.assert_allclose(rep.lhs, -2.0, atol=1e-12)

    def pair_coherent_subpoissonian():
        st = pair_coherent(make_space(40, 40), 2.0, 0)
        assert classify.mandel_q(st, 2) < 0

    def projection_identity_spot():
        from .su2 import ModeVector, single_mode_number_ops
        from .fock import expect
        st = squeezed_vacuum(make_space(30, 30), 0.4)
        a = classify.a_matrix(st)
        alpha = ModeVector.normalized(np.array([0.6, 0.8j]))
        n_op, n_sq = single_mode_number_ops(st.space, alpha)
        mean = expect(st, n_op).real
        var = expect(st, n_sq).real - mean ** 2
        lhs = classify.projection_value(a, alpha)
        assert abs(lhs - (var - mean)) < 1e-9

    def corrupted_tensor_flagged():
        st = coherent_state(make_space(15, 15), 0.9, 0.2)
        bad_l = moments.ORDERING.l.copy()
        bad_l[0, 0, 0] += 1e-3
        bad = OrderingTensors(t=moments.ORDERING.t, l=bad_l, eps0=moments.ORDERING.eps0)
        try:
            covariance_matrices(st, tensors=bad)
        except DecompositionMismatch:
            return
        raise AssertionError("corrupted ordering tensor was not flagged")

    def cutoff_error_path():
        old = os.environ.get(CUTOFF_CAP_ENV)
        os.environ[CUTOFF_CAP_ENV] = "5"
        try:
            build_state(StateSpec("squeezed_vacuum", {"a": 1.0}, "auto"))
        except CutoffTooSmall:
            return
        finally:
            if old is None:
                os.environ.pop(CUTOFF_CAP_ENV, None)
            else:
                os.environ[CUTOFF_CAP_ENV] = old
        raise AssertionError("cutoff cap 5 did not surface CutoffTooSmall")

    return [
        ("builder invariants", builders_invariants),
        ("coherent fluctuation-matrix null", coherent_a_null),
        ("thermal Mandel Q = nbar", thermal_q),
        ("number-state Mandel Q = -1", number_q),
        ("squeezed-vacuum diagonal oracle", squeezed_vacuum_oracle),
        ("squeezed-thermal diagonal oracle", squeezed_thermal_oracle),
        ("two-photon balanced state violates Lee", lee_number_11),
        ("pair-coherent mode-2 subpoissonian", pair_coherent_subpoissonian),
        ("projection identity", projection_identity_spot),
        ("corrupted ordering tensor flagged", corrupted_tensor_flagged),
        ("cutoff cap error path", cutoff_error_path),
    ]


def cmd_selftest(out=None) -> int:
    out = out or sys.stdout
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            out.write(f"FAIL {name}: {exc}\n")
        else:
            out.write(f"PASS {name}\n")
    out.write(f"{'FAILED' if failures else 'OK'} "
              f"({len(_selftest_checks()) - failures} passed, {failures} failed)\n")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nonclass",
        description="Two-mode photon-number fluctuation analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="verdict report for one state spec")
    p_an.add_argument("spec")
    p_an.add_argument("--samples", type=int, default=100_000)
    p_an.add_argument("--seed", type=int, default=7)

    p_sw = sub.add_parser("sweep", help="CSV table over a swept parameter")
    p_sw.add_argument("spec")
    p_sw.add_argument("--out", required=True)
    p_sw.add_argument("--samples", type=int, default=100_000)
    p_sw.add_argument("--seed", type=int, default=7)

    sub.add_parser("selftest", help="run the built-in invariant and oracle suite")

    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args.spec, args.samples, args.seed)
        if args.command == "sweep":
            return cmd_sweep(args.spec, args.out, args.samples, args.seed)
        return cmd_selftest()
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except CutoffTooSmall as exc:
        print(f"cutoff error: {exc}", file=sys.stderr)
        return 3
    except NonclassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
