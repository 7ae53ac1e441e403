"""Batch command-line front end.

Subcommands drive the library over parameter scans and emit CSV:

- ``wigner``      phase-space grid of cross-Wigner values and probabilities
- ``spectral``    exact vs semiclassical spectral Wigner along a position cut
- ``transition``  classical/Monte-Carlo transition densities over a centre scan
- ``caustic``     Airy-resolved transition density across the fold
- ``polygon``     randomized polygon invariance, closure, and tangency suites
- ``acceptance``  run the acceptance checks and print one PASS/FAIL line each

Configuration is a flat ``key = value`` text file; any key can be overridden
by an environment variable ``PHASEFOLD_<KEY>`` or a ``--set key=value`` flag.
Precedence: command line > environment > file > built-in defaults.  With a
fixed configuration (including ``seed``) every command writes a byte-identical
CSV on rerun: floats are printed with 17 significant digits, rows appear in
scan order, and the final ``status`` column explains any NaN cell.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .caustic import (
    CausticFrame1D,
    fringe_averaged_density,
    transition_density_airy_closed,
    transition_density_airy_quadrature,
)
from .core import harmonic_model, quartic_model, spherical_model
from .oracle import (
    EigenBasis1D,
    QuadratureConvergenceError,
    TruncationError,
    reflection_matrix_element,
    spectral_wigner_exact,
)
from .polygons import (
    _loop_area,
    closure_residual,
    symplectic_area,
    tangency_residual,
    trajectory_polygon_centres,
    vertices_from_even_centres,
)
from .section import build_section
from .spectral import (
    WidthDomainError,
    airy_spectral_smoothed,
    airy_spectral_wigner,
    airy_width,
    classical_spectral_wigner,
)
from .transition import (
    CausticTangencyError,
    TransitionQuery,
    transition_density_1d,
    transition_density_mc,
    transition_density_spherical,
)

ENV_PREFIX = "PHASEFOLD_"

# Offset between per-row Monte-Carlo seeds in a scan: rows are independent
# streams derived from the configured base seed.
ROW_SEED_STRIDE = 1000003


class ConfigError(ValueError):
    """A missing or malformed configuration key (the message names it)."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _parse_value(text):
    text = text.strip()
    if "," in text:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def read_config_file(path):
    """Parse a flat ``key = value`` file ('#' comments, blank lines ignored)."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("%s:%d: expected key=value, got %r" % (path, lineno, raw.strip()))
            key, _, value = line.partition("=")
            values[key.strip().lower()] = _parse_value(value)
    return values


class RunConfig:
    """Merged scan configuration with typed, key-naming accessors."""

    def __init__(self, values):
        self.values = dict(values)

    @classmethod
    def gather(cls, config_path=None, overrides=(), environ=None):
        """Merge file, environment, and CLI pairs (later sources win)."""
        values = {}
        if config_path:
            values.update(read_config_file(config_path))
        environ = os.environ if environ is None else environ
        for name, raw in sorted(environ.items()):
            if name.startswith(ENV_PREFIX) and len(name) > len(ENV_PREFIX):
                values[name[len(ENV_PREFIX):].lower()] = _parse_value(raw)
        for pair in overrides:
            if "=" not in pair:
                raise ConfigError("--set expects key=value, got %r" % pair)
            key, _, value = pair.partition("=")
            values[key.strip().lower()] = _parse_value(value)
        return cls(values)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def float_(self, key, default=None):
        value = self.values.get(key, default)
        if value is None:
            raise ConfigError("missing required config key %r" % key)
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError("config key %r must be a number, got %r" % (key, value))

    def int_(self, key, default=None):
        value = self.values.get(key, default)
        if value is None:
            raise ConfigError("missing required config key %r" % key)
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError("config key %r must be an integer, got %r" % (key, value))
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError("config key %r must be an integer, got %r" % (key, value))

    def floats_(self, key, default=None):
        """A tuple of floats; a scalar value is promoted to a 1-tuple."""
        value = self.values.get(key, default)
        if value is None:
            raise ConfigError("missing required config key %r" % key)
        if isinstance(value, (int, float)):
            return (float(value),)
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError("config key %r must be a number list, got %r" % (key, value))

    def path_(self, key="output"):
        value = self.values.get(key)
        if not value or not isinstance(value, str):
            raise ConfigError("missing required config key %r (an output file path)" % key)
        return value

    def positive_(self, key, default=None):
        value = self.float_(key, default)
        if value <= 0:
            raise ConfigError("config key %r must be positive, got %r" % (key, value))
        return value


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _cell(value):
    if isinstance(value, str):
        return value.replace(",", ";").replace("\n", " ")
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header, rows):
    """Write rows (status column last) with 17-significant-digit floats.

    Guards the output contract: a NaN in any value cell requires the row's
    status cell to say why.
    """
    lines = [",".join(header)]
    for row in rows:
        cells = [_cell(v) for v in row]
        if len(cells) != len(header):
            raise ValueError("row width %d does not match header width %d" % (len(cells), len(header)))
        if any(c == "nan" for c in cells[:-1]) and cells[-1] == "ok":
            raise ValueError("NaN cell emitted without an explanatory status")
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _run_rows(task, params, workers):
    if workers <= 1:
        return [task(p) for p in params]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, params))


def _status_join(parts):
    return "; ".join(parts) if parts else "ok"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_wigner(config):
    """Cross-Wigner grid scan; returns (header, rows)."""
    hbar = config.positive_("hbar", 1.0)
    omega = config.positive_("omega", 1.0)
    k = config.int_("k", 0)
    l = config.int_("l", k)
    k_max = config.int_("k_max", 60)
    if k < 0 or l < 0 or k_max < 0:
        raise ConfigError("config keys 'k', 'l', 'k_max' must be nonnegative")
    qs = np.linspace(config.float_("q_min", -3.0), config.float_("q_max", 3.0),
                     config.int_("q_count", 13))
    ps = np.linspace(config.float_("p_min", -3.0), config.float_("p_max", 3.0),
                     config.int_("p_count", 13))
    basis = EigenBasis1D(omega=omega, hbar=hbar, max_index=max(k, l, k_max))
    header = [
        "q[canonical]", "p[canonical]",
        "wigner_re[1/action]", "wigner_im[1/action]",
        "probability[1]", "sum_rule[1]",
        "hermiticity_residual[1/action]", "status",
    ]

    def one(point):
        q, p = point
        x = np.array([p, q])
        try:
            rho = reflection_matrix_element(basis, k, l, x, method="closed")
            rho_t = reflection_matrix_element(basis, l, k, x, method="closed")
            w = rho / (math.pi * hbar)
            herm = abs(w - np.conj(rho_t / (math.pi * hbar)))
            row_sum = 0.0
            for lp in range(k_max + 1):
                row_sum += abs(reflection_matrix_element(basis, k, lp, x, method="closed")) ** 2
            return [q, p, w.real, w.imag, abs(rho) ** 2, row_sum, herm, "ok"]
        except Exception as exc:  # surfaced per-row
            return [q, p, math.nan, math.nan, math.nan, math.nan, math.nan,
                    "error: %s" % exc]

    params = [(q, p) for q in qs for p in ps]
    return header, _run_rows(one, params, config.int_("workers", 1))


def cmd_spectral(config):
    """Exact vs semiclassical spectral Wigner along the q axis."""
    hbar = config.positive_("hbar", 0.05)
    omega = config.positive_("omega", 1.0)
    energy = config.positive_("energy", 20.0)
    eps = config.positive_("epsilon", 3.0 * hbar * omega)
    qs = np.linspace(config.float_("q_min", 0.0),
                     config.float_("q_max", math.sqrt(2.2 * energy / omega)),
                     config.int_("q_count", 40))
    max_index = config.int_("max_index",
                            int(35.0 * energy / (hbar * omega)) + 64)
    basis = EigenBasis1D(omega=omega, hbar=hbar, max_index=max_index)
    model = spherical_model(omega)
    header = [
        "q[canonical]", "exact[1/energy]", "classical[1/energy]",
        "airy[1/energy]", "airy_smoothed[1/energy]", "gamma[energy]", "status",
    ]

    def one(q):
        x = np.array([0.0, q])
        note = []
        try:
            exact = float(spectral_wigner_exact(basis, energy, eps, x))
        except TruncationError as exc:
            exact = math.nan
            note.append("exact: %s" % exc)
        classical = float(classical_spectral_wigner(model, energy, x, eps))
        try:
            gamma = float(airy_width(model, x, hbar=hbar))
            airy = float(airy_spectral_wigner(model, energy, x, hbar=hbar))
            smoothed = float(airy_spectral_smoothed(model, energy, x, eps, hbar=hbar))
        except WidthDomainError as exc:
            gamma = airy = smoothed = math.nan
            note.append("airy width: %s" % exc)
        return [q, exact, classical, airy, smoothed, gamma, _status_join(note)]

    return header, _run_rows(one, list(qs), config.int_("workers", 1))


def _scan_values(config, key, default_min, default_max, default_count):
    explicit = config.get(key)
    if explicit is not None:
        return np.asarray(config.floats_(key), dtype=float)
    count = config.int_(key + "_count", default_count)
    return np.linspace(config.float_(key + "_min", default_min),
                       config.float_(key + "_max", default_max), count)


def cmd_transition(config):
    """Classical and Monte-Carlo transition densities over a centre scan."""
    hbar = config.positive_("hbar", 1.0)
    omega = config.positive_("omega", 1.0)
    ndof = config.int_("ndof", 2)
    if ndof < 1:
        raise ConfigError("config key 'ndof' must be at least 1")
    lam = config.float_("lambda", 0.0)
    energy = config.positive_("energy", 2.0)
    energy_prime = config.positive_("energy_prime", energy)
    samples = config.int_("samples", 200000)
    seed = config.int_("seed", 1234)
    q_tilde = _scan_values(config, "q_tilde", 0.1,
                           0.5 * (math.sqrt(2 * energy / omega) + math.sqrt(2 * energy_prime / omega)) * 1.1,
                           12)
    if lam == 0.0:
        model = spherical_model(omega, ndof)
    else:
        model = quartic_model((omega,) * ndof, lam)
    header = [
        "q_tilde[canonical]", "q_s[canonical]", "y_m_sq[canonical^2]",
        "p_classical[1/energy^2]", "p_mc[1/energy^2]", "p_mc_stderr[1/energy^2]",
        "caustic_flag[1]", "status",
    ]

    def one(item):
        index, qt = item
        note = []
        geom = build_section(omega, qt, energy, energy_prime)
        caustic = geom.y_m_sq <= 0.0
        centre = np.zeros(2 * ndof)
        centre[-1] = qt
        query = TransitionQuery(model, centre, energy, energy_prime, hbar)
        if ndof == 1:
            try:
                classical = transition_density_1d(query)
            except CausticTangencyError as exc:
                classical = math.nan
                caustic = True
                note.append("classical: %s" % exc)
            mc = mc_err = math.nan
            note.append("mc requires ndof >= 2")
        else:
            classical = transition_density_spherical(geom, ndof, hbar)
            try:
                mc, mc_err = transition_density_mc(
                    query, samples=samples, seed=seed + ROW_SEED_STRIDE * index)
            except (RuntimeError, ValueError) as exc:
                mc = mc_err = math.nan
                note.append("mc: %s" % exc)
        return [qt, geom.q_s, geom.y_m_sq, classical, mc, mc_err,
                int(caustic), _status_join(note)]

    params = list(enumerate(q_tilde))
    return header, _run_rows(one, params, config.int_("workers", 1))


def cmd_caustic(config):
    """Airy-resolved transition density across the fold caustic."""
    omega = config.positive_("omega", 1.0)
    energy = config.positive_("energy", 2.0)
    energy_prime = config.positive_("energy_prime", energy)
    hbars = config.floats_("hbar", (0.01,))
    q_c = 0.5 * (math.sqrt(2 * energy / omega) + math.sqrt(2 * energy_prime / omega))
    q_tilde = _scan_values(config, "q_tilde", 0.3 * q_c, 1.15 * q_c, 12)
    with_bridge = config.int_("bridge", 0) != 0
    header = [
        "hbar[action]", "q_tilde[canonical]",
        "p_quadrature[1/energy^2]", "p_closed[1/energy^2]",
        "p_classical[1/energy^2]", "p_bridge[1/energy^2]", "status",
    ]

    def one(item):
        hb, qt = item
        note = []
        frame = CausticFrame1D(omega=omega, hbar=hb, q_tilde=qt,
                               energy_plus=energy, energy_minus=energy_prime)
        closed = transition_density_airy_closed(frame)
        try:
            quad = transition_density_airy_quadrature(frame)
        except QuadratureConvergenceError as exc:
            quad = math.nan
            note.append("quadrature: %s" % exc)
        try:
            classical = transition_density_1d(TransitionQuery(
                spherical_model(omega), (0.0, qt), energy, energy_prime, hb))
        except CausticTangencyError as exc:
            classical = math.nan
            note.append("classical: %s" % exc)
        if with_bridge:
            try:
                bridge = fringe_averaged_density(frame)
            except (ValueError, QuadratureConvergenceError) as exc:
                bridge = math.nan
                note.append("bridge: %s" % exc)
        else:
            bridge = math.nan
            note.append("bridge disabled")
        return [hb, qt, quad, closed, classical, bridge, _status_join(note)]

    params = [(hb, qt) for hb in hbars for qt in q_tilde]
    return header, _run_rows(one, params, config.int_("workers", 1))


def cmd_polygon(config):
    """Randomized invariance, closure, and tangency-order suites."""
    seed = config.int_("seed", 1234)
    trials = config.int_("trials", 100)
    ndof = config.int_("ndof", 2)
    max_sides = config.int_("max_sides", 15)
    t_span = config.positive_("t", 0.1)
    steps = config.int_("steps", 8)
    max_steps = config.int_("max_steps", 64)
    if steps % 2 or steps < 2:
        raise ConfigError("config key 'steps' must be a positive even integer")
    if 4 * steps > max_steps:
        raise ConfigError("tangency fit needs 4*steps <= max_steps (= %d)" % max_steps)
    rng = np.random.Generator(np.random.Philox(key=seed))
    header = [
        "trial[1]", "sides[1]", "area[action]",
        "reflection_residual[action]", "translation_residual[action]",
        "rotation_residual[action]", "closure_spread[action]",
        "tangency_order[1]", "status",
    ]

    def plane_rotation(angles):
        n = len(angles)
        rot = np.zeros((2 * n, 2 * n))
        for j, th in enumerate(angles):
            c, s = math.cos(th), math.sin(th)
            rot[j, j] = rot[n + j, n + j] = c
            rot[j, n + j] = s
            rot[n + j, j] = -s
        return rot

    rows = []
    for trial in range(trials):
        sides = int(rng.integers(1, max_sides // 2 + 1)) * 2 + 1
        centres = rng.normal(size=(sides, 2 * ndof))
        area = symplectic_area(centres)
        refl = abs(symplectic_area(-centres) - area)
        trans = abs(symplectic_area(centres + rng.normal(size=2 * ndof)) - area)
        rot = abs(symplectic_area(
            centres @ plane_rotation(rng.uniform(0, 2 * math.pi, size=ndof)).T) - area)
        even = rng.normal(size=(sides + 1, 2 * ndof))
        gap = closure_residual(even[:2], even[2:])
        even[-1] -= 0.5 * gap
        areas = [
            float(_loop_area(vertices_from_even_centres(even, first), per_plane=False))
            for first in (even[0], even[0] + rng.normal(size=2 * ndof), rng.normal(size=2 * ndof))
        ]
        spread = max(areas) - min(areas)
        model = harmonic_model(rng.uniform(0.5, 2.0, size=ndof))
        x0 = rng.normal(size=2 * ndof)
        x0 *= (1.0 + rng.uniform()) / max(np.linalg.norm(x0), 1e-9)
        res = []
        for k_steps in (steps, 2 * steps, 4 * steps):
            chain = trajectory_polygon_centres(model, x0, t_span, k_steps)
            res.append(tangency_residual(model, t_span, k_steps, chain))
        order = float(np.polyfit(
            np.log([t_span / k for k in (steps, 2 * steps, 4 * steps)]),
            np.log(res), 1)[0])
        rows.append([trial, sides, area, refl, trans, rot, spread, order, "ok"])
    return header, rows


def cmd_acceptance(config):
    """Run the acceptance suite; one PASS/FAIL line per criterion."""
    from .acceptance import run_all

    results = run_all(printer=print)
    header = ["criterion[name]", "passed[1]", "detail[text]", "status"]
    rows = [[name, int(passed), detail, "ok"] for name, passed, detail in results]
    return header, rows


COMMANDS = {
    "wigner": cmd_wigner,
    "spectral": cmd_spectral,
    "transition": cmd_transition,
    "caustic": cmd_caustic,
    "polygon": cmd_polygon,
    "acceptance": cmd_acceptance,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phasefold",
        description="Phase-space reflection scans (CSV output).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--output", help="output CSV path (same as --set output=...)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.output:
        overrides.append("output=" + args.output)
    try:
        config = RunConfig.gather(args.config, overrides)
        command = COMMANDS[args.command]
        header, rows = command(config)
        if args.command == "acceptance":
            failed = sum(1 for row in rows if not row[1])
            if config.get("output"):
                write_csv(config.path_(), header, rows)
            return 1 if failed else 0
        write_csv(config.path_(), header, rows)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
