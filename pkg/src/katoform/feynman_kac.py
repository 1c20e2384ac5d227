"""Monte Carlo Brownian paths with killing and transport phases.

Path-integral estimators that cross-check the quadrature and matrix sides
of the package from an entirely different direction: sampled Brownian
motion.  The generator convention is Delta/2 throughout, i.e. coordinate
increments have variance h per step of size h.

Euclidean paths use exact Gaussian increments.  Hyperboloid paths take a
geodesic step: a tangent Gaussian with covariance h * Id is mapped through
the exponential map, an O(h) weak approximation.  Killing regions (a
geodesic ball, or a Euclidean half-space) stop a path at the first step
that lands outside; the exit step is recorded as the lifetime.

Streams are counter-based (Philox) keyed by (seed, worker index), so a
given configuration always reproduces the same numbers, and splitting the
path budget across workers changes the stream assignment but never
introduces order dependence; worker count 1 is the reference layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import EUCLIDEAN, HYPERBOLIC, ModelSpace

_BATCH = 1024


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class KillingRegion:
    """Survival region: an open geodesic ball, or an open half-space.

    Balls are centered on the space origin unless a center is given and
    work on every model space; half-spaces {x . normal < offset} are
    Euclidean only.
    """

    kind: str
    radius: float = 0.0
    center: tuple | None = None
    normal: tuple | None = None
    offset: float = 0.0

    def inside(self, space: ModelSpace, points: np.ndarray) -> np.ndarray:
        if self.kind == "ball":
            center = np.asarray(self.center, dtype=float) if self.center is not None \
                else space.origin()
            if space.kind == HYPERBOLIC:
                pairing = center[0] * points[:, 0] - points[:, 1:] @ center[1:]
                d = np.arccosh(np.maximum(pairing, 1.0))
            else:
                d = np.linalg.norm(points - center[None, :], axis=1)
            return d < self.radius
        if self.kind == "halfspace":
            n = np.asarray(self.normal, dtype=float)
            return points @ n < self.offset
        raise ConfigError(f"unknown killing region kind {self.kind!r}")

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "ball":
            out["radius"] = self.radius
            if self.center is not None:
                out["center"] = list(self.center)
        else:
            out["normal"] = list(self.normal)
            out["offset"] = self.offset
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "KillingRegion":
        kind = obj.get("kind")
        if kind == "ball":
            if "radius" not in obj or obj["radius"] <= 0:
                raise ConfigError("ball region needs a positive radius")
            center = obj.get("center")
            return cls(kind="ball", radius=float(obj["radius"]),
                       center=None if center is None else tuple(center))
        if kind == "halfspace":
            if "normal" not in obj:
                raise ConfigError("halfspace region needs a normal vector")
            return cls(kind="halfspace", normal=tuple(obj["normal"]),
                       offset=float(obj.get("offset", 0.0)))
        raise ConfigError(f"unknown killing region kind {kind!r}")


@dataclass(frozen=True)
class PathConfig:
    space: ModelSpace
    start: tuple
    horizon: float
    step: float
    n_paths: int
    seed: int
    workers: int = 1
    domain: KillingRegion | None = None

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")
        if self.step <= 0 or self.step > self.horizon / 10:
            raise ConfigError("step must be positive and at most horizon/10")
        ratio = self.horizon / self.step
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError("step must divide the horizon evenly")
        if self.n_paths < 100:
            raise ConfigError("need at least 100 paths")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        start = np.asarray(self.start, dtype=float)
        self.space.validate_point(start)
        object.__setattr__(self, "start", tuple(float(x) for x in start))
        if self.domain is not None:
            inside = self.domain.inside(self.space, np.asarray([self.start]))
            if not bool(inside[0]):
                raise ConfigError("start point lies outside the killing region")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.step))

    def to_json_dict(self) -> dict:
        out = {
            "space": self.space.to_json_dict(),
            "start": list(self.start),
            "horizon": self.horizon,
            "step": self.step,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "workers": self.workers,
        }
        if self.domain is not None:
            out["domain"] = self.domain.to_json_dict()
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PathConfig":
        try:
            space = ModelSpace.from_json_dict(obj["space"])
            domain = obj.get("domain")
            return cls(space=space, start=tuple(obj["start"]),
                       horizon=float(obj["horizon"]), step=float(obj["step"]),
                       n_paths=int(obj["n_paths"]), seed=int(obj["seed"]),
                       workers=int(obj.get("workers", 1)),
                       domain=None if domain is None else
                       KillingRegion.from_json_dict(domain))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed path configuration: {exc}") from exc


@dataclass
class Estimate:
    """Monte Carlo estimate with its sampling error and run accounting.

    std_error is the sample standard deviation over paths divided by
    sqrt(n_paths); for complex values it uses |X - mean|^2.  bias_bound is
    the reported step-discretization envelope (estimator-specific), and
    cap_events counts capped singular evaluations.
    """

    value: complex | float
    std_error: float
    n_effective: int
    n_paths: int = 0
    step: float = 0.0
    cap_events: int = 0
    bias_bound: float | None = None
    extras: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        if isinstance(self.value, complex):
            val = {"re": self.value.real, "im": self.value.imag}
        else:
            val = float(self.value)
        out = {
            "value": val,
            "std_error": float(self.std_error),
            "n_effective": int(self.n_effective),
            "n_paths": int(self.n_paths),
            "step": float(self.step),
            "cap_events": int(self.cap_events),
            "provenance": "monte_carlo",
        }
        if self.bias_bound is not None:
            out["bias_bound"] = float(self.bias_bound)
        out.update({k: v for k, v in self.extras.items()})
        return out


# ---------------------------------------------------------------------------
# path sampling

@dataclass
class PathBatch:
    """One batch of sampled paths.

    positions has shape (B, S+1, ambient); alive[b, k] says the path was
    still inside the region at step k (alive[:, 0] is True by config
    validation).  exit_step[b] is the first dead index, or S+1 if the path
    survived the whole horizon.
    """

    times: np.ndarray
    positions: np.ndarray
    alive: np.ndarray
    exit_step: np.ndarray


def _worker_counts(n_paths: int, workers: int) -> list[int]:
    base, rem = divmod(n_paths, workers)
    return [base + (1 if w < rem else 0) for w in range(workers)]


def _worker_rng(seed: int, worker: int) -> np.random.Generator:
    key = np.array([seed % (2 ** 64), worker], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _hyperbolic_step(points: np.ndarray, incr: np.ndarray) -> np.ndarray:
    """Geodesic step on the hyperboloid from tangent increments.

    incr holds coordinates in an orthonormal tangent frame; the frame at
    (x0, xv) maps u to (xv . u, u + (xv . u / (1 + x0)) xv), which is then
    pushed through the exponential map.
    """
    x0 = points[:, 0]
    xv = points[:, 1:]
    dot = np.einsum("bi,bi->b", xv, incr)
    tang0 = dot
    tangv = incr + (dot / (1.0 + x0))[:, None] * xv
    norm = np.sqrt(np.maximum(np.einsum("bi,bi->b", incr, incr), 1e-300))
    ch, sh = np.cosh(norm), np.sinh(norm)
    scale = sh / norm
    out = np.empty_like(points)
    out[:, 0] = ch * x0 + scale * tang0
    out[:, 1:] = ch[:, None] * xv + scale[:, None] * tangv
    # pin the points back onto the sheet against roundoff drift
    out[:, 0] = np.sqrt(1.0 + np.einsum("bi,bi->b", out[:, 1:], out[:, 1:]))
    return out


def sample_paths(config: PathConfig) -> Iterator[PathBatch]:
    """Stream batches of Brownian paths for the given configuration.

    Batches arrive in a fixed order (workers outside, fixed-size blocks
    inside), so any order-respecting reduction is reproducible.
    """
    space = config.space
    m = space.dim
    S = config.n_steps
    h = config.step
    sqrt_h = math.sqrt(h)
    start = np.asarray(config.start, dtype=float)
    times = h * np.arange(S + 1)
    for worker, count in enumerate(_worker_counts(config.n_paths, config.workers)):
        if count == 0:
            continue
        rng = _worker_rng(config.seed, worker)
        done = 0
        while done < count:
            B = min(_BATCH, count - done)
            done += B
            pos = np.empty((B, S + 1, start.size))
            pos[:, 0] = start
            increments = rng.standard_normal((B, S, m)) * sqrt_h
            if space.kind == EUCLIDEAN:
                np.cumsum(increments, axis=1, out=increments)
                pos[:, 1:] = start[None, None, :] + increments
            else:
                cur = np.broadcast_to(start, (B, start.size)).copy()
                for k in range(S):
                    cur = _hyperbolic_step(cur, increments[:, k])
                    pos[:, k + 1] = cur
            alive = np.ones((B, S + 1), dtype=bool)
            exit_step = np.full(B, S + 1, dtype=int)
            if config.domain is not None:
                for k in range(1, S + 1):
                    inside = config.domain.inside(space, pos[:, k])
                    dead_now = alive[:, k - 1] & ~inside
                    exit_step[dead_now] = k
                    alive[:, k] = alive[:, k - 1] & inside
            yield PathBatch(times=times, positions=pos, alive=alive,
                            exit_step=exit_step)


# ---------------------------------------------------------------------------
# estimators

def _finish(values: np.ndarray, config: PathConfig, n_effective: int,
            cap_events: int = 0, bias_bound: float | None = None,
            extras: dict | None = None) -> Estimate:
    n = config.n_paths
    mean = values.sum() / n
    spread = np.abs(values - mean) ** 2
    var = spread.sum() / max(n - 1, 1)
    se = math.sqrt(var / n)
    if np.iscomplexobj(values):
        value = complex(mean)
    else:
        value = float(mean.real if np.iscomplexobj(mean) else mean)
    return Estimate(value=value, std_error=se, n_effective=n_effective,
                    n_paths=n, step=config.step, cap_events=cap_events,
                    bias_bound=bias_bound, extras=extras or {})


def _radial_distances(space: ModelSpace, flat_pos: np.ndarray) -> np.ndarray:
    if space.kind == EUCLIDEAN:
        return np.linalg.norm(flat_pos, axis=-1)
    return np.arccosh(np.maximum(flat_pos[..., 0], 1.0))


def mc_kato_integral(v, config: PathConfig) -> Estimate:
    """E of the pathwise time integral of |v| up to min(horizon, lifetime).

    Trapezoidal in time along each path.  Node values above 1/h (or non
    finite) are capped at 1/h and counted as cap events; a non-finite
    value at the shared start point is replaced by each path's first-step
    value instead, because a deterministic cap there would not vanish
    with h.  The reported bias bound is the O(sqrt(h)) envelope 2 sqrt(h)
    for singular potentials and max|v| * h for bounded ones.
    """
    if v.space != config.space:
        raise DomainError("potential and path configuration disagree on the space")
    h = config.step
    cap = 1.0 / h
    S = config.n_steps
    all_vals = np.empty(config.n_paths)
    cap_events = 0
    max_seen = 0.0
    filled = 0
    for batch in sample_paths(config):
        B = batch.positions.shape[0]
        r = _radial_distances(config.space, batch.positions.reshape(-1, batch.positions.shape[-1]))
        g = np.asarray(v.abs_radial(r), dtype=float).reshape(B, S + 1)
        bad = ~np.isfinite(g) | (g > cap)
        start_bad = bad[:, 0]
        if np.any(start_bad):
            g[start_bad, 0] = np.minimum(g[start_bad, 1], cap)
            bad[start_bad, 0] = False
        cap_events += int(bad.sum())
        g = np.where(bad, cap, g)
        max_seen = max(max_seen, float(g.max(initial=0.0)))
        # trapezoid weights, truncated at the exit step
        wts = np.ones(S + 1)
        wts[0] = wts[-1] = 0.5
        live = np.arange(S + 1)[None, :] < batch.exit_step[:, None]
        trunc = np.where(live, g, 0.0)
        # paths killed before the horizon end with a full-weight last node
        ends = np.minimum(batch.exit_step, S + 1) - 1
        w_matrix = np.where(live, wts[None, :], 0.0)
        short = ends < S
        w_matrix[short, ends[short]] = 0.5
        vals = h * np.einsum("bk,bk->b", trunc, w_matrix)
        all_vals[filled:filled + B] = vals
        filled += B
    if v.singular_radii:
        bias = 2.0 * math.sqrt(h)
    else:
        bias = max_seen * h
    return _finish(all_vals, config, n_effective=config.n_paths,
                   cap_events=cap_events, bias_bound=bias)


def mc_heat_expectation(f: Callable, config: PathConfig) -> Estimate:
    """E[f(B_horizon); horizon < lifetime]; with f = 1 this is survival.

    f receives a (B, ambient) block of endpoints and must return (B,)
    values; killed paths contribute zero.
    """
    vals = []
    survivors = 0
    for batch in sample_paths(config):
        endpoint = batch.positions[:, -1]
        alive = batch.alive[:, -1]
        out = np.zeros(endpoint.shape[0], dtype=complex)
        if np.any(alive):
            out[alive] = np.asarray(f(endpoint[alive]))
        survivors += int(alive.sum())
        vals.append(out)
    values = np.concatenate(vals)
    if np.max(np.abs(values.imag), initial=0.0) == 0.0:
        values = values.real
    return _finish(values, config, n_effective=survivors)


def transport_phase(path: np.ndarray, A: Callable) -> complex:
    """exp(-i sum A(midpoint) . increment) along one discrete path.

    The Stratonovich midpoint sum is the discrete line integral of the
    connection form; the result has modulus exactly 1.
    """
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[0] < 2:
        raise DomainError("a path needs at least two points")
    mids = 0.5 * (path[1:] + path[:-1])
    incs = path[1:] - path[:-1]
    a_vals = np.asarray(A(mids), dtype=float)
    total = float(np.einsum("ki,ki->", a_vals, incs))
    return complex(math.cos(-total), math.sin(-total))


def mc_covariant_semigroup(psi: Callable, A: Callable, config: PathConfig) -> Estimate:
    """E[phase^{-1} psi(B_horizon); horizon < lifetime] for a line bundle.

    The weight is the inverse transport phase exp(+i sum A . dX) with the
    Stratonovich midpoint sum.  The same paths also feed the scalar
    estimate E[|psi|(B_horizon); survival], and the extras record the
    pathwise domination check |value| <= scalar + 3 * combined SE (it
    holds by the triangle inequality before noise even enters).
    """
    if config.space.kind != EUCLIDEAN:
        raise DomainError("transport phases are implemented over Euclidean space")
    vals = []
    scalar_vals = []
    survivors = 0
    for batch in sample_paths(config):
        pos = batch.positions
        mids = 0.5 * (pos[:, 1:] + pos[:, :-1])
        incs = pos[:, 1:] - pos[:, :-1]
        B, S = incs.shape[0], incs.shape[1]
        a_vals = np.asarray(A(mids.reshape(-1, pos.shape[-1])), dtype=float)
        seg = np.einsum("ki,ki->k", a_vals, incs.reshape(-1, pos.shape[-1]))
        # only steps before the exit contribute to the accumulated phase
        live_steps = np.arange(1, S + 1)[None, :] < batch.exit_step[:, None]
        angles = (seg.reshape(B, S) * live_steps).sum(axis=1)
        endpoint = pos[:, -1]
        alive = batch.alive[:, -1]
        out = np.zeros(B, dtype=complex)
        sc = np.zeros(B)
        if np.any(alive):
            psi_vals = np.asarray(psi(endpoint[alive]), dtype=complex)
            out[alive] = np.exp(1j * angles[alive]) * psi_vals
            sc[alive] = np.abs(psi_vals)
        survivors += int(alive.sum())
        vals.append(out)
        scalar_vals.append(sc)
    values = np.concatenate(vals)
    scalars = np.concatenate(scalar_vals)
    est = _finish(values, config, n_effective=survivors)
    n = config.n_paths
    s_mean = scalars.sum() / n
    s_var = ((scalars - s_mean) ** 2).sum() / max(n - 1, 1)
    s_se = math.sqrt(s_var / n)
    combined = 3.0 * (est.std_error + s_se)
    est.extras = {
        "scalar_value": float(s_mean),
        "scalar_std_error": float(s_se),
        "domination_ok": bool(abs(est.value) <= s_mean + combined),
    }
    return est
