"""Heat-bath sampling of the finite-volume Widom-Rowlinson kernels.

The configuration lives in a flat array over the padded box; the frozen
boundary sits in the padding. Sweeps visit interior sites in lexicographic
order. Uniforms come from a Philox stream per chain, keyed by
``(seed, chain)``, so runs are reproducible whatever the thread count.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, TextIO, Union

import numpy as np
from numba import njit
from scipy import ndimage

from .dobrushin import fmt
from .exceptions import SizeError
from .lattice import Box
from .model import ModelParams, SpinConfiguration

BOUNDARY_NAMES = {"AllPlus": 1, "AllMinus": -1, "AllZero": 0}
MIN_BATCHES = 20
_BLOCK = 1 << 20  # uniforms generated per call into the compiled kernel


@dataclass
class ChainSpec:
    box: Box
    params: ModelParams
    boundary: Union[str, SpinConfiguration] = "AllPlus"
    sweeps: int = 10_000
    burn_in: int = 1_000
    seed: int = 0
    chains: int = 1
    track_percolation: bool = False
    record_states: bool = False

    def __post_init__(self):
        if not self.sweeps > self.burn_in >= 0:
            raise ValueError("need sweeps > burn_in >= 0")
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if isinstance(self.boundary, str) and self.boundary not in BOUNDARY_NAMES:
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.record_states and self.box.size > 16:
            raise SizeError("state histograms are limited to 16 sites")
        if (self.sweeps - self.burn_in) < MIN_BATCHES:
            raise ValueError(f"need at least {MIN_BATCHES} recorded sweeps for batch means")

    def initial_config(self) -> SpinConfiguration:
        if isinstance(self.boundary, SpinConfiguration):
            if self.boundary.box != self.box:
                raise ValueError("custom boundary configuration is for a different box")
            cfg = self.boundary.copy()
            cfg.interior[...] = 0
            return cfg
        return SpinConfiguration.with_boundary(self.box, BOUNDARY_NAMES[self.boundary])

    @property
    def boundary_name(self) -> str:
        if isinstance(self.boundary, SpinConfiguration):
            return self.boundary.boundary_name
        return self.boundary


@dataclass
class OriginEstimate:
    p_minus: float
    p_zero: float
    p_plus: float
    stderr: tuple
    n_effective: float

    def __getitem__(self, spin: int) -> float:
        return (self.p_minus, self.p_zero, self.p_plus)[spin + 1]

    def se(self, spin: int) -> float:
        return self.stderr[spin + 1]


@dataclass
class ChainTrace:
    chain: int
    origin: np.ndarray          # origin spin per recorded sweep
    percolates: np.ndarray      # 0/1 per recorded sweep, empty when not tracked
    violations: np.ndarray      # hard-core violations per sweep, burn-in included
    final: SpinConfiguration
    state_counts: Optional[np.ndarray] = None


@dataclass
class SamplerRun:
    spec: ChainSpec
    traces: list = field(default_factory=list)

    def origin_estimate(self) -> OriginEstimate:
        return _origin_estimate([tr.origin for tr in self.traces])

    def percolation_estimate(self) -> tuple[float, float]:
        return _batch_mean([tr.percolates.astype(float) for tr in self.traces])

    def total_violations(self) -> int:
        return int(sum(int(tr.violations.sum()) for tr in self.traces))

    def state_distribution(self) -> np.ndarray:
        counts = sum(tr.state_counts for tr in self.traces)
        return counts / counts.sum()

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chain", "sweep", "obs_name", "value"])
        start = self.spec.burn_in
        for tr in self.traces:
            for k, v in enumerate(tr.origin):
                w.writerow([tr.chain, start + k, "origin_spin", int(v)])
            for k, v in enumerate(tr.percolates):
                w.writerow([tr.chain, start + k, "percolates", int(v)])
            if not self.spec.params.hardcore:
                continue
            for k, v in enumerate(tr.violations):
                if v:
                    w.writerow([tr.chain, k, "hardcore_violations", int(v)])


# compiled kernels

@njit(cache=True, nogil=True)
def _sweep_block(grid, sites, offsets, w_minus, w_zero, w_plus, uniforms,
                 origin_pos, outer_mask, stamp, stack, stamp0,
                 origin_out, perc_out, viol_out, codes_out, track_perc, record_codes):
    n_sites = sites.size
    n_sweeps = uniforms.shape[0]
    for k in range(n_sweeps):
        for m in range(n_sites):
            s = sites[m]
            n_plus = 0
            n_minus = 0
            for o in offsets:
                v = grid[s + o]
                if v == 1:
                    n_plus += 1
                elif v == -1:
                    n_minus += 1
            a = w_minus[n_plus]
            c = w_plus[n_minus]
            u = uniforms[k, m] * (a + w_zero + c)
            if u < a:
                grid[s] = -1
            elif u < a + w_zero:
                grid[s] = 0
            else:
                grid[s] = 1
        origin_out[k] = grid[origin_pos]
        # opposite-sign bonds touching the box
        bad = 0
        for m in range(n_sites):
            s = sites[m]
            g = grid[s]
            if g == 0:
                continue
            for o in offsets:
                # each inner bond is seen from both ends; keep the forward one
                if o < 0 and outer_mask[s + o] >= 0:
                    continue
                if g * grid[s + o] == -1:
                    bad += 1
        viol_out[k] = bad
        if track_perc:
            perc_out[k] = _origin_reaches_edge(grid, offsets, origin_pos, outer_mask,
                                               stamp, stack, stamp0 + k)
        if record_codes:
            code = 0
            for m in range(n_sites):
                code = 3 * code + grid[sites[m]] + 1
            codes_out[k] = code


@njit(cache=True, nogil=True)
def _origin_reaches_edge(grid, offsets, origin_pos, outer_mask, stamp, stack, mark):
    # outer_mask: 1 on interior face sites, 0 elsewhere inside, -1 outside the box
    if grid[origin_pos] == 0:
        return 0
    top = 0
    stack[top] = origin_pos
    top += 1
    stamp[origin_pos] = mark
    while top > 0:
        top -= 1
        s = stack[top]
        if outer_mask[s] == 1:
            return 1
        for o in offsets:
            nb = s + o
            if outer_mask[nb] >= 0 and stamp[nb] != mark and grid[nb] != 0:
                stamp[nb] = mark
                stack[top] = nb
                top += 1
    return 0


def _weights(params: ModelParams, degree: int):
    a = params.alpha
    n = np.arange(degree + 1)
    if params.hardcore:
        w_minus = np.where(n == 0, a.p_minus, 0.0)
        w_plus = np.where(n == 0, a.p_plus, 0.0)
    else:
        w_minus = a.p_minus * np.exp(-params.beta * n)
        w_plus = a.p_plus * np.exp(-params.beta * n)
    return w_minus.astype(np.float64), float(a.p_zero), w_plus.astype(np.float64)


def _layout(box: Box):
    frame = box.grown(1)
    shape = frame.shape
    strides = np.cumprod((1,) + shape[::-1][:-1])[::-1]
    offsets = []
    for axis in range(box.d):
        offsets += [-int(strides[axis]), int(strides[axis])]
    idx = np.indices(shape).reshape(box.d, -1).T
    inside = np.all((idx >= 1) & (idx <= np.array(shape) - 2), axis=1)
    face = inside & np.any((idx == 1) | (idx == np.array(shape) - 2), axis=1)
    sites = np.nonzero(inside)[0].astype(np.int64)
    outer_mask = np.where(inside, face.astype(np.int8), -1).astype(np.int8)
    return frame, sites, np.array(offsets, dtype=np.int64), outer_mask


def chain_rng(seed: int, chain: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chain,))))


def _run_one(spec: ChainSpec, chain: int) -> ChainTrace:
    box = spec.box
    origin = (0,) * box.d
    if origin not in box:
        raise SizeError(f"{box} does not contain the origin")
    frame, sites, offsets, outer_mask = _layout(box)
    cfg = spec.initial_config()
    grid = cfg.grid.reshape(-1).copy()
    origin_pos = int(np.ravel_multi_index(tuple(-lo for lo in frame.lower), frame.shape))
    w_minus, w_zero, w_plus = _weights(spec.params, 2 * box.d)
    rng = chain_rng(spec.seed, chain)

    n = spec.sweeps
    origin_all = np.zeros(n, dtype=np.int8)
    perc_all = np.zeros(n if spec.track_percolation else 0, dtype=np.int8)
    viol_all = np.zeros(n, dtype=np.int64)
    codes_all = np.zeros(n if spec.record_states else 0, dtype=np.int64)
    stamp = np.full(grid.size, -1, dtype=np.int64)
    stack = np.empty(grid.size, dtype=np.int64)
    dummy8 = np.zeros(1, dtype=np.int8)
    dummy64 = np.zeros(1, dtype=np.int64)

    per_block = max(1, _BLOCK // sites.size)
    done = 0
    while done < n:
        k = min(per_block, n - done)
        u = rng.random((k, sites.size))
        sl = slice(done, done + k)
        _sweep_block(grid, sites, offsets, w_minus, w_zero, w_plus, u,
                     origin_pos, outer_mask, stamp, stack, done,
                     origin_all[sl], perc_all[sl] if spec.track_percolation else dummy8,
                     viol_all[sl], codes_all[sl] if spec.record_states else dummy64,
                     spec.track_percolation, spec.record_states)
        done += k

    final = SpinConfiguration(box, grid.reshape(frame.shape), spec.boundary_name)
    b = spec.burn_in
    counts = None
    if spec.record_states:
        counts = np.bincount(codes_all[b:], minlength=3 ** box.size).astype(float)
    return ChainTrace(chain, origin_all[b:], perc_all[b:], viol_all, final, counts)


def run_chains(spec: ChainSpec, threads: int = 1) -> SamplerRun:
    """Run every chain of `spec`; chains are independent and may run in parallel."""
    if threads <= 1 or spec.chains == 1:
        traces = [_run_one(spec, c) for c in range(spec.chains)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(lambda c: _run_one(spec, c), range(spec.chains)))
    return SamplerRun(spec, traces)


def run_chain(spec: ChainSpec, threads: int = 1) -> OriginEstimate:
    return run_chains(spec, threads).origin_estimate()


def heat_bath_sweep(config: SpinConfiguration, params: ModelParams,
                    rng: np.random.Generator) -> SpinConfiguration:
    """One lexicographic heat-bath sweep over the interior; the boundary is untouched."""
    box = config.box
    frame, sites, offsets, outer_mask = _layout(box)
    grid = config.grid.reshape(-1).copy()
    w_minus, w_zero, w_plus = _weights(params, 2 * box.d)
    u = rng.random((1, sites.size))
    o = np.zeros(1, dtype=np.int8)
    v = np.zeros(1, dtype=np.int64)
    stamp = np.full(grid.size, -1, dtype=np.int64)
    _sweep_block(grid, sites, offsets, w_minus, w_zero, w_plus, u, 0, outer_mask,
                 stamp, stamp.copy(), 0, o, o.copy(), v, v.copy(), False, False)
    return SpinConfiguration(box, grid.reshape(frame.shape), config.boundary_name)


def _batch_means(x: np.ndarray, n_batches: int = MIN_BATCHES) -> np.ndarray:
    size = x.size // n_batches
    if size == 0:
        raise ValueError(f"need at least {n_batches} samples for batch means")
    return x[x.size - size * n_batches:].reshape(n_batches, size).mean(axis=1)


def _batch_mean(series: list) -> tuple[float, float]:
    if not series or series[0].size == 0:
        raise ValueError("no samples recorded")
    means = np.concatenate([_batch_means(s) for s in series])
    return float(np.mean(np.concatenate(series))), float(means.std(ddof=1) / math.sqrt(means.size))


def _origin_estimate(series: list) -> OriginEstimate:
    allx = np.concatenate(series)
    counts = np.array([(allx == s).sum() for s in (-1, 0, 1)], dtype=float)
    p = counts / counts.sum()
    p[1] = 1.0 - p[0] - p[2]
    se = []
    for s in (-1, 0, 1):
        _, err = _batch_mean([(x == s).astype(float) for x in series])
        se.append(err)
    var = float(np.mean(p * (1 - p)))
    mean_se2 = float(np.mean(np.square(se)))
    n_eff = var / mean_se2 if mean_se2 > 0 else float(allx.size)
    return OriginEstimate(float(p[0]), float(p[1]), float(p[2]), tuple(se), n_eff)


def percolation_probe(config: SpinConfiguration) -> dict:
    """Whether the origin's occupied cluster reaches the box's outer layer, and the largest cluster."""
    box = config.box
    occ = config.interior != 0
    labels, n = ndimage.label(occ, structure=ndimage.generate_binary_structure(box.d, 1))
    sizes = np.bincount(labels.ravel())[1:] if n else np.zeros(0, dtype=int)
    largest = int(sizes.max()) if n else 0
    origin = (0,) * box.d
    connected = False
    if origin in box:
        lab = labels[tuple(-lo for lo in box.lower)]
        if lab:
            face = np.zeros(occ.shape, dtype=bool)
            for axis in range(box.d):
                sl = [slice(None)] * box.d
                sl[axis] = 0
                face[tuple(sl)] = True
                sl[axis] = -1
                face[tuple(sl)] = True
            connected = bool(np.any(face & (labels == lab)))
    return {"origin_connected_to_box_boundary": connected, "largest_cluster_size": largest}


def estimate_percolation_probability(spec: ChainSpec, threads: int = 1) -> tuple[float, float]:
    """Fraction of recorded sweeps in which the origin connects to the box's outer layer, with stderr."""
    if not spec.track_percolation:
        spec = ChainSpec(**{**spec.__dict__, "track_percolation": True})
    return run_chains(spec, threads).percolation_estimate()


def write_snapshot(config: SpinConfiguration, fh: TextIO) -> None:
    box = config.box
    fh.write(f"# box lower={','.join(map(str, box.lower))} upper={','.join(map(str, box.upper))} "
             f"boundary={config.boundary_name}\n")
    for s in box.sites():
        fh.write(",".join(map(str, s)) + f",{config[s]}\n")


def read_snapshot(fh: TextIO, boundary: Optional[SpinConfiguration] = None) -> SpinConfiguration:
    header = fh.readline().split()
    fields = dict(tok.split("=", 1) for tok in header[2:])
    lower = tuple(int(x) for x in fields["lower"].split(","))
    upper = tuple(int(x) for x in fields["upper"].split(","))
    box = Box(lower, upper)
    name = fields.get("boundary", "custom")
    if boundary is not None:
        cfg = boundary.copy()
    elif name in BOUNDARY_NAMES:
        cfg = SpinConfiguration.with_boundary(box, BOUNDARY_NAMES[name])
    else:
        cfg = SpinConfiguration(box, boundary_name=name)
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [int(x) for x in line.split(",")]
        cfg[tuple(parts[:-1])] = parts[-1]
    return cfg
