"""Embedded metric graphs and the radial tree-collapse flow.

Graphs here live in the plane or in 3-space as polyline-sampled edges.  The
flow shrinks a designated tree T (sitting inside the unit ball) to a point
over t in [0, 1] by pulling the whole picture back through a radial map
phi_t(x) = x / g_t(|x|), where g_t is derived from a fixed scalar profile
lambda_{1/3}.  Everything is sampled: edges are arrays of points with a
strictly increasing parameter, and the differential clauses (outward motion
in the shell, derivative closeness) are finite-difference statements about
those arrays.

The scalar profile is fixed once and for all:

* lambda_{1/3}(r) = 3r/2 up to 1.3, constant 2 on [1.4, 1.9], and r from
  2.5 on;
* the gap [1.3, 1.4] is bridged by the cubic Hermite interpolant with
  endpoint slopes 1.5 and 0 (the unique C^1 cubic);
* the gap [1.9, 2.5] is bridged by r + 0.1*u^6 with u = (2.5 - r)/0.6.  A
  cubic Hermite with endpoint slopes 0 and 1 would overshoot the constraint
  r * lambda' <= lambda in the middle of the gap (slope 1.0 against a bound
  of about 0.989 at r = 2.2), so a flatter deviation term is used; it has
  the same endpoint data and respects the constraint strictly inside.

For t <= 1/3 the profile interpolates linearly between the identity and
lambda_{1/3}.  For t > 1/3 it is the three-piece form: a homothety-like
inner piece lambda_{1/3}(2r/(3(1-t))) below 1.5*(1-t), the constant 2 up to
1.9, and lambda_{1/3} beyond.  As written this jumps from 1.5 to 2 at the
inner breakpoint, so image radii strictly between 1.5 and 2 have no
preimage: samples there are dropped by the pullback, and each crossing of
the image radius 2 acquires a radial segment of preimages (the plateau
annulus [1.5*(1-t), 1.9]).  The package keeps that literal form because the
fixed-profile examples pin it; the flow suites use scenes whose edges are
radial in the shell, for which the dropped band and the inserted annulus
join up along one ray and the distance parameter stays strictly increasing.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import AbstractGraph

PLATEAU_VALUE = 2.0
PROFILE_BREAKS = (1.3, 1.4, 1.9, 2.5)


def lambda_third(r):
    """The fixed time-1/3 profile; accepts scalars or arrays."""
    r = np.asarray(r, dtype=float)
    s = (r - 1.3) / 0.1
    bridge = 1.95 + 0.15 * s - 0.15 * s**2 + 0.05 * s**3
    u = (2.5 - r) / 0.6
    out = np.select(
        [r <= 1.3, r < 1.4, r <= 1.9, r < 2.5],
        [1.5 * r, bridge, PLATEAU_VALUE, r + 0.1 * u**6],
        default=r,
    )
    return float(out) if out.ndim == 0 else out


def lambda_third_prime(r):
    """Analytic derivative of lambda_third."""
    r = np.asarray(r, dtype=float)
    s = (r - 1.3) / 0.1
    u = (2.5 - r) / 0.6
    out = np.select(
        [r <= 1.3, r < 1.4, r <= 1.9, r < 2.5],
        [1.5, 1.5 * (1.0 - s) ** 2, 0.0, 1.0 - u**5],
        default=1.0,
    )
    return float(out) if out.ndim == 0 else out


def profile_report(num=10000, r_max=4.0):
    """Dense-sample compliance check of the profile's three constraints.

    Returns a dict with the worst margins; all three `ok` flags must hold.
    The bound r*lambda' <= lambda is tested with a 1e-12 relative slack
    because the 3r/2 piece attains it with equality.
    """
    r = np.linspace(0.0, r_max, num)
    lam = lambda_third(r)
    lp = lambda_third_prime(r)
    mono = np.min(np.diff(lam))
    off_plateau = np.abs(lam - PLATEAU_VALUE) > 1e-12
    min_slope = float(np.min(lp[off_plateau]))
    bound = lam * (1 + 1e-12) + 1e-12 - r * lp
    return {
        "points": num,
        "monotone_ok": bool(mono >= -1e-12),
        "min_consecutive_diff": float(mono),
        "slope_ok": bool(min_slope > 0.0),
        "min_off_plateau_slope": min_slope,
        "ratio_ok": bool(np.min(bound) >= 0.0),
        "worst_ratio_margin": float(np.min(bound)),
    }


class FlowParams:
    """The scalar data of the flow at one time t in [0, 1]."""

    def __init__(self, t):
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError("flow time must lie in [0, 1], got %r" % t)
        self.t = t

    def lam(self, r):
        t = self.t
        r = np.asarray(r, dtype=float)
        if t <= 1.0 / 3.0:
            out = (1 - 3 * t) * r + 3 * t * lambda_third(r)
            return float(out) if out.ndim == 0 else out
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        b = 1.5 * (1 - t)
        inner = r < b
        plateau = ~inner & (r <= 1.9)
        outer = r > 1.9
        if inner.any():
            out[inner] = lambda_third(2 * r[inner] / (3 * (1 - t)))
        out[plateau] = PLATEAU_VALUE
        if outer.any():
            out[outer] = lambda_third(r[outer])
        return float(out[0]) if scalar else out

    def g(self, r):
        """g_t(r) = r / lambda_t(r), with g_t(0) = 1 - t."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        lam = np.atleast_1d(self.lam(r))
        out = np.full_like(r, 1.0 - self.t)
        pos = r > 0
        out[pos] = r[pos] / lam[pos]
        return float(out[0]) if scalar else out

    def phi(self, x):
        """phi_t(x) = x / g_t(|x|); undefined only at (t, x) = (1, 0)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        r = np.linalg.norm(pts, axis=1)
        if self.t == 1.0 and np.any(r == 0.0):
            raise ValueError("phi_1(0) is undefined")
        out = pts / self.g(r)[:, None]
        return out[0] if single else out

    def invert(self, rho):
        """Preimage radius of the image radius rho, as (kind, r).

        kind "point" carries the unique preimage; kind "gap" means rho sits
        in the band (1.5, 2) that lambda_t skips for t > 1/3 (the plateau
        annulus is produced separately, by insertion at image radius 2).
        """
        r, valid = self.invert_radii([float(rho)])
        return ("point", float(r[0])) if valid[0] else ("gap", None)

    def invert_radii(self, rhos):
        """Vectorized inverse: arrays (preimage radii, validity mask).

        Invalid entries are the gap band (1.5, 2) at t > 1/3; their radius
        slot is NaN.
        """
        t = self.t
        rho = np.asarray(rhos, dtype=float)
        if np.any(rho < 0):
            raise ValueError("radius must be nonnegative")
        r = np.full_like(rho, np.nan)
        valid = np.ones(rho.shape, dtype=bool)
        if t <= 1.0 / 3.0:
            b13 = 1.3 * (1 + 1.5 * t)
            b14 = float(self.lam(1.4))
            b19 = float(self.lam(1.9))
            m = rho <= b13
            r[m] = rho[m] / (1 + 1.5 * t)
            m = (rho > b13) & (rho <= b14)
            r[m] = _bisect_arr(self.lam, 1.3, 1.4, rho[m])
            m = (rho > b14) & (rho <= b19)
            if m.any():
                # linear piece (1-3t) r + 6t; vertical only at t = 1/3,
                # where b14 == b19 == 2 and the branch is unreachable
                r[m] = (rho[m] - 6 * t) / (1 - 3 * t)
            m = (rho > b19) & (rho < 2.5)
            r[m] = _bisect_arr(self.lam, 1.9, 2.5, rho[m])
            m = rho >= 2.5
            r[m] = rho[m]
            return r, valid
        m = rho <= 1.5
        r[m] = (1 - t) * rho[m]
        valid &= ~((rho > 1.5) & (rho < PLATEAU_VALUE))
        m = (rho >= PLATEAU_VALUE) & (rho < 2.5)
        r[m] = _bisect_arr(lambda_third, 1.9, 2.5, rho[m])
        m = rho >= 2.5
        r[m] = rho[m]
        return r, valid


def _bisect_arr(fn, lo, hi, targets, iters=60):
    """Solve fn(r) = target elementwise for increasing fn on [lo, hi]."""
    targets = np.asarray(targets, dtype=float)
    lo = np.full_like(targets, lo)
    hi = np.full_like(targets, hi)
    at_lo = targets <= fn(lo)
    hi[at_lo] = lo[at_lo]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        low = fn(mid) < targets
        lo[low] = mid[low]
        hi[~low] = mid[~low]
    return 0.5 * (lo + hi)


class Edge:
    """One polyline-sampled edge: endpoint vertex ids, a strictly increasing
    parameter array over [-1, 1], and the matching sample points."""

    __slots__ = ("u", "v", "params", "points")

    def __init__(self, u, v, params, points):
        self.u = int(u)
        self.v = int(v)
        self.params = np.asarray(params, dtype=float)
        self.points = np.asarray(points, dtype=float)

    def __len__(self):
        return len(self.params)


class EmbeddedGraph:
    """Graph embedded in R^2 or R^3 with polyline edges.

    vertices: array of positions (V x dim).  leaf_labels: {vertex: label}
    for the designated valence-1 vertices.  Construction only coerces
    shapes; `validate` reports the sampling invariants.
    """

    def __init__(self, dim, vertices, edges, leaf_labels=None):
        if dim not in (2, 3):
            raise ValueError("embedding dimension must be 2 or 3")
        self.dim = dim
        self.vertex_positions = [np.asarray(v, dtype=float) for v in vertices]
        self.edges = list(edges)
        self.leaf_labels = dict(leaf_labels or {})

    @property
    def n_vertices(self):
        return len(self.vertex_positions)

    def validate(self, tol=1e-9):
        """Sampling invariants; returns a list of messages (empty = valid)."""
        bad = []
        for vi, pos in enumerate(self.vertex_positions):
            if pos.shape != (self.dim,):
                bad.append("vertex %d has wrong dimension" % vi)
        valence = [0] * self.n_vertices
        for ei, e in enumerate(self.edges):
            if not (0 <= e.u < self.n_vertices and 0 <= e.v < self.n_vertices):
                bad.append("edge %d has undefined endpoint" % ei)
                continue
            valence[e.u] += 1
            valence[e.v] += 1
            if len(e.params) < 9:
                bad.append("edge %d has %d samples, need >= 9" % (ei, len(e.params)))
            if len(e.params) != len(e.points):
                bad.append("edge %d parameter/point length mismatch" % ei)
                continue
            if np.any(np.diff(e.params) <= 0):
                bad.append("edge %d parameters not strictly increasing" % ei)
            if abs(e.params[0] + 1) > tol or abs(e.params[-1] - 1) > tol:
                bad.append("edge %d parameters do not span [-1, 1]" % ei)
            if (
                np.linalg.norm(e.points[0] - self.vertex_positions[e.u]) > tol
                or np.linalg.norm(e.points[-1] - self.vertex_positions[e.v]) > tol
            ):
                bad.append("edge %d endpoint samples off the vertices" % ei)
            steps = np.linalg.norm(np.diff(e.points, axis=0), axis=1)
            if np.any(steps < 1e-12):
                bad.append("edge %d has coincident consecutive samples" % ei)
        for vi, val in enumerate(valence):
            if vi in self.leaf_labels:
                if val != 1:
                    bad.append("labelled leaf %d has valence %d" % (vi, val))
            elif val < 3:
                bad.append("vertex %d has valence %d < 3" % (vi, val))
        return bad

    def all_sample_points(self):
        """Every edge sample as one (N x dim) array; empty graph gives (0, dim)."""
        if not self.edges:
            return np.zeros((0, self.dim))
        return np.concatenate([e.points for e in self.edges])

    def to_abstract(self):
        """Underlying combinatorial graph; embedded edge i is abstract edge i."""
        nv = self.n_vertices
        m = nv + 2 * len(self.edges)
        sigma = list(range(m))
        t = list(range(m))
        for k, e in enumerate(self.edges):
            a, b = nv + 2 * k, nv + 2 * k + 1
            sigma[a], sigma[b] = b, a
            t[a], t[b] = e.u, e.v
        return AbstractGraph(m, sigma, t, dict(self.leaf_labels))

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "vertices": [
                {
                    "pos": [float(c) for c in pos],
                    **({"leaf": self.leaf_labels[vi]} if vi in self.leaf_labels else {}),
                }
                for vi, pos in enumerate(self.vertex_positions)
            ],
            "edges": [
                {
                    "ends": [e.u, e.v],
                    "params": [float(x) for x in e.params],
                    "points": [[float(c) for c in p] for p in e.points],
                }
                for e in self.edges
            ],
        }

    @classmethod
    def from_json_dict(cls, d):
        labels = {}
        verts = []
        for vi, v in enumerate(d["vertices"]):
            verts.append(v["pos"])
            if "leaf" in v:
                labels[vi] = v["leaf"]
        edges = [
            Edge(e["ends"][0], e["ends"][1], e["params"], e["points"])
            for e in d["edges"]
        ]
        return cls(d["dim"], verts, edges, labels)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass
class IncidentEdge:
    """An edge meeting the collapse tree at exactly one endpoint, stored
    with the tree end first.  d is the distance-to-tree parameter along the
    samples: twice the normalized arc length, so the far vertex sits at
    d = 2 and the ball-of-3 part stays below 2."""

    edge_id: int
    tree_end: int
    far_end: int
    reversed: bool
    points: np.ndarray
    d: np.ndarray


@dataclass
class CollapseScene:
    """A validated (graph, tree) pair ready to flow, or its violation list."""

    graph: EmbeddedGraph
    tree_edges: tuple
    tree_vertices: frozenset
    incident: list
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def check_collapsible(g, tree_edge_ids):
    """Validate the collapse clauses for tree_edge_ids inside g.

    Clauses, each reported individually on failure: the selection is a tree
    of the underlying graph; the tree stays strictly inside the unit ball;
    every sample within the 3-ball lies on the tree or on an edge incident
    to it; incident edges end strictly outside radius 3; and within the
    shell 1 <= |x| <= 3 incident edges move outward (nonnegative
    finite-difference radial derivative).  Always returns a CollapseScene;
    inspect `.ok` / `.violations`.
    """
    violations = []
    tree_edge_ids = tuple(sorted(set(int(e) for e in tree_edge_ids)))
    for e in tree_edge_ids:
        if not (0 <= e < len(g.edges)):
            return CollapseScene(
                g, tree_edge_ids, frozenset(), [],
                [{"clause": "tree_selection", "detail": "edge %d undefined" % e}],
            )

    tree_vertices = set()
    for e in tree_edge_ids:
        tree_vertices.add(g.edges[e].u)
        tree_vertices.add(g.edges[e].v)

    abstract = g.to_abstract()
    if tree_edge_ids:
        from .graphs import subgraph_is_tree

        if not subgraph_is_tree(abstract, list(tree_edge_ids)):
            violations.append(
                {"clause": "tree_selection", "detail": "selection is not a tree"}
            )
    else:
        violations.append({"clause": "tree_selection", "detail": "empty selection"})
    for v in tree_vertices:
        if v in g.leaf_labels:
            violations.append(
                {"clause": "tree_selection", "detail": "labelled leaf %d in tree" % v}
            )

    # tree strictly inside the unit ball, sample by sample
    for v in sorted(tree_vertices):
        r = float(np.linalg.norm(g.vertex_positions[v]))
        if r >= 1.0:
            violations.append({"clause": "tree_in_unit_ball", "vertex": v, "radius": r})
    for e in tree_edge_ids:
        rad = np.linalg.norm(g.edges[e].points, axis=1)
        i = int(np.argmax(rad))
        if rad[i] >= 1.0:
            violations.append(
                {"clause": "tree_in_unit_ball", "edge": e, "sample": i, "radius": float(rad[i])}
            )

    incident = []
    for ei, edge in enumerate(g.edges):
        if ei in tree_edge_ids:
            continue
        at_tree = (edge.u in tree_vertices, edge.v in tree_vertices)
        if at_tree == (False, False):
            rad = np.linalg.norm(edge.points, axis=1)
            i = int(np.argmin(rad))
            if rad[i] <= 3.0:
                violations.append(
                    {
                        "clause": "ball_coverage",
                        "edge": ei,
                        "sample": i,
                        "radius": float(rad[i]),
                    }
                )
            continue
        if at_tree == (True, True):
            violations.append({"clause": "tree_selection", "edge": ei,
                               "detail": "non-tree edge with both ends on the tree"})
            continue
        rev = at_tree == (False, True)
        pts = edge.points[::-1].copy() if rev else edge.points.copy()
        rad = np.linalg.norm(pts, axis=1)
        if rad[-1] <= 3.0:
            violations.append(
                {"clause": "exits_three_ball", "edge": ei, "radius": float(rad[-1])}
            )
        # outward motion in the shell, by central differences on the samples
        for i in range(1, len(pts) - 1):
            if 1.0 <= rad[i] <= 3.0:
                deriv = pts[i + 1] - pts[i - 1]
                if float(np.dot(pts[i], deriv)) < 0.0:
                    violations.append(
                        {
                            "clause": "outward_in_shell",
                            "edge": ei,
                            "sample": i if not rev else len(pts) - 1 - i,
                            "value": float(np.dot(pts[i], deriv)),
                        }
                    )
        steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        total = float(np.sum(steps))
        d = np.concatenate([[0.0], np.cumsum(steps)]) * (2.0 / total)
        incident.append(
            IncidentEdge(
                edge_id=ei,
                tree_end=edge.v if rev else edge.u,
                far_end=edge.u if rev else edge.v,
                reversed=rev,
                points=pts,
                d=d,
            )
        )

    return CollapseScene(
        g, tree_edge_ids, frozenset(tree_vertices), incident, violations
    )


def collapse_flow(scene, t):
    """The flow at time t applied to a valid scene.

    Pullback of every sample through the radial map, with three per-edge
    regimes: tree edges scale by the inner homothety factor (and vanish at
    t = 1, where the origin is adjoined as a vertex); edges incident to the
    tree are pulled back radius-by-radius, acquire inserted samples across
    the steep/plateau preimage annulus, and are reparametrized by
    d_t - 1 where d_t(x) = g_t(|x|) d(phi_t(x)); all other edges sit
    outside the 3-ball, where the map is the identity.
    """
    if not scene.ok:
        raise ValueError("scene has %d violations" % len(scene.violations))
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError("flow time must lie in [0, 1], got %r" % t)
    p = FlowParams(t)
    g = scene.graph
    shrink = 1.0 / (1 + 1.5 * t) if t <= 1.0 / 3.0 else (1.0 - t)

    new_vertices = []
    vmap = {}
    for vi, pos in enumerate(g.vertex_positions):
        if vi in scene.tree_vertices and t == 1.0:
            continue
        vmap[vi] = len(new_vertices)
        new_vertices.append(pos * shrink if vi in scene.tree_vertices else pos.copy())
    origin_vertex = None
    if t == 1.0:
        origin_vertex = len(new_vertices)
        new_vertices.append(np.zeros(g.dim))
        for vi in scene.tree_vertices:
            vmap[vi] = origin_vertex
    labels = {vmap[v]: l for v, l in g.leaf_labels.items()}

    incident_ids = {inc.edge_id: inc for inc in scene.incident}
    edges_out = []
    for ei, edge in enumerate(g.edges):
        if ei in scene.tree_edges:
            if t == 1.0:
                continue
            edges_out.append(
                Edge(vmap[edge.u], vmap[edge.v], edge.params.copy(), edge.points * shrink)
            )
        elif ei in incident_ids:
            inc = incident_ids[ei]
            params, pts = _pullback_incident(p, inc, shrink)
            edges_out.append(Edge(vmap[inc.tree_end], vmap[inc.far_end], params, pts))
        else:
            edges_out.append(
                Edge(vmap[edge.u], vmap[edge.v], edge.params.copy(), edge.points.copy())
            )
    return EmbeddedGraph(g.dim, new_vertices, edges_out, labels)


def _pullback_incident(p, inc, shrink, n_insert=49):
    """Pulled-back samples of one incident edge as (params, points).

    Per-sample preimages, plus a radial grid of inserted preimages across
    the window where the inverse profile is steep or flat (the annulus
    [1.5*(1-t), 2.5] for t > 1/3, [1.3, 2.5] before), each carrying the
    interpolated image point.  The parameter of a pulled-back sample x with
    image y is d_t(x) - 1 = (|x|/|y|) d(y) - 1, which starts at exactly -1
    on the collapsing end and ends at exactly +1 at the far vertex.
    """
    t = p.t
    pts = inc.points
    ds = inc.d
    rad = np.linalg.norm(pts, axis=1)

    # (image d, preimage radius, d_t, position); the first two sort it
    samples = [(0.0, rad[0] * shrink, 0.0, pts[0] * shrink)]
    r_all, valid = p.invert_radii(rad)
    for i in range(1, len(pts)):
        if not valid[i] or r_all[i] == 0.0:
            continue
        scale = r_all[i] / rad[i]
        samples.append((ds[i], r_all[i], scale * ds[i], pts[i] * scale))

    if t > 1e-12:
        w0 = 1.3 if t <= 1.0 / 3.0 else 1.5 * (1 - t)
        r_grid = np.linspace(w0, 2.5, n_insert)
        r_grid = r_grid[r_grid > 0.0]
        rho_grid = np.atleast_1d(p.lam(r_grid))
        for r, rho in zip(r_grid, rho_grid):
            cross = (rad[:-1] - rho) * (rad[1:] - rho) <= 0.0
            cross &= rad[:-1] != rad[1:]
            if not cross.any():
                continue
            hit = int(np.argmax(cross))
            a = (rho - rad[hit]) / (rad[hit + 1] - rad[hit])
            y = pts[hit] + a * (pts[hit + 1] - pts[hit])
            dy = ds[hit] + a * (ds[hit + 1] - ds[hit])
            scale = r / float(np.linalg.norm(y))
            samples.append((dy, r, scale * dy, y * scale))

    samples.sort(key=lambda s: (s[0], s[1]))
    params = []
    points = []
    for _, _, dt, pos in samples:
        if points and np.linalg.norm(pos - points[-1]) < 1e-12:
            continue
        params.append(dt - 1.0)
        points.append(pos)
    return np.array(params), np.array(points)


def flow_frames(scene, times):
    """The flow sampled at several times, as a list of (t, EmbeddedGraph)."""
    return [(float(t), collapse_flow(scene, t)) for t in times]


def write_frames_csv(frames, path_or_file):
    """Plot-ready CSV of flow frames: t,edge_id,sample_index,param,x,y[,z]."""
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        dim = frames[0][1].dim if frames else 2
        w = csv.writer(fh)
        w.writerow(["t", "edge_id", "sample_index", "param"] + list("xyz")[:dim])
        for t, g in frames:
            for ei, e in enumerate(g.edges):
                for i, (s, pt) in enumerate(zip(e.params, e.points)):
                    w.writerow(
                        ["%.10g" % t, ei, i, "%.12g" % s]
                        + ["%.12g" % c for c in pt]
                    )
    finally:
        if own:
            fh.close()


def hausdorff_samples(g1, g2, within=3.0):
    """Symmetric Hausdorff distance between the two graphs' sample sets,
    restricted to samples within the given radius."""
    a = g1.all_sample_points()
    b = g2.all_sample_points()
    a = a[np.linalg.norm(a, axis=1) <= within]
    b = b[np.linalg.norm(b, axis=1) <= within]
    if len(a) == 0 or len(b) == 0:
        return 0.0 if len(a) == len(b) else float("inf")
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def radial_scene(dim=2, spokes=4, samples=201, tree_radius=0.25, seed=None):
    """A standard test scene: a one-edge tree near the origin with radial
    spokes running out to radius 4, each ending at a labelled leaf.

    The spokes leave their tree vertex, turn onto an exact ray through the
    origin while still inside the unit ball, and are sampled uniformly in
    arc length with the distance parametrization d - 1, so the flow at
    t = 0 reproduces the scene's own parameters.  Returns (graph,
    tree_edge_ids).
    """
    if spokes < 4 or spokes % 2:
        raise ValueError("need an even number of spokes >= 4")
    v0 = np.zeros(dim)
    v1 = np.zeros(dim)
    v0[0] = tree_radius
    v1[0] = -tree_radius
    verts = [v0, v1]
    edges = []
    labels = {}
    half = spokes // 2
    for k in range(spokes):
        base = v0 if k < half else v1
        j = k % half
        # v0's spokes fan over [-60, 60] degrees, v1's over [120, 240]
        ang = -math.pi / 3 + j * (2 * math.pi / 3) / (half - 1)
        if k >= half:
            ang += math.pi
        direction = np.zeros(dim)
        direction[0] = math.cos(ang)
        direction[1] = math.sin(ang)
        if dim == 3:
            direction[2] = 0.1 * (k - (spokes - 1) / 2)
            direction /= np.linalg.norm(direction)
        knee = 0.6 * direction
        tip = 4.0 * direction
        leaf = len(verts)
        verts.append(tip)
        labels[leaf] = k + 1
        pts = _two_leg_polyline(base, knee, tip, samples)
        steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        d = np.concatenate([[0.0], np.cumsum(steps)]) * (2.0 / np.sum(steps))
        edges.append(Edge(0 if k < half else 1, leaf, d - 1.0, pts))
    # the tree edge itself, straight through the origin
    n_tree = 21
    s = np.linspace(-1.0, 1.0, n_tree)
    pts = v0[None, :] + (s[:, None] + 1) / 2.0 * (v1 - v0)[None, :]
    edges.insert(0, Edge(0, 1, s, pts))
    return EmbeddedGraph(dim, verts, edges, labels), (0,)


def _two_leg_polyline(base, knee, tip, samples):
    """Uniform-arclength samples along base -> knee -> tip."""
    l1 = float(np.linalg.norm(knee - base))
    l2 = float(np.linalg.norm(tip - knee))
    arcs = np.linspace(0.0, l1 + l2, samples)
    pts = np.empty((samples, len(base)))
    for i, a in enumerate(arcs):
        if a <= l1:
            pts[i] = base + (a / l1) * (knee - base)
        else:
            pts[i] = knee + ((a - l1) / l2) * (tip - knee)
    return pts


@dataclass
class SmallnessSpec:
    """Inputs of the sampled closeness predicate between two graphs.

    correspondence maps (edge_id, sample_index) of the domain graph to an
    image point.  K is the axis box [k_lo, k_hi]; Q, when given, is the
    sub-box where the finite-difference derivative clause runs.  K^eps
    means the box eroded by eps on every side.
    """

    epsilon: float
    k_lo: np.ndarray
    k_hi: np.ndarray
    domain: EmbeddedGraph
    codomain: EmbeddedGraph
    correspondence: dict
    q_lo: np.ndarray = None
    q_hi: np.ndarray = None
    containment_tol: float = 1e-9

    def __post_init__(self):
        self.k_lo = np.asarray(self.k_lo, dtype=float)
        self.k_hi = np.asarray(self.k_hi, dtype=float)
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if (self.q_lo is None) != (self.q_hi is None):
            raise ValueError("Q needs both corners")
        if self.q_lo is not None:
            self.q_lo = np.asarray(self.q_lo, dtype=float)
            self.q_hi = np.asarray(self.q_hi, dtype=float)
            if np.any(self.q_lo < self.k_lo) or np.any(self.q_hi > self.k_hi):
                raise ValueError("Q must sit inside K")
            for vi, pos in enumerate(self.codomain.vertex_positions):
                if _in_box(pos, self.q_lo, self.q_hi):
                    raise ValueError(
                        "Q touches codomain vertex %d; the derivative clause "
                        "needs a vertex-free region" % vi
                    )


def _in_box(p, lo, hi):
    return bool(np.all(p >= lo) and np.all(p <= hi))


def check_smallness(spec):
    """Sampled (eps, K[, Q])-closeness verdict, as (ok, report).

    Clauses: every domain sample inside K must be mapped (failure code
    `undefined_correspondence`); every codomain sample inside the eroded
    box K^eps must lie within containment_tol of some image point; mapped
    samples move by less than eps; and inside Q the finite-difference
    derivative of the correspondence along each edge differs from the
    identity's by less than eps.
    """
    report = {
        "coverage": None,
        "containment": None,
        "pointwise": None,
        "derivative": None,
        "failure_code": None,
    }
    corr = spec.correspondence
    eps = spec.epsilon

    for ei, e in enumerate(spec.domain.edges):
        for i, pt in enumerate(e.points):
            if _in_box(pt, spec.k_lo, spec.k_hi) and (ei, i) not in corr:
                report["coverage"] = {"edge": ei, "sample": i}
                report["failure_code"] = "undefined_correspondence"
                return False, report
    report["coverage"] = "ok"

    images = (
        np.array([np.asarray(v, dtype=float) for v in corr.values()])
        if corr
        else np.zeros((0, spec.domain.dim))
    )
    lo_e = spec.k_lo + eps
    hi_e = spec.k_hi - eps
    if np.all(lo_e <= hi_e):
        for ei, e in enumerate(spec.codomain.edges):
            for i, pt in enumerate(e.points):
                if not _in_box(pt, lo_e, hi_e):
                    continue
                if len(images) == 0:
                    report["containment"] = {"edge": ei, "sample": i, "nearest": None}
                    return False, report
                near = float(np.min(np.linalg.norm(images - pt, axis=1)))
                if near > spec.containment_tol:
                    report["containment"] = {"edge": ei, "sample": i, "nearest": near}
                    return False, report
    report["containment"] = "ok"

    worst = 0.0
    for (ei, i), img in corr.items():
        pt = spec.domain.edges[ei].points[i]
        if not _in_box(pt, spec.k_lo, spec.k_hi):
            continue
        move = float(np.linalg.norm(np.asarray(img, dtype=float) - pt))
        worst = max(worst, move)
        if move >= eps:
            report["pointwise"] = {"edge": ei, "sample": i, "moved": move}
            return False, report
    report["pointwise"] = {"worst": worst}

    if spec.q_lo is not None:
        worst_d = 0.0
        for ei, e in enumerate(spec.domain.edges):
            for i in range(1, len(e.points) - 1):
                if not _in_box(e.points[i], spec.q_lo, spec.q_hi):
                    continue
                keys = [(ei, i - 1), (ei, i), (ei, i + 1)]
                if any(k not in corr for k in keys):
                    report["derivative"] = {"edge": ei, "sample": i}
                    report["failure_code"] = "undefined_correspondence"
                    return False, report
                h = e.params[i + 1] - e.params[i - 1]
                fd_dom = (e.points[i + 1] - e.points[i - 1]) / h
                fd_img = (
                    np.asarray(corr[(ei, i + 1)], dtype=float)
                    - np.asarray(corr[(ei, i - 1)], dtype=float)
                ) / h
                diff = float(np.linalg.norm(fd_img - fd_dom))
                worst_d = max(worst_d, diff)
                if diff >= eps:
                    report["derivative"] = {"edge": ei, "sample": i, "diff": diff}
                    return False, report
        report["derivative"] = {"worst": worst_d}

    return True, report
