"""Mixed RT0/P0 discretization of Darcy flow on a rectangular subdomain.

Velocity dofs are normal components on grid edges (vertical edges point +x,
horizontal +y, so H(div) continuity is automatic), pressure is constant per
cell. The saddle system

    [A  B^T] [u]   [f - <g, v.n>]
    [B  0  ] [p] = [-q          ]

uses A = nu (K^-1 u, v) with K constant per cell and B = -(div v, w).
No-flow conditions are eliminated strongly; pressure and interface data are
natural and enter the momentum right-hand side. The operator is factored
once (SuperLU) and every subsequent star/bar solve is a single backsolve.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SingularOperatorError
from .geometry import OUTWARD_SIGN, edges_on_span, side_of_interface

SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class DarcyBC:
    """Outer boundary condition on one side: no-flow or given pressure."""

    kind: str  # "noflow" | "pressure"
    value: object = None  # callable g(x, y) for pressure (None -> 0)


@dataclass(frozen=True)
class InterfaceTrace:
    """Edges of this subdomain lying on one interface, tangent-ordered."""

    iface: int
    edges: np.ndarray  # edge dof ids
    sigma_out: int  # +1 if the +x/+y edge orientation is outward here
    normal_sign: int  # interface normal n = normal_sign * e_axis
    s_breaks: np.ndarray  # arclength breakpoints, len(edges) + 1


def interface_trace(mesh, block, iface):
    """Locate the fine edges of `mesh` on `iface` (Darcy side)."""
    side = side_of_interface(block, iface)
    breaks = mesh.side_breaks(side)
    idx = edges_on_span(breaks, iface.span)
    edges = mesh.boundary_edges(side)[idx]
    s = breaks[idx[0]:idx[-1] + 2] - iface.span[0]
    return InterfaceTrace(iface.index, edges, OUTWARD_SIGN[side],
                          iface.normal_sign, s)


@dataclass
class DarcySolution:
    u: np.ndarray  # all edge dofs (eliminated ones zero)
    p: np.ndarray  # cell pressures


class DarcyOperator:
    """Factored subdomain operator for one permeability realization."""

    def __init__(self, mesh, K, nu, bcs, traces, f=None, q=None):
        self.mesh = mesh
        self.nu = nu
        self.bcs = bcs
        self.traces = {t.iface: t for t in traces}
        self.f = f
        self.q = q
        self.factorizations = 0
        self.backsolves = 0

        K = np.asarray(K, dtype=float)
        if K.shape != (mesh.n_cells,):
            raise ValueError("K must hold one value per cell")
        if (K <= 0).any():
            raise ValueError("permeability must be positive")

        iface_edges = set()
        for t in traces:
            iface_edges.update(t.edges.tolist())
        noflow = set()
        pressure_edges = {}
        for side in SIDES:
            bc = bcs.get(side, DarcyBC("noflow"))
            for e in mesh.boundary_edges(side):
                if int(e) in iface_edges:
                    continue
                if bc.kind == "noflow":
                    noflow.add(int(e))
                elif bc.kind == "pressure":
                    pressure_edges[int(e)] = (side, bc.value)
                else:
                    raise ValueError(f"unknown darcy bc {bc.kind!r}")
        self.pressure_edges = pressure_edges

        if not pressure_edges and not iface_edges:
            raise SingularOperatorError(
                "darcy subdomain has no pressure data and no interface; "
                "pressure is undetermined"
            )

        keep = np.array(sorted(set(range(mesh.n_edges)) - noflow))
        self.keep = keep
        self.red_index = -np.ones(mesh.n_edges, dtype=int)
        self.red_index[keep] = np.arange(len(keep))
        self.n_u = len(keep)
        self.n_p = mesh.n_cells

        rows, cols, vals = [], [], []
        brows, bcols, bvals = [], [], []
        hx, hy = mesh.hx, mesh.hy
        cell_area = hx * hy
        for iy in range(mesh.ny):
            for ix in range(mesh.nx):
                c = mesh.cell(ix, iy)
                w, e, s, n = mesh.cell_edges(ix, iy)
                coef = nu / K[c]
                for (a, b), m in (((w, w), 1 / 3), ((e, e), 1 / 3),
                                  ((w, e), 1 / 6), ((e, w), 1 / 6),
                                  ((s, s), 1 / 3), ((n, n), 1 / 3),
                                  ((s, n), 1 / 6), ((n, s), 1 / 6)):
                    ra, rb = self.red_index[a], self.red_index[b]
                    if ra >= 0 and rb >= 0:
                        rows.append(ra)
                        cols.append(rb)
                        vals.append(coef * cell_area * m)
                for a, bv in ((w, hy), (e, -hy), (s, hx), (n, -hx)):
                    ra = self.red_index[a]
                    if ra >= 0:
                        brows.append(c)
                        bcols.append(ra)
                        bvals.append(bv)

        A = sp.coo_matrix((vals, (rows, cols)), shape=(self.n_u, self.n_u))
        B = sp.coo_matrix((bvals, (brows, bcols)), shape=(self.n_p, self.n_u))
        self._B = B.tocsr()
        S = sp.bmat([[A.tocsr(), B.T], [B, None]], format="csc")
        try:
            self.lu = splu(S)
        except RuntimeError as exc:  # pragma: no cover - structural check above
            raise SingularOperatorError(str(exc)) from exc
        self.factorizations += 1

    def _solve(self, rhs):
        self.backsolves += 1
        sol = self.lu.solve(rhs)
        u = np.zeros(self.mesh.n_edges)
        u[self.keep] = sol[:self.n_u]
        return DarcySolution(u, sol[self.n_u:])

    def _momentum_source(self, rhs):
        """(f, v) for all kept edge basis functions, midpoint quadrature."""
        mesh = self.mesh
        if self.f is None:
            return
        fx, fy = self.f(mesh.centroids[:, 0], mesh.centroids[:, 1])
        fx = np.broadcast_to(fx, (mesh.n_cells,))
        fy = np.broadcast_to(fy, (mesh.n_cells,))
        half = 0.5 * mesh.hx * mesh.hy
        for iy in range(mesh.ny):
            for ix in range(mesh.nx):
                c = mesh.cell(ix, iy)
                w, e, s, n = mesh.cell_edges(ix, iy)
                for edge, comp in ((w, fx[c]), (e, fx[c])):
                    r = self.red_index[edge]
                    if r >= 0:
                        rhs[r] += comp * half
                for edge, comp in ((s, fy[c]), (n, fy[c])):
                    r = self.red_index[edge]
                    if r >= 0:
                        rhs[r] += comp * half

    def solve_bar(self):
        """Solve with full outer data and sources, zero interface data."""
        mesh = self.mesh
        rhs = np.zeros(self.n_u + self.n_p)
        self._momentum_source(rhs)
        for e, (side, g) in self.pressure_edges.items():
            r = self.red_index[e]
            mid = self._edge_mid(e)
            gval = 0.0 if g is None else float(g(mid[0], mid[1]))
            rhs[r] -= OUTWARD_SIGN[side] * gval * mesh.edge_length(e)
        if self.q is not None:
            qv = np.broadcast_to(
                self.q(mesh.centroids[:, 0], mesh.centroids[:, 1]),
                (mesh.n_cells,))
            rhs[self.n_u:] -= qv * mesh.hx * mesh.hy
        return self._solve(rhs)

    def solve_star(self, lam):
        """Solve with interface pressure data only: rhs = -<lam, v.n_out>.

        `lam` maps interface index -> per-edge values of the projected
        mortar function (tangent-ordered, one value per fine edge).
        """
        rhs = np.zeros(self.n_u + self.n_p)
        for idx, vals in lam.items():
            t = self.traces[idx]
            lengths = np.array([self.mesh.edge_length(e) for e in t.edges])
            r = self.red_index[t.edges]
            rhs[r] -= t.sigma_out * np.asarray(vals) * lengths
        return self._solve(rhs)

    def _edge_mid(self, e):
        mesh = self.mesh
        x0, y0 = mesh.rect[0], mesh.rect[1]
        if e < mesh.n_vedges:
            iy, ix = divmod(e, mesh.nx + 1)
            return (x0 + ix * mesh.hx, y0 + (iy + 0.5) * mesh.hy)
        eh = e - mesh.n_vedges
        iy, ix = divmod(eh, mesh.nx)
        return (x0 + (ix + 0.5) * mesh.hx, y0 + iy * mesh.hy)

    def flux_on_interface(self, sol, iface_index):
        """u.n in the fixed interface frame, one value per fine edge."""
        t = self.traces[iface_index]
        return t.normal_sign * sol.u[t.edges]

    def cell_velocity(self, sol):
        """Cell-center velocity vectors, (n_cells, 2)."""
        mesh = self.mesh
        out = np.empty((mesh.n_cells, 2))
        for iy in range(mesh.ny):
            for ix in range(mesh.nx):
                c = mesh.cell(ix, iy)
                w, e, s, n = mesh.cell_edges(ix, iy)
                out[c, 0] = 0.5 * (sol.u[w] + sol.u[e])
                out[c, 1] = 0.5 * (sol.u[s] + sol.u[n])
        return out


def assemble_darcy(mesh, K, nu, bcs, traces, f=None, q=None):
    """Build and factor the subdomain operator. One factorization."""
    return DarcyOperator(mesh, K, nu, bcs, traces, f=f, q=q)
