"""Taylor-Hood P2/P1 discretization of Stokes flow on a triangulated block.

The bilinear form is 2 nu (D(u), D(v)) plus, on edges that meet a Darcy
subdomain, the slip friction term <nu alpha / sqrt(K_l) u.tau, v.tau>
(Beavers-Joseph-Saffman), with K_l sampled from the neighboring Darcy cell.
Velocity Dirichlet data is eliminated strongly; stress edges and interface
data are natural. When the boundary conditions leave rigid-body motions
unconstrained (a subdomain with only stress/interface edges), the kernel is
detected from the assembled form and pinned with explicit Lagrange
constraint rows, so the factored system is always regular.

Interface data lives in the fixed interface frame (n, tau): a solve with
data (lam_n, lam_tau) adds -sigma * <lam_n, v.n> - sigma * <lam_tau, v.tau>
to the right-hand side, where sigma = +1 on the lower-id side and -1 on the
higher-id side; this makes the two sides' conventions mutually adjoint.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import SingularOperatorError
from .geometry import edges_on_span, side_of_interface

SIDES = ("left", "right", "bottom", "top")

# Dunavant degree-4 rule on the reference triangle (weights sum to 1/2)
_QW = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3) * 0.5
_a, _b = 0.445948490915965, 0.091576213509771
_QP = np.array([
    [_a, _a], [1 - 2 * _a, _a], [_a, 1 - 2 * _a],
    [_b, _b], [1 - 2 * _b, _b], [_b, 1 - 2 * _b],
])

# 1D quadratic nodal mass matrix on an edge of unit length, nodes (0, 1/2, 1)
EDGE_MASS = np.array([[4, 2, -1], [2, 16, 2], [-1, 2, 4]]) / 30.0

_G3 = np.array([-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5)])
_G3W = np.array([5, 8, 5]) / 9.0


def _p2_shapes(xi, eta):
    l1 = 1 - xi - eta
    N = np.array([
        l1 * (2 * l1 - 1), xi * (2 * xi - 1), eta * (2 * eta - 1),
        4 * l1 * xi, 4 * xi * eta, 4 * eta * l1,
    ])
    dN = np.array([
        [1 - 4 * l1, 1 - 4 * l1],
        [4 * xi - 1, 0],
        [0, 4 * eta - 1],
        [4 * (l1 - xi), -4 * xi],
        [4 * eta, 4 * xi],
        [-4 * eta, 4 * (l1 - eta)],
    ], dtype=float)
    return N, dN


def _p1_shapes(xi, eta):
    return np.array([1 - xi - eta, xi, eta])


@dataclass(frozen=True)
class StokesBC:
    """Outer condition on one side: prescribed velocity or traction."""

    kind: str  # "velocity" | "stress"
    value: object = None  # callable (x, y) -> (2,) data; None -> zero


@dataclass(frozen=True)
class StokesTrace:
    """Trace bookkeeping of this subdomain on one interface."""

    iface: int
    kind: str  # "sd" | "ss"
    edges: list  # (start, mid, end) P2 node triples, tangent-ordered
    nodes: np.ndarray  # trace node ids ordered by arclength (2 n_edges + 1)
    s_breaks: np.ndarray  # fine-edge breakpoints in arclength
    sigma: int  # +1 lower-id side, -1 higher-id side
    normal: tuple  # fixed interface normal
    tangent: tuple  # fixed interface tangent


def interface_trace(mesh, block, iface, sid):
    """Locate the fine edges and trace nodes of `mesh` on `iface`."""
    side = side_of_interface(block, iface)
    breaks = mesh.side_breaks(side)
    idx = edges_on_span(breaks, iface.span)
    all_edges = mesh.boundary_edges(side)
    edges = [all_edges[k] for k in idx]
    nodes = [edges[0][0]]
    for e in edges:
        nodes.extend(e[1:])
    s = breaks[idx[0]:idx[-1] + 2] - iface.span[0]
    return StokesTrace(iface.index, iface.kind, edges, np.array(nodes), s,
                       iface.side_sign(sid), tuple(iface.normal),
                       tuple(iface.tangent))


@dataclass
class StokesSolution:
    u: np.ndarray  # velocity dofs, interleaved (2*node + comp), full
    p: np.ndarray  # P1 nodal pressures


class StokesOperator:
    """Factored Taylor-Hood operator for one realization's BJS coefficients."""

    def __init__(self, mesh, nu, alpha, bcs, traces, kl=None, f=None):
        self.mesh = mesh
        self.nu = nu
        self.alpha = alpha
        self.bcs = bcs
        self.traces = {t.iface: t for t in traces}
        self.f = f
        self.factorizations = 0
        self.backsolves = 0

        n2 = mesh.n_p2
        self.n_udof = 2 * n2
        self.n_p = mesh.n_p1

        A = self._assemble_viscous().tolil()
        if alpha != 0.0:
            self._add_bjs(A, kl or {})
        B = self._assemble_divergence()

        # classify outer boundary edges
        iface_keys = set()
        for t in traces:
            iface_keys.update(tuple(e) for e in t.edges)
        self.dirichlet = {}  # velocity dof -> value
        self.stress_edges = []  # (edge triple, value callable)
        for side in SIDES:
            bc = bcs.get(side, StokesBC("velocity"))
            for e in mesh.boundary_edges(side):
                if tuple(e) in iface_keys:
                    continue
                if bc.kind == "velocity":
                    for node in e:
                        x, y = mesh.p2_xy[node]
                        val = (0.0, 0.0) if bc.value is None else bc.value(x, y)
                        self.dirichlet[2 * node] = float(val[0])
                        self.dirichlet[2 * node + 1] = float(val[1])
                elif bc.kind == "stress":
                    self.stress_edges.append((e, bc.value))
                else:
                    raise ValueError(f"unknown stokes bc {bc.kind!r}")

        if not self.stress_edges and not traces:
            raise SingularOperatorError(
                "stokes subdomain has only velocity data; "
                "pressure is undetermined"
            )

        dir_dofs = np.array(sorted(self.dirichlet), dtype=int)
        free = np.setdiff1d(np.arange(self.n_udof), dir_dofs)
        self.free = free
        self.dir_dofs = dir_dofs
        self.g_dir = np.zeros(self.n_udof)
        for d, v in self.dirichlet.items():
            self.g_dir[d] = v

        A = A.tocsr()
        B = B.tocsr()
        self._A_full = A
        self._B_full = B
        A_red = A[free][:, free]
        B_red = B[:, free]

        C = self._kernel_constraints(A_red)
        self.kernel_dim = C.shape[0]
        blocks = [[A_red, B_red.T], [B_red, None]]
        if self.kernel_dim:
            Cs = sp.csr_matrix(C)
            blocks = [[A_red, B_red.T, Cs.T],
                      [B_red, None, None],
                      [Cs, None, None]]
        S = sp.bmat(blocks, format="csc")
        try:
            self.lu = splu(S)
        except RuntimeError as exc:
            raise SingularOperatorError(str(exc)) from exc
        self.factorizations += 1

    # -- assembly pieces ---------------------------------------------------

    def _shape_tables(self):
        """Element matrices for the two congruent triangle shapes."""
        mesh = self.mesh
        tables = []
        for verts in (mesh.tri_vertices[0], mesh.tri_vertices[1]):
            J = np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])
            detJ = abs(np.linalg.det(J))
            JinvT = np.linalg.inv(J).T
            Kxx = np.zeros((6, 6))
            Kyy = np.zeros((6, 6))
            Kxy = np.zeros((6, 6))
            G1 = np.zeros((3, 6))
            G2 = np.zeros((3, 6))
            for (xi, eta), w in zip(_QP, _QW):
                _, dN = _p2_shapes(xi, eta)
                grad = dN @ JinvT.T  # (6, 2) physical gradients
                M = _p1_shapes(xi, eta)
                Kxx += w * detJ * np.outer(grad[:, 0], grad[:, 0])
                Kyy += w * detJ * np.outer(grad[:, 1], grad[:, 1])
                Kxy += w * detJ * np.outer(grad[:, 0], grad[:, 1])
                G1 += w * detJ * np.outer(M, grad[:, 0])
                G2 += w * detJ * np.outer(M, grad[:, 1])
            nu = self.nu
            A11 = nu * (2 * Kxx + Kyy)
            A22 = nu * (Kxx + 2 * Kyy)
            A12 = nu * Kxy.T  # A12[i, j] = nu * int dyN_i dxN_j
            tables.append((A11, A22, A12, -G1, -G2))
        return tables

    def _assemble_viscous(self):
        mesh = self.mesh
        tables = self._shape_tables()
        rows, cols, vals = [], [], []
        for t in range(mesh.n_tri):
            A11, A22, A12, _, _ = tables[t % 2]
            nd = mesh.conn_p2[t]
            d1 = 2 * nd
            d2 = 2 * nd + 1
            for i in range(6):
                for j in range(6):
                    rows += [d1[i], d2[i], d1[i], d2[i]]
                    cols += [d1[j], d2[j], d2[j], d1[j]]
                    vals += [A11[i, j], A22[i, j], A12[i, j], A12[j, i]]
        return sp.coo_matrix((vals, (rows, cols)),
                             shape=(self.n_udof, self.n_udof))

    def _assemble_divergence(self):
        mesh = self.mesh
        tables = self._shape_tables()
        rows, cols, vals = [], [], []
        for t in range(mesh.n_tri):
            _, _, _, B1, B2 = tables[t % 2]
            nd = mesh.conn_p2[t]
            pd = mesh.conn_p1[t]
            for i in range(3):
                for j in range(6):
                    rows += [pd[i], pd[i]]
                    cols += [2 * nd[j], 2 * nd[j] + 1]
                    vals += [B1[i, j], B2[i, j]]
        return sp.coo_matrix((vals, (rows, cols)),
                             shape=(self.n_p, self.n_udof))

    def _add_bjs(self, A, kl):
        """Slip friction nu*alpha/sqrt(K_l) (u.tau, v.tau) on sd edges."""
        for t in self.traces.values():
            if t.kind != "sd":
                continue
            kvals = kl.get(t.iface)
            if kvals is None:
                raise ValueError(f"BJS needs K_l values for interface {t.iface}")
            tau = np.asarray(t.tangent)
            for e_idx, triple in enumerate(t.edges):
                L = t.s_breaks[e_idx + 1] - t.s_breaks[e_idx]
                coef = self.nu * self.alpha / np.sqrt(kvals[e_idx])
                Me = coef * L * EDGE_MASS
                for a in range(2):
                    for b in range(2):
                        tt = tau[a] * tau[b]
                        if tt == 0.0:
                            continue
                        for i in range(3):
                            for j in range(3):
                                A[2 * triple[i] + a, 2 * triple[j] + b] += \
                                    tt * Me[i, j]

    def _kernel_constraints(self, A_red):
        """Rigid-body motions still in the kernel of the reduced form."""
        mesh = self.mesh
        xy = mesh.p2_xy
        xc, yc = xy.mean(axis=0)
        Z = np.zeros((self.n_udof, 3))
        Z[0::2, 0] = 1.0
        Z[1::2, 1] = 1.0
        Z[0::2, 2] = -(xy[:, 1] - yc)
        Z[1::2, 2] = xy[:, 0] - xc
        Zf = Z[self.free]
        norms = np.linalg.norm(Zf, axis=0)
        norms[norms == 0] = 1.0
        Zf = Zf / norms
        G = Zf.T @ (A_red @ Zf)
        lam, vecs = np.linalg.eigh(G)
        scale = max(A_red.diagonal().max(), 1e-30)
        keep = lam <= 1e-10 * scale
        if not keep.any():
            return np.zeros((0, len(self.free)))
        C = (Zf @ vecs[:, keep]).T
        C = C / np.linalg.norm(C, axis=1)[:, None]
        return C

    # -- right-hand sides and solves ---------------------------------------

    def _nsys(self):
        return len(self.free) + self.n_p + self.kernel_dim

    def _solve(self, Fu, Fp, lift=True):
        """Backsolve with full-size velocity rhs Fu; returns full fields.

        With lift=False the outer Dirichlet data is treated as zero; star
        solves use this so the interface operator stays linear in lambda.
        """
        rhs = np.zeros(self._nsys())
        if lift:
            Fu = Fu - self._A_full @ self.g_dir
            Fp = Fp - self._B_full @ self.g_dir
        rhs[:len(self.free)] = Fu[self.free]
        rhs[len(self.free):len(self.free) + self.n_p] = Fp
        self.backsolves += 1
        sol = self.lu.solve(rhs)
        u = self.g_dir.copy() if lift else np.zeros(self.n_udof)
        u[self.free] = sol[:len(self.free)]
        p = sol[len(self.free):len(self.free) + self.n_p]
        return StokesSolution(u, p)

    def _body_force(self, Fu):
        mesh = self.mesh
        if self.f is None:
            return
        for t in range(mesh.n_tri):
            verts = mesh.tri_vertices[t]
            J = np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])
            detJ = abs(np.linalg.det(J))
            nd = mesh.conn_p2[t]
            for (xi, eta), w in zip(_QP, _QW):
                N, _ = _p2_shapes(xi, eta)
                x, y = verts[0] + J @ np.array([xi, eta])
                fx, fy = self.f(x, y)
                Fu[2 * nd] += w * detJ * fx * N
                Fu[2 * nd + 1] += w * detJ * fy * N
        return

    def solve_bar(self):
        """Solve with body force, outer Dirichlet lifts, outer tractions."""
        Fu = np.zeros(self.n_udof)
        self._body_force(Fu)
        mesh = self.mesh
        for triple, g in self.stress_edges:
            if g is None:
                continue
            p0 = mesh.p2_xy[triple[0]]
            p1 = mesh.p2_xy[triple[2]]
            L = np.linalg.norm(p1 - p0)
            for gx, gw in zip(_G3, _G3W):
                s = 0.5 * (gx + 1)  # in [0, 1]
                x, y = p0 + s * (p1 - p0)
                tx, ty = g(x, y)
                N = np.array([(1 - s) * (1 - 2 * s), 4 * s * (1 - s),
                              s * (2 * s - 1)])
                for i, node in enumerate(triple):
                    Fu[2 * node] += gw * 0.5 * L * tx * N[i]
                    Fu[2 * node + 1] += gw * 0.5 * L * ty * N[i]
        return self._solve(Fu, np.zeros(self.n_p))

    def solve_star(self, lam):
        """Solve with interface data only: -sigma <lam_n, v.n> - sigma <lam_t, v.tau>.

        `lam` maps interface index -> (lam_n, lam_tau) nodal trace values
        (lam_tau may be None on sd interfaces). Homogeneous outer data.
        """
        Fu = np.zeros(self.n_udof)
        for idx, (lam_n, lam_t) in lam.items():
            t = self.traces[idx]
            nvec = np.asarray(t.normal)
            tvec = np.asarray(t.tangent)
            comps = [(np.asarray(lam_n, dtype=float), nvec)]
            if lam_t is not None:
                comps.append((np.asarray(lam_t, dtype=float), tvec))
            for vals, direction in comps:
                for e_idx, triple in enumerate(t.edges):
                    L = t.s_breaks[e_idx + 1] - t.s_breaks[e_idx]
                    loc = vals[2 * e_idx:2 * e_idx + 3]
                    contrib = -t.sigma * L * (EDGE_MASS @ loc)
                    for i, node in enumerate(triple):
                        Fu[2 * node] += direction[0] * contrib[i]
                        Fu[2 * node + 1] += direction[1] * contrib[i]
        return self._solve(Fu, np.zeros(self.n_p), lift=False)

    # -- postprocessing -----------------------------------------------------

    def velocity_trace(self, sol, iface_index):
        """(u.n, u.tau) flat nodal values in the fixed interface frame.

        Arrays have length 2*n_edges + 1, matching the 1D quadratic trace
        lattice (vertex, midpoint, vertex, ...) that solve_star consumes.
        """
        t = self.traces[iface_index]
        ux = sol.u[2 * t.nodes]
        uy = sol.u[2 * t.nodes + 1]
        n = t.normal
        tau = t.tangent
        return ux * n[0] + uy * n[1], ux * tau[0] + uy * tau[1]

    def cell_values(self, sol):
        """Velocity and pressure at triangle centroids: (n_tri, 2), (n_tri,)."""
        mesh = self.mesh
        N, _ = _p2_shapes(1 / 3, 1 / 3)
        M = _p1_shapes(1 / 3, 1 / 3)
        vel = np.empty((mesh.n_tri, 2))
        prs = np.empty(mesh.n_tri)
        for t in range(mesh.n_tri):
            nd = mesh.conn_p2[t]
            vel[t, 0] = N @ sol.u[2 * nd]
            vel[t, 1] = N @ sol.u[2 * nd + 1]
            prs[t] = M @ sol.p[mesh.conn_p1[t]]
        return vel, prs


def assemble_stokes(mesh, nu, alpha, bcs, traces, kl=None, f=None):
    """Build and factor the subdomain operator. One factorization."""
    return StokesOperator(mesh, nu, alpha, bcs, traces, kl=kl, f=f)
