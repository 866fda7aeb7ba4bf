//! Uniform Cartesian grids, region masks and the finite-difference Laplacians.
//!
//! Operators are stored in *stiffness* form `A = d · W · L_h`, where `L_h` is
//! the second-order central-difference Laplacian with mirror-ghost Neumann
//! closure on ∂Ω and `W` holds the trapezoidal quadrature weights. `A` is
//! symmetric with zero row sums; `L_h = W⁻¹ A` is what acts on grid functions.

use crate::error::{Error, Result};
use crate::landscape::Landscape;
use crate::linalg::CsrMatrix;

/// Minimum nodes per axis accepted by [`build_grid`].
pub const MIN_NODES_PER_AXIS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Node in Ω∖B̄.
    Habitat,
    /// Node on the snapped ∂B.
    Interface,
    /// Node inside the snapped B.
    Degraded,
}

#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    landscape: Landscape,
    nodes: Vec<usize>,
    h: Vec<f64>,
    coords: Vec<Vec<f64>>,
    snapped_b: Vec<Vec<(usize, usize)>>,
    snap_distance: f64,
    degraded_fraction: Vec<f64>,
    class: Vec<NodeClass>,
    weights: Vec<f64>,
    growth: Vec<f64>,
}

/// Build a uniform grid with `nodes_per_axis` nodes along every axis, snapping
/// the faces of B to the nearest node.
pub fn build_grid(l: &Landscape, nodes_per_axis: usize) -> Result<DiscreteDomain> {
    if nodes_per_axis < MIN_NODES_PER_AXIS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_NODES_PER_AXIS} nodes per axis, got {nodes_per_axis}"
        )));
    }
    let dim = l.dim();
    let nodes = vec![nodes_per_axis; dim];
    let mut h = Vec::with_capacity(dim);
    let mut coords = Vec::with_capacity(dim);
    for iv in &l.omega().axes {
        let hk = iv.len() / (nodes_per_axis - 1) as f64;
        h.push(hk);
        coords.push(
            (0..nodes_per_axis)
                .map(|i| {
                    if i + 1 == nodes_per_axis {
                        iv.hi
                    } else {
                        iv.lo + i as f64 * hk
                    }
                })
                .collect::<Vec<_>>(),
        );
    }

    let mut snapped_b = Vec::new();
    let mut snap_distance = 0.0f64;
    for (k, b) in l.b_region().iter().enumerate() {
        let mut ranges = Vec::with_capacity(dim);
        for (a, iv) in b.axes.iter().enumerate() {
            let x0 = l.omega().axes[a].lo;
            let lo = ((iv.lo - x0) / h[a]).round() as usize;
            let hi = ((iv.hi - x0) / h[a]).round() as usize;
            snap_distance = snap_distance
                .max((coords[a][lo] - iv.lo).abs())
                .max((coords[a][hi] - iv.hi).abs());
            if lo < 1 || hi + 2 > nodes_per_axis {
                return Err(Error::Geometry(format!(
                    "B component {k} touches the outer boundary at this resolution"
                )));
            }
            if hi < lo + 2 {
                return Err(Error::Geometry(format!(
                    "B component {k} is too thin to contain a grid node along axis {a}"
                )));
            }
            ranges.push((lo, hi));
        }
        for (j, other) in snapped_b.iter().enumerate() {
            let apart = ranges.iter().zip(other).any(
                |(&(alo, ahi), &(blo, bhi)): (&(usize, usize), &(usize, usize))| {
                    alo > bhi + 1 || blo > ahi + 1
                },
            );
            if !apart {
                return Err(Error::Geometry(format!(
                    "B components {j} and {k} merge at this resolution"
                )));
            }
        }
        snapped_b.push(ranges);
    }

    let n: usize = nodes.iter().product();
    let mut degraded_fraction = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut growth = vec![0.0; n];
    let mut x = vec![0.0; dim];
    for (idx, ((bf, w), m)) in degraded_fraction
        .iter_mut()
        .zip(weights.iter_mut())
        .zip(growth.iter_mut())
        .enumerate()
    {
        let ix = unravel(&nodes, idx);
        *w = 1.0;
        for a in 0..dim {
            x[a] = coords[a][ix[a]];
            let edge = ix[a] == 0 || ix[a] + 1 == nodes[a];
            *w *= if edge { 0.5 * h[a] } else { h[a] };
        }
        *bf = snapped_b
            .iter()
            .map(|ranges| {
                ranges
                    .iter()
                    .zip(&ix)
                    .map(|(&(lo, hi), &i)| {
                        if i > lo && i < hi {
                            1.0
                        } else if i == lo || i == hi {
                            0.5
                        } else {
                            0.0
                        }
                    })
                    .product::<f64>()
            })
            .sum();
        *m = l.growth().m_at(&x);
    }
    let class = degraded_fraction
        .iter()
        .map(|&bf| {
            if bf == 0.0 {
                NodeClass::Habitat
            } else if bf == 1.0 {
                NodeClass::Degraded
            } else {
                NodeClass::Interface
            }
        })
        .collect();

    Ok(DiscreteDomain {
        landscape: l.clone(),
        nodes,
        h,
        coords,
        snapped_b,
        snap_distance,
        degraded_fraction,
        class,
        weights,
        growth,
    })
}

fn unravel(nodes: &[usize], mut idx: usize) -> Vec<usize> {
    let mut ix = Vec::with_capacity(nodes.len());
    for &n in nodes {
        ix.push(idx % n);
        idx /= n;
    }
    ix
}

impl DiscreteDomain {
    pub fn landscape(&self) -> &Landscape {
        &self.landscape
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mesh_width(&self) -> &[f64] {
        &self.h
    }

    pub fn axis_coords(&self, axis: usize) -> &[f64] {
        &self.coords[axis]
    }

    /// Axis-wise indices of a node; the first axis varies fastest.
    pub fn axis_index(&self, idx: usize) -> Vec<usize> {
        unravel(&self.nodes, idx)
    }

    pub fn node_index(&self, ix: &[usize]) -> usize {
        ix.iter()
            .zip(&self.nodes)
            .rev()
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn coord(&self, idx: usize) -> Vec<f64> {
        self.axis_index(idx)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coords[a][i])
            .collect()
    }

    /// Snapped B as node index ranges `[lo, hi]` per axis, per component.
    pub fn snapped_b(&self) -> &[Vec<(usize, usize)>] {
        &self.snapped_b
    }

    /// Largest distance any face of B moved when snapped to the grid.
    pub fn snap_distance(&self) -> f64 {
        self.snap_distance
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn nodes_of(&self, class: NodeClass) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.class[i] == class)
            .collect()
    }

    /// Fraction of each node's dual cell lying in B (1 inside, 1/2 on faces, 1/4 at 2D corners).
    pub fn degraded_fraction(&self) -> &[f64] {
        &self.degraded_fraction
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `m` sampled at the nodes.
    pub fn growth(&self) -> &[f64] {
        &self.growth
    }

    pub fn max_growth(&self) -> f64 {
        self.growth
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn has_degraded_region(&self) -> bool {
        !self.snapped_b.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn omega_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn b_measure(&self) -> f64 {
        self.integrate(&self.degraded_fraction)
    }

    /// Linearized growth weight `m_c = 𝟙_{Ω∖B} m − c 𝟙_B` at the nodes.
    pub fn degradation_weight(&self, c: f64) -> Vec<f64> {
        self.degraded_fraction
            .iter()
            .zip(&self.growth)
            .map(|(bf, m)| (1.0 - bf) * m - bf * c)
            .collect()
    }

    /// Quadrature version of `(1/|B|) ∫_{Ω∖B} m`.
    pub fn c_star(&self) -> Result<f64> {
        let b = self.b_measure();
        if b <= 0.0 {
            return Err(Error::Precondition(
                "c_star requires a nonempty degraded region".into(),
            ));
        }
        let habitat: Vec<f64> = self
            .degraded_fraction
            .iter()
            .zip(&self.growth)
            .map(|(bf, m)| (1.0 - bf) * m)
            .collect();
        Ok(self.integrate(&habitat) / b)
    }

    /// Visit every grid edge as `(node, neighbour, weight)`, where the weight
    /// makes `Σ weight · (v_q − v_p)²` the trapezoidal `∫|∇v|²`.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize, f64)) {
        let dim = self.dim();
        for idx in 0..self.len() {
            let ix = self.axis_index(idx);
            for a in 0..dim {
                if ix[a] + 1 >= self.nodes[a] {
                    continue;
                }
                let mut jx = ix.clone();
                jx[a] += 1;
                let cross: f64 = (0..dim)
                    .filter(|&b| b != a)
                    .map(|b| {
                        let edge = ix[b] == 0 || ix[b] + 1 == self.nodes[b];
                        if edge {
                            0.5 * self.h[b]
                        } else {
                            self.h[b]
                        }
                    })
                    .product();
                f(idx, self.node_index(&jx), cross / self.h[a]);
            }
        }
    }

    /// Nodes sharing an edge or a corner with `idx`.
    pub fn neighbours(&self, idx: usize) -> Vec<usize> {
        let ix = self.axis_index(idx);
        let dim = self.dim();
        let mut out = Vec::new();
        let offsets: Vec<Vec<i64>> = if dim == 1 {
            vec![vec![-1], vec![1]]
        } else {
            let mut v = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if dx != 0 || dy != 0 {
                        v.push(vec![dx, dy]);
                    }
                }
            }
            v
        };
        'outer: for off in offsets {
            let mut jx = Vec::with_capacity(dim);
            for a in 0..dim {
                let j = ix[a] as i64 + off[a];
                if j < 0 || j >= self.nodes[a] as i64 {
                    continue 'outer;
                }
                jx.push(j as usize);
            }
            out.push(self.node_index(&jx));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `dΔ` on all nodes with zero-flux closure on ∂Ω.
    NeumannFull,
    /// `dΔ` on Ω∖B̄ nodes only, zero Dirichlet data on ∂B, Neumann on ∂Ω.
    DestructionRestricted,
}

/// Symmetric stiffness form of `dΔ_h` together with its degrees of freedom.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    kind: OperatorKind,
    diffusion: f64,
    stiffness: CsrMatrix,
    weights: Vec<f64>,
    dofs: Vec<usize>,
}

impl SparseOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// `A = d W L_h`, symmetric.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Grid node of each degree of freedom.
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// `dΔ_h v` on the degrees of freedom.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut y = self.stiffness.mul_vec(v);
        y.iter_mut().zip(&self.weights).for_each(|(y, w)| *y /= w);
        y
    }

    /// `W^{-1/2} A W^{-1/2}`: the operator in coordinates where the Euclidean
    /// inner product is the trapezoidal L² product.
    pub fn symmetric_scaled(&self) -> CsrMatrix {
        let s: Vec<f64> = self.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
        self.stiffness.scale(&s, &s)
    }

    /// Pick the degree-of-freedom entries out of a full-grid vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&i| full[i]).collect()
    }

    /// Scatter degree-of-freedom values into a zero full-grid vector.
    pub fn extend_by_zero(&self, values: &[f64], grid_len: usize) -> Vec<f64> {
        let mut full = vec![0.0; grid_len];
        for (&i, &v) in self.dofs.iter().zip(values) {
            full[i] = v;
        }
        full
    }

    pub fn to_matrix_market(&self) -> String {
        self.stiffness.to_matrix_market()
    }
}

pub fn assemble_neumann_laplacian(g: &DiscreteDomain, d: f64) -> SparseOperator {
    let mut triplets = Vec::with_capacity(g.len() * (1 + 2 * g.dim()));
    g.for_each_edge(|p, q, e| {
        let e = d * e;
        triplets.push((p, p, -e));
        triplets.push((q, q, -e));
        triplets.push((p, q, e));
        triplets.push((q, p, e));
    });
    SparseOperator {
        kind: OperatorKind::NeumannFull,
        diffusion: d,
        stiffness: CsrMatrix::from_triplets(g.len(), &triplets),
        weights: g.weights().to_vec(),
        dofs: (0..g.len()).collect(),
    }
}

pub fn assemble_destruction_laplacian(g: &DiscreteDomain, d: f64) -> SparseOperator {
    let full = assemble_neumann_laplacian(g, d);
    let dofs = g.nodes_of(NodeClass::Habitat);
    SparseOperator {
        kind: OperatorKind::DestructionRestricted,
        diffusion: d,
        stiffness: full.stiffness.submatrix(&dofs),
        weights: dofs.iter().map(|&i| g.weights()[i]).collect(),
        dofs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::Landscape;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn fig1(d: f64) -> Landscape {
        Landscape::interval((-10.0, 10.0), &[(-6.0, 6.0)], d, 1.0).unwrap()
    }

    #[test]
    fn grid_counts_reference_geometry() {
        let g = build_grid(&fig1(10.0), 2001).unwrap();
        assert_abs_diff_eq!(g.mesh_width()[0], 0.01, epsilon = 1e-15);
        assert_eq!(g.nodes_of(NodeClass::Degraded).len(), 1199);
        let iface = g.nodes_of(NodeClass::Interface);
        assert_eq!(iface.len(), 2);
        for i in iface {
            assert_abs_diff_eq!(g.coord(i)[0].abs(), 6.0, epsilon = 1e-12);
        }
        assert_eq!(g.snap_distance(), 0.0);
        assert_abs_diff_eq!(g.b_measure(), 12.0, epsilon = 1e-11);
    }

    #[test]
    fn empty_b_has_no_masks() {
        let l = Landscape::interval((-10.0, 10.0), &[], 1.0, 1.0).unwrap();
        let g = build_grid(&l, 101).unwrap();
        assert!(g.nodes_of(NodeClass::Degraded).is_empty());
        assert!(g.nodes_of(NodeClass::Interface).is_empty());
        let n = assemble_neumann_laplacian(&g, 1.0);
        let dstr = assemble_destruction_laplacian(&g, 1.0);
        assert_eq!(n.stiffness(), dstr.stiffness());
    }

    #[test]
    fn thin_b_rejected() {
        let l = Landscape::interval((-10.0, 10.0), &[(-0.001, 0.001)], 1.0, 1.0).unwrap();
        assert!(matches!(build_grid(&l, 101), Err(Error::Geometry(_))));
        assert!(matches!(
            build_grid(&fig1(1.0), 8),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn masks_partition_and_interface_adjacency() {
        for (l, n) in [
            (fig1(1.0), 201),
            (
                Landscape::interval((-10.0, 10.0), &[(-2.0, 2.0), (4.0, 6.0)], 1.0, 1.0).unwrap(),
                101,
            ),
            (
                crate::landscape::build_landscape(
                    "dim = 2\nomega = [[0, 4], [0, 2]]\nb = [[[1, 2], [0.5, 1.5]]]\nd = 1\nm_default = 1\n",
                )
                .unwrap(),
                33,
            ),
        ] {
            let g = build_grid(&l, n).unwrap();
            let counts = [NodeClass::Habitat, NodeClass::Interface, NodeClass::Degraded]
                .map(|c| g.nodes_of(c).len());
            assert_eq!(counts.iter().sum::<usize>(), g.len());
            for i in g.nodes_of(NodeClass::Interface) {
                let nb = g.neighbours(i);
                assert!(nb.iter().any(|&j| g.class(j) == NodeClass::Degraded));
                assert!(nb.iter().any(|&j| g.class(j) == NodeClass::Habitat));
            }
            assert_abs_diff_eq!(g.omega_measure(), l.omega_measure(), epsilon = 1e-12);
            assert_abs_diff_eq!(g.b_measure(), l.b_measure(), epsilon = 1e-10);
        }
    }

    #[test]
    fn discrete_b_measure_converges_under_snapping() {
        let l = Landscape::interval((-10.0, 10.0), &[(-3.33, 2.71)], 1.0, 1.0).unwrap();
        let coarse = build_grid(&l, 101).unwrap();
        let fine = build_grid(&l, 1001).unwrap();
        let err_c = (coarse.b_measure() - l.b_measure()).abs();
        let err_f = (fine.b_measure() - l.b_measure()).abs();
        assert!(err_f < err_c);
        assert!(err_f <= 2.0 * fine.snap_distance() + 1e-12);
        assert!(err_c <= 2.0 * coarse.snap_distance() + 1e-12);
    }

    #[test]
    fn neumann_kernel_and_symmetry() {
        let g = build_grid(&fig1(3.0), 101).unwrap();
        let op = assemble_neumann_laplacian(&g, 3.0);
        let ones = vec![1.0; g.len()];
        assert!(op.apply(&ones).iter().all(|v| v.abs() < 1e-10));
        assert!(op.stiffness().symmetry_defect() < 1e-12);
        assert!(op.stiffness().row_sums().iter().all(|s| s.abs() < 1e-9));
        assert!(op.symmetric_scaled().symmetry_defect() < 1e-12);
    }

    fn cosine_error(n: usize) -> f64 {
        let l = Landscape::interval((-10.0, 10.0), &[], 1.0, 1.0).unwrap();
        let g = build_grid(&l, n).unwrap();
        let op = assemble_neumann_laplacian(&g, 1.0);
        let k = PI / 20.0;
        // cos(k(x+10)) satisfies the zero-flux condition at both ends
        let v: Vec<f64> = (0..g.len())
            .map(|i| (k * (g.coord(i)[0] + 10.0)).cos())
            .collect();
        op.apply(&v)
            .iter()
            .zip(&v)
            .map(|(lv, vi)| (lv + k * k * vi).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn neumann_second_order() {
        let e1 = cosine_error(201);
        let e2 = cosine_error(401);
        assert!(e1 < 1e-5, "{e1}");
        let ratio = e1 / e2;
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn destruction_operator_restricts_and_scales() {
        let g = build_grid(&fig1(1.0), 201).unwrap();
        let o1 = assemble_destruction_laplacian(&g, 1.0);
        let o10 = assemble_destruction_laplacian(&g, 10.0);
        assert_eq!(o1.len(), g.nodes_of(NodeClass::Habitat).len());
        for (a, b) in o1
            .stiffness()
            .triplets()
            .iter()
            .zip(o10.stiffness().triplets())
        {
            assert_eq!(a.2 * 10.0, b.2);
        }
        assert!(o1.stiffness().symmetry_defect() < 1e-12);
        let full = o1.extend_by_zero(&vec![1.0; o1.len()], g.len());
        for i in 0..g.len() {
            if g.class(i) != NodeClass::Habitat {
                assert_eq!(full[i], 0.0);
            }
        }
    }

    #[test]
    fn quadrature_c_star_matches_exact() {
        let g = build_grid(&fig1(1.0), 2001).unwrap();
        assert_abs_diff_eq!(g.c_star().unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn two_dimensional_corner_weights() {
        let l = crate::landscape::build_landscape(
            "dim = 2\nomega = [[0, 4], [0, 2]]\nb = [[[1, 2], [0.5, 1.5]]]\nd = 1\nm_default = 1\n",
        )
        .unwrap();
        let g = build_grid(&l, 17).unwrap();
        let corner = g.node_index(&[4, 4]);
        assert_eq!(g.degraded_fraction()[corner], 0.25);
        let face = g.node_index(&[6, 4]);
        assert_eq!(g.degraded_fraction()[face], 0.5);
        assert_eq!(g.class(g.node_index(&[6, 8])), NodeClass::Degraded);
    }
}
