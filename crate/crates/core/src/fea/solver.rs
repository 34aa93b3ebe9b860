//! Linear static solve of a discretized frame: assembly into a banded
//! symmetric matrix under a reverse Cuthill-McKee node ordering, followed
//! by a banded Cholesky factorization.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::fea::element::Vec12;
use crate::fea::mesh::DiscretizedFrame;

/// Constrained degrees of freedom at one node, in global (ux, uy, uz, rx, ry, rz) order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub node: usize,
    pub fixed: [bool; 6],
}

impl Support {
    pub fn clamped(node: usize) -> Self {
        Support { node, fixed: [true; 6] }
    }

    pub fn pinned(node: usize) -> Self {
        Support {
            node,
            fixed: [true, true, true, false, false, false],
        }
    }

    /// Free to translate along global X only.
    pub fn roller_x(node: usize) -> Self {
        Support {
            node,
            fixed: [false, true, true, false, false, false],
        }
    }
}

/// Forces (N) and moments (N·m) applied at a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodalLoad {
    pub node: usize,
    pub load: [f64; 6],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Per-node translations (m) and rotations (rad).
    pub displacements: Vec<[f64; 6]>,
    /// Per-node support reactions; zero at free DOFs.
    pub reactions: Vec<[f64; 6]>,
}

impl Solution {
    pub fn element_displacements(&self, a: usize, b: usize) -> Vec12 {
        let mut u = [0.0; 12];
        u[..6].copy_from_slice(&self.displacements[a]);
        u[6..].copy_from_slice(&self.displacements[b]);
        u
    }
}

/// Reverse Cuthill-McKee ordering of the mesh nodes.
fn rcm_order(n_nodes: usize, mesh: &DiscretizedFrame) -> Vec<usize> {
    let mut adjacency = vec![Vec::new(); n_nodes];
    for e in &mesh.elements {
        adjacency[e.a].push(e.b);
        adjacency[e.b].push(e.a);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    let mut visited = vec![false; n_nodes];
    let mut order = Vec::with_capacity(n_nodes);
    // Start each component from an unvisited node of minimum degree.
    while let Some(start) = (0..n_nodes).filter(|&i| !visited[i]).min_by_key(|&i| adjacency[i].len()) {
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            order.push(n);
            let mut next: Vec<usize> = adjacency[n].iter().copied().filter(|&m| !visited[m]).collect();
            next.sort_by_key(|&m| adjacency[m].len());
            for m in next {
                visited[m] = true;
                queue.push_back(m);
            }
        }
    }
    order.reverse();
    order
}

/// Free-DOF numbering: `eq[node][dof]` is the equation index or `None`.
struct DofMap {
    eq: Vec<[Option<usize>; 6]>,
    n_eq: usize,
}

impl DofMap {
    fn new(mesh: &DiscretizedFrame, supports: &[Support], order: &[usize]) -> Self {
        let n_nodes = mesh.nodes.len();
        let mut fixed = vec![[false; 6]; n_nodes];
        for s in supports {
            for k in 0..6 {
                fixed[s.node][k] |= s.fixed[k];
            }
        }
        let mut eq = vec![[None; 6]; n_nodes];
        let mut n_eq = 0;
        for &node in order {
            for k in 0..6 {
                if !fixed[node][k] {
                    eq[node][k] = Some(n_eq);
                    n_eq += 1;
                }
            }
        }
        DofMap { eq, n_eq }
    }

    fn element_eqs(&self, a: usize, b: usize) -> [Option<usize>; 12] {
        let mut out = [None; 12];
        out[..6].copy_from_slice(&self.eq[a]);
        out[6..].copy_from_slice(&self.eq[b]);
        out
    }
}

/// Symmetric positive-definite matrix in lower band storage.
struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place L·Lᵀ factorization.
    fn cholesky(&mut self) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let kmin = lo.max(j.saturating_sub(bw));
                let mut sum = self.data[self.idx(i, j)];
                for k in kmin..j {
                    sum -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if i == j {
                    let original = self.data[self.idx(i, i)];
                    if !(sum > 1e-12 * original.abs()) || !sum.is_finite() {
                        return Err(Error::MechanismDetected { equation: i });
                    }
                    let k = self.idx(i, i);
                    self.data[k] = sum.sqrt();
                } else {
                    let k = self.idx(i, j);
                    self.data[k] = sum / self.data[self.idx(j, j)];
                }
            }
        }
        Ok(())
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut sum = b[i];
            for k in i.saturating_sub(bw)..i {
                sum -= self.data[self.idx(i, k)] * b[k];
            }
            b[i] = sum / self.data[self.idx(i, i)];
        }
        for i in (0..n).rev() {
            let mut sum = b[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                sum -= self.data[self.idx(k, i)] * b[k];
            }
            b[i] = sum / self.data[self.idx(i, i)];
        }
    }
}

/// Solves `K u = F` for the constrained frame.
pub fn solve(mesh: &DiscretizedFrame, loads: &[NodalLoad], supports: &[Support]) -> Result<Solution> {
    let n_nodes = mesh.nodes.len();
    let order = rcm_order(n_nodes, mesh);
    let dofs = DofMap::new(mesh, supports, &order);

    let element_k: Vec<_> = mesh.elements.iter().map(|e| e.global_stiffness()).collect();
    let bw = mesh
        .elements
        .iter()
        .map(|e| {
            let eqs = dofs.element_eqs(e.a, e.b);
            let present = eqs.iter().flatten();
            let lo = present.clone().min().copied().unwrap_or(0);
            let hi = present.max().copied().unwrap_or(0);
            hi - lo
        })
        .max()
        .unwrap_or(0);

    let mut k = BandMatrix::zeros(dofs.n_eq, bw);
    for (e, ke) in mesh.elements.iter().zip(&element_k) {
        let eqs = dofs.element_eqs(e.a, e.b);
        for i in 0..12 {
            let Some(gi) = eqs[i] else { continue };
            for j in 0..=i {
                let Some(gj) = eqs[j] else { continue };
                k.add(gi, gj, ke[i][j]);
                if i != j && gi == gj {
                    // Both ends of a zero-length element share a DOF.
                    k.add(gi, gj, ke[i][j]);
                }
            }
        }
    }

    let mut rhs = vec![0.0; dofs.n_eq];
    let mut applied = vec![[0.0; 6]; n_nodes];
    for l in loads {
        for d in 0..6 {
            applied[l.node][d] += l.load[d];
            if let Some(g) = dofs.eq[l.node][d] {
                rhs[g] += l.load[d];
            }
        }
    }

    k.cholesky()?;
    k.solve_in_place(&mut rhs);

    let mut displacements = vec![[0.0; 6]; n_nodes];
    for (node, eqs) in dofs.eq.iter().enumerate() {
        for d in 0..6 {
            if let Some(g) = eqs[d] {
                displacements[node][d] = rhs[g];
            }
        }
    }

    // Reactions: internal nodal forces minus applied loads at fixed DOFs.
    let mut internal = vec![[0.0; 6]; n_nodes];
    for (e, ke) in mesh.elements.iter().zip(&element_k) {
        let mut u = [0.0; 12];
        u[..6].copy_from_slice(&displacements[e.a]);
        u[6..].copy_from_slice(&displacements[e.b]);
        for i in 0..12 {
            let f: f64 = (0..12).map(|j| ke[i][j] * u[j]).sum();
            let node = if i < 6 { e.a } else { e.b };
            internal[node][i % 6] += f;
        }
    }
    let mut reactions = vec![[0.0; 6]; n_nodes];
    for node in 0..n_nodes {
        for d in 0..6 {
            if dofs.eq[node][d].is_none() {
                reactions[node][d] = internal[node][d] - applied[node][d];
            }
        }
    }

    Ok(Solution {
        displacements,
        reactions,
    })
}

/// Assembled stiffness over free DOFs as a dense matrix, in natural node
/// order. Intended for inspection and tests on small meshes.
pub fn assemble_dense(mesh: &DiscretizedFrame, supports: &[Support]) -> Vec<Vec<f64>> {
    let order: Vec<usize> = (0..mesh.nodes.len()).collect();
    let dofs = DofMap::new(mesh, supports, &order);
    let mut k = vec![vec![0.0; dofs.n_eq]; dofs.n_eq];
    for e in &mesh.elements {
        let ke = e.global_stiffness();
        let eqs = dofs.element_eqs(e.a, e.b);
        for i in 0..12 {
            for j in 0..12 {
                if let (Some(gi), Some(gj)) = (eqs[i], eqs[j]) {
                    k[gi][gj] += ke[i][j];
                }
            }
        }
    }
    k
}

/// Per-element maximum von Mises stress (Pa).
pub fn element_stresses(mesh: &DiscretizedFrame, solution: &Solution) -> Vec<f64> {
    mesh.elements
        .iter()
        .map(|e| e.max_von_mises(&solution.element_displacements(e.a, e.b)))
        .collect()
}
