//! Two-node, twelve-DOF Euler-Bernoulli space-frame element.
//!
//! Local DOF order per node: (u, v, w, θx, θy, θz); the local x axis runs
//! from node a to node b.

use crate::model::{Material, MaterialSpec, Point3, TubeSection};

pub type Mat12 = [[f64; 12]; 12];
pub type Vec12 = [f64; 12];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamElement {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub section: TubeSection,
    pub material: Material,
    /// Rows are the local x, y, z unit vectors in global coordinates.
    pub axes: [[f64; 3]; 3],
    /// Index of the frame member this element was cut from.
    pub member: usize,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Orthonormal local frame for an element from `pa` to `pb`.
pub fn local_axes(pa: Point3, pb: Point3) -> [[f64; 3]; 3] {
    let x = normalize([pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]]);
    let reference = if x[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let y = normalize(cross(reference, x));
    let z = cross(x, y);
    [x, y, z]
}

impl BeamElement {
    pub fn props(&self) -> MaterialSpec {
        self.material.properties()
    }

    /// Stiffness matrix in local coordinates.
    pub fn local_stiffness(&self) -> Mat12 {
        let m = self.props();
        let (e, g) = (m.elastic_modulus, m.shear_modulus);
        let s = &self.section;
        let l = self.length;
        let (l2, l3) = (l * l, l * l * l);
        let ea = e * s.area / l;
        let gj = g * s.torsion_constant / l;
        let ei = e * s.bending_inertia;
        let (b12, b6, b4, b2) = (12.0 * ei / l3, 6.0 * ei / l2, 4.0 * ei / l, 2.0 * ei / l);

        let mut k = [[0.0; 12]; 12];
        let mut set = |i: usize, j: usize, v: f64| {
            k[i][j] = v;
            k[j][i] = v;
        };
        set(0, 0, ea);
        set(0, 6, -ea);
        set(6, 6, ea);
        set(3, 3, gj);
        set(3, 9, -gj);
        set(9, 9, gj);
        // bending in the local x-y plane (v, θz)
        set(1, 1, b12);
        set(1, 5, b6);
        set(1, 7, -b12);
        set(1, 11, b6);
        set(5, 5, b4);
        set(5, 7, -b6);
        set(5, 11, b2);
        set(7, 7, b12);
        set(7, 11, -b6);
        set(11, 11, b4);
        // bending in the local x-z plane (w, θy)
        set(2, 2, b12);
        set(2, 4, -b6);
        set(2, 8, -b12);
        set(2, 10, -b6);
        set(4, 4, b4);
        set(4, 8, b6);
        set(4, 10, b2);
        set(8, 8, b12);
        set(8, 10, b6);
        set(10, 10, b4);
        k
    }

    /// Rotates a global 12-vector into local coordinates.
    pub fn to_local(&self, global: &Vec12) -> Vec12 {
        let mut out = [0.0; 12];
        for blk in 0..4 {
            for i in 0..3 {
                out[3 * blk + i] = (0..3).map(|j| self.axes[i][j] * global[3 * blk + j]).sum();
            }
        }
        out
    }

    /// Stiffness matrix in global coordinates, `Tᵀ k T`.
    pub fn global_stiffness(&self) -> Mat12 {
        let k = self.local_stiffness();
        let r = &self.axes;
        let mut out = [[0.0; 12]; 12];
        for bi in 0..4 {
            for bj in 0..4 {
                // Block (bi, bj): Rᵀ K_ij R
                let mut kr = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        kr[i][j] = (0..3).map(|m| k[3 * bi + i][3 * bj + m] * r[m][j]).sum();
                    }
                }
                for i in 0..3 {
                    for j in 0..3 {
                        out[3 * bi + i][3 * bj + j] = (0..3).map(|m| r[m][i] * kr[m][j]).sum();
                    }
                }
            }
        }
        out
    }

    /// Element end forces in local coordinates for global end displacements.
    pub fn local_end_forces(&self, global_displacements: &Vec12) -> Vec12 {
        let u = self.to_local(global_displacements);
        let k = self.local_stiffness();
        let mut f = [0.0; 12];
        for i in 0..12 {
            f[i] = (0..12).map(|j| k[i][j] * u[j]).sum();
        }
        f
    }

    /// Largest von Mises stress over the two end sections, combining axial
    /// and resultant-bending extreme-fibre stress with torsional shear.
    pub fn max_von_mises(&self, global_displacements: &Vec12) -> f64 {
        let f = self.local_end_forces(global_displacements);
        let s = &self.section;
        let c = s.outer_radius();
        let end = |n: f64, t: f64, my: f64, mz: f64| {
            let sigma = (n / s.area).abs() + my.hypot(mz) * c / s.bending_inertia;
            let tau = t.abs() * c / s.torsion_constant;
            (sigma * sigma + 3.0 * tau * tau).sqrt()
        };
        end(f[0], f[3], f[4], f[5]).max(end(f[6], f[9], f[10], f[11]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::section_from;

    fn element(pa: Point3, pb: Point3) -> BeamElement {
        let d: f64 = (0..3).map(|k| (pb[k] - pa[k]).powi(2)).sum::<f64>().sqrt();
        BeamElement {
            a: 0,
            b: 1,
            length: d,
            section: section_from(0.9, 0.05).unwrap(),
            material: Material::Aluminum,
            axes: local_axes(pa, pb),
            member: 0,
        }
    }

    #[test]
    fn axes_are_orthonormal() {
        for pb in [[1.0, 0.0, 0.0], [0.0, 0.0, 2.0], [0.3, -0.4, 0.9], [0.0, 1.0, 0.0], [0.1, 0.0, -3.0]] {
            let ax = local_axes([0.0; 3], pb);
            for i in 0..3 {
                for j in 0..3 {
                    let dot: f64 = (0..3).map(|k| ax[i][k] * ax[j][k]).sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expected).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn global_stiffness_is_symmetric_with_rigid_body_null_space() {
        let e = element([0.1, 0.2, 0.3], [0.5, -0.1, 0.9]);
        let k = e.global_stiffness();
        let scale = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..12 {
            for j in 0..12 {
                assert!((k[i][j] - k[j][i]).abs() <= 1e-12 * scale);
            }
        }
        // A rigid translation produces no forces.
        let t = [1.0, -2.0, 0.5];
        let u: Vec12 = std::array::from_fn(|i| if i % 6 < 3 { t[i % 3] } else { 0.0 });
        for row in &k {
            let f: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
            assert!(f.abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn unloaded_element_has_zero_stress() {
        let e = element([0.0; 3], [1.0, 0.0, 0.0]);
        assert_eq!(e.max_von_mises(&[0.0; 12]), 0.0);
    }
}
