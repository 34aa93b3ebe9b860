//! Static linear beam-element analysis of walker frames.

pub mod element;
pub mod mesh;
pub mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_frame_with, mass_properties, DesignVector, FeasibilityLimits, SensorNodes};
use crate::performance::PerformanceRecord;
use crate::units::{in_to_m, kg_to_lb, lbf_to_n, m_to_in};
pub use element::BeamElement;
pub use mesh::{discretize, element_count, DiscretizedFrame};
pub use solver::{assemble_dense, element_stresses, solve, NodalLoad, Solution, Support};

/// Handle loads, lbf.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadCase {
    /// Total downward force, split equally between the handles.
    pub handle_down_force: f64,
    /// Outward lateral force applied to each handle.
    pub handle_lateral_force: f64,
}

impl Default for LoadCase {
    fn default() -> Self {
        LoadCase {
            handle_down_force: 350.0,
            handle_lateral_force: 17.5,
        }
    }
}

impl LoadCase {
    pub fn scaled(&self, k: f64) -> Self {
        LoadCase {
            handle_down_force: self.handle_down_force * k,
            handle_lateral_force: self.handle_lateral_force * k,
        }
    }

    /// Nodal loads (N) at the handle sensor nodes; left is +Y.
    pub fn nodal_loads(&self, sensors: &SensorNodes) -> Vec<NodalLoad> {
        let down = lbf_to_n(self.handle_down_force) / 2.0;
        let lateral = lbf_to_n(self.handle_lateral_force);
        sensors
            .handles
            .iter()
            .zip([1.0, -1.0])
            .map(|(&node, side)| NodalLoad {
                node,
                load: [0.0, side * lateral, -down, 0.0, 0.0, 0.0],
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TipCondition {
    /// All translations fixed, rotations free.
    Pinned,
    /// Vertical and lateral translations fixed; free to roll longitudinally.
    Roller,
    /// All six DOFs fixed.
    Clamped,
}

impl TipCondition {
    fn support(self, node: usize) -> Support {
        match self {
            TipCondition::Pinned => Support::pinned(node),
            TipCondition::Roller => Support::roller_x(node),
            TipCondition::Clamped => Support::clamped(node),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySpec {
    pub rear_tip_condition: TipCondition,
    pub front_tip_condition: TipCondition,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec {
            rear_tip_condition: TipCondition::Pinned,
            front_tip_condition: TipCondition::Roller,
        }
    }
}

impl BoundarySpec {
    pub fn supports(&self, sensors: &SensorNodes) -> Vec<Support> {
        let rear = sensors.rear_tips.iter().map(|&n| self.rear_tip_condition.support(n));
        let front = sensors.front_tips.iter().map(|&n| self.front_tip_condition.support(n));
        rear.chain(front).collect()
    }
}

fn sensors_of(mesh: &DiscretizedFrame) -> Result<SensorNodes> {
    mesh.sensors
        .ok_or_else(|| Error::MeshError("frame carries no sensor/support nodes".into()))
}

/// Solves a walker mesh under the handle load case and tip supports.
pub fn assemble_and_solve(mesh: &DiscretizedFrame, loads: &LoadCase, bc: &BoundarySpec) -> Result<Solution> {
    let sensors = sensors_of(mesh)?;
    solve(mesh, &loads.nodal_loads(&sensors), &bc.supports(&sensors))
}

/// Safety factors above this are reported as the cap (unloaded structure).
pub const DEFAULT_SAFETY_FACTOR_CAP: f64 = 1.0e6;

/// Everything `simulate` needs besides the design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSettings {
    pub loads: LoadCase,
    pub boundary: BoundarySpec,
    /// Element length cap, inches.
    pub max_element_length: f64,
    pub safety_factor_cap: f64,
    /// Filled from the top-level feasibility limits when loaded from config.
    #[serde(skip)]
    pub limits: FeasibilityLimits,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            loads: LoadCase::default(),
            boundary: BoundarySpec::default(),
            max_element_length: 1.0,
            safety_factor_cap: DEFAULT_SAFETY_FACTOR_CAP,
            limits: FeasibilityLimits::default(),
        }
    }
}

/// Builds, meshes and solves one design; `theta` is left unset.
pub fn simulate(d: &DesignVector, loads: &LoadCase, bc: &BoundarySpec, max_element_length_in: f64) -> Result<PerformanceRecord> {
    simulate_with(
        d,
        &SimulationSettings {
            loads: *loads,
            boundary: *bc,
            max_element_length: max_element_length_in,
            ..SimulationSettings::default()
        },
    )
}

pub fn simulate_with(d: &DesignVector, settings: &SimulationSettings) -> Result<PerformanceRecord> {
    let frame = build_frame_with(d, &settings.limits)?;
    let mesh = discretize(&frame, in_to_m(settings.max_element_length))?;
    let sensors = sensors_of(&mesh)?;
    let solution = assemble_and_solve(&mesh, &settings.loads, &settings.boundary)?;
    let stresses = element_stresses(&mesh, &solution);

    let min_safety_factor = mesh
        .elements
        .iter()
        .zip(&stresses)
        .map(|(e, &s)| {
            let sy = e.props().yield_strength;
            if s * settings.safety_factor_cap > sy {
                sy / s
            } else {
                settings.safety_factor_cap
            }
        })
        .fold(settings.safety_factor_cap, f64::min);

    let u = &solution.displacements;
    let [hl, hr] = sensors.handles;
    let mean = |a: f64, b: f64| 0.5 * (a + b);
    let handle_dx = m_to_in(mean(u[hl][0], u[hr][0]));
    let handle_dy = m_to_in(mean(u[hl][1], -u[hr][1]));
    let handle_dz = m_to_in(mean(u[hl][2], u[hr][2]));
    let resultant = |n: usize| (u[n][0].powi(2) + u[n][1].powi(2) + u[n][2].powi(2)).sqrt();
    let leg_displacement = m_to_in(mean(resultant(sensors.front_tips[0]), resultant(sensors.front_tips[1])));

    let mp = mass_properties(&frame);
    Ok(PerformanceRecord {
        mass: kg_to_lb(mp.mass),
        handle_dx,
        handle_dy,
        handle_dz,
        leg_displacement,
        min_safety_factor,
        com_longitudinal: m_to_in(mp.com[0]),
        com_vertical: m_to_in(mp.com[2]),
        theta: None,
    })
}

/// `simulate_with`, with any failure tagged by the design id.
pub fn simulate_design(design_id: u64, d: &DesignVector, settings: &SimulationSettings) -> Result<PerformanceRecord> {
    simulate_with(d, settings).map_err(|e| Error::SimulationFailure {
        design_id,
        source: Box::new(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_frame, Material, TubeGroup};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn original_under_reference_load_case() {
        let p = simulate(&DesignVector::original(), &LoadCase::default(), &BoundarySpec::default(), 1.0).unwrap();
        assert!(p.handle_dz < 0.0 && p.handle_dz.abs() < 1.0, "{p:?}");
        assert!(p.min_safety_factor > 1.0, "{p:?}");
        assert!(p.mass > 0.0 && p.com_vertical > 0.0);
        assert!(p.theta.is_none());
    }

    #[test]
    fn zero_load_reports_cap() {
        let p = simulate(&DesignVector::original(), &LoadCase::default().scaled(0.0), &BoundarySpec::default(), 1.0).unwrap();
        assert_eq!(p.handle_dx, 0.0);
        assert_eq!(p.handle_dy, 0.0);
        assert_eq!(p.handle_dz, 0.0);
        assert_eq!(p.leg_displacement, 0.0);
        assert_eq!(p.min_safety_factor, DEFAULT_SAFETY_FACTOR_CAP);
    }

    #[test]
    fn half_yield_gives_safety_factor_two() {
        let d = DesignVector::original();
        let base = simulate(&d, &LoadCase::default(), &BoundarySpec::default(), 1.0).unwrap();
        // Scale loads so the peak stress is exactly half of yield.
        let k = base.min_safety_factor / 2.0;
        let p = simulate(&d, &LoadCase::default().scaled(k), &BoundarySpec::default(), 1.0).unwrap();
        assert!(rel(p.min_safety_factor, 2.0) < 1e-9);
    }

    #[test]
    fn linearity_in_load() {
        let d = DesignVector::original();
        let p1 = simulate(&d, &LoadCase::default(), &BoundarySpec::default(), 1.0).unwrap();
        let p2 = simulate(&d, &LoadCase::default().scaled(2.0), &BoundarySpec::default(), 1.0).unwrap();
        for (a, b) in [
            (p1.handle_dx, p2.handle_dx),
            (p1.handle_dy, p2.handle_dy),
            (p1.handle_dz, p2.handle_dz),
            (p1.leg_displacement, p2.leg_displacement),
        ] {
            assert!(rel(b, 2.0 * a) < 1e-9, "{a} {b}");
        }
        assert!(rel(p2.min_safety_factor, p1.min_safety_factor / 2.0) < 1e-9);
    }

    #[test]
    fn symmetric_vertical_load_gives_mirror_response() {
        let d = DesignVector::original();
        let frame = build_frame(&d).unwrap();
        let mesh = discretize(&frame, in_to_m(1.0)).unwrap();
        let loads = LoadCase {
            handle_down_force: 350.0,
            handle_lateral_force: 0.0,
        };
        let sol = assemble_and_solve(&mesh, &loads, &BoundarySpec::default()).unwrap();
        let [l, r] = mesh.sensors.unwrap().handles;
        let (ul, ur) = (sol.displacements[l], sol.displacements[r]);
        assert!(rel(ul[2], ur[2]) < 1e-9);
        assert!((ul[1] + ur[1]).abs() <= 1e-9 * ul[1].abs().max(1e-12));
    }

    #[test]
    fn reactions_balance_applied_loads() {
        let d = DesignVector::original();
        let frame = build_frame(&d).unwrap();
        let mesh = discretize(&frame, in_to_m(1.0)).unwrap();
        let loads = LoadCase::default();
        let sol = assemble_and_solve(&mesh, &loads, &BoundarySpec::default()).unwrap();
        let applied = loads.nodal_loads(&mesh.sensors.unwrap());
        let total = lbf_to_n(loads.handle_down_force);
        for dir in 0..3 {
            let r: f64 = sol.reactions.iter().map(|f| f[dir]).sum();
            let a: f64 = applied.iter().map(|l| l.load[dir]).sum();
            assert!((r + a).abs() <= 1e-8 * total, "direction {dir}: {r} + {a}");
        }
    }

    #[test]
    fn mesh_refinement_is_converged() {
        // Hermite beam elements are nodally exact under end loads, so
        // refinement only changes results at round-off level.
        let d = DesignVector::original();
        let dz: Vec<f64> = [2.0, 1.0, 0.5]
            .iter()
            .map(|&cap| simulate(&d, &LoadCase::default(), &BoundarySpec::default(), cap).unwrap().handle_dz)
            .collect();
        let d1 = (dz[1] - dz[0]).abs();
        let d2 = (dz[2] - dz[1]).abs();
        assert!(d1 <= 1e-9 * dz[0].abs() && d2 <= 1e-9 * dz[0].abs(), "{dz:?}");
    }

    #[test]
    fn constrained_stiffness_is_spd() {
        let mut d = DesignVector::original();
        d.overall_height = 30.0;
        d.side_crossbeam_height = 15.0;
        let frame = build_frame(&d).unwrap();
        let mesh = discretize(&frame, in_to_m(12.0)).unwrap();
        let supports = BoundarySpec::default().supports(&mesh.sensors.unwrap());
        let k = assemble_dense(&mesh, &supports);
        let n = k.len();
        let scale = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..n {
                assert!((k[i][j] - k[j][i]).abs() <= 1e-10 * scale);
            }
        }
        // Dense Cholesky succeeds with positive pivots.
        let mut l = k.clone();
        for j in 0..n {
            let mut s = l[j][j];
            for p in 0..j {
                s -= l[j][p] * l[j][p];
            }
            assert!(s > 0.0, "pivot {j} = {s}");
            l[j][j] = s.sqrt();
            for i in (j + 1)..n {
                let mut s = l[i][j];
                for p in 0..j {
                    s -= l[i][p] * l[j][p];
                }
                l[i][j] = s / l[j][j];
            }
        }
    }

    #[test]
    fn failures_are_tagged_with_design_id() {
        let mut d = DesignVector::original();
        d.base_length = -2.0;
        let err = simulate_design(42, &d, &SimulationSettings::default()).unwrap_err();
        assert!(matches!(err, Error::SimulationFailure { design_id: 42, .. }));
    }

    #[test]
    fn stronger_alloy_raises_safety_factor() {
        let mut d = DesignVector::original();
        let al = simulate(&d, &LoadCase::default(), &BoundarySpec::default(), 1.0).unwrap();
        d.frame_material = Material::Steel;
        d.front_crossbeam_material = Material::Steel;
        let st = simulate(&d, &LoadCase::default(), &BoundarySpec::default(), 1.0).unwrap();
        assert!(st.min_safety_factor > al.min_safety_factor);
        assert!(st.handle_dz.abs() < al.handle_dz.abs());
        let _ = TubeGroup::Frame;
    }
}
