//! Frame skeleton built from a design vector.
//!
//! Axes: X longitudinal (forward), Y lateral (left positive), Z vertical.
//! The origin is the midpoint of the rectangular base at floor level.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::design::DesignVector;
use crate::model::feasibility::{check_feasibility, FeasibilityLimits, TubeGroup};
use crate::model::material::Material;
use crate::model::section::{section_from, TubeSection};
use crate::units::in_to_m;

pub type Point3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Member {
    pub a: usize,
    pub b: usize,
    pub section: TubeSection,
    pub material: Material,
    pub group: TubeGroup,
}

/// Node ids of the measurement and support points, ordered (left, right).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SensorNodes {
    /// Handle midpoints, where the load case is applied.
    pub handles: [usize; 2],
    pub front_tips: [usize; 2],
    pub rear_tips: [usize; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameGraph {
    /// Node coordinates in metres.
    pub nodes: Vec<Point3>,
    pub members: Vec<Member>,
    /// Present for walker frames; absent for hand-built test structures.
    pub sensors: Option<SensorNodes>,
}

impl FrameGraph {
    pub fn new(nodes: Vec<Point3>, members: Vec<Member>) -> Self {
        FrameGraph {
            nodes,
            members,
            sensors: None,
        }
    }

    pub fn member_length(&self, m: &Member) -> f64 {
        distance(self.nodes[m.a], self.nodes[m.b])
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for m in &self.members {
            adjacency[m.a].push(m.b);
            adjacency[m.b].push(m.a);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &next in &adjacency[n] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Reflects the frame through the lateral midplane (y → −y).
    pub fn mirrored(&self) -> Self {
        let mut f = self.clone();
        for p in &mut f.nodes {
            p[1] = -p[1];
        }
        if let Some(s) = &mut f.sensors {
            s.handles.swap(0, 1);
            s.front_tips.swap(0, 1);
            s.rear_tips.swap(0, 1);
        }
        f
    }
}

pub(crate) fn distance(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn lerp(a: Point3, b: Point3, t: f64) -> Point3 {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
}

struct Builder {
    nodes: Vec<Point3>,
    members: Vec<Member>,
}

impl Builder {
    fn node(&mut self, p: Point3) -> usize {
        self.nodes.push(p);
        self.nodes.len() - 1
    }

    fn member(&mut self, a: usize, b: usize, section: TubeSection, material: Material, group: TubeGroup) {
        self.members.push(Member {
            a,
            b,
            section,
            material,
            group,
        });
    }

    /// Adds a straight tube from `a` to `b` passing through intermediate
    /// junction nodes at the given heights (metres); returns the junction
    /// node ids keyed by height.
    fn leg(&mut self, a: usize, b: usize, heights: &[f64], section: TubeSection, material: Material) -> Vec<(f64, usize)> {
        let (pa, pb) = (self.nodes[a], self.nodes[b]);
        let top = pb[2] - pa[2];
        let mut junctions: Vec<(f64, usize)> = Vec::new();
        let mut sorted: Vec<f64> = heights.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut prev = a;
        for h in sorted {
            if let Some(&(last, id)) = junctions.last() {
                if (h - last).abs() <= 1e-12 {
                    junctions.push((h, id));
                    continue;
                }
            }
            let id = self.node(lerp(pa, pb, (h - pa[2]) / top));
            self.member(prev, id, section, material, TubeGroup::Frame);
            junctions.push((h, id));
            prev = id;
        }
        self.member(prev, b, section, material, TubeGroup::Frame);
        junctions
    }
}

fn junction_at(junctions: &[(f64, usize)], h: f64) -> usize {
    junctions
        .iter()
        .find(|(jh, _)| (jh - h).abs() <= 1e-12)
        .map(|&(_, id)| id)
        .expect("junction created for every crossbeam height")
}

/// Builds the frame skeleton. The design must pass the feasibility checks
/// under the given limits.
pub fn build_frame_with(d: &DesignVector, limits: &FeasibilityLimits) -> Result<FrameGraph> {
    let report = check_feasibility(d, limits);
    if !report.valid {
        return Err(Error::InfeasibleDesign(report.to_string()));
    }

    let frame_section = section_from(d.frame_tube_inner_diameter, d.frame_tube_thickness)?;
    let front_section = section_from(d.front_crossbeam_inner_diameter, d.crossbeam_tube_thickness)?;
    let side_section = section_from(d.side_crossbeam_inner_diameter, d.crossbeam_tube_thickness)?;
    let frame_mat = d.frame_material;
    let front_mat = d.front_crossbeam_material;

    let h = in_to_m(d.overall_height);
    let half_bl = in_to_m(d.base_length) / 2.0;
    let half_bw = in_to_m(d.base_width) / 2.0;
    let half_hd = in_to_m(d.handle_distance) / 2.0;
    let half_hl = in_to_m(d.handle_length) / 2.0;
    let side_h = in_to_m(d.side_crossbeam_height);
    let upper_h = in_to_m(d.front_upper_crossbeam_height);
    let lower_h = in_to_m(d.front_lower_crossbeam_height);

    let mut b = Builder {
        nodes: Vec::new(),
        members: Vec::new(),
    };

    let mut handles = [0; 2];
    let mut front_tips = [0; 2];
    let mut rear_tips = [0; 2];
    let mut front_junctions: [Vec<(f64, usize)>; 2] = [Vec::new(), Vec::new()];

    for (i, side) in [1.0, -1.0].into_iter().enumerate() {
        let rear_tip = b.node([-half_bl, side * half_bw, 0.0]);
        let front_tip = b.node([half_bl, side * half_bw, 0.0]);
        let handle_rear = b.node([-half_hl, side * half_hd, h]);
        let handle_mid = b.node([0.0, side * half_hd, h]);
        let handle_front = b.node([half_hl, side * half_hd, h]);

        let rear = b.leg(rear_tip, handle_rear, &[side_h], frame_section, frame_mat);
        let front = b.leg(front_tip, handle_front, &[side_h, upper_h, lower_h], frame_section, frame_mat);
        b.member(handle_rear, handle_mid, frame_section, frame_mat, TubeGroup::Frame);
        b.member(handle_mid, handle_front, frame_section, frame_mat, TubeGroup::Frame);
        b.member(
            junction_at(&rear, side_h),
            junction_at(&front, side_h),
            side_section,
            frame_mat,
            TubeGroup::SideCrossbeam,
        );

        handles[i] = handle_mid;
        front_tips[i] = front_tip;
        rear_tips[i] = rear_tip;
        front_junctions[i] = front;
    }

    // Each front crossbeam is two straight segments meeting at a forward apex
    // on the midplane; the included angle at the apex is the bend angle.
    let half_bend = (180.0 - d.front_crossbeam_bend_angle).to_radians() / 2.0;
    for height in [upper_h, lower_h] {
        let left = junction_at(&front_junctions[0], height);
        let right = junction_at(&front_junctions[1], height);
        let (pl, pr) = (b.nodes[left], b.nodes[right]);
        let half_span = (pl[1] - pr[1]).abs() / 2.0;
        let mid = lerp(pl, pr, 0.5);
        let apex = b.node([mid[0] + half_span * half_bend.tan(), mid[1], mid[2]]);
        b.member(left, apex, front_section, front_mat, TubeGroup::FrontCrossbeam);
        b.member(apex, right, front_section, front_mat, TubeGroup::FrontCrossbeam);
    }

    Ok(FrameGraph {
        nodes: b.nodes,
        members: b.members,
        sensors: Some(SensorNodes {
            handles,
            front_tips,
            rear_tips,
        }),
    })
}

/// Builds the frame skeleton under the default feasibility limits.
pub fn build_frame(d: &DesignVector) -> Result<FrameGraph> {
    build_frame_with(d, &FeasibilityLimits::default())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassProperties {
    pub mass: f64,
    /// Centre of mass relative to the base-rectangle midpoint, metres.
    pub com: Point3,
}

/// Total mass and centre of mass of uniform tubes (line-density model).
pub fn mass_properties(f: &FrameGraph) -> MassProperties {
    let mut mass = 0.0;
    let mut moment = [0.0; 3];
    for m in &f.members {
        let length = f.member_length(m);
        let dm = m.material.properties().density * m.section.area * length;
        let mid = lerp(f.nodes[m.a], f.nodes[m.b], 0.5);
        mass += dm;
        for k in 0..3 {
            moment[k] += dm * mid[k];
        }
    }
    let com = if mass > 0.0 {
        moment.map(|v| v / mass)
    } else {
        [0.0; 3]
    };
    MassProperties { mass, com }
}
