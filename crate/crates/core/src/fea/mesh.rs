use crate::error::{Error, Result};
use crate::fea::element::{local_axes, BeamElement};
use crate::model::{FrameGraph, Point3, SensorNodes};

/// A frame cut into beam elements. Frame nodes keep their ids; interior
/// nodes are appended after them.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedFrame {
    pub nodes: Vec<Point3>,
    pub elements: Vec<BeamElement>,
    pub sensors: Option<SensorNodes>,
}

/// Number of equal elements a member of `length` is split into.
pub fn element_count(length: f64, max_element_length: f64) -> usize {
    // Guard against ratios such as 10.000000000000002 from unit conversion.
    let ratio = length / max_element_length;
    ((ratio * (1.0 - 1e-12)).ceil() as usize).max(1)
}

/// Splits every member into `ceil(length / max_element_length)` equal
/// elements (metres).
pub fn discretize(f: &FrameGraph, max_element_length: f64) -> Result<DiscretizedFrame> {
    if !(max_element_length > 0.0) || !max_element_length.is_finite() {
        return Err(Error::MeshError(format!("element length cap must be positive, got {max_element_length}")));
    }
    let mut nodes = f.nodes.clone();
    let mut elements = Vec::new();
    for (mi, m) in f.members.iter().enumerate() {
        let length = f.member_length(m);
        if !(length > 1e-12) {
            return Err(Error::MeshError(format!("member {mi} ({} -> {}) has zero length", m.a, m.b)));
        }
        let n = element_count(length, max_element_length);
        let (pa, pb) = (f.nodes[m.a], f.nodes[m.b]);
        let axes = local_axes(pa, pb);
        let mut prev = m.a;
        for k in 1..=n {
            let next = if k == n {
                m.b
            } else {
                let t = k as f64 / n as f64;
                nodes.push([pa[0] + (pb[0] - pa[0]) * t, pa[1] + (pb[1] - pa[1]) * t, pa[2] + (pb[2] - pa[2]) * t]);
                nodes.len() - 1
            };
            elements.push(BeamElement {
                a: prev,
                b: next,
                length: length / n as f64,
                section: m.section,
                material: m.material,
                axes,
                member: mi,
            });
            prev = next;
        }
    }
    Ok(DiscretizedFrame {
        nodes,
        elements,
        sensors: f.sensors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_frame, section_from, DesignVector, Material, Member, TubeGroup};
    use crate::units::in_to_m;

    fn bar(length_in: f64) -> FrameGraph {
        FrameGraph::new(
            vec![[0.0; 3], [in_to_m(length_in), 0.0, 0.0]],
            vec![Member {
                a: 0,
                b: 1,
                section: section_from(0.9, 0.05).unwrap(),
                material: Material::Aluminum,
                group: TubeGroup::Frame,
            }],
        )
    }

    #[test]
    fn exact_division() {
        let m = discretize(&bar(10.0), in_to_m(1.0)).unwrap();
        assert_eq!(m.elements.len(), 10);
        assert_eq!(m.nodes.len(), 11);
    }

    #[test]
    fn ceiling_rule() {
        assert_eq!(discretize(&bar(10.5), in_to_m(1.0)).unwrap().elements.len(), 11);
    }

    #[test]
    fn element_total_matches_member_lengths() {
        let f = build_frame(&DesignVector::original()).unwrap();
        let cap = in_to_m(1.0);
        let m = discretize(&f, cap).unwrap();
        let expected: usize = f.members.iter().map(|mb| (f.member_length(mb) / cap).ceil() as usize).sum();
        assert_eq!(m.elements.len(), expected);
        assert_eq!(m.sensors, f.sensors);
        for e in &m.elements {
            assert!(e.length <= cap * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_length_member_is_a_mesh_error() {
        let mut f = bar(1.0);
        f.nodes[1] = f.nodes[0];
        assert!(matches!(discretize(&f, 0.01), Err(Error::MeshError(_))));
        assert!(matches!(discretize(&bar(1.0), 0.0), Err(Error::MeshError(_))));
    }
}
