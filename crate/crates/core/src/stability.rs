//! Static tipping angle and the centre-of-mass stability proxy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mass_properties, DesignVector, FrameGraph};
use crate::performance::{PerformanceRecord, TipAngle};
use crate::units::{in_to_m, lb_to_kg, lbf_to_n, m_to_in, rad_to_deg, STANDARD_GRAVITY};

/// Default hypothetical handle force, lbf.
pub const DEFAULT_TIPPING_FORCE_LBF: f64 = 400.0;

/// Inputs to the tipping-angle formula, SI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityInput {
    pub mass: f64,
    /// Leg (base) width L1.
    pub leg_width: f64,
    /// Handle distance L2.
    pub handle_distance: f64,
    pub height: f64,
    pub force: f64,
    pub g: f64,
}

impl StabilityInput {
    /// Builds an input from pounds, inches and pound-force.
    pub fn imperial(mass_lb: f64, leg_width_in: f64, handle_distance_in: f64, height_in: f64, force_lbf: f64) -> Self {
        StabilityInput {
            mass: lb_to_kg(mass_lb),
            leg_width: in_to_m(leg_width_in),
            handle_distance: in_to_m(handle_distance_in),
            height: in_to_m(height_in),
            force: lbf_to_n(force_lbf),
            g: STANDARD_GRAVITY,
        }
    }

    /// L1 = base width, L2 = handle distance, H = overall height.
    pub fn for_design(d: &DesignVector, mass_lb: f64, force_lbf: f64) -> Self {
        Self::imperial(mass_lb, d.base_width, d.handle_distance, d.overall_height, force_lbf)
    }

    /// The arcsin argument; NoTip iff this exceeds one.
    pub fn arcsin_argument(&self) -> f64 {
        let half = 0.5 * (self.leg_width - self.handle_distance);
        self.mass * self.g * self.leg_width / (2.0 * self.force * self.height.hypot(half))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    /// Radians; `None` when no force angle tips the walker.
    pub phi: Option<f64>,
    pub theta: TipAngle,
}

impl StabilityResult {
    /// θ in radians, or `None` for NoTip.
    pub fn theta_rad(&self) -> Option<f64> {
        match self.theta {
            TipAngle::Degrees(d) => Some(d.to_radians()),
            TipAngle::NoTip => None,
        }
    }
}

/// θ = arcsin(m·g·L1 / (2F·√(H² + ((L1−L2)/2)²))) + arctan((L1−L2)/(2H)).
pub fn tipping_angle(s: &StabilityInput) -> Result<StabilityResult> {
    let finite = [s.mass, s.leg_width, s.handle_distance, s.height, s.force, s.g]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidStabilityInput("inputs must be finite".into()));
    }
    if s.height <= 0.0 {
        return Err(Error::InvalidStabilityInput(format!("height must be positive, got {}", s.height)));
    }
    if s.force <= 0.0 {
        return Err(Error::InvalidStabilityInput(format!("force must be positive, got {}", s.force)));
    }
    if s.mass <= 0.0 || s.leg_width <= 0.0 || s.handle_distance <= 0.0 || s.g <= 0.0 {
        return Err(Error::InvalidStabilityInput(
            "mass, leg width, handle distance and g must be positive".into(),
        ));
    }
    let arg = s.arcsin_argument();
    if arg > 1.0 {
        return Ok(StabilityResult {
            phi: None,
            theta: TipAngle::NoTip,
        });
    }
    let phi = arg.asin();
    let theta = phi + ((s.leg_width - s.handle_distance) / (2.0 * s.height)).atan();
    Ok(StabilityResult {
        phi: Some(phi),
        theta: TipAngle::Degrees(rad_to_deg(theta)),
    })
}

/// Vertical COM coordinate, inches; lower is more stable.
pub fn dynamic_stability(f: &FrameGraph) -> f64 {
    m_to_in(mass_properties(f).com[2])
}

/// Fills `theta` for every record from its mass and design geometry.
///
/// Records and designs are paired by position; the position doubles as the
/// design id in errors.
pub fn annotate_dataset(records: &mut [PerformanceRecord], designs: &[DesignVector], force_lbf: f64) -> Result<()> {
    if records.len() != designs.len() {
        return Err(Error::DimensionMismatch {
            expected: designs.len(),
            actual: records.len(),
        });
    }
    for (i, (r, d)) in records.iter_mut().zip(designs).enumerate() {
        if !(r.mass.is_finite() && r.mass > 0.0) {
            return Err(Error::IncompleteRecord {
                design_id: i as u64,
                field: "mass",
            });
        }
        r.theta = Some(tipping_angle(&StabilityInput::for_design(d, r.mass, force_lbf))?.theta);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_frame, Material, Member, TubeGroup};
    use crate::model::section_from;
    use proptest::prelude::*;

    fn fixture(f: f64) -> StabilityInput {
        StabilityInput::imperial(7.5, 22.0, 19.0, 35.0, f)
    }

    fn theta(s: &StabilityInput) -> f64 {
        match tipping_angle(s).unwrap().theta {
            TipAngle::Degrees(d) => d,
            TipAngle::NoTip => f64::INFINITY,
        }
    }

    #[test]
    fn fixture_example() {
        let r = tipping_angle(&fixture(400.0)).unwrap();
        // m·g in lbf equals the mass in lb, so units cancel.
        let arg = 7.5 * 22.0 / (800.0 * (35.0f64.powi(2) + 1.5f64.powi(2)).sqrt());
        let phi = arg.asin();
        assert!((r.phi.unwrap() - phi).abs() < 1e-12);
        assert!((rad_to_deg(phi) - 0.3374).abs() < 1e-4);
        let expect = rad_to_deg(phi + (1.5f64 / 35.0).atan());
        assert!((theta(&fixture(400.0)) - expect).abs() < 1e-10);
        assert!((expect - 2.792).abs() < 1e-3);
    }

    #[test]
    fn equal_widths_give_theta_equal_phi() {
        let s = StabilityInput::imperial(7.5, 20.0, 20.0, 35.0, 400.0);
        let r = tipping_angle(&s).unwrap();
        assert!((r.theta_rad().unwrap() - r.phi.unwrap()).abs() < 1e-15);
    }

    #[test]
    fn tiny_force_never_tips() {
        let r = tipping_angle(&fixture(0.01)).unwrap();
        assert_eq!(r.theta, TipAngle::NoTip);
        assert!(r.phi.is_none());
    }

    #[test]
    fn invalid_inputs() {
        let mut s = fixture(400.0);
        s.height = 0.0;
        assert!(matches!(tipping_angle(&s), Err(Error::InvalidStabilityInput(_))));
        let mut s = fixture(400.0);
        s.force = -1.0;
        assert!(matches!(tipping_angle(&s), Err(Error::InvalidStabilityInput(_))));
        let mut s = fixture(400.0);
        s.mass = f64::NAN;
        assert!(tipping_angle(&s).is_err());
    }

    #[test]
    fn phi_approaches_right_angle_at_boundary() {
        let base = fixture(400.0);
        // Force at which the argument is exactly one.
        let f_star = base.force * base.arcsin_argument();
        let mut s = base;
        s.force = f_star * (1.0 + 1e-12);
        let phi = tipping_angle(&s).unwrap().phi.unwrap();
        assert!((std::f64::consts::FRAC_PI_2 - phi).abs() < 1e-5);
        s.force = f_star * (1.0 - 1e-9);
        assert_eq!(tipping_angle(&s).unwrap().theta, TipAngle::NoTip);
    }

    #[test]
    fn dense_sweeps_are_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=400 {
            let t = theta(&StabilityInput::imperial(i as f64 * 0.05, 22.0, 19.0, 35.0, 400.0));
            assert!(t > prev);
            prev = t;
        }
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let t = theta(&fixture(20.0 + i as f64));
            assert!(t < prev);
            prev = t;
        }
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let t = theta(&StabilityInput::imperial(7.5, 22.0, 19.0, 20.0 + i as f64 * 0.05, 400.0));
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn com_elevation_of_horizontal_member() {
        let nodes = vec![[0.0, 0.0, in_to_m(10.0)], [in_to_m(5.0), 0.0, in_to_m(10.0)]];
        let m = Member {
            a: 0,
            b: 1,
            section: section_from(0.5, 0.1).unwrap(),
            material: Material::Aluminum,
            group: TubeGroup::Frame,
        };
        let f = FrameGraph::new(nodes, vec![m]);
        assert!((dynamic_stability(&f) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn com_elevation_matches_mass_properties() {
        let f = build_frame(&DesignVector::original()).unwrap();
        assert_eq!(dynamic_stability(&f), m_to_in(mass_properties(&f).com[2]));
    }

    #[test]
    fn annotate_fills_theta_and_rejects_missing_mass() {
        let d = DesignVector::original();
        let mut heavy = d;
        heavy.frame_material = Material::Steel;
        let mut recs = vec![PerformanceRecord::from_values(&[0.0; 9]); 2];
        recs[0].mass = 7.5;
        recs[1].mass = 15.0;
        annotate_dataset(&mut recs, &[d, heavy], 400.0).unwrap();
        let t0 = recs[0].theta.unwrap().as_degrees();
        let t1 = recs[1].theta.unwrap().as_degrees();
        assert!((t0 - theta(&StabilityInput::for_design(&d, 7.5, 400.0))).abs() < 1e-15);
        assert!(t1 > t0);
        recs[1].mass = f64::NAN;
        let err = annotate_dataset(&mut recs, &[d, heavy], 400.0).unwrap_err();
        assert!(matches!(err, Error::IncompleteRecord { design_id: 1, field: "mass" }));
    }

    #[test]
    fn taller_design_tips_more_easily() {
        let d = DesignVector::original();
        let mut tall = d;
        tall.overall_height += 2.0;
        let a = theta(&StabilityInput::for_design(&d, 7.5, 400.0));
        let b = theta(&StabilityInput::for_design(&tall, 7.5, 400.0));
        assert!(b < a);
    }

    proptest! {
        #[test]
        fn unit_invariance(m in 1.0..30.0f64, l1 in 10.0..30.0f64, l2 in 10.0..30.0f64, h in 20.0..45.0f64, f in 50.0..800.0f64) {
            let imp = StabilityInput::imperial(m, l1, l2, h, f);
            // Same quantities converted through a different route.
            let si = StabilityInput {
                mass: m * 0.45359237,
                leg_width: l1 * 25.4 / 1000.0,
                handle_distance: l2 * 25.4 / 1000.0,
                height: h * 25.4 / 1000.0,
                force: f * 0.45359237 * 9.80665,
                g: 9.80665,
            };
            let (a, b) = (tipping_angle(&imp).unwrap(), tipping_angle(&si).unwrap());
            match (a.theta_rad(), b.theta_rad()) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!((imp.arcsin_argument() - 1.0).abs() < 1e-12),
            }
        }

        #[test]
        fn no_tip_iff_argument_exceeds_one(m in 0.1..50.0f64, f in 0.5..500.0f64, h in 10.0..50.0f64) {
            let s = StabilityInput::imperial(m, 22.0, 19.0, h, f);
            let r = tipping_angle(&s).unwrap();
            prop_assert_eq!(r.theta == TipAngle::NoTip, s.arcsin_argument() > 1.0);
        }
    }
}
