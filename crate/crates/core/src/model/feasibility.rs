use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::design::{DesignVector, ParamId};

/// Thresholds for the geometric validity checks, in inches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeasibilityLimits {
    pub min_outer_diameter: f64,
    pub max_outer_diameter: f64,
    /// Allowed handle distance, inclusive.
    pub handle_clearance_min: f64,
    pub handle_clearance_max: f64,
}

impl Default for FeasibilityLimits {
    fn default() -> Self {
        FeasibilityLimits {
            min_outer_diameter: 0.2,
            max_outer_diameter: 1.25,
            handle_clearance_min: 16.0,
            handle_clearance_max: 26.0,
        }
    }
}

/// Tube group a member belongs to; each group has its own section and material.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TubeGroup {
    Frame,
    FrontCrossbeam,
    SideCrossbeam,
}

impl TubeGroup {
    pub const ALL: [TubeGroup; 3] = [TubeGroup::Frame, TubeGroup::FrontCrossbeam, TubeGroup::SideCrossbeam];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    NonPositiveLength(ParamId),
    CrosspieceAboveHeight(ParamId),
    /// A crossbeam wider than the frame tube it terminates on.
    ImproperJunction(TubeGroup),
    DiameterAboveMax(TubeGroup),
    DiameterBelowMin(TubeGroup),
    HandleClearance,
    /// Front-crossbeam bend angle outside (90°, 180°].
    BendAngleOutOfRange,
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NonPositiveLength(_) => "NonPositiveLength",
            Violation::CrosspieceAboveHeight(_) => "CrosspieceAboveHeight",
            Violation::ImproperJunction(_) => "ImproperJunction",
            Violation::DiameterAboveMax(_) => "DiameterAboveMax",
            Violation::DiameterBelowMin(_) => "DiameterBelowMin",
            Violation::HandleClearance => "HandleClearance",
            Violation::BendAngleOutOfRange => "BendAngleOutOfRange",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveLength(p) | Violation::CrosspieceAboveHeight(p) => {
                write!(f, "{}({})", self.code(), p)
            }
            Violation::ImproperJunction(g) | Violation::DiameterAboveMax(g) | Violation::DiameterBelowMin(g) => {
                write!(f, "{}({:?})", self.code(), g)
            }
            _ => f.write_str(self.code()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code() == code)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(", "))
    }
}

const CROSSBEAM_HEIGHTS: [ParamId; 3] = [
    ParamId::SideCrossbeamHeight,
    ParamId::FrontUpperCrossbeamHeight,
    ParamId::FrontLowerCrossbeamHeight,
];

/// Runs every geometric check and lists all failures. Accepts any vector,
/// including non-finite values (which fail the relevant check).
pub fn check_feasibility(d: &DesignVector, limits: &FeasibilityLimits) -> FeasibilityReport {
    let mut violations = Vec::new();
    let values = d.continuous();

    for p in ParamId::ALL.into_iter().filter(|p| p.is_length()) {
        if !(values[p.index()] > 0.0) || !values[p.index()].is_finite() {
            violations.push(Violation::NonPositiveLength(p));
        }
    }

    for p in CROSSBEAM_HEIGHTS {
        // NaN heights are already reported above; a NaN overall height makes
        // every crosspiece position unverifiable.
        if !(values[p.index()] < d.overall_height) {
            violations.push(Violation::CrosspieceAboveHeight(p));
        }
    }

    let bend = d.front_crossbeam_bend_angle;
    if !(bend > 90.0 && bend <= 180.0) {
        violations.push(Violation::BendAngleOutOfRange);
    }

    let [frame_od, front_od, side_od] = d.outer_diameters();
    for (group, od) in [(TubeGroup::FrontCrossbeam, front_od), (TubeGroup::SideCrossbeam, side_od)] {
        if !(od <= frame_od) {
            violations.push(Violation::ImproperJunction(group));
        }
    }

    for (group, od) in TubeGroup::ALL.into_iter().zip([frame_od, front_od, side_od]) {
        if !(od <= limits.max_outer_diameter) {
            violations.push(Violation::DiameterAboveMax(group));
        }
        if !(od >= limits.min_outer_diameter) {
            violations.push(Violation::DiameterBelowMin(group));
        }
    }

    let hd = d.handle_distance;
    if !(hd >= limits.handle_clearance_min && hd <= limits.handle_clearance_max) {
        violations.push(Violation::HandleClearance);
    }

    FeasibilityReport {
        valid: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(d: &DesignVector) -> FeasibilityReport {
        check_feasibility(d, &FeasibilityLimits::default())
    }

    fn codes(r: &FeasibilityReport) -> Vec<&'static str> {
        let mut c: Vec<_> = r.violations.iter().map(Violation::code).collect();
        c.dedup();
        c
    }

    #[test]
    fn original_is_valid() {
        let r = check(&DesignVector::original());
        assert!(r.valid, "{r}");
        assert!(r.violations.is_empty());
    }

    #[test]
    fn negative_height() {
        let mut d = DesignVector::original();
        d.overall_height = -1.0;
        let r = check(&d);
        assert!(!r.valid);
        assert!(r.has("NonPositiveLength"));
    }

    #[test]
    fn crosspiece_above_height() {
        let mut d = DesignVector::original();
        d.side_crossbeam_height = 40.0;
        d.overall_height = 35.0;
        assert_eq!(codes(&check(&d)), ["CrosspieceAboveHeight"]);
    }

    /// Each coded check has a one-parameter perturbation of the valid
    /// fixture that triggers exactly that violation.
    #[test]
    fn checks_are_complete() {
        let base = DesignVector::original();
        type Perturb = Box<dyn Fn(&mut DesignVector)>;
        let cases: Vec<(&str, Perturb)> = vec![
            ("NonPositiveLength", Box::new(|d| d.base_length = -1.0)),
            ("CrosspieceAboveHeight", Box::new(|d| d.front_upper_crossbeam_height = 36.0)),
            ("ImproperJunction", Box::new(|d| d.side_crossbeam_inner_diameter = 1.0)),
            ("DiameterAboveMax", Box::new(|d| d.frame_tube_inner_diameter = 1.2)),
            ("DiameterBelowMin", Box::new(|d| d.side_crossbeam_inner_diameter = 0.02)),
            ("HandleClearance", Box::new(|d| d.handle_distance = 10.0)),
            ("BendAngleOutOfRange", Box::new(|d| d.front_crossbeam_bend_angle = 185.0)),
        ];
        for (code, perturb) in cases {
            let mut d = base;
            perturb(&mut d);
            let r = check(&d);
            assert_eq!(r.violations.len(), 1, "{code}: {r}");
            assert_eq!(r.violations[0].code(), code);
        }
    }

    #[test]
    fn nan_fails_without_panicking() {
        let mut d = DesignVector::original();
        d.overall_height = f64::NAN;
        let r = check(&d);
        assert!(!r.valid);
        assert!(r.has("NonPositiveLength"));
        assert!(r.has("CrosspieceAboveHeight"));
    }

    #[test]
    fn valid_iff_no_violations() {
        let mut d = DesignVector::original();
        d.frame_tube_thickness = 0.0;
        let r = check(&d);
        assert_eq!(r.valid, r.violations.is_empty());
        assert!(!r.valid);
    }
}
