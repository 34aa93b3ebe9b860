use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static tipping angle, or the statement that no angle tips the walker.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TipAngle {
    Degrees(f64),
    NoTip,
}

impl TipAngle {
    /// Stability ordering: larger angles are better and `NoTip` beats any angle.
    pub fn stability_cmp(&self, other: &TipAngle) -> Ordering {
        match (self, other) {
            (TipAngle::NoTip, TipAngle::NoTip) => Ordering::Equal,
            (TipAngle::NoTip, _) => Ordering::Greater,
            (_, TipAngle::NoTip) => Ordering::Less,
            (TipAngle::Degrees(a), TipAngle::Degrees(b)) => a.total_cmp(b),
        }
    }

    /// Value used where a number is required; `NoTip` maps to the 90° supremum.
    pub fn as_degrees(&self) -> f64 {
        match self {
            TipAngle::Degrees(d) => *d,
            TipAngle::NoTip => 90.0,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            TipAngle::Degrees(_) => "tips",
            TipAngle::NoTip => "no_tip",
        }
    }
}

/// The simulated (or predicted) performance of one design, in inches,
/// pounds and degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRecord {
    pub mass: f64,
    pub handle_dx: f64,
    /// Mean outward lateral displacement of the two handles.
    pub handle_dy: f64,
    pub handle_dz: f64,
    /// Mean resultant displacement of the front leg tips.
    pub leg_displacement: f64,
    pub min_safety_factor: f64,
    pub com_longitudinal: f64,
    pub com_vertical: f64,
    pub theta: Option<TipAngle>,
}

impl PerformanceRecord {
    pub fn get(&self, target: Target) -> Option<f64> {
        Some(match target {
            Target::Mass => self.mass,
            Target::HandleDx => self.handle_dx,
            Target::HandleDy => self.handle_dy,
            Target::HandleDz => self.handle_dz,
            Target::LegDisplacement => self.leg_displacement,
            Target::MinSafetyFactor => self.min_safety_factor,
            Target::ComLongitudinal => self.com_longitudinal,
            Target::ComVertical => self.com_vertical,
            Target::Theta => return self.theta.map(|t| t.as_degrees()),
        })
    }

    /// Builds a record from one value per target, in [`Target::ALL`] order.
    pub fn from_values(v: &[f64; Target::COUNT]) -> Self {
        PerformanceRecord {
            mass: v[0],
            handle_dx: v[1],
            handle_dy: v[2],
            handle_dz: v[3],
            leg_displacement: v[4],
            min_safety_factor: v[5],
            com_longitudinal: v[6],
            com_vertical: v[7],
            theta: Some(TipAngle::Degrees(v[8])),
        }
    }
}

/// A learnable / constrainable performance value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Mass,
    HandleDx,
    HandleDy,
    HandleDz,
    LegDisplacement,
    MinSafetyFactor,
    ComLongitudinal,
    ComVertical,
    Theta,
}

impl Target {
    pub const COUNT: usize = 9;
    pub const ALL: [Target; Target::COUNT] = [
        Target::Mass,
        Target::HandleDx,
        Target::HandleDy,
        Target::HandleDz,
        Target::LegDisplacement,
        Target::MinSafetyFactor,
        Target::ComLongitudinal,
        Target::ComVertical,
        Target::Theta,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Mass => "mass",
            Target::HandleDx => "handle_dx",
            Target::HandleDy => "handle_dy",
            Target::HandleDz => "handle_dz",
            Target::LegDisplacement => "leg_displacement",
            Target::MinSafetyFactor => "min_safety_factor",
            Target::ComLongitudinal => "com_longitudinal",
            Target::ComVertical => "com_vertical",
            Target::Theta => "theta",
        }
    }

    /// Dataset CSV column.
    pub fn column(self) -> &'static str {
        match self {
            Target::Mass => "mass_lbs",
            Target::HandleDx => "handle_dx_in",
            Target::HandleDy => "handle_dy_in",
            Target::HandleDz => "handle_dz_in",
            Target::LegDisplacement => "leg_displ_in",
            Target::MinSafetyFactor => "min_safety_factor",
            Target::ComLongitudinal => "com_longitudinal_in",
            Target::ComVertical => "com_vertical_in",
            Target::Theta => "theta_deg",
        }
    }

    /// Row label used in the R² report.
    pub fn label(self) -> &'static str {
        match self {
            Target::Mass => "Mass",
            Target::HandleDx => "Handle X Displ",
            Target::HandleDy => "Handle Y Displ",
            Target::HandleDz => "Handle Z Displ",
            Target::LegDisplacement => "Leg Displ",
            Target::MinSafetyFactor => "Safety Factor",
            Target::ComLongitudinal => "Center Longitudinal",
            Target::ComVertical => "Center Vertical",
            Target::Theta => "Theta",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s || t.column() == s)
            .or(match s {
                "leg_displ" => Some(Target::LegDisplacement),
                "sf" | "safety_factor" => Some(Target::MinSafetyFactor),
                _ => None,
            })
            .ok_or_else(|| Error::config(s, "unknown performance target"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_tip_is_supremum() {
        assert_eq!(TipAngle::NoTip.stability_cmp(&TipAngle::Degrees(89.9)), Ordering::Greater);
        assert_eq!(TipAngle::Degrees(2.0).stability_cmp(&TipAngle::Degrees(3.0)), Ordering::Less);
    }

    #[test]
    fn target_names_parse() {
        for t in Target::ALL {
            assert_eq!(t.name().parse::<Target>().unwrap(), t);
            assert_eq!(t.column().parse::<Target>().unwrap(), t);
        }
        assert!("speed".parse::<Target>().is_err());
    }
}
