use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::material::Material;

/// Number of continuous design parameters.
pub const N_CONTINUOUS: usize = 14;
/// Number of categorical (material) parameters.
pub const N_CATEGORICAL: usize = 2;
/// Total parameter count.
pub const N_PARAMS: usize = N_CONTINUOUS + N_CATEGORICAL;

/// One parametric walker. Lengths are in inches, the bend angle in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    /// Base plane to handle top.
    pub overall_height: f64,
    /// Rear-leg tip to front-leg tip, longitudinal.
    pub base_length: f64,
    /// Lateral distance between leg tips.
    pub base_width: f64,
    /// Lateral distance between handle centerlines.
    pub handle_distance: f64,
    /// Longitudinal extent of each handle tube.
    pub handle_length: f64,
    pub side_crossbeam_height: f64,
    pub front_upper_crossbeam_height: f64,
    pub front_lower_crossbeam_height: f64,
    /// Included angle at the forward apex of each front crossbeam; 180 is straight.
    pub front_crossbeam_bend_angle: f64,
    pub frame_tube_inner_diameter: f64,
    pub front_crossbeam_inner_diameter: f64,
    pub side_crossbeam_inner_diameter: f64,
    pub frame_tube_thickness: f64,
    /// Shared by front and side crossbeams.
    pub crossbeam_tube_thickness: f64,
    pub front_crossbeam_material: Material,
    pub frame_material: Material,
}

/// Identifies one of the sixteen design parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamId {
    OverallHeight,
    BaseLength,
    BaseWidth,
    HandleDistance,
    HandleLength,
    SideCrossbeamHeight,
    FrontUpperCrossbeamHeight,
    FrontLowerCrossbeamHeight,
    FrontCrossbeamBendAngle,
    FrameTubeInnerDiameter,
    FrontCrossbeamInnerDiameter,
    SideCrossbeamInnerDiameter,
    FrameTubeThickness,
    CrossbeamTubeThickness,
    FrontCrossbeamMaterial,
    FrameMaterial,
}

impl ParamId {
    /// All parameters: the continuous roster first, then the two materials.
    pub const ALL: [ParamId; N_PARAMS] = [
        ParamId::OverallHeight,
        ParamId::BaseLength,
        ParamId::BaseWidth,
        ParamId::HandleDistance,
        ParamId::HandleLength,
        ParamId::SideCrossbeamHeight,
        ParamId::FrontUpperCrossbeamHeight,
        ParamId::FrontLowerCrossbeamHeight,
        ParamId::FrontCrossbeamBendAngle,
        ParamId::FrameTubeInnerDiameter,
        ParamId::FrontCrossbeamInnerDiameter,
        ParamId::SideCrossbeamInnerDiameter,
        ParamId::FrameTubeThickness,
        ParamId::CrossbeamTubeThickness,
        ParamId::FrontCrossbeamMaterial,
        ParamId::FrameMaterial,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_categorical(self) -> bool {
        self.index() >= N_CONTINUOUS
    }

    /// Config / CLI name.
    pub fn name(self) -> &'static str {
        match self {
            ParamId::OverallHeight => "overall_height",
            ParamId::BaseLength => "base_length",
            ParamId::BaseWidth => "base_width",
            ParamId::HandleDistance => "handle_distance",
            ParamId::HandleLength => "handle_length",
            ParamId::SideCrossbeamHeight => "side_crossbeam_height",
            ParamId::FrontUpperCrossbeamHeight => "front_upper_crossbeam_height",
            ParamId::FrontLowerCrossbeamHeight => "front_lower_crossbeam_height",
            ParamId::FrontCrossbeamBendAngle => "front_crossbeam_bend_angle",
            ParamId::FrameTubeInnerDiameter => "frame_tube_inner_diameter",
            ParamId::FrontCrossbeamInnerDiameter => "front_crossbeam_inner_diameter",
            ParamId::SideCrossbeamInnerDiameter => "side_crossbeam_inner_diameter",
            ParamId::FrameTubeThickness => "frame_tube_thickness",
            ParamId::CrossbeamTubeThickness => "crossbeam_tube_thickness",
            ParamId::FrontCrossbeamMaterial => "front_crossbeam_material",
            ParamId::FrameMaterial => "frame_material",
        }
    }

    /// CSV column header, carrying the unit.
    pub fn column(self) -> &'static str {
        match self {
            ParamId::OverallHeight => "overall_height_in",
            ParamId::BaseLength => "base_length_in",
            ParamId::BaseWidth => "base_width_in",
            ParamId::HandleDistance => "handle_distance_in",
            ParamId::HandleLength => "handle_length_in",
            ParamId::SideCrossbeamHeight => "side_crossbeam_height_in",
            ParamId::FrontUpperCrossbeamHeight => "front_upper_crossbeam_height_in",
            ParamId::FrontLowerCrossbeamHeight => "front_lower_crossbeam_height_in",
            ParamId::FrontCrossbeamBendAngle => "front_crossbeam_bend_angle_deg",
            ParamId::FrameTubeInnerDiameter => "frame_tube_inner_diameter_in",
            ParamId::FrontCrossbeamInnerDiameter => "front_crossbeam_inner_diameter_in",
            ParamId::SideCrossbeamInnerDiameter => "side_crossbeam_inner_diameter_in",
            ParamId::FrameTubeThickness => "frame_tube_thickness_in",
            ParamId::CrossbeamTubeThickness => "crossbeam_tube_thickness_in",
            ParamId::FrontCrossbeamMaterial => "front_crossbeam_material",
            ParamId::FrameMaterial => "frame_material",
        }
    }

    /// True for parameters measured in inches (everything continuous except the bend angle).
    pub fn is_length(self) -> bool {
        !self.is_categorical() && self != ParamId::FrontCrossbeamBendAngle
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamId::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s || p.column() == s)
            .ok_or_else(|| Error::config(s, "unknown design parameter"))
    }
}

impl DesignVector {
    /// The baseline walker: a conventional aluminum two-wheeled walker with
    /// a 170° front-crossbeam bend, weighing about 7.5 lb.
    pub fn original() -> Self {
        DesignVector {
            overall_height: 35.0,
            base_length: 18.0,
            base_width: 22.0,
            handle_distance: 19.0,
            handle_length: 10.0,
            side_crossbeam_height: 20.0,
            front_upper_crossbeam_height: 26.0,
            front_lower_crossbeam_height: 12.0,
            front_crossbeam_bend_angle: 170.0,
            frame_tube_inner_diameter: 0.915,
            front_crossbeam_inner_diameter: 0.75,
            side_crossbeam_inner_diameter: 0.75,
            frame_tube_thickness: 0.12,
            crossbeam_tube_thickness: 0.08,
            front_crossbeam_material: Material::Aluminum,
            frame_material: Material::Aluminum,
        }
    }

    /// The fourteen continuous parameters in roster order.
    pub fn continuous(&self) -> [f64; N_CONTINUOUS] {
        [
            self.overall_height,
            self.base_length,
            self.base_width,
            self.handle_distance,
            self.handle_length,
            self.side_crossbeam_height,
            self.front_upper_crossbeam_height,
            self.front_lower_crossbeam_height,
            self.front_crossbeam_bend_angle,
            self.frame_tube_inner_diameter,
            self.front_crossbeam_inner_diameter,
            self.side_crossbeam_inner_diameter,
            self.frame_tube_thickness,
            self.crossbeam_tube_thickness,
        ]
    }

    pub fn materials(&self) -> [Material; N_CATEGORICAL] {
        [self.front_crossbeam_material, self.frame_material]
    }

    pub fn from_parts(values: &[f64; N_CONTINUOUS], materials: [Material; N_CATEGORICAL]) -> Self {
        DesignVector {
            overall_height: values[0],
            base_length: values[1],
            base_width: values[2],
            handle_distance: values[3],
            handle_length: values[4],
            side_crossbeam_height: values[5],
            front_upper_crossbeam_height: values[6],
            front_lower_crossbeam_height: values[7],
            front_crossbeam_bend_angle: values[8],
            frame_tube_inner_diameter: values[9],
            front_crossbeam_inner_diameter: values[10],
            side_crossbeam_inner_diameter: values[11],
            frame_tube_thickness: values[12],
            crossbeam_tube_thickness: values[13],
            front_crossbeam_material: materials[0],
            frame_material: materials[1],
        }
    }

    pub fn get(&self, id: ParamId) -> ParamValue {
        match id {
            ParamId::FrontCrossbeamMaterial => ParamValue::Material(self.front_crossbeam_material),
            ParamId::FrameMaterial => ParamValue::Material(self.frame_material),
            _ => ParamValue::Continuous(self.continuous()[id.index()]),
        }
    }

    pub fn set(&mut self, id: ParamId, value: ParamValue) -> Result<()> {
        match (id, value) {
            (ParamId::FrontCrossbeamMaterial, ParamValue::Material(m)) => self.front_crossbeam_material = m,
            (ParamId::FrameMaterial, ParamValue::Material(m)) => self.frame_material = m,
            (id, ParamValue::Continuous(v)) if !id.is_categorical() => {
                let mut values = self.continuous();
                values[id.index()] = v;
                *self = DesignVector::from_parts(&values, self.materials());
            }
            (id, _) => return Err(Error::config(id.name(), "value kind does not match parameter")),
        }
        Ok(())
    }

    /// Outer diameters of the (frame, front crossbeam, side crossbeam) tube groups, in inches.
    pub fn outer_diameters(&self) -> [f64; 3] {
        [
            self.frame_tube_inner_diameter + 2.0 * self.frame_tube_thickness,
            self.front_crossbeam_inner_diameter + 2.0 * self.crossbeam_tube_thickness,
            self.side_crossbeam_inner_diameter + 2.0 * self.crossbeam_tube_thickness,
        ]
    }

    /// Multiplies every geometric length (not the tube sizes) by `k`.
    pub fn scale_geometry(&self, k: f64) -> Self {
        let mut d = *self;
        d.overall_height *= k;
        d.base_length *= k;
        d.base_width *= k;
        d.handle_distance *= k;
        d.handle_length *= k;
        d.side_crossbeam_height *= k;
        d.front_upper_crossbeam_height *= k;
        d.front_lower_crossbeam_height *= k;
        d
    }
}

/// A single parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamValue {
    Continuous(f64),
    Material(Material),
}

/// CSV header for a design row, in roster order.
pub fn design_columns() -> [&'static str; N_PARAMS] {
    ParamId::ALL.map(ParamId::column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roster_has_fourteen_continuous_and_two_categorical() {
        assert_eq!(ParamId::ALL.iter().filter(|p| !p.is_categorical()).count(), 14);
        assert_eq!(ParamId::ALL.iter().filter(|p| p.is_categorical()).count(), 2);
        for (i, p) in ParamId::ALL.iter().enumerate() {
            assert_eq!(p.index(), i);
        }
    }

    #[test]
    fn parts_round_trip() {
        let d = DesignVector::original();
        assert_eq!(DesignVector::from_parts(&d.continuous(), d.materials()), d);
    }

    #[test]
    fn set_and_get() {
        let mut d = DesignVector::original();
        d.set(ParamId::BaseWidth, ParamValue::Continuous(24.0)).unwrap();
        assert_eq!(d.base_width, 24.0);
        d.set(ParamId::FrameMaterial, ParamValue::Material(Material::Steel)).unwrap();
        assert_eq!(d.get(ParamId::FrameMaterial), ParamValue::Material(Material::Steel));
        assert!(d.set(ParamId::FrameMaterial, ParamValue::Continuous(1.0)).is_err());
    }

    #[test]
    fn outer_diameter_is_inner_plus_two_walls() {
        let d = DesignVector::original();
        let od = d.outer_diameters();
        assert!((od[0] - (d.frame_tube_inner_diameter + 2.0 * d.frame_tube_thickness)).abs() < 1e-15);
        assert!((od[2] - (d.side_crossbeam_inner_diameter + 2.0 * d.crossbeam_tube_thickness)).abs() < 1e-15);
    }

    #[test]
    fn param_names_parse() {
        for p in ParamId::ALL {
            assert_eq!(p.name().parse::<ParamId>().unwrap(), p);
            assert_eq!(p.column().parse::<ParamId>().unwrap(), p);
        }
        assert!("wheel_size".parse::<ParamId>().is_err());
    }
}
