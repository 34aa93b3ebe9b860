use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::in_to_m;

/// Circular tube cross-section, SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSection {
    pub outer_diameter: f64,
    pub inner_diameter: f64,
    pub area: f64,
    pub bending_inertia: f64,
    /// Polar constant; equals twice the bending inertia for a circular annulus.
    pub torsion_constant: f64,
}

impl TubeSection {
    /// Builds an annulus from SI inner diameter and wall thickness.
    pub fn new(inner_diameter: f64, thickness: f64) -> Result<Self> {
        if !(inner_diameter >= 0.0) || !(thickness > 0.0) || !inner_diameter.is_finite() || !thickness.is_finite() {
            return Err(Error::InvalidSection {
                inner_diameter,
                thickness,
            });
        }
        let d_o = inner_diameter + 2.0 * thickness;
        let d_i = inner_diameter;
        let area = PI / 4.0 * (d_o * d_o - d_i * d_i);
        let bending_inertia = PI / 64.0 * (d_o.powi(4) - d_i.powi(4));
        Ok(TubeSection {
            outer_diameter: d_o,
            inner_diameter: d_i,
            area,
            bending_inertia,
            torsion_constant: 2.0 * bending_inertia,
        })
    }

    /// Distance from the tube axis to the extreme fibre.
    pub fn outer_radius(&self) -> f64 {
        0.5 * self.outer_diameter
    }
}

/// Section from inner diameter and wall thickness given in inches.
pub fn section_from(inner_diameter_in: f64, thickness_in: f64) -> Result<TubeSection> {
    TubeSection::new(in_to_m(inner_diameter_in), in_to_m(thickness_in)).map_err(|_| Error::InvalidSection {
        inner_diameter: inner_diameter_in,
        thickness: thickness_in,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solid_rod_area() {
        let s = section_from(0.0, 0.5).unwrap();
        let expected = PI / 4.0 * 0.0254f64.powi(2);
        assert!((s.area - expected).abs() / expected < 1e-14);
        assert!((s.area - 5.067e-4).abs() < 1e-7);
        assert!((s.outer_diameter - 0.0254).abs() < 1e-15);
    }

    #[test]
    fn thin_walled_tube() {
        let s = section_from(0.9, 0.05).unwrap();
        let (d_o, d_i) = (0.0254, 0.9 * 0.0254);
        let area = PI / 4.0 * (d_o * d_o - d_i * d_i);
        let inertia = PI / 64.0 * (d_o.powi(4) - d_i.powi(4));
        assert!((s.outer_diameter - d_o).abs() < 1e-15);
        assert!((s.area - area).abs() / area < 1e-12);
        assert!((s.bending_inertia - inertia).abs() / inertia < 1e-12);
        assert_eq!(s.torsion_constant, 2.0 * s.bending_inertia);
    }

    #[test]
    fn zero_thickness_is_invalid() {
        assert!(matches!(section_from(0.9, 0.0), Err(Error::InvalidSection { .. })));
        assert!(matches!(section_from(0.9, -0.1), Err(Error::InvalidSection { .. })));
        assert!(matches!(section_from(-0.1, 0.1), Err(Error::InvalidSection { .. })));
    }

    proptest! {
        #[test]
        fn thickness_monotone(d_i in 0.0f64..2.0, t in 0.001f64..0.5, dt in 1e-4f64..0.2) {
            let a = section_from(d_i, t).unwrap();
            let b = section_from(d_i, t + dt).unwrap();
            prop_assert!(b.area > a.area);
            prop_assert!(b.bending_inertia > a.bending_inertia);
            prop_assert!(a.outer_diameter > a.inner_diameter);
        }
    }
}
