//! Conversion boundary between the imperial units used for I/O and the SI
//! units used internally.

pub const METERS_PER_INCH: f64 = 0.0254;
pub const NEWTONS_PER_LBF: f64 = 4.448_221_615_260_5;
pub const KG_PER_LB: f64 = 0.453_592_37;
/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_65;

#[inline]
pub fn in_to_m(inches: f64) -> f64 {
    inches * METERS_PER_INCH
}

#[inline]
pub fn m_to_in(meters: f64) -> f64 {
    meters / METERS_PER_INCH
}

#[inline]
pub fn lbf_to_n(lbf: f64) -> f64 {
    lbf * NEWTONS_PER_LBF
}

#[inline]
pub fn n_to_lbf(newtons: f64) -> f64 {
    newtons / NEWTONS_PER_LBF
}

#[inline]
pub fn lb_to_kg(lb: f64) -> f64 {
    lb * KG_PER_LB
}

#[inline]
pub fn kg_to_lb(kg: f64) -> f64 {
    kg / KG_PER_LB
}

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

#[inline]
pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    proptest! {
        #[test]
        fn round_trips_are_exact_to_1e12(x in -1.0e6f64..1.0e6) {
            prop_assert!(rel(m_to_in(in_to_m(x)), x) <= 1e-12);
            prop_assert!(rel(n_to_lbf(lbf_to_n(x)), x) <= 1e-12);
            prop_assert!(rel(kg_to_lb(lb_to_kg(x)), x) <= 1e-12);
        }
    }

    #[test]
    fn one_inch_is_exactly_254_tenths_of_mm() {
        assert_eq!(in_to_m(1.0), 0.0254);
        assert_eq!(lb_to_kg(1.0), 0.45359237);
    }
}
