use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three alloys a tube group can be made of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Material {
    /// 6061-T6 aluminum.
    Aluminum,
    /// AISI 4130 steel.
    Steel,
    /// Ti-6Al-4V titanium.
    Titanium,
}

impl Material {
    pub const ALL: [Material; 3] = [Material::Aluminum, Material::Steel, Material::Titanium];

    pub fn name(self) -> &'static str {
        match self {
            Material::Aluminum => "Aluminum",
            Material::Steel => "Steel",
            Material::Titanium => "Titanium",
        }
    }

    /// Position in [`Material::ALL`]; used for one-hot encoding and binning.
    pub fn index(self) -> usize {
        match self {
            Material::Aluminum => 0,
            Material::Steel => 1,
            Material::Titanium => 2,
        }
    }

    /// Maps a unit-interval value onto three equal bins.
    pub fn from_unit(u: f64) -> Material {
        let bin = (u * 3.0).floor().clamp(0.0, 2.0) as usize;
        Material::ALL[bin]
    }

    pub fn properties(self) -> MaterialSpec {
        material_properties(self)
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Material {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Aluminum" | "aluminum" => Ok(Material::Aluminum),
            "Steel" | "steel" => Ok(Material::Steel),
            "Titanium" | "titanium" => Ok(Material::Titanium),
            other => Err(Error::UnknownMaterial(other.to_string())),
        }
    }
}

/// Isotropic alloy constants, stored in SI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialSpec {
    /// Pa
    pub elastic_modulus: f64,
    pub poisson_ratio: f64,
    /// Pa
    pub shear_modulus: f64,
    /// kg/m³
    pub density: f64,
    /// Pa
    pub tensile_strength: f64,
    /// Pa
    pub yield_strength: f64,
}

const GPA: f64 = 1.0e9;
const MPA: f64 = 1.0e6;

pub fn material_properties(id: Material) -> MaterialSpec {
    match id {
        Material::Aluminum => MaterialSpec {
            elastic_modulus: 69.0 * GPA,
            poisson_ratio: 0.330,
            shear_modulus: 26.0 * GPA,
            density: 2700.0,
            tensile_strength: 310.0 * MPA,
            yield_strength: 275.0 * MPA,
        },
        Material::Steel => MaterialSpec {
            elastic_modulus: 205.0 * GPA,
            poisson_ratio: 0.285,
            shear_modulus: 80.0 * GPA,
            density: 7850.0,
            tensile_strength: 731.0 * MPA,
            yield_strength: 460.0 * MPA,
        },
        Material::Titanium => MaterialSpec {
            elastic_modulus: 105.0 * GPA,
            poisson_ratio: 0.310,
            shear_modulus: 41.0 * GPA,
            density: 4429.0,
            tensile_strength: 1050.0 * MPA,
            yield_strength: 827.0 * MPA,
        },
    }
}

/// Looks up an alloy by its category name.
pub fn material_properties_by_name(name: &str) -> Result<MaterialSpec> {
    name.parse::<Material>().map(material_properties)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aluminum_constants() {
        let m = material_properties(Material::Aluminum);
        assert_eq!(m.elastic_modulus, 69e9);
        assert_eq!(m.poisson_ratio, 0.330);
        assert_eq!(m.shear_modulus, 26e9);
        assert_eq!(m.density, 2700.0);
        assert_eq!(m.tensile_strength, 310e6);
        assert_eq!(m.yield_strength, 275e6);
    }

    #[test]
    fn steel_constants() {
        let m = material_properties(Material::Steel);
        assert_eq!(m.elastic_modulus, 205e9);
        assert_eq!(m.poisson_ratio, 0.285);
        assert_eq!(m.shear_modulus, 80e9);
        assert_eq!(m.density, 7850.0);
        assert_eq!(m.tensile_strength, 731e6);
        assert_eq!(m.yield_strength, 460e6);
    }

    #[test]
    fn titanium_constants() {
        let m = material_properties(Material::Titanium);
        assert_eq!(m.elastic_modulus, 105e9);
        assert_eq!(m.poisson_ratio, 0.310);
        assert_eq!(m.shear_modulus, 41e9);
        assert_eq!(m.density, 4429.0);
        assert_eq!(m.tensile_strength, 1050e6);
        assert_eq!(m.yield_strength, 827e6);
    }

    #[test]
    fn invariants_hold_for_every_alloy() {
        for m in Material::ALL.map(material_properties) {
            assert!(m.elastic_modulus > 0.0 && m.shear_modulus > 0.0 && m.density > 0.0);
            assert!(m.poisson_ratio > 0.0 && m.poisson_ratio < 0.5);
            assert!(m.yield_strength <= m.tensile_strength);
        }
    }

    #[test]
    fn unknown_category_is_rejected() {
        assert!(matches!(
            material_properties_by_name("Unobtainium"),
            Err(Error::UnknownMaterial(_))
        ));
        assert_eq!(material_properties_by_name("Steel").unwrap().density, 7850.0);
    }

    #[test]
    fn equal_thirds_binning() {
        assert_eq!(Material::from_unit(0.1), Material::Aluminum);
        assert_eq!(Material::from_unit(0.5), Material::Steel);
        assert_eq!(Material::from_unit(0.9), Material::Titanium);
        assert_eq!(Material::from_unit(0.0), Material::Aluminum);
        assert_eq!(Material::from_unit(0.999_999), Material::Titanium);
    }
}
