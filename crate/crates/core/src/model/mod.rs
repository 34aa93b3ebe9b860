//! Design vector, materials, tube sections, frame construction and
//! geometric feasibility.

pub mod design;
pub mod feasibility;
pub mod frame;
pub mod material;
pub mod section;

pub use design::{design_columns, DesignVector, ParamId, ParamValue, N_CATEGORICAL, N_CONTINUOUS, N_PARAMS};
pub use feasibility::{check_feasibility, FeasibilityLimits, FeasibilityReport, TubeGroup, Violation};
pub use frame::{build_frame, build_frame_with, mass_properties, FrameGraph, MassProperties, Member, Point3, SensorNodes};
pub use material::{material_properties, material_properties_by_name, Material, MaterialSpec};
pub use section::{section_from, TubeSection};
