//! Background flows selectable by name.

use inertial_core::flowfield::{ConstantField, SinX, SinXSinT, Vortex2d, ZeroField};
use inertial_core::FlowField;

use crate::error::RunError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSpec {
    Zero,
    /// `b ≡ c` in every component.
    Constant(f64),
    SinX,
    SinXSinT,
    Vortex,
}

impl FieldSpec {
    pub fn from_name(name: &str, c: f64) -> Result<Self, RunError> {
        Ok(match name {
            "zero" => FieldSpec::Zero,
            "constant" => FieldSpec::Constant(c),
            "sin-x" => FieldSpec::SinX,
            "sin-x-sin-t" => FieldSpec::SinXSinT,
            "vortex" => FieldSpec::Vortex,
            _ => return Err(RunError::Config(format!("unknown field {name:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldSpec::Zero => "zero",
            FieldSpec::Constant(_) => "constant",
            FieldSpec::SinX => "sin-x",
            FieldSpec::SinXSinT => "sin-x-sin-t",
            FieldSpec::Vortex => "vortex",
        }
    }

    /// Dimension the field is defined in; zero and constant fields work in
    /// any dimension and report 1.
    pub fn dim(&self) -> usize {
        match self {
            FieldSpec::Vortex => 2,
            _ => 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FieldSpec::Zero)
    }

    pub fn build_1d(&self) -> Result<Box<dyn FlowField<1>>, RunError> {
        Ok(match *self {
            FieldSpec::Zero => Box::new(ZeroField),
            FieldSpec::Constant(c) => Box::new(ConstantField([c])),
            FieldSpec::SinX => Box::new(SinX),
            FieldSpec::SinXSinT => Box::new(SinXSinT),
            FieldSpec::Vortex => return Err(RunError::Config("the vortex field is two-dimensional".into())),
        })
    }

    pub fn build_2d(&self) -> Result<Box<dyn FlowField<2>>, RunError> {
        Ok(match *self {
            FieldSpec::Zero => Box::new(ZeroField),
            FieldSpec::Constant(c) => Box::new(ConstantField([c, c])),
            FieldSpec::Vortex => Box::new(Vortex2d),
            FieldSpec::SinX | FieldSpec::SinXSinT => {
                return Err(RunError::Config(format!("field {} is one-dimensional", self.name())))
            }
        })
    }
}
