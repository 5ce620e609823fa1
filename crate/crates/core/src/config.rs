//! JSON configuration files for models and noise.
//!
//! A model file names the model and carries its parameter block:
//!
//! ```json
//! { "model": "schwartz_smith",
//!   "params": { "kappa": 0.01, "sigma1": 0.005, "sigma2": 0.001, "rho": 0.3, "mu2": 0.0 },
//!   "pfc_wrap": "geometric" }
//! ```
//!
//! `pfc_wrap` is optional; when present the model is made consistent with the
//! PFC passed to [`ModelConfig::build`].

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::curve::PriceForwardCurve;
use crate::error::{Error, Result};
use crate::noise::VolatilityStructure;
use crate::quadrature::QuadratureSpec;
use crate::structural::{
    ConstantModel, LevyOuFactorModel, LevyOuFactorParams, LuciaSchwartz, PfcWrapped, SchwartzSmith,
    SchwartzSmithParams, StructuralModel, StructuralSinh, StructuralSinhParams, WrapMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    SchwartzSmith,
    LuciaSchwartz,
    StructuralSinh,
    LevyOuFactor,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantParams {
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelName,
    pub params: serde_json::Value,
    #[serde(default)]
    pub pfc_wrap: Option<WrapMode>,
    /// Quadrature used for delivery averages with this model.
    #[serde(default)]
    pub quad: Option<QuadratureSpec>,
}

fn params<T: DeserializeOwned>(name: ModelName, value: &serde_json::Value) -> Result<T> {
    serde_json::from_value(value.clone()).map_err(|e| Error::Model(format!("{name:?} params: {e}")))
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path)
    }

    /// The unwrapped model.
    pub fn build_inner(&self) -> Result<Arc<dyn StructuralModel>> {
        let p = &self.params;
        Ok(match self.model {
            ModelName::SchwartzSmith => Arc::new(SchwartzSmith::new(params::<SchwartzSmithParams>(self.model, p)?)?),
            ModelName::LuciaSchwartz => Arc::new(LuciaSchwartz::new(params::<SchwartzSmithParams>(self.model, p)?)?),
            ModelName::StructuralSinh => {
                Arc::new(StructuralSinh::new(params::<StructuralSinhParams>(self.model, p)?)?)
            }
            ModelName::LevyOuFactor => {
                Arc::new(LevyOuFactorModel::new(params::<LevyOuFactorParams>(self.model, p)?)?)
            }
            ModelName::Constant => Arc::new(ConstantModel::new(params::<ConstantParams>(self.model, p)?.level)?),
        })
    }

    /// The model, wrapped against `pfc` if the config asks for it.
    pub fn build(&self, pfc: Option<&Arc<PriceForwardCurve>>) -> Result<Arc<dyn StructuralModel>> {
        let inner = self.build_inner()?;
        match (self.pfc_wrap, pfc) {
            (None, _) => Ok(inner),
            (Some(mode), Some(pfc)) => Ok(Arc::new(PfcWrapped::new(inner, pfc.clone(), mode)?)),
            (Some(_), None) => Err(Error::Model("pfc_wrap is set but no PFC was supplied".into())),
        }
    }
}

/// Parses a JSON file, naming the file in every error.
pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| Error::Config { path: path.display().to_string(), message: e.to_string() })
}

pub fn load_vol(path: impl AsRef<Path>) -> Result<VolatilityStructure> {
    read_json(path)
}
