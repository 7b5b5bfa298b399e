use crate::error::{Error, Result};

/// Pointwise loss applied to |f(x) - h(x)|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Loss {
    Squared,
    Absolute,
}

/// Family of per-region local models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelFamily {
    Linear,
    Constant,
}

/// Hyperparameters for a surrogate fit.
///
/// `num_intervals * regions_per_interval` is the total region budget `K`.
/// A stride of 1 runs the exact dynamic program; larger strides subsample
/// the split candidates and trade optimality for speed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitConfig {
    /// Number of intervals the prediction range is cut into (`H`).
    pub num_intervals: usize,
    /// Feature-space regions per interval (`W`).
    pub regions_per_interval: usize,
    pub loss: Loss,
    pub model_family: ModelFamily,
    /// Optional clipping of linear-model outputs to `[lo, hi]`.
    pub clip_range: Option<(f64, f64)>,
    /// Split-candidate subsampling factor; 1 = exact.
    pub stride: usize,
    /// Seed for all k-means initializations inside the fit.
    pub seed: u64,
    /// Diagonal regularizer used when a least-squares system is singular.
    pub ridge_epsilon: f64,
}

impl FitConfig {
    pub fn new(num_intervals: usize, regions_per_interval: usize) -> Self {
        Self {
            num_intervals,
            regions_per_interval,
            loss: Loss::Squared,
            model_family: ModelFamily::Linear,
            clip_range: None,
            stride: 1,
            seed: 0,
            ridge_epsilon: 1e-8,
        }
    }

    /// Total region budget `K = H * W`.
    pub fn total_regions(&self) -> usize {
        self.num_intervals * self.regions_per_interval
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_intervals == 0 {
            return Err(Error::InvalidConfig("number of intervals must be positive"));
        }
        if self.regions_per_interval == 0 {
            return Err(Error::InvalidConfig(
                "regions per interval must be positive",
            ));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be at least 1"));
        }
        if !(self.ridge_epsilon > 0.0 && self.ridge_epsilon.is_finite()) {
            return Err(Error::InvalidConfig("ridge epsilon must be a positive real"));
        }
        if let Some((lo, hi)) = self.clip_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig("clip range must satisfy lo < hi"));
            }
        }
        // The inner solver is closed-form only for these combinations.
        if self.loss == Loss::Absolute && self.model_family == ModelFamily::Linear {
            return Err(Error::InvalidConfig(
                "absolute loss is supported for constant models only",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(FitConfig::new(2, 2).validate().is_ok());
    }

    #[test]
    fn rejects_degenerate_values() {
        let mut cfg = FitConfig::new(0, 1);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        cfg.num_intervals = 1;
        cfg.stride = 0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        cfg.stride = 1;
        cfg.clip_range = Some((1.0, 0.0));
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn rejects_absolute_linear() {
        let mut cfg = FitConfig::new(2, 1);
        cfg.loss = Loss::Absolute;
        cfg.model_family = ModelFamily::Linear;
        assert!(cfg.validate().is_err());
        cfg.model_family = ModelFamily::Constant;
        assert!(cfg.validate().is_ok());
    }
}
