use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Lr,
    Dt,
    Rf,
    Xgb,
    Nn,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Lr, Variant::Dt, Variant::Rf, Variant::Xgb, Variant::Nn];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Lr => "lr",
            Variant::Dt => "dt",
            Variant::Rf => "rf",
            Variant::Xgb => "xgb",
            Variant::Nn => "nn",
        }
    }

    /// Whether inputs are z-scored before training and scoring.
    pub fn needs_standardization(self) -> bool {
        matches!(self, Variant::Lr | Variant::Nn)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(Variant::Lr),
            "dt" => Ok(Variant::Dt),
            "rf" => Ok(Variant::Rf),
            "xgb" | "gbt" => Ok(Variant::Xgb),
            "nn" | "mlp" => Ok(Variant::Nn),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    /// Every row weighs 1.
    #[default]
    None,
    /// Rows of class `c` weigh `n / (2 * n_c)`.
    Balanced,
}

impl ClassWeight {
    pub fn sample_weights(self, y: &[u8]) -> Vec<f64> {
        match self {
            ClassWeight::None => vec![1.0; y.len()],
            ClassWeight::Balanced => {
                let n = y.len() as f64;
                let hits = y.iter().filter(|&&v| v == 1).count() as f64;
                let w1 = if hits > 0.0 { n / (2.0 * hits) } else { 0.0 };
                let w0 = if hits < n { n / (2.0 * (n - hits)) } else { 0.0 };
                y.iter().map(|&v| if v == 1 { w1 } else { w0 }).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub iterations: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features drawn per split; `None` considers all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            bootstrap: true,
            tree: TreeParams {
                // ceil(sqrt(13))
                max_features: Some(4),
                ..TreeParams::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_estimators: usize,
    /// Shrinkage applied to every tree's output.
    pub learning_rate: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Minimum loss reduction required to split.
    pub gamma: f64,
    pub max_depth: usize,
    /// Minimum hessian sum in each child.
    pub min_child_weight: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_estimators: 100,
            learning_rate: 0.3,
            lambda: 1.0,
            gamma: 0.0,
            max_depth: 6,
            min_child_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: [usize; 2],
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: [16, 8],
            batch_size: 8,
            epochs: 10,
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum ModelParams {
    Lr(LogisticParams),
    Dt(TreeParams),
    Rf(ForestParams),
    Xgb(BoostParams),
    Nn(MlpParams),
}

/// Hyperparameters, seed and decision rule for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub decision_threshold: f64,
    #[serde(default)]
    pub class_weight: ClassWeight,
    pub params: ModelParams,
}

fn count(name: &str, v: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < 1.0 || !v.is_finite() {
        return Err(Error::Config(format!("{name} must be a positive integer, got {v}")));
    }
    Ok(v as usize)
}

fn depth(name: &str, v: f64) -> Result<Option<usize>> {
    if v == 0.0 {
        Ok(None)
    } else {
        count(name, v).map(Some)
    }
}

fn unknown(variant: Variant, name: &str) -> Error {
    Error::Config(format!("unknown hyperparameter `{name}` for model {variant}"))
}

impl TrainConfig {
    pub fn new(variant: Variant, seed: u64) -> Self {
        let params = match variant {
            Variant::Lr => ModelParams::Lr(LogisticParams::default()),
            Variant::Dt => ModelParams::Dt(TreeParams::default()),
            Variant::Rf => ModelParams::Rf(ForestParams::default()),
            Variant::Xgb => ModelParams::Xgb(BoostParams::default()),
            Variant::Nn => ModelParams::Nn(MlpParams::default()),
        };
        TrainConfig {
            seed,
            decision_threshold: 0.5,
            class_weight: ClassWeight::None,
            params,
        }
    }

    pub fn variant(&self) -> Variant {
        match self.params {
            ModelParams::Lr(_) => Variant::Lr,
            ModelParams::Dt(_) => Variant::Dt,
            ModelParams::Rf(_) => Variant::Rf,
            ModelParams::Xgb(_) => Variant::Xgb,
            ModelParams::Nn(_) => Variant::Nn,
        }
    }

    /// Sets one hyperparameter by name. A `max_depth` of 0 means unlimited
    /// for tree models; `bootstrap` takes 0 or 1.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let variant = self.variant();
        if name == "decision_threshold" {
            self.decision_threshold = value;
            return self.validate();
        }
        match &mut self.params {
            ModelParams::Lr(p) => match name {
                "learning_rate" => p.learning_rate = value,
                "iterations" => p.iterations = count(name, value)?,
                _ => return Err(unknown(variant, name)),
            },
            ModelParams::Dt(p) => set_tree_param(p, name, value).ok_or_else(|| unknown(variant, name))??,
            ModelParams::Rf(p) => match name {
                "n_estimators" => p.n_estimators = count(name, value)?,
                "bootstrap" => p.bootstrap = value != 0.0,
                _ => set_tree_param(&mut p.tree, name, value).ok_or_else(|| unknown(variant, name))??,
            },
            ModelParams::Xgb(p) => match name {
                "n_estimators" => p.n_estimators = count(name, value)?,
                "learning_rate" | "eta" => p.learning_rate = value,
                "lambda" => p.lambda = value,
                "gamma" => p.gamma = value,
                "max_depth" => p.max_depth = count(name, value)?,
                "min_child_weight" => p.min_child_weight = value,
                _ => return Err(unknown(variant, name)),
            },
            ModelParams::Nn(p) => match name {
                "batch_size" => p.batch_size = count(name, value)?,
                "epochs" => p.epochs = count(name, value)?,
                "learning_rate" => p.learning_rate = value,
                "hidden1" => p.hidden[0] = count(name, value)?,
                "hidden2" => p.hidden[1] = count(name, value)?,
                _ => return Err(unknown(variant, name)),
            },
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return bad(format!(
                "decision threshold {} is outside (0, 1)",
                self.decision_threshold
            ));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        let at_least_one = |name: &str, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be at least 1")))
            }
        };
        let tree = |p: &TreeParams| -> Result<()> {
            if let Some(d) = p.max_depth {
                at_least_one("max_depth", d)?;
            }
            if let Some(k) = p.max_features {
                at_least_one("max_features", k)?;
            }
            if p.min_samples_split < 2 {
                return Err(Error::Config("min_samples_split must be at least 2".into()));
            }
            Ok(())
        };
        match &self.params {
            ModelParams::Lr(p) => {
                positive("learning_rate", p.learning_rate)?;
                at_least_one("iterations", p.iterations)
            }
            ModelParams::Dt(p) => tree(p),
            ModelParams::Rf(p) => {
                at_least_one("n_estimators", p.n_estimators)?;
                tree(&p.tree)
            }
            ModelParams::Xgb(p) => {
                // zero rounds is allowed and yields the base-rate model
                positive("learning_rate", p.learning_rate)?;
                if p.learning_rate > 1.0 {
                    return bad(format!("learning_rate {} exceeds 1", p.learning_rate));
                }
                if !(p.lambda >= 0.0 && p.gamma >= 0.0 && p.min_child_weight >= 0.0) {
                    return bad("lambda, gamma and min_child_weight must be non-negative".into());
                }
                at_least_one("max_depth", p.max_depth)
            }
            ModelParams::Nn(p) => {
                positive("learning_rate", p.learning_rate)?;
                at_least_one("batch_size", p.batch_size)?;
                at_least_one("epochs", p.epochs)?;
                at_least_one("hidden1", p.hidden[0])?;
                at_least_one("hidden2", p.hidden[1])?;
                if !(0.0..1.0).contains(&p.beta1) || !(0.0..1.0).contains(&p.beta2) {
                    return bad("Adam betas must lie in [0, 1)".into());
                }
                positive("epsilon", p.epsilon)
            }
        }
    }
}

/// `None` when `name` is not a tree parameter.
fn set_tree_param(p: &mut TreeParams, name: &str, value: f64) -> Option<Result<()>> {
    let r = match name {
        "max_depth" => depth(name, value).map(|d| p.max_depth = d),
        "min_samples_split" => count(name, value).map(|v| p.min_samples_split = v),
        "max_features" => depth(name, value).map(|k| p.max_features = k),
        _ => return None,
    };
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let nn = TrainConfig::new(Variant::Nn, 0);
        let ModelParams::Nn(p) = &nn.params else { panic!() };
        assert_eq!((p.batch_size, p.epochs, p.learning_rate), (8, 10, 0.01));
        assert_eq!(p.hidden, [16, 8]);
        let ModelParams::Rf(p) = TrainConfig::new(Variant::Rf, 0).params else { panic!() };
        assert_eq!(p.n_estimators, 100);
        assert_eq!(p.tree.max_features, Some(4));
        let ModelParams::Xgb(p) = TrainConfig::new(Variant::Xgb, 0).params else { panic!() };
        assert_eq!(p.n_estimators, 100);
        assert_eq!((p.learning_rate, p.lambda, p.gamma, p.max_depth), (0.3, 1.0, 0.0, 6));
        for v in Variant::ALL {
            TrainConfig::new(v, 1).validate().unwrap();
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
    }

    #[test]
    fn set_params() {
        let mut c = TrainConfig::new(Variant::Nn, 0);
        c.set_param("batch_size", 16.0).unwrap();
        c.set_param("learning_rate", 0.001).unwrap();
        assert!(c.set_param("batch_size", 2.5).is_err());
        assert!(c.set_param("max_depth", 3.0).is_err());
        let ModelParams::Nn(p) = &c.params else { panic!() };
        assert_eq!((p.batch_size, p.learning_rate), (16, 0.001));

        let mut c = TrainConfig::new(Variant::Rf, 0);
        c.set_param("max_depth", 0.0).unwrap();
        c.set_param("n_estimators", 7.0).unwrap();
        c.set_param("bootstrap", 0.0).unwrap();
        let ModelParams::Rf(p) = &c.params else { panic!() };
        assert_eq!((p.tree.max_depth, p.n_estimators, p.bootstrap), (None, 7, false));
        assert!(c.set_param("decision_threshold", 1.0).is_err());
    }

    #[test]
    fn balanced_weights() {
        let w = ClassWeight::Balanced.sample_weights(&[0, 0, 0, 1]);
        assert_eq!(w, vec![4.0 / 6.0, 4.0 / 6.0, 4.0 / 6.0, 2.0]);
        assert_eq!(ClassWeight::None.sample_weights(&[0, 1]), vec![1.0, 1.0]);
    }

    #[test]
    fn serde_shape() {
        let c = TrainConfig::new(Variant::Xgb, 3);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["params"]["variant"], "xgb");
        let back: TrainConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
