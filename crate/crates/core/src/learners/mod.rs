//! The five classifiers behind one scoring interface, plus grid search and
//! feature importance.

mod boost;
mod config;
mod forest;
mod grid;
mod importance;
mod logistic;
mod mlp;
mod tree;

use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use boost::{newton_leaf, train_gbt, BoostedTrees};
pub use config::{
    BoostParams, ClassWeight, ForestParams, LogisticParams, MlpParams, ModelParams, TrainConfig,
    TreeParams, Variant,
};
pub use forest::{train_rf, RandomForest};
pub use grid::{grid_cells, grid_search, GridCell, GridSearchResult, ParamGrid};
pub use importance::{
    mdi_importance, permutation_importance, FeatureImportance, PERMUTATION_REPEATS,
};
pub use logistic::{loss_and_gradient as logistic_loss_and_gradient, train_lr, LogisticModel};
pub use mlp::{train_mlp, Dense, Mlp};
pub use tree::{gini, train_dt, DecisionTree, Node, Tree};

use crate::dataset::{SplitPlan, StandardizationParams, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn check_input(x: &[f64], n_features: usize) -> Result<()> {
    if x.len() != n_features {
        return Err(Error::Dimension {
            expected: n_features,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!("input feature {i} is not finite")));
    }
    Ok(())
}

pub fn require_both_classes(y: &[u8]) -> Result<()> {
    let hits = y.iter().filter(|&&l| l == 1).count();
    match hits {
        0 => Err(Error::SingleClass(0)),
        h if h == y.len() => Err(Error::SingleClass(1)),
        _ => Ok(()),
    }
}

/// Uniform probability interface over every model family.
pub trait Scorer {
    fn n_features(&self) -> usize;

    /// Probability of the hit class, in `[0, 1]`.
    fn score(&self, x: &[f64]) -> Result<f64>;

    /// 1 iff `score(x) >= threshold`.
    fn predict(&self, x: &[f64], threshold: f64) -> Result<u8> {
        Ok(u8::from(self.score(x)? >= threshold))
    }

    fn score_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let mut buf = Vec::with_capacity(rows.ncols());
        rows.rows()
            .into_iter()
            .map(|row| {
                buf.clear();
                buf.extend(row.iter().copied());
                self.score(&buf)
            })
            .collect()
    }
}

/// Parameters of one trained model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum Model {
    Lr(LogisticModel),
    Dt(DecisionTree),
    Rf(RandomForest),
    Xgb(BoostedTrees),
    Nn(Mlp),
}

impl Model {
    pub fn variant(&self) -> Variant {
        match self {
            Model::Lr(_) => Variant::Lr,
            Model::Dt(_) => Variant::Dt,
            Model::Rf(_) => Variant::Rf,
            Model::Xgb(_) => Variant::Xgb,
            Model::Nn(_) => Variant::Nn,
        }
    }

    fn scorer(&self) -> &dyn Scorer {
        match self {
            Model::Lr(m) => m,
            Model::Dt(m) => m,
            Model::Rf(m) => m,
            Model::Xgb(m) => m,
            Model::Nn(m) => m,
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.n_features();
        let trees: Vec<&Tree> = match self {
            Model::Dt(m) => vec![&m.tree],
            Model::Rf(m) => {
                if m.trees.is_empty() {
                    return Err(Error::validation("forest has no trees"));
                }
                m.trees.iter().collect()
            }
            Model::Xgb(m) => m.trees.iter().collect(),
            Model::Nn(m) => {
                let shapes_ok = !m.layers.is_empty()
                    && m.layers.windows(2).all(|w| w[0].outputs == w[1].inputs)
                    && m.layers.last().is_some_and(|l| l.outputs == 1)
                    && m.layers
                        .iter()
                        .all(|l| l.weights.len() == l.inputs * l.outputs && l.bias.len() == l.outputs);
                if !shapes_ok {
                    return Err(Error::validation("network layer shapes are inconsistent"));
                }
                Vec::new()
            }
            Model::Lr(_) => Vec::new(),
        };
        trees.iter().try_for_each(|t| t.check(n))
    }
}

impl Scorer for Model {
    fn n_features(&self) -> usize {
        self.scorer().n_features()
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        self.scorer().score(x)
    }
}

/// A model with the configuration and input scaling it was trained with.
/// Scores raw (unscaled) feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: TrainConfig,
    pub standardization: Option<StandardizationParams>,
    pub model: Model,
}

impl TrainedModel {
    pub fn variant(&self) -> Variant {
        self.model.variant()
    }
}

impl Scorer for TrainedModel {
    fn n_features(&self) -> usize {
        self.model.n_features()
    }

    fn score(&self, x: &[f64]) -> Result<f64> {
        match &self.standardization {
            Some(p) => self.model.score(&p.apply_row(x)?),
            None => self.model.score(x),
        }
    }
}

/// Trains the configured model family on raw features.
///
/// Logistic regression and the network are fitted on z-scored inputs; the
/// scaling is fitted on `x` and stored with the model.
pub fn train(config: &TrainConfig, x: ArrayView2<'_, f64>, y: &[u8]) -> Result<TrainedModel> {
    config.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::validation(format!(
            "{} feature rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() == 0 {
        return Err(Error::validation("training set is empty"));
    }
    if let Some(i) = y.iter().position(|&l| l > 1) {
        return Err(Error::validation(format!("label {i} is not 0 or 1")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("training matrix contains non-finite values"));
    }

    let standardization = if config.variant().needs_standardization() {
        Some(StandardizationParams::fit(x)?)
    } else {
        None
    };
    let scaled;
    let inputs = match &standardization {
        Some(p) => {
            scaled = p.apply(x)?;
            scaled.view()
        }
        None => x,
    };
    let w = config.class_weight.sample_weights(y);
    let model = match &config.params {
        ModelParams::Lr(p) => Model::Lr(train_lr(inputs, y, &w, p)?),
        ModelParams::Dt(p) => Model::Dt(train_dt(inputs, y, &w, p, config.seed)?),
        ModelParams::Rf(p) => Model::Rf(train_rf(inputs, y, &w, p, config.seed)?),
        ModelParams::Xgb(p) => Model::Xgb(train_gbt(inputs, y, &w, p)?),
        ModelParams::Nn(p) => Model::Nn(train_mlp(inputs, y, &w, p, config.seed)?),
    };
    Ok(TrainedModel {
        config: config.clone(),
        standardization,
        model,
    })
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk model: the trained model plus how its training rows were chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub variant: Variant,
    pub feature_names: Vec<String>,
    #[serde(flatten)]
    pub trained: TrainedModel,
    /// Split used to select the training rows, when trained from a dataset file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitPlan>,
}

impl ModelDocument {
    pub fn new(trained: TrainedModel, split: Option<SplitPlan>) -> Self {
        let feature_names = if trained.n_features() == N_FEATURES {
            FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
        } else {
            (0..trained.n_features()).map(|i| format!("x{i}")).collect()
        };
        ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            variant: trained.variant(),
            feature_names,
            trained,
            split,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                doc.format_version
            )));
        }
        if doc.variant != doc.trained.variant() || doc.trained.config.variant() != doc.variant {
            return Err(Error::validation("model variant tags disagree"));
        }
        doc.trained.model.check()?;
        if let Some(p) = &doc.trained.standardization {
            if p.n_columns() != doc.trained.n_features() || p.sd.len() != p.mean.len() {
                return Err(Error::validation("standardization width differs from model input"));
            }
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
