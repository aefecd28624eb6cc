use std::path::Path;

use hitpredict_core::learners::{grid_search, require_both_classes, ParamGrid, TrainConfig, Variant};
use serde::Serialize;

use super::{load_labeled, split_plan};
use crate::args::GridArgs;
use crate::error::{CliError, Result};
use crate::output::{to_json, Outputs};

#[derive(Serialize)]
struct GridReport<'a> {
    model: &'a str,
    seed: u64,
    split: hitpredict_core::dataset::SplitPlan,
    train_rows: usize,
    #[serde(flatten)]
    result: hitpredict_core::learners::GridSearchResult,
}

fn load_grid(path: &Path) -> Result<ParamGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: String| CliError::usage(format!("grid {}: {e}", path.display()));
    let is_toml = path.extension().is_some_and(|x| x == "toml");
    let grid: ParamGrid = if is_toml {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    };
    Ok(grid
        .into_iter()
        .map(|(k, v)| (k.replace('-', "_"), v))
        .collect())
}

pub fn run(a: &GridArgs) -> Result<()> {
    let variant: Variant = a.model.into();
    let grid = load_grid(&a.grid)?;
    let (_, data) = load_labeled(&a.input)?;
    let labels = data.labels();
    require_both_classes(&labels)?;
    let plan = split_plan(a.split, variant, a.test_fraction, a.seed, data.len());
    let parts = plan.apply(&labels)?;
    let x = data.select_features(&parts.train);
    let y = data.select_labels(&parts.train);

    let mut base = TrainConfig::new(variant, a.seed);
    base.class_weight = a.class_weight.into();
    let result = grid_search(&base, &grid, x.view(), &y, a.seed)?;
    let best = result
        .best_params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ");
    let (cells, score) = (result.cells.len(), result.best_score);
    let report = GridReport {
        model: variant.name(),
        seed: a.seed,
        split: plan,
        train_rows: parts.train.len(),
        result,
    };
    let json = to_json(&report)?;
    match &a.out {
        Some(path) => {
            let mut outputs = Outputs::default();
            outputs.add(path, json);
            outputs.commit()?;
        }
        None => print!("{}", String::from_utf8_lossy(&json)),
    }
    eprintln!("{cells} cells; best {best} with weighted F1 {score:.4}");
    Ok(())
}
