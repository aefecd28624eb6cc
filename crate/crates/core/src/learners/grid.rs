use std::collections::BTreeMap;

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::{require_both_classes, train, Scorer};
use crate::dataset::split_two_way;
use crate::error::{Error, Result};
use crate::metrics::weighted_f1;

/// Hyperparameter name to the values to try.
pub type ParamGrid = BTreeMap<String, Vec<f64>>;

/// Share of the provided rows held out to score each cell.
pub const HOLDOUT_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub params: BTreeMap<String, f64>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best_config: TrainConfig,
    pub best_params: BTreeMap<String, f64>,
    pub best_score: f64,
    /// Every cell in evaluation order.
    pub cells: Vec<GridCell>,
}

/// Cartesian product in evaluation order: parameter names sorted, the first
/// name varying slowest, values in the order given.
pub fn grid_cells(grid: &ParamGrid) -> Result<Vec<BTreeMap<String, f64>>> {
    if grid.is_empty() {
        return Err(Error::Config("parameter grid is empty".into()));
    }
    if let Some((name, _)) = grid.iter().find(|(_, values)| values.is_empty()) {
        return Err(Error::Config(format!("parameter `{name}` has no values")));
    }
    let mut cells = vec![BTreeMap::new()];
    for (name, values) in grid {
        cells = cells
            .into_iter()
            .flat_map(|cell| {
                values.iter().map(move |&v| {
                    let mut next = cell.clone();
                    next.insert(name.clone(), v);
                    next
                })
            })
            .collect();
    }
    Ok(cells)
}

/// Trains every cell on a seeded 75% of the rows and scores weighted F1 on
/// the other 25%. The first cell with the highest score wins.
pub fn grid_search(
    base: &TrainConfig,
    grid: &ParamGrid,
    x: ArrayView2<'_, f64>,
    y: &[u8],
    seed: u64,
) -> Result<GridSearchResult> {
    let cells = grid_cells(grid)?;
    let configs = cells
        .iter()
        .map(|cell| {
            let mut c = base.clone();
            for (name, &v) in cell {
                c.set_param(name, v)?;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;

    let holdout = split_two_way(y.len(), seed, HOLDOUT_FRACTION)?;
    let pick = |rows: &[usize]| {
        (
            x.select(Axis(0), rows),
            rows.iter().map(|&i| y[i]).collect::<Vec<u8>>(),
        )
    };
    let (x_fit, y_fit) = pick(&holdout.train);
    let (x_held, y_held) = pick(&holdout.test);
    require_both_classes(&y_fit)?;

    let scores = configs
        .par_iter()
        .map(|c| {
            let model = train(c, x_fit.view(), &y_fit)?;
            let preds = model
                .score_rows(x_held.view())?
                .into_iter()
                .map(|s| u8::from(s >= c.decision_threshold))
                .collect::<Vec<_>>();
            weighted_f1(&y_held, &preds)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok(GridSearchResult {
        best_config: configs[best].clone(),
        best_params: cells[best].clone(),
        best_score: scores[best],
        cells: cells
            .into_iter()
            .zip(scores)
            .map(|(params, score)| GridCell { params, score })
            .collect(),
    })
}
