use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::evaluation::EvaluationResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// Maps a value so that smaller is always better.
    fn key(self, v: f64) -> f64 {
        match self {
            Direction::Minimize => v,
            Direction::Maximize => -v,
        }
    }
}

/// Objectives a Pareto analysis can use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Accuracy,
    ResponseTime,
    Energy,
}

impl Objective {
    pub fn direction(self) -> Direction {
        match self {
            Objective::Accuracy => Direction::Maximize,
            Objective::ResponseTime | Objective::Energy => Direction::Minimize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Accuracy => "accuracy",
            Objective::ResponseTime => "mean_response_ms",
            Objective::Energy => "energy_mJ",
        }
    }

    pub fn value(self, r: &EvaluationResult) -> f64 {
        match self {
            Objective::Accuracy => r.accuracy,
            Objective::ResponseTime => r.mean_response_ms,
            Objective::Energy => r.energy_mj,
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "accuracy" | "acc" => Ok(Objective::Accuracy),
            "response" | "response_time" | "rt" | "mean_response_ms" => Ok(Objective::ResponseTime),
            "energy" | "ec" | "energy_mj" => Ok(Objective::Energy),
            other => Err(format!("unknown objective {other:?}")),
        }
    }
}

/// `a` dominates `b`: no worse everywhere, strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64], directions: &[Direction]) -> bool {
    let mut strictly = false;
    for ((&x, &y), d) in a.iter().zip(b).zip(directions) {
        let (kx, ky) = (d.key(x), d.key(y));
        if kx > ky {
            return false;
        }
        if kx < ky {
            strictly = true;
        }
    }
    strictly
}

/// Indices of the non-dominated points, ordered by the first objective's
/// raw value (ties by index).
///
/// Points are visited in lexicographic order of their minimisation keys. A
/// dominator always precedes the point it dominates in that order, so each
/// candidate only needs checking against the front built so far.
pub fn pareto_indices(points: &[Vec<f64>], directions: &[Direction]) -> Vec<usize> {
    let keys: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(directions).map(|(&v, d)| d.key(v)).collect())
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .iter()
            .zip(&keys[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        let dominated = front.iter().any(|&f| {
            let mut strictly = false;
            for (x, y) in keys[f].iter().zip(&keys[i]) {
                if x > y {
                    return false;
                }
                strictly |= x < y;
            }
            strictly
        });
        if !dominated {
            front.push(i);
        }
    }
    front.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    front
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub config_id: u32,
    pub test_user: u8,
    pub objectives: Vec<f64>,
}

/// Non-dominated results under the chosen objectives.
pub fn pareto_front(results: &[EvaluationResult], objectives: &[Objective]) -> Vec<ParetoPoint> {
    let directions: Vec<Direction> = objectives.iter().map(|o| o.direction()).collect();
    let points: Vec<Vec<f64>> = results
        .iter()
        .map(|r| objectives.iter().map(|o| o.value(r)).collect())
        .collect();
    pareto_indices(&points, &directions)
        .into_iter()
        .map(|i| ParetoPoint {
            config_id: results[i].config_id,
            test_user: results[i].test_user,
            objectives: points[i].clone(),
        })
        .collect()
}
