//! Flat report formats. Result tables are CSV with optional leading `#`
//! metadata lines; fronts and importance also have JSON forms.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::activity::{Activity, N_ACTIVITIES};
use crate::error::{Error, Result};
use crate::evaluation::{Configuration, EvaluationResult};
use crate::knn::Distance;
use crate::search::{pareto_indices, Direction, FrequencyMatrix, ImportanceReport, Objective, ParetoPoint};

/// Column order of the results CSV.
pub fn result_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "config_id",
        "window_size",
        "overlap",
        "k",
        "distance",
        "train_hz",
        "test_hz",
        "test_user",
        "accuracy",
        "macro_f1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(Activity::ALL.iter().map(|a| format!("f1_{}", a.code())));
    cols.extend(["mean_response_ms", "energy_mJ", "n_train", "n_test"].map(String::from));
    cols
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config_id: u32,
    pub config: Configuration,
    pub test_user: u8,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub f1_per_activity: [Option<f64>; N_ACTIVITIES],
    pub mean_response_ms: f64,
    pub energy_mj: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl From<&EvaluationResult> for ResultRow {
    fn from(r: &EvaluationResult) -> Self {
        ResultRow {
            config_id: r.config_id,
            config: r.config,
            test_user: r.test_user,
            accuracy: r.accuracy,
            macro_f1: r.macro_f1,
            f1_per_activity: r.f1_per_activity,
            mean_response_ms: r.mean_response_ms,
            energy_mj: r.energy_mj,
            n_train: r.n_train,
            n_test: r.n_test,
        }
    }
}

impl ResultRow {
    pub fn objective(&self, o: Objective) -> f64 {
        match o {
            Objective::Accuracy => self.accuracy,
            Objective::ResponseTime => self.mean_response_ms,
            Objective::Energy => self.energy_mj,
        }
    }

    fn record(&self) -> Vec<String> {
        let c = &self.config;
        let mut rec = vec![
            self.config_id.to_string(),
            c.window_size.to_string(),
            (c.overlap_pct as f64 / 100.0).to_string(),
            c.k.to_string(),
            c.distance.to_string(),
            c.train_hz.to_string(),
            c.test_hz.to_string(),
            self.test_user.to_string(),
            self.accuracy.to_string(),
            self.macro_f1.to_string(),
        ];
        rec.extend(self.f1_per_activity.iter().map(|f| f.map_or("NA".to_string(), |v| v.to_string())));
        rec.extend([
            self.mean_response_ms.to_string(),
            self.energy_mj.to_string(),
            self.n_train.to_string(),
            self.n_test.to_string(),
        ]);
        rec
    }

    fn from_record(rec: &csv::StringRecord, line: u64) -> Result<Self> {
        let err = |message: String| Error::Parse {
            path: "results CSV".into(),
            line: line as usize,
            message,
        };
        if rec.len() != 26 {
            return Err(err(format!("expected 26 fields, found {}", rec.len())));
        }
        fn num<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
            s.trim().parse().map_err(|_| format!("bad {name} {s:?}"))
        }
        let parse = || -> std::result::Result<ResultRow, String> {
            let overlap: f64 = num(&rec[2], "overlap")?;
            let distance: Distance = rec[4].parse()?;
            let config = Configuration::new(
                num(&rec[1], "window_size")?,
                (overlap * 100.0).round() as u8,
                num(&rec[3], "k")?,
                distance,
            )
            .at_frequencies(num(&rec[5], "train_hz")?, num(&rec[6], "test_hz")?);
            let mut f1 = [None; N_ACTIVITIES];
            for (i, slot) in f1.iter_mut().enumerate() {
                let s = &rec[10 + i];
                *slot = if s == "NA" { None } else { Some(num(s, "f1")?) };
            }
            Ok(ResultRow {
                config_id: num(&rec[0], "config_id")?,
                config,
                test_user: num(&rec[7], "test_user")?,
                accuracy: num(&rec[8], "accuracy")?,
                macro_f1: num(&rec[9], "macro_f1")?,
                f1_per_activity: f1,
                mean_response_ms: num(&rec[22], "mean_response_ms")?,
                energy_mj: num(&rec[23], "energy_mJ")?,
                n_train: num(&rec[24], "n_train")?,
                n_test: num(&rec[25], "n_test")?,
            })
        };
        parse().map_err(err)
    }
}

/// `# key: value` lines heading a results CSV.
pub type Metadata = Vec<(String, String)>;

/// Writes `# key: value` lines, then the header and one row per result.
pub fn write_results_csv<W: Write>(mut w: W, meta: &[(String, String)], rows: &[ResultRow]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}: {v}").map_err(|e| Error::io("results CSV", e))?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(result_columns())?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush().map_err(|e| Error::io("results CSV", e))?;
    Ok(())
}

/// Reads a results CSV, returning the metadata lines and the rows.
pub fn read_results_csv<R: Read>(r: R) -> Result<(Metadata, Vec<ResultRow>)> {
    let mut reader = BufReader::new(r);
    let mut meta = Vec::new();
    let mut rest = String::new();
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(|e| Error::io("results CSV", e))? == 0 {
            break;
        }
        match line.strip_prefix('#') {
            Some(m) if rest.is_empty() => {
                let (k, v) = m.trim().split_once(':').unwrap_or((m.trim(), ""));
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            _ => rest.push_str(&line),
        }
    }
    let mut csv_reader = csv::Reader::from_reader(rest.as_bytes());
    let header: Vec<String> = csv_reader.headers()?.iter().map(String::from).collect();
    if header != result_columns() {
        return Err(Error::Parse {
            path: "results CSV".into(),
            line: meta.len() + 1,
            message: "unexpected header".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in csv_reader.records().enumerate() {
        rows.push(ResultRow::from_record(&rec?, (meta.len() + 2 + i) as u64)?);
    }
    Ok((meta, rows))
}

/// Non-dominated rows under `objectives`.
pub fn front_of_rows(rows: &[ResultRow], objectives: &[Objective]) -> Vec<ParetoPoint> {
    let directions: Vec<Direction> = objectives.iter().map(|o| o.direction()).collect();
    let points: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| objectives.iter().map(|&o| r.objective(o)).collect())
        .collect();
    pareto_indices(&points, &directions)
        .into_iter()
        .map(|i| ParetoPoint {
            config_id: rows[i].config_id,
            test_user: rows[i].test_user,
            objectives: points[i].clone(),
        })
        .collect()
}

pub fn write_front_csv<W: Write>(w: W, objectives: &[Objective], front: &[ParetoPoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = vec!["config_id", "test_user", "window_size", "overlap", "k", "distance"];
    header.extend(objectives.iter().map(|o| o.name()));
    out.write_record(&header)?;
    for p in front {
        let c = Configuration::from_config_id(p.config_id)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown config_id {}", p.config_id)))?;
        let mut rec = vec![
            p.config_id.to_string(),
            p.test_user.to_string(),
            c.window_size.to_string(),
            (c.overlap_pct as f64 / 100.0).to_string(),
            c.k.to_string(),
            c.distance.to_string(),
        ];
        rec.extend(p.objectives.iter().map(f64::to_string));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| Error::io("front CSV", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub objectives: Vec<Objective>,
    pub evaluated: usize,
    pub points: Vec<ParetoPoint>,
}

pub fn write_json<W: Write, T: Serialize>(w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(w, value).map_err(|e| Error::io("JSON report", e.into()))
}

/// `metric,term,share` with terms `window_size`, `window_size:overlap`, ...,
/// and `residual`.
pub fn write_importance_csv<W: Write>(w: W, reports: &[ImportanceReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["metric", "term", "share"])?;
    for r in reports {
        for (h, s) in &r.main {
            out.write_record([r.metric.as_str(), h.name(), &s.to_string()])?;
        }
        for (a, b, s) in &r.pairwise {
            out.write_record([r.metric.as_str(), &format!("{a}:{b}"), &s.to_string()])?;
        }
        out.write_record([r.metric.as_str(), "residual", &r.residual.to_string()])?;
    }
    out.flush().map_err(|e| Error::io("importance CSV", e))?;
    Ok(())
}

/// Train frequencies as rows, test frequencies as columns, one block per
/// user; `NA` marks invalid cells.
pub fn write_frequency_csv<W: Write>(w: W, matrices: &[FrequencyMatrix]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let Some(first) = matrices.first() else {
        out.flush().map_err(|e| Error::io("frequency CSV", e))?;
        return Ok(());
    };
    let mut header = vec!["user".to_string(), "train_hz".to_string()];
    header.extend(first.test_hz.iter().map(|hz| format!("test_{hz}")));
    out.write_record(&header)?;
    for m in matrices {
        for (tr, row) in m.train_hz.iter().zip(&m.cells) {
            let mut rec = vec![m.user.to_string(), tr.to_string()];
            rec.extend(row.iter().map(|c| c.map_or("NA".to_string(), |v| v.to_string())));
            out.write_record(&rec)?;
        }
    }
    out.flush().map_err(|e| Error::io("frequency CSV", e))?;
    Ok(())
}
