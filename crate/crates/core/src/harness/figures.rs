use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::SweepResult;
use crate::error::{Error, Result};

/// Time steps as rows, rolling steps as columns, then the baseline F of the
/// same time step. Failed or absent cells are empty.
pub fn figure_csv(result: &SweepResult) -> String {
    let ls: BTreeSet<usize> = result.cells.iter().map(|c| c.l).collect();
    let mut ps: BTreeSet<usize> = result.cells.iter().map(|c| c.p).collect();
    ps.extend(result.baselines.iter().map(|b| b.p));

    let mut out = String::from("time_step");
    for l in &ls {
        write!(out, ",l={l}").expect("write to string");
    }
    out.push_str(",baseline\n");
    let field = |out: &mut String, v: Option<f64>| {
        out.push(',');
        if let Some(v) = v {
            write!(out, "{v}").expect("write to string");
        }
    };
    for &p in &ps {
        write!(out, "{p}").expect("write to string");
        for &l in &ls {
            field(&mut out, result.cell(p, l).and_then(|c| c.f_score));
        }
        field(&mut out, result.baselines.iter().find(|b| b.p == p).and_then(|b| b.f_score));
        out.push('\n');
    }
    out
}

/// Writes `fig_<model>.csv` into `out_dir`.
pub fn emit_figures(result: &SweepResult, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(format!("fig_{}.csv", result.model));
    fs::write(&path, figure_csv(result)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ModelKind, RunSettings};
    use crate::harness::sweep::{BaselineResult, CellResult};

    fn cell(p: usize, l: usize, f: Option<f64>) -> CellResult {
        CellResult {
            p,
            l,
            q: p,
            f_score: f,
            report: None,
            failures: Vec::new(),
        }
    }

    fn result() -> SweepResult {
        SweepResult {
            model: ModelKind::Lstm,
            settings: RunSettings::default(),
            artists: Vec::new(),
            dropped: Vec::new(),
            cells: vec![cell(2, 1, Some(10.5)), cell(3, 1, Some(11.0)), cell(3, 2, None)],
            baselines: vec![
                BaselineResult {
                    p: 2,
                    f_score: Some(9.0),
                    report: None,
                    failures: Vec::new(),
                },
                BaselineResult {
                    p: 3,
                    f_score: None,
                    report: None,
                    failures: Vec::new(),
                },
            ],
            best: None,
            best_baseline: None,
        }
    }

    #[test]
    fn layout_and_empty_cells() {
        let csv = figure_csv(&result());
        assert_eq!(csv, "time_step,l=1,l=2,baseline\n2,10.5,,9\n3,11,,\n");
    }

    #[test]
    fn output_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let a = fs::read(emit_figures(&result(), dir.path()).unwrap()).unwrap();
        let b = fs::read(emit_figures(&result(), dir.path()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
