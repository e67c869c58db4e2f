use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// Tool-neutral plot description: one x column, any number of series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub source: String,
    pub x: Series,
    pub series: Vec<Series>,
    pub log_x: bool,
    pub log_y: bool,
}

/// Columns plotted for the known artifact layouts; all numeric columns otherwise.
fn layout(header: &[&str]) -> (Vec<&'static str>, bool) {
    if header.contains(&"residual") && header.contains(&"sample_norm") {
        (vec!["sample_norm", "residual"], true)
    } else if header == ["k", "mu_k"] {
        (vec!["mu_k"], false)
    } else {
        (Vec::new(), false)
    }
}

fn parse_cell(s: &str, line: usize, col: &str) -> Result<f64> {
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse()
        .map_err(|_| Error::usage(format!("line {line}, column {col}: not a number: {s:?}")))
}

pub fn render_plotdata(csv_path: &Path) -> Result<PlotData> {
    let text = fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path.display().to_string(), e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, head) = lines
        .next()
        .ok_or_else(|| Error::usage(format!("{}: empty CSV", csv_path.display())))?;
    let header: Vec<&str> = head.split(',').map(str::trim).collect();
    if header.len() < 2 {
        return Err(Error::usage("CSV needs an x column and at least one series"));
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (i, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != header.len() {
            return Err(Error::usage(format!(
                "line {}: {} cells, header has {}",
                i + 1,
                cells.len(),
                header.len()
            )));
        }
        for (j, c) in cells.iter().enumerate() {
            cols[j].push(parse_cell(c, i + 1, header[j])?);
        }
    }
    if cols[0].is_empty() {
        return Err(Error::usage(format!("{}: no data rows", csv_path.display())));
    }
    let (wanted, log_y) = layout(&header);
    let series = header
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, h)| wanted.is_empty() || wanted.contains(h))
        .map(|(j, h)| Series {
            name: h.to_string(),
            values: cols[j].clone(),
        })
        .collect();
    Ok(PlotData {
        source: csv_path.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
        x: Series {
            name: header[0].to_string(),
            values: cols[0].clone(),
        },
        series,
        log_x: false,
        log_y,
    })
}
