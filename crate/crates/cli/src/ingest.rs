use std::fs::File;
use std::path::Path;

use circlat::Lattice;
use clap::ValueEnum;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// One outcome per line, in observation order; an optional second column is a label.
    SequenceCsv,
    /// Rows `r,count`; order is lost, so only order-insensitive commands accept it.
    FrequencyCsv,
}

/// Observations on `Z_m` in recorded order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub lattice: Lattice,
    pub observations: Vec<usize>,
    pub labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.observations.len()
    }
}

fn parse_int(field: &str, what: &str, line: usize) -> Result<i64, CliError> {
    field
        .trim()
        .parse::<i64>()
        .map_err(|_| CliError::data(format!("line {line}: {what} {:?} is not an integer", field.trim())))
}

fn in_range(v: i64, m: usize, line: usize) -> Result<usize, CliError> {
    if v < 0 || v as usize >= m {
        return Err(CliError::data(format!("line {line}: value {v} is outside 0..{}", m - 1)));
    }
    Ok(v as usize)
}

pub fn ingest(path: &Path, format: InputFormat, m: usize) -> Result<Dataset, CliError> {
    let lattice = Lattice::new(m).map_err(|e| CliError::usage(e.to_string()))?;
    let file = File::open(path).map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut observations = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match format {
            InputFormat::SequenceCsv => {
                let v = in_range(parse_int(&rec[0], "value", line)?, m, line)?;
                observations.push(v);
                if let Some(label) = rec.get(1) {
                    labels.resize(observations.len() - 1, String::new());
                    labels.push(label.to_string());
                }
            }
            InputFormat::FrequencyCsv => {
                if rec.len() < 2 {
                    return Err(CliError::data(format!("line {line}: expected `r,count`")));
                }
                let r = in_range(parse_int(&rec[0], "value", line)?, m, line)?;
                let c = parse_int(&rec[1], "count", line)?;
                if c < 0 {
                    return Err(CliError::data(format!("line {line}: negative count {c}")));
                }
                observations.extend(std::iter::repeat_n(r, c as usize));
            }
        }
    }
    if observations.is_empty() {
        return Err(CliError::data(format!("{} holds no observations", path.display())));
    }
    let labels = if labels.is_empty() {
        None
    } else {
        labels.resize(observations.len(), String::new());
        Some(labels)
    };
    Ok(Dataset { lattice, observations, labels })
}

/// Order-sensitive analyses need the recorded sequence.
pub fn require_sequence(format: InputFormat, command: &str) -> Result<(), CliError> {
    if format == InputFormat::FrequencyCsv {
        return Err(CliError::usage(format!(
            "{command} depends on observation order and cannot use frequency-csv input"
        )));
    }
    Ok(())
}
