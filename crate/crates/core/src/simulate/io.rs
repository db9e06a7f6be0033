//! Exit-sample CSV: `#` comment lines (one of them carrying the batch
//! configuration as JSON) followed by `path_id,tau,censored,x0_1,x0_2,t_max`.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::simulate::engine::{BatchConfig, ExitSample};

const CONFIG_PREFIX: &str = "# batch_config: ";
const HEADER: [&str; 6] = ["path_id", "tau", "censored", "x0_1", "x0_2", "t_max"];

pub fn write_exit_samples<W: Write>(mut out: W, cfg: Option<&BatchConfig>, samples: &[ExitSample]) -> Result<()> {
    writeln!(out, "# wedgewalk exit samples")?;
    if let Some(cfg) = cfg {
        writeln!(out, "{CONFIG_PREFIX}{}", serde_json::to_string(cfg)?)?;
    }
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(HEADER)?;
    for s in samples {
        wtr.write_record([
            s.path_id.to_string(),
            s.tau.to_string(),
            (s.censored as u8).to_string(),
            s.x0[0].to_string(),
            s.x0[1].to_string(),
            s.t_max.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Parses an exit-sample file, returning the embedded configuration if the
/// file has one.
pub fn read_exit_samples<R: Read>(input: R) -> Result<(Option<BatchConfig>, Vec<ExitSample>)> {
    let mut cfg = None;
    let mut body = String::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        if let Some(json) = line.strip_prefix(CONFIG_PREFIX) {
            cfg = Some(serde_json::from_str(json)?);
        } else if !line.starts_with('#') {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Format(format!("unexpected header {:?}", headers)));
    }
    let mut samples = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<i64> {
            rec[i]
                .trim()
                .parse::<i64>()
                .map_err(|e| Error::Format(format!("row {}: column {}: {e}", row + 1, HEADER[i])))
        };
        let unsigned = |i: usize| -> Result<u64> {
            u64::try_from(field(i)?).map_err(|_| Error::Format(format!("row {}: {} is negative", row + 1, HEADER[i])))
        };
        let censored = match field(2)? {
            0 => false,
            1 => true,
            v => return Err(Error::Format(format!("row {}: censored must be 0 or 1, got {v}", row + 1))),
        };
        let s = ExitSample {
            path_id: unsigned(0)?,
            tau: unsigned(1)?,
            censored,
            x0: [field(3)?, field(4)?],
            t_max: unsigned(5)?,
        };
        if s.tau > s.t_max || (s.censored && s.tau != s.t_max) {
            return Err(Error::Format(format!("row {}: inconsistent tau / t_max / censored", row + 1)));
        }
        samples.push(s);
    }
    Ok((cfg, samples))
}
