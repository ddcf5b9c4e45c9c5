use std::io::{Read, Write};

use super::{EnsembleError, EnsembleResult, Retained};

fn csv_err(e: csv::Error) -> EnsembleError {
    EnsembleError::Format(e.to_string())
}

/// `pathway,variable,year,mean,std`, variable-major.
pub fn write_envelope_csv<W: Write>(ens: &EnsembleResult, out: W) -> Result<(), EnsembleError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["pathway", "variable", "year", "mean", "std"])
        .map_err(csv_err)?;
    let ny = ens.years.len();
    for (v, name) in ens.variables.iter().enumerate() {
        for (k, year) in ens.years.iter().enumerate() {
            let at = v * ny + k;
            w.write_record([
                ens.pathway.as_str(),
                name,
                &year.to_string(),
                &ens.mean[at].to_string(),
                &ens.std[at].to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `pathway,realization,variable,year,value` for every retained value.
pub fn write_indicator_csv<W: Write>(ens: &EnsembleResult, out: W) -> Result<(), EnsembleError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["pathway", "realization", "variable", "year", "value"])
        .map_err(csv_err)?;
    let r = &ens.retained;
    for i in 0..ens.realizations {
        let idx = i.to_string();
        for (v, name) in r.variables.iter().enumerate() {
            for (k, year) in r.years.iter().enumerate() {
                w.write_record([
                    ens.pathway.as_str(),
                    &idx,
                    name,
                    &year.to_string(),
                    &r.value(i, v, k).to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<&str, EnsembleError> {
    rec.get(i)
        .ok_or_else(|| EnsembleError::Format(format!("line {line}: missing column {}", i + 1)))
}

fn number(s: &str, line: u64) -> Result<f64, EnsembleError> {
    s.parse()
        .map_err(|_| EnsembleError::Format(format!("line {line}: `{s}` is not a number")))
}

fn check_header(rec: &csv::StringRecord, expected: &[&str]) -> Result<(), EnsembleError> {
    if rec.iter().ne(expected.iter().copied()) {
        return Err(EnsembleError::Format(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            rec.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn first_seen<T: PartialEq + Clone>(list: &mut Vec<T>, item: &T) -> usize {
    match list.iter().position(|x| x == item) {
        Some(i) => i,
        None => {
            list.push(item.clone());
            list.len() - 1
        }
    }
}

/// Rebuilds an ensemble from its envelope and indicator files.
pub fn read_ensemble<R1: Read, R2: Read>(
    envelope: R1,
    indicators: R2,
    seed: u64,
) -> Result<EnsembleResult, EnsembleError> {
    let mut rd = csv::Reader::from_reader(envelope);
    check_header(
        rd.headers().map_err(csv_err)?,
        &["pathway", "variable", "year", "mean", "std"],
    )?;
    let mut pathway: Option<String> = None;
    let mut variables: Vec<String> = Vec::new();
    let mut years: Vec<f64> = Vec::new();
    let mut cells: Vec<(usize, usize, f64, f64)> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let p = field(&rec, 0, line)?;
        match &pathway {
            None => pathway = Some(p.to_string()),
            Some(q) if q != p => {
                return Err(EnsembleError::Format(format!(
                    "line {line}: mixed pathways `{q}` and `{p}`"
                )))
            }
            _ => {}
        }
        let v = first_seen(&mut variables, &field(&rec, 1, line)?.to_string());
        let k = first_seen(&mut years, &number(field(&rec, 2, line)?, line)?);
        cells.push((
            v,
            k,
            number(field(&rec, 3, line)?, line)?,
            number(field(&rec, 4, line)?, line)?,
        ));
    }
    let ny = years.len();
    if cells.len() != variables.len() * ny {
        return Err(EnsembleError::Format(
            "envelope is not a full variable by year grid".into(),
        ));
    }
    let mut mean = vec![f64::NAN; cells.len()];
    let mut std = vec![f64::NAN; cells.len()];
    for (v, k, m, s) in cells {
        mean[v * ny + k] = m;
        std[v * ny + k] = s;
    }

    let mut rd = csv::Reader::from_reader(indicators);
    check_header(
        rd.headers().map_err(csv_err)?,
        &["pathway", "realization", "variable", "year", "value"],
    )?;
    let mut rvars: Vec<String> = Vec::new();
    let mut ryears: Vec<f64> = Vec::new();
    let mut rows: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut realizations = 0;
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let r: usize = field(&rec, 1, line)?
            .parse()
            .map_err(|_| EnsembleError::Format(format!("line {line}: bad realization index")))?;
        let v = first_seen(&mut rvars, &field(&rec, 2, line)?.to_string());
        let k = first_seen(&mut ryears, &number(field(&rec, 3, line)?, line)?);
        realizations = realizations.max(r + 1);
        rows.push((r, v, k, number(field(&rec, 4, line)?, line)?));
    }
    let (nv, nk) = (rvars.len(), ryears.len());
    if rows.len() != realizations * nv * nk {
        return Err(EnsembleError::Format(
            "indicator file is not a full realization grid".into(),
        ));
    }
    let mut values = vec![f64::NAN; rows.len()];
    for (r, v, k, x) in rows {
        values[(r * nv + v) * nk + k] = x;
    }
    Ok(EnsembleResult {
        pathway: pathway.unwrap_or_default(),
        seed,
        realizations,
        years,
        variables,
        mean,
        std,
        retained: Retained {
            variables: rvars,
            years: ryears,
            values,
        },
    })
}
