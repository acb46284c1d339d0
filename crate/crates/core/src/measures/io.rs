//! Measure CSV files: a `# atomic-measure v1` line followed by `x,y,weight`
//! rows with 17 significant digits.

use std::io::{BufRead, BufReader, Read, Write};

use super::atomic::{Atom, AtomicMeasure};
use crate::error::{BmlError, Result};
use crate::numfmt::sci17;

pub const HEADER: &str = "# atomic-measure v1";

pub fn write_measure(out: &mut impl Write, mu: &AtomicMeasure) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for a in mu.atoms() {
        w.write_record([sci17(a.position[0]), sci17(a.position[1]), sci17(a.weight)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measure(input: impl Read) -> Result<AtomicMeasure> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != HEADER {
        return Err(BmlError::Format {
            what: "measure file",
            reason: format!("first line must be `{HEADER}`, found `{}`", first.trim_end()),
        });
    }
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut atoms = Vec::new();
    for (row, record) in csv.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(BmlError::Format {
                what: "measure file",
                reason: format!("row {} has {} fields, expected 3", row + 1, record.len()),
            });
        }
        let parse = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|e| BmlError::Format {
                what: "measure file",
                reason: format!("row {}, field {}: {e}", row + 1, i + 1),
            })
        };
        atoms.push(Atom {
            position: [parse(0)?, parse(1)?],
            weight: parse(2)?,
        });
    }
    AtomicMeasure::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bits() {
        let mu = AtomicMeasure::from_pairs(&[([0.1, -1.0 / 3.0], 0.7), ([5e-320, 2.0], 0.0)]).unwrap();
        let mut buf = Vec::new();
        write_measure(&mut buf, &mu).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(HEADER));
        let back = read_measure(buf.as_slice()).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn header_required() {
        assert!(read_measure("1,2,3\n".as_bytes()).is_err());
        assert!(read_measure("# atomic-measure v1\n1,2\n".as_bytes()).is_err());
        assert!(read_measure("# atomic-measure v1\n1,2,-1\n".as_bytes()).is_err());
        assert_eq!(read_measure("# atomic-measure v1\n".as_bytes()).unwrap().len(), 0);
    }
}
