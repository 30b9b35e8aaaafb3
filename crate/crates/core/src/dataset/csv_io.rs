//! CSV ingestion and export.
//!
//! One row per sample: `animal_id,t_index,ax,ay,az,mx,my,mz,gx,gy,gz,label`.
//! `t_index` is a 0-based 50 Hz sample counter per animal; `label` ∈ 1..=9.
//! Header row required, UTF-8. Rows of different animals may interleave;
//! within an animal `t_index` must be exactly 0,1,2,…

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::{ActivityClass, IMURecording, CHANNEL_NAMES, NUM_CHANNELS};
use crate::{Error, Result};

/// The exact header line every dataset file starts with.
pub const CSV_HEADER: &str = "animal_id,t_index,ax,ay,az,mx,my,mz,gx,gy,gz,label";

/// Loads recordings from a CSV file; one recording per distinct animal in
/// first-seen order.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<IMURecording>> {
    let file = File::open(path.as_ref())?;
    load_csv_reader(file)
}

/// Same as [`load_csv`] over any reader.
pub fn load_csv_reader(reader: impl Read) -> Result<Vec<IMURecording>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);

    {
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header must be `{CSV_HEADER}`, got `{}`", got.join(",")),
            });
        }
    }

    let mut order: Vec<String> = Vec::new();
    let mut by_animal: HashMap<String, IMURecording> = HashMap::new();

    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());

        if record.len() != NUM_CHANNELS + 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, got {}", NUM_CHANNELS + 3, record.len()),
            });
        }

        let animal_id = record[0].to_string();
        if animal_id.is_empty() {
            return Err(Error::Parse { line, msg: "empty animal_id".into() });
        }

        let t_index: u64 = record[1]
            .parse()
            .map_err(|_| Error::Parse { line, msg: format!("bad t_index `{}`", &record[1]) })?;

        let mut values = [0.0f64; NUM_CHANNELS];
        for (c, v) in values.iter_mut().enumerate() {
            let field = &record[c + 2];
            *v = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad {} value `{}`", CHANNEL_NAMES[c], field),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-finite {} value `{}`", CHANNEL_NAMES[c], field),
                });
            }
        }

        let label: u8 = record[NUM_CHANNELS + 2]
            .parse()
            .ok()
            .filter(|&l| ActivityClass::from_id(l).is_some())
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("label `{}` outside 1..=9", &record[NUM_CHANNELS + 2]),
            })?;

        let rec = by_animal.entry(animal_id.clone()).or_insert_with(|| {
            order.push(animal_id.clone());
            IMURecording {
                animal_id,
                channels: std::array::from_fn(|_| Vec::new()),
                labels: Vec::new(),
            }
        });

        if t_index != rec.labels.len() as u64 {
            return Err(Error::Parse {
                line,
                msg: format!(
                    "animal {}: t_index {} out of order (expected {})",
                    rec.animal_id,
                    t_index,
                    rec.labels.len()
                ),
            });
        }

        for (c, v) in values.into_iter().enumerate() {
            rec.channels[c].push(v);
        }
        rec.labels.push(label);
    }

    if order.is_empty() {
        return Err(Error::validation("CSV contains no data rows"));
    }

    Ok(order.into_iter().map(|id| by_animal.remove(&id).unwrap()).collect())
}

/// Writes recordings in the dataset CSV schema. Float formatting is the
/// shortest round-trip representation, so save → load is lossless and a
/// fixed dataset always serializes to identical bytes.
pub fn write_csv(recordings: &[IMURecording], path: impl AsRef<Path>) -> Result<()> {
    let mut file = File::create(path.as_ref())?;
    write_csv_writer(recordings, &mut file)
}

/// Same as [`write_csv`] over any writer.
pub fn write_csv_writer(recordings: &[IMURecording], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for rec in recordings {
        rec.validate()?;
        for t in 0..rec.len() {
            write!(w, "{},{}", rec.animal_id, t)?;
            for ch in &rec.channels {
                write!(w, ",{}", ch[t])?;
            }
            writeln!(w, ",{}", rec.labels[t])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_csv(rows: usize, animal: &str, label: u8) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for t in 0..rows {
            s.push_str(&format!(
                "{animal},{t},0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,{label}\n"
            ));
        }
        s
    }

    #[test]
    fn loads_single_animal_single_class() {
        let recs = load_csv_reader(sample_csv(100, "cow-1", 1).as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].animal_id, "cow-1");
        assert_eq!(recs[0].len(), 100);
        assert!(recs[0].labels.iter().all(|&l| l == 1));
        assert_eq!(recs[0].channels[2][99], 0.3);
    }

    #[test]
    fn reports_bad_label_with_line_number() {
        // Line 7 = header + rows 0..=4, then the bad row.
        let mut s = sample_csv(5, "a", 1);
        s.push_str("a,5,0,0,0,0,0,0,0,0,0,10\n");
        let err = load_csv_reader(s.as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 7, "{msg}");
                assert!(msg.contains("10"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_header() {
        let s = "animal,t,ax,ay,az,mx,my,mz,gx,gy,gz,label\n";
        assert!(matches!(
            load_csv_reader(s.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_gapped_t_index() {
        let mut s = sample_csv(3, "a", 1);
        s.push_str("a,5,0,0,0,0,0,0,0,0,0,1\n");
        let err = load_csv_reader(s.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("out of order"), "{err}");
    }

    #[test]
    fn rejects_non_finite_values() {
        let mut s = String::from(CSV_HEADER);
        s.push_str("\na,0,NaN,0,0,0,0,0,0,0,0,1\n");
        assert!(load_csv_reader(s.as_bytes()).is_err());
    }

    #[test]
    fn interleaved_animals_split_correctly() {
        let mut s = format!("{CSV_HEADER}\n");
        for t in 0..10 {
            s.push_str(&format!("a,{t},1,1,1,1,1,1,1,1,1,1\n"));
            s.push_str(&format!("b,{t},2,2,2,2,2,2,2,2,2,2\n"));
        }
        let recs = load_csv_reader(s.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].animal_id, "a");
        assert_eq!(recs[1].animal_id, "b");
        assert_eq!(recs[0].len(), 10);
        assert_eq!(recs[1].len(), 10);
    }

    #[test]
    fn round_trips_exactly() {
        let rec = IMURecording {
            animal_id: "x".into(),
            channels: std::array::from_fn(|c| {
                (0..20).map(|t| (t as f64 * 0.731 + c as f64).sin()).collect()
            }),
            labels: (0..20).map(|t| (t % 9 + 1) as u8).collect(),
        };
        let mut buf = Vec::new();
        write_csv_writer(&[rec.clone()], &mut buf).unwrap();
        let loaded = load_csv_reader(buf.as_slice()).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0], rec);
    }
}
