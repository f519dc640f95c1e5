//! Expected-BER curves p_e(band, modulation, distance) loaded from CSV.
//!
//! Format: header `band,modulation,distance_cm,ber`, one knot per row,
//! `#` starts a comment line. Lookups interpolate linearly in distance
//! between knots and never extrapolate.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::planner::Modulation;
use crate::scalar::Scalar;

pub const HEADER: [&str; 4] = ["band", "modulation", "distance_cm", "ber"];

#[derive(Debug, Error)]
pub enum BerTableError {
    #[error("row {row}: {message}")]
    Parse { row: u64, message: String },
    #[error("row {row}: BER {ber} is outside [0, 1]")]
    Range { row: u64, ber: f64 },
    #[error("no BER series for band {band} / {modulation}")]
    UnknownSeries {
        band: String,
        modulation: Modulation,
    },
    #[error("distance {distance} m is outside the table range [{min}, {max}] m")]
    OutOfRange { distance: f64, min: f64, max: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint<T> {
    /// Distance exactly as written in the table.
    pub distance_cm: T,
    pub distance: T,
    pub ber: T,
}

pub type SeriesKey = (String, Modulation);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BerTable<T> {
    series: BTreeMap<SeriesKey, Vec<BerPoint<T>>>,
}

fn parse_number<T: Scalar>(field: &str, row: u64, what: &str) -> Result<T, BerTableError> {
    let v: f64 = field.parse().map_err(|_| BerTableError::Parse {
        row,
        message: format!("{what} {field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(BerTableError::Parse {
            row,
            message: format!("{what} {field:?} is not finite"),
        });
    }
    Ok(T::of(v))
}

impl<T: Scalar> BerTable<T> {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, BerTableError> {
        let file = std::fs::File::open(path)?;
        Self::load(file)
    }

    pub fn load<R: Read>(source: R) -> Result<Self, BerTableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(source);

        let headers = reader.headers()?.clone();
        if headers.iter().ne(HEADER.iter().copied()) {
            return Err(BerTableError::Parse {
                row: 1,
                message: format!("expected header {:?}, got {:?}", HEADER.join(","), headers),
            });
        }

        let mut series: BTreeMap<SeriesKey, Vec<BerPoint<T>>> = BTreeMap::new();
        let mut rows: BTreeMap<SeriesKey, Vec<u64>> = BTreeMap::new();
        for record in reader.records() {
            let record = record?;
            let row = record.position().map_or(0, |p| p.line());
            if record.len() != HEADER.len() {
                return Err(BerTableError::Parse {
                    row,
                    message: format!("expected {} fields, got {}", HEADER.len(), record.len()),
                });
            }
            let band = record[0].to_string();
            if band.is_empty() {
                return Err(BerTableError::Parse {
                    row,
                    message: "empty band label".into(),
                });
            }
            let modulation: Modulation = record[1].parse().map_err(|e| BerTableError::Parse {
                row,
                message: format!("{e}"),
            })?;
            let distance_cm: T = parse_number(&record[2], row, "distance_cm")?;
            if !(distance_cm > T::zero()) {
                return Err(BerTableError::Parse {
                    row,
                    message: format!("distance {} cm must be positive", &record[2]),
                });
            }
            let ber: T = parse_number(&record[3], row, "ber")?;
            if ber < T::zero() || ber > T::one() {
                return Err(BerTableError::Range {
                    row,
                    ber: ber.as_f64(),
                });
            }
            let key = (band, modulation);
            series.entry(key.clone()).or_default().push(BerPoint {
                distance_cm,
                distance: distance_cm / T::of(100.0),
                ber,
            });
            rows.entry(key).or_default().push(row);
        }

        for (key, points) in series.iter_mut() {
            let lines = &rows[key];
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&a, &b| {
                points[a]
                    .distance_cm
                    .partial_cmp(&points[b].distance_cm)
                    .expect("finite distances")
            });
            for w in order.windows(2) {
                if points[w[0]].distance_cm == points[w[1]].distance_cm {
                    return Err(BerTableError::Parse {
                        row: lines[w[0]].max(lines[w[1]]),
                        message: format!(
                            "duplicate knot ({}, {}, {} cm)",
                            key.0, key.1, points[w[1]].distance_cm
                        ),
                    });
                }
            }
            *points = order.into_iter().map(|i| points[i]).collect();
        }

        Ok(Self { series })
    }

    /// Writes the table sorted by band, modulation and distance.
    pub fn write<W: Write>(&self, sink: W) -> Result<(), BerTableError> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(HEADER)?;
        for ((band, modulation), points) in &self.series {
            for p in points {
                writer.write_record([
                    band.as_str(),
                    modulation.label(),
                    &p.distance_cm.to_string(),
                    &p.ber.to_string(),
                ])?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn series(&self, band: &str, modulation: Modulation) -> Option<&[BerPoint<T>]> {
        self.series
            .get(&(band.to_string(), modulation))
            .map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = &SeriesKey> {
        self.series.keys()
    }

    /// Distance range covered by a series, meters.
    pub fn domain(&self, band: &str, modulation: Modulation) -> Result<(T, T), BerTableError> {
        let points = self
            .series(band, modulation)
            .ok_or_else(|| BerTableError::UnknownSeries {
                band: band.to_string(),
                modulation,
            })?;
        let first = points.first().expect("series are never empty");
        let last = points.last().expect("series are never empty");
        Ok((first.distance, last.distance))
    }

    /// p_e at `distance` meters.
    pub fn lookup(
        &self,
        band: &str,
        modulation: Modulation,
        distance: T,
    ) -> Result<T, BerTableError> {
        let points = self
            .series(band, modulation)
            .ok_or_else(|| BerTableError::UnknownSeries {
                band: band.to_string(),
                modulation,
            })?;
        let (min, max) = self.domain(band, modulation)?;
        if !(distance >= min && distance <= max) {
            return Err(BerTableError::OutOfRange {
                distance: distance.as_f64(),
                min: min.as_f64(),
                max: max.as_f64(),
            });
        }
        let upper = points.partition_point(|p| p.distance < distance);
        let hi = points[upper];
        if hi.distance == distance || upper == 0 {
            return Ok(hi.ber);
        }
        let lo = points[upper - 1];
        let t = (distance - lo.distance) / (hi.distance - lo.distance);
        Ok(lo.ber + (hi.ber - lo.ber) * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# synthetic
band,modulation,distance_cm,ber
B,16PSK,650,0.05
B,16PSK,200,0.01
B,16PSK,1000,0.09
C,BPSK,200,0.0
C,BPSK,2000,0.001
";

    fn sample() -> BerTable<f64> {
        BerTable::load(SAMPLE.as_bytes()).unwrap()
    }

    #[test]
    fn header_only_is_empty() {
        let t: BerTable<f64> =
            BerTable::load("band,modulation,distance_cm,ber\n".as_bytes()).unwrap();
        assert!(t.is_empty());
        assert!(matches!(
            t.lookup("B", Modulation::Bpsk, 1.0),
            Err(BerTableError::UnknownSeries { .. })
        ));
    }

    #[test]
    fn single_row_in_meters() {
        let t: BerTable<f64> =
            BerTable::load("band,modulation,distance_cm,ber\nB,16PSK,650,0.05\n".as_bytes())
                .unwrap();
        let s = t.series("B", Modulation::Psk16).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].distance, 6.5);
        assert_eq!(t.lookup("B", Modulation::Psk16, 6.5).unwrap(), 0.05);
        assert!(t.lookup("B", Modulation::Psk16, 6.6).is_err());
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = BerTable::<f64>::load(
            "band,modulation,distance_cm,ber\nB,QPSK,300,0.1\nB,QPSK,300,0.2\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, BerTableError::Parse { row: 3, .. }), "{err}");
    }

    #[test]
    fn ber_range_checked() {
        let err =
            BerTable::<f64>::load("band,modulation,distance_cm,ber\nB,QPSK,300,1.5\n".as_bytes())
                .unwrap_err();
        assert!(matches!(err, BerTableError::Range { row: 2, .. }));
    }

    #[test]
    fn malformed_rows() {
        for body in [
            "B,QPSK,abc,0.1",
            "B,64QAM,100,0.1",
            "B,QPSK,-5,0.1",
            ",QPSK,100,0.1",
        ] {
            let text = format!("band,modulation,distance_cm,ber\n{body}\n");
            assert!(
                matches!(
                    BerTable::<f64>::load(text.as_bytes()),
                    Err(BerTableError::Parse { row: 2, .. })
                ),
                "{body}"
            );
        }
        assert!(BerTable::<f64>::load("a,b,c,d\n".as_bytes()).is_err());
    }

    #[test]
    fn knots_exact_and_midpoints_linear() {
        let t = sample();
        assert_eq!(t.lookup("B", Modulation::Psk16, 2.0).unwrap(), 0.01);
        assert_eq!(t.lookup("B", Modulation::Psk16, 6.5).unwrap(), 0.05);
        assert_eq!(t.lookup("B", Modulation::Psk16, 10.0).unwrap(), 0.09);
        let mid = t
            .lookup("B", Modulation::Psk16, (6.5 + 10.0) / 2.0)
            .unwrap();
        assert!((mid - 0.07).abs() < 1e-15);
    }

    #[test]
    fn no_extrapolation() {
        let t = sample();
        assert!(matches!(
            t.lookup("B", Modulation::Psk16, 10.01),
            Err(BerTableError::OutOfRange { .. })
        ));
        assert!(t.lookup("B", Modulation::Psk16, 1.99).is_err());
        assert!(matches!(
            t.lookup("A", Modulation::Psk16, 5.0),
            Err(BerTableError::UnknownSeries { .. })
        ));
    }

    #[test]
    fn write_then_load_is_identity() {
        let t = sample();
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let again = BerTable::<f64>::load(buf.as_slice()).unwrap();
        assert_eq!(again, t);
        let mut buf2 = Vec::new();
        again.write(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }
}
