use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// One asset-day observation from the price input file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRecord<T> {
    pub date: NaiveDate,
    pub asset_id: String,
    pub price: T,
    pub volume: T,
    pub market_cap: T,
    pub group: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    date: NaiveDate,
    asset_id: String,
    price: f64,
    volume: f64,
    market_cap: f64,
    group: String,
}

/// Parse `date,asset_id,price,volume,market_cap,group` rows.
///
/// Rejects non-positive prices, negative volumes or market caps and
/// duplicated `(date, asset_id)` pairs; errors carry the 1-based data record
/// number.
pub fn read_price_csv<T: Scalar, R: Read>(
    reader: R,
    source_name: &str,
) -> Result<Vec<RawRecord<T>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["date", "asset_id", "price", "volume", "market_cap", "group"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            source_name: source_name.to_string(),
            record: 0,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (idx, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let record = idx + 1;
        let parse_err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            record,
            message,
        };
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        if !(row.price > 0.0) || !row.price.is_finite() {
            return Err(Error::NonPositivePrice {
                date: row.date.to_string(),
                asset_id: row.asset_id,
                price: row.price,
            });
        }
        if !(row.volume >= 0.0) || !(row.market_cap >= 0.0) {
            return Err(parse_err(format!(
                "negative volume or market_cap for `{}` on {}",
                row.asset_id, row.date
            )));
        }
        if !seen.insert((row.date, row.asset_id.clone())) {
            return Err(parse_err(format!(
                "duplicate observation for `{}` on {}",
                row.asset_id, row.date
            )));
        }
        out.push(RawRecord {
            date: row.date,
            asset_id: row.asset_id,
            price: T::lit(row.price),
            volume: T::lit(row.volume),
            market_cap: T::lit(row.market_cap),
            group: row.group,
        });
    }
    Ok(out)
}

pub fn write_price_csv<T: Scalar, W: Write>(writer: W, records: &[RawRecord<T>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in records {
        wtr.serialize(CsvRow {
            date: r.date,
            asset_id: r.asset_id.clone(),
            price: r.price.as_f64(),
            volume: r.volume.as_f64(),
            market_cap: r.market_cap.as_f64(),
            group: r.group.clone(),
        })?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "date,asset_id,price,volume,market_cap,group\n\
        2022-10-01,FET,0.10,25000,1e8,GAI\n\
        2022-10-02,FET,0.11,30000,1.1e8,GAI\n";

    #[test]
    fn parses_and_round_trips() {
        let recs: Vec<RawRecord<f64>> = read_price_csv(GOOD.as_bytes(), "prices.csv").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].price, 0.11);
        let mut buf = Vec::new();
        write_price_csv(&mut buf, &recs).unwrap();
        let again: Vec<RawRecord<f64>> = read_price_csv(buf.as_slice(), "x").unwrap();
        assert_eq!(again, recs);
    }

    #[test]
    fn rejects_non_positive_price_with_location() {
        let bad = "date,asset_id,price,volume,market_cap,group\n2022-10-01,FET,0,1,1,GAI\n";
        let err = read_price_csv::<f64, _>(bad.as_bytes(), "p").unwrap_err();
        match err {
            Error::NonPositivePrice { date, asset_id, .. } => {
                assert_eq!(date, "2022-10-01");
                assert_eq!(asset_id, "FET");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_bad_header() {
        let dup = format!("{GOOD}2022-10-02,FET,0.12,30000,1e8,GAI\n");
        let err = read_price_csv::<f64, _>(dup.as_bytes(), "p").unwrap_err();
        assert!(matches!(err, Error::Parse { record: 3, .. }), "{err}");
        let hdr = "date,asset,price\n2022-10-01,FET,1\n";
        assert!(matches!(
            read_price_csv::<f64, _>(hdr.as_bytes(), "p"),
            Err(Error::Parse { record: 0, .. })
        ));
    }

    #[test]
    fn malformed_number_names_record() {
        let bad = "date,asset_id,price,volume,market_cap,group\n2022-10-01,FET,abc,1,1,GAI\n";
        let err = read_price_csv::<f64, _>(bad.as_bytes(), "prices.csv").unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("prices.csv") && msg.contains("record 1"),
            "{msg}"
        );
    }
}
