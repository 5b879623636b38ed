use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// A dated attention measure for one search term or news topic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttentionSeries<T> {
    pub term: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<T>,
}

impl<T: Scalar> AttentionSeries<T> {
    pub fn new(term: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<T>) -> Result<Self> {
        let term = term.into();
        if dates.len() != values.len() {
            return Err(Error::invalid(format!(
                "series `{term}`: dates and values differ in length"
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "series `{term}`: dates not strictly increasing at {}",
                w[1]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("series `{term}`: non-finite value")));
        }
        Ok(Self {
            term,
            dates,
            values,
        })
    }

    /// Level series must stay within the 0-100 index range.
    pub fn check_level_range(&self) -> Result<()> {
        let hundred = T::lit(100.0);
        match self
            .values
            .iter()
            .position(|&v| v < T::zero() || v > hundred)
        {
            Some(k) => Err(Error::invalid(format!(
                "series `{}`: value {} on {} outside [0, 100]",
                self.term,
                self.values[k].as_f64(),
                self.dates[k]
            ))),
            None => Ok(()),
        }
    }

    pub fn value_on(&self, date: NaiveDate) -> Option<T> {
        self.dates.binary_search(&date).ok().map(|k| self.values[k])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaKind {
    /// G_t - G_{t-1}
    #[default]
    Arithmetic,
    /// 100 (G_t - G_{t-1}) / G_{t-1}
    Percent,
}

/// Day-on-day change of an attention series; the first date is dropped.
pub fn trends_delta<T: Scalar>(
    series: &AttentionSeries<T>,
    kind: DeltaKind,
) -> Result<AttentionSeries<T>> {
    if series.values.len() < 2 {
        return Err(Error::invalid(format!(
            "series `{}` needs at least two observations for a change",
            series.term
        )));
    }
    let mut values = Vec::with_capacity(series.values.len() - 1);
    for (k, w) in series.values.windows(2).enumerate() {
        values.push(match kind {
            DeltaKind::Arithmetic => w[1] - w[0],
            DeltaKind::Percent => {
                if w[0] == T::zero() {
                    return Err(Error::invalid(format!(
                        "series `{}`: percent change undefined after zero on {}",
                        series.term, series.dates[k]
                    )));
                }
                T::lit(100.0) * (w[1] - w[0]) / w[0]
            }
        });
    }
    AttentionSeries::new(series.term.clone(), series.dates[1..].to_vec(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewsRecord {
    pub date: NaiveDate,
    pub topic: String,
    pub count: u64,
    pub mean_sentiment: f64,
}

/// How sentiment scales the daily article count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentWeighting {
    /// count * (1 + s) / 2
    #[default]
    Polarity,
    /// Raw counts.
    CountOnly,
}

/// Sentiment-adjusted daily news count, min-max scaled to 0-100 over the
/// sample. A constant raw series scales to all zeros with a warning.
pub fn institutional_index<T: Scalar>(
    records: &[NewsRecord],
    weighting: SentimentWeighting,
) -> Result<AttentionSeries<T>> {
    if records.len() < 2 {
        return Err(Error::invalid(
            "institutional index needs at least two dates",
        ));
    }
    let topic = records[0].topic.clone();
    let mut sorted: Vec<&NewsRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.date);
    let mut raw = Vec::with_capacity(sorted.len());
    for r in &sorted {
        if r.topic != topic {
            return Err(Error::invalid(format!(
                "institutional index mixes topics `{topic}` and `{}`",
                r.topic
            )));
        }
        if !(-1.0..=1.0).contains(&r.mean_sentiment) {
            return Err(Error::invalid(format!(
                "sentiment {} on {} outside [-1, 1]",
                r.mean_sentiment, r.date
            )));
        }
        let count = T::lit(r.count as f64);
        raw.push(match weighting {
            SentimentWeighting::Polarity => {
                count * (T::one() + T::lit(r.mean_sentiment)) / T::lit(2.0)
            }
            SentimentWeighting::CountOnly => count,
        });
    }
    let lo = raw.iter().copied().fold(T::infinity(), T::min);
    let hi = raw.iter().copied().fold(T::neg_infinity(), T::max);
    let values = if hi > lo {
        raw.iter()
            .map(|&v| T::lit(100.0) * (v - lo) / (hi - lo))
            .collect()
    } else {
        log::warn!("institutional index for `{topic}` is constant; returning zeros");
        vec![T::zero(); raw.len()]
    };
    AttentionSeries::new(topic, sorted.iter().map(|r| r.date).collect(), values)
}

#[derive(Debug, Deserialize)]
struct TrendsRow {
    date: NaiveDate,
    term: String,
    volume: f64,
}

fn check_header<R: Read>(
    rdr: &mut csv::Reader<R>,
    expected: &[&str],
    source_name: &str,
) -> Result<()> {
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            source_name: source_name.to_string(),
            record: 0,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    Ok(())
}

/// Parse `date,term,volume` rows into one series per term.
pub fn read_trends_csv<T: Scalar, R: Read>(
    reader: R,
    source_name: &str,
) -> Result<BTreeMap<String, AttentionSeries<T>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_header(&mut rdr, &["date", "term", "volume"], source_name)?;
    let mut by_term: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for (k, row) in rdr.deserialize::<TrendsRow>().enumerate() {
        let parse_err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            record: k + 1,
            message,
        };
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        if !(0.0..=100.0).contains(&row.volume) {
            return Err(parse_err(format!("volume {} outside [0, 100]", row.volume)));
        }
        if by_term
            .entry(row.term.clone())
            .or_default()
            .insert(row.date, row.volume)
            .is_some()
        {
            return Err(parse_err(format!("duplicate ({}, {})", row.date, row.term)));
        }
    }
    by_term
        .into_iter()
        .map(|(term, m)| {
            let (dates, values): (Vec<_>, Vec<_>) =
                m.into_iter().map(|(d, v)| (d, T::lit(v))).unzip();
            Ok((term.clone(), AttentionSeries::new(term, dates, values)?))
        })
        .collect()
}

/// Parse `date,topic,count,mean_sentiment` rows.
pub fn read_news_csv<R: Read>(reader: R, source_name: &str) -> Result<Vec<NewsRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_header(
        &mut rdr,
        &["date", "topic", "count", "mean_sentiment"],
        source_name,
    )?;
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<NewsRecord>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            record: k + 1,
            message: e.to_string(),
        })?;
        if !(-1.0..=1.0).contains(&row.mean_sentiment) {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                record: k + 1,
                message: format!("mean_sentiment {} outside [-1, 1]", row.mean_sentiment),
            });
        }
        out.push(row);
    }
    Ok(out)
}
