//! Retail (search-volume) and institutional (news) attention measures and
//! the launch x AI interaction regression with White standard errors.

mod regression;
mod series;

pub use regression::{
    cell_index, interaction_regression, wald_equality, wald_equality_test, wald_label, white_vcov,
    AttentionOptions, AttentionRegressionResult, WaldTest, SLOPE_NAMES, WALD_PAIRS,
};
pub use series::{
    institutional_index, read_news_csv, read_trends_csv, trends_delta, AttentionSeries, DeltaKind,
    NewsRecord, SentimentWeighting,
};
