//! Balanced log-return panels built from daily price records, plus pooled
//! descriptive statistics.

mod describe;
mod panel;
mod records;

pub use describe::{descriptive_stats, jarque_bera, JarqueBera, JbError, StatsRow};
pub use panel::{
    build_group_panel, build_panel, compute_log_returns, BalanceReport, BuildOptions, BuildOutput,
    DroppedAsset, GroupSelection, LiquidityRule, Panel, PriceSeries, COV_LN_CAP, COV_LN_VOL,
};
pub use records::{read_price_csv, write_price_csv, RawRecord};
