//! Synthetic panels with known effects, and brute-force oracles.

mod attention;
mod generate;
mod oracle;

pub use attention::{generate_attention_panel, AttentionSpec, GeneratedAttention};
pub use generate::{
    export_price_records, generate_panel, CovariateEffects, GeneratedPanel, NoiseKind, PanelSpec,
};
pub use oracle::{
    dense_ols_oracle, grid_simplex_oracle, grid_weight_oracle, GridResult, WeightTarget,
};
